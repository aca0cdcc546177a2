use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("matrix is not symmetric (defect {defect:.3e})")]
    NotSymmetric { defect: f64 },
    #[error("iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("finite-difference stencil leaves the chart box along coordinate {coord}")]
    DomainExceeded { coord: usize },
    #[error("point lies outside the chart domain (coordinate {coord})")]
    OutOfChart { coord: usize },
    #[error("metric is ill-conditioned (min eigenvalue {min_eig:.3e})")]
    IllConditioned { min_eig: f64 },
    #[error("curvature feed violates skew symmetry (defect {defect:.3e})")]
    FeedInconsistent { defect: f64 },
    #[error("bundle has no connection chart")]
    MissingConnectionChart,
    #[error("adapted frame pole: |1 - u_n| = {gap:.3e}")]
    FramePole { gap: f64 },
    #[error("level {c} is focal for radius {r0}")]
    FocalLevel { c: f64, r0: f64 },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("no Clifford system with m = {m} on R^{dim}", dim = 2 * .l)]
    NotRepresentable { m: usize, l: usize },
    #[error("point is too close to a focal submanifold (gradient norm {grad:.3e})")]
    NearFocal { grad: f64 },
    #[error("normal vector is not unit (|eta| - 1 = {defect:.3e})")]
    DegenerateNormal { defect: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("curvature tensor violates its index symmetries (defect {defect:.3e})")]
    TensorSymmetry { defect: f64 },
    #[error("unknown catalog id `{0}`")]
    UnknownId(String),
}
