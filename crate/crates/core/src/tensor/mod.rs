//! Foundational numerics shared by every geometry module.

mod curvature;
mod eigen;
mod fd;
mod sample;
mod spectrum;

pub use curvature::Curvature4Tensor;
pub use eigen::{sym_eigen, SymSpectrum, MAX_SWEEPS};
pub use fd::{fd_derive, fd_derive_vec, fd_partial_vec, ChartBox, FdScheme};
pub use sample::{sample_sphere, stream_rng, uniform_in_box, unit_vector, Stream};
pub use spectrum::{ShapeSpectrum, SpectrumCluster, CLUSTER_GAP};

use nalgebra::DMatrix;

/// Largest absolute entry of a matrix (0 for an empty matrix).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Largest absolute entrywise difference between two equally sized matrices.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Orthonormal basis (columns) of the orthogonal complement of the span of
/// `vectors` inside `R^dim`. The input vectors need not be orthonormal.
pub fn orthogonal_complement(vectors: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    let mut proj = DMatrix::<f64>::identity(dim, dim);
    let basis = gram_schmidt_vectors(vectors, 1e-10);
    for b in &basis {
        for i in 0..dim {
            for j in 0..dim {
                proj[(i, j)] -= b[i] * b[j];
            }
        }
    }
    let spec = sym_eigen(&proj).expect("projector is symmetric");
    let keep = dim - basis.len();
    let mut out = DMatrix::<f64>::zeros(dim, keep);
    // Eigenvalues are ascending, so the trailing ones are the unit eigenvalues.
    for (col, k) in (dim - keep..dim).enumerate() {
        out.set_column(col, &spec.eigenvectors.column(k));
    }
    out
}

/// Modified Gram-Schmidt; vectors whose residual norm drops below `tol` are skipped.
pub fn gram_schmidt_vectors(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > tol {
            basis.push(w.iter().map(|x| x / n).collect());
        }
    }
    basis
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
