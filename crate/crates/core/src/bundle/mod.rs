//! Connection metrics on total spaces of vector bundles and the geometry of
//! their sphere bundles `S_r`.
//!
//! Indices: base frame `i, j, k, l` in `0..m`, fiber `alpha, beta` in `0..n`.
//! In total-space tensors the fiber index `alpha` sits at slot `m + alpha`.

mod metric;
pub mod oracle;
mod sphere;

pub use metric::{
    check_connection_consistency, total_coframe, total_metric_chart, transnormal_check,
    TransnormalReport,
};
pub use sphere::{
    adapted_frame, positivity_scan, sphere_curvature, sphere_ricci, sphere_scalar,
    sphere_shape_spectrum, AdaptedFrame, PositivityScanReport, ScanOptions, SPHERE_NORMAL,
};

use std::fmt;
use std::sync::Arc;

use crate::base::{base_sample, BaseCurvatureSample, BaseGeometry};
use crate::tensor::Curvature4Tensor;
use crate::{GeomError, Result};

/// Tolerance for the skew symmetries of curvature feeds.
pub const FEED_TOL: f64 = 1e-12;

/// Fiber coordinates of the total-space chart live in `[-w, w]^n`.
pub const FIBER_HALF_WIDTH: f64 = 3.0;

/// `R_{alpha beta i j}` in the base frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleCurvature {
    pub n: usize,
    pub m: usize,
    data: Vec<f64>,
}

impl BundleCurvature {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![0.0; n * n * m * m],
        }
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, i: usize, j: usize) -> usize {
        ((a * self.n + b) * self.m + i) * self.m + j
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, i: usize, j: usize) -> f64 {
        self.data[self.idx(a, b, i, j)]
    }

    pub fn set(&mut self, a: usize, b: usize, i: usize, j: usize, v: f64) {
        let k = self.idx(a, b, i, j);
        self.data[k] = v;
    }

    /// Sets `R_{ab ij}` together with its three skew images.
    pub fn set_skew(&mut self, a: usize, b: usize, i: usize, j: usize, v: f64) {
        self.set(a, b, i, j, v);
        self.set(b, a, i, j, -v);
        self.set(a, b, j, i, -v);
        self.set(b, a, j, i, v);
    }

    /// Largest violation of `R_{ab ij} = -R_{ba ij} = -R_{ab ji}`.
    pub fn skew_defect(&self) -> f64 {
        let mut d = 0.0_f64;
        for a in 0..self.n {
            for b in 0..self.n {
                for i in 0..self.m {
                    for j in 0..self.m {
                        let v = self.get(a, b, i, j);
                        d = d.max((v + self.get(b, a, i, j)).abs());
                        d = d.max((v + self.get(a, b, j, i)).abs());
                    }
                }
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// Covariant derivative `R_{alpha beta i j, k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleCurvatureDeriv {
    pub n: usize,
    pub m: usize,
    data: Vec<f64>,
}

impl BundleCurvatureDeriv {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![0.0; n * n * m * m * m],
        }
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, i: usize, j: usize, k: usize) -> usize {
        (((a * self.n + b) * self.m + i) * self.m + j) * self.m + k
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(a, b, i, j, k)]
    }

    pub fn set(&mut self, a: usize, b: usize, i: usize, j: usize, k: usize, v: f64) {
        let x = self.idx(a, b, i, j, k);
        self.data[x] = v;
    }

    pub fn skew_defect(&self) -> f64 {
        let mut d = 0.0_f64;
        for a in 0..self.n {
            for b in 0..self.n {
                for i in 0..self.m {
                    for j in 0..self.m {
                        for k in 0..self.m {
                            let v = self.get(a, b, i, j, k);
                            d = d.max((v + self.get(b, a, i, j, k)).abs());
                            d = d.max((v + self.get(a, b, j, i, k)).abs());
                        }
                    }
                }
            }
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }
}

pub type CurvFn = Arc<dyn Fn(&[f64]) -> BundleCurvature + Send + Sync>;
pub type CurvDerivFn = Arc<dyn Fn(&[f64]) -> BundleCurvatureDeriv + Send + Sync>;
/// Connection forms `omega_{alpha beta} = sum_mu w[(alpha*n + beta)*m + mu] dx^mu`.
pub type ConnectionFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Local connection 1-forms in base coordinates.
#[derive(Clone)]
pub struct ConnectionForms {
    pub n: usize,
    pub m: usize,
    eval: ConnectionFn,
}

impl fmt::Debug for ConnectionForms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConnectionForms")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl ConnectionForms {
    pub fn new(n: usize, m: usize, eval: ConnectionFn) -> Self {
        Self { n, m, eval }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        Self::new(n, m, Arc::new(move |_| vec![0.0; n * n * m]))
    }

    /// Flat array, `(alpha * n + beta) * m + mu`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    pub fn eval_fn(&self) -> ConnectionFn {
        self.eval.clone()
    }
}

/// A rank-`n` Riemannian vector bundle with metric connection over a base.
#[derive(Clone)]
pub struct BundleSpec {
    pub id: String,
    pub base: BaseGeometry,
    pub rank: usize,
    pub curv: CurvFn,
    pub curv_deriv: CurvDerivFn,
    pub connection: Option<ConnectionForms>,
    /// True when `curv_deriv` vanishes identically by construction.
    pub curv_deriv_zero: bool,
    pub fiber_half_width: f64,
}

impl fmt::Debug for BundleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BundleSpec")
            .field("id", &self.id)
            .field("base", &self.base.id)
            .field("rank", &self.rank)
            .field("connection", &self.connection.is_some())
            .finish_non_exhaustive()
    }
}

impl BundleSpec {
    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn total_dim(&self) -> usize {
        self.base_dim() + self.rank
    }

    /// Product bundle `M x R^n` with the trivial connection.
    pub fn trivial(base: BaseGeometry, rank: usize, id: impl Into<String>) -> Self {
        let m = base.dim();
        Self {
            id: id.into(),
            base,
            rank,
            curv: Arc::new(move |_| BundleCurvature::zeros(rank, m)),
            curv_deriv: Arc::new(move |_| BundleCurvatureDeriv::zeros(rank, m)),
            connection: Some(ConnectionForms::zero(rank, m)),
            curv_deriv_zero: true,
            fiber_half_width: FIBER_HALF_WIDTH,
        }
    }

    /// `flat:m:n`.
    pub fn flat(m: usize, n: usize) -> Self {
        Self::trivial(BaseGeometry::flat(m), n, format!("flat:{m}:{n}"))
    }

    /// `trivial:s2:n`: product bundle over the unit 2-sphere.
    pub fn trivial_over_s2(n: usize) -> Self {
        let base = BaseGeometry::round_sphere(2, 1.0).expect("unit sphere");
        Self::trivial(base, n, format!("trivial:s2:{n}"))
    }

    /// `ts2`: tangent bundle of the unit 2-sphere, fiber index `alpha`
    /// identified with base index `alpha`. In the chart
    /// `dy0^2 + sin^2 y0 dy1^2` the connection form is `omega_01 = cos y0 dy1`
    /// and `R_{01 01} = 1`.
    pub fn ts2() -> Self {
        let base = BaseGeometry::round_sphere(2, 1.0).expect("unit sphere");
        let mut curv = BundleCurvature::zeros(2, 2);
        curv.set_skew(0, 1, 0, 1, 1.0);
        Self {
            id: "ts2".into(),
            base,
            rank: 2,
            curv: Arc::new(move |_| curv.clone()),
            curv_deriv: Arc::new(|_| BundleCurvatureDeriv::zeros(2, 2)),
            connection: Some(ConnectionForms::new(
                2,
                2,
                Arc::new(|y: &[f64]| {
                    let c = y[0].cos();
                    // (alpha, beta, mu): (0,1,1) = c, (1,0,1) = -c
                    vec![0.0, 0.0, 0.0, c, 0.0, -c, 0.0, 0.0]
                }),
            )),
            curv_deriv_zero: true,
            fiber_half_width: FIBER_HALF_WIDTH,
        }
    }

    /// `twisted:lambda`: rank 3 over flat `R^2` with
    /// `omega_01 = -lambda x0 dx1`, hence `R_{01 01} = lambda`; fiber
    /// direction 2 is parallel.
    pub fn twisted(lambda: f64) -> Self {
        let base = BaseGeometry::flat(2);
        let mut curv = BundleCurvature::zeros(3, 2);
        curv.set_skew(0, 1, 0, 1, lambda);
        Self {
            id: format!("twisted:{lambda}"),
            base,
            rank: 3,
            curv: Arc::new(move |_| curv.clone()),
            curv_deriv: Arc::new(|_| BundleCurvatureDeriv::zeros(3, 2)),
            connection: Some(ConnectionForms::new(
                3,
                2,
                Arc::new(move |x: &[f64]| {
                    let at = |a: usize, b: usize, mu: usize| (a * 3 + b) * 2 + mu;
                    let mut w = vec![0.0; 18];
                    w[at(0, 1, 1)] = -lambda * x[0];
                    w[at(1, 0, 1)] = lambda * x[0];
                    w
                }),
            )),
            curv_deriv_zero: true,
            fiber_half_width: FIBER_HALF_WIDTH,
        }
    }

    /// Parses `flat:m:n`, `trivial:s2:n`, `ts2` and `twisted:lambda`.
    pub fn parse(id: &str) -> Result<Self> {
        let bad = || GeomError::UnknownId(id.to_string());
        let parts: Vec<&str> = id.split(':').collect();
        match parts.as_slice() {
            ["flat", m, n] => {
                let m: usize = m.parse().map_err(|_| bad())?;
                let n: usize = n.parse().map_err(|_| bad())?;
                if m == 0 || n == 0 {
                    return Err(bad());
                }
                Ok(Self::flat(m, n))
            }
            ["trivial", "s2", n] => {
                let n: usize = n.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                Ok(Self::trivial_over_s2(n))
            }
            ["ts2"] => Ok(Self::ts2()),
            ["twisted", lambda] => {
                let lambda: f64 = lambda.parse().map_err(|_| bad())?;
                if !lambda.is_finite() {
                    return Err(bad());
                }
                Ok(Self::twisted(lambda))
            }
            _ => Err(bad()),
        }
    }

    /// Curvature feeds at a base point, checked for skew symmetry.
    pub fn feeds(&self, x: &[f64]) -> Result<(BundleCurvature, BundleCurvatureDeriv)> {
        let curv = (self.curv)(x);
        let deriv = (self.curv_deriv)(x);
        let (n, m) = (self.rank, self.base_dim());
        if curv.n != n || curv.m != m {
            return Err(GeomError::DimensionMismatch {
                expected: n * n * m * m,
                got: curv.n * curv.n * curv.m * curv.m,
            });
        }
        if deriv.n != n || deriv.m != m {
            return Err(GeomError::DimensionMismatch {
                expected: n * n * m * m * m,
                got: deriv.n * deriv.n * deriv.m * deriv.m * deriv.m,
            });
        }
        let defect = curv.skew_defect().max(deriv.skew_defect());
        if defect > FEED_TOL {
            return Err(GeomError::FeedInconsistent { defect });
        }
        Ok((curv, deriv))
    }

    /// Seeded base points for this bundle.
    pub fn sample_base_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        self.base.sample_points(count, seed)
    }
}

/// The bundle catalog ids.
pub fn catalog_ids() -> Vec<&'static str> {
    vec!["flat:2:2", "flat:2:3", "trivial:s2:3", "ts2", "twisted:1"]
}

/// A point `(p, v)` of the total space.
#[derive(Debug, Clone)]
pub struct FiberPoint {
    pub base: BaseCurvatureSample,
    pub v: Vec<f64>,
    pub r: f64,
    /// `v / r`, absent on the zero section.
    pub u: Option<Vec<f64>>,
}

impl FiberPoint {
    pub fn new(base: BaseCurvatureSample, v: Vec<f64>) -> Self {
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let u = (r > 0.0).then(|| v.iter().map(|x| x / r).collect());
        Self { base, v, r, u }
    }

    /// Point on `S_r` over `x` in direction `u` (normalised here).
    pub fn on_sphere(spec: &BundleSpec, x: &[f64], u: &[f64], r: f64) -> Result<Self> {
        if u.len() != spec.rank {
            return Err(GeomError::DimensionMismatch {
                expected: spec.rank,
                got: u.len(),
            });
        }
        let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(nu > 0.0) || !(r > 0.0) {
            return Err(GeomError::BadParameters(
                "sphere point needs r > 0 and a nonzero direction".into(),
            ));
        }
        let base = base_sample(&spec.base, x)?;
        let u: Vec<f64> = u.iter().map(|a| a / nu).collect();
        Ok(Self {
            base,
            v: u.iter().map(|a| r * a).collect(),
            r,
            u: Some(u),
        })
    }

    pub fn at(spec: &BundleSpec, x: &[f64], v: &[f64]) -> Result<Self> {
        if v.len() != spec.rank {
            return Err(GeomError::DimensionMismatch {
                expected: spec.rank,
                got: v.len(),
            });
        }
        Ok(Self::new(base_sample(&spec.base, x)?, v.to_vec()))
    }

    pub fn unit(&self) -> Result<&[f64]> {
        self.u.as_deref().ok_or_else(|| {
            GeomError::BadParameters("fiber point on the zero section has no direction".into())
        })
    }
}

/// `A_{ij alpha}` stored at `(i * m + j) * n + alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistCoefficients {
    pub m: usize,
    pub n: usize,
    data: Vec<f64>,
}

impl TwistCoefficients {
    #[inline]
    pub fn get(&self, i: usize, j: usize, a: usize) -> f64 {
        self.data[(i * self.m + j) * self.n + a]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// `A_{ij alpha} = 1/2 R_{alpha beta i j} v_beta`.
pub fn twist_coefficients(curv: &BundleCurvature, v: &[f64]) -> TwistCoefficients {
    let (m, n) = (curv.m, curv.n);
    let mut data = vec![0.0; m * m * n];
    for i in 0..m {
        for j in 0..m {
            for a in 0..n {
                data[(i * m + j) * n + a] =
                    0.5 * (0..n).map(|b| curv.get(a, b, i, j) * v[b]).sum::<f64>();
            }
        }
    }
    TwistCoefficients { m, n, data }
}

/// Twist coefficients of `spec` at a fiber point.
pub fn twist_at(spec: &BundleSpec, fp: &FiberPoint) -> Result<TwistCoefficients> {
    let (curv, _) = spec.feeds(&fp.base.point)?;
    Ok(twist_coefficients(&curv, &fp.v))
}

/// Curvature of the connection metric at a fiber point.
#[derive(Debug, Clone)]
pub struct TotalSpaceCurvature {
    pub a: TwistCoefficients,
    /// Frame components, base slots first then fiber slots.
    pub theta: Curvature4Tensor,
}

/// Assembles the curvature of the connection metric from the base curvature,
/// the bundle curvature, its covariant derivative and the twist coefficients.
pub fn total_curvature(spec: &BundleSpec, fp: &FiberPoint) -> Result<TotalSpaceCurvature> {
    let (m, n) = (spec.base_dim(), spec.rank);
    if fp.v.len() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: fp.v.len(),
        });
    }
    let (curv, deriv) = spec.feeds(&fp.base.point)?;
    let a = twist_coefficients(&curv, &fp.v);
    let rb = &fp.base.curvature;
    let v = &fp.v;
    let mut theta = Curvature4Tensor::zeros(m + n);

    let aa = |i: usize, j: usize, k: usize, l: usize| -> f64 {
        (0..n).map(|al| a.get(i, j, al) * a.get(k, l, al)).sum()
    };
    // Theta_ijkl: every index combination is set directly.
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let val =
                        rb.get(i, j, k, l) - aa(i, k, j, l) + aa(i, l, j, k) - 2.0 * aa(i, j, k, l);
                    theta.set(i, j, k, l, val);
                }
            }
        }
    }
    // Theta_ijk alpha = -1/2 R_{alpha beta ij,k} v_beta
    if !deriv.is_zero() {
        for i in 0..m {
            for j in (i + 1)..m {
                for k in 0..m {
                    for al in 0..n {
                        let val = -0.5
                            * (0..n)
                                .map(|b| deriv.get(al, b, i, j, k) * v[b])
                                .sum::<f64>();
                        theta.set_symmetric(i, j, k, m + al, val);
                    }
                }
            }
        }
    }
    let ak = |i: usize, al: usize, j: usize, be: usize| -> f64 {
        // sum_k A_{ik alpha} A_{kj beta}
        (0..m).map(|k| a.get(i, k, al) * a.get(k, j, be)).sum()
    };
    for i in 0..m {
        for j in 0..m {
            for al in 0..n {
                for be in 0..n {
                    // Theta_{i alpha j beta} = 1/2 R_{ab ij} - A_{ik beta} A_{kj alpha}
                    let mixed = 0.5 * curv.get(al, be, i, j) - ak(i, be, j, al);
                    theta.set_symmetric(i, m + al, j, m + be, mixed);
                    if i < j && al < be {
                        // Theta_{ij alpha beta} = R_{ab ij} + A_{ik a}A_{kj b} - A_{ik b}A_{kj a}
                        let val = curv.get(al, be, i, j) + ak(i, al, j, be) - ak(i, be, j, al);
                        theta.set_symmetric(i, j, m + al, m + be, val);
                    }
                }
            }
        }
    }
    Ok(TotalSpaceCurvature { a, theta })
}

/// Seeded fiber points: base point `i` with a fiber vector uniform in the
/// ball of radius `radius`.
pub fn sample_fiber_points(
    spec: &BundleSpec,
    count: usize,
    radius: f64,
    seed: u64,
) -> Result<Vec<FiberPoint>> {
    use crate::tensor::{stream_rng, unit_vector, Stream};
    use rand::Rng;
    let xs = spec.sample_base_points(count, seed);
    crate::par::try_map_indexed(count, |i| {
        let mut rng = stream_rng(seed, Stream::FiberDirection, i as u64);
        let dir = unit_vector(&mut rng, spec.rank);
        let s: f64 = radius * rng.random::<f64>().powf(1.0 / spec.rank as f64);
        let v: Vec<f64> = dir.iter().map(|d| d * s).collect();
        FiberPoint::at(spec, &xs[i], &v)
    })
}
