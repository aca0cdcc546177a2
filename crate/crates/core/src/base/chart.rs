use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::tensor::{sym_eigen, ChartBox};
use crate::{GeomError, Result};

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// An embedding map returning the image point and its Jacobian.
pub type EmbeddingFn = Arc<dyn Fn(&[f64]) -> (Vec<f64>, DMatrix<f64>) + Send + Sync>;

/// Distance kept from the poles of angular coordinates.
pub const POLE_MARGIN: f64 = 0.1;

/// A Riemannian metric written in one coordinate box.
#[derive(Clone)]
pub struct MetricChart {
    pub dim: usize,
    pub domain: ChartBox,
    metric: MetricFn,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl MetricChart {
    pub fn new(domain: ChartBox, metric: MetricFn) -> Self {
        Self {
            dim: domain.dim(),
            domain,
            metric,
        }
    }

    pub fn euclidean(dim: usize, half_width: f64) -> Self {
        Self::new(
            ChartBox::cube(dim, half_width),
            Arc::new(move |_| DMatrix::identity(dim, dim)),
        )
    }

    /// Round sphere `S^m(a)` in hyperspherical angles (see [`sphere_embedding`]):
    /// `a^2 (dy_0^2 + sin^2 y_0 dy_1^2 + ...)`.
    pub fn round_sphere(m: usize, radius: f64) -> Self {
        let a2 = radius * radius;
        Self::new(
            sphere_angle_box(m),
            Arc::new(move |y: &[f64]| {
                let mut g = DMatrix::zeros(m, m);
                let mut w = a2;
                for j in 0..m {
                    g[(j, j)] = w;
                    w *= y[j].sin().powi(2);
                }
                g
            }),
        )
    }

    /// Block-diagonal product metric on the concatenated coordinates.
    pub fn product(a: &MetricChart, b: &MetricChart) -> Self {
        let (da, db) = (a.dim, b.dim);
        let (ma, mb) = (a.metric.clone(), b.metric.clone());
        Self::new(
            a.domain.product(&b.domain),
            Arc::new(move |x: &[f64]| {
                let mut g = DMatrix::zeros(da + db, da + db);
                g.view_mut((0, 0), (da, da)).copy_from(&ma(&x[..da]));
                g.view_mut((da, da), (db, db)).copy_from(&mb(&x[da..]));
                g
            }),
        )
    }

    /// Metric induced on `domain` by `embed` into `ambient`: `J^T G J`.
    pub fn pullback(ambient: &MetricChart, domain: ChartBox, embed: EmbeddingFn) -> Self {
        let g_amb = ambient.metric.clone();
        Self::new(
            domain,
            Arc::new(move |x: &[f64]| {
                let (p, jac) = embed(x);
                jac.transpose() * g_amb(&p) * &jac
            }),
        )
    }

    pub fn metric_at(&self, x: &[f64]) -> DMatrix<f64> {
        (self.metric)(x)
    }

    pub fn metric_fn(&self) -> MetricFn {
        self.metric.clone()
    }

    pub fn min_eigenvalue(&self, x: &[f64]) -> Result<f64> {
        Ok(sym_eigen(&self.metric_at(x))?.min())
    }
}

/// Hyperspherical parametrisation of the unit sphere `S^k in R^{k+1}`:
/// `s_0 = cos y_0`, `s_j = sin y_0 ... sin y_{j-1} cos y_j`, `s_k = sin y_0 ... sin y_{k-1}`.
/// Returns the point and its `(k+1) x k` Jacobian.
pub fn sphere_embedding(y: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let k = y.len();
    let (s, c): (Vec<f64>, Vec<f64>) = y.iter().map(|v| (v.sin(), v.cos())).unzip();
    let mut point = vec![0.0; k + 1];
    let mut jac = DMatrix::zeros(k + 1, k);
    for row in 0..=k {
        // point[row] = prod_{l<row} s_l * (c_row if row<k else 1)
        let tail = if row < k { c[row] } else { 1.0 };
        let prefix: f64 = s[..row].iter().product();
        point[row] = prefix * tail;
        for j in 0..k {
            let d = if j < row {
                let others: f64 = s[..row]
                    .iter()
                    .enumerate()
                    .filter(|(l, _)| *l != j)
                    .map(|(_, v)| v)
                    .product();
                others * c[j] * tail
            } else if j == row {
                -prefix * s[row]
            } else {
                0.0
            };
            jac[(row, j)] = d;
        }
    }
    (point, jac)
}

/// Coordinate box for [`sphere_embedding`] of `S^k`, kept [`POLE_MARGIN`]
/// away from the coordinate singularities. The last angle is an azimuth.
pub fn sphere_angle_box(k: usize) -> ChartBox {
    let mut lo = vec![POLE_MARGIN; k];
    let mut hi = vec![PI - POLE_MARGIN; k];
    if k >= 1 {
        lo[k - 1] = -PI + POLE_MARGIN;
        hi[k - 1] = PI - POLE_MARGIN;
    }
    ChartBox::new(lo, hi)
}

/// Gram-Schmidt on the coordinate basis `d_0, d_1, ...` in that order with
/// respect to `g`. Columns of the result are the orthonormal frame vectors
/// (upper triangular, positive diagonal).
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let mut frame = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let mut v = nalgebra::DVector::<f64>::zeros(n);
        v[k] = 1.0;
        for j in 0..k {
            let e = frame.column(j).clone_owned();
            let proj = (v.transpose() * g * &e)[(0, 0)];
            v -= e * proj;
        }
        let n2 = (v.transpose() * g * &v)[(0, 0)];
        if !(n2 > 0.0) {
            return Err(GeomError::IllConditioned { min_eig: n2 });
        }
        frame.set_column(k, &(v / n2.sqrt()));
    }
    Ok(frame)
}
