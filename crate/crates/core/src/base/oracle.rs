//! Finite-difference curvature oracle on coordinate charts.
//!
//! Christoffel symbols come from central differences of the metric and the
//! Riemann tensor from central differences of the Christoffel symbols. Nothing
//! here knows about bundles or moving frames, which is what makes it usable as
//! an independent check of the closed-form pipelines.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};

use super::chart::{orthonormal_frame, MetricChart};
use crate::tensor::{fd_derive, fd_partial_vec, sym_eigen, Curvature4Tensor, FdScheme};
use crate::{GeomError, Result};

/// Stencil nodes whose metric has a smaller eigenvalue than this are rejected.
pub const MIN_METRIC_EIGENVALUE: f64 = 1e-8;

/// `Gamma^a_{bc}` stored at `(a * d + b) * d + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }
}

/// Oracle output in coordinates.
#[derive(Debug, Clone)]
pub struct CoordinateCurvature {
    pub metric: DMatrix<f64>,
    pub christoffel: Christoffel,
    /// Lowered Riemann tensor `R_{rho sigma mu nu} = <R(d_mu, d_nu) d_sigma, d_rho>`.
    pub riemann: Curvature4Tensor,
}

impl CoordinateCurvature {
    /// Components in the frame whose vectors are the columns of `frame`.
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> Curvature4Tensor {
        self.riemann.transform(frame)
    }

    /// Coordinate Ricci tensor `Ric_{sigma nu} = g^{rho mu} R_{rho sigma mu nu}`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let d = self.metric.nrows();
        let ginv = self
            .metric
            .clone()
            .try_inverse()
            .expect("metric invertible");
        DMatrix::from_fn(d, d, |s, n| {
            let mut acc = 0.0;
            for r in 0..d {
                for m in 0..d {
                    acc += ginv[(r, m)] * self.riemann.get(r, s, m, n);
                }
            }
            acc
        })
    }
}

struct Guard(RefCell<Option<GeomError>>);

impl Guard {
    fn new() -> Self {
        Self(RefCell::new(None))
    }

    fn metric(&self, chart: &MetricChart, x: &[f64]) -> DMatrix<f64> {
        let g = chart.metric_at(x);
        let shifted = &g - DMatrix::identity(g.nrows(), g.ncols()) * MIN_METRIC_EIGENVALUE;
        if shifted.cholesky().is_none() && self.0.borrow().is_none() {
            let min_eig = sym_eigen(&((&g + g.transpose()) * 0.5))
                .map(|s| s.min())
                .unwrap_or(f64::NAN);
            *self.0.borrow_mut() = Some(GeomError::IllConditioned { min_eig });
        }
        g
    }

    fn finish<T>(self, value: T) -> Result<T> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

fn christoffel_guarded(
    chart: &MetricChart,
    x: &[f64],
    scheme: &FdScheme,
    guard: &Guard,
) -> Result<Christoffel> {
    let d = chart.dim;
    let flat = |p: &[f64]| guard.metric(chart, p).as_slice().to_vec();
    let g = guard.metric(chart, x);
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?;
    // dg[k][(i, j)] = d_k g_ij; nalgebra storage is column-major.
    let mut dg = Vec::with_capacity(d);
    for k in 0..d {
        let v = fd_partial_vec(flat, x, k, scheme, None)?;
        dg.push(DMatrix::from_column_slice(d, d, &v));
    }
    let mut data = vec![0.0; d * d * d];
    for a in 0..d {
        for b in 0..d {
            for c in b..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += ginv[(a, l)] * (dg[b][(c, l)] + dg[c][(b, l)] - dg[l][(b, c)]);
                }
                data[(a * d + b) * d + c] = 0.5 * acc;
                data[(a * d + c) * d + b] = 0.5 * acc;
            }
        }
    }
    Ok(Christoffel { dim: d, data })
}

fn outer_margin(scheme: &FdScheme, x: &[f64], levels: f64) -> f64 {
    // Diagonal polarisation directions have length sqrt(2).
    levels * std::f64::consts::SQRT_2 * scheme.reach_at(x)
}

/// Christoffel symbols at `x` by central differences of the metric.
pub fn christoffel(chart: &MetricChart, x: &[f64], scheme: &FdScheme) -> Result<Christoffel> {
    chart
        .domain
        .check_interior(x, outer_margin(scheme, x, 1.0))?;
    let guard = Guard::new();
    let c = christoffel_guarded(chart, x, scheme, &guard)?;
    guard.finish(c)
}

/// Full coordinate curvature at `x` (two nested difference levels).
pub fn coordinate_curvature(
    chart: &MetricChart,
    x: &[f64],
    scheme: &FdScheme,
) -> Result<CoordinateCurvature> {
    chart
        .domain
        .check_interior(x, outer_margin(scheme, x, 2.0))?;
    let d = chart.dim;
    let guard = Guard::new();
    let metric = guard.metric(chart, x);
    let gamma = christoffel_guarded(chart, x, scheme, &guard)?;
    let inner_err: RefCell<Option<GeomError>> = RefCell::new(None);
    let gamma_flat = |p: &[f64]| match christoffel_guarded(chart, p, scheme, &guard) {
        Ok(c) => c.data,
        Err(e) => {
            inner_err.borrow_mut().get_or_insert(e);
            vec![f64::NAN; d * d * d]
        }
    };
    // dgamma[m] = d_m Gamma
    let mut dgamma = Vec::with_capacity(d);
    for m in 0..d {
        dgamma.push(fd_partial_vec(gamma_flat, x, m, scheme, None)?);
    }
    if let Some(e) = inner_err.into_inner() {
        return Err(e);
    }
    let idx = |a: usize, b: usize, c: usize| (a * d + b) * d + c;
    // R^r_{s m n} = d_m G^r_{n s} - d_n G^r_{m s} + G^r_{m l} G^l_{n s} - G^r_{n l} G^l_{m s}
    let mut upper = vec![0.0; d * d * d * d];
    for r in 0..d {
        for s in 0..d {
            for m in 0..d {
                for n in 0..d {
                    let mut v = dgamma[m][idx(r, n, s)] - dgamma[n][idx(r, m, s)];
                    for l in 0..d {
                        v += gamma.get(r, m, l) * gamma.get(l, n, s)
                            - gamma.get(r, n, l) * gamma.get(l, m, s);
                    }
                    upper[((r * d + s) * d + m) * d + n] = v;
                }
            }
        }
    }
    let riemann = Curvature4Tensor::from_fn(d, |r, s, m, n| {
        (0..d)
            .map(|l| metric[(r, l)] * upper[((l * d + s) * d + m) * d + n])
            .sum()
    });
    guard.finish(CoordinateCurvature {
        metric,
        christoffel: gamma,
        riemann,
    })
}

/// Curvature at `x` in the Gram-Schmidt frame of the coordinate basis.
pub fn chart_curvature_oracle(
    chart: &MetricChart,
    x: &[f64],
    scheme: &FdScheme,
) -> Result<Curvature4Tensor> {
    let cc = coordinate_curvature(chart, x, scheme)?;
    let frame = orthonormal_frame(&cc.metric)?;
    Ok(cc.in_frame(&frame))
}

/// Differential `df` (by differences) and the gradient vector `g^{-1} df`.
pub fn gradient<F>(
    chart: &MetricChart,
    f: F,
    x: &[f64],
    scheme: &FdScheme,
) -> Result<(DVector<f64>, DVector<f64>)>
where
    F: Fn(&[f64]) -> f64,
{
    chart
        .domain
        .check_interior(x, outer_margin(scheme, x, 1.0))?;
    let d = chart.dim;
    let mut df = DVector::zeros(d);
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        df[k] = fd_derive(&f, x, &e, 1, scheme, None)?;
    }
    let g = chart.metric_at(x);
    let grad = g
        .try_inverse()
        .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?
        * &df;
    Ok((df, grad))
}

/// Riemannian Hessian `d_m d_n f - Gamma^k_{mn} d_k f` in coordinates.
pub fn hessian<F>(chart: &MetricChart, f: F, x: &[f64], scheme: &FdScheme) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    chart
        .domain
        .check_interior(x, outer_margin(scheme, x, 1.0))?;
    let d = chart.dim;
    let gamma = christoffel(chart, x, scheme)?;
    let (df, _) = gradient(chart, &f, x, scheme)?;
    let mut second = DMatrix::zeros(d, d);
    for m in 0..d {
        let mut e = vec![0.0; d];
        e[m] = 1.0;
        second[(m, m)] = fd_derive(&f, x, &e, 2, scheme, None)?;
        for n in 0..m {
            let mut plus = vec![0.0; d];
            let mut minus = vec![0.0; d];
            plus[m] = 1.0;
            plus[n] = 1.0;
            minus[m] = 1.0;
            minus[n] = -1.0;
            let dp = fd_derive(&f, x, &plus, 2, scheme, None)?;
            let dm = fd_derive(&f, x, &minus, 2, scheme, None)?;
            second[(m, n)] = 0.25 * (dp - dm);
            second[(n, m)] = second[(m, n)];
        }
    }
    Ok(DMatrix::from_fn(d, d, |m, n| {
        second[(m, n)] - (0..d).map(|k| gamma.get(k, m, n) * df[k]).sum::<f64>()
    }))
}

/// Laplace-Beltrami operator `tr(g^{-1} Hess f)`.
pub fn laplacian<F>(chart: &MetricChart, f: F, x: &[f64], scheme: &FdScheme) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let hess = hessian(chart, f, x, scheme)?;
    let ginv = chart
        .metric_at(x)
        .try_inverse()
        .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?;
    Ok((ginv * hess).trace())
}

/// Principal curvatures of the level set of `f` through `x`, with respect to
/// the unit normal `grad f / |grad f|` and the shape operator `-nabla(normal)`,
/// i.e. the eigenvalues of `-Hess f / |grad f|` on the level's tangent space.
pub fn level_set_shape<F>(
    chart: &MetricChart,
    f: F,
    x: &[f64],
    scheme: &FdScheme,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let d = chart.dim;
    let g = chart.metric_at(x);
    let (df, grad) = gradient(chart, &f, x, scheme)?;
    let grad_norm = df.dot(&grad).sqrt();
    if !(grad_norm > 1e-10) {
        return Err(GeomError::NearFocal { grad: grad_norm });
    }
    let hess = hessian(chart, &f, x, scheme)?;
    // g-orthonormal basis of ker df
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for k in 0..d {
        let mut v = DVector::zeros(d);
        v[k] = 1.0;
        v -= &grad * (df[k] / (grad_norm * grad_norm));
        for b in &basis {
            let p = (v.transpose() * &g * b)[(0, 0)];
            v -= b * p;
        }
        let n2 = (v.transpose() * &g * &v)[(0, 0)];
        if n2 > 1e-16 {
            basis.push(v / n2.sqrt());
        }
        if basis.len() == d - 1 {
            break;
        }
    }
    let k = basis.len();
    let shape = DMatrix::from_fn(k, k, |a, b| {
        -(basis[a].transpose() * &hess * &basis[b])[(0, 0)] / grad_norm
    });
    let sym = (&shape + shape.transpose()) * 0.5;
    Ok(sym_eigen(&sym)?.eigenvalues.iter().copied().collect())
}
