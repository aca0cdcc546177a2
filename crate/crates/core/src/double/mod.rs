//! The double `S_{r0}(xi + 1)`: the sphere bundle of `xi` plus a parallel
//! trivial line, with height function `f = v_{n+1}` and its level foliation.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::base::{oracle, sphere_angle_box, sphere_embedding, MetricChart, SAMPLE_MARGIN};
use crate::bundle::{
    positivity_scan, sphere_curvature, sphere_ricci, total_metric_chart, BundleCurvature,
    BundleCurvatureDeriv, BundleSpec, ConnectionForms, FiberPoint, ScanOptions,
};
use crate::tensor::{stream_rng, uniform_in_box, ChartBox, FdScheme, ShapeSpectrum, Stream};
use crate::{GeomError, Result};

/// Normal convention for level spectra.
pub const LEVEL_NORMAL: &str =
    "unit normal d/dt / r0 (towards decreasing f), shape operator -nabla eta";

/// Distance of sampled polar angles from the focal leaves `t = 0, pi`.
pub const FOCAL_MARGIN: f64 = 0.15;

/// `xi + 1` together with the original bundle.
#[derive(Debug, Clone)]
pub struct ExtendedBundle {
    pub inner: BundleSpec,
    /// Rank `n + 1`; index `n` is the parallel trivial direction.
    pub spec: BundleSpec,
}

impl ExtendedBundle {
    pub fn inner_rank(&self) -> usize {
        self.inner.rank
    }

    /// Parses a bundle id with the suffix `+1`, e.g. `ts2+1`.
    pub fn parse(id: &str) -> Result<Self> {
        let inner = id
            .strip_suffix("+1")
            .ok_or_else(|| GeomError::UnknownId(id.to_string()))?;
        Ok(extend_bundle(&BundleSpec::parse(inner)?))
    }
}

/// Extends the connection of `spec` to `xi + 1` by declaring the new
/// direction parallel: zero connection forms and curvature in its rows and
/// columns.
pub fn extend_bundle(spec: &BundleSpec) -> ExtendedBundle {
    let n = spec.rank;
    let m = spec.base_dim();
    let n1 = n + 1;
    let curv = spec.curv.clone();
    let deriv = spec.curv_deriv.clone();
    let connection = spec.connection.as_ref().map(|c| {
        let inner = c.eval_fn();
        ConnectionForms::new(
            n1,
            m,
            Arc::new(move |x: &[f64]| {
                let w = inner(x);
                let mut out = vec![0.0; n1 * n1 * m];
                for a in 0..n {
                    for b in 0..n {
                        for mu in 0..m {
                            out[(a * n1 + b) * m + mu] = w[(a * n + b) * m + mu];
                        }
                    }
                }
                out
            }),
        )
    });
    let extended = BundleSpec {
        id: format!("{}+1", spec.id),
        base: spec.base.clone(),
        rank: n1,
        curv: Arc::new(move |x: &[f64]| {
            let c = curv(x);
            let mut out = BundleCurvature::zeros(n1, m);
            for a in 0..n {
                for b in 0..n {
                    for i in 0..m {
                        for j in 0..m {
                            out.set(a, b, i, j, c.get(a, b, i, j));
                        }
                    }
                }
            }
            out
        }),
        curv_deriv: Arc::new(move |x: &[f64]| {
            let d = deriv(x);
            let mut out = BundleCurvatureDeriv::zeros(n1, m);
            for a in 0..n {
                for b in 0..n {
                    for i in 0..m {
                        for j in 0..m {
                            for k in 0..m {
                                out.set(a, b, i, j, k, d.get(a, b, i, j, k));
                            }
                        }
                    }
                }
            }
            out
        }),
        connection,
        curv_deriv_zero: spec.curv_deriv_zero,
        fiber_half_width: spec.fiber_half_width,
    };
    ExtendedBundle {
        inner: spec.clone(),
        spec: extended,
    }
}

/// A point of `S_{r0}(xi + 1)`.
#[derive(Debug, Clone)]
pub struct DoublePoint {
    pub fiber: FiberPoint,
    pub r0: f64,
    /// `arccos u_{n+1}`.
    pub t: f64,
    /// `u_alpha / sin t` for `alpha < n`, absent on the focal leaves.
    pub w: Option<Vec<f64>>,
}

impl DoublePoint {
    /// Point over base coordinates `x` with fiber vector `v` rescaled to `|v| = r0`.
    pub fn new(ext: &ExtendedBundle, x: &[f64], v: &[f64], r0: f64) -> Result<Self> {
        let fp = FiberPoint::on_sphere(&ext.spec, x, v, r0)?;
        let u = fp.unit()?.to_vec();
        let n = ext.inner_rank();
        let t = u[n].clamp(-1.0, 1.0).acos();
        let s = t.sin();
        let w = (s > 1e-12).then(|| u[..n].iter().map(|a| a / s).collect());
        Ok(Self {
            fiber: fp,
            r0,
            t,
            w,
        })
    }
}

/// `f(p, v) = v_{n+1} = r0 u_{n+1}`.
pub fn isoparametric_value(dp: &DoublePoint) -> f64 {
    dp.fiber.v[dp.fiber.v.len() - 1]
}

/// Chart map `(x, t, y') -> (x, r0 sin t sigma(y'), r0 cos t)` into the total
/// space of `xi + 1`, with Jacobian.
fn double_map(m: usize, r0: f64, q: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let (x, rest) = q.split_at(m);
    let (t, y) = (rest[0], &rest[1..]);
    let (sig, js) = sphere_embedding(y);
    let n = sig.len();
    let (st, ct) = (t.sin(), t.cos());
    let mut p = x.to_vec();
    p.extend(sig.iter().map(|a| r0 * st * a));
    p.push(r0 * ct);
    let k = y.len();
    let mut jac = DMatrix::zeros(m + n + 1, m + 1 + k);
    jac.view_mut((0, 0), (m, m)).fill_with_identity();
    for a in 0..n {
        jac[(m + a, m)] = r0 * ct * sig[a];
        for j in 0..k {
            jac[(m + a, m + 1 + j)] = r0 * st * js[(a, j)];
        }
    }
    jac[(m + n, m)] = -r0 * st;
    (p, jac)
}

/// Box of the double chart: base box, polar angle `t`, inner fiber angles.
fn double_box(ext: &ExtendedBundle) -> ChartBox {
    ext.spec
        .base
        .chart
        .domain
        .product(&ChartBox::new(vec![0.1], vec![PI - 0.1]))
        .product(&sphere_angle_box(ext.inner_rank() - 1))
}

/// Induced metric of `S_{r0}(xi + 1)` in coordinates `(x, t, y')`; there
/// `f = r0 cos t`.
pub fn double_chart(ext: &ExtendedBundle, r0: f64) -> Result<MetricChart> {
    if ext.inner_rank() < 2 {
        return Err(GeomError::BadParameters(
            "double chart needs inner rank >= 2".into(),
        ));
    }
    if !(r0 > 0.0 && r0 < ext.spec.fiber_half_width) {
        return Err(GeomError::BadParameters(format!("r0 = {r0} out of range")));
    }
    let total = total_metric_chart(&ext.spec)?;
    let m = ext.spec.base_dim();
    Ok(MetricChart::pullback(
        &total,
        double_box(ext),
        Arc::new(move |q: &[f64]| double_map(m, r0, q)),
    ))
}

/// Height function in double-chart coordinates.
pub fn chart_height(m: usize, r0: f64) -> impl Fn(&[f64]) -> f64 + Clone {
    move |q: &[f64]| r0 * q[m].cos()
}

/// Seeded double-chart points; `t` fixed when given, else uniform in
/// `[FOCAL_MARGIN, pi - FOCAL_MARGIN]`.
pub fn sample_double_chart(
    ext: &ExtendedBundle,
    count: usize,
    seed: u64,
    t: Option<f64>,
) -> Vec<Vec<f64>> {
    let inner = double_box(ext).shrink(SAMPLE_MARGIN);
    let m = ext.spec.base_dim();
    crate::par::map_indexed(count, |i| {
        let mut rng = stream_rng(seed, Stream::Level, i as u64);
        let mut q = uniform_in_box(&mut rng, &inner.lo, &inner.hi);
        q[m] = match t {
            Some(t) => t,
            None => {
                FOCAL_MARGIN
                    + (PI - 2.0 * FOCAL_MARGIN) * (q[m] - inner.lo[m]) / (inner.hi[m] - inner.lo[m])
            }
        };
        q
    })
}

/// Double point for a chart point.
pub fn double_point_of(ext: &ExtendedBundle, r0: f64, q: &[f64]) -> Result<DoublePoint> {
    let m = ext.spec.base_dim();
    let (p, _) = double_map(m, r0, q);
    DoublePoint::new(ext, &p[..m], &p[m..], r0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientLawReport {
    /// `|grad f|^2 - (1 - f^2 / r0^2)` per sample.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Checks `|grad f|^2 = 1 - f^2/r0^2` on seeded points of the double.
pub fn gradient_law_check(
    ext: &ExtendedBundle,
    r0: f64,
    samples: usize,
    seed: u64,
    scheme: &FdScheme,
) -> Result<GradientLawReport> {
    let chart = double_chart(ext, r0)?;
    let m = ext.spec.base_dim();
    let f = chart_height(m, r0);
    let pts = sample_double_chart(ext, samples, seed, None);
    let residuals = crate::par::try_map_indexed(samples, |i| {
        let q = &pts[i];
        let (df, grad) = oracle::gradient(&chart, &f, q, scheme)?;
        let fv = f(q);
        Ok(df.dot(&grad) - (1.0 - fv * fv / (r0 * r0)))
    })?;
    let max_residual = residuals.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    Ok(GradientLawReport {
        residuals,
        max_residual,
    })
}

fn level_angle(r0: f64, c: f64) -> Result<f64> {
    if !(r0 > 0.0) || !(c.abs() < r0) {
        return Err(GeomError::FocalLevel { c, r0 });
    }
    Ok((c / r0).acos())
}

/// Principal curvatures of the level `f = c`: `0` along the base and
/// `-cot t / r0` along the `n - 1` remaining fiber directions.
pub fn level_shape_spectrum(ext: &ExtendedBundle, r0: f64, c: f64) -> Result<ShapeSpectrum> {
    level_angle(r0, c)?;
    // cot t = cos t / sin t with cos t = c / r0, exact zero on the gluing leaf
    let ct = c / r0;
    let k = ct / (1.0 - ct * ct).sqrt() / r0;
    let (m, n) = (ext.spec.base_dim(), ext.inner_rank());
    Ok(ShapeSpectrum::exact(&[(0.0, m), (-k, n - 1)], LEVEL_NORMAL))
}

/// Unnormalised mean curvature (trace of the shape operator) of `f = c`.
pub fn level_mean_curvature(ext: &ExtendedBundle, r0: f64, c: f64) -> Result<f64> {
    Ok(level_shape_spectrum(ext, r0, c)?.trace())
}

/// Principal curvatures of the level through chart point `q`, by differences
/// of `-f` on the double chart (so the normal matches [`LEVEL_NORMAL`]).
pub fn level_shape_oracle(
    ext: &ExtendedBundle,
    r0: f64,
    q: &[f64],
    scheme: &FdScheme,
) -> Result<Vec<f64>> {
    let chart = double_chart(ext, r0)?;
    let f = chart_height(ext.spec.base_dim(), r0);
    oracle::level_set_shape(&chart, |p: &[f64]| -f(p), q, scheme)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelLaplacian {
    pub c: f64,
    pub mean: f64,
    /// `max - min` over the samples of the level.
    pub spread: f64,
    /// `a(c) = -n c / r0^2`.
    pub expected: f64,
}

/// The levels `c_k = r0 * linspace(-0.9, 0.9, count)`.
pub fn default_levels(r0: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    (0..count)
        .map(|k| r0 * (-0.9 + 1.8 * k as f64 / (count - 1) as f64))
        .collect()
}

/// Laplacian of `f` by differences on the double chart, level by level.
pub fn laplacian_profile(
    ext: &ExtendedBundle,
    r0: f64,
    levels: &[f64],
    samples: usize,
    seed: u64,
    scheme: &FdScheme,
) -> Result<Vec<LevelLaplacian>> {
    let chart = double_chart(ext, r0)?;
    let m = ext.spec.base_dim();
    let n = ext.inner_rank() as f64;
    let f = chart_height(m, r0);
    levels
        .iter()
        .enumerate()
        .map(|(li, &c)| {
            let t = level_angle(r0, c)?;
            if !(FOCAL_MARGIN * 0.5..=PI - FOCAL_MARGIN * 0.5).contains(&t) {
                return Err(GeomError::FocalLevel { c, r0 });
            }
            let pts = sample_double_chart(ext, samples, seed.wrapping_add(li as u64), Some(t));
            let vals = crate::par::try_map_indexed(samples, |i| {
                oracle::laplacian(&chart, &f, &pts[i], scheme)
            })?;
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let spread = crate::par::max_of(&vals) - crate::par::min_of(&vals);
            Ok(LevelLaplacian {
                c,
                mean,
                spread,
                expected: -n * c / (r0 * r0),
            })
        })
        .collect()
}

/// Half the positivity threshold of `S_r(xi + 1)` on a coarse scan, or 0.1.
pub fn default_r0(ext: &ExtendedBundle) -> f64 {
    let grid: Vec<f64> = (0..40)
        .map(|k| 0.05 + (2.0 - 0.05) * k as f64 / 39.0)
        .collect();
    let opts = ScanOptions {
        samples: 8,
        directions: 8,
        seed: 0,
    };
    match positivity_scan(&ext.spec, &grid, &opts) {
        Ok(rep) => rep.threshold.map(|t| 0.5 * t).unwrap_or(0.1),
        Err(_) => 0.1,
    }
}

/// Ricci tensor of the gluing leaf `f = 0` at `dp`, obtained from the full
/// curvature of the double and expressed in the adapted frame of `S_{r0}(xi)`.
pub fn gluing_leaf_ricci(ext: &ExtendedBundle, dp: &DoublePoint) -> Result<DMatrix<f64>> {
    let n = ext.inner_rank();
    let m = ext.spec.base_dim();
    let u = dp.fiber.unit()?;
    if u[n].abs() > 1e-12 {
        return Err(GeomError::BadParameters(
            "point is not on the gluing leaf".into(),
        ));
    }
    let k = sphere_curvature(&ext.spec, &dp.fiber)?;
    let p_ext = crate::bundle::adapted_frame(u)?.p;
    let p_in = crate::bundle::adapted_frame(&u[..n])?.p;
    let d = m + n - 1;
    let mut basis = DMatrix::zeros(m + n, d);
    for i in 0..m {
        basis[(i, i)] = 1.0;
    }
    for a in 0..n - 1 {
        for b in 0..n {
            basis[(m + b, m + a)] = (0..n).map(|al| p_ext[(b, al)] * p_in[(a, al)]).sum();
        }
    }
    Ok(k.partial_ricci(&basis))
}

/// `sphere_ricci` of the inner bundle at the projection of a gluing-leaf point.
pub fn inner_sphere_ricci(ext: &ExtendedBundle, dp: &DoublePoint) -> Result<DMatrix<f64>> {
    let n = ext.inner_rank();
    let fp = FiberPoint::new(dp.fiber.base.clone(), dp.fiber.v[..n].to_vec());
    sphere_ricci(&ext.inner, &fp)
}
