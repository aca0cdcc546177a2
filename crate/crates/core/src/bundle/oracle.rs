//! Coordinate-chart oracles for the closed-form bundle pipelines.
//!
//! Everything here goes through [`total_metric_chart`] and the Christoffel
//! difference oracle, never through the twist coefficients.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{adapted_frame, total_coframe, total_metric_chart, BundleSpec, FiberPoint};
use crate::base::{
    base_sample, oracle, sphere_angle_box, sphere_embedding, MetricChart, SAMPLE_MARGIN,
};
use crate::tensor::{stream_rng, uniform_in_box, Curvature4Tensor, FdScheme, Stream};
use crate::{GeomError, Result};

/// Oracle curvature of the total space at `(x, v)` in the frame dual to
/// [`total_coframe`], i.e. directly comparable with `total_curvature`.
pub fn total_curvature_oracle(
    spec: &BundleSpec,
    x: &[f64],
    v: &[f64],
    scheme: &FdScheme,
) -> Result<Curvature4Tensor> {
    let chart = total_metric_chart(spec)?;
    let mut p = x.to_vec();
    p.extend_from_slice(v);
    let cc = oracle::coordinate_curvature(&chart, &p, scheme)?;
    let frame = total_coframe(spec, x, v)?
        .try_inverse()
        .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?;
    Ok(cc.in_frame(&frame))
}

/// Map `(x, y) -> (x, r sigma(y))` from the sphere-bundle chart into the
/// total-space chart, with its Jacobian.
fn sphere_bundle_map(m: usize, r: f64, q: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let (x, y) = q.split_at(m);
    let (s, js) = sphere_embedding(y);
    let k = y.len();
    let mut p = x.to_vec();
    p.extend(s.iter().map(|a| r * a));
    let mut jac = DMatrix::zeros(m + k + 1, m + k);
    jac.view_mut((0, 0), (m, m)).fill_with_identity();
    jac.view_mut((m, m), (k + 1, k)).copy_from(&(js * r));
    (p, jac)
}

/// The metric induced on `S_r` in coordinates `(x, y)`, `y` hyperspherical
/// angles on the fiber sphere.
pub fn sphere_bundle_chart(spec: &BundleSpec, r: f64) -> Result<MetricChart> {
    if spec.rank < 2 {
        return Err(GeomError::BadParameters(
            "sphere chart needs rank >= 2".into(),
        ));
    }
    if !(r > 0.0 && r < spec.fiber_half_width) {
        return Err(GeomError::BadParameters(format!(
            "radius {r} outside (0, {})",
            spec.fiber_half_width
        )));
    }
    let total = total_metric_chart(spec)?;
    let m = spec.base_dim();
    let domain = spec
        .base
        .chart
        .domain
        .product(&sphere_angle_box(spec.rank - 1));
    Ok(MetricChart::pullback(
        &total,
        domain,
        Arc::new(move |q: &[f64]| sphere_bundle_map(m, r, q)),
    ))
}

/// Seeded points of the sphere-bundle chart (base coordinates then angles).
pub fn sample_sphere_chart(spec: &BundleSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let domain = spec
        .base
        .chart
        .domain
        .product(&sphere_angle_box(spec.rank - 1))
        .shrink(SAMPLE_MARGIN);
    crate::par::map_indexed(count, |i| {
        let mut rng = stream_rng(seed, Stream::BasePoint, i as u64);
        uniform_in_box(&mut rng, &domain.lo, &domain.hi)
    })
}

/// The fiber point `(x, r sigma(y))` for a sphere-chart point.
pub fn fiber_point_of(spec: &BundleSpec, r: f64, q: &[f64]) -> Result<FiberPoint> {
    let m = spec.base_dim();
    let (p, _) = sphere_bundle_map(m, r, q);
    FiberPoint::at(spec, &p[..m], &p[m..])
}

/// Sphere-chart tangent vectors representing the adapted frame `(e_i, e_a)`.
fn adapted_frame_in_chart(spec: &BundleSpec, r: f64, q: &[f64]) -> Result<DMatrix<f64>> {
    let (m, n) = (spec.base_dim(), spec.rank);
    let (p, jac) = sphere_bundle_map(m, r, q);
    let (x, v) = p.split_at(m);
    let e = total_coframe(spec, x, v)?
        .try_inverse()
        .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?;
    let u: Vec<f64> = v.iter().map(|a| a / r).collect();
    let pm = adapted_frame(&u)?.p;
    let mut ambient = DMatrix::zeros(m + n, m + n - 1);
    for i in 0..m {
        ambient.set_column(i, &e.column(i));
    }
    for fa in 0..n - 1 {
        let mut col = DVector::zeros(m + n);
        for al in 0..n {
            col += e.column(m + al) * pm[(fa, al)];
        }
        ambient.set_column(m + fa, &col);
    }
    // The frame is tangent to S_r, so the least-squares preimage is exact.
    let jt = jac.transpose();
    let normal = (&jt * &jac)
        .try_inverse()
        .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?;
    Ok(normal * jt * ambient)
}

/// Ricci tensor of `S_r` by differences on the induced metric, expressed in
/// the adapted frame so it compares entrywise with `sphere_ricci`.
pub fn sphere_ricci_oracle(
    spec: &BundleSpec,
    r: f64,
    q: &[f64],
    scheme: &FdScheme,
) -> Result<DMatrix<f64>> {
    let chart = sphere_bundle_chart(spec, r)?;
    let cc = oracle::coordinate_curvature(&chart, q, scheme)?;
    let w = adapted_frame_in_chart(spec, r, q)?;
    Ok(w.transpose() * cc.ricci() * w)
}

/// Principal curvatures of `S_r` at `(x, v)` as level set of `|v|` in the
/// total-space chart (outward normal, shape operator `-nabla eta`).
pub fn sphere_shape_oracle(
    spec: &BundleSpec,
    x: &[f64],
    v: &[f64],
    scheme: &FdScheme,
) -> Result<Vec<f64>> {
    let chart = total_metric_chart(spec)?;
    let m = spec.base_dim();
    let mut p = x.to_vec();
    p.extend_from_slice(v);
    oracle::level_set_shape(
        &chart,
        |q: &[f64]| q[m..].iter().map(|a| a * a).sum::<f64>().sqrt(),
        &p,
        scheme,
    )
}

/// Base sample check used by the oracle tests: the frame of the total chart
/// restricted to the base block is the base Gram-Schmidt frame.
pub fn base_frame_agrees(spec: &BundleSpec, x: &[f64]) -> Result<f64> {
    let s = base_sample(&spec.base, x)?;
    let c = total_coframe(spec, x, &vec![0.0; spec.rank])?;
    let m = spec.base_dim();
    Ok((c.view((0, 0), (m, m)) - &s.coframe).abs().max())
}
