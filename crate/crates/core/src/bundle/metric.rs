//! The connection metric `(theta_i)^2 + (theta_alpha)^2` written out in the
//! coordinates `(x, v)` of the total space.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::{BundleSpec, ConnectionForms};
use crate::base::{oracle, orthonormal_frame, MetricChart};
use crate::tensor::{fd_partial_vec, ChartBox, FdScheme};
use crate::{GeomError, Result};

/// `K_{alpha mu} = sum_beta v_beta omega_{beta alpha, mu}`, so that
/// `theta_alpha = dv_alpha + K_{alpha mu} dx^mu`.
fn fiber_shift(conn: &ConnectionForms, x: &[f64], v: &[f64]) -> DMatrix<f64> {
    let (n, m) = (conn.n, conn.m);
    let w = conn.eval(x);
    DMatrix::from_fn(n, m, |al, mu| {
        (0..n).map(|be| v[be] * w[(be * n + al) * m + mu]).sum()
    })
}

/// Coframe matrix at `(x, v)`: row `A` holds the coordinate components of
/// `theta_A`. Its inverse has the frame vectors `e_A` as columns.
pub fn total_coframe(spec: &BundleSpec, x: &[f64], v: &[f64]) -> Result<DMatrix<f64>> {
    let conn = spec
        .connection
        .as_ref()
        .ok_or(GeomError::MissingConnectionChart)?;
    let (m, n) = (spec.base_dim(), spec.rank);
    let frame = orthonormal_frame(&spec.base.chart.metric_at(x))?;
    let base_coframe = frame
        .try_inverse()
        .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?;
    let k = fiber_shift(conn, x, v);
    let mut c = DMatrix::zeros(m + n, m + n);
    c.view_mut((0, 0), (m, m)).copy_from(&base_coframe);
    c.view_mut((m, 0), (n, m)).copy_from(&k);
    c.view_mut((m, m), (n, n)).fill_with_identity();
    Ok(c)
}

/// The connection metric as a coordinate metric on `(base box) x [-w, w]^n`.
pub fn total_metric_chart(spec: &BundleSpec) -> Result<MetricChart> {
    let conn = spec
        .connection
        .clone()
        .ok_or(GeomError::MissingConnectionChart)?;
    let (m, n) = (spec.base_dim(), spec.rank);
    let base_metric = spec.base.chart.metric_fn();
    let domain = spec
        .base
        .chart
        .domain
        .product(&ChartBox::cube(n, spec.fiber_half_width));
    Ok(MetricChart::new(
        domain,
        Arc::new(move |p: &[f64]| {
            let (x, v) = p.split_at(m);
            let k = fiber_shift(&conn, x, v);
            let mut g = DMatrix::zeros(m + n, m + n);
            let gm = base_metric(x) + k.transpose() * &k;
            g.view_mut((0, 0), (m, m)).copy_from(&gm);
            g.view_mut((m, 0), (n, m)).copy_from(&k);
            g.view_mut((0, m), (m, n)).copy_from(&k.transpose());
            g.view_mut((m, m), (n, n)).fill_with_identity();
            g
        }),
    ))
}

/// Largest deviation between `Omega_{alpha beta}(e_i, e_j)` computed from
/// the connection forms by differences (`omega wedge omega - d omega`) and
/// the declared feed `R_{alpha beta i j}`, over the given base points.
pub fn check_connection_consistency(
    spec: &BundleSpec,
    points: &[Vec<f64>],
    scheme: &FdScheme,
) -> Result<f64> {
    let conn = spec
        .connection
        .as_ref()
        .ok_or(GeomError::MissingConnectionChart)?;
    let (m, n) = (spec.base_dim(), spec.rank);
    let devs = crate::par::try_map_indexed(points.len(), |p| {
        let x = &points[p];
        let (curv, _) = spec.feeds(x)?;
        let w = conn.eval(x);
        let dw: Vec<Vec<f64>> = (0..m)
            .map(|mu| {
                fd_partial_vec(
                    |y| conn.eval(y),
                    x,
                    mu,
                    scheme,
                    Some(&spec.base.chart.domain),
                )
            })
            .collect::<Result<_>>()?;
        let frame = orthonormal_frame(&spec.base.chart.metric_at(x))?;
        let form = |a: usize, b: usize, mu: usize| w[(a * n + b) * m + mu];
        let mut dev = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                // coordinate 2-form components Omega_{mu nu}
                let omega = DMatrix::from_fn(m, m, |mu, nu| {
                    let d = dw[mu][(a * n + b) * m + nu] - dw[nu][(a * n + b) * m + mu];
                    let wedge: f64 = (0..n)
                        .map(|c| form(a, c, mu) * form(c, b, nu) - form(a, c, nu) * form(c, b, mu))
                        .sum();
                    wedge - d
                });
                let in_frame = frame.transpose() * omega * &frame;
                for i in 0..m {
                    for j in 0..m {
                        dev = dev.max((in_frame[(i, j)] - curv.get(a, b, i, j)).abs());
                    }
                }
            }
        }
        Ok(dev)
    })?;
    Ok(crate::par::max_of(&devs).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransnormalReport {
    /// `|grad f|^2 - 4 f` per sample, `f = |v|^2`.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Checks `|grad f|^2 = 4 f` for `f(p, v) = <v, v>` with the gradient taken
/// through the coordinate metric of the total space.
pub fn transnormal_check(
    spec: &BundleSpec,
    samples: usize,
    seed: u64,
    scheme: &FdScheme,
) -> Result<TransnormalReport> {
    let chart = total_metric_chart(spec)?;
    let m = spec.base_dim();
    let radius = 0.6 * spec.fiber_half_width;
    let points = super::sample_fiber_points(spec, samples, radius, seed)?;
    let residuals = crate::par::try_map_indexed(samples, |i| {
        let fp = &points[i];
        let mut p = fp.base.point.clone();
        p.extend_from_slice(&fp.v);
        let f = |q: &[f64]| q[m..].iter().map(|a| a * a).sum::<f64>();
        let (df, grad) = oracle::gradient(&chart, f, &p, scheme)?;
        Ok(df.dot(&grad) - 4.0 * f(&p))
    })?;
    let max_residual = residuals.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    Ok(TransnormalReport {
        residuals,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_bundle_metric_is_euclidean() {
        let chart = total_metric_chart(&BundleSpec::flat(2, 2)).unwrap();
        let g = chart.metric_at(&[0.2, 0.1, -1.0, 2.0]);
        assert_eq!(g, DMatrix::identity(4, 4));
    }

    #[test]
    fn twisted_metric_golden_entry() {
        let lambda = 1.7;
        let chart = total_metric_chart(&BundleSpec::twisted(lambda)).unwrap();
        let (x0, v0, v1) = (0.4, 0.8, -1.1);
        let g = chart.metric_at(&[x0, 0.3, v0, v1, 0.5]);
        let expected = 1.0 + lambda * lambda * x0 * x0 * (v0 * v0 + v1 * v1);
        assert!((g[(1, 1)] - expected).abs() < 1e-14);
        assert_eq!(g[(0, 0)], 1.0);
        // g(d_x1, d_v0) = K_{0,1} = v1 omega_{10,1} = lambda x0 v1
        assert!((g[(1, 2)] - lambda * x0 * v1).abs() < 1e-15);
        assert!((g[(1, 3)] + lambda * x0 * v0).abs() < 1e-15);
    }

    #[test]
    fn ts2_metric_positive_definite() {
        let spec = BundleSpec::ts2();
        let chart = total_metric_chart(&spec).unwrap();
        let pts = super::super::sample_fiber_points(&spec, 50, 2.5, 3).unwrap();
        for fp in pts {
            let mut p = fp.base.point.clone();
            p.extend_from_slice(&fp.v);
            assert!(chart.min_eigenvalue(&p).unwrap() > 1e-6);
        }
    }

    #[test]
    fn coframe_reproduces_metric() {
        let spec = BundleSpec::ts2();
        let (x, v) = ([1.1, 0.4], [0.7, -0.3]);
        let c = total_coframe(&spec, &x, &v).unwrap();
        let chart = total_metric_chart(&spec).unwrap();
        let g = chart.metric_at(&[x[0], x[1], v[0], v[1]]);
        assert!((c.transpose() * c - g).abs().max() < 1e-14);
    }

    #[test]
    fn catalog_connections_match_their_feeds() {
        for spec in [
            BundleSpec::ts2(),
            BundleSpec::twisted(1.0),
            BundleSpec::flat(2, 2),
        ] {
            let pts = spec.sample_base_points(10, 1);
            let dev = check_connection_consistency(&spec, &pts, &FdScheme::default()).unwrap();
            assert!(dev < 1e-6, "{}: {dev}", spec.id);
        }
    }

    #[test]
    fn missing_connection_reported() {
        let mut spec = BundleSpec::flat(1, 2);
        spec.connection = None;
        assert!(matches!(
            total_metric_chart(&spec),
            Err(GeomError::MissingConnectionChart)
        ));
    }

    #[test]
    fn transnormal_on_flat_and_twisted() {
        let s = FdScheme::default();
        let flat = transnormal_check(&BundleSpec::flat(2, 2), 20, 5, &s).unwrap();
        assert!(flat.max_residual < 1e-10, "{}", flat.max_residual);
        let tw = transnormal_check(&BundleSpec::twisted(1.0), 20, 5, &s).unwrap();
        assert!(tw.max_residual < 1e-7, "{}", tw.max_residual);
    }
}
