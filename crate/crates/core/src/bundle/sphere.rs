//! Sphere bundles `S_r = {|v| = r}` as hypersurfaces of the total space.
//!
//! Frame on `S_r`: the base vectors `e_i` followed by `e_a = P_{a alpha} e_alpha`
//! for `a < n - 1`, where `P` is the adapted rotation whose last row is `u`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{total_curvature, twist_coefficients, BundleSpec, FiberPoint};
use crate::base::base_sample;
use crate::tensor::{stream_rng, sym_eigen, unit_vector, Curvature4Tensor, ShapeSpectrum, Stream};
use crate::{GeomError, Result};

/// Normal convention recorded in every sphere-bundle spectrum.
pub const SPHERE_NORMAL: &str = "outward eta = u_alpha d/dv_alpha, shape operator -nabla eta";

/// Distance from the pole `u_n = 1` below which the block formula is not used.
pub const POLE_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedFrame {
    /// Orthogonal `n x n` rotation with last row `u`.
    pub p: DMatrix<f64>,
    /// True when the coordinate swap `0 <-> n-1` was applied.
    pub regauged: bool,
}

/// The block formula `[[I - x^T x / (1 - x_n), x^T], [x, x_n]]` with
/// `u = (x, x_n)`. Fails with `FramePole` near `u_n = 1`.
pub fn block_frame(u: &[f64]) -> Result<DMatrix<f64>> {
    let n = u.len();
    if n == 0 {
        return Err(GeomError::BadParameters("empty fiber direction".into()));
    }
    if n == 1 {
        return Ok(DMatrix::from_element(1, 1, u[0]));
    }
    let xn = u[n - 1];
    let gap = (1.0 - xn).abs();
    if gap < POLE_GAP {
        return Err(GeomError::FramePole { gap });
    }
    let x = &u[..n - 1];
    Ok(DMatrix::from_fn(n, n, |a, b| {
        match (a < n - 1, b < n - 1) {
            (true, true) => {
                let delta = if a == b { 1.0 } else { 0.0 };
                delta - x[a] * x[b] / (1.0 - xn)
            }
            (true, false) => x[a],
            (false, true) => x[b],
            (false, false) => xn,
        }
    }))
}

/// Adapted rotation for the unit fiber direction `u`, re-gauged by swapping
/// coordinates `0` and `n - 1` when `u` sits at the pole of the block formula.
pub fn adapted_frame(u: &[f64]) -> Result<AdaptedFrame> {
    match block_frame(u) {
        Ok(p) => Ok(AdaptedFrame { p, regauged: false }),
        Err(GeomError::FramePole { .. }) => {
            let n = u.len();
            let mut su = u.to_vec();
            su.swap(0, n - 1);
            let mut p = block_frame(&su)?;
            // P(Su) S: swap columns back so that the last row is u again.
            p.swap_columns(0, n - 1);
            Ok(AdaptedFrame { p, regauged: true })
        }
        Err(e) => Err(e),
    }
}

fn require_sphere_point(fp: &FiberPoint) -> Result<&[f64]> {
    if !(fp.r > 0.0) {
        return Err(GeomError::BadParameters("sphere bundle needs r > 0".into()));
    }
    fp.unit()
}

/// Principal curvatures of `S_r` at `fp`: `0` along the base directions and
/// `-1/r` along the fiber sphere.
pub fn sphere_shape_spectrum(spec: &BundleSpec, fp: &FiberPoint) -> Result<ShapeSpectrum> {
    require_sphere_point(fp)?;
    let (m, n) = (spec.base_dim(), spec.rank);
    Ok(ShapeSpectrum::exact(
        &[(0.0, m), (-1.0 / fp.r, n - 1)],
        SPHERE_NORMAL,
    ))
}

/// Ricci tensor of the induced metric on `S_r`, in the adapted frame
/// `(e_i, e_a)`, assembled from the closed-form sectional sums.
pub fn sphere_ricci(spec: &BundleSpec, fp: &FiberPoint) -> Result<DMatrix<f64>> {
    let u = require_sphere_point(fp)?;
    let (m, n) = (spec.base_dim(), spec.rank);
    let p = adapted_frame(u)?.p;
    let (curv, deriv) = spec.feeds(&fp.base.point)?;
    let a = twist_coefficients(&curv, &fp.v);
    let rb = &fp.base.curvature;
    let v = &fp.v;
    let r2 = fp.r * fp.r;
    let d = m + n - 1;
    let mut ric = DMatrix::zeros(d, d);

    // rotated twists B_{ik a} = P_{a alpha} A_{ik alpha}
    let b = |i: usize, k: usize, fa: usize| -> f64 {
        (0..n).map(|al| p[(fa, al)] * a.get(i, k, al)).sum()
    };
    for i in 0..m {
        for j in i..m {
            let mut s = 0.0;
            for k in 0..m {
                s += rb.get(i, k, j, k);
                s -= 3.0
                    * (0..n)
                        .map(|al| a.get(i, k, al) * a.get(j, k, al))
                        .sum::<f64>();
                s += (0..n - 1).map(|fa| b(i, k, fa) * b(j, k, fa)).sum::<f64>();
            }
            ric[(i, j)] = s;
            ric[(j, i)] = s;
        }
    }
    if !deriv.is_zero() {
        for i in 0..m {
            for fa in 0..n - 1 {
                let mut s = 0.0;
                for k in 0..m {
                    for al in 0..n {
                        for be in 0..n {
                            s += 0.5 * deriv.get(al, be, i, k, k) * v[be] * p[(fa, al)];
                        }
                    }
                }
                ric[(i, m + fa)] = s;
                ric[(m + fa, i)] = s;
            }
        }
    }
    for fa in 0..n - 1 {
        for fb in fa..n - 1 {
            let mut s = 0.0;
            for k in 0..m {
                for l in 0..m {
                    s += b(k, l, fa) * b(k, l, fb);
                }
            }
            if fa == fb {
                s += (n as f64 - 2.0) / r2;
            }
            ric[(m + fa, m + fb)] = s;
            ric[(m + fb, m + fa)] = s;
        }
    }
    Ok(ric)
}

/// Full curvature tensor of `S_r` in the adapted frame via the Gauss
/// equation: ambient components plus `1/r^2` on fiber-sphere planes.
pub fn sphere_curvature(spec: &BundleSpec, fp: &FiberPoint) -> Result<Curvature4Tensor> {
    let u = require_sphere_point(fp)?;
    let (m, n) = (spec.base_dim(), spec.rank);
    let p = adapted_frame(u)?.p;
    let theta = total_curvature(spec, fp)?.theta;
    let d = m + n - 1;
    let mut basis = DMatrix::zeros(m + n, d);
    for i in 0..m {
        basis[(i, i)] = 1.0;
    }
    for fa in 0..n - 1 {
        for al in 0..n {
            basis[(m + al, m + fa)] = p[(fa, al)];
        }
    }
    let restricted = theta.transform(&basis);
    let k = 1.0 / (fp.r * fp.r);
    let fiber = |x: usize| x >= m;
    Ok(Curvature4Tensor::from_fn(d, |a, b, c, e| {
        let mut val = restricted.get(a, b, c, e);
        if fiber(a) && fiber(b) && fiber(c) && fiber(e) {
            let delta = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
            val += k * (delta(a, c) * delta(b, e) - delta(a, e) * delta(b, c));
        }
        val
    }))
}

/// Scalar curvature of `S_r`: the trace of [`sphere_ricci`].
pub fn sphere_scalar(spec: &BundleSpec, fp: &FiberPoint) -> Result<f64> {
    Ok(sphere_ricci(spec, fp)?.trace())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Base points per radius.
    pub samples: usize,
    /// Fiber directions per base point.
    pub directions: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            samples: 32,
            directions: 16,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityScanReport {
    pub r_grid: Vec<f64>,
    pub min_ricci: Vec<f64>,
    pub min_scalar: Vec<f64>,
    /// Largest radius `r_k` with `min_ricci > 0` at every grid radius `<= r_k`.
    pub threshold: Option<f64>,
    /// The derivative feed vanished identically, so the mixed Ricci block was
    /// summed as zero rather than exercised.
    pub curv_deriv_zero: bool,
    pub samples: usize,
    pub directions: usize,
}

/// Minimum Ricci eigenvalue and scalar curvature of `S_r` over seeded base
/// points and fiber directions, for every radius of the grid.
pub fn positivity_scan(
    spec: &BundleSpec,
    r_grid: &[f64],
    opts: &ScanOptions,
) -> Result<PositivityScanReport> {
    if spec.rank < 2 {
        return Err(GeomError::BadParameters(
            "positivity scan needs rank >= 2".into(),
        ));
    }
    if r_grid.is_empty()
        || r_grid.iter().any(|r| !(*r > 0.0))
        || r_grid.windows(2).any(|w| !(w[0] < w[1]))
    {
        return Err(GeomError::BadParameters(
            "radius grid must be positive and strictly ascending".into(),
        ));
    }
    if opts.samples == 0 || opts.directions == 0 {
        return Err(GeomError::BadParameters(
            "scan needs samples and directions".into(),
        ));
    }
    let xs = spec.sample_base_points(opts.samples, opts.seed);
    let bases = crate::par::try_map_indexed(xs.len(), |i| base_sample(&spec.base, &xs[i]))?;
    let dirs: Vec<Vec<f64>> = (0..opts.samples * opts.directions)
        .map(|k| {
            let mut rng = stream_rng(opts.seed, Stream::FiberDirection, k as u64);
            unit_vector(&mut rng, spec.rank)
        })
        .collect();
    let cells = crate::par::try_map_indexed(r_grid.len() * opts.samples, |idx| {
        let (ri, s) = (idx / opts.samples, idx % opts.samples);
        let r = r_grid[ri];
        let mut lo_ric = f64::INFINITY;
        let mut lo_scal = f64::INFINITY;
        for d in 0..opts.directions {
            let u = &dirs[s * opts.directions + d];
            let fp = FiberPoint::new(bases[s].clone(), u.iter().map(|a| a * r).collect());
            let ric = sphere_ricci(spec, &fp)?;
            lo_ric = crate::par::min_of(&[lo_ric, sym_eigen(&ric)?.min()]);
            lo_scal = crate::par::min_of(&[lo_scal, ric.trace()]);
        }
        Ok((lo_ric, lo_scal))
    })?;
    let mut min_ricci = Vec::with_capacity(r_grid.len());
    let mut min_scalar = Vec::with_capacity(r_grid.len());
    for row in cells.chunks(opts.samples) {
        let ric: Vec<f64> = row.iter().map(|c| c.0).collect();
        let scal: Vec<f64> = row.iter().map(|c| c.1).collect();
        min_ricci.push(crate::par::min_of(&ric));
        min_scalar.push(crate::par::min_of(&scal));
    }
    let threshold = r_grid
        .iter()
        .zip(&min_ricci)
        .take_while(|(_, q)| **q > 0.0)
        .last()
        .map(|(r, _)| *r);
    Ok(PositivityScanReport {
        r_grid: r_grid.to_vec(),
        min_ricci,
        min_scalar,
        threshold,
        curv_deriv_zero: spec.curv_deriv_zero,
        samples: opts.samples,
        directions: opts.directions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonality_defect(p: &DMatrix<f64>) -> f64 {
        let n = p.nrows();
        (p * p.transpose() - DMatrix::identity(n, n)).abs().max()
    }

    #[test]
    fn frame_at_south_pole_is_reflection() {
        let f = adapted_frame(&[0.0, 0.0, -1.0]).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0]));
        assert_eq!(f.p, expected);
        assert!(!f.regauged);
    }

    #[test]
    fn frame_for_first_axis() {
        let f = adapted_frame(&[1.0, 0.0, 0.0]).unwrap();
        assert!(orthogonality_defect(&f.p) < 1e-15);
        assert_eq!(
            f.p.row(2).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn pole_is_regauged() {
        let u = [0.0, 0.0, 0.0, 1.0];
        assert!(matches!(block_frame(&u), Err(GeomError::FramePole { .. })));
        let f = adapted_frame(&u).unwrap();
        assert!(f.regauged);
        assert!(orthogonality_defect(&f.p) < 1e-15);
        for (a, b) in f.p.row(3).iter().zip(&u) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn flat_sphere_ricci_is_round_fiber() {
        let spec = BundleSpec::flat(2, 4);
        let r = 0.7;
        let fp = FiberPoint::on_sphere(&spec, &[0.1, 0.2], &[1.0, 2.0, -1.0, 0.5], r).unwrap();
        let ric = sphere_ricci(&spec, &fp).unwrap();
        let mut expected = DMatrix::zeros(5, 5);
        for a in 2..5 {
            expected[(a, a)] = 2.0 / (r * r);
        }
        assert!((ric - expected).abs().max() < 1e-12);
    }

    #[test]
    fn product_with_sphere_ricci_and_scalar() {
        let spec = BundleSpec::trivial_over_s2(3);
        let fp = FiberPoint::on_sphere(&spec, &[1.0, 0.3], &[0.2, -0.5, 0.8], 0.5).unwrap();
        let ric = sphere_ricci(&spec, &fp).unwrap();
        let expected =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 4.0, 4.0]));
        assert!((ric - expected).abs().max() < 1e-12);
        assert!((sphere_scalar(&spec, &fp).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_route_matches_sectional_sums() {
        for spec in [BundleSpec::twisted(1.0), BundleSpec::ts2()] {
            let u = vec![0.3, -0.8, 0.5][..spec.rank].to_vec();
            let fp = FiberPoint::on_sphere(&spec, &[0.8, 0.4], &u, 0.3).unwrap();
            let k = sphere_curvature(&spec, &fp).unwrap();
            let ric = sphere_ricci(&spec, &fp).unwrap();
            assert!((k.ricci() - ric).abs().max() < 1e-12, "{}", spec.id);
        }
    }

    #[test]
    fn spectrum_multiplicities() {
        let spec = BundleSpec::twisted(1.0);
        let fp = FiberPoint::on_sphere(&spec, &[0.0, 0.0], &[0.0, 1.0, 0.0], 2.0).unwrap();
        let s = sphere_shape_spectrum(&spec, &fp).unwrap();
        assert_eq!(s.values(), vec![-0.5, 0.0]);
        assert_eq!(s.multiplicities(), vec![2, 2]);
    }

    #[test]
    fn scan_flat_circle_bundle_is_zero() {
        let spec = BundleSpec::flat(2, 2);
        let opts = ScanOptions {
            samples: 4,
            directions: 4,
            seed: 1,
        };
        let rep = positivity_scan(&spec, &[0.1, 1.0], &opts).unwrap();
        assert_eq!(rep.min_ricci, vec![0.0, 0.0]);
        assert_eq!(rep.threshold, None);
    }

    #[test]
    fn scan_rejects_bad_grid() {
        let spec = BundleSpec::flat(2, 3);
        let o = ScanOptions::default();
        assert!(positivity_scan(&spec, &[], &o).is_err());
        assert!(positivity_scan(&spec, &[1.0, 0.5], &o).is_err());
    }
}
