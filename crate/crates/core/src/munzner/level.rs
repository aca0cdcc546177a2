//! Regular levels of `f = F|_{S^{n+1}}` and their principal curvatures.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::poly::MunznerPolynomial;
use crate::tensor::{
    orthogonal_complement, stream_rng, sym_eigen, unit_vector, ShapeSpectrum, Stream, CLUSTER_GAP,
};
use crate::{GeomError, Result};

pub const LEVEL_NORMAL: &str =
    "eta = grad^S f / |grad^S f| in the unit sphere, shape operator -nabla eta";

/// Levels with `|f| >= 1 - REGULAR_MARGIN` count as focal.
pub const REGULAR_MARGIN: f64 = 1e-6;
/// Spherical gradients below this norm are rejected.
pub const MIN_GRADIENT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelPoint {
    pub x: DVector<f64>,
    pub f: f64,
    /// Unit normal of the level in the sphere.
    pub eta: DVector<f64>,
}

/// `grad^S f = grad F - <grad F, x> x` at a unit vector `x`.
pub fn sphere_gradient(poly: &MunznerPolynomial, x: &DVector<f64>) -> DVector<f64> {
    let g = poly.gradient(x.as_slice());
    let gx = g.dot(x);
    g - x * gx
}

impl LevelPoint {
    pub fn new(poly: &MunznerPolynomial, x: &[f64]) -> Result<Self> {
        if x.len() != poly.ambient {
            return Err(GeomError::DimensionMismatch {
                expected: poly.ambient,
                got: x.len(),
            });
        }
        let mut xv = DVector::from_column_slice(x);
        let nx = xv.norm();
        if !(nx > 0.0) {
            return Err(GeomError::BadParameters(
                "zero vector is not on the sphere".into(),
            ));
        }
        xv /= nx;
        let f = poly.value(xv.as_slice());
        let grad = sphere_gradient(poly, &xv);
        let gn = grad.norm();
        if f.abs() >= 1.0 - REGULAR_MARGIN || gn < MIN_GRADIENT {
            return Err(GeomError::NearFocal { grad: gn });
        }
        Ok(Self {
            x: xv,
            f,
            eta: grad / gn,
        })
    }
}

/// Shape operator of the level through `lp`, on an orthonormal basis of the
/// level's tangent space (returned alongside).
pub fn level_shape_operator(
    poly: &MunznerPolynomial,
    lp: &LevelPoint,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let x = lp.x.as_slice();
    let grad = poly.gradient(x);
    let gs = sphere_gradient(poly, &lp.x);
    let gn = gs.norm();
    if gn < MIN_GRADIENT {
        return Err(GeomError::NearFocal { grad: gn });
    }
    let basis = orthogonal_complement(&[x.to_vec(), lp.eta.as_slice().to_vec()], poly.ambient);
    let radial = grad.dot(&lp.x);
    let hess = poly.hessian(x);
    let h = basis.transpose() * hess * &basis;
    let k = basis.ncols();
    let shape = (h - DMatrix::identity(k, k) * radial) * (-1.0 / gn);
    Ok(((&shape + shape.transpose()) * 0.5, basis))
}

/// Principal curvatures of `f^{-1}(f(x))` at `lp`, clustered.
pub fn level_shape_spectrum(poly: &MunznerPolynomial, lp: &LevelPoint) -> Result<ShapeSpectrum> {
    let (shape, _) = level_shape_operator(poly, lp)?;
    let eig = sym_eigen(&shape)?;
    Ok(ShapeSpectrum::from_eigenvalues(
        eig.eigenvalues.as_slice(),
        CLUSTER_GAP,
        LEVEL_NORMAL,
    ))
}

/// `theta_1 = arccos(c) / g`.
pub fn first_angle(poly: &MunznerPolynomial, c: f64) -> f64 {
    c.clamp(-1.0, 1.0).acos() / poly.degree as f64
}

/// Closed-form principal curvatures of the level `c`:
/// `cot(theta_1 + (alpha - 1) pi / g)` with multiplicities `m1, m2, m1, ...`.
pub fn expected_level_curvatures(poly: &MunznerPolynomial, c: f64) -> Vec<(f64, usize)> {
    let g = poly.degree;
    let t1 = first_angle(poly, c);
    (0..g)
        .map(|a| {
            let theta = t1 + a as f64 * PI / g as f64;
            let mult = if a % 2 == 0 { poly.m1 } else { poly.m2 };
            (theta.cos() / theta.sin(), mult)
        })
        .collect()
}

/// Sum of principal curvatures of the level `c`, closed form.
pub fn expected_mean_curvature(poly: &MunznerPolynomial, c: f64) -> f64 {
    expected_level_curvatures(poly, c)
        .iter()
        .map(|(k, m)| k * *m as f64)
        .sum()
}

/// Angles `arccot k` in `(0, pi)`, ascending, one per cluster.
pub fn curvature_angles(spectrum: &ShapeSpectrum) -> Vec<f64> {
    let mut a: Vec<f64> = spectrum
        .values()
        .iter()
        .map(|k| {
            let t = (1.0 / k).atan();
            if t < 0.0 {
                t + PI
            } else {
                t
            }
        })
        .collect();
    a.sort_by(f64::total_cmp);
    a
}

/// A point of the level `f = c`, from a seeded start pushed along the
/// spherical gradient by Newton steps.
pub fn level_point_at(
    poly: &MunznerPolynomial,
    c: f64,
    seed: u64,
    index: u64,
) -> Result<LevelPoint> {
    if !(c.abs() < 1.0 - REGULAR_MARGIN) {
        return Err(GeomError::NearFocal { grad: 0.0 });
    }
    for attempt in 0..16u64 {
        let mut rng = stream_rng(seed, Stream::Level, index * 16 + attempt);
        let mut x = DVector::from_vec(unit_vector(&mut rng, poly.ambient));
        for _ in 0..200 {
            let f = poly.value(x.as_slice());
            let gs = sphere_gradient(poly, &x);
            let g2 = gs.norm_squared();
            if g2 < MIN_GRADIENT * MIN_GRADIENT {
                break;
            }
            let err = c - f;
            if err.abs() < 1e-14 {
                if let Ok(lp) = LevelPoint::new(poly, x.as_slice()) {
                    return Ok(lp);
                }
                break;
            }
            // cap the step so the iteration cannot jump across the sphere
            let step = (err / g2).clamp(-0.2 / g2.sqrt(), 0.2 / g2.sqrt());
            x += gs * step;
            x /= x.norm();
        }
    }
    Err(GeomError::NoConvergence {
        iterations: 16 * 200,
    })
}

/// Level `c*` whose hypersurface is minimal: root of the closed-form mean
/// curvature, located by bisection.
pub fn minimal_level_locate(poly: &MunznerPolynomial) -> f64 {
    let (mut lo, mut hi) = (-1.0 + 1e-12, 1.0 - 1e-12);
    // Mean curvature increases with c.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected_mean_curvature(poly, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean curvature (trace of the shape operator) measured from the Hessian at
/// a seeded point of the level `c`.
pub fn numerical_mean_curvature(poly: &MunznerPolynomial, c: f64, seed: u64) -> Result<f64> {
    let lp = level_point_at(poly, c, seed, 0)?;
    Ok(level_shape_operator(poly, &lp)?.0.trace())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpectrumSummary {
    pub c: f64,
    pub values: Vec<f64>,
    pub multiplicities: Vec<usize>,
}
