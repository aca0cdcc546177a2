//! Focal submanifolds `M_+ = f^{-1}(1)` and `M_- = f^{-1}(-1)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::level::sphere_gradient;
use super::poly::{Family, MunznerPolynomial};
use crate::base::{oracle, MetricChart};
use crate::tensor::{
    gram_schmidt_vectors, orthogonal_complement, stream_rng, sym_eigen, unit_vector, ChartBox,
    FdScheme, ShapeSpectrum, Stream, CLUSTER_GAP,
};
use crate::{GeomError, Result};

pub const FOCAL_NORMAL: &str =
    "unit normal eta of the focal submanifold in the unit sphere, shape operator -nabla eta";

/// Residual `|f(x) -+ 1|` a focal sample must reach.
pub const FOCAL_RESIDUAL: f64 = 1e-10;
pub const MAX_ASCENT_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FocalSign {
    Plus,
    Minus,
}

impl FocalSign {
    pub fn value(self) -> f64 {
        match self {
            FocalSign::Plus => 1.0,
            FocalSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FocalPoint {
    pub x: DVector<f64>,
    pub sign: FocalSign,
    pub residual: f64,
    /// Orthonormal columns spanning `T_x M`.
    pub tangent: DMatrix<f64>,
    /// Orthonormal columns spanning the normal space of `M` in the sphere.
    pub normal: DMatrix<f64>,
}

impl FocalPoint {
    pub fn dim(&self) -> usize {
        self.tangent.ncols()
    }

    pub fn codim(&self) -> usize {
        self.normal.ncols()
    }
}

/// Spherical Hessian `Hess F - <grad F, x> I`, as an ambient matrix.
fn sphere_hessian(poly: &MunznerPolynomial, x: &DVector<f64>) -> DMatrix<f64> {
    let n = poly.ambient;
    let radial = poly.gradient(x.as_slice()).dot(x);
    poly.hessian(x.as_slice()) - DMatrix::identity(n, n) * radial
}

fn columns(vectors: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i])
}

/// Normal space of the focal submanifold at `x`.
fn focal_normal_space(
    poly: &MunznerPolynomial,
    x: &DVector<f64>,
    sign: FocalSign,
) -> Result<DMatrix<f64>> {
    let n = poly.ambient;
    let vecs: Vec<Vec<f64>> = match (poly.family, sign) {
        (Family::Quadratic { p, .. }, FocalSign::Plus) => (p..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect(),
        (Family::Quadratic { p, .. }, FocalSign::Minus) => (0..p)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect(),
        (Family::Fkm { .. }, FocalSign::Plus) => {
            // gradients of the constraints <P_i x, x> = 0
            let cliff = poly.clifford.as_ref().expect("fkm has a Clifford system");
            cliff
                .matrices
                .iter()
                .map(|p| (p * x).as_slice().to_vec())
                .collect()
        }
        _ => {
            // eigenvectors of the spherical Hessian for the eigenvalue -+ g^2
            let g2 = (poly.degree * poly.degree) as f64;
            let target = -sign.value() * g2;
            let tangent_to_sphere = orthogonal_complement(&[x.as_slice().to_vec()], n);
            let h = tangent_to_sphere.transpose() * sphere_hessian(poly, x) * &tangent_to_sphere;
            let eig = sym_eigen(&((&h + h.transpose()) * 0.5))?;
            (0..eig.eigenvalues.len())
                .filter(|&k| (eig.eigenvalues[k] - target).abs() < 1e-3 * g2)
                .map(|k| {
                    (&tangent_to_sphere * eig.eigenvectors.column(k))
                        .as_slice()
                        .to_vec()
                })
                .collect()
        }
    };
    // project off x, then orthonormalise
    let projected: Vec<Vec<f64>> = vecs
        .into_iter()
        .map(|v| {
            let d: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            v.iter().zip(x.iter()).map(|(a, b)| a - d * b).collect()
        })
        .collect();
    Ok(columns(&gram_schmidt_vectors(&projected, 1e-8), n))
}

/// A seeded point of `M_+` (sign `Plus`) or `M_-`: projected gradient ascent
/// of `+-f` on the sphere with step `1/g^2`, then tangent/normal splitting.
pub fn focal_sample(
    poly: &MunznerPolynomial,
    sign: FocalSign,
    seed: u64,
    index: u64,
) -> Result<FocalPoint> {
    let n = poly.ambient;
    let s = sign.value();
    let step = 1.0 / (poly.degree * poly.degree) as f64;
    let mut rng = stream_rng(
        seed,
        Stream::Focal,
        index * 2 + (sign == FocalSign::Minus) as u64,
    );
    let mut x = DVector::from_vec(unit_vector(&mut rng, n));
    let mut converged = false;
    for _ in 0..MAX_ASCENT_ITERATIONS {
        let gs = sphere_gradient(poly, &x);
        let next = {
            let y = &x + gs * (s * step);
            let ny = y.norm();
            y / ny
        };
        let moved = (&next - &x).norm();
        x = next;
        let residual = (poly.value(x.as_slice()) - s).abs();
        if residual <= FOCAL_RESIDUAL && moved < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(GeomError::NoConvergence {
            iterations: MAX_ASCENT_ITERATIONS,
        });
    }
    let residual = (poly.value(x.as_slice()) - s).abs();
    let normal = focal_normal_space(poly, &x, sign)?;
    let mut spanning: Vec<Vec<f64>> = vec![x.as_slice().to_vec()];
    spanning.extend(normal.column_iter().map(|c| c.as_slice().to_vec()));
    let tangent = orthogonal_complement(&spanning, n);
    Ok(FocalPoint {
        x,
        sign,
        residual,
        tangent,
        normal,
    })
}

/// Unit normal at `fp` from coefficients in its normal basis (normalised here).
pub fn normal_from_coefficients(fp: &FocalPoint, c: &[f64]) -> DVector<f64> {
    let v = &fp.normal * DVector::from_column_slice(c);
    let nv = v.norm();
    v / nv
}

/// Seeded unit normals at `fp`.
pub fn sample_normals(fp: &FocalPoint, count: usize, seed: u64) -> Vec<DVector<f64>> {
    (0..count)
        .map(|i| {
            let mut rng = stream_rng(seed, Stream::Normal, i as u64);
            normal_from_coefficients(fp, &unit_vector(&mut rng, fp.codim()))
        })
        .collect()
}

fn check_normal(fp: &FocalPoint, eta: &DVector<f64>) -> Result<()> {
    let defect = eta.norm() - 1.0;
    if defect.abs() > 1e-10 {
        return Err(GeomError::DegenerateNormal { defect });
    }
    let off = (fp.tangent.transpose() * eta)
        .amax()
        .max(eta.dot(&fp.x).abs());
    if off > 1e-8 {
        return Err(GeomError::DegenerateNormal { defect: off });
    }
    Ok(())
}

/// Shape operator `A_eta` on the tangent basis of `fp`.
///
/// Along the normal geodesic `cos(s) x + sin(s) eta` the function
/// `f = +-cos(g s)`, so `Hess^S f(eta, eta) = -+g^2 =: lambda`. Differentiating
/// `Hess^S f (X, eta)` tangentially gives `A_eta = -D^3 F[., ., eta] / lambda`
/// on `T M` (the spherical correction terms vanish there).
pub fn focal_shape_operator(
    poly: &MunznerPolynomial,
    fp: &FocalPoint,
    eta: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    check_normal(fp, eta)?;
    let lambda = (eta.transpose() * sphere_hessian(poly, &fp.x) * eta)[(0, 0)];
    let d = fp.dim();
    let x = fp.x.as_slice();
    let cols: Vec<Vec<f64>> = fp
        .tangent
        .column_iter()
        .map(|c| c.as_slice().to_vec())
        .collect();
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = -poly.third(x, &cols[i], &cols[j], eta.as_slice()) / lambda;
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(a)
}

/// For fkm and `M_+ = {<P_i x, x> = 0}`: `A_eta = -T^T P_c T` when
/// `eta = P_c x`. Independent of third derivatives.
pub fn fkm_plus_shape_operator(
    poly: &MunznerPolynomial,
    fp: &FocalPoint,
    eta: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    check_normal(fp, eta)?;
    let cliff = poly
        .clifford
        .as_ref()
        .filter(|_| fp.sign == FocalSign::Plus)
        .ok_or_else(|| GeomError::BadParameters("explicit route needs fkm and M+".into()))?;
    // coefficients c_i = <eta, P_i x>, since the P_i x are orthonormal on M+
    let c: Vec<f64> = cliff
        .matrices
        .iter()
        .map(|p| eta.dot(&(p * &fp.x)))
        .collect();
    let pc = cliff.combination(&c);
    Ok(-(fp.tangent.transpose() * pc * &fp.tangent))
}

pub fn focal_shape_spectrum(
    poly: &MunznerPolynomial,
    fp: &FocalPoint,
    eta: &DVector<f64>,
) -> Result<ShapeSpectrum> {
    let a = focal_shape_operator(poly, fp, eta)?;
    let eig = sym_eigen(&a)?;
    Ok(ShapeSpectrum::from_eigenvalues(
        eig.eigenvalues.as_slice(),
        CLUSTER_GAP,
        FOCAL_NORMAL,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocalRicci {
    /// Ricci form on the tangent basis of the focal point.
    pub ricci: DMatrix<f64>,
    pub min_eigenvalue: f64,
    /// `2(m2 - 1)` on `M_+`, `2(m1 - 1)` on `M_-`.
    pub bound: f64,
}

/// Gauss equation in the unit sphere:
/// `Ric = (d - 1) I + sum_alpha (tr A_alpha) A_alpha - A_alpha^2`.
pub fn focal_ricci(poly: &MunznerPolynomial, fp: &FocalPoint) -> Result<FocalRicci> {
    let d = fp.dim();
    let mut ric = DMatrix::identity(d, d) * (d as f64 - 1.0);
    for col in fp.normal.column_iter() {
        let a = focal_shape_operator(poly, fp, &col.clone_owned())?;
        ric += &a * a.trace() - &a * &a;
    }
    let ric = (&ric + ric.transpose()) * 0.5;
    let min_eigenvalue = if d == 0 {
        f64::NAN
    } else {
        sym_eigen(&ric)?.min()
    };
    let other = match fp.sign {
        FocalSign::Plus => poly.m2,
        FocalSign::Minus => poly.m1,
    };
    Ok(FocalRicci {
        ricci: ric,
        min_eigenvalue,
        bound: 2.0 * (other as f64 - 1.0),
    })
}

/// Norm of the mean curvature vector `(tr A_alpha)_alpha`.
pub fn focal_minimality(poly: &MunznerPolynomial, fp: &FocalPoint) -> Result<f64> {
    let mut acc = 0.0;
    for col in fp.normal.column_iter() {
        let tr = focal_shape_operator(poly, fp, &col.clone_owned())?.trace();
        acc += tr * tr;
    }
    Ok(acc.sqrt())
}

/// Local parametrisation of fkm `M_+` near `fp.x`:
/// `y(s) = x + T s + N t(s)` with `t` solving `|y|^2 = 1`, `<P_i y, y> = 0`
/// by Newton's method and `N = [x, P_0 x, ..., P_m x]`.
fn fkm_plus_param(
    cliff: &super::CliffordSystem,
    x0: &DVector<f64>,
    tangent: &DMatrix<f64>,
    s: &[f64],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = x0.len();
    let k = cliff.matrices.len() + 1;
    let mut nmat = DMatrix::zeros(n, k);
    nmat.set_column(0, x0);
    for (i, p) in cliff.matrices.iter().enumerate() {
        nmat.set_column(i + 1, &(p * x0));
    }
    let base = x0 + tangent * DVector::from_column_slice(s);
    let constraints = |y: &DVector<f64>| -> (DVector<f64>, DMatrix<f64>) {
        // values and gradients (rows) of G(y)
        let mut g = DVector::zeros(k);
        let mut dg = DMatrix::zeros(k, n);
        g[0] = y.norm_squared() - 1.0;
        dg.set_row(0, &(y * 2.0).transpose());
        for (i, p) in cliff.matrices.iter().enumerate() {
            let py = p * y;
            g[i + 1] = py.dot(y);
            dg.set_row(i + 1, &(py * 2.0).transpose());
        }
        (g, dg)
    };
    let mut t = DVector::zeros(k);
    let mut y = base.clone();
    for _ in 0..60 {
        y = &base + &nmat * &t;
        let (g, dg) = constraints(&y);
        if g.amax() < 1e-15 {
            break;
        }
        let jn = &dg * &nmat;
        let delta = jn
            .lu()
            .solve(&(-g))
            .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?;
        t += delta;
    }
    let (g, dg) = constraints(&y);
    if g.amax() > 1e-12 {
        return Err(GeomError::NoConvergence { iterations: 60 });
    }
    let jn = &dg * &nmat;
    let dt = -jn
        .lu()
        .solve(&(&dg * tangent))
        .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?;
    Ok((y, tangent + nmat * dt))
}

/// Intrinsic Ricci form of fkm `M_+` at `fp` by differences of the induced
/// metric in the Newton chart, on the tangent basis of `fp`.
pub fn fkm_plus_intrinsic_ricci(
    poly: &MunznerPolynomial,
    fp: &FocalPoint,
    scheme: &FdScheme,
) -> Result<DMatrix<f64>> {
    let cliff = poly
        .clifford
        .clone()
        .filter(|_| fp.sign == FocalSign::Plus)
        .ok_or_else(|| GeomError::BadParameters("intrinsic chart needs fkm and M+".into()))?;
    let d = fp.dim();
    let x0 = fp.x.clone();
    let tangent = fp.tangent.clone();
    let chart = MetricChart::new(
        ChartBox::cube(d, 0.3),
        Arc::new(
            move |s: &[f64]| match fkm_plus_param(&cliff, &x0, &tangent, s) {
                Ok((_, j)) => j.transpose() * j,
                Err(_) => DMatrix::from_element(d, d, f64::NAN),
            },
        ),
    );
    let cc = oracle::coordinate_curvature(&chart, &vec![0.0; d], scheme)?;
    // at s = 0 the chart is isometric to the tangent basis
    Ok(cc.ricci())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_focal_set() {
        let poly = MunznerPolynomial::parse("quad:3:2").unwrap();
        let fp = focal_sample(&poly, FocalSign::Plus, 1, 0).unwrap();
        assert!(fp.residual <= FOCAL_RESIDUAL);
        assert!(fp.x[3].abs() < 1e-7 && fp.x[4].abs() < 1e-7);
        assert_eq!(fp.codim(), 2);
        assert_eq!(fp.codim(), poly.m1 + 1);
        assert_eq!(fp.dim(), 2);
        let eta = sample_normals(&fp, 1, 2).remove(0);
        let s = focal_shape_spectrum(&poly, &fp, &eta).unwrap();
        assert_eq!(s.values(), vec![0.0]);
        let ric = focal_ricci(&poly, &fp).unwrap();
        assert!((ric.ricci - DMatrix::identity(2, 2)).abs().max() < 1e-12);
        assert_eq!(focal_minimality(&poly, &fp).unwrap(), 0.0);
    }

    #[test]
    fn fkm_focal_spectrum_and_routes_agree() {
        let poly = MunznerPolynomial::parse("fkm:1:4").unwrap();
        let fp = focal_sample(&poly, FocalSign::Plus, 3, 0).unwrap();
        assert!(fp.residual <= FOCAL_RESIDUAL);
        assert!((fp.x.norm() - 1.0).abs() < 1e-14);
        assert_eq!(fp.codim(), poly.m1 + 1);
        assert_eq!(fp.dim() + fp.codim(), poly.ambient - 1);
        for eta in sample_normals(&fp, 5, 4) {
            let a = focal_shape_operator(&poly, &fp, &eta).unwrap();
            let b = fkm_plus_shape_operator(&poly, &fp, &eta).unwrap();
            assert!((&a - &b).abs().max() < 1e-8);
            let s = focal_shape_spectrum(&poly, &fp, &eta).unwrap();
            let vals = s.values();
            assert_eq!(vals.len(), 3, "{vals:?}");
            assert!(
                (vals[0] + 1.0).abs() < 1e-6
                    && vals[1].abs() < 1e-6
                    && (vals[2] - 1.0).abs() < 1e-6
            );
            assert_eq!(s.multiplicities(), vec![poly.m2, poly.m1, poly.m2]);
        }
    }

    #[test]
    fn fkm_minus_side() {
        let poly = MunznerPolynomial::parse("fkm:1:4").unwrap();
        let fp = focal_sample(&poly, FocalSign::Minus, 5, 0).unwrap();
        assert_eq!(fp.codim(), poly.m2 + 1);
        for eta in sample_normals(&fp, 3, 1) {
            let s = focal_shape_spectrum(&poly, &fp, &eta).unwrap();
            let vals = s.values();
            assert!(
                (vals[0] + 1.0).abs() < 1e-6 && (vals[vals.len() - 1] - 1.0).abs() < 1e-6,
                "{vals:?}"
            );
        }
        assert!(focal_minimality(&poly, &fp).unwrap() < 1e-6);
    }

    #[test]
    fn fkm_ricci_bound_and_intrinsic_check() {
        let poly = MunznerPolynomial::parse("fkm:1:4").unwrap();
        let fp = focal_sample(&poly, FocalSign::Plus, 7, 0).unwrap();
        let ric = focal_ricci(&poly, &fp).unwrap();
        assert!(ric.min_eigenvalue >= ric.bound - 1e-6);
        let fd = fkm_plus_intrinsic_ricci(&poly, &fp, &FdScheme::default()).unwrap();
        let diff = (&fd - &ric.ricci).abs().max();
        assert!(diff < 1e-4, "{diff}");
    }

    #[test]
    fn non_unit_normal_rejected() {
        let poly = MunznerPolynomial::parse("fkm:1:4").unwrap();
        let fp = focal_sample(&poly, FocalSign::Plus, 3, 0).unwrap();
        let eta = sample_normals(&fp, 1, 4).remove(0) * 1.01;
        assert!(matches!(
            focal_shape_spectrum(&poly, &fp, &eta),
            Err(GeomError::DegenerateNormal { .. })
        ));
    }
}
