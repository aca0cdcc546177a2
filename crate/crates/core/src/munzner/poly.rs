//! Cartan-Munzner polynomials with exact derivatives.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::clifford::{clifford_build, CliffordSystem};
use crate::tensor::{stream_rng, unit_vector, Stream};
use crate::{GeomError, Result};

/// Residual bound every constructed family must meet.
pub const CERTIFICATION_TOL: f64 = 1e-9;
/// Points and seed of the construction-time certification.
pub const CERTIFICATION_SAMPLES: usize = 1000;
pub const CERTIFICATION_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `F = x_{n+1}` on `R^{n+2}`.
    Linear { n: usize },
    /// `F = |x|^2 - |y|^2` on `R^p x R^q`.
    Quadratic { p: usize, q: usize },
    /// `F = |x|^4 - 2 sum_i <P_i x, x>^2` on `R^{2l}`.
    Fkm { m: usize, l: usize },
}

impl Family {
    /// Parses `linear:n`, `quad:p:q`, `fkm:m:l`.
    pub fn parse(id: &str) -> Result<Self> {
        let bad = || GeomError::UnknownId(id.to_string());
        let parts: Vec<&str> = id.split(':').collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["linear", n] => Ok(Family::Linear { n: num(n)? }),
            ["quad", p, q] => Ok(Family::Quadratic {
                p: num(p)?,
                q: num(q)?,
            }),
            ["fkm", m, l] => Ok(Family::Fkm {
                m: num(m)?,
                l: num(l)?,
            }),
            _ => Err(bad()),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Family::Linear { n } => format!("linear:{n}"),
            Family::Quadratic { p, q } => format!("quad:{p}:{q}"),
            Family::Fkm { m, l } => format!("fkm:{m}:{l}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MunznerPolynomial {
    pub family: Family,
    /// Ambient dimension `n + 2`.
    pub ambient: usize,
    pub degree: usize,
    pub m1: usize,
    pub m2: usize,
    pub clifford: Option<CliffordSystem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeResiduals {
    /// `max ||grad F|^2 - g^2 r^{2g-2}|`.
    pub gradient: f64,
    /// `max |Lap F - (m2 - m1)/2 g^2 r^{g-2}|`.
    pub laplacian: f64,
}

/// Builds the polynomial of `family` and certifies it against the Munzner
/// system on [`CERTIFICATION_SAMPLES`] annulus points.
pub fn make_polynomial(family: Family) -> Result<MunznerPolynomial> {
    let poly = match family {
        Family::Linear { n } => {
            if n == 0 {
                return Err(GeomError::BadParameters("linear:n needs n >= 1".into()));
            }
            MunznerPolynomial {
                family,
                ambient: n + 2,
                degree: 1,
                m1: n,
                m2: n,
                clifford: None,
            }
        }
        Family::Quadratic { p, q } => {
            if p < 2 || q < 2 {
                return Err(GeomError::BadParameters(format!(
                    "quad:{p}:{q} needs p, q >= 2"
                )));
            }
            // M+ = {y = 0} has codimension q = m1 + 1 in the sphere.
            MunznerPolynomial {
                family,
                ambient: p + q,
                degree: 2,
                m1: q - 1,
                m2: p - 1,
                clifford: None,
            }
        }
        Family::Fkm { m, l } => {
            if l < m + 2 {
                return Err(GeomError::BadParameters(format!(
                    "fkm:{m}:{l} needs m2 = l - m - 1 >= 1"
                )));
            }
            let cliff = clifford_build(m, l)?;
            MunznerPolynomial {
                family,
                ambient: 2 * l,
                degree: 4,
                m1: m,
                m2: l - m - 1,
                clifford: Some(cliff),
            }
        }
    };
    let res = munzner_residuals(&poly, CERTIFICATION_SAMPLES, CERTIFICATION_SEED);
    if !(res.gradient < CERTIFICATION_TOL && res.laplacian < CERTIFICATION_TOL) {
        return Err(GeomError::BadParameters(format!(
            "{} fails the Munzner system (residuals {:.3e}, {:.3e})",
            family.id(),
            res.gradient,
            res.laplacian
        )));
    }
    Ok(poly)
}

impl MunznerPolynomial {
    pub fn parse(id: &str) -> Result<Self> {
        make_polynomial(Family::parse(id)?)
    }

    pub fn id(&self) -> String {
        self.family.id()
    }

    /// Dimension `n` of the isoparametric hypersurfaces.
    pub fn hypersurface_dim(&self) -> usize {
        self.ambient - 2
    }

    fn clifford_values(&self, x: &DVector<f64>) -> Vec<(DVector<f64>, f64)> {
        self.clifford
            .as_ref()
            .map(|c| {
                c.matrices
                    .iter()
                    .map(|p| {
                        let px = p * x;
                        let s = px.dot(x);
                        (px, s)
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.family {
            Family::Linear { .. } => x[self.ambient - 1],
            Family::Quadratic { p, .. } => {
                x[..p].iter().map(|a| a * a).sum::<f64>()
                    - x[p..].iter().map(|a| a * a).sum::<f64>()
            }
            Family::Fkm { .. } => {
                let xv = DVector::from_column_slice(x);
                let r2 = xv.norm_squared();
                r2 * r2
                    - 2.0
                        * self
                            .clifford_values(&xv)
                            .iter()
                            .map(|(_, s)| s * s)
                            .sum::<f64>()
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let n = self.ambient;
        match self.family {
            Family::Linear { .. } => {
                let mut g = DVector::zeros(n);
                g[n - 1] = 1.0;
                g
            }
            Family::Quadratic { p, .. } => {
                DVector::from_fn(n, |i, _| if i < p { 2.0 * x[i] } else { -2.0 * x[i] })
            }
            Family::Fkm { .. } => {
                let xv = DVector::from_column_slice(x);
                let r2 = xv.norm_squared();
                let mut g = &xv * (4.0 * r2);
                for (px, s) in self.clifford_values(&xv) {
                    g -= px * (8.0 * s);
                }
                g
            }
        }
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.ambient;
        match self.family {
            Family::Linear { .. } => DMatrix::zeros(n, n),
            Family::Quadratic { p, .. } => DMatrix::from_fn(n, n, |i, j| match (i == j, i < p) {
                (true, true) => 2.0,
                (true, false) => -2.0,
                _ => 0.0,
            }),
            Family::Fkm { .. } => {
                let xv = DVector::from_column_slice(x);
                let r2 = xv.norm_squared();
                let mut h = DMatrix::identity(n, n) * (4.0 * r2) + &xv * xv.transpose() * 8.0;
                let cliff = self.clifford.as_ref().expect("fkm has a Clifford system");
                for (p, (px, s)) in cliff.matrices.iter().zip(self.clifford_values(&xv)) {
                    h -= &px * px.transpose() * 16.0 + p * (8.0 * s);
                }
                h
            }
        }
    }

    /// Third derivative `D^3 F(x)[u, v, w]`.
    pub fn third(&self, x: &[f64], u: &[f64], v: &[f64], w: &[f64]) -> f64 {
        match self.family {
            Family::Linear { .. } | Family::Quadratic { .. } => 0.0,
            Family::Fkm { .. } => {
                let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
                let (xw, uv, wu, xv, xu, wv) =
                    (d(x, w), d(u, v), d(w, u), d(x, v), d(x, u), d(w, v));
                let mut out = 8.0 * (xw * uv + wu * xv + xu * wv);
                let cliff = self.clifford.as_ref().expect("fkm has a Clifford system");
                let (xs, us, ws) = (
                    DVector::from_column_slice(x),
                    DVector::from_column_slice(u),
                    DVector::from_column_slice(w),
                );
                let vs = DVector::from_column_slice(v);
                for p in &cliff.matrices {
                    let (px, pw, pu) = (p * &xs, p * &ws, p * &us);
                    out -= 16.0
                        * (pw.dot(&us) * px.dot(&vs)
                            + px.dot(&us) * pw.dot(&vs)
                            + px.dot(&ws) * pu.dot(&vs));
                }
                out
            }
        }
    }

    /// `F(lambda x) - lambda^g F(x)`, maximised over the given points.
    pub fn homogeneity_defect(&self, points: &[Vec<f64>], lambdas: &[f64]) -> f64 {
        let mut d = 0.0_f64;
        for x in points {
            let f = self.value(x);
            for &l in lambdas {
                let y: Vec<f64> = x.iter().map(|a| a * l).collect();
                d = d.max((self.value(&y) - l.powi(self.degree as i32) * f).abs());
            }
        }
        d
    }
}

/// Seeded points with uniform direction and radius uniform in `[0.5, 2]`.
pub fn annulus_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    crate::par::map_indexed(count, |i| {
        let mut rng = stream_rng(seed, Stream::Annulus, i as u64);
        let u = unit_vector(&mut rng, dim);
        let r = 0.5 + 1.5 * rng.random::<f64>();
        u.into_iter().map(|a| a * r).collect()
    })
}

/// Residuals of `|grad F|^2 = g^2 r^{2g-2}` and
/// `Lap F = (m2 - m1)/2 g^2 r^{g-2}` on seeded annulus points.
pub fn munzner_residuals(poly: &MunznerPolynomial, samples: usize, seed: u64) -> PdeResiduals {
    let pts = annulus_points(poly.ambient, samples, seed);
    let g = poly.degree as f64;
    let rows = crate::par::map_indexed(pts.len(), |i| {
        let x = &pts[i];
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let grad = poly.gradient(x);
        let lap = poly.hessian(x).trace();
        let e1 = (grad.norm_squared() - g * g * r.powi(2 * poly.degree as i32 - 2)).abs();
        let e2 = (lap
            - (poly.m2 as f64 - poly.m1 as f64) / 2.0 * g * g * r.powi(poly.degree as i32 - 2))
        .abs();
        (e1, e2)
    });
    PdeResiduals {
        gradient: rows.iter().fold(0.0_f64, |a, r| a.max(r.0)),
        laplacian: rows.iter().fold(0.0_f64, |a, r| a.max(r.1)),
    }
}
