use serde::{Deserialize, Serialize};

use crate::{GeomError, Result};

/// Central finite-difference scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    /// Base step; scaled by `max(1, max|x_i|)` at the evaluation point.
    pub h: f64,
    /// Truncation order of the central stencil, 2 or 4.
    pub order: u8,
    /// Combine steps `h` and `2h` with one Richardson extrapolation.
    pub richardson: bool,
}

impl Default for FdScheme {
    fn default() -> Self {
        Self {
            h: 1e-4,
            order: 2,
            richardson: true,
        }
    }
}

impl FdScheme {
    pub fn new(h: f64, order: u8, richardson: bool) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GeomError::BadParameters(format!(
                "step h must be > 0, got {h}"
            )));
        }
        if order != 2 && order != 4 {
            return Err(GeomError::BadParameters(format!(
                "order must be 2 or 4, got {order}"
            )));
        }
        Ok(Self {
            h,
            order,
            richardson,
        })
    }

    pub fn with_h(h: f64) -> Result<Self> {
        Self::new(h, 2, true)
    }

    /// Effective step at `point`.
    pub fn step_at(&self, point: &[f64]) -> f64 {
        let scale = point.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
        self.h * scale
    }

    /// Farthest distance from `point` any stencil node reaches.
    pub fn reach_at(&self, point: &[f64]) -> f64 {
        let half_width = if self.order == 4 { 2.0 } else { 1.0 };
        let widen = if self.richardson { 2.0 } else { 1.0 };
        half_width * widen * self.step_at(point)
    }
}

/// Axis-aligned coordinate box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        debug_assert!(lo.iter().zip(&hi).all(|(a, b)| a < b));
        Self { lo, hi }
    }

    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn product(&self, other: &ChartBox) -> ChartBox {
        let mut lo = self.lo.clone();
        lo.extend_from_slice(&other.lo);
        let mut hi = self.hi.clone();
        hi.extend_from_slice(&other.hi);
        ChartBox::new(lo, hi)
    }

    /// First coordinate of `x` lying outside the box shrunk by `margin`.
    pub fn violation(&self, x: &[f64], margin: f64) -> Option<usize> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .position(|(v, (lo, hi))| !(*v >= lo + margin && *v <= hi - margin))
    }

    pub fn check_interior(&self, x: &[f64], margin: f64) -> Result<()> {
        if x.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match self.violation(x, margin) {
            Some(coord) => Err(GeomError::OutOfChart { coord }),
            None => Ok(()),
        }
    }

    /// The box shrunk by `margin` on every side.
    pub fn shrink(&self, margin: f64) -> ChartBox {
        ChartBox::new(
            self.lo.iter().map(|v| v + margin).collect(),
            self.hi.iter().map(|v| v - margin).collect(),
        )
    }
}

fn stencil_1(order: u8) -> &'static [(f64, f64)] {
    if order == 4 {
        &[
            (-2.0, 1.0 / 12.0),
            (-1.0, -8.0 / 12.0),
            (1.0, 8.0 / 12.0),
            (2.0, -1.0 / 12.0),
        ]
    } else {
        &[(-1.0, -0.5), (1.0, 0.5)]
    }
}

fn stencil_2(order: u8) -> &'static [(f64, f64)] {
    if order == 4 {
        &[
            (-2.0, -1.0 / 12.0),
            (-1.0, 16.0 / 12.0),
            (0.0, -30.0 / 12.0),
            (1.0, 16.0 / 12.0),
            (2.0, -1.0 / 12.0),
        ]
    } else {
        &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)]
    }
}

fn check_stencil(
    point: &[f64],
    direction: &[f64],
    scheme: &FdScheme,
    domain: Option<&ChartBox>,
) -> Result<()> {
    if direction.len() != point.len() {
        return Err(GeomError::DimensionMismatch {
            expected: point.len(),
            got: direction.len(),
        });
    }
    if let Some(b) = domain {
        let reach = scheme.reach_at(point);
        for sign in [-1.0, 1.0] {
            let x: Vec<f64> = point
                .iter()
                .zip(direction)
                .map(|(p, d)| p + sign * reach * d)
                .collect();
            if let Some(coord) = b.violation(&x, 0.0) {
                return Err(GeomError::DomainExceeded { coord });
            }
        }
    }
    Ok(())
}

/// Directional derivative (first or second) of a vector-valued field.
pub fn fd_derive_vec<F>(
    field: F,
    point: &[f64],
    direction: &[f64],
    deriv_order: u8,
    scheme: &FdScheme,
    domain: Option<&ChartBox>,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if deriv_order != 1 && deriv_order != 2 {
        return Err(GeomError::BadParameters(format!(
            "derivative order must be 1 or 2, got {deriv_order}"
        )));
    }
    check_stencil(point, direction, scheme, domain)?;
    let stencil = if deriv_order == 1 {
        stencil_1(scheme.order)
    } else {
        stencil_2(scheme.order)
    };
    let mut x = point.to_vec();
    let estimate = |h: f64, x: &mut Vec<f64>| -> Vec<f64> {
        let mut acc: Vec<f64> = Vec::new();
        for &(offset, weight) in stencil {
            for ((xi, p), d) in x.iter_mut().zip(point).zip(direction) {
                *xi = p + offset * h * d;
            }
            let val = field(x);
            if acc.is_empty() {
                acc = vec![0.0; val.len()];
            }
            acc.iter_mut().zip(&val).for_each(|(a, v)| *a += weight * v);
        }
        let denom = h.powi(deriv_order as i32);
        acc.iter_mut().for_each(|a| *a /= denom);
        acc
    };
    let h = scheme.step_at(point);
    let fine = estimate(h, &mut x);
    if !scheme.richardson {
        return Ok(fine);
    }
    // The coarse level uses 2h: halving h instead amplifies rounding noise.
    let coarse = estimate(2.0 * h, &mut x);
    let w = 2f64.powi(scheme.order as i32);
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (w * f - c) / (w - 1.0))
        .collect())
}

/// Directional derivative (first or second) of a scalar field.
pub fn fd_derive<F>(
    field: F,
    point: &[f64],
    direction: &[f64],
    deriv_order: u8,
    scheme: &FdScheme,
    domain: Option<&ChartBox>,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    fd_derive_vec(
        |x| vec![field(x)],
        point,
        direction,
        deriv_order,
        scheme,
        domain,
    )
    .map(|v| v[0])
}

/// First partial derivative along coordinate axis `axis`.
pub fn fd_partial_vec<F>(
    field: F,
    point: &[f64],
    axis: usize,
    scheme: &FdScheme,
    domain: Option<&ChartBox>,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut e = vec![0.0; point.len()];
    e[axis] = 1.0;
    fd_derive_vec(field, point, &e, 1, scheme, domain)
}
