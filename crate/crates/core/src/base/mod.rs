//! Base manifolds: catalog geometries with closed-form curvature, plus
//! arbitrary coordinate charts handled by the finite-difference oracle.

mod chart;
pub mod oracle;

pub use chart::{
    orthonormal_frame, sphere_angle_box, sphere_embedding, EmbeddingFn, MetricChart, MetricFn,
    POLE_MARGIN,
};
pub use oracle::{chart_curvature_oracle, coordinate_curvature, CoordinateCurvature};

use nalgebra::DMatrix;

use crate::tensor::{stream_rng, uniform_in_box, Curvature4Tensor, FdScheme, Stream};
use crate::{GeomError, Result};

/// Interior margin used when sampling chart points, wide enough for two
/// nested difference stencils at the default step.
pub const SAMPLE_MARGIN: f64 = 0.02;

#[derive(Debug, Clone)]
pub enum BaseKind {
    /// `S^m(a)` in hyperspherical angles.
    RoundSphere {
        m: usize,
        radius: f64,
    },
    /// Euclidean `R^m` on the cube `[-1, 1]^m` (locally a flat torus).
    Flat {
        m: usize,
    },
    Product(Box<BaseGeometry>, Box<BaseGeometry>),
    /// Anything else: curvature comes from the chart oracle.
    Chart,
}

#[derive(Debug, Clone)]
pub struct BaseGeometry {
    pub kind: BaseKind,
    pub chart: MetricChart,
    pub id: String,
}

/// Curvature data at one base point, in the Gram-Schmidt frame of the chart.
#[derive(Debug, Clone)]
pub struct BaseCurvatureSample {
    pub point: Vec<f64>,
    /// Orthonormal frame vectors as columns (coordinate components).
    pub frame: DMatrix<f64>,
    /// Inverse of `frame`: row `i` is the coframe form `omega_i`.
    pub coframe: DMatrix<f64>,
    pub curvature: Curvature4Tensor,
    pub ricci: DMatrix<f64>,
}

impl BaseGeometry {
    pub fn flat(m: usize) -> Self {
        Self {
            kind: BaseKind::Flat { m },
            chart: MetricChart::euclidean(m, 1.0),
            id: format!("flat:{m}"),
        }
    }

    pub fn round_sphere(m: usize, radius: f64) -> Result<Self> {
        if m == 0 || !(radius > 0.0) {
            return Err(GeomError::BadParameters(format!(
                "sphere needs m >= 1 and radius > 0, got m={m}, a={radius}"
            )));
        }
        Ok(Self {
            kind: BaseKind::RoundSphere { m, radius },
            chart: MetricChart::round_sphere(m, radius),
            id: format!("s:{m}:{radius}"),
        })
    }

    pub fn product(a: BaseGeometry, b: BaseGeometry) -> Self {
        let chart = MetricChart::product(&a.chart, &b.chart);
        let id = format!("prod:({})x({})", a.id, b.id);
        Self {
            kind: BaseKind::Product(Box::new(a), Box::new(b)),
            chart,
            id,
        }
    }

    pub fn from_chart(chart: MetricChart, id: impl Into<String>) -> Self {
        Self {
            kind: BaseKind::Chart,
            chart,
            id: id.into(),
        }
    }

    /// Parses `flat:m`, `s:m:a` and `prod:(A)x(B)`.
    pub fn parse(id: &str) -> Result<Self> {
        let bad = || GeomError::UnknownId(id.to_string());
        if let Some(rest) = id.strip_prefix("prod:") {
            let (left, tail) = split_parenthesised(rest).ok_or_else(bad)?;
            let tail = tail.strip_prefix('x').ok_or_else(bad)?;
            let (right, end) = split_parenthesised(tail).ok_or_else(bad)?;
            if !end.is_empty() {
                return Err(bad());
            }
            return Ok(Self::product(Self::parse(left)?, Self::parse(right)?));
        }
        let parts: Vec<&str> = id.split(':').collect();
        match parts.as_slice() {
            ["flat", m] => {
                let m: usize = m.parse().map_err(|_| bad())?;
                if m == 0 {
                    return Err(bad());
                }
                Ok(Self::flat(m))
            }
            ["s", m, a] => {
                let m: usize = m.parse().map_err(|_| bad())?;
                let a: f64 = a.parse().map_err(|_| bad())?;
                Self::round_sphere(m, a)
            }
            _ => Err(bad()),
        }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim
    }

    /// Closed-form curvature in the Gram-Schmidt frame, `None` for raw charts.
    fn closed_form(&self, x: &[f64]) -> Option<Curvature4Tensor> {
        match &self.kind {
            BaseKind::RoundSphere { m, radius } => Some(Curvature4Tensor::constant_curvature(
                *m,
                1.0 / (radius * radius),
            )),
            BaseKind::Flat { m } => Some(Curvature4Tensor::zeros(*m)),
            BaseKind::Product(a, b) => {
                let ka = a.closed_form(&x[..a.dim()])?;
                let kb = b.closed_form(&x[a.dim()..])?;
                Some(block_sum(&ka, &kb))
            }
            BaseKind::Chart => None,
        }
    }

    /// Smallest Ricci eigenvalue, known in closed form for catalog kinds.
    pub fn min_ricci(&self) -> Option<f64> {
        match &self.kind {
            BaseKind::RoundSphere { m, radius } => Some((*m as f64 - 1.0) / (radius * radius)),
            BaseKind::Flat { .. } => Some(0.0),
            BaseKind::Product(a, b) => Some(a.min_ricci()?.min(b.min_ricci()?)),
            BaseKind::Chart => None,
        }
    }

    /// `count` seeded points uniformly in the chart box shrunk by [`SAMPLE_MARGIN`].
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let inner = self.chart.domain.shrink(SAMPLE_MARGIN);
        crate::par::map_indexed(count, |i| {
            let mut rng = stream_rng(seed, Stream::BasePoint, i as u64);
            uniform_in_box(&mut rng, &inner.lo, &inner.hi)
        })
    }
}

/// Splits `"(inner)rest"` at the matching parenthesis.
fn split_parenthesised(s: &str) -> Option<(&str, &str)> {
    if !s.starts_with('(') {
        return None;
    }
    let mut depth = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&s[1..i], &s[i + 1..]));
                }
            }
            _ => {}
        }
    }
    None
}

/// Curvature of a Riemannian product: the two blocks, no mixed terms.
pub fn block_sum(a: &Curvature4Tensor, b: &Curvature4Tensor) -> Curvature4Tensor {
    let (da, db) = (a.dim(), b.dim());
    let mut out = Curvature4Tensor::zeros(da + db);
    for i in 0..da {
        for j in 0..da {
            for k in 0..da {
                for l in 0..da {
                    out.set(i, j, k, l, a.get(i, j, k, l));
                }
            }
        }
    }
    for i in 0..db {
        for j in 0..db {
            for k in 0..db {
                for l in 0..db {
                    out.set(da + i, da + j, da + k, da + l, b.get(i, j, k, l));
                }
            }
        }
    }
    out
}

/// Frame, coframe, curvature and Ricci at `point`.
pub fn base_sample(geometry: &BaseGeometry, point: &[f64]) -> Result<BaseCurvatureSample> {
    base_sample_with(geometry, point, &FdScheme::default())
}

/// As [`base_sample`], with an explicit scheme for non-catalog charts.
pub fn base_sample_with(
    geometry: &BaseGeometry,
    point: &[f64],
    scheme: &FdScheme,
) -> Result<BaseCurvatureSample> {
    if point.len() != geometry.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: geometry.dim(),
            got: point.len(),
        });
    }
    geometry.chart.domain.check_interior(point, 0.0)?;
    let g = geometry.chart.metric_at(point);
    let frame = orthonormal_frame(&g)?;
    let coframe = frame
        .clone()
        .try_inverse()
        .ok_or(GeomError::IllConditioned { min_eig: 0.0 })?;
    let curvature = match geometry.closed_form(point) {
        Some(k) => k,
        None => chart_curvature_oracle(&geometry.chart, point, scheme)?,
    };
    let ricci = curvature.ricci();
    Ok(BaseCurvatureSample {
        point: point.to_vec(),
        frame,
        coframe,
        curvature,
        ricci,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_ids() {
        assert_eq!(BaseGeometry::parse("flat:3").unwrap().dim(), 3);
        assert_eq!(BaseGeometry::parse("s:2:1.5").unwrap().dim(), 2);
        let p = BaseGeometry::parse("prod:(s:2:1)x(prod:(flat:1)x(flat:2))").unwrap();
        assert_eq!(p.dim(), 5);
        for bad in [
            "flat:0",
            "s:2",
            "prod:(flat:1)(flat:1)",
            "torus:2",
            "s:2:-1",
        ] {
            assert!(BaseGeometry::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flat_sample_is_zero() {
        let s = base_sample(&BaseGeometry::flat(2), &[0.3, -0.2]).unwrap();
        assert_eq!(s.curvature.max_abs(), 0.0);
        assert_eq!(crate::tensor::max_abs(&s.ricci), 0.0);
    }

    #[test]
    fn unit_two_sphere_sample() {
        let s = base_sample(&BaseGeometry::round_sphere(2, 1.0).unwrap(), &[1.0, 0.5]).unwrap();
        assert_eq!(s.curvature.get(0, 1, 0, 1), 1.0);
        assert!((&s.ricci - DMatrix::identity(2, 2)).abs().max() < 1e-15);
    }

    #[test]
    fn frame_is_orthonormal() {
        let geo = BaseGeometry::round_sphere(3, 2.0).unwrap();
        let x = [0.7, 1.9, -0.4];
        let s = base_sample(&geo, &x).unwrap();
        let g = geo.chart.metric_at(&x);
        let id = s.frame.transpose() * g * &s.frame;
        assert!((id - DMatrix::identity(3, 3)).abs().max() < 1e-10);
        assert!(
            (&s.coframe * &s.frame - DMatrix::identity(3, 3))
                .abs()
                .max()
                < 1e-12
        );
    }

    #[test]
    fn three_sphere_radius_two_matches_oracle() {
        let geo = BaseGeometry::round_sphere(3, 2.0).unwrap();
        let x = [0.9, 1.3, 0.6];
        let s = base_sample(&geo, &x).unwrap();
        let oracle = chart_curvature_oracle(&geo.chart, &x, &FdScheme::default()).unwrap();
        assert!(s.curvature.max_abs_diff(&oracle) < 1e-6);
        assert!((&s.ricci - DMatrix::identity(3, 3) * 0.5).abs().max() < 1e-14);
    }

    #[test]
    fn product_mixed_components_vanish_in_oracle() {
        let geo = BaseGeometry::parse("prod:(s:1:1)x(flat:1)").unwrap();
        let k = chart_curvature_oracle(&geo.chart, &[0.4, 0.1], &FdScheme::default()).unwrap();
        assert!(k.max_abs() < 1e-6);
    }

    #[test]
    fn raw_chart_uses_oracle() {
        let sphere = BaseGeometry::round_sphere(2, 1.0).unwrap();
        let raw = BaseGeometry::from_chart(sphere.chart.clone(), "custom");
        let s = base_sample(&raw, &[1.2, 0.3]).unwrap();
        assert!((s.curvature.get(0, 1, 0, 1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn outside_point_rejected() {
        let r = base_sample(&BaseGeometry::flat(2), &[1.5, 0.0]);
        assert!(matches!(r, Err(GeomError::OutOfChart { .. })));
    }

    #[test]
    fn min_ricci_closed_forms() {
        assert_eq!(BaseGeometry::parse("s:3:2").unwrap().min_ricci(), Some(0.5));
        assert_eq!(BaseGeometry::flat(2).min_ricci(), Some(0.0));
    }
}
