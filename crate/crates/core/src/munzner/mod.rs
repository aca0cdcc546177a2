//! Cartan-Munzner polynomials and the geometry of their level sets in the
//! unit sphere: regular levels with `g` distinct principal curvatures and the
//! two focal submanifolds.

mod clifford;
mod focal;
mod level;
mod poly;

pub use clifford::{clifford_build, CliffordSystem};
pub use focal::{
    fkm_plus_intrinsic_ricci, fkm_plus_shape_operator, focal_minimality, focal_ricci, focal_sample,
    focal_shape_operator, focal_shape_spectrum, normal_from_coefficients, sample_normals,
    FocalPoint, FocalRicci, FocalSign, FOCAL_NORMAL, FOCAL_RESIDUAL, MAX_ASCENT_ITERATIONS,
};
pub use level::{
    curvature_angles, expected_level_curvatures, expected_mean_curvature, first_angle,
    level_point_at, level_shape_operator, level_shape_spectrum, minimal_level_locate,
    numerical_mean_curvature, sphere_gradient, LevelPoint, LevelSpectrumSummary, LEVEL_NORMAL,
};
pub use poly::{
    annulus_points, make_polynomial, munzner_residuals, Family, MunznerPolynomial, PdeResiduals,
    CERTIFICATION_SAMPLES, CERTIFICATION_SEED, CERTIFICATION_TOL,
};
