//! Property tests for the structural invariants of the geometry layers.

use bcl_core::bundle::{
    adapted_frame, sphere_shape_spectrum, total_curvature, twist_coefficients, BundleSpec,
    FiberPoint,
};
use bcl_core::munzner::{annulus_points, MunznerPolynomial};
use bcl_core::tensor::{fd_derive, sample_sphere, Curvature4Tensor, FdScheme};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn catalog() -> Vec<BundleSpec> {
    bcl_core::bundle::catalog_ids()
        .into_iter()
        .map(|id| BundleSpec::parse(id).unwrap())
        .collect()
}

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.into_iter().map(|a| a / n).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbed_entry_is_rejected(a in 0usize..4, b in 0usize..4, c in 0usize..4, d in 0usize..4) {
        let mut k = Curvature4Tensor::constant_curvature(4, 1.0);
        let v = k.get(a, b, c, d);
        k.set(a, b, c, d, v + 1e-4);
        prop_assert!(k.validate(1e-6).is_err());
    }

    #[test]
    fn cubic_second_derivative_exact_at_coarse_step(c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, c3 in -2.0f64..2.0, x in -1.0f64..1.0) {
        let f = |p: &[f64]| c0 + c1 * p[0] + c2 * p[0] * p[0] + c3 * p[0].powi(3);
        // second differences lose about eps |f| / h^2 to rounding, so h = 1e-3
        let scheme = FdScheme::with_h(1e-3).unwrap();
        let d2 = fd_derive(f, &[x], &[1.0], 2, &scheme, None).unwrap();
        prop_assert!((d2 - (2.0 * c2 + 6.0 * c3 * x)).abs() < 1e-8);
    }

    #[test]
    fn twist_is_linear(lambda in -3.0f64..3.0, v in prop::collection::vec(-2.0f64..2.0, 3), s in -4.0f64..4.0) {
        let spec = BundleSpec::twisted(lambda);
        let curv = (spec.curv)(&[0.0, 0.0]);
        let a = twist_coefficients(&curv, &v);
        let sv: Vec<f64> = v.iter().map(|x| x * s).collect();
        let b = twist_coefficients(&curv, &sv);
        for i in 0..2 {
            for j in 0..2 {
                for al in 0..3 {
                    prop_assert!((b.get(i, j, al) - s * a.get(i, j, al)).abs() < 1e-14);
                    prop_assert!((a.get(i, j, al) + a.get(j, i, al)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn total_curvature_symmetries(idx in 0usize..5, seed in 0u64..1000, v in prop::collection::vec(-2.0f64..2.0, 3)) {
        let spec = catalog().remove(idx);
        let x = spec.sample_base_points(1, seed).remove(0);
        let fp = FiberPoint::at(&spec, &x, &v[..spec.rank.min(3)].iter().copied().chain(std::iter::repeat(0.5)).take(spec.rank).collect::<Vec<_>>()).unwrap();
        let t = total_curvature(&spec, &fp).unwrap();
        prop_assert!(t.theta.symmetry_defect() < 1e-10);
        prop_assert!(t.theta.bianchi_defect() < 1e-10);
        let (m, n) = (spec.base_dim(), spec.rank);
        for i in 0..m + n {
            for a in m..m + n {
                for b in m..m + n {
                    for c in m..m + n {
                        prop_assert_eq!(t.theta.get(i, a, b, c), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn flat_feeds_reduce_to_base(seed in 0u64..1000, v in prop::collection::vec(-2.0f64..2.0, 3)) {
        let spec = BundleSpec::trivial_over_s2(3);
        let x = spec.sample_base_points(1, seed).remove(0);
        let fp = FiberPoint::at(&spec, &x, &v).unwrap();
        let t = total_curvature(&spec, &fp).unwrap();
        let padded = bcl_core::base::block_sum(&fp.base.curvature, &Curvature4Tensor::zeros(3));
        prop_assert_eq!(t.theta, padded);
    }

    #[test]
    fn adapted_frame_orthogonal(u in prop::collection::vec(-1.0f64..1.0, 4)) {
        if let Some(u) = unit(u) {
            let p = adapted_frame(&u).unwrap().p;
            prop_assert!((&p * p.transpose() - DMatrix::identity(4, 4)).abs().max() < 1e-12);
            for k in 0..4 {
                prop_assert!((p[(3, k)] - u[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_spectrum_constant_over_points(idx in 0usize..5, seed in 0u64..1000, r in 0.05f64..2.5) {
        let spec = catalog().remove(idx);
        let xs = spec.sample_base_points(2, seed);
        let dirs = sample_sphere(spec.rank, 2, seed);
        let a = sphere_shape_spectrum(&spec, &FiberPoint::on_sphere(&spec, &xs[0], &dirs[0], r).unwrap()).unwrap();
        let b = sphere_shape_spectrum(&spec, &FiberPoint::on_sphere(&spec, &xs[1], &dirs[1], r).unwrap()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.dimension(), spec.base_dim() + spec.rank - 1);
    }

    #[test]
    fn polynomial_homogeneity(idx in 0usize..4, seed in 0u64..1000) {
        let id = ["linear:2", "quad:2:3", "fkm:1:4", "fkm:2:4"][idx];
        let poly = MunznerPolynomial::parse(id).unwrap();
        let pts = annulus_points(poly.ambient, 5, seed);
        prop_assert!(poly.homogeneity_defect(&pts, &[0.5, 1.3, 2.0]) < 1e-10);
    }
}

#[test]
fn sampling_is_reproducible() {
    assert_eq!(sample_sphere(5, 100, 3), sample_sphere(5, 100, 3));
    assert_ne!(sample_sphere(5, 100, 3), sample_sphere(5, 100, 4));
}
