//! Closed-form pipelines against the coordinate finite-difference oracle.

use bcl_core::base::{base_sample, chart_curvature_oracle, BaseGeometry};
use bcl_core::bundle::oracle::{
    fiber_point_of, sample_sphere_chart, sphere_ricci_oracle, total_curvature_oracle,
};
use bcl_core::bundle::{
    check_connection_consistency, sample_fiber_points, sphere_ricci, total_curvature, BundleSpec,
    FiberPoint,
};
use bcl_core::double::{extend_bundle, gluing_leaf_ricci, inner_sphere_ricci, DoublePoint};
use bcl_core::tensor::{sample_sphere, FdScheme};

#[test]
fn catalog_bases_match_oracle_on_100_points() {
    let scheme = FdScheme::default();
    for id in ["flat:2", "s:2:1", "s:3:2", "prod:(s:2:1)x(flat:1)"] {
        let geo = BaseGeometry::parse(id).unwrap();
        for x in geo.sample_points(100, 11) {
            let closed = base_sample(&geo, &x).unwrap().curvature;
            let fd = chart_curvature_oracle(&geo.chart, &x, &scheme).unwrap();
            let diff = closed.max_abs_diff(&fd);
            assert!(diff < 1e-6, "{id} at {x:?}: {diff}");
        }
    }
}

#[test]
fn total_curvature_matches_oracle_on_catalog() {
    let scheme = FdScheme::default();
    for id in [
        "flat:2:2",
        "trivial:s2:3",
        "twisted:1",
        "twisted:-0.6",
        "ts2",
    ] {
        let spec = BundleSpec::parse(id).unwrap();
        for fp in sample_fiber_points(&spec, 10, 1.5, 5).unwrap() {
            let closed = total_curvature(&spec, &fp).unwrap().theta;
            let fd = total_curvature_oracle(&spec, &fp.base.point, &fp.v, &scheme).unwrap();
            assert!(closed.max_abs_diff(&fd) < 1e-5, "{id}");
        }
    }
}

#[test]
fn connection_forms_reproduce_declared_curvature() {
    for id in ["ts2", "twisted:2.5"] {
        let spec = BundleSpec::parse(id).unwrap();
        let pts = spec.sample_base_points(20, 2);
        assert!(check_connection_consistency(&spec, &pts, &FdScheme::default()).unwrap() < 1e-6);
    }
}

#[test]
fn sphere_ricci_matches_induced_metric() {
    let scheme = FdScheme::default();
    for (id, r) in [("ts2", 0.3), ("twisted:1", 0.1), ("twisted:1", 1.0)] {
        let spec = BundleSpec::parse(id).unwrap();
        for q in sample_sphere_chart(&spec, 5, 8) {
            let fp = fiber_point_of(&spec, r, &q).unwrap();
            let closed = sphere_ricci(&spec, &fp).unwrap();
            let fd = sphere_ricci_oracle(&spec, r, &q, &scheme).unwrap();
            let diff = (closed - fd).abs().max();
            assert!(diff < 1e-5, "{id} r={r}: {diff}");
        }
    }
}

#[test]
fn fiber_ricci_blow_up_rate() {
    let r = 1e-3;
    for id in ["twisted:1", "ts2", "trivial:s2:3"] {
        let spec = BundleSpec::parse(id).unwrap();
        let xs = spec.sample_base_points(10, 4);
        let dirs = sample_sphere(spec.rank, 10, 4);
        for (x, u) in xs.iter().zip(&dirs) {
            let fp = FiberPoint::on_sphere(&spec, x, u, r).unwrap();
            let ric = sphere_ricci(&spec, &fp).unwrap();
            let m = spec.base_dim();
            for a in m..ric.nrows() {
                assert!((r * r * ric[(a, a)] - (spec.rank as f64 - 2.0)).abs() < 1e-3);
            }
        }
    }
}

#[test]
fn gluing_leaf_agrees_with_sphere_bundle() {
    for id in ["ts2", "twisted:1", "trivial:s2:3"] {
        let ext = extend_bundle(&BundleSpec::parse(id).unwrap());
        let n = ext.inner_rank();
        let xs = ext.spec.sample_base_points(5, 6);
        let dirs = sample_sphere(n, 5, 6);
        for (x, u) in xs.iter().zip(&dirs) {
            let mut v = u.clone();
            v.push(0.0);
            let dp = DoublePoint::new(&ext, x, &v, 0.4).unwrap();
            let leaf = gluing_leaf_ricci(&ext, &dp).unwrap();
            let inner = inner_sphere_ricci(&ext, &dp).unwrap();
            assert!((leaf - inner).abs().max() < 1e-10, "{id}");
        }
    }
}
