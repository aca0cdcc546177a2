//! Acceptance suite. Run with
//! `cargo test --offline -p bcl --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use bcl::strip_wall_time;
use bcl_core::bundle::oracle::{sphere_shape_oracle, total_curvature_oracle};
use bcl_core::bundle::{
    catalog_ids, positivity_scan, sample_fiber_points, sphere_ricci, sphere_shape_spectrum,
    total_curvature, transnormal_check, BundleSpec, FiberPoint, ScanOptions,
};
use bcl_core::double::{
    gradient_law_check, laplacian_profile, level_shape_spectrum, ExtendedBundle,
};
use bcl_core::munzner::{
    fkm_plus_intrinsic_ricci, focal_minimality, focal_ricci, focal_sample, focal_shape_operator,
    level_point_at, level_shape_spectrum as munzner_level_spectrum, munzner_residuals,
    sample_normals, FocalSign, MunznerPolynomial,
};
use bcl_core::tensor::{sample_sphere, sym_eigen, FdScheme};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn munzner_pde() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for id in [
        "linear:2", "quad:2:2", "quad:3:3", "quad:2:4", "fkm:1:4", "fkm:2:8",
    ] {
        let poly = MunznerPolynomial::parse(id).unwrap();
        let res = munzner_residuals(&poly, 1000, 42);
        worst = worst.max(res.gradient).max(res.laplacian);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-9 && secs < 30.0,
        format!("max residual {worst:.3e} (< 1e-9), {secs:.2} s (< 30 s)"),
    )
}

/// `arccot` in `(0, pi)`.
fn arccot(k: f64) -> f64 {
    let t = (1.0 / k).atan();
    if t < 0.0 {
        t + PI
    } else {
        t
    }
}

fn level_spectrum_law() -> Outcome {
    let poly = MunznerPolynomial::parse("fkm:1:4").unwrap();
    let mut spacing = 0.0_f64;
    let mut bad_mults = 0;
    for k in 0..9 {
        let c = -0.9 + 0.225 * k as f64;
        for i in 0..50 {
            let lp = level_point_at(&poly, c, 100 + k, i).unwrap();
            let s = munzner_level_spectrum(&poly, &lp).unwrap();
            let mut pairs: Vec<(f64, usize)> = s
                .clusters
                .iter()
                .map(|cl| (arccot(cl.value), cl.multiplicity))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs.iter().map(|p| p.1).collect::<Vec<_>>() != vec![1, 2, 1, 2] {
                bad_mults += 1;
                continue;
            }
            for w in pairs.windows(2) {
                spacing = spacing.max((w[1].0 - w[0].0 - PI / 4.0).abs());
            }
        }
    }
    let mut quad = 0.0_f64;
    for id in ["quad:2:2", "quad:3:3", "quad:2:4"] {
        let poly = MunznerPolynomial::parse(id).unwrap();
        for k in 0..9 {
            let c = -0.9 + 0.225 * k as f64;
            let theta = c.acos() / 2.0;
            let mut expected = vec![1.0 / theta.tan(); poly.m1];
            expected.extend(vec![-theta.tan(); poly.m2]);
            expected.sort_by(f64::total_cmp);
            for i in 0..10 {
                let lp = level_point_at(&poly, c, 200 + k, i).unwrap();
                let got = munzner_level_spectrum(&poly, &lp).unwrap().eigenvalues();
                for (a, b) in got.iter().zip(&expected) {
                    quad = quad.max((a - b).abs());
                }
            }
        }
    }
    outcome(
        spacing < 1e-6 && bad_mults == 0 && quad < 1e-8,
        format!(
            "fkm(1,4) spacing deviation {spacing:.3e} (< 1e-6), {bad_mults} multiplicity mismatches; \
             quad {{cot, -tan}} deviation {quad:.3e} (< 1e-8)"
        ),
    )
}

fn sphere_bundle_spectrum() -> Outcome {
    let mut exact = 0.0_f64;
    let mut mult_ok = true;
    for id in catalog_ids() {
        let spec = BundleSpec::parse(id).unwrap();
        let (m, n) = (spec.base_dim(), spec.rank);
        let xs = spec.sample_base_points(20, 3);
        let dirs = sample_sphere(n, 20, 3);
        for r in [0.1, 1.0, 2.0] {
            for (x, u) in xs.iter().zip(&dirs) {
                let fp = FiberPoint::on_sphere(&spec, x, u, r).unwrap();
                let s = sphere_shape_spectrum(&spec, &fp).unwrap();
                let mut expected = vec![-1.0 / r; n - 1];
                expected.extend(vec![0.0; m]);
                let got = s.eigenvalues();
                mult_ok &= got.len() == expected.len();
                for (a, b) in got.iter().zip(&expected) {
                    exact = exact.max((a - b).abs());
                }
            }
        }
    }
    let scheme = FdScheme::default();
    let mut fd = 0.0_f64;
    for id in ["twisted:1", "ts2"] {
        let spec = BundleSpec::parse(id).unwrap();
        let (m, n) = (spec.base_dim(), spec.rank);
        let xs = spec.sample_base_points(10, 9);
        let dirs = sample_sphere(n, 10, 9);
        for r in [0.1, 1.0, 2.0] {
            let mut expected = vec![-1.0 / r; n - 1];
            expected.extend(vec![0.0; m]);
            for (x, u) in xs.iter().zip(&dirs) {
                let v: Vec<f64> = u.iter().map(|a| a * r).collect();
                let mut k = sphere_shape_oracle(&spec, x, &v, &scheme).unwrap();
                k.sort_by(f64::total_cmp);
                for (a, b) in k.iter().zip(&expected) {
                    fd = fd.max((a - b).abs());
                }
            }
        }
    }
    outcome(
        exact <= 1e-14 && mult_ok && fd < 1e-5,
        format!(
            "algebraic deviation {exact:.3e} (<= 1e-14) with multiplicities (m, n-1); \
             FD oracle deviation {fd:.3e} (< 1e-5)"
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let scheme = FdScheme::default();
    let mut worst = 0.0_f64;
    let mut flat = 0.0_f64;
    for id in ["flat:2:2", "trivial:s2:3", "twisted:1", "ts2"] {
        let spec = BundleSpec::parse(id).unwrap();
        for fp in sample_fiber_points(&spec, 50, 1.5, 17).unwrap() {
            let closed = total_curvature(&spec, &fp).unwrap().theta;
            let oracle = total_curvature_oracle(&spec, &fp.base.point, &fp.v, &scheme).unwrap();
            worst = worst.max(closed.max_abs_diff(&oracle));
            if id.starts_with("flat") {
                flat = flat.max(closed.max_abs());
            }
        }
    }
    outcome(
        worst < 1e-5 && flat == 0.0,
        format!("max discrepancy {worst:.3e} (< 1e-5); flat max |Theta| = {flat:e}"),
    )
}

fn ricci_anchors() -> Outcome {
    let mut flat_dev = 0.0_f64;
    for (id, r) in [("flat:2:2", 0.3), ("flat:2:3", 0.7), ("flat:2:3", 1.9)] {
        let spec = BundleSpec::parse(id).unwrap();
        let (m, n) = (spec.base_dim(), spec.rank);
        let xs = spec.sample_base_points(5, 1);
        let dirs = sample_sphere(n, 5, 1);
        for (x, u) in xs.iter().zip(&dirs) {
            let ric = sphere_ricci(&spec, &FiberPoint::on_sphere(&spec, x, u, r).unwrap()).unwrap();
            for i in 0..ric.nrows() {
                for j in 0..ric.ncols() {
                    let want = if i == j && i >= m {
                        (n as f64 - 2.0) / (r * r)
                    } else {
                        0.0
                    };
                    flat_dev = flat_dev.max((ric[(i, j)] - want).abs());
                }
            }
        }
    }
    let spec = BundleSpec::parse("trivial:s2:3").unwrap();
    let mut s2_dev = 0.0_f64;
    let xs = spec.sample_base_points(5, 2);
    let dirs = sample_sphere(3, 5, 2);
    for (x, u) in xs.iter().zip(&dirs) {
        let ric = sphere_ricci(&spec, &FiberPoint::on_sphere(&spec, x, u, 0.5).unwrap()).unwrap();
        let want = [1.0, 1.0, 4.0, 4.0];
        for i in 0..4 {
            for j in 0..4 {
                let w = if i == j { want[i] } else { 0.0 };
                s2_dev = s2_dev.max((ric[(i, j)] - w).abs());
            }
        }
    }
    let grid: Vec<f64> = (0..40).map(|k| 0.05 + 0.05 * k as f64).collect();
    let opts = ScanOptions::default();
    let s2 = positivity_scan(&spec, &grid, &opts).unwrap();
    let s2_min = s2.min_ricci.iter().copied().fold(f64::INFINITY, f64::min);
    let flat = positivity_scan(&BundleSpec::parse("flat:2:2").unwrap(), &grid, &opts).unwrap();
    let flat_max = flat.min_ricci.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    outcome(
        flat_dev <= 1e-12 && s2_dev <= 1e-12 && s2_min > 0.0 && flat_max <= 1e-12,
        format!(
            "flat anchor {flat_dev:.3e}, S^2 anchor {s2_dev:.3e} (<= 1e-12); \
             trivial:s2:3 min Ricci {s2_min:.4} (> 0 on all 40 radii); flat n = 2 max |min Ricci| {flat_max:.3e}"
        ),
    )
}

fn double_laws() -> Outcome {
    let scheme = FdScheme::default();
    let mut grad = 0.0_f64;
    let mut leaf = 0.0_f64;
    let mut spread = 0.0_f64;
    let mut profile = 0.0_f64;
    for id in ["flat:2:2+1", "twisted:1+1"] {
        let ext = ExtendedBundle::parse(id).unwrap();
        for r0 in [0.5, 1.0] {
            grad = grad.max(
                gradient_law_check(&ext, r0, 200, 21, &scheme)
                    .unwrap()
                    .max_residual,
            );
            for k in level_shape_spectrum(&ext, r0, 0.0).unwrap().eigenvalues() {
                leaf = leaf.max(k.abs());
            }
            let levels: Vec<f64> = (0..9).map(|k| r0 * (-0.8 + 0.2 * k as f64)).collect();
            for l in laplacian_profile(&ext, r0, &levels, 20, 22, &scheme).unwrap() {
                spread = spread.max(l.spread);
                if id.starts_with("flat") {
                    profile = profile.max((l.mean + 2.0 * l.c / (r0 * r0)).abs());
                }
            }
        }
    }
    outcome(
        grad < 1e-7 && leaf == 0.0 && spread < 1e-5 && profile < 1e-5,
        format!(
            "gradient law {grad:.3e} (< 1e-7); gluing leaf max |k| = {leaf:e}; \
             Laplacian spread {spread:.3e} (< 1e-5); flat profile vs -2f/r0^2 {profile:.3e} (< 1e-5)"
        ),
    )
}

fn focal_geometry() -> Outcome {
    let mut values = 0.0_f64;
    let mut minimal = 0.0_f64;
    let mut ricci_margin = f64::INFINITY;
    for id in ["fkm:1:4", "fkm:2:8"] {
        let poly = MunznerPolynomial::parse(id).unwrap();
        for sign in [FocalSign::Plus, FocalSign::Minus] {
            for i in 0..10 {
                let fp = focal_sample(&poly, sign, 31, i).unwrap();
                for eta in sample_normals(&fp, 20, 32 + i) {
                    let a = focal_shape_operator(&poly, &fp, &eta).unwrap();
                    for k in sym_eigen(&a).unwrap().eigenvalues.iter() {
                        let d = [1.0, -1.0, 0.0]
                            .iter()
                            .map(|v| (k - v).abs())
                            .fold(f64::INFINITY, f64::min);
                        values = values.max(d);
                    }
                }
                minimal = minimal.max(focal_minimality(&poly, &fp).unwrap());
                if sign == FocalSign::Plus {
                    let ric = focal_ricci(&poly, &fp).unwrap();
                    let bound = 2.0 * (poly.m2 as f64 - 1.0);
                    ricci_margin = ricci_margin.min(ric.min_eigenvalue - bound);
                }
            }
        }
    }
    let poly = MunznerPolynomial::parse("fkm:1:4").unwrap();
    let mut intrinsic = 0.0_f64;
    for i in 0..3 {
        let fp = focal_sample(&poly, FocalSign::Plus, 33, i).unwrap();
        let fd = fkm_plus_intrinsic_ricci(&poly, &fp, &FdScheme::default()).unwrap();
        let gauss = focal_ricci(&poly, &fp).unwrap().ricci;
        intrinsic = intrinsic.max((fd - gauss).abs().max());
    }
    outcome(
        values < 1e-6 && minimal < 1e-6 && ricci_margin >= -1e-6 && intrinsic < 1e-4,
        format!(
            "value set {{1, -1, 0}} deviation {values:.3e}; mean curvature {minimal:.3e} (< 1e-6); \
             min Ricci - 2(m2-1) = {ricci_margin:.3e} (>= -1e-6); intrinsic vs Gauss {intrinsic:.3e} (< 1e-4)"
        ),
    )
}

fn transnormality() -> Outcome {
    let scheme = FdScheme::default();
    let mut worst = 0.0_f64;
    let mut ids = Vec::new();
    for id in catalog_ids() {
        let spec = BundleSpec::parse(id).unwrap();
        if spec.connection.is_none() {
            continue;
        }
        worst = worst.max(
            transnormal_check(&spec, 200, 8, &scheme)
                .unwrap()
                .max_residual,
        );
        ids.push(id);
    }
    outcome(
        worst < 1e-7 && ids.len() == catalog_ids().len(),
        format!("max residual {worst:.3e} (< 1e-7) over {}", ids.join(", ")),
    )
}

fn cli_report(args: &[&str], threads: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let run = Command::new(env!("CARGO_BIN_EXE_bcl"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .env("BCL_THREADS", threads)
        .output()
        .unwrap();
    assert!(
        run.status.code().is_some_and(|c| c <= 1),
        "{args:?}: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    // the output path differs between runs; compare everything else
    let mut v: serde_json::Value = serde_json::from_str(&strip_wall_time(&text).unwrap()).unwrap();
    v["config"]["out"] = serde_json::Value::Null;
    v.to_string()
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 8] = [
        &[
            "verify",
            "munzner",
            "--family",
            "fkm:2:8",
            "--samples",
            "300",
        ],
        &[
            "verify",
            "double",
            "--bundle",
            "twisted:1+1",
            "--samples",
            "20",
            "--r0",
            "0.5",
        ],
        &[
            "verify",
            "transnormal",
            "--bundle",
            "ts2",
            "--samples",
            "40",
        ],
        &[
            "scan",
            "ricci",
            "--bundle",
            "twisted:1",
            "--r",
            "0.1:1.5:6",
            "--samples",
            "8",
        ],
        &[
            "scan",
            "scalar",
            "--bundle",
            "ts2",
            "--r",
            "0.2,0.9",
            "--samples",
            "8",
        ],
        &[
            "spectrum",
            "level",
            "--family",
            "fkm:1:4",
            "--samples",
            "10",
            "--levels",
            "3",
        ],
        &[
            "spectrum",
            "focal",
            "--family",
            "fkm:1:4",
            "--samples",
            "3",
            "--directions",
            "5",
        ],
        &[
            "compare",
            "oracle",
            "--bundle",
            "twisted:1.0",
            "--samples",
            "8",
            "--seed",
            "7",
        ],
    ];
    let mut differing = Vec::new();
    for args in commands {
        let a = cli_report(args, "1");
        let b = cli_report(args, "1");
        let c = cli_report(args, "3");
        if a != b || a != c {
            differing.push(args[..2].join(" "));
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} commands rerun with BCL_THREADS = 1, 1, 3; differing: [{}]",
            commands.len(),
            differing.join(", ")
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance_suite() {
    let criteria: [Criterion; 9] = [
        ("munzner PDE certification", munzner_pde),
        ("level spectrum law", level_spectrum_law),
        ("sphere-bundle principal curvatures", sphere_bundle_spectrum),
        ("total-space curvature vs oracle", oracle_equivalence),
        ("Ricci product anchors and scan", ricci_anchors),
        ("double-manifold laws", double_laws),
        ("focal geometry", focal_geometry),
        ("transnormality on E", transnormality),
        ("CLI determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} [{}] {name}: {} ({:.1} s)",
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
