use std::f64::consts::PI;
use std::time::Instant;

use bcl_core::base::BaseKind;
use bcl_core::bundle::oracle::{sphere_shape_oracle, total_curvature_oracle};
use bcl_core::bundle::{
    check_connection_consistency, positivity_scan, sample_fiber_points, sphere_shape_spectrum,
    total_curvature, transnormal_check, BundleSpec, FiberPoint, ScanOptions,
};
use bcl_core::double::{
    default_levels, default_r0, gluing_leaf_ricci, gradient_law_check, inner_sphere_ricci,
    laplacian_profile, level_shape_oracle, level_shape_spectrum, sample_double_chart, DoublePoint,
    ExtendedBundle, LEVEL_NORMAL as DOUBLE_LEVEL_NORMAL,
};
use bcl_core::munzner::{
    curvature_angles, expected_level_curvatures, expected_mean_curvature, fkm_plus_intrinsic_ricci,
    fkm_plus_shape_operator, focal_minimality, focal_ricci, focal_sample, focal_shape_operator,
    level_point_at, level_shape_spectrum as munzner_level_spectrum, minimal_level_locate,
    munzner_residuals, sample_normals, FocalPoint, FocalSign, MunznerPolynomial,
};
use bcl_core::par;
use bcl_core::tensor::{sample_sphere, sym_eigen, FdScheme, ShapeSpectrum};
use bcl_core::{GeomError, Result as GeomResult};

use crate::config::{Command, Format, RunConfig};
use crate::error::{is_usage_error, lift, CliError};
use crate::report::{emit_plotdata, write_atomic, Check, Report, ScanData};

/// Tolerance of checks whose measurement is a finite-difference estimate of a
/// second derivative of the metric or of a function on a chart.
pub const FD_TOL: f64 = 1e-5;
/// The intrinsic Ricci estimate differentiates a Newton-projected chart twice.
pub const INTRINSIC_TOL: f64 = 1e-4;
/// Closed forms that should agree to rounding.
pub const ROUNDING_TOL: f64 = 1e-10;

type Checks = Vec<Check>;

/// Turns a measurement into a check. Errors caused by the request abort the
/// run; numerical failures become failing records.
fn checked(
    name: &str,
    anchor: &str,
    m: GeomResult<f64>,
    judge: impl FnOnce(&str, &str, f64) -> Check,
) -> Result<Check, CliError> {
    match m {
        Ok(v) => Ok(judge(name, anchor, v)),
        Err(e) if is_usage_error(&e) => Err(lift(e)),
        Err(e) => Ok(Check::failed(name, anchor, e.to_string())),
    }
}

fn below(tol: f64) -> impl FnOnce(&str, &str, f64) -> Check {
    move |n, a, v| Check::below(n, a, v, tol)
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().map(f64::abs).collect();
    par::max_of(&v).max(0.0)
}

fn scheme(cfg: &RunConfig) -> Result<FdScheme, CliError> {
    FdScheme::with_h(cfg.h).map_err(|e| CliError::bad_config("h", e.to_string()))
}

/// Executes the command of `config`. The returned report echoes the config
/// with defaults that depend on the example (such as `r0`) filled in.
pub fn run(config: RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let start = Instant::now();
    let mut config = config;
    let (checks, scan) = match config.command {
        Command::VerifyMunzner => (verify_munzner(&config)?, None),
        Command::VerifyDouble => (verify_double(&mut config)?, None),
        Command::VerifyTransnormal => (verify_transnormal(&config)?, None),
        Command::ScanRicci | Command::ScanScalar => {
            let (c, s) = scan(&config)?;
            (c, Some(s))
        }
        Command::SpectrumLevel => (spectrum_level(&config)?, None),
        Command::SpectrumFocal => (spectrum_focal(&config)?, None),
        Command::SpectrumSphereBundle => (spectrum_sphere_bundle(&config)?, None),
        Command::CompareOracle => (compare_oracle(&config)?, None),
    };
    Ok(Report::new(
        config,
        checks,
        scan,
        start.elapsed().as_secs_f64(),
    ))
}

/// Report body in the configured format.
pub fn render(report: &Report) -> Result<String, CliError> {
    match report.config.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    }
}

/// Writes the report (and plot data, if requested) to their files; returns
/// the body when no output file is configured.
pub fn emit(report: &Report) -> Result<Option<String>, CliError> {
    let body = render(report)?;
    if let Some(plot) = &report.config.plot {
        write_atomic(plot, &emit_plotdata(report)?)?;
    }
    match &report.config.out {
        Some(path) => {
            write_atomic(path, &body)?;
            Ok(None)
        }
        None => Ok(Some(body)),
    }
}

fn parse_bundle(id: &str) -> Result<BundleSpec, CliError> {
    BundleSpec::parse(id).map_err(lift)
}

fn parse_family(id: &str) -> Result<MunznerPolynomial, CliError> {
    MunznerPolynomial::parse(id).map_err(lift)
}

fn verify_munzner(cfg: &RunConfig) -> Result<Checks, CliError> {
    let poly = parse_family(&cfg.target)?;
    let res = munzner_residuals(&poly, cfg.samples, cfg.seed);
    Ok(vec![
        Check::below(
            "gradient_residual",
            "|grad F|^2 = g^2 r^(2g-2)",
            res.gradient,
            cfg.tol,
        ),
        Check::below(
            "laplacian_residual",
            "Lap F = (m2 - m1)/2 g^2 r^(g-2)",
            res.laplacian,
            cfg.tol,
        ),
        Check::info("degree", "g", poly.degree as f64),
        Check::info("m1", "multiplicity m1, codim M+ = m1 + 1", poly.m1 as f64),
        Check::info("m2", "multiplicity m2, codim M- = m2 + 1", poly.m2 as f64),
    ])
}

fn verify_transnormal(cfg: &RunConfig) -> Result<Checks, CliError> {
    let spec = parse_bundle(&cfg.target)?;
    let scheme = scheme(cfg)?;
    let m = transnormal_check(&spec, cfg.samples, cfg.seed, &scheme).map(|r| r.max_residual);
    Ok(vec![checked(
        "transnormal_residual",
        "|grad f|^2 = 4 f for f = |v|^2",
        m,
        below(cfg.tol),
    )?])
}

fn verify_double(cfg: &mut RunConfig) -> Result<Checks, CliError> {
    let ext = ExtendedBundle::parse(&cfg.target).map_err(lift)?;
    if ext.inner_rank() < 2 {
        return Err(CliError::bad_config(
            "bundle",
            "the double needs inner rank >= 2",
        ));
    }
    let r0 = match cfg.r0 {
        Some(r0) => r0,
        None => default_r0(&ext),
    };
    cfg.r0 = Some(r0);
    let scheme = scheme(cfg)?;
    let (m, n) = (ext.inner.base_dim(), ext.inner_rank());
    let mut checks = vec![Check::info("r0", "radius of the doubled sphere bundle", r0)];

    let grad = gradient_law_check(&ext, r0, cfg.samples, cfg.seed, &scheme).map(|r| r.max_residual);
    checks.push(checked(
        "gradient_law",
        "|grad f|^2 = 1 - f^2 / r0^2",
        grad,
        below(cfg.tol),
    )?);

    let leaf = level_shape_spectrum(&ext, r0, 0.0).map(|s| max_abs(s.eigenvalues()));
    checks.push(checked(
        "gluing_leaf_shape",
        "level f = 0 is totally geodesic",
        leaf,
        |n, a, v| Check::exact_zero(n, a, v),
    )?);

    let levels = default_levels(r0, cfg.levels);
    let profile = laplacian_profile(&ext, r0, &levels, cfg.samples, cfg.seed, &scheme);
    match profile {
        Ok(p) => {
            checks.push(Check::below(
                "laplacian_spread",
                "Lap f is constant on each level",
                p.iter().map(|l| l.spread).fold(0.0, f64::max),
                FD_TOL,
            ));
            checks.push(Check::below(
                "laplacian_profile",
                "Lap f = -n f / r0^2",
                max_abs(p.iter().map(|l| l.mean - l.expected)),
                FD_TOL,
            ));
        }
        Err(e) if is_usage_error(&e) => return Err(lift(e)),
        Err(e) => {
            checks.push(Check::failed(
                "laplacian_spread",
                "Lap f is constant on each level",
                e.to_string(),
            ));
            checks.push(Check::failed(
                "laplacian_profile",
                "Lap f = -n f / r0^2",
                e.to_string(),
            ));
        }
    }

    // finite-difference principal curvatures of a few points on every level
    let per_level = cfg.samples.min(4);
    let shape: GeomResult<f64> = (|| {
        let mut worst = 0.0_f64;
        for (li, &c) in levels.iter().enumerate() {
            let t = (c / r0).acos();
            let mut expected = level_shape_spectrum(&ext, r0, c)?.eigenvalues();
            expected.sort_by(f64::total_cmp);
            let pts =
                sample_double_chart(&ext, per_level, cfg.seed.wrapping_add(li as u64), Some(t));
            let devs = par::try_map_indexed(per_level, |i| {
                let mut k = level_shape_oracle(&ext, r0, &pts[i], &scheme)?;
                k.sort_by(f64::total_cmp);
                Ok(max_abs(k.iter().zip(&expected).map(|(a, b)| a - b)))
            })?;
            worst = worst.max(par::max_of(&devs));
        }
        Ok(worst)
    })();
    checks.push(
        checked(
            "level_shape_oracle",
            "principal curvatures of f = c: 0 (x m), -cot t / r0 (x n-1)",
            shape,
            below(FD_TOL),
        )?
        .with_note(DOUBLE_LEVEL_NORMAL),
    );

    let xs = ext.spec.sample_base_points(per_level, cfg.seed);
    let dirs = sample_sphere(n, per_level, cfg.seed);
    let glue: GeomResult<f64> = (|| {
        let mut worst = 0.0_f64;
        for (x, u) in xs.iter().zip(&dirs) {
            let mut v = u.clone();
            v.push(0.0);
            let dp = DoublePoint::new(&ext, x, &v, r0)?;
            let d = (gluing_leaf_ricci(&ext, &dp)? - inner_sphere_ricci(&ext, &dp)?)
                .abs()
                .max();
            worst = worst.max(d);
        }
        Ok(worst)
    })();
    checks.push(checked(
        "gluing_leaf_ricci",
        "Ricci of the leaf f = 0 equals Ricci of S_r0(xi)",
        glue,
        below(ROUNDING_TOL),
    )?);
    checks.push(Check::info("base_dim", "m", m as f64));
    checks.push(Check::info("inner_rank", "n", n as f64));
    Ok(checks)
}

fn scan(cfg: &RunConfig) -> Result<(Checks, ScanData), CliError> {
    let spec = parse_bundle(&cfg.target)?;
    let opts = ScanOptions {
        samples: cfg.samples,
        directions: cfg.directions,
        seed: cfg.seed,
    };
    let rep = positivity_scan(&spec, &cfg.r, &opts).map_err(lift)?;
    let nonfinite = rep
        .min_ricci
        .iter()
        .chain(&rep.min_scalar)
        .filter(|v| !v.is_finite())
        .count();
    let mut checks = vec![Check::exact_zero(
        "nonfinite_values",
        "every sampled curvature is finite",
        nonfinite as f64,
    )];
    let positive = rep.min_ricci.iter().filter(|v| **v > 0.0).count();
    match cfg.command {
        Command::ScanScalar => {
            checks.push(Check::info(
                "min_scalar",
                "smallest scalar curvature of S_r over the grid",
                par::min_of(&rep.min_scalar),
            ));
        }
        _ => {
            checks.push(Check::info(
                "min_ricci",
                "smallest Ricci eigenvalue of S_r over the grid",
                par::min_of(&rep.min_ricci),
            ));
            checks.push(Check::info(
                "positive_radii",
                "radii with min Ricci > 0",
                positive as f64,
            ));
        }
    }
    let mut threshold = Check::info(
        "threshold",
        "largest r with Ric(S_s) > 0 for every grid radius s <= r",
        rep.threshold.unwrap_or(f64::NAN),
    );
    if rep.threshold.is_none() {
        threshold = threshold.with_note("min Ricci is not positive at the first radius");
    }
    checks.push(threshold);
    if let Some(b) = spec.base.min_ricci() {
        checks.push(Check::info(
            "base_min_ricci",
            "smallest Ricci eigenvalue of the base",
            b,
        ));
    }
    checks.push(Check::info("rank", "n", spec.rank as f64));
    if rep.curv_deriv_zero {
        checks.push(
            Check::info(
                "curvature_derivative",
                "max |grad R| of the bundle curvature",
                0.0,
            )
            .with_note("derivative feed vanishes; the mixed Ricci block is summed as zero"),
        );
    }
    let data = ScanData {
        r: rep.r_grid,
        min_ricci: rep.min_ricci,
        min_scalar: rep.min_scalar,
        threshold: rep.threshold,
        samples: rep.samples,
        directions: rep.directions,
    };
    Ok((checks, data))
}

fn spectrum_level(cfg: &RunConfig) -> Result<Checks, CliError> {
    let poly = parse_family(&cfg.target)?;
    let g = poly.degree;
    let levels = default_levels(1.0, cfg.levels);
    let mut value_dev = 0.0_f64;
    let mut spacing_dev = 0.0_f64;
    let mut mean_dev = 0.0_f64;
    let mut mult_mismatch = 0usize;
    let mut failure: Option<String> = None;
    for (li, &c) in levels.iter().enumerate() {
        let expected = expected_level_curvatures(&poly, c);
        // expected pairs are in ascending angle order
        let expected_mults: Vec<usize> = expected.iter().map(|p| p.1).collect();
        let mut expected_values: Vec<f64> = expected.iter().map(|p| p.0).collect();
        expected_values.sort_by(f64::total_cmp);
        let expected_mean = expected_mean_curvature(&poly, c);
        let spectra = par::try_map_indexed(cfg.samples, |i| {
            let lp = level_point_at(&poly, c, cfg.seed.wrapping_add(li as u64), i as u64)?;
            munzner_level_spectrum(&poly, &lp)
        });
        let spectra: Vec<ShapeSpectrum> = match spectra {
            Ok(s) => s,
            Err(e) if is_usage_error(&e) => return Err(lift(e)),
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        };
        for s in &spectra {
            // ascending angle is descending curvature
            let mut mults = s.multiplicities();
            mults.reverse();
            if mults != expected_mults {
                mult_mismatch += 1;
                continue;
            }
            value_dev = value_dev.max(max_abs(
                s.values().iter().zip(&expected_values).map(|(a, b)| a - b),
            ));
            let angles = curvature_angles(s);
            for w in angles.windows(2) {
                spacing_dev = spacing_dev.max((w[1] - w[0] - PI / g as f64).abs());
            }
            mean_dev = mean_dev.max((s.trace() - expected_mean).abs());
        }
    }
    let anchor_values = "principal curvatures cot(theta1 + k pi / g), theta1 = arccos(c) / g";
    let anchor_mults = "multiplicities alternate m1, m2, m1, ...";
    let anchor_spacing = "arccot of consecutive principal curvatures differ by pi / g";
    let anchor_mean = "mean curvature sum_k m_k cot(theta1 + k pi / g)";
    if let Some(msg) = failure {
        return Ok(vec![
            Check::failed("level_values", anchor_values, msg.clone()),
            Check::failed("level_multiplicities", anchor_mults, msg.clone()),
            Check::failed("angle_spacing", anchor_spacing, msg.clone()),
            Check::failed("mean_curvature", anchor_mean, msg),
        ]);
    }
    let pattern = expected_level_curvatures(&poly, 0.0)
        .iter()
        .map(|p| p.1.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let mut checks = vec![
        Check::exact_zero("level_multiplicities", anchor_mults, mult_mismatch as f64)
            .with_note(format!("expected pattern {pattern} in ascending angle")),
        Check::below("level_values", anchor_values, value_dev, cfg.tol),
    ];
    if g > 1 {
        checks.push(Check::below(
            "angle_spacing",
            anchor_spacing,
            spacing_dev,
            cfg.tol,
        ));
    }
    checks.push(Check::below(
        "mean_curvature",
        anchor_mean,
        mean_dev,
        cfg.tol,
    ));
    checks.push(Check::info(
        "minimal_level",
        "level c with vanishing mean curvature",
        minimal_level_locate(&poly),
    ));
    checks.push(Check::info(
        "levels",
        "levels c in [-0.9, 0.9]",
        levels.len() as f64,
    ));
    Ok(checks)
}

fn focal_points(
    poly: &MunznerPolynomial,
    sign: FocalSign,
    cfg: &RunConfig,
) -> GeomResult<Vec<FocalPoint>> {
    par::try_map_indexed(cfg.samples, |i| {
        focal_sample(poly, sign, cfg.seed, i as u64)
    })
}

fn spectrum_focal(cfg: &RunConfig) -> Result<Checks, CliError> {
    let poly = parse_family(&cfg.target)?;
    let g = poly.degree;
    if g < 2 {
        return Err(CliError::Geom(GeomError::BadParameters(
            "focal sets of a degree-1 family are points".into(),
        )));
    }
    let allowed: Vec<f64> = (1..g)
        .map(|k| 1.0 / (k as f64 * PI / g as f64).tan())
        .collect();
    let is_fkm = poly.clifford.is_some();
    let mut checks = Vec::new();
    for sign in [FocalSign::Plus, FocalSign::Minus] {
        let (tag, other, codim) = match sign {
            FocalSign::Plus => ("M+", poly.m2, poly.m1 + 1),
            FocalSign::Minus => ("M-", poly.m1, poly.m2 + 1),
        };
        let name = |s: &str| format!("{s}[{tag}]");
        let pts = match focal_points(&poly, sign, cfg) {
            Ok(p) => p,
            Err(e) if is_usage_error(&e) => return Err(lift(e)),
            Err(e) => {
                checks.push(Check::failed(
                    name("focal_sample"),
                    "f = +-1 on the focal set",
                    e.to_string(),
                ));
                continue;
            }
        };
        checks.push(Check::info(
            name("focal_residual"),
            "|f| - 1 at the sampled points",
            pts.iter().map(|p| p.residual).fold(0.0, f64::max),
        ));
        checks.push(Check::exact_zero(
            name("codimension"),
            format!(
                "codim {tag} = {}",
                if sign == FocalSign::Plus {
                    "m1 + 1"
                } else {
                    "m2 + 1"
                }
            ),
            max_abs(pts.iter().map(|p| p.codim() as f64 - codim as f64)),
        ));

        let values: GeomResult<f64> = (|| {
            let devs = par::try_map_indexed(pts.len(), |i| {
                let fp = &pts[i];
                let mut worst = 0.0_f64;
                for eta in sample_normals(fp, cfg.directions, cfg.seed.wrapping_add(i as u64)) {
                    let a = focal_shape_operator(&poly, fp, &eta)?;
                    for k in sym_eigen(&a)?.eigenvalues.iter() {
                        let d = allowed
                            .iter()
                            .map(|v| (k - v).abs())
                            .fold(f64::INFINITY, f64::min);
                        worst = worst.max(d);
                    }
                }
                Ok(worst)
            })?;
            Ok(par::max_of(&devs))
        })();
        let set = allowed
            .iter()
            .map(|v| format!("{:.6}", v + 0.0))
            .collect::<Vec<_>>()
            .join(", ");
        checks.push(
            checked(
                &name("focal_shape_values"),
                &format!("principal curvatures cot(k pi / g) in {{{set}}} for every unit normal"),
                values,
                below(cfg.tol),
            )?
            .with_note(format!(
                "{} normals at each of {} points",
                cfg.directions,
                pts.len()
            )),
        );

        let minimal: GeomResult<f64> =
            par::try_map_indexed(pts.len(), |i| focal_minimality(&poly, &pts[i]))
                .map(|v| par::max_of(&v));
        checks.push(checked(
            &name("mean_curvature_norm"),
            "focal submanifolds are minimal: tr A_eta = 0",
            minimal,
            below(cfg.tol),
        )?);

        let ricci = par::try_map_indexed(pts.len(), |i| focal_ricci(&poly, &pts[i]));
        let bound = 2.0 * (other as f64 - 1.0);
        let ricci_anchor = format!(
            "Ric = (d - 1) I + sum (tr A) A - A^2 >= 2({} - 1) on {tag}",
            if sign == FocalSign::Plus { "m2" } else { "m1" }
        );
        match ricci {
            Ok(r) => {
                let min = r
                    .iter()
                    .map(|x| x.min_eigenvalue)
                    .fold(f64::INFINITY, f64::min);
                checks.push(
                    Check::at_least(name("ricci_bound"), ricci_anchor, min - bound, cfg.tol)
                        .with_note(format!("min Ricci {min}, bound {bound}")),
                );
                checks.push(Check::info(
                    name("min_ricci"),
                    "smallest Ricci eigenvalue",
                    min,
                ));
            }
            Err(e) if is_usage_error(&e) => return Err(lift(e)),
            Err(e) => checks.push(Check::failed(
                name("ricci_bound"),
                ricci_anchor,
                e.to_string(),
            )),
        }

        if is_fkm && sign == FocalSign::Plus {
            let routes: GeomResult<f64> = (|| {
                let devs = par::try_map_indexed(pts.len(), |i| {
                    let fp = &pts[i];
                    let mut worst = 0.0_f64;
                    for eta in sample_normals(fp, cfg.directions, cfg.seed.wrapping_add(i as u64)) {
                        let a = focal_shape_operator(&poly, fp, &eta)?;
                        let b = fkm_plus_shape_operator(&poly, fp, &eta)?;
                        worst = worst.max((a - b).abs().max());
                    }
                    Ok(worst)
                })?;
                Ok(par::max_of(&devs))
            })();
            checks.push(checked(
                &name("explicit_shape_operator"),
                "A_eta = -T^T (sum c_i P_i) T for eta = sum c_i P_i x",
                routes,
                below(cfg.tol),
            )?);

            let scheme = scheme(cfg)?;
            let fp = &pts[0];
            let intrinsic: GeomResult<f64> = (|| {
                let fd = fkm_plus_intrinsic_ricci(&poly, fp, &scheme)?;
                let gauss = focal_ricci(&poly, fp)?.ricci;
                Ok((fd - gauss).abs().max())
            })();
            checks.push(
                checked(
                    &name("intrinsic_ricci"),
                    "Gauss-equation Ricci against differences of the induced metric",
                    intrinsic,
                    below(INTRINSIC_TOL),
                )?
                .with_note("first focal point"),
            );
        }
    }
    Ok(checks)
}

fn spectrum_sphere_bundle(cfg: &RunConfig) -> Result<Checks, CliError> {
    let spec = parse_bundle(&cfg.target)?;
    if spec.rank < 2 {
        return Err(CliError::bad_config("bundle", "S_r needs rank >= 2"));
    }
    let scheme = scheme(cfg)?;
    let (m, n) = (spec.base_dim(), spec.rank);
    let xs = spec.sample_base_points(cfg.samples, cfg.seed);
    let dirs = sample_sphere(n, cfg.samples, cfg.seed);
    let mut checks =
        vec![
            Check::info("fiber_multiplicity", "multiplicity of -1/r", (n - 1) as f64)
                .with_note("S_r has dimension m + n - 1, so -1/r has multiplicity n - 1"),
        ];
    for &r in &cfg.r {
        let expected = ShapeSpectrum::exact(&[(0.0, m), (-1.0 / r, n - 1)], "");
        let points = par::try_map_indexed(cfg.samples, |i| {
            FiberPoint::on_sphere(&spec, &xs[i], &dirs[i], r)
        });
        let points = match points {
            Ok(p) => p,
            Err(e) if is_usage_error(&e) => return Err(lift(e)),
            Err(e) => {
                checks.push(Check::failed(
                    format!("shape_exact[r={r}]"),
                    "S_r sample",
                    e.to_string(),
                ));
                continue;
            }
        };
        let exact: GeomResult<f64> = par::try_map_indexed(points.len(), |i| {
            let s = sphere_shape_spectrum(&spec, &points[i])?;
            Ok(if s.clusters == expected.clusters {
                0.0
            } else {
                1.0
            })
        })
        .map(|v| v.iter().sum());
        checks.push(checked(
            &format!("shape_exact[r={r}]"),
            "principal curvatures of S_r: 0 (x m), -1/r (x n-1)",
            exact,
            |n, a, v| Check::exact_zero(n, a, v),
        )?);
        if spec.connection.is_some() {
            let mut sorted = expected.eigenvalues();
            sorted.sort_by(f64::total_cmp);
            let fd: GeomResult<f64> = par::try_map_indexed(points.len(), |i| {
                let fp = &points[i];
                let mut k = sphere_shape_oracle(&spec, &fp.base.point, &fp.v, &scheme)?;
                k.sort_by(f64::total_cmp);
                Ok(max_abs(k.iter().zip(&sorted).map(|(a, b)| a - b)))
            })
            .map(|v| par::max_of(&v));
            checks.push(checked(
                &format!("shape_oracle[r={r}]"),
                "second fundamental form of |v| = r from the induced metric",
                fd,
                below(cfg.tol),
            )?);
        }
    }
    Ok(checks)
}

fn compare_oracle(cfg: &RunConfig) -> Result<Checks, CliError> {
    let spec = parse_bundle(&cfg.target)?;
    if spec.connection.is_none() {
        return Err(lift(GeomError::MissingConnectionChart));
    }
    let scheme = scheme(cfg)?;
    let pts = sample_fiber_points(&spec, cfg.samples, 1.5, cfg.seed).map_err(lift)?;
    let closed = par::try_map_indexed(pts.len(), |i| {
        total_curvature(&spec, &pts[i]).map(|t| t.theta)
    });
    let closed = match closed {
        Ok(c) => c,
        Err(e) => return Err(lift(e)),
    };
    let mut checks = Vec::new();
    let fd: GeomResult<f64> = par::try_map_indexed(pts.len(), |i| {
        let fp = &pts[i];
        let k = total_curvature_oracle(&spec, &fp.base.point, &fp.v, &scheme)?;
        Ok(closed[i].max_abs_diff(&k))
    })
    .map(|v| par::max_of(&v));
    checks.push(checked(
        "curvature_oracle",
        "frame curvature of the connection metric from R, A and grad R",
        fd,
        below(cfg.tol),
    )?);
    let sym = closed
        .iter()
        .map(|t| t.symmetry_defect().max(t.bianchi_defect()))
        .fold(0.0, f64::max);
    checks.push(Check::below(
        "curvature_symmetries",
        "R_abcd = -R_bacd = R_cdab, first Bianchi identity",
        sym,
        ROUNDING_TOL,
    ));
    let flat_base = matches!(spec.base.kind, BaseKind::Flat { .. });
    let feed_zero = pts
        .iter()
        .map(|fp| spec.feeds(&fp.base.point).map(|(c, _)| c.max_abs()))
        .collect::<GeomResult<Vec<f64>>>()
        .map_err(lift)?
        .iter()
        .all(|v| *v == 0.0);
    if flat_base && feed_zero {
        checks.push(Check::exact_zero(
            "flat_curvature",
            "flat base with flat connection: total space is Euclidean",
            closed.iter().map(|t| t.max_abs()).fold(0.0, f64::max),
        ));
    }
    let xs = spec.sample_base_points(cfg.samples, cfg.seed);
    let cons = check_connection_consistency(&spec, &xs, &scheme);
    checks.push(checked(
        "structure_equation",
        "Omega = omega ^ omega - d omega matches the curvature feed",
        cons,
        below(cfg.tol),
    )?);
    Ok(checks)
}
