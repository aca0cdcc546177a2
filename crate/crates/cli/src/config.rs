use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "bcl",
    version,
    about = "Curvature verification runs for connection metrics, sphere bundles, doubles and Munzner families"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: TopCommand,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum TopCommand {
    /// Check identities that must hold exactly on every sample
    Verify {
        #[arg(value_enum)]
        suite: VerifySuite,
    },
    /// Minimum Ricci eigenvalue / scalar curvature of S_r over a radius grid
    Scan {
        #[arg(value_enum)]
        quantity: ScanQuantity,
    },
    /// Principal curvatures against their closed forms
    Spectrum {
        #[arg(value_enum)]
        kind: SpectrumKind,
    },
    /// Closed-form curvature against finite differences of the metric
    Compare {
        #[arg(value_enum)]
        against: CompareTarget,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VerifySuite {
    Munzner,
    Double,
    Transnormal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScanQuantity {
    Ricci,
    Scalar,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpectrumKind {
    Level,
    Focal,
    SphereBundle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CompareTarget {
    Oracle,
}

#[derive(Debug, Default, Clone, Args)]
pub struct Options {
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample count (points, focal points or base points per radius)
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Fiber directions per base point (scan) or normals per focal point
    #[arg(long, global = true)]
    pub directions: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Finite-difference base step
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Radius grid `min:max:steps`, a single radius, or a comma list
    #[arg(long, global = true)]
    pub r: Option<String>,
    #[arg(long, global = true)]
    pub r0: Option<f64>,
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Munzner family id: linear:n, quad:p:q, fkm:m:l
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Bundle id: flat:m:n, trivial:s2:n, ts2, twisted:lambda (suffix +1 for the double)
    #[arg(long, global = true)]
    pub bundle: Option<String>,
    /// Flat JSON file with any of the options above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write plot data of a scan to this path
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyMunzner,
    VerifyDouble,
    VerifyTransnormal,
    ScanRicci,
    ScanScalar,
    SpectrumLevel,
    SpectrumFocal,
    SpectrumSphereBundle,
    CompareOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Family,
    Bundle,
}

impl Command {
    pub fn from_cli(top: &TopCommand) -> Self {
        match top {
            TopCommand::Verify { suite } => match suite {
                VerifySuite::Munzner => Command::VerifyMunzner,
                VerifySuite::Double => Command::VerifyDouble,
                VerifySuite::Transnormal => Command::VerifyTransnormal,
            },
            TopCommand::Scan { quantity } => match quantity {
                ScanQuantity::Ricci => Command::ScanRicci,
                ScanQuantity::Scalar => Command::ScanScalar,
            },
            TopCommand::Spectrum { kind } => match kind {
                SpectrumKind::Level => Command::SpectrumLevel,
                SpectrumKind::Focal => Command::SpectrumFocal,
                SpectrumKind::SphereBundle => Command::SpectrumSphereBundle,
            },
            TopCommand::Compare { .. } => Command::CompareOracle,
        }
    }

    pub fn target_kind(self) -> TargetKind {
        match self {
            Command::VerifyMunzner | Command::SpectrumLevel | Command::SpectrumFocal => {
                TargetKind::Family
            }
            _ => TargetKind::Bundle,
        }
    }

    pub fn is_scan(self) -> bool {
        matches!(self, Command::ScanRicci | Command::ScanScalar)
    }

    fn default_samples(self) -> usize {
        match self {
            Command::VerifyMunzner => 1000,
            Command::VerifyDouble | Command::VerifyTransnormal => 200,
            Command::ScanRicci | Command::ScanScalar => 32,
            Command::SpectrumLevel | Command::CompareOracle => 50,
            Command::SpectrumFocal => 10,
            Command::SpectrumSphereBundle => 20,
        }
    }

    fn default_directions(self) -> usize {
        match self {
            Command::SpectrumFocal => 20,
            _ => 16,
        }
    }

    fn default_tol(self) -> f64 {
        match self {
            Command::VerifyMunzner => 1e-9,
            Command::VerifyDouble | Command::VerifyTransnormal => 1e-7,
            Command::SpectrumLevel | Command::SpectrumFocal => 1e-6,
            _ => 1e-5,
        }
    }

    pub fn uses_radii(self) -> bool {
        matches!(
            self,
            Command::ScanRicci | Command::ScanScalar | Command::SpectrumSphereBundle
        )
    }

    fn default_r(self) -> Vec<f64> {
        match self {
            Command::SpectrumSphereBundle => vec![0.1, 1.0, 2.0],
            Command::ScanRicci | Command::ScanScalar => linspace(0.05, 2.0, 40),
            _ => Vec::new(),
        }
    }
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Command::VerifyMunzner => "verify munzner",
            Command::VerifyDouble => "verify double",
            Command::VerifyTransnormal => "verify transnormal",
            Command::ScanRicci => "scan ricci",
            Command::ScanScalar => "scan scalar",
            Command::SpectrumLevel => "spectrum level",
            Command::SpectrumFocal => "spectrum focal",
            Command::SpectrumSphereBundle => "spectrum sphere-bundle",
            Command::CompareOracle => "compare oracle",
        };
        f.write_str(s)
    }
}

/// Fully resolved run parameters; echoed verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Family id or bundle id, depending on the command.
    pub target: String,
    pub seed: u64,
    pub samples: usize,
    pub directions: usize,
    pub tol: f64,
    pub h: f64,
    /// Radius grid; empty for commands that take no radius.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r: Vec<f64>,
    /// `None` lets `verify double` pick its default radius.
    pub r0: Option<f64>,
    pub levels: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

/// Contents of a `--config` file: a flat JSON object.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub directions: Option<usize>,
    pub tol: Option<f64>,
    pub h: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub r: Option<GridValue>,
    pub r0: Option<f64>,
    pub levels: Option<usize>,
    pub family: Option<String>,
    pub bundle: Option<String>,
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Spec(String),
    Single(f64),
    List(Vec<f64>),
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::bad_config(
                format!("{origin}:{}:{}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }
}

pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect()
}

/// `min:max:steps`, a single radius, or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: &str| CliError::bad_config("r", format!("`{s}`: {m}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, steps] => {
            let steps: usize = steps
                .trim()
                .parse()
                .map_err(|_| bad("steps must be a count"))?;
            if steps == 0 {
                return Ok(Vec::new());
            }
            Ok(linspace(num(lo)?, num(hi)?, steps))
        }
        [single] if single.trim().is_empty() => Ok(Vec::new()),
        [single] => single.split(',').map(num).collect(),
        _ => Err(bad("expected min:max:steps")),
    }
}

fn grid_of(v: &GridValue) -> Result<Vec<f64>, CliError> {
    match v {
        GridValue::Spec(s) => parse_grid(s),
        GridValue::Single(x) => Ok(vec![*x]),
        GridValue::List(l) => Ok(l.clone()),
    }
}

impl RunConfig {
    /// Merges CLI flags over the config file over per-command defaults.
    pub fn resolve(command: Command, cli: &Options, file: &FileConfig) -> Result<Self, CliError> {
        let (wanted, other, wanted_name, other_name) = match command.target_kind() {
            TargetKind::Family => (&cli.family, &cli.bundle, "family", "bundle"),
            TargetKind::Bundle => (&cli.bundle, &cli.family, "bundle", "family"),
        };
        let (file_wanted, file_other) = match command.target_kind() {
            TargetKind::Family => (&file.family, &file.bundle),
            TargetKind::Bundle => (&file.bundle, &file.family),
        };
        if other.is_some() || (wanted.is_none() && file_wanted.is_none() && file_other.is_some()) {
            return Err(CliError::bad_config(
                other_name,
                format!("`{command}` takes --{wanted_name}, not --{other_name}"),
            ));
        }
        let target = wanted
            .clone()
            .or_else(|| file_wanted.clone())
            .ok_or_else(|| {
                CliError::bad_config(wanted_name, format!("`{command}` needs --{wanted_name}"))
            })?;
        let r = match (&cli.r, &file.r) {
            (Some(s), _) => parse_grid(s)?,
            (None, Some(v)) => grid_of(v)?,
            (None, None) => command.default_r(),
        };
        let cfg = RunConfig {
            command,
            target,
            seed: cli.seed.or(file.seed).unwrap_or(42),
            samples: cli
                .samples
                .or(file.samples)
                .unwrap_or(command.default_samples()),
            directions: cli
                .directions
                .or(file.directions)
                .unwrap_or(command.default_directions()),
            tol: cli.tol.or(file.tol).unwrap_or(command.default_tol()),
            h: cli.h.or(file.h).unwrap_or(1e-4),
            r,
            r0: cli.r0.or(file.r0),
            levels: cli.levels.or(file.levels).unwrap_or(9),
            format: cli.format.or(file.format).unwrap_or(Format::Json),
            out: cli.out.clone().or_else(|| file.out.clone()),
            plot: cli.plot.clone().or_else(|| file.plot.clone()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("samples", self.samples),
            ("directions", self.directions),
            ("levels", self.levels),
        ] {
            if v == 0 {
                return Err(CliError::bad_config(name, "must be >= 1"));
            }
        }
        for (name, v) in [("tol", self.tol), ("h", self.h)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::bad_config(name, format!("must be > 0, got {v}")));
            }
        }
        if let Some(r0) = self.r0 {
            if !(r0 > 0.0 && r0.is_finite()) {
                return Err(CliError::bad_config("r0", format!("must be > 0, got {r0}")));
            }
        }
        if !self.command.uses_radii() {
            if !self.r.is_empty() {
                return Err(CliError::bad_config(
                    "r",
                    format!("`{}` takes no radius grid", self.command),
                ));
            }
        } else if self.r.is_empty() {
            return Err(CliError::bad_config("r", "radius grid is empty"));
        }
        if self.r.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(CliError::bad_config("r", "radii must be positive"));
        }
        if self.r.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::bad_config(
                "r",
                "radius grid must be strictly ascending",
            ));
        }
        if self.plot.is_some() && !self.command.is_scan() {
            return Err(CliError::NotAScan);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> Options {
        Options {
            family: Some("quad:2:2".into()),
            ..Default::default()
        }
    }

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_grid("0.1,1,2").unwrap(), vec![0.1, 1.0, 2.0]);
        let g = parse_grid("0.05:2.0:40").unwrap();
        assert_eq!(g.len(), 40);
        assert_eq!((g[0], g[39]), (0.05, 2.0));
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:2:3").is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        let o = Options {
            r: Some("0.1:1:0".into()),
            bundle: Some("ts2".into()),
            ..Default::default()
        };
        let err = RunConfig::resolve(Command::ScanRicci, &o, &FileConfig::default()).unwrap_err();
        assert!(matches!(err, CliError::BadConfig { ref field, .. } if field == "r"));
    }

    #[test]
    fn descending_grid_rejected() {
        let o = Options {
            r: Some("1,0.5".into()),
            bundle: Some("ts2".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve(Command::ScanRicci, &o, &FileConfig::default()).is_err());
    }

    #[test]
    fn zero_counts_and_tolerances_rejected() {
        for o in [
            Options {
                samples: Some(0),
                ..opts()
            },
            Options {
                levels: Some(0),
                ..opts()
            },
            Options {
                tol: Some(0.0),
                ..opts()
            },
            Options {
                h: Some(-1e-4),
                ..opts()
            },
        ] {
            assert!(
                RunConfig::resolve(Command::VerifyMunzner, &o, &FileConfig::default()).is_err()
            );
        }
    }

    #[test]
    fn cli_beats_file_beats_default() {
        let file =
            FileConfig::parse(r#"{"seed": 5, "samples": 7, "family": "fkm:1:4"}"#, "f").unwrap();
        let o = Options {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Command::VerifyMunzner, &o, &file).unwrap();
        assert_eq!((cfg.seed, cfg.samples), (9, 7));
        assert_eq!(cfg.target, "fkm:1:4");
        assert_eq!(cfg.tol, 1e-9);
    }

    #[test]
    fn unknown_file_key_reports_position() {
        let err =
            FileConfig::parse("{\n  \"seed\": 1,\n  \"sample\": 3\n}", "cfg.json").unwrap_err();
        match err {
            CliError::BadConfig { field, message } => {
                assert!(field.starts_with("cfg.json:3:"), "{field}");
                assert!(message.contains("sample"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_target_kind_rejected() {
        let o = Options {
            bundle: Some("ts2".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve(Command::VerifyMunzner, &o, &FileConfig::default()).is_err());
        assert!(RunConfig::resolve(
            Command::VerifyMunzner,
            &Options::default(),
            &FileConfig::default()
        )
        .is_err());
    }
}
