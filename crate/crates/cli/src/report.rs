use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// `None` when the measurement itself failed or was not finite.
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    /// The formula under test.
    pub anchor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Check {
    /// Passes when `|measured| <= tol`.
    pub fn below(
        name: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        tol: f64,
    ) -> Self {
        let ok = measured.abs() <= tol;
        Self::with(name, anchor, measured, Some(tol), ok)
    }

    /// Passes when `measured == 0` exactly.
    pub fn exact_zero(name: impl Into<String>, anchor: impl Into<String>, measured: f64) -> Self {
        Self::with(name, anchor, measured, Some(0.0), measured == 0.0)
    }

    /// Passes when `measured >= -tol`, i.e. a lower bound holds up to `tol`.
    pub fn at_least(
        name: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        tol: f64,
    ) -> Self {
        Self::with(name, anchor, measured, Some(tol), measured >= -tol)
    }

    pub fn info(name: impl Into<String>, anchor: impl Into<String>, measured: f64) -> Self {
        Self {
            name: name.into(),
            status: Status::Info,
            measured: finite(measured),
            tolerance: None,
            anchor: anchor.into(),
            note: None,
        }
    }

    pub fn failed(
        name: impl Into<String>,
        anchor: impl Into<String>,
        note: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            measured: None,
            tolerance: None,
            anchor: anchor.into(),
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn with(
        name: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        tol: Option<f64>,
        ok: bool,
    ) -> Self {
        Self {
            name: name.into(),
            status: if ok && measured.is_finite() {
                Status::Pass
            } else {
                Status::Fail
            },
            measured: finite(measured),
            tolerance: tol,
            anchor: anchor.into(),
            note: None,
        }
    }
}

/// Per-radius minima of a positivity scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanData {
    pub r: Vec<f64>,
    pub min_ricci: Vec<f64>,
    pub min_scalar: Vec<f64>,
    pub threshold: Option<f64>,
    pub samples: usize,
    pub directions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: u32,
    pub version: String,
    pub config: RunConfig,
    pub status: Status,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanData>,
    /// Seconds; the only field allowed to differ between identical runs.
    pub wall_time: f64,
}

impl Report {
    pub fn new(
        config: RunConfig,
        checks: Vec<Check>,
        scan: Option<ScanData>,
        wall_time: f64,
    ) -> Self {
        let status = if checks.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else {
            Status::Pass
        };
        Self {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            status,
            checks,
            scan,
            wall_time,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Serialize(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::bad_config(format!("report:{}:{}", e.line(), e.column()), e.to_string())
        })
    }

    /// One row per check: `name,status,measured,tolerance,anchor,note`.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let ser = |e: csv::Error| CliError::Serialize(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "status", "measured", "tolerance", "anchor", "note"])
            .map_err(ser)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
            };
            w.write_record([
                c.name.as_str(),
                status,
                &opt(c.measured),
                &opt(c.tolerance),
                &c.anchor,
                c.note.as_deref().unwrap_or(""),
            ])
            .map_err(ser)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
    }
}

/// Drops the `wall_time` member so two reports can be compared exactly.
pub fn strip_wall_time(json: &str) -> Result<String, CliError> {
    let mut v: serde_json::Value =
        serde_json::from_str(json).map_err(|e| CliError::Serialize(e.to_string()))?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("wall_time");
    }
    Ok(v.to_string())
}

/// Writes through a temporary file in the target directory, then renames it
/// into place so readers never see a partial report.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub const PLOT_COLUMNS: [&str; 3] = ["r", "min_ricci", "min_scalar"];

/// Whitespace-separated table of a scan: a header row, then one row per radius.
pub fn emit_plotdata(report: &Report) -> Result<String, CliError> {
    let scan = report.scan.as_ref().ok_or(CliError::NotAScan)?;
    let mut out = PLOT_COLUMNS.join(" ");
    out.push('\n');
    for i in 0..scan.r.len() {
        out.push_str(&format!(
            "{} {} {}\n",
            scan.r[i], scan.min_ricci[i], scan.min_scalar[i]
        ));
    }
    Ok(out)
}

/// Inverse of [`emit_plotdata`]: the columns in header order.
pub fn parse_plotdata(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (k, line) in lines.enumerate() {
        let row: Vec<&str> = line.split_whitespace().collect();
        if row.len() != header.len() {
            return Err(CliError::bad_config(
                format!("plot:{}", k + 2),
                "ragged row",
            ));
        }
        for (c, v) in row.iter().enumerate() {
            let x = v.parse::<f64>().map_err(|_| {
                CliError::bad_config(format!("plot:{}", k + 2), format!("`{v}` is not a number"))
            })?;
            cols[c].push(x);
        }
    }
    Ok(cols)
}
