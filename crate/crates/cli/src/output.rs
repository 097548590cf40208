//! CSV and report writing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rircoh::{Band, Error};
use serde::Serialize;

use crate::config::ConfigEcho;
use crate::error::{CliError, CliResult};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))
}

/// Shortest text that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn band_label(band: &Band) -> String {
    band.center_label()
}

/// Keeps file names portable: anything but `[A-Za-z0-9._~-]` becomes `_`.
pub fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._~-".contains(c) { c } else { '_' })
        .collect()
}

/// Short machine-readable status of a failed rating.
pub fn status_of(e: &Error) -> &'static str {
    match e {
        Error::NoUsableRegion(_) => "no-usable-region",
        Error::InputTooShort(_) => "input-too-short",
        Error::NoiseFloorUnavailable(_) => "noise-floor-unavailable",
        Error::AllUndefined => "all-undefined",
        Error::InsufficientDecay(_) => "insufficient-decay",
        Error::Pairing(_) => "pairing-error",
        _ => "error",
    }
}

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl CsvOut {
    pub fn create(path: PathBuf, header: &[&str]) -> CliResult<Self> {
        let file = fs::File::create(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(file);
        writer.write_record(header)?;
        Ok(CsvOut { path, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.writer
            .flush()
            .map_err(|e| CliError::Input(format!("{}: {e}", self.path.display())))?;
        Ok(self.path)
    }
}

#[derive(Debug, Serialize)]
pub struct BandResult {
    pub band: String,
    pub gamma_rating: Option<f64>,
    pub truncation_s: Option<f64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct PairResult {
    pub pair_id: String,
    pub condition_id: String,
    pub results: Vec<BandResult>,
}

/// Self-describing record of one run.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub manifest: Option<String>,
    pub config: Option<ConfigEcho>,
    pub units: Units,
    pub outputs: Vec<String>,
    pub pairs: Vec<PairResult>,
    pub warnings: Vec<String>,
    pub timing_s: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

#[derive(Debug, Serialize)]
pub struct Units {
    pub time: &'static str,
    pub frequency: &'static str,
    pub gamma: &'static str,
}

impl RunReport {
    pub fn new(command: &str, manifest: Option<&Path>) -> Self {
        RunReport {
            tool: "rircoh",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            manifest: manifest.map(|p| p.display().to_string()),
            config: None,
            units: Units {
                time: "s",
                frequency: "Hz",
                gamma: "dimensionless, [0, 1]",
            },
            outputs: Vec::new(),
            pairs: Vec::new(),
            warnings: Vec::new(),
            timing_s: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn warn(&mut self, message: String) {
        eprintln!("warning: {message}");
        self.warnings.push(message);
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(mut self, dir: &Path) -> CliResult<()> {
        if let Some(t) = self.started {
            self.timing_s = t.elapsed().as_secs_f64();
        }
        let path = dir.join("report.json");
        let text = serde_json::to_string_pretty(&self).expect("report serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}
