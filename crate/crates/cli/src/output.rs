use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{CliError, CliResult};

/// CSV cell for a value that must be finite.
pub fn num(column: &str, x: f64) -> CliResult<String> {
    if x.is_finite() {
        Ok(x.to_string())
    } else {
        Err(CliError::Config(format!("non-finite value {x} in column `{column}`")))
    }
}

/// Order labels may be `inf`; every other cell goes through [`num`].
pub fn order_label(a: f64) -> String {
    if a.is_infinite() {
        "inf".into()
    } else {
        a.to_string()
    }
}

/// Single writer for one run's artifacts.
pub struct Artifacts {
    dir: PathBuf,
    command: &'static str,
    timestamp: u64,
    written: Vec<PathBuf>,
    report: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &'static str) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            command,
            timestamp,
            written: Vec::new(),
            report: Vec::new(),
        })
    }

    /// Writes `<command>[_<suffix>]_<timestamp>.csv`.
    pub fn csv(&mut self, suffix: Option<&str>, header: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        let name = match suffix {
            Some(s) => format!("{}_{s}_{}.csv", self.command, self.timestamp),
            None => format!("{}_{}.csv", self.command, self.timestamp),
        };
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn line(&mut self, key: &str, value: impl Display) {
        self.report.push(format!("{key}: {value}"));
    }

    pub fn text(&mut self, text: impl Into<String>) {
        self.report.push(text.into());
    }

    /// Writes `report.txt` listing the CSV files; returns every path written.
    pub fn finish(mut self) -> CliResult<Vec<PathBuf>> {
        for p in &self.written {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            self.report.push(format!("artifact: {name}"));
        }
        let path = self.dir.join("report.txt");
        let mut body = self.report.join("\n");
        body.push('\n');
        std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(self.written)
    }
}
