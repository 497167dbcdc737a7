//! CSV and run-report emission. Floats are printed with Rust's shortest
//! round-trip formatting, so identical computations give byte-identical
//! files.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> anyhow::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{header}")?;
    for row in rows {
        writeln!(file, "{row}")?;
    }
    file.flush()?;
    Ok(())
}

/// Summary of one command run, written as report.json next to the data.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub ok: bool,
    pub outputs: Vec<PathBuf>,
    /// Hard failures; a nonzero exit code reports them.
    pub failures: Vec<String>,
    /// Diagnostics that do not fail the run (non-converged rows, degenerate
    /// bifurcation patterns).
    pub notes: Vec<String>,
    pub elapsed_ms: u128,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.into(),
            ok: true,
            outputs: Vec::new(),
            failures: Vec::new(),
            notes: Vec::new(),
            elapsed_ms: 0,
        }
    }

    pub fn write(&mut self, out_dir: &Path) -> anyhow::Result<PathBuf> {
        self.ok = self.failures.is_empty();
        let path = out_dir.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}
