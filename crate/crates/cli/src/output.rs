//! CSV and manifest writers.
//!
//! Every CSV opens with `#` comment lines describing the run, followed by
//! plain comma-separated records. Floats use Rust's shortest round-trip
//! formatting, so identical results give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hcwalk_core::{CorrelationMatrix, HoppingMode};
use serde::{Deserialize, Serialize};

use crate::args::Command;
use crate::error::CliResult;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// CSV writer preceded by comment lines.
pub fn csv_with_comments(
    path: &Path,
    comments: &[String],
) -> CliResult<csv::Writer<BufWriter<File>>> {
    let mut out = BufWriter::new(File::create(path)?);
    for line in comments {
        writeln!(out, "# {line}")?;
    }
    Ok(csv::WriterBuilder::new().flexible(false).from_writer(out))
}

/// `# n1\n2 gamma, tau=..., alpha=..., beta=..., v_over_t=...`; the two
/// characters `\n` label the row/column axes.
pub fn correlation_header(tau: f64, hopping: HoppingMode, beta: f64, v_over_t: f64) -> String {
    format!(
        "n1\\n2 gamma, tau={tau}, alpha={}, beta={beta}, v_over_t={v_over_t}",
        hopping.label()
    )
}

/// N rows of N values; row `i` holds `Γ_{i,·}`.
pub fn write_correlations(path: &Path, header: String, gamma: &CorrelationMatrix) -> CliResult<()> {
    let mut w = csv_with_comments(path, &[header])?;
    for i in 0..gamma.n_sites() {
        w.write_record(gamma.row(i).iter().map(|&x| num(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column series with a column-name row.
pub fn write_series(
    path: &Path,
    comments: &[String],
    columns: [&str; 2],
    rows: impl IntoIterator<Item = (String, f64)>,
) -> CliResult<()> {
    let mut w = csv_with_comments(path, comments)?;
    w.write_record(columns)?;
    for (key, value) in rows {
        w.write_record([key, num(value)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: String,
    pub command: Command,
    /// Worker threads used; results do not depend on it.
    pub threads: usize,
    pub master_seed: Option<u64>,
    /// Realizations whose eigensolve failed and were left out of the means.
    pub failures: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    /// Interpretations the run depends on.
    pub notes: Vec<String>,
    /// Headline numbers of the run.
    pub summary: serde_json::Value,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut out = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        out.flush()?;
        Ok(path)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let file = File::open(path).map_err(|e| {
            crate::error::CliError::Usage(format!("cannot open manifest {}: {e}", path.display()))
        })?;
        let manifest: Manifest = serde_json::from_reader(std::io::BufReader::new(file))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(crate::error::CliError::Usage(format!(
                "manifest format version {} is not supported (expected {FORMAT_VERSION})",
                manifest.format_version
            )));
        }
        Ok(manifest)
    }
}
