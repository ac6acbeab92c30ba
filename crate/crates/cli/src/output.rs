//! File formats.
//!
//! Every file starts with `#` comment lines: tool name and version, the
//! command, the effective seed, and the configuration file verbatim. Data
//! follow with no timestamps or timings, so identical inputs give
//! byte-identical files.
//!
//! Sweep and run CSV columns, in order:
//! `L,p1,p2,Xr,Xr_err,Xc,Xc_err,Zr,Zr_err,Zc,Zc_err,S_bits,S_err,x_density,z_density,samples,seed`
//! where `samples` counts all time samples over all runs and `seed` is the
//! point's derived master seed.
//!
//! Profile CSV columns: `delta,X_row,X_row_err,Z_col,Z_col_err,Y_row,Y_row_err`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use bacon_circuit::{EnsembleStats, Scalar};

use crate::CliError;

pub const SWEEP_HEADER: [&str; 17] = [
    "L", "p1", "p2", "Xr", "Xr_err", "Xc", "Xc_err", "Zr", "Zr_err", "Zc", "Zc_err", "S_bits", "S_err", "x_density",
    "z_density", "samples", "seed",
];

pub const PROFILE_HEADER: [&str; 7] = ["delta", "X_row", "X_row_err", "Z_col", "Z_col_err", "Y_row", "Y_row_err"];

/// Ten significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.9e}")
}

/// Provenance lines (without the `#` prefix).
pub fn provenance(command: &str, seed: Option<u64>, config_source: &str) -> Vec<String> {
    let mut lines = vec![format!("bacon-circuit {}", env!("CARGO_PKG_VERSION")), format!("command: {command}")];
    if let Some(s) = seed {
        lines.push(format!("seed: {s}"));
    }
    if config_source.trim().is_empty() {
        lines.push("config: (defaults)".into());
    } else {
        lines.push("config:".into());
        lines.extend(config_source.lines().map(|l| format!("  {l}")));
    }
    lines
}

pub fn write_comments(w: &mut impl Write, lines: &[String]) -> std::io::Result<()> {
    for l in lines {
        writeln!(w, "# {l}")?;
    }
    Ok(())
}

pub fn sweep_row(stats: &EnsembleStats) -> Vec<String> {
    let c = &stats.config;
    let e = |s: Scalar| stats.estimate(s);
    let mut row = vec![c.lattice.l().to_string(), c.mix.p1.to_string(), c.mix.p2.to_string()];
    for s in [Scalar::Xr, Scalar::Xc, Scalar::Zr, Scalar::Zc, Scalar::EntropyBits] {
        row.push(num(e(s).mean));
        row.push(num(e(s).err));
    }
    row.push(num(e(Scalar::XSiteDensity).mean));
    row.push(num(e(Scalar::ZSiteDensity).mean));
    row.push(stats.n_samples.to_string());
    row.push(c.master_seed.to_string());
    row
}

/// CSV file with a provenance preamble, flushed after every row so an
/// interrupted sweep keeps the rows already written.
pub struct CsvSink {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    pub fn create(path: &Path, preamble: &[String], header: &[&str]) -> Result<Self, CliError> {
        let mut file = BufWriter::new(File::create(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?);
        write_comments(&mut file, preamble)?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        writer.flush()?;
        Ok(Self { writer })
    }

    pub fn row(&mut self, fields: &[String]) -> std::io::Result<()> {
        self.writer.write_record(fields).map_err(std::io::Error::other)?;
        self.writer.flush()
    }
}
