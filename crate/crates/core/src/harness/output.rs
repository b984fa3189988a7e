use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::sweep::ResultRow;
use crate::{Error, Result};

pub const RESULTS_HEADER: &str = "sweep_var,sweep_value,method,trial,seed,rate_bps_hz,flag";

/// Rows in the order given, one per line after the header.
pub fn format_results(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.sweep_var,
            r.sweep_value,
            r.method,
            r.trial,
            r.seed,
            r.rate,
            r.flag_label()
        );
    }
    out
}

pub fn write_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_text(path, &format_results(rows))
}

/// `iteration,fitness`; iteration 0 is the initial swarm.
pub fn format_trace(initial_best: f64, trace: &[f64]) -> String {
    let mut out = String::from("iteration,fitness\n");
    let _ = writeln!(out, "0,{initial_best}");
    for (q, f) in trace.iter().enumerate() {
        let _ = writeln!(out, "{},{}", q + 1, f);
    }
    out
}

pub fn write_trace(initial_best: f64, trace: &[f64], path: &Path) -> Result<()> {
    write_text(path, &format_trace(initial_best, trace))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
