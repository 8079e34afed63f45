//! Trace serialization.
//!
//! CSV carries the aggregate columns only; JSON carries the whole trace,
//! per-repetition data included. Files are written to a dot-prefixed
//! temporary in the destination directory and renamed into place, so a
//! crash mid-write never leaves a half-written trace under the final name.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::config::OutputFormat;
use super::runner::RegretTrace;

pub fn trace_to_csv(trace: &RegretTrace) -> String {
    let k = trace.mean_final_pulls.len();
    let mut out = String::new();
    out.push_str("checkpoint_t,regret_mean,regret_stderr");
    for arm in 1..=k {
        let _ = write!(out, ",pulls_arm_{arm}_mean");
    }
    out.push('\n');
    for (j, &cp) in trace.checkpoints.iter().enumerate() {
        let _ = write!(out, "{cp},{},{}", trace.regret_mean[j], trace.regret_stderr[j]);
        for arm in 0..k {
            let _ = write!(out, ",{}", trace.mean_pulls_at_checkpoints[j][arm]);
        }
        out.push('\n');
    }
    out
}

pub fn trace_to_json(trace: &RegretTrace) -> Result<String> {
    Ok(serde_json::to_string_pretty(trace)?)
}

pub fn write_trace(trace: &RegretTrace, path: &Path, format: OutputFormat) -> Result<()> {
    let body = match format {
        OutputFormat::Csv => trace_to_csv(trace),
        OutputFormat::Json => trace_to_json(trace)?,
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid_input(format!("output path {} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, body)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
