//! CSV and JSON metadata writers.

use anyhow::{Context, Result};
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

use xyf_core::experiment::{ExperimentConfig, Stats};

/// CSV text: config echo as `#` comments, header, one row.
pub fn csv_text(command: &str, cfg: &ExperimentConfig, stats: &Stats) -> String {
    let mut s = String::new();
    s.push_str(&format!("# xyf {} {command}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("# config {}\n", serde_json::to_string(cfg).expect("config serializes")));
    if let Some([z, x]) = stats.classes {
        s.push_str(&format!("# outcome classes Z-run M0={} M1={}; X-run M0={} M1={}\n", z[0], z[1], x[0], x[1]));
    }
    s.push_str(Stats::CSV_HEADER);
    s.push('\n');
    s.push_str(&stats.csv_row());
    s.push('\n');
    s
}

pub fn metadata(command: &str, cfg: &ExperimentConfig, stats: &Stats) -> serde_json::Value {
    json!({
        "tool": "xyf",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
        "stats": stats,
        "failure_rate": stats.failure_rate(),
    })
}

/// Metadata goes next to the CSV unless a path is given.
pub fn metadata_path(out: Option<&Path>, meta: Option<&Path>) -> Option<PathBuf> {
    meta.map(Path::to_path_buf).or_else(|| out.map(|o| o.with_extension("json")))
}

/// Write to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("out: cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
