use std::path::Path;

use anyhow::Context;
use serde::Serialize;

pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    toda_lab::persist::write_atomic(path, &bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    toda_lab::persist::write_atomic(path, text.as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}

/// CSV with a header row; every record must have the header's length.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    toda_lab::persist::write_atomic(path, &bytes).with_context(|| format!("writing {}", path.display()))
}

/// Shortest round-trip text; empty for `None`.
pub fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// File-name-safe rendering of β, e.g. `-0.5` → `m0.5`.
pub fn beta_tag(beta: f64) -> String {
    beta.to_string().replace('-', "m")
}
