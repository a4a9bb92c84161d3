//! Machine-readable outputs: one CSV per curve, one JSON summary per run.

use crate::manifest::{RunManifest, CSV_COLUMNS};
use molsig::SignalCurve;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Per-curve digest recorded in the JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    pub file: String,
    pub engine: String,
    pub receiver: String,
    pub component: String,
    pub observable: String,
    pub n_points: usize,
    pub peak_value: f64,
    pub peak_t: f64,
    /// Expected signal beyond the placement radius at the last sample;
    /// the bias bound a sampled engine cannot see.
    pub truncation_bound: Option<f64>,
    pub runtime_ms: u128,
}

/// Row of the table1 reproduction output.
#[derive(Debug, Clone, Serialize)]
pub struct TableEntry {
    pub receiver: String,
    pub component: String,
    pub peak_net: f64,
    pub reference: f64,
    pub relative_error: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub manifest: RunManifest,
    pub curves: Vec<CurveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<TableEntry>>,
    /// Probability mass of the nearest-transmitter distance beyond the
    /// placement radius; how much of the distance law sampling truncates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nearest_tail_mass: Option<f64>,
    pub total_runtime_ms: u128,
}

/// Writes one curve as CSV with the full provenance header. Values are
/// printed in shortest round-trip form, so identical runs produce identical
/// bytes.
pub fn write_curve_csv(
    dir: &Path,
    file_name: &str,
    manifest: &RunManifest,
    receiver: &str,
    component: &str,
    curve: &SignalCurve,
) -> std::io::Result<PathBuf> {
    let path = dir.join(file_name);
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    for line in manifest.header_lines(receiver, component) {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "{CSV_COLUMNS}")?;
    let series = format!("{receiver}_{component}");
    for k in 0..curve.len() {
        writeln!(
            out,
            "{},{},{},{series},{receiver},{component}",
            curve.times[k], curve.mean[k], curve.std_error[k]
        )?;
    }
    out.flush()?;
    Ok(path)
}

pub fn write_summary(dir: &Path, summary: &Summary) -> std::io::Result<PathBuf> {
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}

/// Peak (value, time) of a curve; (0, 0) for empty curves.
pub fn peak_of(curve: &SignalCurve) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    let mut found = false;
    for k in 0..curve.len() {
        if !found || curve.mean[k] > best.0 {
            best = (curve.mean[k], curve.times[k]);
            found = true;
        }
    }
    best
}
