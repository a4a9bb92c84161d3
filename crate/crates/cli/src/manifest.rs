//! Run provenance.
//!
//! Every output file opens with the manifest that produced it, so a file
//! can be regenerated byte-for-byte from its own header. Wall-clock data
//! never enters the CSVs; runtimes live only in the JSON summary.

use serde::Serialize;
use std::path::PathBuf;

pub const TOOL_NAME: &str = "molsig";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Output schema tag; bump when the CSV column set changes.
pub const CSV_SCHEMA: &str = "molsig-csv/1";
pub const CSV_COLUMNS: &str = "t_s,value,std_error,series,receiver,component";

/// Everything that determines a run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Scenario file path, or `builtin:<target>` for bundled setups.
    pub scenario: String,
    pub engine: String,
    pub observable: String,
    pub seed: u64,
    pub overrides: Vec<String>,
    /// Engine-specific knobs in a fixed order, e.g. realizations or dt.
    pub engine_params: Vec<(String, String)>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunManifest {
    /// Comment block reproducing the manifest, plus the per-file identity.
    pub fn header_lines(&self, receiver: &str, component: &str) -> Vec<String> {
        let mut lines = vec![
            format!("# schema = {CSV_SCHEMA}"),
            format!("# tool = {} {}", self.tool, self.version),
            format!("# command = {}", self.command),
            format!("# scenario = {}", self.scenario),
            format!("# engine = {}", self.engine),
            format!("# observable = {}", self.observable),
            format!("# seed = {}", self.seed),
        ];
        for o in &self.overrides {
            lines.push(format!("# override = {o}"));
        }
        for (k, v) in &self.engine_params {
            lines.push(format!("# {k} = {v}"));
        }
        lines.push(format!("# receiver = {receiver}"));
        lines.push(format!("# component = {component}"));
        lines
    }
}
