//! Output assembly: every run emits either CSV (with a provenance header) or
//! JSON, both embedding the fully resolved configuration so a result file is
//! reproducible from its own contents.

use serde::Serialize;
use std::io::Write;

/// Schema version stamped into every output.
pub const SCHEMA_VERSION: u32 = 1;

/// Fully resolved run configuration; only the fields relevant to the
/// subcommand are populated.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub format: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_per_unit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
    /// Recorded for provenance; only `check-identity` draws random numbers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Float formatting for CSV: 17 significant digits, '.' decimal, no locale,
/// enough for exact f64 round-trips.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV provenance header: one `# key=value` line per resolved field, in
/// stable (alphabetical) order, plus the schema version.
pub fn provenance_header(config: &RunConfig) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    let mut out = format!("# schema_version={SCHEMA_VERSION}\n");
    if let serde_json::Value::Object(map) = value {
        for (key, val) in map {
            let rendered = match val {
                serde_json::Value::String(s) => s,
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(render_scalar)
                    .collect::<Vec<_>>()
                    .join(","),
                other => render_scalar(&other),
            };
            out.push_str(&format!("# {key}={rendered}\n"));
        }
    }
    out
}

fn render_scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Write `text` to the configured destination (file or stdout).
pub fn emit(config: &RunConfig, text: &str) -> std::io::Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, text),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
        }
    }
}

/// JSON envelope shared by every subcommand.
#[derive(Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema_version: u32,
    pub config: RunConfig,
    #[serde(flatten)]
    pub body: T,
}

pub fn to_json<T: Serialize>(config: &RunConfig, body: T) -> String {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        body,
    };
    let mut text = serde_json::to_string_pretty(&envelope).expect("report serializes");
    text.push('\n');
    text
}
