//! Output documents: CSV with an embedded config comment line, or JSON with
//! the tool version and resolved config as leading fields. A document is
//! built fully in memory and written once, to the output file when one is
//! given and to standard output otherwise.

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const TOOL: &str = "fexp";

pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// One simulate/sweep result. Field order defines the fixed CSV header:
/// `scheme,n,p_fwd,sigma2_fwd,p_fb,sigma2_fb,delta,trials,p_hat,ci_low,ci_high,log_pe_closed_form,seed`.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub scheme: String,
    pub n: usize,
    pub p_fwd: f64,
    pub sigma2_fwd: f64,
    pub p_fb: f64,
    pub sigma2_fb: f64,
    pub delta: f64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub log_pe_closed_form: f64,
    pub seed: u64,
}

/// Slope-fit summary attached to sweep outputs.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// The margin-dependent exponent the sweep should approach.
    pub reference_exponent: f64,
}

/// One analytic bound row for the exponents/bsc tables.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub label: String,
    pub kind: String,
    pub regime: String,
    pub value: f64,
}

fn config_comment(config: &ExperimentConfig) -> Result<String, CliError> {
    let compact = serde_json::to_string(config)
        .map_err(|e| CliError::Numerical(format!("config serialization failed: {e}")))?;
    Ok(format!("# {TOOL} {} config={compact}", version()))
}

/// CSV document: config comment, header, serialized rows, then optional
/// named JSON trailer comments (summary, audit, ...).
pub fn csv_document<R: Serialize>(
    config: &ExperimentConfig,
    rows: &[R],
    trailers: &[(&str, String)],
) -> Result<String, CliError> {
    let mut body = csv::Writer::from_writer(Vec::new());
    for row in rows {
        body.serialize(row)
            .map_err(|e| CliError::Io(format!("csv serialization failed: {e}")))?;
    }
    let body = String::from_utf8(
        body.into_inner()
            .map_err(|e| CliError::Io(format!("csv flush failed: {e}")))?,
    )
    .expect("csv output is utf-8");
    let mut doc = config_comment(config)?;
    doc.push('\n');
    doc.push_str(&body);
    for (name, json) in trailers {
        doc.push_str(&format!("# {name} {json}\n"));
    }
    Ok(doc)
}

/// JSON document with stable key order:
/// `{tool, version, config, <sections...>}`.
pub fn json_document(
    config: &ExperimentConfig,
    sections: &[(&str, serde_json::Value)],
) -> Result<String, CliError> {
    let mut root = serde_json::Map::new();
    root.insert("tool".into(), serde_json::Value::String(TOOL.into()));
    root.insert(
        "version".into(),
        serde_json::Value::String(version().into()),
    );
    root.insert(
        "config".into(),
        serde_json::to_value(config)
            .map_err(|e| CliError::Numerical(format!("config serialization failed: {e}")))?,
    );
    for (name, value) in sections {
        root.insert((*name).into(), value.clone());
    }
    let mut doc = serde_json::to_string_pretty(&serde_json::Value::Object(root))
        .map_err(|e| CliError::Numerical(format!("json serialization failed: {e}")))?;
    doc.push('\n');
    Ok(doc)
}

/// Write to the configured destination: the file if one was given, else
/// standard output.
pub fn emit(out: Option<&str>, document: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, document)?;
            eprintln!("wrote {path}");
            Ok(())
        }
        None => {
            print!("{document}");
            Ok(())
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))
}
