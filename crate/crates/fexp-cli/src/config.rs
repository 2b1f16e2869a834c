//! Experiment configuration: a JSON config file provides base values and
//! command-line flags override field by field. The fully resolved
//! configuration is echoed into every output file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use fexp_core::exponents::FbBudgetConvention;
use fexp_core::schemes::{SchemeConfig, SchemeKind, TiltSpec};
use fexp_core::ChannelParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved configuration of one run; serialized into every output.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub params: ChannelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tilt: Option<TiltSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_fb_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_nofb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_fb: Option<f64>,
    pub fb_budget: FbBudgetConvention,
    pub format: OutputFormat,
    pub quick: bool,
}

/// The JSON config file: every field optional, flags win on conflict.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub p: Option<f64>,
    pub sigma2: Option<f64>,
    pub p_fb: Option<f64>,
    pub sigma2_fb: Option<f64>,
    pub scheme: Option<SchemeKind>,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub delta_fb_power: Option<f64>,
    pub threshold_coeff: Option<f64>,
    pub n_list: Option<Vec<usize>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub tilt: Option<String>,
    pub e_nofb: Option<f64>,
    pub eps: Option<f64>,
    pub eps_fb: Option<f64>,
    pub fb_budget: Option<FbBudgetConvention>,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
    pub quick: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Values shared by every command after merging file and flags.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ChannelParams,
    pub scheme_kind: Option<SchemeKind>,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub delta_fb_power: Option<f64>,
    pub threshold_coeff: f64,
    pub n_list: Vec<usize>,
    pub trials: Option<u64>,
    pub seed: u64,
    pub tilt: Option<TiltSpec>,
    pub e_nofb: Option<f64>,
    pub eps: Option<f64>,
    pub eps_fb: Option<f64>,
    pub fb_budget: FbBudgetConvention,
    pub out: Option<String>,
    pub format: OutputFormat,
    pub quick: bool,
}

pub fn parse_tilt(text: &str) -> Result<TiltSpec, CliError> {
    let mut shifts = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (idx, shift) = part.split_once(':').ok_or_else(|| {
            CliError::usage(format!("tilt entry '{part}' must look like coord:shift"))
        })?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad tilt coordinate in '{part}'")))?;
        let shift: f64 = shift
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad tilt shift in '{part}'")))?;
        shifts.push((idx, shift));
    }
    if shifts.is_empty() {
        return Err(CliError::usage("tilt specification is empty"));
    }
    Ok(TiltSpec::forward(shifts))
}

impl Resolved {
    /// Build the scheme configuration for commands that need one.
    pub fn scheme(&self) -> Result<SchemeConfig, CliError> {
        let kind = self
            .scheme_kind
            .ok_or_else(|| CliError::usage("a --scheme is required for this command"))?;
        let n = self
            .n
            .ok_or_else(|| CliError::usage("a blocklength --n is required"))?;
        self.scheme_with_n(kind, n)
    }

    pub fn scheme_with_n(&self, kind: SchemeKind, n: usize) -> Result<SchemeConfig, CliError> {
        let delta = self.delta.unwrap_or(0.0);
        let dp = self.delta_fb_power.unwrap_or(0.0);
        let cfg = match kind {
            SchemeKind::NoFeedback => SchemeConfig::no_feedback(n),
            SchemeKind::AsScheme => SchemeConfig::as_scheme(n, delta),
            SchemeKind::BuildingBlock => SchemeConfig::building_block(n, delta, dp),
            SchemeKind::ThreePhase => SchemeConfig::three_phase(n, delta, dp),
        }
        .with_threshold_coeff(self.threshold_coeff);
        cfg.validate(&self.params).map_err(CliError::from)?;
        Ok(cfg)
    }

    pub fn experiment(&self, command: &str, scheme: Option<SchemeConfig>) -> ExperimentConfig {
        ExperimentConfig {
            command: command.to_string(),
            params: self.params,
            scheme,
            n_list: self.n_list.clone(),
            trials: self.trials.unwrap_or(0),
            seed: self.seed,
            tilt: self.tilt.clone(),
            delta: self.delta,
            delta_fb_power: self.delta_fb_power,
            e_nofb: self.e_nofb,
            eps: self.eps,
            eps_fb: self.eps_fb,
            fb_budget: self.fb_budget,
            format: self.format,
            quick: self.quick,
        }
    }
}
