//! Run parameters: command-line flags merged over an optional TOML file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Every parameter any subcommand understands. A config file uses the same
/// keys (snake_case); flags win over the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Group: z^d, free:k or heisenberg.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    /// Exponent p > 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Larger exponent p' (zexample).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pprime: Option<f64>,
    /// Dimension parameter d (sobolev, isoperimetric).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Comma-separated exponents t ≥ 2 (meanvalue).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    /// Radius of the removed ball (harmonic).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removal_radius: Option<usize>,
    /// Neumann terms K (harmonic).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    /// auto, explicit or quotient (harmonic).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    /// Summation length N (zexample).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// Relative Cauchy tolerance for the tail (zexample).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// sd or pd (sobolev).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// balls, boxes or random (isoperimetric).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// Number of random sets (isoperimetric).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Rerun on this smaller radius and require a stable constant.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_radius: Option<usize>,
    /// Largest allowed ratio between the two constants.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_limit: Option<f64>,
    /// Fail when the empirical constant exceeds this.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<f64>,
    /// JSON file with `values` on the ball (solve, decompose).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Solver gradient tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing_eps: Option<f64>,
    /// Random start for the solver instead of zero.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_seed: Option<u64>,
    /// Comma-separated criterion numbers (reproduce-all).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub only: Option<Vec<usize>>,
    /// Format of the main output.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Main output path (stdout when absent).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Extra CSV output path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// `self` over `base`, key by key.
    pub fn over(self, base: RunConfig) -> Result<Self> {
        let mut merged = serde_json::to_value(base)?;
        let top = serde_json::to_value(self)?;
        if let (Value::Object(m), Value::Object(t)) = (&mut merged, top) {
            m.extend(t);
        }
        Ok(serde_json::from_value(merged)?)
    }

    fn keys(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Rejects parameters the subcommand does not use.
    pub fn restrict(&self, command: &str, allowed: &[&str]) -> Result<()> {
        const ALWAYS: [&str; 3] = ["format", "out", "csv"];
        for k in self.keys() {
            if !allowed.contains(&k.as_str()) && !ALWAYS.contains(&k.as_str()) {
                bail!("'{command}' does not take '{k}'");
            }
        }
        Ok(())
    }
}

pub fn required<T: Clone>(value: &Option<T>, name: &str) -> Result<T> {
    match value {
        Some(v) => Ok(v.clone()),
        None => bail!("missing required parameter --{}", name.replace('_', "-")),
    }
}
