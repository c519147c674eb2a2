//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::Schema;
use crate::error::{Error, Result};
use crate::harness::generator::BiasSpec;
use crate::optim::AdamConfig;
use crate::stage1::PenaltyConfig;
use crate::stage2::{BudgetSplit, DpConfig};

/// Where the records come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    File {
        path: PathBuf,
        #[serde(flatten)]
        schema: Schema,
    },
    Synthetic {
        #[serde(default)]
        spec: BiasSpec,
        #[serde(default = "default_generator_seed")]
        seed: u64,
    },
}

fn default_generator_seed() -> u64 {
    7
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic {
            spec: BiasSpec::default(),
            seed: default_generator_seed(),
        }
    }
}

/// Stage-2 output size per client.
///
/// A fraction `f` resolves to `floor(f · N)` with `N` the client's training
/// size, and never below 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Ns2Setting {
    Fraction(f64),
    Absolute(usize),
}

impl Ns2Setting {
    pub fn resolve(self, train_len: usize) -> usize {
        match self {
            Ns2Setting::Fraction(f) => ((f * train_len as f64).floor() as usize).max(1),
            Ns2Setting::Absolute(n) => n,
        }
    }

    /// Human label: `100%`, `10%` or the absolute size.
    pub fn label(self) -> String {
        match self {
            Ns2Setting::Fraction(f) => format!("{}%", percent(f)),
            Ns2Setting::Absolute(n) => n.to_string(),
        }
    }

    /// File- and column-safe key: `100pct`, `10pct` or `n832`.
    pub fn key(self) -> String {
        match self {
            Ns2Setting::Fraction(f) => format!("{}pct", percent(f)),
            Ns2Setting::Absolute(n) => format!("n{n}"),
        }
    }
}

// `0.1 * 100.0` is not exactly 10; round away the representation error.
fn percent(f: f64) -> f64 {
    (f * 100.0 * 1e9).round() / 1e9
}

/// Stage-2 privacy settings shared by every cell. The per-cell output size
/// comes from `ns2`, the seed from the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpSettings {
    pub epsilon: f64,
    pub delta: f64,
    pub clip_bound: f64,
    pub budget_split: BudgetSplit,
    pub ns2: Vec<Ns2Setting>,
}

impl Default for DpSettings {
    fn default() -> Self {
        let base = DpConfig::with_size(1);
        Self {
            epsilon: base.epsilon,
            delta: base.delta,
            clip_bound: base.clip_bound,
            budget_split: base.budget_split,
            ns2: vec![Ns2Setting::Fraction(1.0), Ns2Setting::Fraction(0.1)],
        }
    }
}

impl DpSettings {
    pub fn config(&self, ns2: usize, seed: u64) -> DpConfig {
        DpConfig {
            epsilon: self.epsilon,
            delta: self.delta,
            ns2,
            clip_bound: self.clip_bound,
            budget_split: self.budget_split,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    /// Client count `K`.
    pub clients: usize,
    /// Base seed; every partition, split and stage seed derives from it.
    pub seed: u64,
    pub train_fraction: f64,
    /// Append a constant-1 feature after standardization.
    pub intercept: bool,
    /// Penalty weights to sweep; each overrides `penalty.rho_o`.
    pub rho: Vec<f64>,
    pub penalty: PenaltyConfig,
    pub adam: AdamConfig,
    pub dp: DpSettings,
    /// Round count `t` for the iterative-training comparison figure.
    pub communication_rounds: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::default(),
            clients: 2,
            seed: 0,
            train_fraction: 0.8,
            intercept: false,
            rho: vec![0.0, 10.0, 100.0, 1000.0, 10000.0],
            penalty: PenaltyConfig::default(),
            adam: AdamConfig::default(),
            dp: DpSettings::default(),
            communication_rounds: 100,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(msg));
        if self.clients == 0 {
            return err("client count must be at least 1".into());
        }
        if self.rho.is_empty() {
            return err("rho list must be nonempty".into());
        }
        if let Some(r) = self.rho.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return err(format!("rho values must be finite and >= 0, got {r}"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return err(format!("train fraction must lie in (0,1), got {}", self.train_fraction));
        }
        for setting in &self.dp.ns2 {
            match *setting {
                Ns2Setting::Fraction(f) if !(f > 0.0 && f.is_finite()) => {
                    return err(format!("ns2 fraction must be positive, got {f}"));
                }
                Ns2Setting::Absolute(0) => return err("ns2 must be positive".into()),
                _ => {}
            }
        }
        if let DataSource::Synthetic { spec, .. } = &self.data {
            spec.validate()?;
        }
        self.adam.validate()?;
        self.penalty.inner.validate()?;
        self.dp.config(1, 0).validate()
    }
}
