use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DatasetSpec;
use crate::attack::{AttackMode, GaConfig};
use crate::downstream::LogisticConfig;
use crate::embed::{DeepWalkConfig, EmbedderConfig};
use crate::error::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "EDA_OUTPUT_DIR";
const FALLBACK_OUTPUT_DIR: &str = "eda-output";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Eda,
    Ra,
    Dice,
    Dba,
    Gda,
}

impl AttackKind {
    pub const ALL: [AttackKind; 5] = [AttackKind::Eda, AttackKind::Ra, AttackKind::Dice, AttackKind::Dba, AttackKind::Gda];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::Eda => "eda",
            AttackKind::Ra => "ra",
            AttackKind::Dice => "dice",
            AttackKind::Dba => "dba",
            AttackKind::Gda => "gda",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown attack `{s}`")))
    }
}

/// Downstream evaluations. `LrF1` produces two rows, micro and macro.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    KmeansNmi,
    LrF1,
    LpaNmi,
    EmNmi,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::KmeansNmi, Metric::LrF1, Metric::LpaNmi, Metric::EmNmi];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::KmeansNmi => "kmeans_nmi",
            Metric::LrF1 => "lr_f1",
            Metric::LpaNmi => "lpa_nmi",
            Metric::EmNmi => "em_nmi",
        }
    }

    /// `metric_name` values this metric writes.
    pub fn row_names(self) -> &'static [&'static str] {
        match self {
            Metric::KmeansNmi => &["kmeans_nmi"],
            Metric::LrF1 => &["lr_micro_f1", "lr_macro_f1"],
            Metric::LpaNmi => &["lpa_nmi"],
            Metric::EmNmi => &["em_nmi"],
        }
    }

    pub fn needs_embedding(self) -> bool {
        matches!(self, Metric::KmeansNmi | Metric::LrF1)
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown metric `{s}`")))
    }
}

/// One sweep, read from TOML.
///
/// `embedder` produces the embeddings the downstream metrics consume;
/// `attack_embedder` is the DeepWalk model that EDA and GDA score
/// candidates against. Keeping them apart is what transfer experiments vary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub embedder: EmbedderConfig,
    #[serde(default)]
    pub attack_embedder: DeepWalkConfig,
    pub attacks: Vec<AttackKind>,
    /// Fractions of `|E|`, each in `(0, 1]`.
    pub budgets: Vec<f64>,
    #[serde(default = "default_modes")]
    pub modes: Vec<AttackMode>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub ga: GaConfig,
    /// GDA candidate count; `20 * count` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gda_candidates: Option<usize>,
    #[serde(default)]
    pub logistic: LogisticConfig,
    #[serde(default = "default_restarts")]
    pub kmeans_restarts: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_lpa_iters")]
    pub lpa_max_iters: usize,
    /// Concurrent tasks; 0 uses every core.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_modes() -> Vec<AttackMode> {
    vec![AttackMode::Rewire]
}

fn default_repetitions() -> usize {
    10
}

fn default_restarts() -> usize {
    10
}

fn default_train_fraction() -> f64 {
    0.8
}

fn default_lpa_iters() -> usize {
    100
}

fn default_workers() -> usize {
    1
}

impl ExperimentConfig {
    /// Minimal config: bundled dataset, defaults everywhere else.
    pub fn new(dataset: DatasetSpec, attacks: Vec<AttackKind>, budgets: Vec<f64>, metrics: Vec<Metric>) -> Self {
        ExperimentConfig {
            dataset,
            embedder: EmbedderConfig::default(),
            attack_embedder: DeepWalkConfig::default(),
            attacks,
            budgets,
            modes: default_modes(),
            repetitions: default_repetitions(),
            metrics,
            master_seed: 0,
            output_dir: None,
            ga: GaConfig::default(),
            gda_candidates: None,
            logistic: LogisticConfig::default(),
            kmeans_restarts: default_restarts(),
            train_fraction: default_train_fraction(),
            lpa_max_iters: default_lpa_iters(),
            workers: default_workers(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative dataset and output paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.dataset.resolve_paths(base);
        if let Some(out) = &mut cfg.output_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.attacks.is_empty() || self.metrics.is_empty() || self.modes.is_empty() {
            return Err(Error::validation("attacks, metrics and modes must be non-empty"));
        }
        if self.budgets.is_empty() || self.budgets.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::validation("budget fractions must lie in (0, 1]"));
        }
        if self.repetitions == 0 {
            return Err(Error::validation("repetitions must be at least 1"));
        }
        if self.kmeans_restarts == 0 || self.lpa_max_iters == 0 {
            return Err(Error::validation("kmeans_restarts and lpa_max_iters must be positive"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::validation("train_fraction must lie in (0, 1)"));
        }
        self.ga.validate()?;
        self.attack_embedder.validate()
    }

    /// `output_dir`, else `$EDA_OUTPUT_DIR`, else `./eda-output`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT_DIR))
    }
}
