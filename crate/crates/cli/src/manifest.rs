//! Experiment manifests and configuration layering.
//!
//! Precedence, highest first: command-line flags, `TIMT_*` environment
//! variables, the manifest file, built-in defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use timt_core::grpo::KlMode;
use timt_core::{CurriculumStrategy, RewardMode, TaskLayout, TrainerConfig};

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid value `{value}` for {key}")]
    BadOverride { key: String, value: String },
}

/// One training run. Relative paths resolve against the manifest's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub name: String,
    pub dataset_path: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub config: TrainerConfig,
}

impl ExperimentManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ManifestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        let mut manifest: ExperimentManifest =
            toml::from_str(&text).map_err(|source| ManifestError::Invalid {
                path: path.to_path_buf(),
                source,
            })?;
        let base = path.parent().unwrap_or(Path::new(""));
        manifest.dataset_path = base.join(&manifest.dataset_path);
        manifest.output_dir = base.join(&manifest.output_dir);
        Ok(manifest)
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        let c = &mut self.config;
        if let Some(v) = overrides.seed {
            c.seed = v;
        }
        if let Some(v) = overrides.max_steps {
            c.max_steps = v;
        }
        if let Some(v) = overrides.layout {
            c.layout = v;
        }
        if let Some(v) = &overrides.reward_mode {
            c.reward_mode = v.clone();
        }
        if let Some(v) = overrides.curriculum {
            c.curriculum = v;
        }
        if let Some(v) = overrides.kl_mode {
            c.kl_mode = v;
        }
        if let Some(v) = &overrides.output_dir {
            self.output_dir = v.clone();
        }
    }
}

/// Optional settings from one configuration layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_steps: Option<usize>,
    pub layout: Option<TaskLayout>,
    pub reward_mode: Option<RewardMode>,
    pub curriculum: Option<CurriculumStrategy>,
    pub kl_mode: Option<KlMode>,
    pub output_dir: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, value: Option<String>) -> Result<Option<T>, ManifestError> {
    value
        .map(|v| {
            v.trim().parse().map_err(|_| ManifestError::BadOverride {
                key: key.to_string(),
                value: v.clone(),
            })
        })
        .transpose()
}

fn parse_kl_mode(key: &str, value: Option<String>) -> Result<Option<KlMode>, ManifestError> {
    value
        .map(|v| match v.trim() {
            "estimator" => Ok(KlMode::Estimator),
            "exact" => Ok(KlMode::Exact),
            _ => Err(ManifestError::BadOverride {
                key: key.to_string(),
                value: v.clone(),
            }),
        })
        .transpose()
}

impl Overrides {
    /// Reads `TIMT_SEED`, `TIMT_MAX_STEPS`, `TIMT_LAYOUT`, `TIMT_REWARD_MODE`,
    /// `TIMT_CURRICULUM`, `TIMT_KL_MODE` and `TIMT_OUTPUT_DIR` through `var`.
    pub fn from_env(var: impl Fn(&str) -> Option<String>) -> Result<Self, ManifestError> {
        Ok(Overrides {
            seed: parse("TIMT_SEED", var("TIMT_SEED"))?,
            max_steps: parse("TIMT_MAX_STEPS", var("TIMT_MAX_STEPS"))?,
            layout: parse("TIMT_LAYOUT", var("TIMT_LAYOUT"))?,
            reward_mode: parse("TIMT_REWARD_MODE", var("TIMT_REWARD_MODE"))?,
            curriculum: parse("TIMT_CURRICULUM", var("TIMT_CURRICULUM"))?,
            kl_mode: parse_kl_mode("TIMT_KL_MODE", var("TIMT_KL_MODE"))?,
            output_dir: var("TIMT_OUTPUT_DIR").map(PathBuf::from),
        })
    }

    pub fn process_env() -> Result<Self, ManifestError> {
        Self::from_env(|k| std::env::var(k).ok())
    }

    pub fn parse_kl_mode(value: &str) -> Result<KlMode, ManifestError> {
        parse_kl_mode("--kl-mode", Some(value.to_string())).map(|m| m.expect("value given"))
    }
}
