use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{io_error, HarnessError};
use crate::airl::AirlConfig;
use crate::env::{EnvSpec, Mode};
use crate::ppo::TrainingConfig;

/// One experiment, loaded from a TOML file:
///
/// ```toml
/// seed = 7
/// mode = "open"
/// output_dir = "runs/uff-2"
/// demonstrations = "experts.jsonl"
///
/// [env]
/// kind = "uff"
/// max_agents = 2
///
/// [ppo]
/// total_steps = 200000
///
/// [irl]
/// discriminator_epochs = 2
/// ```
///
/// `seed` and `mode` live only at the top level and are applied to the environment and
/// both trainers. Relative paths are resolved against the config file's directory.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub spec: EnvSpec,
    pub mode: Mode,
    pub seed: u64,
    pub training: TrainingConfig,
    /// IRL settings; `irl.ppo` equals `training`.
    pub irl: AirlConfig,
    pub output_dir: PathBuf,
    pub demonstrations: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    mode: Mode,
    output_dir: PathBuf,
    demonstrations: Option<PathBuf>,
    env: EnvSpec,
    #[serde(default)]
    ppo: TrainingConfig,
    #[serde(default)]
    irl: AirlConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        for (section, key) in [("env", "mode"), ("ppo", "mode"), ("ppo", "seed")] {
            if table.get(section).and_then(|s| s.get(key)).is_some() {
                return Err(HarnessError::Config(format!(
                    "set `{key}` at the top level, not in [{section}]"
                )));
            }
        }
        let raw: Raw = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;

        let spec = raw.env.with_mode(raw.mode);
        spec.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        let training = TrainingConfig {
            seed: raw.seed,
            mode: raw.mode,
            ..raw.ppo
        };
        let irl = AirlConfig {
            ppo: training.clone(),
            ..raw.irl
        };
        irl.validate().map_err(|e| HarnessError::Config(e.to_string()))?;

        let demonstrations = raw.demonstrations.map(|p| base_dir.join(p));
        if let Some(p) = &demonstrations {
            if !p.is_file() {
                return Err(HarnessError::Config(format!("demonstrations {} not found", p.display())));
            }
        }
        Ok(Self {
            spec,
            mode: raw.mode,
            seed: raw.seed,
            training,
            irl,
            output_dir: base_dir.join(raw.output_dir),
            demonstrations,
        })
    }
}
