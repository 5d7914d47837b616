//! TOML run configuration and the built-in study presets.
//!
//! State indices in configuration files are 1-based, matching the CSV
//! formats; they are converted to 0-based indices when the model is built.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chain::{KernelKind, SamplerSettings};
use crate::error::{Error, Result};
use crate::models::{
    DiagnosticTestModel, Dynamics, EpidemicModel, InitialStates, MultiStrainParams, ObservationModel,
    RecoveryTimeModel, SeirParams, SirParams,
};

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 4] = ["sir-5.2", "seir-5.3", "sis-5.4", "sir-recovery-s3.2"];

/// Everything needed to simulate, fit and benchmark one study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; per-purpose streams are derived from it.
    pub seed: u64,
    pub num_timepoints: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    pub observation: ObservationConfig,
    pub sampler: SamplerSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkConfig>,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub num_individuals: usize,
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
}

/// Transmission dynamics. Rates are per unit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DynamicsConfig {
    Sir {
        beta: f64,
        gamma: f64,
    },
    Seir {
        beta: f64,
        gamma: f64,
        exposed_stages: usize,
        /// Progression rate of every exposed stage; defaults to
        /// `exposed_stages / 10`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    MultiStrain {
        strains: usize,
        /// Transmission rate of every strain.
        beta: f64,
        /// Recovery rate of every strain.
        gamma: f64,
        delta: f64,
    },
}

impl DynamicsConfig {
    pub fn build(&self) -> Result<Dynamics> {
        Ok(match *self {
            DynamicsConfig::Sir { beta, gamma } => Dynamics::Sir(SirParams::new(beta, gamma)?),
            DynamicsConfig::Seir {
                beta,
                gamma,
                exposed_stages,
                sigma,
            } => {
                let sigma = sigma.unwrap_or(exposed_stages as f64 / 10.0);
                Dynamics::Seir(SeirParams::new(beta, vec![sigma; exposed_stages], gamma)?)
            }
            DynamicsConfig::MultiStrain {
                strains,
                beta,
                gamma,
                delta,
            } => Dynamics::MultiStrain(MultiStrainParams::new(
                vec![beta; strains],
                vec![gamma; strains],
                delta,
            )?),
        })
    }

    /// The same dynamics resized to `num_states` states by changing the
    /// number of exposed stages or strains. An explicit SEIR `sigma` is
    /// kept; the default follows the new stage count.
    pub fn with_num_states(&self, num_states: usize) -> Result<Self> {
        let too_small = |min: usize| {
            Error::InvalidConfig(format!(
                "{num_states} states is below the minimum of {min} for this model"
            ))
        };
        Ok(match self.clone() {
            DynamicsConfig::Sir { .. } if num_states == 3 => self.clone(),
            DynamicsConfig::Sir { .. } => return Err(Error::InvalidConfig("SIR always has 3 states".into())),
            DynamicsConfig::Seir {
                beta, gamma, sigma, ..
            } => {
                if num_states < 4 {
                    return Err(too_small(4));
                }
                DynamicsConfig::Seir {
                    beta,
                    gamma,
                    exposed_stages: num_states - 3,
                    sigma,
                }
            }
            DynamicsConfig::MultiStrain {
                beta, gamma, delta, ..
            } => {
                if num_states < 2 {
                    return Err(too_small(2));
                }
                DynamicsConfig::MultiStrain {
                    strains: num_states - 1,
                    beta,
                    gamma,
                    delta,
                }
            }
        })
    }
}

/// Initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    /// The first individuals start in the listed states and everyone else
    /// is susceptible. Without `states`, one individual starts in each
    /// infective state.
    IndexCases {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        states: Option<Vec<usize>>,
    },
    /// One state per individual.
    Fixed { states: Vec<usize> },
    /// Every individual draws from the same distribution over states.
    Shared { probs: Vec<f64> },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::IndexCases { states: None }
    }
}

fn zero_based(states: &[usize], what: &str) -> Result<Vec<usize>> {
    states
        .iter()
        .map(|&s| {
            s.checked_sub(1)
                .ok_or_else(|| Error::InvalidConfig(format!("{what}: states are numbered from 1")))
        })
        .collect()
}

impl InitialConfig {
    fn build(&self, dynamics: &Dynamics, num_individuals: usize) -> Result<InitialStates> {
        Ok(match self {
            InitialConfig::IndexCases { states } => {
                let cases = match states {
                    Some(s) => zero_based(s, "initial index cases")?,
                    None => dynamics.infective_states(),
                };
                if cases.len() > num_individuals {
                    return Err(Error::InvalidConfig(format!(
                        "{} index cases for {num_individuals} individuals",
                        cases.len()
                    )));
                }
                InitialStates::index_cases(num_individuals, &cases)
            }
            InitialConfig::Fixed { states } => InitialStates::Fixed(zero_based(states, "initial states")?),
            InitialConfig::Shared { probs } => InitialStates::Shared(probs.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservationConfig {
    None,
    /// Diagnostic tests; `target_states` (1-based) defaults to the
    /// infective states.
    Test {
        sensitivity: f64,
        specificity: f64,
        test_probability: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_states: Option<Vec<usize>>,
    },
    /// Known recovery times (SIR only).
    RecoveryTimes,
}

impl ObservationConfig {
    fn build(&self, dynamics: &Dynamics) -> Result<ObservationModel> {
        Ok(match self {
            ObservationConfig::None => ObservationModel::None,
            ObservationConfig::Test {
                sensitivity,
                specificity,
                test_probability,
                target_states,
            } => ObservationModel::Test(DiagnosticTestModel {
                sensitivity: *sensitivity,
                specificity: *specificity,
                test_probability: *test_probability,
                target_states: match target_states {
                    Some(s) => zero_based(s, "test target states")?,
                    None => dynamics.infective_states(),
                },
            }),
            ObservationConfig::RecoveryTimes => ObservationModel::RecoveryTimes(RecoveryTimeModel::default()),
        })
    }
}

/// Sweep over model sizes for the scaling study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Numbers of states `S` to run.
    pub num_states: Vec<usize>,
    pub kernels: Vec<KernelKind>,
    pub iterations: usize,
    pub updates_per_iteration: usize,
}

/// Settings of the enumeration cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Latent updates per kernel.
    pub updates: usize,
    /// Kernels to check; every applicable kernel when empty.
    pub kernels: Vec<KernelKind>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            updates: 1_000_000,
            kernels: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Checks every section, building the model once.
    pub fn validate(&self) -> Result<()> {
        if self.num_timepoints == 0 {
            return Err(Error::InvalidConfig("num_timepoints must be positive".into()));
        }
        self.build_model()?;
        self.sampler.validate()?;
        if let Some(b) = &self.benchmark {
            if b.num_states.is_empty() || b.kernels.is_empty() {
                return Err(Error::InvalidConfig(
                    "benchmark needs at least one size and one kernel".into(),
                ));
            }
            for &s in &b.num_states {
                self.with_num_states(s)?.build_model()?;
            }
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<EpidemicModel> {
        let m = &self.model;
        let dynamics = m.dynamics.build().map_err(config_error)?;
        let initial = m.initial.build(&dynamics, m.num_individuals)?;
        let observation = self.observation.build(&dynamics)?;
        EpidemicModel::new(dynamics, initial, observation, m.num_individuals).map_err(config_error)
    }

    /// A copy with the model resized to `num_states` states. Explicit index
    /// cases are kept, so they must remain valid states.
    pub fn with_num_states(&self, num_states: usize) -> Result<Self> {
        let mut out = self.clone();
        out.model.dynamics = self.model.dynamics.with_num_states(num_states)?;
        Ok(out)
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::InvalidConfig(_) => e,
        other => Error::InvalidConfig(other.to_string()),
    }
}

fn test_observation(sensitivity: f64, specificity: f64) -> ObservationConfig {
    ObservationConfig::Test {
        sensitivity,
        specificity,
        test_probability: 0.1,
        target_states: None,
    }
}

fn scaling_benchmark_config() -> BenchmarkConfig {
    BenchmarkConfig {
        num_states: (4..=10).collect(),
        kernels: vec![
            KernelKind::Rippler,
            KernelKind::RipplerDataInformed,
            KernelKind::Iffbs,
        ],
        iterations: 1000,
        updates_per_iteration: 10,
    }
}

/// A built-in study configuration.
pub fn preset(name: &str) -> Result<RunConfig> {
    let sir_model = ModelConfig {
        num_individuals: 100,
        dynamics: DynamicsConfig::Sir {
            beta: 1.0 / 80.0,
            gamma: 1.0 / 10.0,
        },
        initial: InitialConfig::default(),
    };
    let config = match name {
        "sir-5.2" => RunConfig {
            seed: 52,
            num_timepoints: 50,
            output_dir: None,
            model: sir_model,
            observation: test_observation(0.9, 0.9),
            sampler: SamplerSettings::new(KernelKind::Rippler, 10_000, 10),
            benchmark: None,
            oracle: OracleConfig::default(),
        },
        "seir-5.3" => RunConfig {
            seed: 53,
            num_timepoints: 100,
            output_dir: None,
            model: ModelConfig {
                num_individuals: 100,
                dynamics: DynamicsConfig::Seir {
                    beta: 1.0 / 50.0,
                    gamma: 1.0 / 20.0,
                    exposed_stages: 3,
                    sigma: None,
                },
                initial: InitialConfig::default(),
            },
            observation: test_observation(0.8, 0.95),
            sampler: SamplerSettings::new(KernelKind::Rippler, 1000, 10),
            benchmark: Some(scaling_benchmark_config()),
            oracle: OracleConfig::default(),
        },
        "sis-5.4" => RunConfig {
            seed: 54,
            num_timepoints: 50,
            output_dir: None,
            model: ModelConfig {
                num_individuals: 40,
                dynamics: DynamicsConfig::MultiStrain {
                    strains: 3,
                    beta: 1.0 / 100.0,
                    gamma: 1.0 / 10.0,
                    delta: 0.2,
                },
                initial: InitialConfig::default(),
            },
            observation: test_observation(0.8, 0.95),
            sampler: SamplerSettings::new(KernelKind::Rippler, 1000, 10),
            benchmark: Some(scaling_benchmark_config()),
            oracle: OracleConfig::default(),
        },
        "sir-recovery-s3.2" => RunConfig {
            seed: 32,
            num_timepoints: 50,
            output_dir: None,
            model: sir_model,
            observation: ObservationConfig::RecoveryTimes,
            sampler: SamplerSettings::new(KernelKind::RipplerDataInformed, 10_000, 10),
            benchmark: None,
            oracle: OracleConfig::default(),
        },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset `{other}`; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    config.validate()?;
    Ok(config)
}
