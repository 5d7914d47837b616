//! Transition dynamics of the three compartmental models.
//!
//! Every model builds a full length-`S` rate row for the current state and
//! converts it with [`rates_to_probs_in_place`], so the per-row cost is
//! `O(S)` for every model regardless of how many exits a state has.

use serde::{Deserialize, Serialize};

use crate::chmm::{rates_to_probs_in_place, Snapshot, State, TransitionProbRow};
use crate::error::{Error, Result};

fn check_rate(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// Susceptible (0) -> infective (1) -> recovered (2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirParams {
    /// Infection rate per infective per unit time.
    pub beta: f64,
    /// Recovery rate per unit time.
    pub gamma: f64,
}

impl SirParams {
    pub const SUSCEPTIBLE: State = 0;
    pub const INFECTIVE: State = 1;
    pub const RECOVERED: State = 2;

    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        let p = Self { beta, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("beta", self.beta)?;
        check_rate("gamma", self.gamma)
    }

    fn fill_rates(&self, from: State, counts: &[usize], rates: &mut [f64]) {
        rates.fill(0.0);
        match from {
            Self::SUSCEPTIBLE => rates[Self::INFECTIVE] = self.beta * counts[Self::INFECTIVE] as f64,
            Self::INFECTIVE => rates[Self::RECOVERED] = self.gamma,
            _ => {}
        }
    }
}

/// Susceptible (0) -> exposed stages `1..=S_E` -> infective (`S_E + 1`) ->
/// recovered (`S_E + 2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeirParams {
    pub beta: f64,
    /// Progression rate out of each exposed stage; its length is `S_E`.
    pub sigmas: Vec<f64>,
    pub gamma: f64,
}

impl SeirParams {
    pub fn new(beta: f64, sigmas: Vec<f64>, gamma: f64) -> Result<Self> {
        let p = Self { beta, sigmas, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Every stage progresses at `S_E / 10`.
    pub fn with_uniform_stages(beta: f64, num_exposed_steps: usize, gamma: f64) -> Result<Self> {
        let sigma = num_exposed_steps as f64 / 10.0;
        Self::new(beta, vec![sigma; num_exposed_steps], gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() {
            return Err(Error::InvalidParameter("need at least one exposed stage".into()));
        }
        check_rate("beta", self.beta)?;
        check_rate("gamma", self.gamma)?;
        for (i, &s) in self.sigmas.iter().enumerate() {
            check_rate(&format!("sigma[{}]", i + 1), s)?;
        }
        Ok(())
    }

    pub fn num_exposed_steps(&self) -> usize {
        self.sigmas.len()
    }

    pub fn infective(&self) -> State {
        self.sigmas.len() + 1
    }

    pub fn recovered(&self) -> State {
        self.sigmas.len() + 2
    }

    fn fill_rates(&self, from: State, counts: &[usize], rates: &mut [f64]) {
        rates.fill(0.0);
        let infective = self.infective();
        if from == 0 {
            rates[1] = self.beta * counts[infective] as f64;
        } else if from < infective {
            rates[from + 1] = self.sigmas[from - 1];
        } else if from == infective {
            rates[from + 1] = self.gamma;
        }
    }
}

/// Susceptible (0) and strains `1..=S_I`. Infectives return to susceptible
/// or switch strain at a rate reduced by `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStrainParams {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub delta: f64,
}

impl MultiStrainParams {
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>, delta: f64) -> Result<Self> {
        let p = Self { betas, gammas, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() || self.betas.len() != self.gammas.len() {
            return Err(Error::InvalidParameter(format!(
                "need one beta and one gamma per strain, got {} and {}",
                self.betas.len(),
                self.gammas.len()
            )));
        }
        for (i, (&b, &g)) in self.betas.iter().zip(&self.gammas).enumerate() {
            check_rate(&format!("beta[{}]", i + 1), b)?;
            check_rate(&format!("gamma[{}]", i + 1), g)?;
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in [0, 1], got {}",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn num_strains(&self) -> usize {
        self.betas.len()
    }

    fn fill_rates(&self, from: State, counts: &[usize], rates: &mut [f64]) {
        rates.fill(0.0);
        let force = |k: usize| self.betas[k - 1] * counts[k] as f64;
        if from == 0 {
            for k in 1..rates.len() {
                rates[k] = force(k);
            }
        } else {
            rates[0] = self.gammas[from - 1];
            for k in (1..rates.len()).filter(|&k| k != from) {
                rates[k] = self.delta * force(k);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Dynamics {
    Sir(SirParams),
    Seir(SeirParams),
    MultiStrain(MultiStrainParams),
}

impl Dynamics {
    pub fn validate(&self) -> Result<()> {
        match self {
            Dynamics::Sir(p) => p.validate(),
            Dynamics::Seir(p) => p.validate(),
            Dynamics::MultiStrain(p) => p.validate(),
        }
    }

    pub fn num_states(&self) -> usize {
        match self {
            Dynamics::Sir(_) => 3,
            Dynamics::Seir(p) => p.num_exposed_steps() + 3,
            Dynamics::MultiStrain(p) => p.num_strains() + 1,
        }
    }

    /// States that count as infected for diagnostic testing.
    pub fn infective_states(&self) -> Vec<State> {
        match self {
            Dynamics::Sir(_) => vec![SirParams::INFECTIVE],
            Dynamics::Seir(p) => vec![p.infective()],
            Dynamics::MultiStrain(p) => (1..=p.num_strains()).collect(),
        }
    }

    /// Whether the states are linearly ordered, so that ordered jump
    /// distances are meaningful.
    pub fn is_linear(&self) -> bool {
        !matches!(self, Dynamics::MultiStrain(_))
    }

    /// Full rate row of `from` given per-state counts at the current time.
    pub fn rate_row(&self, from: State, counts: &[usize], rates: &mut [f64]) {
        debug_assert_eq!(rates.len(), self.num_states());
        match self {
            Dynamics::Sir(p) => p.fill_rates(from, counts, rates),
            Dynamics::Seir(p) => p.fill_rates(from, counts, rates),
            Dynamics::MultiStrain(p) => p.fill_rates(from, counts, rates),
        }
        rates[from] = -rates.iter().sum::<f64>();
    }

    /// One-step transition probabilities of `from` given per-state counts.
    #[inline]
    pub fn transition_probs(&self, from: State, counts: &[usize], out: &mut [f64]) {
        self.rate_row(from, counts, out);
        rates_to_probs_in_place(out, from).expect("validated parameters give valid rate rows");
    }

    /// Parameter vector used by the parameter-update hook: the rates in a
    /// fixed order (`beta, gamma`; `beta, sigmas.., gamma`;
    /// `betas.., gammas.., delta`).
    pub fn parameters(&self) -> Vec<f64> {
        match self {
            Dynamics::Sir(p) => vec![p.beta, p.gamma],
            Dynamics::Seir(p) => std::iter::once(p.beta)
                .chain(p.sigmas.iter().copied())
                .chain(std::iter::once(p.gamma))
                .collect(),
            Dynamics::MultiStrain(p) => p
                .betas
                .iter()
                .chain(&p.gammas)
                .copied()
                .chain(std::iter::once(p.delta))
                .collect(),
        }
    }

    /// Inverse of [`Dynamics::parameters`]; validates the result.
    pub fn with_parameters(&self, values: &[f64]) -> Result<Self> {
        let expected = self.parameters().len();
        if values.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "expected {expected} parameters, got {}",
                values.len()
            )));
        }
        let out = match self {
            Dynamics::Sir(_) => Dynamics::Sir(SirParams::new(values[0], values[1])?),
            Dynamics::Seir(_) => {
                let k = values.len() - 2;
                Dynamics::Seir(SeirParams::new(values[0], values[1..=k].to_vec(), values[k + 1])?)
            }
            Dynamics::MultiStrain(p) => {
                let k = p.num_strains();
                Dynamics::MultiStrain(MultiStrainParams::new(
                    values[..k].to_vec(),
                    values[k..2 * k].to_vec(),
                    values[2 * k],
                )?)
            }
        };
        Ok(out)
    }
}

fn row_for(dynamics: &Dynamics, current: State, snapshot: &Snapshot<'_>) -> Result<TransitionProbRow> {
    let s = dynamics.num_states();
    if current >= s || snapshot.counts.len() != s {
        return Err(Error::DimensionMismatch(format!(
            "state {} or snapshot with {} counts does not fit a {s}-state model",
            current + 1,
            snapshot.counts.len()
        )));
    }
    let mut row = vec![0.0; s];
    dynamics.rate_row(current, snapshot.counts, &mut row);
    rates_to_probs_in_place(&mut row, current)?;
    TransitionProbRow::new(row)
}

/// SIR transition probabilities of `current` given the time-`t` snapshot.
pub fn sir_transition_row(
    current: State,
    snapshot: &Snapshot<'_>,
    params: &SirParams,
) -> Result<TransitionProbRow> {
    row_for(&Dynamics::Sir(params.clone()), current, snapshot)
}

pub fn seir_transition_row(
    current: State,
    snapshot: &Snapshot<'_>,
    params: &SeirParams,
) -> Result<TransitionProbRow> {
    row_for(&Dynamics::Seir(params.clone()), current, snapshot)
}

pub fn multistrain_transition_row(
    current: State,
    snapshot: &Snapshot<'_>,
    params: &MultiStrainParams,
) -> Result<TransitionProbRow> {
    row_for(&Dynamics::MultiStrain(params.clone()), current, snapshot)
}
