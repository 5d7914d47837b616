//! Observation models: imperfect diagnostic tests and partially-known
//! recovery times.

use serde::{Deserialize, Serialize};

use crate::chmm::{Observation, RecoveryCode, State};
use crate::error::{Error, Result};

/// A test that is positive with probability `sensitivity` in a target
/// state and negative with probability `specificity` otherwise. Each cell is
/// tested independently with probability `test_probability` when simulating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticTestModel {
    pub sensitivity: f64,
    pub specificity: f64,
    pub test_probability: f64,
    /// 0-based states counted as infected.
    pub target_states: Vec<State>,
}

impl DiagnosticTestModel {
    pub fn validate(&self, num_states: usize) -> Result<()> {
        for (name, v) in [
            ("sensitivity", self.sensitivity),
            ("specificity", self.specificity),
            ("test_probability", self.test_probability),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if self.target_states.is_empty() {
            return Err(Error::InvalidParameter("no target states for the test".into()));
        }
        if let Some(&s) = self.target_states.iter().find(|&&s| s >= num_states) {
            return Err(Error::InvalidParameter(format!(
                "target state {} outside 1..={num_states}",
                s + 1
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn is_target(&self, s: State) -> bool {
        self.target_states.contains(&s)
    }
}

/// `log f(y | s)` for a test result; `None` is a missing test.
pub fn test_loglik(y: Option<bool>, s: State, model: &DiagnosticTestModel) -> f64 {
    let p = match (y, model.is_target(s)) {
        (None, _) => return 0.0,
        (Some(true), true) => model.sensitivity,
        (Some(true), false) => 1.0 - model.specificity,
        (Some(false), true) => 1.0 - model.sensitivity,
        (Some(false), false) => model.specificity,
    };
    p.ln()
}

/// Roles of the three SIR states under the recovery-time encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryTimeModel {
    pub susceptible: State,
    pub infective: State,
    pub recovered: State,
}

impl Default for RecoveryTimeModel {
    fn default() -> Self {
        Self {
            susceptible: 0,
            infective: 1,
            recovered: 2,
        }
    }
}

/// Indicator likelihood of a recovery-time code: `0` when `s` is
/// compatible with `y`, `-inf` otherwise. Missing cells give `0`.
pub fn recovery_loglik(y: Option<RecoveryCode>, s: State, model: &RecoveryTimeModel) -> f64 {
    let compatible = match y {
        None => true,
        Some(RecoveryCode::Recovered) => s == model.recovered,
        Some(RecoveryCode::Infective) => s == model.infective,
        Some(RecoveryCode::SusceptibleOrInfective) => s == model.susceptible || s == model.infective,
    };
    if compatible {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

/// Encodes one trajectory as recovery-time observations: `I` at the step
/// before the first recovered time-point, `R` from then on and `S/I`
/// elsewhere.
pub fn encode_recovery(trajectory: &[State], model: &RecoveryTimeModel) -> Vec<RecoveryCode> {
    let mut codes = vec![RecoveryCode::SusceptibleOrInfective; trajectory.len()];
    if let Some(first) = trajectory.iter().position(|&s| s == model.recovered) {
        for c in &mut codes[first..] {
            *c = RecoveryCode::Recovered;
        }
        if first > 0 {
            codes[first - 1] = RecoveryCode::Infective;
        }
    }
    codes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObservationModel {
    None,
    Test(DiagnosticTestModel),
    RecoveryTimes(RecoveryTimeModel),
}

impl ObservationModel {
    pub fn name(&self) -> &'static str {
        match self {
            ObservationModel::None => "unobserved",
            ObservationModel::Test(_) => "diagnostic-test",
            ObservationModel::RecoveryTimes(_) => "recovery-time",
        }
    }

    pub fn loglik(&self, y: &Observation, s: State) -> f64 {
        match (self, y) {
            (ObservationModel::Test(m), Observation::Test(r)) => test_loglik(Some(*r), s, m),
            (ObservationModel::RecoveryTimes(m), Observation::Recovery(c)) => recovery_loglik(Some(*c), s, m),
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn check(&self, y: &Observation) -> Result<()> {
        let ok = matches!(
            (self, y),
            (ObservationModel::Test(_), Observation::Test(_))
                | (ObservationModel::RecoveryTimes(_), Observation::Recovery(_))
        );
        if ok {
            Ok(())
        } else {
            Err(Error::ObservationDomain {
                value: y.to_string(),
                model: self.name(),
            })
        }
    }
}
