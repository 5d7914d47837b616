use crate::chmm::{ModelSpec, Observation, Snapshot, State, TransitionProbRow};
use crate::error::{Error, Result};

/// Uncoupled chain with a fixed transition matrix and a binary test whose
/// positive rate depends on the state. Every individual follows the same
/// ordinary hidden Markov model; with `N = 1` it is a textbook HMM, which
/// makes it the reference model for filter and enumeration checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularModel {
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    positive_rate: Vec<f64>,
}

impl TabularModel {
    pub fn new(initial: Vec<f64>, transition: Vec<Vec<f64>>, positive_rate: Vec<f64>) -> Result<Self> {
        let s = initial.len();
        if s < 2 || transition.len() != s || positive_rate.len() != s {
            return Err(Error::DimensionMismatch(format!(
                "initial has {s} states, transition has {} rows, positive_rate has {} entries",
                transition.len(),
                positive_rate.len()
            )));
        }
        let initial = TransitionProbRow::new(initial)?.into_vec();
        let transition = transition
            .into_iter()
            .map(|row| {
                if row.len() != s {
                    return Err(Error::DimensionMismatch("ragged transition matrix".into()));
                }
                Ok(TransitionProbRow::new(row)?.into_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        if positive_rate.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter(
                "positive rates must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            initial,
            transition,
            positive_rate,
        })
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }
}

impl ModelSpec for TabularModel {
    fn num_states(&self) -> usize {
        self.initial.len()
    }

    fn initial_probs(&self, _individual: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.initial);
    }

    fn transition_probs(
        &self,
        _t: usize,
        _individual: usize,
        from: State,
        _snapshot: &Snapshot<'_>,
        out: &mut [f64],
    ) {
        out.copy_from_slice(&self.transition[from]);
    }

    fn observation_loglik(&self, y: &Observation, state: State) -> f64 {
        match y {
            Observation::Test(true) => self.positive_rate[state].ln(),
            Observation::Test(false) => (1.0 - self.positive_rate[state]).ln(),
            Observation::Recovery(_) => f64::NEG_INFINITY,
        }
    }

    fn check_observation(&self, y: &Observation) -> Result<()> {
        match y {
            Observation::Test(_) => Ok(()),
            other => Err(Error::ObservationDomain {
                value: other.to_string(),
                model: "tabular",
            }),
        }
    }
}
