//! Concrete epidemic models: SIR, SEIR with a chain of exposed stages and a
//! multi-strain SIS model, each paired with an observation model.

mod dynamics;
mod observation;
mod tabular;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chmm::{
    simulate_centred, HiddenStateMatrix, ModelSpec, Observation, ObservationMatrix, Snapshot, State,
    StateSpace,
};
use crate::error::{Error, Result};

pub use dynamics::{
    multistrain_transition_row, seir_transition_row, sir_transition_row, Dynamics, MultiStrainParams,
    SeirParams, SirParams,
};
pub use observation::{
    encode_recovery, recovery_loglik, test_loglik, DiagnosticTestModel, ObservationModel, RecoveryTimeModel,
};
pub use tabular::TabularModel;

/// Distribution of the time-1 states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialStates {
    /// Individual `j` starts in `states[j]` with certainty.
    Fixed(Vec<State>),
    /// Every individual draws its initial state from the same distribution.
    Shared(Vec<f64>),
}

impl InitialStates {
    /// The first individuals start in the listed states (one per entry of
    /// `index_cases`), everyone else susceptible (state 0).
    pub fn index_cases(num_individuals: usize, index_cases: &[State]) -> Self {
        let mut states = vec![0; num_individuals];
        states[..index_cases.len()].copy_from_slice(index_cases);
        InitialStates::Fixed(states)
    }

    fn validate(&self, num_states: usize, num_individuals: usize) -> Result<()> {
        match self {
            InitialStates::Fixed(states) => {
                if states.len() != num_individuals {
                    return Err(Error::InvalidParameter(format!(
                        "{} initial states given for {num_individuals} individuals",
                        states.len()
                    )));
                }
                if let Some(&s) = states.iter().find(|&&s| s >= num_states) {
                    return Err(Error::InvalidParameter(format!(
                        "initial state {} outside 1..={num_states}",
                        s + 1
                    )));
                }
            }
            InitialStates::Shared(probs) => {
                if probs.len() != num_states {
                    return Err(Error::InvalidParameter(format!(
                        "initial distribution has {} entries, model has {num_states} states",
                        probs.len()
                    )));
                }
                crate::chmm::TransitionProbRow::new(probs.clone()).map_err(|_| {
                    Error::InvalidParameter("initial distribution does not sum to one".into())
                })?;
            }
        }
        Ok(())
    }
}

/// An individual-based epidemic model.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicModel {
    dynamics: Dynamics,
    initial: InitialStates,
    observation: ObservationModel,
    num_individuals: usize,
}

impl EpidemicModel {
    pub fn new(
        dynamics: Dynamics,
        initial: InitialStates,
        observation: ObservationModel,
        num_individuals: usize,
    ) -> Result<Self> {
        if num_individuals == 0 {
            return Err(Error::InvalidParameter("need at least one individual".into()));
        }
        dynamics.validate()?;
        let s = dynamics.num_states();
        initial.validate(s, num_individuals)?;
        match &observation {
            ObservationModel::Test(m) => m.validate(s)?,
            ObservationModel::RecoveryTimes(m) => {
                if !matches!(dynamics, Dynamics::Sir(_)) {
                    return Err(Error::InvalidParameter(
                        "recovery-time observations are defined for SIR only".into(),
                    ));
                }
                for state in [m.susceptible, m.infective, m.recovered] {
                    if state >= s {
                        return Err(Error::InvalidParameter(format!(
                            "recovery-time state {} outside 1..={s}",
                            state + 1
                        )));
                    }
                }
            }
            ObservationModel::None => {}
        }
        Ok(Self {
            dynamics,
            initial,
            observation,
            num_individuals,
        })
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn initial(&self) -> &InitialStates {
        &self.initial
    }

    pub fn observation(&self) -> &ObservationModel {
        &self.observation
    }

    pub fn num_individuals(&self) -> usize {
        self.num_individuals
    }

    pub fn state_space(&self, num_timepoints: usize) -> Result<StateSpace> {
        StateSpace::new(self.dynamics.num_states(), self.num_individuals, num_timepoints)
    }

    /// The same model with different transition dynamics (same kind).
    pub fn with_dynamics(&self, dynamics: Dynamics) -> Result<Self> {
        Self::new(
            dynamics,
            self.initial.clone(),
            self.observation.clone(),
            self.num_individuals,
        )
    }
}

impl ModelSpec for EpidemicModel {
    fn num_states(&self) -> usize {
        self.dynamics.num_states()
    }

    fn initial_probs(&self, individual: usize, out: &mut [f64]) {
        match &self.initial {
            InitialStates::Fixed(states) => {
                out.fill(0.0);
                out[states[individual]] = 1.0;
            }
            InitialStates::Shared(p) => out.copy_from_slice(p),
        }
    }

    #[inline]
    fn transition_probs(
        &self,
        _t: usize,
        _individual: usize,
        from: State,
        snapshot: &Snapshot<'_>,
        out: &mut [f64],
    ) {
        self.dynamics.transition_probs(from, snapshot.counts, out);
    }

    #[inline]
    fn observation_loglik(&self, y: &Observation, state: State) -> f64 {
        self.observation.loglik(y, state)
    }

    fn check_observation(&self, y: &Observation) -> Result<()> {
        self.observation.check(y)
    }
}

/// Simulates a latent epidemic and observations of it.
///
/// With a diagnostic test, each cell is tested with the model's test
/// probability and the result drawn from the test's error rates. With
/// recovery-time observations every cell is observed through
/// [`encode_recovery`]. Without an observation model `Y` is empty.
pub fn simulate_dataset<R: Rng + ?Sized>(
    model: &EpidemicModel,
    space: &StateSpace,
    rng: &mut R,
) -> (HiddenStateMatrix, ObservationMatrix) {
    let x = simulate_centred(model, space, rng);
    let (n, t_count) = (space.num_individuals(), space.num_timepoints());
    let mut y = ObservationMatrix::empty(t_count, n);
    match model.observation() {
        ObservationModel::None => {}
        ObservationModel::Test(test) => {
            for t in 0..t_count {
                for j in 0..n {
                    if !rng.gen_bool(test.test_probability) {
                        continue;
                    }
                    let positive = if test.is_target(x.get(t, j)) {
                        rng.gen_bool(test.sensitivity)
                    } else {
                        !rng.gen_bool(test.specificity)
                    };
                    y.set(t, j, Some(Observation::Test(positive)));
                }
            }
        }
        ObservationModel::RecoveryTimes(m) => {
            for j in 0..n {
                for (t, code) in encode_recovery(&x.column(j), m).into_iter().enumerate() {
                    y.set(t, j, Some(Observation::Recovery(code)));
                }
            }
        }
    }
    (x, y)
}
