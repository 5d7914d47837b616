use super::{ModelSpec, ObservationMatrix, State};
use crate::error::{Error, Result};

/// `log f(y_{t,j} | s)` for every cell and state, evaluated once per
/// dataset. Missing observations contribute `0` for every state.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionTable {
    num_states: usize,
    num_individuals: usize,
    num_timepoints: usize,
    log_f: Vec<f64>,
    observed: Vec<bool>,
}

impl EmissionTable {
    pub fn new<M: ModelSpec>(model: &M, y: &ObservationMatrix) -> Result<Self> {
        model.check_observations(y)?;
        let s_count = model.num_states();
        let (t_count, n) = (y.num_timepoints(), y.num_individuals());
        let mut log_f = vec![0.0; t_count * n * s_count];
        let mut observed = vec![false; t_count * n];
        for (cell, obs) in y.grid().cells() {
            if let Some(o) = obs {
                let k = cell.t * n + cell.j;
                observed[k] = true;
                for s in 0..s_count {
                    log_f[k * s_count + s] = model.observation_loglik(o, s);
                }
            }
        }
        Ok(Self {
            num_states: s_count,
            num_individuals: n,
            num_timepoints: t_count,
            log_f,
            observed,
        })
    }

    /// A table with no observations.
    pub fn unobserved(num_states: usize, num_timepoints: usize, num_individuals: usize) -> Self {
        Self {
            num_states,
            num_individuals,
            num_timepoints,
            log_f: vec![0.0; num_timepoints * num_individuals * num_states],
            observed: vec![false; num_timepoints * num_individuals],
        }
    }

    pub fn num_timepoints(&self) -> usize {
        self.num_timepoints
    }

    pub fn num_individuals(&self) -> usize {
        self.num_individuals
    }

    #[inline]
    pub fn is_observed(&self, t: usize, j: usize) -> bool {
        self.observed[t * self.num_individuals + j]
    }

    /// `log f(y_{t,j} | s)` for all `s`.
    #[inline]
    pub fn log_row(&self, t: usize, j: usize) -> &[f64] {
        let k = (t * self.num_individuals + j) * self.num_states;
        &self.log_f[k..k + self.num_states]
    }

    #[inline]
    pub fn log_f(&self, t: usize, j: usize, s: State) -> f64 {
        self.log_row(t, j)[s]
    }

    pub(crate) fn check_shape(&self, num_timepoints: usize, num_individuals: usize) -> Result<()> {
        if self.num_timepoints != num_timepoints || self.num_individuals != num_individuals {
            return Err(Error::DimensionMismatch(format!(
                "observations are {}x{}, hidden states are {num_timepoints}x{num_individuals}",
                self.num_timepoints, self.num_individuals
            )));
        }
        Ok(())
    }
}
