//! Forward simulation of the latent epidemic, centred and non-centred.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::{
    categorical_index, Grid, HiddenStateMatrix, ModelSpec, ObservationMatrix, Snapshot, State, StateSpace,
    UniformGrid,
};
use crate::error::{Error, Result};

/// Number of individuals in each state.
pub fn state_counts(states: &[State], num_states: usize) -> Vec<usize> {
    let mut counts = vec![0; num_states];
    for &s in states {
        counts[s] += 1;
    }
    counts
}

fn check_model_space<M: ModelSpec>(model: &M, space: &StateSpace) {
    assert_eq!(
        model.num_states(),
        space.num_states(),
        "model and state space disagree on the number of states"
    );
}

/// Draws `X` directly from its categorical distributions.
///
/// Uses weighted sampling rather than the inverse-CDF map so that it is an
/// independent route to the same distribution as [`simulate_noncentred`].
pub fn simulate_centred<M: ModelSpec, R: Rng + ?Sized>(
    model: &M,
    space: &StateSpace,
    rng: &mut R,
) -> HiddenStateMatrix {
    check_model_space(model, space);
    let (s_count, n, t_count) = (
        space.num_states(),
        space.num_individuals(),
        space.num_timepoints(),
    );
    let mut grid = Grid::filled(t_count, n, 0);
    let mut probs = vec![0.0; s_count];
    for j in 0..n {
        model.initial_probs(j, &mut probs);
        *grid.get_mut(0, j) = draw(&probs, rng);
    }
    for t in 0..t_count - 1 {
        let current = grid.row(t).to_vec();
        let counts = state_counts(&current, s_count);
        let snapshot = Snapshot {
            states: &current,
            counts: &counts,
        };
        for (j, &from) in current.iter().enumerate() {
            model.transition_probs(t, j, from, &snapshot, &mut probs);
            *grid.get_mut(t + 1, j) = draw(&probs, rng);
        }
    }
    HiddenStateMatrix::new(s_count, grid).expect("simulated states are in range")
}

fn draw<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> State {
    WeightedIndex::new(probs)
        .expect("probability row has positive mass")
        .sample(rng)
}

/// Deterministic map from `U` to `X`.
pub fn simulate_noncentred<M: ModelSpec>(
    model: &M,
    space: &StateSpace,
    u: &UniformGrid,
) -> HiddenStateMatrix {
    check_model_space(model, space);
    assert_eq!(u.num_timepoints(), space.num_timepoints());
    assert_eq!(u.num_individuals(), space.num_individuals());
    let (s_count, n, t_count) = (
        space.num_states(),
        space.num_individuals(),
        space.num_timepoints(),
    );
    let mut grid = Grid::filled(t_count, n, 0);
    let mut probs = vec![0.0; s_count];
    for j in 0..n {
        model.initial_probs(j, &mut probs);
        *grid.get_mut(0, j) = categorical_index(u.get(0, j), &probs);
    }
    for t in 0..t_count - 1 {
        let current = grid.row(t).to_vec();
        let counts = state_counts(&current, s_count);
        let snapshot = Snapshot {
            states: &current,
            counts: &counts,
        };
        for (j, &from) in current.iter().enumerate() {
            model.transition_probs(t, j, from, &snapshot, &mut probs);
            *grid.get_mut(t + 1, j) = categorical_index(u.get(t + 1, j), &probs);
        }
    }
    HiddenStateMatrix::new(s_count, grid).expect("simulated states are in range")
}

/// `log pi(Y | theta, X)`: the sum of `log f(y | x)` over observed cells.
pub fn observation_loglik_total<M: ModelSpec>(
    y: &ObservationMatrix,
    x: &HiddenStateMatrix,
    model: &M,
) -> Result<f64> {
    if !y.matches(x) {
        return Err(Error::DimensionMismatch(format!(
            "observations are {}x{}, hidden states are {}x{}",
            y.num_timepoints(),
            y.num_individuals(),
            x.num_timepoints(),
            x.num_individuals()
        )));
    }
    model.check_observations(y)?;
    Ok(observation_loglik_unchecked(y, x, model))
}

pub(crate) fn observation_loglik_unchecked<M: ModelSpec>(
    y: &ObservationMatrix,
    x: &HiddenStateMatrix,
    model: &M,
) -> f64 {
    let mut total = 0.0;
    for (cell, obs) in y.grid().cells() {
        if let Some(o) = obs {
            total += model.observation_loglik(o, x.get(cell.t, cell.j));
        }
    }
    total
}

/// `log pi(X | theta)`: initial-state and transition log-probabilities over
/// all individuals; `-inf` if any realised transition is impossible.
pub fn log_prior<M: ModelSpec>(model: &M, x: &HiddenStateMatrix) -> f64 {
    let s_count = model.num_states();
    let mut probs = vec![0.0; s_count];
    let mut total = 0.0;
    for j in 0..x.num_individuals() {
        model.initial_probs(j, &mut probs);
        total += probs[x.get(0, j)].ln();
    }
    for t in 0..x.num_timepoints() - 1 {
        let current = x.row(t);
        let counts = state_counts(current, s_count);
        let snapshot = Snapshot {
            states: current,
            counts: &counts,
        };
        for (j, &from) in current.iter().enumerate() {
            model.transition_probs(t, j, from, &snapshot, &mut probs);
            total += probs[x.get(t + 1, j)].ln();
        }
    }
    total
}
