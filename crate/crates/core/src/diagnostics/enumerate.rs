//! Exact posterior over every hidden configuration of a tiny model.

use crate::chmm::{log_prior, EmissionTable, Grid, HiddenStateMatrix, ModelSpec, StateSpace};
use crate::error::{Error, Result};
use crate::kernel::observation_loglik;

/// Largest state space [`enumerate_posterior`] accepts.
pub const ENUMERATION_LIMIT: usize = 1_000_000;

/// Index of `x` among all configurations: `sum_{t,j} x_{t,j} S^{tN + j}`
/// with 0-based states, so cell `(0, 0)` is the least significant digit.
pub fn config_id(x: &HiddenStateMatrix) -> usize {
    let s = x.num_states();
    x.as_slice().iter().rev().fold(0, |acc, &v| acc * s + v)
}

/// Inverse of [`config_id`].
pub fn config_from_id(id: usize, space: &StateSpace) -> HiddenStateMatrix {
    let s = space.num_states();
    let mut rest = id;
    let data = (0..space.num_cells())
        .map(|_| {
            let v = rest % s;
            rest /= s;
            v
        })
        .collect();
    HiddenStateMatrix::new(
        s,
        Grid::from_vec(space.num_timepoints(), space.num_individuals(), data).expect("shape"),
    )
    .expect("digits are below S")
}

/// `pi(X | Y)` for every configuration, indexed by [`config_id`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedPosterior {
    space: StateSpace,
    probs: Vec<f64>,
}

impl EnumeratedPosterior {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &HiddenStateMatrix) -> f64 {
        self.probs[config_id(x)]
    }

    /// Posterior probability that cell `(t, j)` is in state `s`.
    pub fn marginal(&self, t: usize, j: usize, s: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|&(id, _)| config_from_id(id, &self.space).get(t, j) == s)
            .map(|(_, p)| p)
            .sum()
    }
}

fn space_size(space: &StateSpace) -> Result<usize> {
    let size = (space.num_states() as f64).powi(space.num_cells() as i32);
    if size > ENUMERATION_LIMIT as f64 {
        return Err(Error::EnumerationTooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(size as usize)
}

/// Exact posterior `pi(X | Y) ∝ pi(X) pi(Y | X)` by brute force. Refuses
/// spaces with more than [`ENUMERATION_LIMIT`] configurations.
pub fn enumerate_posterior<M: ModelSpec>(
    model: &M,
    emissions: &EmissionTable,
    space: &StateSpace,
) -> Result<EnumeratedPosterior> {
    let size = space_size(space)?;
    emissions.check_shape(space.num_timepoints(), space.num_individuals())?;
    let log_w: Vec<f64> = (0..size)
        .map(|id| {
            let x = config_from_id(id, space);
            log_prior(model, &x) + observation_loglik(&x, emissions)
        })
        .collect();
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter(
            "every configuration has zero posterior density".into(),
        ));
    }
    let mut probs: Vec<f64> = log_w.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(EnumeratedPosterior { space: *space, probs })
}

/// Counts of visited configurations, for comparison with an enumerated
/// posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl ConfigHistogram {
    pub fn new(space: &StateSpace) -> Result<Self> {
        Ok(Self {
            counts: vec![0; space_size(space)?],
            total: 0,
        })
    }

    pub fn add(&mut self, x: &HiddenStateMatrix) {
        self.counts[config_id(x)] += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

/// Total-variation distance `0.5 * sum |p - q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
