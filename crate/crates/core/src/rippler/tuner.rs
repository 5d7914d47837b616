//! Epsilon-greedy choice of the number of cells changed per proposal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_KAPPA_MAX: usize = 10;
pub const DEFAULT_TARGET_ACCEPTANCE: f64 = 0.234;

/// Tracks the acceptance rate of each `kappa` in `1..=kappa_max`.
///
/// With probability `epsilon` the next `kappa` is uniform on
/// `1..=kappa_max`; otherwise it is the `kappa` whose estimated acceptance
/// rate is closest to `target`, the smallest on ties. Each estimate starts
/// from one pseudo-proposal accepted with probability `target`, so an
/// untried `kappa` looks exactly on target until it has been used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveTuner {
    epsilon: f64,
    kappa_max: usize,
    target: f64,
    proposals: Vec<f64>,
    acceptances: Vec<f64>,
}

impl AdaptiveTuner {
    pub fn new(epsilon: f64, kappa_max: usize, target: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        if kappa_max == 0 {
            return Err(Error::InvalidParameter("kappa_max must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&target) {
            return Err(Error::InvalidParameter(format!(
                "target acceptance must lie in [0, 1], got {target}"
            )));
        }
        Ok(Self {
            epsilon,
            kappa_max,
            target,
            proposals: vec![1.0; kappa_max],
            acceptances: vec![target; kappa_max],
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa_max(&self) -> usize {
        self.kappa_max
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    /// Estimated acceptance rate of `kappa` (1-based).
    pub fn acceptance_rate(&self, kappa: usize) -> f64 {
        self.acceptances[kappa - 1] / self.proposals[kappa - 1]
    }

    /// Real (not pseudo) proposals recorded for `kappa`.
    pub fn num_proposals(&self, kappa: usize) -> u64 {
        (self.proposals[kappa - 1] - 1.0).round() as u64
    }

    /// Greedy choice: the `kappa` with rate closest to the target.
    pub fn exploit(&self) -> usize {
        let mut best = 1;
        let mut best_gap = f64::INFINITY;
        for kappa in 1..=self.kappa_max {
            let gap = (self.acceptance_rate(kappa) - self.target).abs();
            if gap < best_gap {
                best = kappa;
                best_gap = gap;
            }
        }
        best
    }

    /// Next `kappa` and whether it came from exploration.
    pub fn choose<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, bool) {
        if rng.gen::<f64>() < self.epsilon {
            (rng.gen_range(1..=self.kappa_max), true)
        } else {
            (self.exploit(), false)
        }
    }

    pub fn record(&mut self, kappa: usize, accepted: bool) {
        self.proposals[kappa - 1] += 1.0;
        if accepted {
            self.acceptances[kappa - 1] += 1.0;
        }
    }

    /// Overrides the acceptance estimates, e.g. to test the greedy choice.
    pub fn set_rates(&mut self, rates: &[f64]) {
        assert_eq!(rates.len(), self.kappa_max);
        for (k, &a) in rates.iter().enumerate() {
            self.proposals[k] = 1.0;
            self.acceptances[k] = a;
        }
    }
}

/// The tuner's next `kappa`.
pub fn tuner_choose_kappa<R: Rng + ?Sized>(tuner: &AdaptiveTuner, rng: &mut R) -> usize {
    tuner.choose(rng).0
}
