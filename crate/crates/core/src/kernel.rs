//! Interface shared by the latent-state kernels and their starting point.

use rand::Rng;

use crate::chmm::{
    log_prior, simulate_centred, EmissionTable, HiddenStateMatrix, ModelSpec, StateSpace, UniformGrid,
};
use crate::error::{Error, Result};
use crate::random::SamplerRng;
use crate::rippler::{reconstruct, ProposalKind};

/// Outcome of one latent-state update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRecord {
    /// Cells changed by a Rippler proposal; `None` for other kernels.
    pub kappa: Option<usize>,
    /// `kappa` asked for before capping at the number of changeable cells.
    pub kappa_requested: Option<usize>,
    /// Whether the tuner chose `kappa` by exploration.
    pub explored: bool,
    /// False when no proposal could be made (nothing changeable).
    pub proposed: bool,
    pub accepted: bool,
    /// Cells where the proposal differs from the current state.
    pub ripple_size: usize,
    pub log_ratio: f64,
    /// Whether the earliest selected cell changed state (Rippler only).
    pub earliest_flipped: Option<bool>,
}

impl UpdateRecord {
    pub(crate) fn gibbs(ripple_size: usize) -> Self {
        Self {
            kappa: None,
            kappa_requested: None,
            explored: false,
            proposed: true,
            accepted: true,
            ripple_size,
            log_ratio: 0.0,
            earliest_flipped: None,
        }
    }
}

/// A Markov kernel on the latent epidemic `X` for a fixed model.
pub trait LatentKernel<M: ModelSpec> {
    fn name(&self) -> &'static str;

    fn update(&mut self, rng: &mut SamplerRng) -> UpdateRecord;

    fn state(&self) -> &HiddenStateMatrix;

    fn model(&self) -> &M;

    /// Swaps in new model parameters, keeping the current `X`.
    fn set_model(&mut self, model: M) -> Result<()>;

    /// `updates` consecutive updates.
    fn sweep(&mut self, updates: usize, rng: &mut SamplerRng) -> Vec<UpdateRecord> {
        (0..updates).map(|_| self.update(rng)).collect()
    }
}

/// Sum of `log f(y | x)` over all cells.
pub fn observation_loglik(x: &HiddenStateMatrix, emissions: &EmissionTable) -> f64 {
    let mut total = 0.0;
    for t in 0..x.num_timepoints() {
        for j in 0..x.num_individuals() {
            if emissions.is_observed(t, j) {
                total += emissions.log_f(t, j, x.get(t, j));
            }
        }
    }
    total
}

const PRIOR_ATTEMPTS: usize = 100;
const DATA_INFORMED_ATTEMPTS: usize = 1000;

/// A starting `X` with positive posterior density.
///
/// Tries forward simulation from the prior first; if the data rule out
/// every such draw, falls back to forward simulation under the
/// observation-conditioned rows used by the data-informed proposal.
pub fn initial_latent_state<M: ModelSpec, R: Rng + ?Sized>(
    model: &M,
    emissions: &EmissionTable,
    space: &StateSpace,
    rng: &mut R,
) -> Result<HiddenStateMatrix> {
    let feasible = |x: &HiddenStateMatrix| {
        observation_loglik(x, emissions) > f64::NEG_INFINITY && log_prior(model, x) > f64::NEG_INFINITY
    };
    for _ in 0..PRIOR_ATTEMPTS {
        let x = simulate_centred(model, space, rng);
        if feasible(&x) {
            return Ok(x);
        }
    }
    for _ in 0..DATA_INFORMED_ATTEMPTS {
        let u = UniformGrid::draw(space, rng);
        if let Ok(x) = reconstruct(&u, model, ProposalKind::DataInformed, emissions) {
            if feasible(&x) {
                return Ok(x);
            }
        }
    }
    Err(Error::NoFeasibleStart {
        attempts: PRIOR_ATTEMPTS + DATA_INFORMED_ATTEMPTS,
    })
}
