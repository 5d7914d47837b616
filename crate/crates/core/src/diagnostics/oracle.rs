//! Exactness checks of the kernels against brute-force posteriors on tiny
//! models.

use std::io::Write;

use serde::Serialize;

use super::enumerate::{enumerate_posterior, tv_distance, ConfigHistogram, EnumeratedPosterior};
use super::hmm::Hmm;
use crate::chain::{build_kernel, SamplerSettings};
use crate::chmm::{EmissionTable, ModelSpec, Snapshot, StateSpace};
use crate::error::{Error, Result};
use crate::kernel::initial_latent_state;
use crate::models::EpidemicModel;
use crate::random::{derive_seed, stream_rng, Stream};

/// Largest total-variation distance accepted between a kernel's visit
/// frequencies and the exact posterior.
pub const TV_TOLERANCE: f64 = 0.02;

/// Largest absolute difference accepted between enumerated marginals and
/// forward-backward marginals.
pub const HMM_TOLERANCE: f64 = 1e-9;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub check: String,
    pub updates: usize,
    pub distance: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.distance < self.tolerance
    }
}

/// Total-variation distance between the configurations visited by
/// `updates` updates of `settings.kernel` and the exact posterior.
pub fn kernel_tv_distance(
    model: &EpidemicModel,
    emissions: &EmissionTable,
    space: &StateSpace,
    exact: &EnumeratedPosterior,
    settings: &SamplerSettings,
    updates: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = stream_rng(seed, Stream::Inference);
    let x0 = initial_latent_state(model, emissions, space, &mut rng)?;
    let mut kernel = build_kernel(
        settings,
        model.clone(),
        emissions.clone(),
        x0,
        derive_seed(seed, Stream::Tuner),
    )?;
    let mut hist = ConfigHistogram::new(space)?;
    for _ in 0..updates {
        kernel.update(&mut rng);
        hist.add(kernel.state());
    }
    Ok(tv_distance(&hist.frequencies(), exact.probs()))
}

/// Largest difference between enumerated posterior marginals and
/// forward-backward marginals of a single-individual model, which is an
/// ordinary hidden Markov chain.
pub fn hmm_cross_check<M: ModelSpec>(
    model: &M,
    emissions: &EmissionTable,
    space: &StateSpace,
) -> Result<f64> {
    if space.num_individuals() != 1 {
        return Err(Error::InvalidParameter(
            "the forward-backward cross-check needs a single individual".into(),
        ));
    }
    let s_count = space.num_states();
    let mut initial = vec![0.0; s_count];
    model.initial_probs(0, &mut initial);
    let transition = (0..s_count)
        .map(|from| {
            let states = [from];
            let mut counts = vec![0; s_count];
            counts[from] = 1;
            let snap = Snapshot {
                states: &states,
                counts: &counts,
            };
            let mut row = vec![0.0; s_count];
            model.transition_probs(0, 0, from, &snap, &mut row);
            row
        })
        .collect();
    let likelihood = (0..space.num_timepoints())
        .map(|t| (0..s_count).map(|s| emissions.log_f(t, 0, s).exp()).collect())
        .collect();
    let smoothed = Hmm {
        initial,
        transition,
        likelihood,
    }
    .smoothed()?;
    let exact = enumerate_posterior(model, emissions, space)?;
    let mut worst: f64 = 0.0;
    for (t, row) in smoothed.iter().enumerate() {
        for (s, &p) in row.iter().enumerate() {
            worst = worst.max((exact.marginal(t, 0, s) - p).abs());
        }
    }
    Ok(worst)
}

/// `check,updates,distance,tolerance,pass`.
pub fn write_oracle_csv<W: Write>(checks: &[OracleCheck], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "updates", "distance", "tolerance", "pass"])?;
    for c in checks {
        w.write_record([
            c.check.clone(),
            c.updates.to_string(),
            c.distance.to_string(),
            c.tolerance.to_string(),
            c.passed().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
