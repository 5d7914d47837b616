use rand::SeedableRng;

use super::acceptance::{log_normaliser_difference, log_proposal_ratio, loglik_difference};
use super::bounds::{compute_bounds, reconstruct_from, BoundsGrids, ProposalKind};
use super::proposal::{materialise_u, propose_u_star, select_cells};
use super::tuner::AdaptiveTuner;
use crate::chmm::{EmissionTable, HiddenStateMatrix, ModelSpec};
use crate::error::{Error, Result};
use crate::kernel::{LatentKernel, UpdateRecord};
use crate::random::{open_unit, SamplerRng};

/// How many cells each proposal changes.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaPolicy {
    Fixed(usize),
    Adaptive(AdaptiveTuner),
}

/// Standard or data-informed Rippler updates of `X` for a fixed model.
///
/// The bounds of the current state are cached and replaced together with
/// the state on acceptance, so each update costs one pass over the cells
/// from the earliest changed time-point onwards.
#[derive(Debug, Clone)]
pub struct RipplerSampler<M> {
    model: M,
    emissions: EmissionTable,
    kind: ProposalKind,
    policy: KappaPolicy,
    tuner_rng: SamplerRng,
    x: HiddenStateMatrix,
    bounds: BoundsGrids,
    x_star: HiddenStateMatrix,
    bounds_star: BoundsGrids,
}

impl<M: ModelSpec> RipplerSampler<M> {
    /// `tuner_seed` drives the tuner's choices, kept apart from the
    /// proposal stream.
    pub fn new(
        model: M,
        emissions: EmissionTable,
        x0: HiddenStateMatrix,
        kind: ProposalKind,
        policy: KappaPolicy,
        tuner_seed: u64,
    ) -> Result<Self> {
        if let KappaPolicy::Fixed(0) = policy {
            return Err(Error::InvalidParameter("kappa must be at least 1".into()));
        }
        let bounds = compute_bounds(&x0, &model, kind, &emissions)?;
        if crate::kernel::observation_loglik(&x0, &emissions) == f64::NEG_INFINITY {
            return Err(Error::InvalidParameter(
                "initial latent state is incompatible with the observations".into(),
            ));
        }
        Ok(Self {
            model,
            emissions,
            kind,
            policy,
            tuner_rng: SamplerRng::seed_from_u64(tuner_seed),
            x_star: x0.clone(),
            bounds_star: bounds.clone(),
            x: x0,
            bounds,
        })
    }

    pub fn kind(&self) -> ProposalKind {
        self.kind
    }

    pub fn bounds(&self) -> &BoundsGrids {
        &self.bounds
    }

    pub fn tuner(&self) -> Option<&AdaptiveTuner> {
        match &self.policy {
            KappaPolicy::Adaptive(t) => Some(t),
            KappaPolicy::Fixed(_) => None,
        }
    }

    fn choose_kappa(&mut self) -> (usize, bool) {
        match &self.policy {
            KappaPolicy::Fixed(k) => (*k, false),
            KappaPolicy::Adaptive(t) => t.choose(&mut self.tuner_rng),
        }
    }

    fn rippler_update(&mut self, rng: &mut SamplerRng) -> UpdateRecord {
        let (kappa_requested, explored) = self.choose_kappa();
        let u = materialise_u(&self.bounds, rng);
        let selection = select_cells(&self.bounds, kappa_requested, rng);
        let mut record = UpdateRecord {
            kappa: Some(selection.cells.len()),
            kappa_requested: Some(kappa_requested),
            explored,
            proposed: !selection.is_empty(),
            accepted: false,
            ripple_size: 0,
            log_ratio: f64::NEG_INFINITY,
            earliest_flipped: None,
        };
        let Some(t0) = selection.earliest_time() else {
            return record;
        };
        let cells = &selection.cells;
        let u_star = propose_u_star(&u, cells, &self.bounds, rng);
        let mut changed_rows = vec![false; self.x.num_timepoints()];
        for c in cells {
            changed_rows[c.t] = true;
        }
        let rebuilt = reconstruct_from(
            &u_star,
            &self.model,
            self.kind,
            &self.emissions,
            (&self.x, &self.bounds),
            t0,
            &changed_rows,
            (&mut self.x_star, &mut self.bounds_star),
        );
        record.ripple_size = self.x.count_differences(&self.x_star);
        record.earliest_flipped = Some(
            cells
                .iter()
                .filter(|c| c.t == t0)
                .all(|c| self.x.get(c.t, c.j) != self.x_star.get(c.t, c.j)),
        );
        if rebuilt.is_ok() {
            let q = log_proposal_ratio(&self.bounds, &self.bounds_star, cells, &u, kappa_requested);
            let target = match self.kind {
                ProposalKind::Standard => loglik_difference(&self.x, &self.x_star, &self.emissions, t0),
                ProposalKind::DataInformed => log_normaliser_difference(&self.bounds, &self.bounds_star, t0),
            };
            record.log_ratio = target + q;
            record.accepted = record.log_ratio >= 0.0 || open_unit(rng).ln() < record.log_ratio;
        }
        if record.accepted {
            std::mem::swap(&mut self.x, &mut self.x_star);
            std::mem::swap(&mut self.bounds, &mut self.bounds_star);
        }
        if let KappaPolicy::Adaptive(t) = &mut self.policy {
            t.record(kappa_requested, record.accepted);
        }
        record
    }
}

impl<M: ModelSpec> LatentKernel<M> for RipplerSampler<M> {
    fn name(&self) -> &'static str {
        match self.kind {
            ProposalKind::Standard => "rippler",
            ProposalKind::DataInformed => "rippler-data-informed",
        }
    }

    fn update(&mut self, rng: &mut SamplerRng) -> UpdateRecord {
        self.rippler_update(rng)
    }

    fn state(&self) -> &HiddenStateMatrix {
        &self.x
    }

    fn model(&self) -> &M {
        &self.model
    }

    fn set_model(&mut self, model: M) -> Result<()> {
        self.bounds = compute_bounds(&self.x, &model, self.kind, &self.emissions)?;
        self.model = model;
        Ok(())
    }
}

/// `updates` Rippler updates.
pub fn rippler_sweep<M: ModelSpec>(
    sampler: &mut RipplerSampler<M>,
    updates: usize,
    rng: &mut SamplerRng,
) -> Vec<UpdateRecord> {
    sampler.sweep(updates, rng)
}
