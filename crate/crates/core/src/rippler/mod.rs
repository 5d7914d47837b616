//! Rippler latent-state updates.
//!
//! `X` is represented by uniforms `U` through the inverse-CDF map. A
//! proposal redraws `U` inside the bounds that reproduce the current `X`,
//! moves a few cells outside their bounds (so each of them must change
//! state) and maps the result forward in time, letting the change ripple
//! through every later time-point it affects.

mod acceptance;
mod bounds;
mod proposal;
mod sampler;
mod tuner;

pub use acceptance::{acceptance_log_ratio_data_informed, acceptance_log_ratio_standard, log_proposal_ratio};
pub use bounds::{compute_bounds, modify_probs, reconstruct, BoundsGrids, ModifiedProbRow, ProposalKind};
pub use proposal::{
    draw_outside, log_remaining_weight, materialise_u, num_positive_weights, propose_u_star, select_cells,
    CellSelection,
};
pub use sampler::{rippler_sweep, KappaPolicy, RipplerSampler};
pub use tuner::{
    tuner_choose_kappa, AdaptiveTuner, DEFAULT_EPSILON, DEFAULT_KAPPA_MAX, DEFAULT_TARGET_ACCEPTANCE,
};
