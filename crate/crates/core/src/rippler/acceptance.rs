//! Metropolis-Hastings log acceptance ratios of Rippler proposals.
//!
//! The sampler targets `pi(X | Y)` jointly with `U` drawn uniformly inside
//! the bounds of `X`. Prior and bound-width terms cancel exactly, so the
//! standard ratio is the likelihood ratio times the cell-selection ratio,
//! and the data-informed ratio is the ratio of products of the governing
//! rows' normalising constants times the same selection ratio.
//!
//! For `kappa > 1` the selection ratio is that of the ordered draw: the
//! forward move picks cells `c_1, .., c_k` in order, the reverse move picks
//! the same cells in the same order from the proposed state's weights. It
//! equals `W / W*` when one cell is changed.

use super::bounds::BoundsGrids;
use super::proposal::{log_remaining_weight, num_positive_weights};
use crate::chmm::{Cell, EmissionTable, HiddenStateMatrix, UniformGrid};

/// `log q(U | U*) - log q(U* | U)` for an ordered selection `cells` drawn
/// with `kappa_requested` from `bounds`; `u` holds the current values.
///
/// `-inf` when the reverse move is impossible: a current value lies inside
/// the proposed state's reproducing interval at its cell, or the proposed
/// state would select a different number of cells.
pub fn log_proposal_ratio(
    bounds: &BoundsGrids,
    bounds_star: &BoundsGrids,
    cells: &[Cell],
    u: &UniformGrid,
    kappa_requested: usize,
) -> f64 {
    for c in cells {
        let (lo, hi) = bounds_star.get(c.t, c.j);
        let v = u.get(c.t, c.j);
        if lo <= v && v < hi {
            return f64::NEG_INFINITY;
        }
    }
    if kappa_requested > 1 && kappa_requested.min(num_positive_weights(bounds_star)) != cells.len() {
        return f64::NEG_INFINITY;
    }
    match (
        log_remaining_weight(bounds, cells),
        log_remaining_weight(bounds_star, cells),
    ) {
        (Some(fwd), Some(rev)) => fwd - rev,
        _ => f64::NEG_INFINITY,
    }
}

/// `log pi(Y | X*) - log pi(Y | X)` summed over time-points `>= t0`, where
/// the two matrices agree before `t0`.
pub(crate) fn loglik_difference(
    x: &HiddenStateMatrix,
    x_star: &HiddenStateMatrix,
    emissions: &EmissionTable,
    t0: usize,
) -> f64 {
    let n = x.num_individuals();
    let mut total = 0.0;
    for t in t0..x.num_timepoints() {
        for j in 0..n {
            let (a, b) = (x.get(t, j), x_star.get(t, j));
            if a != b && emissions.is_observed(t, j) {
                total += emissions.log_f(t, j, b) - emissions.log_f(t, j, a);
            }
        }
    }
    if total.is_nan() {
        f64::NEG_INFINITY
    } else {
        total
    }
}

/// Sum of the transition-row log normalisers of `bounds_star` minus those
/// of `bounds`, over time-points `>= max(t0, 1)`. The initial-state
/// constants do not depend on `X` and cancel.
pub(crate) fn log_normaliser_difference(bounds: &BoundsGrids, bounds_star: &BoundsGrids, t0: usize) -> f64 {
    let n = bounds.num_individuals();
    let (a, b) = (bounds.log_normaliser(), bounds_star.log_normaliser());
    let start = t0.max(1) * n;
    a.as_slice()[start..]
        .iter()
        .zip(&b.as_slice()[start..])
        .map(|(old, new)| new - old)
        .sum()
}

/// Log acceptance ratio of a standard Rippler proposal `X -> X*`.
#[allow(clippy::too_many_arguments)]
pub fn acceptance_log_ratio_standard(
    x: &HiddenStateMatrix,
    x_star: &HiddenStateMatrix,
    emissions: &EmissionTable,
    bounds: &BoundsGrids,
    bounds_star: &BoundsGrids,
    cells: &[Cell],
    u: &UniformGrid,
    kappa_requested: usize,
) -> f64 {
    loglik_difference(x, x_star, emissions, 0)
        + log_proposal_ratio(bounds, bounds_star, cells, u, kappa_requested)
}

/// Log acceptance ratio of a data-informed Rippler proposal `X -> X*`;
/// both bounds must come from the data-informed rows.
pub fn acceptance_log_ratio_data_informed(
    bounds: &BoundsGrids,
    bounds_star: &BoundsGrids,
    cells: &[Cell],
    u: &UniformGrid,
    kappa_requested: usize,
) -> f64 {
    log_normaliser_difference(bounds, bounds_star, 0)
        + log_proposal_ratio(bounds, bounds_star, cells, u, kappa_requested)
}
