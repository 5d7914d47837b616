//! Drawing `U` inside its bounds, choosing cells to change and proposing
//! their new values outside the bounds.

use rand::Rng;

use super::bounds::BoundsGrids;
use crate::chmm::{Cell, Grid, UniformGrid};
use crate::random::open_uniform;

/// `u_{t,j} ~ Uniform(lower, upper)` independently for every cell.
pub fn materialise_u<R: Rng + ?Sized>(bounds: &BoundsGrids, rng: &mut R) -> UniformGrid {
    let data = bounds
        .lower()
        .as_slice()
        .iter()
        .zip(bounds.upper().as_slice())
        .map(|(&lo, &hi)| open_uniform(rng, lo, hi))
        .collect();
    UniformGrid::from_grid_unchecked(
        Grid::from_vec(bounds.num_timepoints(), bounds.num_individuals(), data)
            .expect("bounds grids are rectangular"),
    )
}

/// Cells chosen for a proposal, in the order they were drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSelection {
    pub cells: Vec<Cell>,
    /// Number of cells with positive weight when the selection was made.
    pub num_positive: usize,
    /// `sum_k log(W - S_{k-1})`, where `W` is the total weight and `S_k`
    /// the weight of the first `k` selected cells: minus the log density
    /// of this ordered draw, per unit of the selected cells' weights.
    pub log_remaining_weight: f64,
}

impl CellSelection {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn earliest_time(&self) -> Option<usize> {
        self.cells.iter().map(|c| c.t).min()
    }
}

/// Draws `min(kappa, #positive-weight cells)` distinct cells without
/// replacement, each step with probability proportional to the weight
/// `1 - upper + lower` among the cells not yet drawn.
pub fn select_cells<R: Rng + ?Sized>(bounds: &BoundsGrids, kappa: usize, rng: &mut R) -> CellSelection {
    let n = bounds.num_individuals();
    let mut weights: Vec<f64> = bounds
        .lower()
        .as_slice()
        .iter()
        .zip(bounds.upper().as_slice())
        .map(|(lo, hi)| (1.0 - hi + lo).max(0.0))
        .collect();
    let num_positive = weights.iter().filter(|&&w| w > 0.0).count();
    let target = kappa.min(num_positive);
    let mut remaining: f64 = weights.iter().sum();
    let mut cells = Vec::with_capacity(target);
    let mut log_remaining_weight = 0.0;
    for _ in 0..target {
        log_remaining_weight += remaining.ln();
        let r = rng.gen::<f64>() * remaining;
        let mut acc = 0.0;
        let mut pick = None;
        let mut last_positive = 0;
        for (k, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last_positive = k;
                if r < acc {
                    pick = Some(k);
                    break;
                }
            }
        }
        let k = pick.unwrap_or(last_positive);
        remaining -= weights[k];
        weights[k] = 0.0;
        cells.push(Cell::new(k / n, k % n));
    }
    CellSelection {
        cells,
        num_positive,
        log_remaining_weight,
    }
}

/// `sum_k log(W - S_{k-1})` for a given ordered cell list under `bounds`,
/// or `None` if some cell has zero weight there.
pub fn log_remaining_weight(bounds: &BoundsGrids, cells: &[Cell]) -> Option<f64> {
    let mut remaining = bounds.total_weight();
    let mut total = 0.0;
    for c in cells {
        let w = bounds.weight(c.t, c.j);
        if w <= 0.0 {
            return None;
        }
        total += remaining.ln();
        remaining -= w;
    }
    Some(total)
}

/// Number of positive-weight cells.
pub fn num_positive_weights(bounds: &BoundsGrids) -> usize {
    bounds
        .lower()
        .as_slice()
        .iter()
        .zip(bounds.upper().as_slice())
        .filter(|(lo, hi)| 1.0 - **hi + **lo > 0.0)
        .count()
}

/// A uniform draw from `(0, lower) ∪ (upper, 1)`.
pub fn draw_outside<R: Rng + ?Sized>(lower: f64, upper: f64, rng: &mut R) -> f64 {
    let below = lower;
    let above = 1.0 - upper;
    debug_assert!(below + above > 0.0);
    if rng.gen::<f64>() * (below + above) < below {
        open_uniform(rng, 0.0, lower)
    } else {
        open_uniform(rng, upper, 1.0)
    }
}

/// `U*`: a copy of `u` with each selected cell redrawn outside its bounds.
pub fn propose_u_star<R: Rng + ?Sized>(
    u: &UniformGrid,
    cells: &[Cell],
    bounds: &BoundsGrids,
    rng: &mut R,
) -> UniformGrid {
    let mut u_star = u.clone();
    for c in cells {
        let (lo, hi) = bounds.get(c.t, c.j);
        u_star.set(c.t, c.j, draw_outside(lo, hi, rng));
    }
    u_star
}
