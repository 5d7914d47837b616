//! Reproducing bounds of `U` and the deterministic map from `U` to `X`.
//!
//! Both are computed from the same governing rows: the initial
//! distribution at `t = 0` and the transition row of the previous state at
//! later times. The data-informed proposal reweights each governing row by
//! the observation likelihood of its destination cell and keeps the log of
//! the normalising constant.

use serde::{Deserialize, Serialize};

use crate::chmm::{
    categorical_index, categorical_interval, state_counts, EmissionTable, Grid, HiddenStateMatrix, ModelSpec,
    Snapshot, State, UniformGrid,
};
use crate::error::{Error, Result};

/// Which probabilities govern the map between `U` and `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalKind {
    /// Prior initial and transition probabilities.
    Standard,
    /// Probabilities conditioned on the observation at the destination cell.
    DataInformed,
}

/// Observation-weighted probabilities `rho` and their normalising constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedProbRow {
    pub probs: Vec<f64>,
    pub normaliser: f64,
}

/// `rho_s = p_s f_s / c` with `c = sum_s p_s f_s`, given `log f`. Returns
/// `None` when `c = 0`.
pub fn modify_probs(probs: &[f64], log_f: &[f64]) -> Option<ModifiedProbRow> {
    let mut rho = probs.to_vec();
    let log_c = modify_in_place(&mut rho, log_f);
    (log_c > f64::NEG_INFINITY).then(|| ModifiedProbRow {
        probs: rho,
        normaliser: log_c.exp(),
    })
}

/// Replaces `probs` by the modified row and returns `log c`; `-inf` leaves
/// `probs` unspecified.
#[inline]
fn modify_in_place(probs: &mut [f64], log_f: &[f64]) -> f64 {
    let mut c = 0.0;
    for (p, &lf) in probs.iter_mut().zip(log_f) {
        if *p > 0.0 {
            *p *= lf.exp();
            c += *p;
        }
    }
    if c > 0.0 {
        for p in probs.iter_mut() {
            *p /= c;
        }
        c.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Per-cell reproducing interval `[lower, upper)` of `X` and, for the
/// data-informed proposal, the log normalising constant of each cell's
/// governing row (zero for the standard proposal and for unobserved cells).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsGrids {
    lower: Grid<f64>,
    upper: Grid<f64>,
    log_normaliser: Grid<f64>,
}

impl BoundsGrids {
    pub fn lower(&self) -> &Grid<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &Grid<f64> {
        &self.upper
    }

    /// `log c` of the row governing cell `(t, j)`; row 0 holds the
    /// initial-state constants.
    pub fn log_normaliser(&self) -> &Grid<f64> {
        &self.log_normaliser
    }

    #[inline]
    pub fn get(&self, t: usize, j: usize) -> (f64, f64) {
        (*self.lower.get(t, j), *self.upper.get(t, j))
    }

    /// Selection weight `1 - upper + lower`: the length of the region of
    /// unit values that would change this cell.
    #[inline]
    pub fn weight(&self, t: usize, j: usize) -> f64 {
        let (lo, hi) = self.get(t, j);
        (1.0 - hi + lo).max(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.lower
            .as_slice()
            .iter()
            .zip(self.upper.as_slice())
            .map(|(lo, hi)| (1.0 - hi + lo).max(0.0))
            .sum()
    }

    pub fn num_timepoints(&self) -> usize {
        self.lower.num_timepoints()
    }

    pub fn num_individuals(&self) -> usize {
        self.lower.num_individuals()
    }
}

/// Fills `out` with the governing row of destination cell `(t, j)` and
/// returns its log normaliser.
#[inline]
fn governing_row<M: ModelSpec>(
    model: &M,
    kind: ProposalKind,
    emissions: &EmissionTable,
    t: usize,
    j: usize,
    prev: Option<&Snapshot<'_>>,
    out: &mut [f64],
) -> f64 {
    match prev {
        None => model.initial_probs(j, out),
        Some(snap) => model.transition_probs(t - 1, j, snap.states[j], snap, out),
    }
    if kind == ProposalKind::DataInformed && emissions.is_observed(t, j) {
        modify_in_place(out, emissions.log_row(t, j))
    } else {
        0.0
    }
}

/// Reproducing bounds of `x`.
///
/// Fails with [`Error::ZeroNormaliser`] when a data-informed row has no
/// mass, and with [`Error::Infeasible`] when a realised state has zero
/// probability under its governing row.
pub fn compute_bounds<M: ModelSpec>(
    x: &HiddenStateMatrix,
    model: &M,
    kind: ProposalKind,
    emissions: &EmissionTable,
) -> Result<BoundsGrids> {
    let (t_count, n, s_count) = (x.num_timepoints(), x.num_individuals(), model.num_states());
    emissions.check_shape(t_count, n)?;
    let mut lower = Grid::filled(t_count, n, 0.0);
    let mut upper = Grid::filled(t_count, n, 1.0);
    let mut log_normaliser = Grid::filled(t_count, n, 0.0);
    let mut probs = vec![0.0; s_count];
    for t in 0..t_count {
        let counts;
        let snapshot = if t == 0 {
            None
        } else {
            counts = state_counts(x.row(t - 1), s_count);
            Some(Snapshot {
                states: x.row(t - 1),
                counts: &counts,
            })
        };
        for j in 0..n {
            let log_c = governing_row(model, kind, emissions, t, j, snapshot.as_ref(), &mut probs);
            if log_c == f64::NEG_INFINITY {
                return Err(Error::ZeroNormaliser { t: t + 1, j: j + 1 });
            }
            let (lo, hi) = categorical_interval(&probs, x.get(t, j));
            if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::Infeasible { t: t + 1, j: j + 1 });
            }
            *lower.get_mut(t, j) = lo;
            *upper.get_mut(t, j) = hi;
            *log_normaliser.get_mut(t, j) = log_c;
        }
    }
    Ok(BoundsGrids {
        lower,
        upper,
        log_normaliser,
    })
}

/// Deterministic forward map from `U` to `X` under the governing rows of
/// `kind`. Fails with [`Error::ZeroNormaliser`] if a data-informed row
/// visited along the way has no mass.
pub fn reconstruct<M: ModelSpec>(
    u: &UniformGrid,
    model: &M,
    kind: ProposalKind,
    emissions: &EmissionTable,
) -> Result<HiddenStateMatrix> {
    let (t_count, n) = (u.num_timepoints(), u.num_individuals());
    emissions.check_shape(t_count, n)?;
    let mut x = HiddenStateMatrix::new(model.num_states(), Grid::filled(t_count, n, 0))?;
    let mut bounds = BoundsGrids {
        lower: Grid::filled(t_count, n, 0.0),
        upper: Grid::filled(t_count, n, 1.0),
        log_normaliser: Grid::filled(t_count, n, 0.0),
    };
    let changed_rows = vec![true; t_count];
    let (base, base_bounds) = (x.clone(), bounds.clone());
    reconstruct_from(
        u,
        model,
        kind,
        emissions,
        (&base, &base_bounds),
        0,
        &changed_rows,
        (&mut x, &mut bounds),
    )?;
    Ok(x)
}

/// Forward map from `U*` starting at time `t0`, writing the result and its
/// reproducing bounds into `out`. Rows `< t0` are copied from `base`, which
/// must be the image of `U*` on those rows.
///
/// A row whose predecessor row is unchanged and that has no entry in
/// `changed_rows` is also copied from `base`: its governing rows are the
/// same and `U*` still lies inside the base bounds there. On error `out`
/// holds the rows computed so far, followed by `base`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn reconstruct_from<M: ModelSpec>(
    u_star: &UniformGrid,
    model: &M,
    kind: ProposalKind,
    emissions: &EmissionTable,
    base: (&HiddenStateMatrix, &BoundsGrids),
    t0: usize,
    changed_rows: &[bool],
    out: (&mut HiddenStateMatrix, &mut BoundsGrids),
) -> Result<()> {
    let (x, bounds) = out;
    x.clone_from(base.0);
    bounds.clone_from(base.1);
    let (t_count, n, s_count) = (x.num_timepoints(), x.num_individuals(), model.num_states());
    let mut probs = vec![0.0; s_count];
    let mut counts = if t0 > 0 {
        state_counts(x.row(t0 - 1), s_count)
    } else {
        Vec::new()
    };
    let mut prev_changed = t0 == 0;
    for t in t0..t_count {
        if t > t0 && !prev_changed && !changed_rows[t] {
            counts = state_counts(x.row(t), s_count);
            continue;
        }
        let (prev, row) = x.prev_and_row_mut(t);
        let snapshot = (t > 0).then(|| Snapshot {
            states: prev,
            counts: &counts,
        });
        let mut row_changed = false;
        for j in 0..n {
            let log_c = governing_row(model, kind, emissions, t, j, snapshot.as_ref(), &mut probs);
            if log_c == f64::NEG_INFINITY {
                return Err(Error::ZeroNormaliser { t: t + 1, j: j + 1 });
            }
            let s: State = categorical_index(u_star.get(t, j), &probs);
            let (lo, hi) = categorical_interval(&probs, s);
            row_changed |= row[j] != s;
            row[j] = s;
            *bounds.lower.get_mut(t, j) = lo;
            *bounds.upper.get_mut(t, j) = hi;
            *bounds.log_normaliser.get_mut(t, j) = log_c;
        }
        prev_changed = row_changed;
        counts = state_counts(x.row(t), s_count);
    }
    Ok(())
}
