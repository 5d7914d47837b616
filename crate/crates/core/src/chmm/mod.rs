//! Coupled hidden Markov model data model.
//!
//! An epidemic over `N` individuals and `T` time-points is a `T x N` grid of
//! hidden states, one Markov chain per individual, where the transition
//! probabilities of every chain at time `t` may depend on the states of all
//! chains at `t`. Observations are a grid of the same shape with missing
//! entries.
//!
//! State indices are **0-based** throughout the API. Files written by
//! [`csv_io`] use 1-based time, individual and state indices.

mod categorical;
pub mod csv_io;
mod emission;
mod rates;
mod simulate;

use std::fmt;

use crate::error::{Error, Result};

pub use categorical::{categorical_index, categorical_interval};
pub use emission::EmissionTable;
pub use rates::{rates_to_probs, rates_to_probs_in_place, TransitionProbRow, TransitionRateRow};
pub use simulate::{
    log_prior, observation_loglik_total, simulate_centred, simulate_noncentred, state_counts,
};

/// 0-based hidden state index.
pub type State = usize;

/// A `(t, j)` cell of a `T x N` grid, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub t: usize,
    pub j: usize,
}

impl Cell {
    pub fn new(t: usize, j: usize) -> Self {
        Self { t, j }
    }
}

/// Dimensions of a CHMM: `S` states, `N` individuals, `T` time-points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    num_states: usize,
    num_individuals: usize,
    num_timepoints: usize,
}

impl StateSpace {
    pub fn new(num_states: usize, num_individuals: usize, num_timepoints: usize) -> Result<Self> {
        if num_states < 2 {
            return Err(Error::InvalidStateSpace(format!(
                "need at least 2 states, got {num_states}"
            )));
        }
        if num_individuals < 1 {
            return Err(Error::InvalidStateSpace("need at least 1 individual".into()));
        }
        if num_timepoints < 2 {
            return Err(Error::InvalidStateSpace(format!(
                "need at least 2 time-points, got {num_timepoints}"
            )));
        }
        Ok(Self {
            num_states,
            num_individuals,
            num_timepoints,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_individuals(&self) -> usize {
        self.num_individuals
    }

    pub fn num_timepoints(&self) -> usize {
        self.num_timepoints
    }

    pub fn num_cells(&self) -> usize {
        self.num_individuals * self.num_timepoints
    }
}

/// Row-major `T x N` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<V> {
    num_timepoints: usize,
    num_individuals: usize,
    data: Vec<V>,
}

impl<V: Clone> Grid<V> {
    pub fn filled(num_timepoints: usize, num_individuals: usize, value: V) -> Self {
        Self {
            num_timepoints,
            num_individuals,
            data: vec![value; num_timepoints * num_individuals],
        }
    }
}

impl<V> Grid<V> {
    pub fn from_vec(num_timepoints: usize, num_individuals: usize, data: Vec<V>) -> Result<Self> {
        if data.len() != num_timepoints * num_individuals {
            return Err(Error::DimensionMismatch(format!(
                "expected {} x {} = {} values, got {}",
                num_timepoints,
                num_individuals,
                num_timepoints * num_individuals,
                data.len()
            )));
        }
        Ok(Self {
            num_timepoints,
            num_individuals,
            data,
        })
    }

    pub fn num_timepoints(&self) -> usize {
        self.num_timepoints
    }

    pub fn num_individuals(&self) -> usize {
        self.num_individuals
    }

    #[inline]
    pub fn get(&self, t: usize, j: usize) -> &V {
        &self.data[t * self.num_individuals + j]
    }

    #[inline]
    pub fn get_mut(&mut self, t: usize, j: usize) -> &mut V {
        &mut self.data[t * self.num_individuals + j]
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[V] {
        let n = self.num_individuals;
        &self.data[t * n..(t + 1) * n]
    }

    #[inline]
    pub fn row_mut(&mut self, t: usize) -> &mut [V] {
        let n = self.num_individuals;
        &mut self.data[t * n..(t + 1) * n]
    }

    pub fn as_slice(&self) -> &[V] {
        &self.data
    }

    pub fn cells(&self) -> impl Iterator<Item = (Cell, &V)> {
        let n = self.num_individuals;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (Cell::new(k / n, k % n), v))
    }

    fn same_shape<W>(&self, other: &Grid<W>) -> bool {
        self.num_timepoints == other.num_timepoints && self.num_individuals == other.num_individuals
    }
}

/// The latent epidemic `X`: a `T x N` grid of 0-based states.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenStateMatrix {
    num_states: usize,
    grid: Grid<State>,
}

impl HiddenStateMatrix {
    pub fn new(num_states: usize, grid: Grid<State>) -> Result<Self> {
        for (cell, &s) in grid.cells() {
            if s >= num_states {
                return Err(Error::StateOutOfRange {
                    t: cell.t + 1,
                    j: cell.j + 1,
                    state: s + 1,
                    num_states,
                });
            }
        }
        Ok(Self { num_states, grid })
    }

    /// All individuals in `state` at every time-point.
    pub fn constant(space: &StateSpace, state: State) -> Self {
        assert!(state < space.num_states());
        Self {
            num_states: space.num_states(),
            grid: Grid::filled(space.num_timepoints(), space.num_individuals(), state),
        }
    }

    pub fn from_rows(num_states: usize, rows: &[Vec<State>]) -> Result<Self> {
        let t = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(num_states, Grid::from_vec(t, n, rows.concat())?)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_timepoints(&self) -> usize {
        self.grid.num_timepoints()
    }

    pub fn num_individuals(&self) -> usize {
        self.grid.num_individuals()
    }

    #[inline]
    pub fn get(&self, t: usize, j: usize) -> State {
        *self.grid.get(t, j)
    }

    /// Overwrites one cell. Panics if `state` is out of range.
    pub fn set(&mut self, t: usize, j: usize, state: State) {
        assert!(state < self.num_states, "state {state} out of range");
        *self.grid.get_mut(t, j) = state;
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[State] {
        self.grid.row(t)
    }

    /// Row `t - 1` (empty for `t = 0`) and a mutable row `t`.
    pub(crate) fn prev_and_row_mut(&mut self, t: usize) -> (&[State], &mut [State]) {
        let n = self.num_individuals();
        let (head, tail) = self.grid.data.split_at_mut(t * n);
        let prev = if t == 0 { &head[..0] } else { &head[(t - 1) * n..] };
        (prev, &mut tail[..n])
    }

    pub fn column(&self, j: usize) -> Vec<State> {
        (0..self.num_timepoints()).map(|t| self.get(t, j)).collect()
    }

    /// Replaces the trajectory of individual `j`.
    pub fn set_column(&mut self, j: usize, states: &[State]) {
        assert_eq!(states.len(), self.num_timepoints());
        for (t, &s) in states.iter().enumerate() {
            self.set(t, j, s);
        }
    }

    pub fn grid(&self) -> &Grid<State> {
        &self.grid
    }

    pub fn as_slice(&self) -> &[State] {
        self.grid.as_slice()
    }

    /// Number of cells at which `self` and `other` differ.
    pub fn count_differences(&self, other: &HiddenStateMatrix) -> usize {
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn check_space(&self, space: &StateSpace) -> Result<()> {
        if self.num_states != space.num_states()
            || self.num_timepoints() != space.num_timepoints()
            || self.num_individuals() != space.num_individuals()
        {
            return Err(Error::DimensionMismatch(format!(
                "hidden states are {}x{} over {} states, model expects {}x{} over {}",
                self.num_timepoints(),
                self.num_individuals(),
                self.num_states,
                space.num_timepoints(),
                space.num_individuals(),
                space.num_states()
            )));
        }
        Ok(())
    }
}

/// A grid of values strictly inside `(0, 1)`: the non-centred representation `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    grid: Grid<f64>,
}

impl UniformGrid {
    pub fn new(grid: Grid<f64>) -> Result<Self> {
        for (cell, &u) in grid.cells() {
            if !(u > 0.0 && u < 1.0) {
                return Err(Error::InvalidUniform {
                    t: cell.t + 1,
                    j: cell.j + 1,
                    value: u,
                });
            }
        }
        Ok(Self { grid })
    }

    /// Skips validation; callers guarantee every value lies in `(0, 1)`.
    pub(crate) fn from_grid_unchecked(grid: Grid<f64>) -> Self {
        debug_assert!(grid.as_slice().iter().all(|&u| u > 0.0 && u < 1.0));
        Self { grid }
    }

    pub fn draw<R: rand::Rng + ?Sized>(space: &StateSpace, rng: &mut R) -> Self {
        let data = (0..space.num_cells())
            .map(|_| crate::random::open_unit(rng))
            .collect();
        Self {
            grid: Grid::from_vec(space.num_timepoints(), space.num_individuals(), data)
                .expect("shape matches"),
        }
    }

    #[inline]
    pub fn get(&self, t: usize, j: usize) -> f64 {
        *self.grid.get(t, j)
    }

    pub(crate) fn set(&mut self, t: usize, j: usize, u: f64) {
        debug_assert!(u > 0.0 && u < 1.0);
        *self.grid.get_mut(t, j) = u;
    }

    pub fn num_timepoints(&self) -> usize {
        self.grid.num_timepoints()
    }

    pub fn num_individuals(&self) -> usize {
        self.grid.num_individuals()
    }

    pub fn grid(&self) -> &Grid<f64> {
        &self.grid
    }
}

/// Outcome of a transition-time observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecoveryCode {
    /// Not yet recovered: either susceptible or infective.
    SusceptibleOrInfective,
    /// Known infective (the time-point before recovery).
    Infective,
    /// Known recovered.
    Recovered,
}

/// A single observed value `y_{t,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observation {
    /// Diagnostic test result: `true` for a positive test.
    Test(bool),
    Recovery(RecoveryCode),
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Observation::Test(false) => "0",
            Observation::Test(true) => "1",
            Observation::Recovery(RecoveryCode::SusceptibleOrInfective) => "S/I",
            Observation::Recovery(RecoveryCode::Infective) => "I",
            Observation::Recovery(RecoveryCode::Recovered) => "R",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Observation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Observation::Test(false)),
            "1" => Ok(Observation::Test(true)),
            "S/I" => Ok(Observation::Recovery(RecoveryCode::SusceptibleOrInfective)),
            "I" => Ok(Observation::Recovery(RecoveryCode::Infective)),
            "R" => Ok(Observation::Recovery(RecoveryCode::Recovered)),
            other => Err(Error::Parse(format!("unknown observation value `{other}`"))),
        }
    }
}

/// The observation grid `Y`; `None` marks a missing observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    grid: Grid<Option<Observation>>,
}

impl ObservationMatrix {
    pub fn new(grid: Grid<Option<Observation>>) -> Self {
        Self { grid }
    }

    pub fn empty(num_timepoints: usize, num_individuals: usize) -> Self {
        Self {
            grid: Grid::filled(num_timepoints, num_individuals, None),
        }
    }

    #[inline]
    pub fn get(&self, t: usize, j: usize) -> Option<&Observation> {
        self.grid.get(t, j).as_ref()
    }

    pub fn set(&mut self, t: usize, j: usize, y: Option<Observation>) {
        *self.grid.get_mut(t, j) = y;
    }

    pub fn num_timepoints(&self) -> usize {
        self.grid.num_timepoints()
    }

    pub fn num_individuals(&self) -> usize {
        self.grid.num_individuals()
    }

    pub fn grid(&self) -> &Grid<Option<Observation>> {
        &self.grid
    }

    pub fn num_observed(&self) -> usize {
        self.grid.as_slice().iter().filter(|y| y.is_some()).count()
    }

    pub(crate) fn matches(&self, x: &HiddenStateMatrix) -> bool {
        self.grid.same_shape(x.grid())
    }
}

/// States of every individual at one time-point, together with per-state
/// counts. Transition probabilities may depend on either.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a> {
    pub states: &'a [State],
    pub counts: &'a [usize],
}

/// A CHMM: initial-state probabilities, state-dependent transition
/// probabilities and an observation likelihood.
///
/// `transition_probs` fills `out` (length `S`) with the distribution of
/// `x_{t+1,j}` given `x_{t,j} = from` and the time-`t` snapshot of all
/// individuals. `t` is 0-based and ranges over `0..T-1`.
pub trait ModelSpec: Sync {
    fn num_states(&self) -> usize;

    fn initial_probs(&self, individual: usize, out: &mut [f64]);

    fn transition_probs(
        &self,
        t: usize,
        individual: usize,
        from: State,
        snapshot: &Snapshot<'_>,
        out: &mut [f64],
    );

    /// `log f(y | x = state)`. May be `-inf` for incompatible pairs.
    fn observation_loglik(&self, y: &Observation, state: State) -> f64;

    /// Rejects observation values outside this model's observation domain.
    fn check_observation(&self, y: &Observation) -> Result<()>;

    /// Checks every observed value once, up front.
    fn check_observations(&self, y: &ObservationMatrix) -> Result<()> {
        for (_, obs) in y.grid().cells() {
            if let Some(o) = obs {
                self.check_observation(o)?;
            }
        }
        Ok(())
    }
}

impl<M: ModelSpec + ?Sized> ModelSpec for &M {
    fn num_states(&self) -> usize {
        (**self).num_states()
    }
    fn initial_probs(&self, individual: usize, out: &mut [f64]) {
        (**self).initial_probs(individual, out)
    }
    fn transition_probs(
        &self,
        t: usize,
        individual: usize,
        from: State,
        snapshot: &Snapshot<'_>,
        out: &mut [f64],
    ) {
        (**self).transition_probs(t, individual, from, snapshot, out)
    }
    fn observation_loglik(&self, y: &Observation, state: State) -> f64 {
        (**self).observation_loglik(y, state)
    }
    fn check_observation(&self, y: &Observation) -> Result<()> {
        (**self).check_observation(y)
    }
}
