//! Per-iteration state counts and their posterior credible intervals.

use std::io::Write;

use serde::Serialize;

use crate::chmm::{state_counts, HiddenStateMatrix, State};
use crate::error::{Error, Result};

/// Default fraction of iterations discarded before summarising.
pub const DEFAULT_BURN_IN: f64 = 0.1;

/// For every stored iteration, how many individuals are in each state at
/// each time-point.
#[derive(Debug, Clone, PartialEq)]
pub struct StateCountSeries {
    num_states: usize,
    num_timepoints: usize,
    num_individuals: usize,
    /// Iteration-major, then `t`, then state.
    counts: Vec<u32>,
}

impl StateCountSeries {
    pub fn new(num_states: usize, num_timepoints: usize, num_individuals: usize) -> Self {
        Self {
            num_states,
            num_timepoints,
            num_individuals,
            counts: Vec::new(),
        }
    }

    pub fn push(&mut self, x: &HiddenStateMatrix) {
        assert_eq!(x.num_timepoints(), self.num_timepoints);
        assert_eq!(x.num_individuals(), self.num_individuals);
        for t in 0..self.num_timepoints {
            let c = state_counts(x.row(t), self.num_states);
            self.counts.extend(c.iter().map(|&v| v as u32));
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_timepoints(&self) -> usize {
        self.num_timepoints
    }

    pub fn num_individuals(&self) -> usize {
        self.num_individuals
    }

    pub fn num_iterations(&self) -> usize {
        self.counts.len() / (self.num_timepoints * self.num_states).max(1)
    }

    pub fn count(&self, iteration: usize, t: usize, state: State) -> usize {
        self.counts[(iteration * self.num_timepoints + t) * self.num_states + state] as usize
    }

    /// Counts of `state` at `t` for every iteration from `start` on.
    pub fn values(&self, start: usize, t: usize, state: State) -> Vec<f64> {
        (start..self.num_iterations())
            .map(|k| self.count(k, t, state) as f64)
            .collect()
    }
}

/// Posterior summary of one `(t, state)` count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountInterval {
    pub t: usize,
    pub state: State,
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
}

impl CountInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

/// Empirical quantile with linear interpolation between order statistics.
/// `sorted` must be sorted and non-empty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median and central `level` interval of every `(t, state)` count after
/// discarding the first `burn_in` fraction of iterations.
pub fn credible_intervals(series: &StateCountSeries, level: f64, burn_in: f64) -> Result<Vec<CountInterval>> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!(
            "credible level {level} outside [0, 1]"
        )));
    }
    if !(0.0..1.0).contains(&burn_in) {
        return Err(Error::InvalidParameter(format!(
            "burn-in fraction {burn_in} outside [0, 1)"
        )));
    }
    let iterations = series.num_iterations();
    let start = (burn_in * iterations as f64).floor() as usize;
    if start >= iterations {
        return Err(Error::InvalidParameter("no iterations left after burn-in".into()));
    }
    let tail = (1.0 - level) / 2.0;
    let mut out = Vec::with_capacity(series.num_timepoints() * series.num_states());
    for t in 0..series.num_timepoints() {
        for state in 0..series.num_states() {
            let mut v = series.values(start, t, state);
            v.sort_by(f64::total_cmp);
            out.push(CountInterval {
                t,
                state,
                median: quantile(&v, 0.5),
                lo: quantile(&v, tail),
                hi: quantile(&v, 1.0 - tail),
            });
        }
    }
    Ok(out)
}

/// Fraction of intervals containing the matching count of `truth`.
pub fn coverage(intervals: &[CountInterval], truth: &HiddenStateMatrix) -> f64 {
    if intervals.is_empty() {
        return 1.0;
    }
    let s = truth.num_states();
    let hits = intervals
        .iter()
        .filter(|ci| ci.contains(state_counts(truth.row(ci.t), s)[ci.state] as f64))
        .count();
    hits as f64 / intervals.len() as f64
}

/// `t,state,median,lo,hi`, 1-based `t` and `state`.
pub fn write_credible_intervals<W: Write>(intervals: &[CountInterval], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "state", "median", "lo", "hi"])?;
    for ci in intervals {
        w.write_record([
            (ci.t + 1).to_string(),
            (ci.state + 1).to_string(),
            ci.median.to_string(),
            ci.lo.to_string(),
            ci.hi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[usize]) -> StateCountSeries {
        let mut s = StateCountSeries::new(2, 1, 10);
        for &v in values {
            let row: Vec<usize> = (0..10).map(|j| usize::from(j < v)).collect();
            s.push(&HiddenStateMatrix::from_rows(2, &[row]).unwrap());
        }
        s
    }

    #[test]
    fn rows_sum_to_population() {
        let s = series(&[3, 7]);
        for k in 0..2 {
            assert_eq!(s.count(k, 0, 0) + s.count(k, 0, 1), 10);
        }
    }

    #[test]
    fn constant_series_gives_zero_width() {
        let ci = credible_intervals(&series(&[4; 20]), 0.95, 0.1).unwrap();
        assert!(ci.iter().all(|c| c.lo == c.hi && c.lo == c.median));
        assert_eq!(ci[1].median, 4.0);
    }

    #[test]
    fn full_level_is_sample_range_and_zero_level_is_median() {
        let s = series(&[5, 1, 9, 3, 7]);
        let full = credible_intervals(&s, 1.0, 0.0).unwrap();
        assert_eq!((full[1].lo, full[1].hi), (1.0, 9.0));
        let zero = credible_intervals(&s, 0.0, 0.0).unwrap();
        assert_eq!((zero[1].lo, zero[1].hi), (5.0, 5.0));
    }

    #[test]
    fn burn_in_drops_leading_iterations() {
        let ci = credible_intervals(&series(&[0, 0, 8, 8, 8, 8, 8, 8, 8, 8]), 1.0, 0.2).unwrap();
        assert_eq!(ci[1].lo, 8.0);
    }

    #[test]
    fn interval_csv_is_one_based() {
        let ci = credible_intervals(&series(&[2, 4]), 1.0, 0.0).unwrap();
        let mut out = Vec::new();
        write_credible_intervals(&ci, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "t,state,median,lo,hi\n1,1,7,6,8\n1,2,3,2,4\n"
        );
    }

    #[test]
    fn interpolated_quantiles() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert!((quantile(&[0.0, 10.0], 0.025) - 0.25).abs() < 1e-12);
    }
}
