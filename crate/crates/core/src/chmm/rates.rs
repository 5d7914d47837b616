//! Conversion of one row of a transition-rate matrix into one-step
//! transition probabilities, without a matrix exponential.
//!
//! With total exit rate `-q_rr`, the chance of leaving state `r` within one
//! time unit is `1 - exp(q_rr)`; a departure lands in `s` with probability
//! proportional to `q_rs`.

use crate::error::{Error, Result};

use super::State;

/// Tolerance inside which a probability row is accepted as-is.
pub(crate) const SUM_EXACT_TOL: f64 = 1e-12;
/// Rows off by more than `SUM_EXACT_TOL` but within this are renormalised.
pub(crate) const SUM_RENORM_TOL: f64 = 1e-9;

/// One row of a rate matrix `Q`: non-negative off-diagonal rates and a
/// diagonal equal to minus their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRateRow {
    rates: Vec<f64>,
    row: State,
}

impl TransitionRateRow {
    /// Validates a full rate row for `row`, diagonal included.
    pub fn new(rates: Vec<f64>, row: State) -> Result<Self> {
        validate_rate_row(&rates, row)?;
        Ok(Self { rates, row })
    }

    /// Builds the row from off-diagonal rates; the diagonal entry of
    /// `off_diagonal` is ignored and replaced by minus the row sum.
    pub fn from_off_diagonal(mut off_diagonal: Vec<f64>, row: State) -> Result<Self> {
        if row >= off_diagonal.len() {
            return Err(Error::InvalidRateRow(format!(
                "row {row} outside a row of length {}",
                off_diagonal.len()
            )));
        }
        off_diagonal[row] = 0.0;
        let total: f64 = off_diagonal.iter().sum();
        off_diagonal[row] = -total;
        Self::new(off_diagonal, row)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn row(&self) -> State {
        self.row
    }
}

/// A probability vector over the `S` destination states.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionProbRow {
    probs: Vec<f64>,
}

impl TransitionProbRow {
    /// Accepts rows summing to one within `1e-12`, renormalises rows within
    /// `1e-9` and rejects anything further off.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        check_and_normalise(&mut probs)?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// Converts the rate row of the current state into its transition
/// probability row.
pub fn rates_to_probs(row: &TransitionRateRow, current_state: State) -> Result<TransitionProbRow> {
    if current_state != row.row {
        return Err(Error::InvalidRateRow(format!(
            "rate row belongs to state {} but current state is {}",
            row.row + 1,
            current_state + 1
        )));
    }
    let mut probs = row.rates.clone();
    rates_to_probs_in_place(&mut probs, current_state)?;
    Ok(TransitionProbRow { probs })
}

/// Allocation-free variant used by the model implementations: `row` holds
/// the rate row of `current` on entry and its probability row on exit.
pub fn rates_to_probs_in_place(row: &mut [f64], current: State) -> Result<()> {
    validate_rate_row(row, current)?;
    let q_rr = row[current];
    if q_rr == 0.0 {
        row.fill(0.0);
        row[current] = 1.0;
        return Ok(());
    }
    let exit_rate = -q_rr;
    let leave = -q_rr.exp_m1();
    for (s, p) in row.iter_mut().enumerate() {
        if s != current {
            *p = *p / exit_rate * leave;
        }
    }
    row[current] = q_rr.exp();
    check_and_normalise(row)
}

fn validate_rate_row(rates: &[f64], row: State) -> Result<()> {
    if row >= rates.len() {
        return Err(Error::InvalidRateRow(format!(
            "row {row} outside a row of length {}",
            rates.len()
        )));
    }
    let mut off_sum = 0.0;
    for (s, &q) in rates.iter().enumerate() {
        if s == row {
            continue;
        }
        if q < 0.0 || !q.is_finite() {
            return Err(Error::InvalidRateRow(format!(
                "off-diagonal rate q[{},{}] = {q} must be finite and non-negative",
                row + 1,
                s + 1
            )));
        }
        off_sum += q;
    }
    let diag = rates[row];
    if (diag + off_sum).abs() > SUM_EXACT_TOL * off_sum.max(1.0) {
        return Err(Error::InvalidRateRow(format!(
            "diagonal {diag} does not equal minus the off-diagonal sum {off_sum}"
        )));
    }
    Ok(())
}

pub(crate) fn check_and_normalise(probs: &mut [f64]) -> Result<()> {
    let mut sum = 0.0;
    for &p in probs.iter() {
        if !(0.0..=1.0 + SUM_RENORM_TOL).contains(&p) {
            return Err(Error::InvalidProbRow { sum: f64::NAN });
        }
        sum += p;
    }
    let err = (sum - 1.0).abs();
    if err <= SUM_EXACT_TOL {
        return Ok(());
    }
    if err <= SUM_RENORM_TOL {
        for p in probs.iter_mut() {
            *p /= sum;
        }
        return Ok(());
    }
    Err(Error::InvalidProbRow { sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn absorbing_state_stays_put() {
        let row = TransitionRateRow::from_off_diagonal(vec![0.0, 0.0, 0.0], 0).unwrap();
        let p = rates_to_probs(&row, 0).unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0, 0.0]);
    }

    // Expected values evaluated at 30 significant digits with mpmath:
    // exp(-0.125) = 0.882496902584595402864892143229
    // exp(-1)     = 0.367879441171442321595523770161
    #[test]
    fn two_state_closed_form() {
        let row = TransitionRateRow::from_off_diagonal(vec![0.0, 0.125], 0).unwrap();
        let p = rates_to_probs(&row, 0).unwrap();
        assert_abs_diff_eq!(p.probs()[0], 0.882496902584595402864892143229, epsilon = 1e-15);
        assert_abs_diff_eq!(p.probs()[1], 0.117503097415404597135107856771, epsilon = 1e-15);
    }

    #[test]
    fn equal_rates_split_departures_evenly() {
        let row = TransitionRateRow::from_off_diagonal(vec![0.0, 0.5, 0.5], 0).unwrap();
        let p = rates_to_probs(&row, 0).unwrap();
        assert_abs_diff_eq!(p.probs()[0], 0.367879441171442321595523770161, epsilon = 1e-15);
        assert_abs_diff_eq!(p.probs()[1], 0.316060279414278839202238114919, epsilon = 1e-15);
        assert_abs_diff_eq!(p.probs()[2], 0.316060279414278839202238114919, epsilon = 1e-15);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(TransitionRateRow::new(vec![-1.0, -1.0, 2.0], 0).is_err());
        assert!(TransitionRateRow::new(vec![-0.5, 1.0], 0).is_err());
        assert!(TransitionRateRow::new(vec![-1.0, f64::NAN], 0).is_err());
        let row = TransitionRateRow::from_off_diagonal(vec![0.0, 1.0], 0).unwrap();
        assert!(rates_to_probs(&row, 1).is_err());
    }

    #[test]
    fn probability_rows_are_renormalised_only_within_tolerance() {
        let p = TransitionProbRow::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert_abs_diff_eq!(p.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(TransitionProbRow::new(vec![0.5, 0.5 + 1e-8]).is_err());
    }

    proptest! {
        #[test]
        fn converted_rows_sum_to_one(
            rates in proptest::collection::vec(0.0f64..50.0, 2..12),
            zero_mask in proptest::collection::vec(any::<bool>(), 12),
            pick in 0usize..12,
        ) {
            let s = rates.len();
            let current = pick % s;
            let off: Vec<f64> = rates
                .iter()
                .zip(&zero_mask)
                .map(|(&q, &z)| if z { 0.0 } else { q })
                .collect();
            let row = TransitionRateRow::from_off_diagonal(off, current).unwrap();
            let p = rates_to_probs(&row, current).unwrap();
            let sum: f64 = p.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(p.probs().iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }
}
