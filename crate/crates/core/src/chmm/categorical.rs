//! Inverse-CDF map from a unit-interval value to a categorical outcome.
//!
//! State `s` owns the half-open interval `[cum_{s-1}, cum_s)` of the
//! cumulative sums. The upper end of the last positive-probability state is
//! pinned to exactly 1 so that rounding in the cumulative sums never leaves a
//! gap below 1. [`categorical_index`] and [`categorical_interval`] share the
//! same accumulation order and therefore agree bit-for-bit.

use super::State;

#[inline]
fn last_positive(probs: &[f64]) -> State {
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("probability row has no positive entry")
}

/// The state `s` with `cum_{s-1} <= u < cum_s`.
#[inline]
pub fn categorical_index(u: f64, probs: &[f64]) -> State {
    let last = last_positive(probs);
    let mut cum = 0.0;
    for (s, &p) in probs.iter().enumerate().take(last) {
        cum += p;
        if u < cum {
            return s;
        }
    }
    last
}

/// The interval `[low, upp)` of unit values that [`categorical_index`] maps
/// to `state`. Zero-probability states get an empty interval.
#[inline]
pub fn categorical_interval(probs: &[f64], state: State) -> (f64, f64) {
    let last = last_positive(probs);
    let mut low = 0.0;
    for &p in &probs[..state.min(last)] {
        low += p;
    }
    if state < last {
        (low, low + probs[state])
    } else if state == last {
        (low, 1.0)
    } else {
        (1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_distribution() {
        assert_eq!(categorical_index(0.5, &[1.0, 0.0]), 0);
        assert_eq!(categorical_interval(&[1.0, 0.0], 0), (0.0, 1.0));
    }

    #[test]
    fn three_state_lookups() {
        let p = [0.1, 0.2, 0.7];
        assert_eq!(categorical_index(0.25, &p), 1);
        assert_eq!(categorical_index(0.95, &p), 2);
        assert_eq!(categorical_index(0.05, &p), 0);
    }

    #[test]
    fn cut_points_belong_to_the_upper_state() {
        let p = [0.25, 0.25, 0.5];
        assert_eq!(categorical_index(0.25, &p), 1);
        assert_eq!(categorical_index(0.5, &p), 2);
    }

    #[test]
    fn zero_probability_states_are_skipped() {
        let p = [0.0, 0.4, 0.0, 0.6, 0.0];
        assert_eq!(categorical_index(0.0, &p), 1);
        assert_eq!(categorical_index(0.39, &p), 1);
        assert_eq!(categorical_index(0.4, &p), 3);
        assert_eq!(categorical_index(0.999_999, &p), 3);
        let (lo, hi) = categorical_interval(&p, 2);
        assert_eq!(lo, hi);
        assert_eq!(categorical_interval(&p, 4), (1.0, 1.0));
    }

    // Sweep a fine grid and check each state's preimage is an interval whose
    // length matches its probability.
    #[test]
    fn preimage_lengths_match_probabilities() {
        let p = [0.15, 0.0, 0.35, 0.1, 0.4];
        let steps = 100_000;
        let mut hits = [0usize; 5];
        let mut last_state = 0;
        for k in 0..steps {
            let u = (k as f64 + 0.5) / steps as f64;
            let s = categorical_index(u, &p);
            assert!(s >= last_state, "preimages must be ordered intervals");
            last_state = s;
            hits[s] += 1;
        }
        for (s, &h) in hits.iter().enumerate() {
            let len = h as f64 / steps as f64;
            assert!((len - p[s]).abs() <= 1.0 / steps as f64, "state {s}: {len}");
        }
    }

    proptest! {
        #[test]
        fn interval_and_index_agree(
            weights in proptest::collection::vec(0.0f64..1.0, 2..10),
            u in 0.0f64..1.0,
        ) {
            prop_assume!(weights.iter().any(|&w| w > 1e-6));
            let total: f64 = weights.iter().sum();
            let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let s = categorical_index(u, &p);
            prop_assert!(p[s] > 0.0);
            let (lo, hi) = categorical_interval(&p, s);
            prop_assert!(lo <= u && u < hi);
            for (other, _) in p.iter().enumerate().filter(|&(o, _)| o != s) {
                let (a, b) = categorical_interval(&p, other);
                prop_assert!(!(a <= u && u < b));
            }
        }
    }
}
