//! Mean absolute jump distance between consecutive latent samples.

use crate::chmm::HiddenStateMatrix;

fn check_pair(a: &HiddenStateMatrix, b: &HiddenStateMatrix) {
    assert!(
        a.num_timepoints() == b.num_timepoints() && a.num_individuals() == b.num_individuals(),
        "jump distance between matrices of different shapes"
    );
}

/// `sum |x - x'|` over cells, for models whose state labels are ordered
/// along the disease progression.
pub fn ordered_distance(a: &HiddenStateMatrix, b: &HiddenStateMatrix) -> usize {
    check_pair(a, b);
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| x.abs_diff(y))
        .sum()
}

/// Number of cells whose state differs.
pub fn indicator_distance(a: &HiddenStateMatrix, b: &HiddenStateMatrix) -> usize {
    a.count_differences(b)
}

fn majd_with(
    trace: &[HiddenStateMatrix],
    distance: fn(&HiddenStateMatrix, &HiddenStateMatrix) -> usize,
) -> f64 {
    if trace.len() < 2 {
        return 0.0;
    }
    let total: usize = trace.windows(2).map(|w| distance(&w[0], &w[1])).sum();
    total as f64 / (trace.len() - 1) as f64
}

/// `(1/K) sum_k sum_{t,j} |x^(k) - x^(k-1)|` over a trace `x^(0), ..., x^(K)`.
pub fn majd_ordered(trace: &[HiddenStateMatrix]) -> f64 {
    majd_with(trace, ordered_distance)
}

/// `(1/K) sum_k sum_{t,j} 1{x^(k) != x^(k-1)}` over a trace `x^(0), ..., x^(K)`.
pub fn majd_indicator(trace: &[HiddenStateMatrix]) -> f64 {
    majd_with(trace, indicator_distance)
}

/// Both jump distances accumulated online, so long chains need not keep
/// every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpDistance {
    previous: Option<HiddenStateMatrix>,
    ordered: u64,
    indicator: u64,
    jumps: u64,
}

impl JumpDistance {
    pub fn new(initial: &HiddenStateMatrix) -> Self {
        Self {
            previous: Some(initial.clone()),
            ordered: 0,
            indicator: 0,
            jumps: 0,
        }
    }

    pub fn push(&mut self, x: &HiddenStateMatrix) {
        if let Some(prev) = &mut self.previous {
            self.ordered += ordered_distance(prev, x) as u64;
            self.indicator += indicator_distance(prev, x) as u64;
            self.jumps += 1;
            prev.clone_from(x);
        } else {
            self.previous = Some(x.clone());
        }
    }

    pub fn num_jumps(&self) -> u64 {
        self.jumps
    }

    pub fn majd_ordered(&self) -> f64 {
        if self.jumps == 0 {
            0.0
        } else {
            self.ordered as f64 / self.jumps as f64
        }
    }

    pub fn majd_indicator(&self) -> f64 {
        if self.jumps == 0 {
            0.0
        } else {
            self.indicator as f64 / self.jumps as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(states: &[usize]) -> HiddenStateMatrix {
        let rows: Vec<Vec<usize>> = states.iter().map(|&s| vec![s]).collect();
        HiddenStateMatrix::from_rows(4, &rows).unwrap()
    }

    #[test]
    fn constant_chain_has_zero_jump() {
        let x = column(&[0, 1, 2]);
        let trace = vec![x.clone(), x.clone(), x];
        assert_eq!(majd_ordered(&trace), 0.0);
        assert_eq!(majd_indicator(&trace), 0.0);
    }

    #[test]
    fn single_cell_change() {
        let trace = vec![column(&[0, 0]), column(&[0, 2])];
        assert_eq!(majd_ordered(&trace), 2.0);
        assert_eq!(majd_indicator(&trace), 1.0);
    }

    #[test]
    fn online_matches_batch() {
        let trace = vec![
            column(&[0, 0, 1]),
            column(&[1, 3, 1]),
            column(&[1, 0, 2]),
            column(&[1, 0, 2]),
        ];
        let mut online = JumpDistance::new(&trace[0]);
        for x in &trace[1..] {
            online.push(x);
        }
        assert_eq!(online.num_jumps(), 3);
        assert_eq!(online.majd_ordered(), majd_ordered(&trace));
        assert_eq!(online.majd_indicator(), majd_indicator(&trace));
        assert_eq!(majd_ordered(&trace), (1.0 + 3.0 + 3.0 + 1.0) / 3.0);
    }
}
