//! Textbook forward-backward for a single hidden Markov chain, used as an
//! independent oracle for the coupled samplers when `N = 1`.

use crate::error::{Error, Result};

/// A homogeneous HMM with per-time emission likelihoods `lik[t][s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hmm {
    pub initial: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    pub likelihood: Vec<Vec<f64>>,
}

impl Hmm {
    fn check(&self) -> Result<usize> {
        let s = self.initial.len();
        let square = self.transition.len() == s && self.transition.iter().all(|r| r.len() == s);
        if s == 0 || !square || self.likelihood.is_empty() || self.likelihood.iter().any(|l| l.len() != s) {
            return Err(Error::DimensionMismatch(
                "hmm arrays disagree on the number of states".into(),
            ));
        }
        Ok(s)
    }

    /// Normalised filtered distributions `p(x_t | y_{0..=t})`.
    pub fn forward(&self) -> Result<Vec<Vec<f64>>> {
        let s = self.check()?;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.likelihood.len());
        for (t, lik) in self.likelihood.iter().enumerate() {
            let prior: Vec<f64> = if t == 0 {
                self.initial.clone()
            } else {
                let prev = &out[t - 1];
                (0..s)
                    .map(|b| (0..s).map(|a| prev[a] * self.transition[a][b]).sum())
                    .collect()
            };
            let mut row: Vec<f64> = prior.iter().zip(lik).map(|(p, l)| p * l).collect();
            let total: f64 = row.iter().sum();
            if total <= 0.0 {
                return Err(Error::FilterInfeasible {
                    individual: 1,
                    t: t + 1,
                });
            }
            row.iter_mut().for_each(|v| *v /= total);
            out.push(row);
        }
        Ok(out)
    }

    /// Smoothed marginals `p(x_t | y_{0..T})`.
    pub fn smoothed(&self) -> Result<Vec<Vec<f64>>> {
        let s = self.check()?;
        let alpha = self.forward()?;
        let t_count = alpha.len();
        let mut beta = vec![vec![1.0; s]; t_count];
        for t in (0..t_count - 1).rev() {
            let mut b: Vec<f64> = (0..s)
                .map(|a| {
                    (0..s)
                        .map(|c| self.transition[a][c] * self.likelihood[t + 1][c] * beta[t + 1][c])
                        .sum()
                })
                .collect();
            let total: f64 = b.iter().sum();
            b.iter_mut().for_each(|v| *v /= total);
            beta[t] = b;
        }
        Ok(alpha
            .iter()
            .zip(&beta)
            .map(|(a, b)| {
                let mut g: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
                let total: f64 = g.iter().sum();
                g.iter_mut().for_each(|v| *v /= total);
                g
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_chain_without_data_stays_uniform() {
        let hmm = Hmm {
            initial: vec![0.5, 0.5],
            transition: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            likelihood: vec![vec![1.0, 1.0]; 4],
        };
        for row in hmm.smoothed().unwrap() {
            assert!((row[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn two_step_smoothing_by_hand() {
        // p(x0, x1) ∝ init(x0) A(x0, x1) l0(x0) l1(x1), summed by hand.
        let hmm = Hmm {
            initial: vec![0.6, 0.4],
            transition: vec![vec![0.7, 0.3], vec![0.2, 0.8]],
            likelihood: vec![vec![0.9, 0.2], vec![0.1, 0.8]],
        };
        let joint = [
            0.6 * 0.9 * 0.7 * 0.1,
            0.6 * 0.9 * 0.3 * 0.8,
            0.4 * 0.2 * 0.2 * 0.1,
            0.4 * 0.2 * 0.8 * 0.8,
        ];
        let z: f64 = joint.iter().sum();
        let sm = hmm.smoothed().unwrap();
        assert!((sm[0][0] - (joint[0] + joint[1]) / z).abs() < 1e-14);
        assert!((sm[1][0] - (joint[0] + joint[2]) / z).abs() < 1e-14);
    }
}
