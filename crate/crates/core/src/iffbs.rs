//! Individual forward-filtering backward-sampling.
//!
//! Draws one individual's whole trajectory from its full conditional given
//! everyone else. Besides its own emissions and transitions, individual
//! `i`'s state at `t` enters every other individual's transition from `t`
//! to `t + 1` through the snapshot, so the filter weights state `s` at `t`
//! by the coupling factor
//! `h_t(s) = prod_{j != i} p_j(x_{t,j} -> x_{t+1,j} | x_{t,i} = s)`.
//!
//! With `alpha_0(s) ∝ p~(s) f_0(s) h_0(s)` and
//! `alpha_{t+1}(s') ∝ [sum_s alpha_t(s) A_t(s, s')] f_{t+1}(s') h_{t+1}(s')`,
//! where `A_t(s, .)` is `i`'s own transition row when `x_{t,i} = s` and
//! `h_{T-1} = 1`, backward sampling draws `x_{T-1} ~ alpha_{T-1}` and then
//! `x_t ∝ alpha_t(s) A_t(s, x_{t+1})`.

use rand::Rng;

use crate::chmm::{state_counts, EmissionTable, HiddenStateMatrix, ModelSpec, Snapshot, State};
use crate::error::{Error, Result};
use crate::kernel::{LatentKernel, UpdateRecord};
use crate::random::SamplerRng;

/// Filtered distributions of one individual and the transition matrices
/// needed to sample backwards.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTable {
    individual: usize,
    num_states: usize,
    num_timepoints: usize,
    /// `T x S`, each row normalised.
    probs: Vec<f64>,
    /// `(T - 1) x S x S`: `A_t(s, s')`.
    transitions: Vec<f64>,
}

impl FilterTable {
    pub fn individual(&self) -> usize {
        self.individual
    }

    pub fn num_timepoints(&self) -> usize {
        self.num_timepoints
    }

    /// Filtered distribution at time `t`.
    pub fn row(&self, t: usize) -> &[f64] {
        let s = self.num_states;
        &self.probs[t * s..(t + 1) * s]
    }

    /// `A_t(from, .)`.
    pub fn transition_row(&self, t: usize, from: State) -> &[f64] {
        let s = self.num_states;
        let k = (t * s + from) * s;
        &self.transitions[k..k + s]
    }
}

/// Reusable buffers for [`iffbs_filter`].
#[derive(Debug, Clone, Default)]
struct Scratch {
    snapshot: Vec<State>,
    counts: Vec<usize>,
    row: Vec<f64>,
    log_h: Vec<f64>,
    log_w: Vec<f64>,
}

/// `log h_t(s)` for every `s` (all zero at the last time-point), and
/// `A_t(s, .)` into `transitions` for `t < T - 1`.
fn coupling_and_transitions<M: ModelSpec>(
    model: &M,
    x: &HiddenStateMatrix,
    i: usize,
    t: usize,
    scratch: &mut Scratch,
    transitions: &mut [f64],
) {
    let s_count = model.num_states();
    scratch.log_h.clear();
    scratch.log_h.resize(s_count, 0.0);
    if t + 1 == x.num_timepoints() {
        return;
    }
    scratch.snapshot.clear();
    scratch.snapshot.extend_from_slice(x.row(t));
    let base_counts = state_counts(x.row(t), s_count);
    let next = x.row(t + 1);
    let own = x.get(t, i);
    scratch.row.resize(s_count, 0.0);
    for s in 0..s_count {
        scratch.snapshot[i] = s;
        scratch.counts.clear();
        scratch.counts.extend_from_slice(&base_counts);
        scratch.counts[own] -= 1;
        scratch.counts[s] += 1;
        let snap = Snapshot {
            states: &scratch.snapshot,
            counts: &scratch.counts,
        };
        let k = (t * s_count + s) * s_count;
        model.transition_probs(t, i, s, &snap, &mut transitions[k..k + s_count]);
        let mut log_h = 0.0;
        for (j, (&from, &to)) in scratch.snapshot.iter().zip(next).enumerate() {
            if j == i {
                continue;
            }
            model.transition_probs(t, j, from, &snap, &mut scratch.row);
            log_h += scratch.row[to].ln();
        }
        scratch.log_h[s] = log_h;
    }
}

fn filter_with<M: ModelSpec>(
    i: usize,
    x: &HiddenStateMatrix,
    emissions: &EmissionTable,
    model: &M,
    scratch: &mut Scratch,
) -> Result<FilterTable> {
    let (t_count, s_count) = (x.num_timepoints(), model.num_states());
    emissions.check_shape(t_count, x.num_individuals())?;
    let mut probs = vec![0.0; t_count * s_count];
    let mut transitions = vec![0.0; (t_count - 1) * s_count * s_count];
    let mut prior = vec![0.0; s_count];
    for t in 0..t_count {
        coupling_and_transitions(model, x, i, t, scratch, &mut transitions);
        scratch.log_w.clear();
        if t == 0 {
            model.initial_probs(i, &mut prior);
        } else {
            let (done, _) = probs.split_at(t * s_count);
            let prev = &done[(t - 1) * s_count..];
            for (to, p) in prior.iter_mut().enumerate() {
                *p = (0..s_count)
                    .map(|from| prev[from] * transitions[((t - 1) * s_count + from) * s_count + to])
                    .sum();
            }
        }
        for s in 0..s_count {
            let lw = prior[s].ln() + emissions.log_f(t, i, s) + scratch.log_h[s];
            scratch.log_w.push(lw);
        }
        let max = scratch.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY || max.is_nan() {
            return Err(Error::FilterInfeasible {
                individual: i + 1,
                t: t + 1,
            });
        }
        let row = &mut probs[t * s_count..(t + 1) * s_count];
        let mut total = 0.0;
        for (p, &lw) in row.iter_mut().zip(&scratch.log_w) {
            *p = (lw - max).exp();
            total += *p;
        }
        for p in row.iter_mut() {
            *p /= total;
        }
    }
    Ok(FilterTable {
        individual: i,
        num_states: s_count,
        num_timepoints: t_count,
        probs,
        transitions,
    })
}

/// Forward filter for individual `i` given every other trajectory in `x`.
pub fn iffbs_filter<M: ModelSpec>(
    i: usize,
    x: &HiddenStateMatrix,
    emissions: &EmissionTable,
    model: &M,
) -> Result<FilterTable> {
    filter_with(i, x, emissions, model, &mut Scratch::default())
}

fn draw_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> State {
    let total: f64 = weights.iter().sum();
    let r = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (s, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = s;
            if r < acc {
                return s;
            }
        }
    }
    last
}

/// Backward sampling pass: a trajectory drawn from the full conditional
/// encoded by `table`.
pub fn iffbs_backward_sample<R: Rng + ?Sized>(table: &FilterTable, rng: &mut R) -> Vec<State> {
    let (t_count, s_count) = (table.num_timepoints, table.num_states);
    let mut path = vec![0; t_count];
    path[t_count - 1] = draw_weighted(table.row(t_count - 1), rng);
    let mut w = vec![0.0; s_count];
    for t in (0..t_count - 1).rev() {
        let next = path[t + 1];
        for (s, ws) in w.iter_mut().enumerate() {
            *ws = table.row(t)[s] * table.transition_row(t, s)[next];
        }
        path[t] = draw_weighted(&w, rng);
    }
    path
}

/// Gibbs updates of one uniformly chosen individual's trajectory at a time.
#[derive(Debug, Clone)]
pub struct IffbsSampler<M> {
    model: M,
    emissions: EmissionTable,
    x: HiddenStateMatrix,
    scratch: Scratch,
}

impl<M: ModelSpec> IffbsSampler<M> {
    pub fn new(model: M, emissions: EmissionTable, x0: HiddenStateMatrix) -> Result<Self> {
        emissions.check_shape(x0.num_timepoints(), x0.num_individuals())?;
        Ok(Self {
            model,
            emissions,
            x: x0,
            scratch: Scratch::default(),
        })
    }

    /// Redraws individual `i`'s trajectory; returns the number of changed
    /// cells.
    pub fn update_individual(&mut self, i: usize, rng: &mut SamplerRng) -> Result<usize> {
        let table = filter_with(i, &self.x, &self.emissions, &self.model, &mut self.scratch)?;
        let path = iffbs_backward_sample(&table, rng);
        let changed = path
            .iter()
            .enumerate()
            .filter(|&(t, &s)| self.x.get(t, i) != s)
            .count();
        self.x.set_column(i, &path);
        Ok(changed)
    }
}

impl<M: ModelSpec> LatentKernel<M> for IffbsSampler<M> {
    fn name(&self) -> &'static str {
        "iffbs"
    }

    fn update(&mut self, rng: &mut SamplerRng) -> UpdateRecord {
        let i = rng.gen_range(0..self.x.num_individuals());
        match self.update_individual(i, rng) {
            Ok(changed) => UpdateRecord::gibbs(changed),
            Err(_) => UpdateRecord {
                accepted: false,
                log_ratio: f64::NEG_INFINITY,
                ..UpdateRecord::gibbs(0)
            },
        }
    }

    fn state(&self) -> &HiddenStateMatrix {
        &self.x
    }

    fn model(&self) -> &M {
        &self.model
    }

    fn set_model(&mut self, model: M) -> Result<()> {
        self.model = model;
        Ok(())
    }
}

/// `updates` single-individual updates, individuals chosen uniformly.
pub fn iffbs_sweep<M: ModelSpec>(
    sampler: &mut IffbsSampler<M>,
    updates: usize,
    rng: &mut SamplerRng,
) -> Vec<UpdateRecord> {
    sampler.sweep(updates, rng)
}
