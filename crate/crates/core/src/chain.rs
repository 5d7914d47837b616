//! The outer MCMC loop: `K` iterations, each an optional parameter update
//! followed by `K'` latent-state updates with the chosen kernel.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::chmm::{log_prior, state_counts, EmissionTable, HiddenStateMatrix};
use crate::diagnostics::{JumpDistance, StateCountSeries, DEFAULT_BURN_IN};
use crate::error::{Error, Result};
use crate::iffbs::IffbsSampler;
use crate::kernel::{initial_latent_state, LatentKernel, UpdateRecord};
use crate::models::EpidemicModel;
use crate::random::{derive_seed, open_unit, stream_rng, SamplerRng, Stream};
use crate::rippler::{
    AdaptiveTuner, KappaPolicy, ProposalKind, RipplerSampler, DEFAULT_EPSILON, DEFAULT_KAPPA_MAX,
    DEFAULT_TARGET_ACCEPTANCE,
};
use crate::rjmcmc::RjmcmcSampler;

/// Latent-state kernels available to a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Rippler,
    RipplerDataInformed,
    Iffbs,
    RjmcmcSir,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Rippler,
        KernelKind::RipplerDataInformed,
        KernelKind::Iffbs,
        KernelKind::RjmcmcSir,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Rippler => "rippler",
            KernelKind::RipplerDataInformed => "rippler-data-informed",
            KernelKind::Iffbs => "iffbs",
            KernelKind::RjmcmcSir => "rjmcmc-sir",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown kernel `{name}`")))
    }

    fn proposal_kind(self) -> Option<ProposalKind> {
        match self {
            KernelKind::Rippler => Some(ProposalKind::Standard),
            KernelKind::RipplerDataInformed => Some(ProposalKind::DataInformed),
            _ => None,
        }
    }
}

/// Epsilon-greedy tuner settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TunerSettings {
    pub epsilon: f64,
    pub kappa_max: usize,
    pub target_acceptance: f64,
}

impl Default for TunerSettings {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            kappa_max: DEFAULT_KAPPA_MAX,
            target_acceptance: DEFAULT_TARGET_ACCEPTANCE,
        }
    }
}

/// How the model parameters move between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum ParameterSettings {
    /// Parameters stay at their configured values.
    #[default]
    Fixed,
    /// Joint log-scale random walk on the transmission parameters under a
    /// flat prior on the log scale.
    RandomWalk { step: f64 },
}

/// Kernel choice and run length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSettings {
    pub kernel: KernelKind,
    /// `K`.
    pub iterations: usize,
    /// `K'`.
    pub updates_per_iteration: usize,
    /// Fixed number of cells per Rippler proposal; adaptive when absent.
    #[serde(default)]
    pub kappa: Option<usize>,
    #[serde(default)]
    pub tuner: TunerSettings,
    #[serde(default)]
    pub parameters: ParameterSettings,
    /// Fraction of iterations dropped from posterior summaries.
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
}

fn default_burn_in() -> f64 {
    DEFAULT_BURN_IN
}

impl SamplerSettings {
    pub fn new(kernel: KernelKind, iterations: usize, updates_per_iteration: usize) -> Self {
        Self {
            kernel,
            iterations,
            updates_per_iteration,
            kappa: None,
            tuner: TunerSettings::default(),
            parameters: ParameterSettings::Fixed,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa == Some(0) {
            return Err(Error::InvalidConfig("kappa must be at least 1".into()));
        }
        AdaptiveTuner::new(
            self.tuner.epsilon,
            self.tuner.kappa_max,
            self.tuner.target_acceptance,
        )
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::InvalidConfig(format!(
                "burn_in must lie in [0, 1), got {}",
                self.burn_in
            )));
        }
        if let ParameterSettings::RandomWalk { step } = self.parameters {
            if !(step.is_finite() && step > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "random-walk step must be positive, got {step}"
                )));
            }
        }
        Ok(())
    }
}

/// Hook run once per iteration before the latent updates.
pub trait ParameterUpdate {
    /// New model parameters, or `None` to keep the current ones.
    fn update(
        &mut self,
        model: &EpidemicModel,
        x: &HiddenStateMatrix,
        rng: &mut SamplerRng,
    ) -> Option<EpidemicModel>;
}

/// Keeps the parameters at their starting values.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedParameters;

impl ParameterUpdate for FixedParameters {
    fn update(
        &mut self,
        _: &EpidemicModel,
        _: &HiddenStateMatrix,
        _: &mut SamplerRng,
    ) -> Option<EpidemicModel> {
        None
    }
}

/// Metropolis update of all transmission parameters at once by a
/// log-normal random walk, targeting `pi(theta | X)` with a flat prior on
/// `log theta`. Observation-model parameters are not updated.
#[derive(Debug, Clone, Copy)]
pub struct RandomWalkMetropolis {
    pub step: f64,
    pub proposed: u64,
    pub accepted: u64,
}

impl RandomWalkMetropolis {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            proposed: 0,
            accepted: 0,
        }
    }
}

fn standard_normal(rng: &mut SamplerRng) -> f64 {
    let (u, v) = (open_unit(rng), open_unit(rng));
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

impl ParameterUpdate for RandomWalkMetropolis {
    fn update(
        &mut self,
        model: &EpidemicModel,
        x: &HiddenStateMatrix,
        rng: &mut SamplerRng,
    ) -> Option<EpidemicModel> {
        self.proposed += 1;
        let theta = model.dynamics().parameters();
        let proposal: Vec<f64> = theta
            .iter()
            .map(|&v| v * (self.step * standard_normal(rng)).exp())
            .collect();
        let log_u = open_unit(rng).ln();
        let candidate = model
            .dynamics()
            .with_parameters(&proposal)
            .and_then(|d| model.with_dynamics(d))
            .ok()?;
        let log_ratio = log_prior(&candidate, x) - log_prior(model, x);
        if log_u < log_ratio {
            self.accepted += 1;
            Some(candidate)
        } else {
            None
        }
    }
}

/// A latent kernel for an [`EpidemicModel`] chosen at run time.
pub fn build_kernel(
    settings: &SamplerSettings,
    model: EpidemicModel,
    emissions: EmissionTable,
    x0: HiddenStateMatrix,
    tuner_seed: u64,
) -> Result<Box<dyn LatentKernel<EpidemicModel>>> {
    settings.validate()?;
    let kernel: Box<dyn LatentKernel<EpidemicModel>> = match settings.kernel.proposal_kind() {
        Some(kind) => {
            let policy = match settings.kappa {
                Some(k) => KappaPolicy::Fixed(k),
                None => KappaPolicy::Adaptive(AdaptiveTuner::new(
                    settings.tuner.epsilon,
                    settings.tuner.kappa_max,
                    settings.tuner.target_acceptance,
                )?),
            };
            Box::new(RipplerSampler::new(
                model, emissions, x0, kind, policy, tuner_seed,
            )?)
        }
        None if settings.kernel == KernelKind::Iffbs => Box::new(IffbsSampler::new(model, emissions, x0)?),
        None => Box::new(RjmcmcSampler::new(model, emissions, x0)?),
    };
    Ok(kernel)
}

/// Everything recorded by [`run_chain`].
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub kernel: KernelKind,
    pub updates_per_iteration: usize,
    /// One record per latent update, iteration-major.
    pub records: Vec<UpdateRecord>,
    /// State counts after every iteration.
    pub counts: StateCountSeries,
    /// Jump distances between consecutive iterations, starting from `X^(0)`.
    pub jumps: JumpDistance,
    /// Wall-clock seconds spent in latent updates only.
    pub latent_seconds: f64,
    /// Transmission parameters after every iteration.
    pub parameters: Vec<Vec<f64>>,
    pub initial_state: HiddenStateMatrix,
    pub final_state: HiddenStateMatrix,
}

/// Proposal and acceptance counts for one requested `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct KappaStats {
    pub kappa: usize,
    pub proposed: u64,
    pub accepted: u64,
}

impl ChainOutput {
    pub fn num_iterations(&self) -> usize {
        self.counts.num_iterations()
    }

    /// Accepted fraction of the updates that made a proposal.
    pub fn acceptance_rate(&self) -> f64 {
        rate(self.records.iter().filter(|r| r.proposed))
    }

    /// Acceptance rate over updates whose `kappa` the tuner chose by
    /// exploitation.
    pub fn exploitation_acceptance_rate(&self) -> f64 {
        rate(
            self.records
                .iter()
                .filter(|r| r.proposed && r.kappa_requested.is_some() && !r.explored),
        )
    }

    /// Counts per requested `kappa`, in increasing `kappa`.
    pub fn acceptance_by_kappa(&self) -> Vec<KappaStats> {
        let mut map: BTreeMap<usize, KappaStats> = BTreeMap::new();
        for r in &self.records {
            if let Some(k) = r.kappa_requested {
                let e = map.entry(k).or_insert(KappaStats {
                    kappa: k,
                    ..KappaStats::default()
                });
                e.proposed += 1;
                e.accepted += r.accepted as u64;
            }
        }
        map.into_values().collect()
    }

    /// How often each ripple size was proposed.
    pub fn ripple_histogram(&self) -> BTreeMap<usize, u64> {
        let mut map = BTreeMap::new();
        for r in self.records.iter().filter(|r| r.proposed) {
            *map.entry(r.ripple_size).or_insert(0) += 1;
        }
        map
    }

    /// Most frequent exploitation choice of `kappa` among `records`, the
    /// smallest on ties.
    pub fn modal_exploited_kappa(records: &[UpdateRecord]) -> Option<usize> {
        let mut map: BTreeMap<usize, u64> = BTreeMap::new();
        for r in records.iter().filter(|r| !r.explored) {
            if let Some(k) = r.kappa_requested {
                *map.entry(k).or_insert(0) += 1;
            }
        }
        map.iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&k, _)| k)
    }

    /// Trace CSV: `iteration,update,kappa,accepted,ripple_size,log_ratio`,
    /// 1-based iteration and update indices; `kappa` is empty for kernels
    /// without one.
    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "iteration",
            "update",
            "kappa",
            "accepted",
            "ripple_size",
            "log_ratio",
        ])?;
        let per = self.updates_per_iteration.max(1);
        for (n, r) in self.records.iter().enumerate() {
            w.write_record([
                (n / per + 1).to_string(),
                (n % per + 1).to_string(),
                r.kappa.map(|k| k.to_string()).unwrap_or_default(),
                u8::from(r.accepted).to_string(),
                r.ripple_size.to_string(),
                format_log_ratio(r.log_ratio),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// State-count CSV: `iteration,t,state,count`, 1-based.
    pub fn write_state_counts<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "t", "state", "count"])?;
        let c = &self.counts;
        for k in 0..c.num_iterations() {
            for t in 0..c.num_timepoints() {
                for s in 0..c.num_states() {
                    w.write_record([
                        (k + 1).to_string(),
                        (t + 1).to_string(),
                        (s + 1).to_string(),
                        c.count(k, t, s).to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `kappa,proposed,accepted,acceptance_rate`.
    pub fn write_acceptance_by_kappa<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kappa", "proposed", "accepted", "acceptance_rate"])?;
        for s in self.acceptance_by_kappa() {
            w.write_record([
                s.kappa.to_string(),
                s.proposed.to_string(),
                s.accepted.to_string(),
                (s.accepted as f64 / s.proposed as f64).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `ripple_size,frequency`.
    pub fn write_ripple_histogram<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ripple_size", "frequency"])?;
        for (size, n) in self.ripple_histogram() {
            w.write_record([size.to_string(), n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `iteration,theta_1,...`.
    pub fn write_parameters<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let width = self.parameters.first().map_or(0, Vec::len);
        let header: Vec<String> = std::iter::once("iteration".to_string())
            .chain((1..=width).map(|i| format!("theta_{i}")))
            .collect();
        w.write_record(&header)?;
        for (k, theta) in self.parameters.iter().enumerate() {
            let row: Vec<String> = std::iter::once((k + 1).to_string())
                .chain(theta.iter().map(f64::to_string))
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn rate<'a>(records: impl Iterator<Item = &'a UpdateRecord>) -> f64 {
    let (mut n, mut a) = (0u64, 0u64);
    for r in records {
        n += 1;
        a += r.accepted as u64;
    }
    if n == 0 {
        0.0
    } else {
        a as f64 / n as f64
    }
}

fn format_log_ratio(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

/// Runs `settings.iterations` iterations of `settings.updates_per_iteration`
/// latent updates each, starting from a feasible `X^(0)`.
///
/// Latent updates draw from the inference stream of `seed`, the tuner from
/// the tuner stream and the parameter hook from the parameter stream.
pub fn run_chain(
    model: EpidemicModel,
    emissions: EmissionTable,
    num_timepoints: usize,
    settings: &SamplerSettings,
    seed: u64,
    hook: &mut dyn ParameterUpdate,
) -> Result<ChainOutput> {
    settings.validate()?;
    let mut rng = stream_rng(seed, Stream::Inference);
    let mut param_rng = stream_rng(seed, Stream::Parameters);
    let space = model.state_space(num_timepoints)?;
    let x0 = initial_latent_state(&model, &emissions, &space, &mut rng)?;
    let mut kernel = build_kernel(
        settings,
        model,
        emissions,
        x0.clone(),
        derive_seed(seed, Stream::Tuner),
    )?;
    let k_prime = settings.updates_per_iteration;
    let mut records = Vec::with_capacity(settings.iterations * k_prime);
    let mut counts = StateCountSeries::new(
        space.num_states(),
        space.num_timepoints(),
        space.num_individuals(),
    );
    let mut jumps = JumpDistance::new(&x0);
    let mut parameters = Vec::with_capacity(settings.iterations);
    let mut latent_seconds = 0.0;
    for _ in 0..settings.iterations {
        if let Some(next) = hook.update(kernel.model(), kernel.state(), &mut param_rng) {
            kernel.set_model(next)?;
        }
        let start = Instant::now();
        for _ in 0..k_prime {
            records.push(kernel.update(&mut rng));
        }
        latent_seconds += start.elapsed().as_secs_f64();
        counts.push(kernel.state());
        jumps.push(kernel.state());
        parameters.push(kernel.model().dynamics().parameters());
    }
    Ok(ChainOutput {
        kernel: settings.kernel,
        updates_per_iteration: k_prime,
        records,
        counts,
        jumps,
        latent_seconds,
        parameters,
        initial_state: x0,
        final_state: kernel.state().clone(),
    })
}

/// [`run_chain`] with the hook named in `settings`.
pub fn run_configured_chain(
    model: EpidemicModel,
    emissions: EmissionTable,
    num_timepoints: usize,
    settings: &SamplerSettings,
    seed: u64,
) -> Result<ChainOutput> {
    match settings.parameters {
        ParameterSettings::Fixed => run_chain(
            model,
            emissions,
            num_timepoints,
            settings,
            seed,
            &mut FixedParameters,
        ),
        ParameterSettings::RandomWalk { step } => run_chain(
            model,
            emissions,
            num_timepoints,
            settings,
            seed,
            &mut RandomWalkMetropolis::new(step),
        ),
    }
}

/// Counts of each state at each time-point of `x`, `T x S`.
pub fn true_counts(x: &HiddenStateMatrix) -> Vec<Vec<usize>> {
    (0..x.num_timepoints())
        .map(|t| state_counts(x.row(t), x.num_states()))
        .collect()
}
