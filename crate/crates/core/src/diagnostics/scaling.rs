//! Cost and mixing of each kernel as the number of states grows.

use std::io::Write;

use serde::Serialize;

use crate::chain::{run_chain, FixedParameters, KernelKind, SamplerSettings};
use crate::chmm::EmissionTable;
use crate::error::{Error, Result};
use crate::models::EpidemicModel;

/// One model size of a sweep, with its simulated data.
#[derive(Debug, Clone)]
pub struct ScalingCase {
    pub model: EpidemicModel,
    pub emissions: EmissionTable,
    pub num_timepoints: usize,
}

/// Timing and mixing of one kernel on one case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub kernel: KernelKind,
    pub num_states: usize,
    /// Ordered MAJD for linear models, indicator MAJD otherwise.
    pub majd: f64,
    /// Seconds spent in latent updates.
    pub seconds: f64,
    /// `seconds` over the same kernel's seconds on the smallest case.
    pub relative_time: f64,
    pub majd_per_relative_time: f64,
}

/// Runs every kernel on every case (`settings.kernel` is overridden) and
/// normalises each kernel's times by its time on the smallest `S`.
/// Only the latent-update loops are timed.
pub fn scaling_benchmark(
    cases: &[ScalingCase],
    kernels: &[KernelKind],
    settings: &SamplerSettings,
    seed: u64,
) -> Result<Vec<ScalingPoint>> {
    if cases.is_empty() {
        return Err(Error::InvalidConfig("scaling sweep has no cases".into()));
    }
    let mut points = Vec::with_capacity(cases.len() * kernels.len());
    for &kernel in kernels {
        let mut run = *settings;
        run.kernel = kernel;
        for case in cases {
            let out = run_chain(
                case.model.clone(),
                case.emissions.clone(),
                case.num_timepoints,
                &run,
                seed,
                &mut FixedParameters,
            )?;
            let majd = if case.model.dynamics().is_linear() {
                out.jumps.majd_ordered()
            } else {
                out.jumps.majd_indicator()
            };
            points.push(ScalingPoint {
                kernel,
                num_states: case.model.dynamics().num_states(),
                majd,
                seconds: out.latent_seconds,
                relative_time: f64::NAN,
                majd_per_relative_time: f64::NAN,
            });
        }
    }
    normalise_times(&mut points);
    Ok(points)
}

/// Fills `relative_time` and `majd_per_relative_time` relative to each
/// kernel's smallest-`S` point.
pub fn normalise_times(points: &mut [ScalingPoint]) {
    let kernels: Vec<KernelKind> = points.iter().map(|p| p.kernel).collect();
    for kernel in kernels {
        let base = points
            .iter()
            .filter(|p| p.kernel == kernel)
            .min_by_key(|p| p.num_states)
            .map(|p| p.seconds)
            .expect("kernel has a point");
        for p in points.iter_mut().filter(|p| p.kernel == kernel) {
            p.relative_time = p.seconds / base;
            p.majd_per_relative_time = p.majd / p.relative_time;
        }
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of per-update time against `S` for one kernel's points.
pub fn time_slope(points: &[ScalingPoint], kernel: KernelKind) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.kernel == kernel)
        .map(|p| (p.num_states as f64, p.seconds))
        .unzip();
    log_log_slope(&xs, &ys)
}

/// `kernel,S,majd,seconds,relative_time,majd_per_relative_time`.
pub fn write_scaling_csv<W: Write>(points: &[ScalingPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "kernel",
        "S",
        "majd",
        "seconds",
        "relative_time",
        "majd_per_relative_time",
    ])?;
    for p in points {
        w.write_record([
            p.kernel.name().to_string(),
            p.num_states.to_string(),
            p.majd.to_string(),
            p.seconds.to_string(),
            p.relative_time.to_string(),
            p.majd_per_relative_time.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
