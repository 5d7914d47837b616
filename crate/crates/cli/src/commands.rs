//! The four subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rippler_core::chain::{run_configured_chain, KernelKind, SamplerSettings};
use rippler_core::chmm::csv_io::{
    read_hidden_states, read_observations, write_hidden_states, write_observations,
};
use rippler_core::config::{preset, RunConfig};
use rippler_core::diagnostics::{
    coverage, credible_intervals, enumerate_posterior, hmm_cross_check, kernel_tv_distance,
    scaling_benchmark, time_slope, write_credible_intervals, write_oracle_csv, write_scaling_csv,
    OracleCheck, ScalingCase, HMM_TOLERANCE, TV_TOLERANCE,
};
use rippler_core::models::{simulate_dataset, EpidemicModel};
use rippler_core::random::{stream_rng, Stream};
use rippler_core::{EmissionTable, Error, HiddenStateMatrix, ModelSpec, ObservationMatrix};

use crate::output::{sha256_hex, Manifest, OutputDir};
use crate::{BenchmarkArgs, CommonArgs, InferArgs, OracleArgs};

const DEFAULT_OUTPUT_DIR: &str = "rippler-out";
const CREDIBLE_LEVEL: f64 = 0.95;

/// The effective configuration of a run.
struct Loaded {
    config: RunConfig,
    preset: Option<String>,
    out: PathBuf,
    /// Canonical TOML of `config`, written as `config.toml` and hashed.
    text: String,
}

fn load(args: &CommonArgs) -> Result<Loaded> {
    let mut config = match (&args.preset, &args.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => RunConfig::from_path(path)?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    let out = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let text = config.to_toml_string()?;
    Ok(Loaded {
        config,
        preset: args.preset.clone(),
        out,
        text,
    })
}

fn start(loaded: &Loaded) -> Result<OutputDir> {
    let mut out = OutputDir::create(&loaded.out)?;
    out.write_text("config.toml", &loaded.text)?;
    Ok(out)
}

fn manifest(command: &str, loaded: &Loaded, data_sha256: Option<String>) -> Manifest {
    Manifest {
        command: command.into(),
        preset: loaded.preset.clone(),
        seed: loaded.config.seed,
        config_sha256: sha256_hex(loaded.text.as_bytes()),
        data_sha256,
        files: Vec::new(),
    }
}

fn simulated(config: &RunConfig, model: &EpidemicModel) -> Result<(HiddenStateMatrix, ObservationMatrix)> {
    let space = model.state_space(config.num_timepoints)?;
    Ok(simulate_dataset(
        model,
        &space,
        &mut stream_rng(config.seed, Stream::Simulation),
    ))
}

/// Observations from `dir/Y.csv`, the true states from `dir/X.csv` when
/// present, and the hash of the observation file.
fn read_dataset(
    dir: &Path,
    config: &RunConfig,
    model: &EpidemicModel,
) -> Result<(Option<HiddenStateMatrix>, ObservationMatrix, String)> {
    let (t_count, n) = (config.num_timepoints, config.model.num_individuals);
    let y_path = dir.join("Y.csv");
    let bytes = fs::read(&y_path).with_context(|| format!("reading {}", y_path.display()))?;
    let y = read_observations(bytes.as_slice(), t_count, n)
        .with_context(|| format!("reading {}", y_path.display()))?;
    let x_path = dir.join("X.csv");
    let x = if x_path.exists() {
        let file = fs::File::open(&x_path).with_context(|| format!("reading {}", x_path.display()))?;
        let x = read_hidden_states(file, model.num_states())
            .with_context(|| format!("reading {}", x_path.display()))?;
        if (x.num_timepoints(), x.num_individuals()) != (t_count, n) {
            bail!(
                "{} is {}x{}, the configuration expects {t_count}x{n}",
                x_path.display(),
                x.num_timepoints(),
                x.num_individuals()
            );
        }
        Some(x)
    } else {
        None
    };
    Ok((x, y, sha256_hex(&bytes)))
}

pub fn simulate(args: &CommonArgs) -> Result<()> {
    let loaded = load(args)?;
    let model = loaded.config.build_model()?;
    let (x, y) = simulated(&loaded.config, &model)?;
    let mut out = start(&loaded)?;
    out.write("X.csv", |w| write_hidden_states(&x, w))?;
    out.write("Y.csv", |w| write_observations(&y, w))?;
    let dir = out.finish(manifest("simulate", &loaded, None))?;
    println!(
        "simulated {} individuals over {} time-points with {} observations into {}",
        x.num_individuals(),
        x.num_timepoints(),
        y.num_observed(),
        dir.display()
    );
    Ok(())
}

pub fn infer(args: &InferArgs) -> Result<()> {
    let loaded = load(&args.common)?;
    let config = &loaded.config;
    let mut settings: SamplerSettings = config.sampler;
    if let Some(name) = &args.kernel {
        settings.kernel = KernelKind::parse(name)?;
    }
    if let Some(k) = args.iterations {
        settings.iterations = k;
    }
    if let Some(k) = args.updates {
        settings.updates_per_iteration = k;
    }
    settings.validate()?;
    let model = config.build_model()?;
    let (truth, y, data_sha256) = match &args.data {
        Some(dir) => {
            let (x, y, hash) = read_dataset(dir, config, &model)?;
            (x, y, Some(hash))
        }
        None => {
            let (x, y) = simulated(config, &model)?;
            (Some(x), y, None)
        }
    };
    let emissions = EmissionTable::new(&model, &y)?;
    let chain = run_configured_chain(model, emissions, config.num_timepoints, &settings, config.seed)?;
    let intervals = if chain.num_iterations() > 0 {
        credible_intervals(&chain.counts, CREDIBLE_LEVEL, settings.burn_in)?
    } else {
        Vec::new()
    };
    let covered = match (&truth, intervals.is_empty()) {
        (Some(x), false) => Some(coverage(&intervals, x)),
        _ => None,
    };

    let mut out = start(&loaded)?;
    out.write("trace.csv", |w| chain.write_trace(w))?;
    out.write("state_counts.csv", |w| chain.write_state_counts(w))?;
    out.write("credible_intervals.csv", |w| {
        write_credible_intervals(&intervals, w)
    })?;
    out.write("acceptance_by_kappa.csv", |w| chain.write_acceptance_by_kappa(w))?;
    out.write("ripple_sizes.csv", |w| chain.write_ripple_histogram(w))?;
    out.write("parameters.csv", |w| chain.write_parameters(w))?;
    out.write("final_state.csv", |w| write_hidden_states(&chain.final_state, w))?;
    out.write("summary.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "kernel",
            "iterations",
            "updates_per_iteration",
            "acceptance_rate",
            "exploitation_acceptance_rate",
            "majd_ordered",
            "majd_indicator",
            "coverage",
        ])?;
        csv.write_record([
            settings.kernel.name().to_string(),
            settings.iterations.to_string(),
            settings.updates_per_iteration.to_string(),
            chain.acceptance_rate().to_string(),
            chain.exploitation_acceptance_rate().to_string(),
            chain.jumps.majd_ordered().to_string(),
            chain.jumps.majd_indicator().to_string(),
            covered.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
        csv.flush().map_err(Error::from)
    })?;
    let dir = out.finish(manifest("infer", &loaded, data_sha256))?;

    println!(
        "{}: {} iterations x {} updates, acceptance {:.3}, MAJD {:.2} (ordered) / {:.2} (indicator)",
        settings.kernel.name(),
        settings.iterations,
        settings.updates_per_iteration,
        chain.acceptance_rate(),
        chain.jumps.majd_ordered(),
        chain.jumps.majd_indicator()
    );
    if let Some(c) = covered {
        println!(
            "coverage of true counts by {:.0}% intervals: {:.3}",
            CREDIBLE_LEVEL * 100.0,
            c
        );
    }
    eprintln!("latent updates took {:.2}s", chain.latent_seconds);
    println!("results in {}", dir.display());
    Ok(())
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<()> {
    let loaded = load(&args.common)?;
    let config = &loaded.config;
    let Some(sweep) = &config.benchmark else {
        bail!("the configuration has no [benchmark] section");
    };
    let mut settings = config.sampler;
    settings.iterations = args.iterations.unwrap_or(sweep.iterations);
    settings.updates_per_iteration = args.updates.unwrap_or(sweep.updates_per_iteration);
    settings.validate()?;
    let mut cases = Vec::with_capacity(sweep.num_states.len());
    for &s in &sweep.num_states {
        let sized = config.with_num_states(s)?;
        let model = sized.build_model()?;
        let (_, y) = simulated(&sized, &model)?;
        let emissions = EmissionTable::new(&model, &y)?;
        cases.push(ScalingCase {
            model,
            emissions,
            num_timepoints: sized.num_timepoints,
        });
    }
    let points = scaling_benchmark(&cases, &sweep.kernels, &settings, config.seed)?;
    let mut out = start(&loaded)?;
    out.write("scaling.csv", |w| write_scaling_csv(&points, w))?;
    if sweep.num_states.len() > 1 {
        let slopes: Vec<(KernelKind, f64)> = sweep
            .kernels
            .iter()
            .map(|&k| (k, time_slope(&points, k)))
            .collect();
        out.write("scaling_slopes.csv", |w| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["kernel", "log_log_time_slope"])?;
            for (k, slope) in &slopes {
                csv.write_record([k.name().to_string(), slope.to_string()])?;
            }
            csv.flush().map_err(Error::from)
        })?;
        for (k, slope) in &slopes {
            println!("{}: log-log slope of time against S = {slope:.3}", k.name());
        }
    }
    for p in &points {
        println!(
            "{} S={}: MAJD {:.2}, relative time {:.2}, MAJD per relative time {:.2}",
            p.kernel.name(),
            p.num_states,
            p.majd,
            p.relative_time,
            p.majd_per_relative_time
        );
    }
    let dir = out.finish(manifest("benchmark", &loaded, None))?;
    println!("results in {}", dir.display());
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Result<()> {
    let loaded = load(&args.common)?;
    let config = &loaded.config;
    let model = config.build_model()?;
    let space = model.state_space(config.num_timepoints)?;
    let (y, data_sha256) = match &args.data {
        Some(dir) => {
            let (_, y, hash) = read_dataset(dir, config, &model)?;
            (y, Some(hash))
        }
        None => (simulated(config, &model)?.1, None),
    };
    let emissions = EmissionTable::new(&model, &y)?;
    let exact = enumerate_posterior(&model, &emissions, &space)?;
    let updates = args.updates.unwrap_or(config.oracle.updates);
    let kernels = if config.oracle.kernels.is_empty() {
        KernelKind::ALL.to_vec()
    } else {
        config.oracle.kernels.clone()
    };
    let mut checks = Vec::new();
    for kernel in kernels {
        let settings = SamplerSettings {
            kernel,
            ..config.sampler
        };
        match kernel_tv_distance(
            &model,
            &emissions,
            &space,
            &exact,
            &settings,
            updates,
            config.seed,
        ) {
            Ok(tv) => checks.push(OracleCheck {
                check: kernel.name().into(),
                updates,
                distance: tv,
                tolerance: TV_TOLERANCE,
            }),
            Err(Error::UnsupportedKernel { reason, .. }) if config.oracle.kernels.is_empty() => {
                eprintln!("skipping {}: {reason}", kernel.name());
            }
            Err(e) => return Err(e).with_context(|| format!("running {}", kernel.name())),
        }
    }
    if space.num_individuals() == 1 {
        checks.push(OracleCheck {
            check: "forward-backward".into(),
            updates: 0,
            distance: hmm_cross_check(&model, &emissions, &space)?,
            tolerance: HMM_TOLERANCE,
        });
    }
    let mut out = start(&loaded)?;
    out.write("oracle.csv", |w| write_oracle_csv(&checks, w))?;
    let dir = out.finish(manifest("oracle", &loaded, data_sha256))?;
    for c in &checks {
        println!(
            "{:<22} distance {:.3e} (tolerance {:.0e}) {}",
            c.check,
            c.distance,
            c.tolerance,
            if c.passed() { "PASS" } else { "FAIL" }
        );
    }
    println!("results in {}", dir.display());
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        bail!("{failed} oracle check(s) exceeded tolerance");
    }
    Ok(())
}
