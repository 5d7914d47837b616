//! Fixtures shared by the kernel benchmarks.

use rippler_core::chain::{build_kernel, SamplerSettings};
use rippler_core::config::preset;
use rippler_core::models::{simulate_dataset, EpidemicModel};
use rippler_core::random::{derive_seed, stream_rng, SamplerRng, Stream};
use rippler_core::{EmissionTable, LatentKernel, Result};

/// A kernel positioned at a feasible latent state of `preset_name`'s
/// simulated dataset, resized to `num_states` when given, with the
/// inference stream that drives its updates.
pub fn kernel_for(
    preset_name: &str,
    num_states: Option<usize>,
    settings: &SamplerSettings,
) -> Result<(Box<dyn LatentKernel<EpidemicModel>>, SamplerRng)> {
    let mut config = preset(preset_name)?;
    if let Some(s) = num_states {
        config = config.with_num_states(s)?;
    }
    let model = config.build_model()?;
    let space = model.state_space(config.num_timepoints)?;
    let (_, y) = simulate_dataset(&model, &space, &mut stream_rng(config.seed, Stream::Simulation));
    let emissions = EmissionTable::new(&model, &y)?;
    let mut rng = stream_rng(config.seed, Stream::Inference);
    let x0 = rippler_core::initial_latent_state(&model, &emissions, &space, &mut rng)?;
    let kernel = build_kernel(
        settings,
        model,
        emissions,
        x0,
        derive_seed(config.seed, Stream::Tuner),
    )?;
    Ok((kernel, rng))
}
