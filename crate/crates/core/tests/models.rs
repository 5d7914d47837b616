//! Simulation, likelihoods and the committed study dataset.

mod common;

use std::fs;

use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rippler_core::chmm::csv_io::{
    read_hidden_states, read_observations, write_hidden_states, write_observations,
};
use rippler_core::chmm::{observation_loglik_total, simulate_centred, simulate_noncentred};
use rippler_core::config::{preset, RunConfig, PRESET_NAMES};
use rippler_core::models::{simulate_dataset, TabularModel};
use rippler_core::random::{stream_rng, SamplerRng, Stream};
use rippler_core::{
    EmissionTable, HiddenStateMatrix, Observation, ObservationMatrix, StateSpace, UniformGrid,
};

#[test]
fn committed_study_dataset_is_reproduced() {
    let config = preset("sir-5.2").unwrap();
    let model = config.build_model().unwrap();
    let space = model.state_space(config.num_timepoints).unwrap();
    let (x, y) = simulate_dataset(&model, &space, &mut stream_rng(config.seed, Stream::Simulation));
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    write_hidden_states(&x, &mut xs).unwrap();
    write_observations(&y, &mut ys).unwrap();
    let dir = common::fixture_path("sir-5.2");
    assert_eq!(xs, fs::read(dir.join("X.csv")).unwrap());
    assert_eq!(ys, fs::read(dir.join("Y.csv")).unwrap());

    let x_read = read_hidden_states(fs::File::open(dir.join("X.csv")).unwrap(), 3).unwrap();
    let y_read = read_observations(fs::File::open(dir.join("Y.csv")).unwrap(), 50, 100).unwrap();
    assert_eq!(x_read, x);
    assert_eq!(y_read, y);
    assert!(EmissionTable::new(&model, &y_read).is_ok());
}

#[test]
fn shipped_configs_match_presets() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in PRESET_NAMES {
        let config = RunConfig::from_path(&root.join(format!("{name}.toml"))).unwrap();
        assert_eq!(config, preset(name).unwrap(), "{name}");
    }
    for name in ["oracle-sis-tiny", "oracle-sir-tiny", "oracle-hmm-tiny"] {
        RunConfig::from_path(&root.join(format!("{name}.toml"))).unwrap();
    }
}

/// Two-state chain with `p(0 -> 1) = 0.3` and `p(1 -> 0) = 0.6`.
fn two_state_chain() -> TabularModel {
    TabularModel::new(
        vec![0.5, 0.5],
        vec![vec![0.7, 0.3], vec![0.6, 0.4]],
        vec![0.5, 0.5],
    )
    .unwrap()
}

fn transition_frequencies(x: &HiddenStateMatrix) -> [f64; 2] {
    let (mut n, mut moved) = ([0.0; 2], [0.0; 2]);
    for t in 0..x.num_timepoints() - 1 {
        let (a, b) = (x.get(t, 0), x.get(t + 1, 0));
        n[a] += 1.0;
        moved[a] += (a != b) as u8 as f64;
    }
    [moved[0] / n[0], moved[1] / n[1]]
}

#[test]
fn centred_and_noncentred_simulation_agree() {
    let model = two_state_chain();
    let space = StateSpace::new(2, 1, 10_000).unwrap();
    let mut rng = SamplerRng::seed_from_u64(71);
    let centred = transition_frequencies(&simulate_centred(&model, &space, &mut rng));
    let u = UniformGrid::draw(&space, &mut rng);
    let noncentred_x = simulate_noncentred(&model, &space, &u);
    assert_eq!(simulate_noncentred(&model, &space, &u), noncentred_x);
    let noncentred = transition_frequencies(&noncentred_x);
    // Stationary occupancy is 2/3 in state 0, so about 6667 and 3333 visits.
    for (k, (p, visits)) in [(0.3f64, 6667.0f64), (0.6, 3333.0)].into_iter().enumerate() {
        let se = (p * (1.0 - p) / visits).sqrt();
        for f in [centred[k], noncentred[k]] {
            assert!((f - p).abs() < 3.0 * se, "state {k}: {f} vs {p}");
        }
    }
}

#[test]
fn absorbing_chains_stay_put() {
    let model = TabularModel::new(
        vec![1.0, 0.0],
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![0.5, 0.5],
    )
    .unwrap();
    let space = StateSpace::new(2, 3, 6).unwrap();
    let x = simulate_centred(&model, &space, &mut SamplerRng::seed_from_u64(0));
    assert!(x.as_slice().iter().all(|&s| s == 0));

    let forced = TabularModel::new(
        vec![1.0, 0.0],
        vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        vec![0.5, 0.5],
    )
    .unwrap();
    let x = simulate_centred(
        &forced,
        &StateSpace::new(2, 1, 5).unwrap(),
        &mut SamplerRng::seed_from_u64(0),
    );
    assert_eq!(x.column(0), vec![0, 1, 1, 1, 1]);
}

#[test]
fn observation_log_likelihood_examples() {
    let (model, _, _) = common::sir_fixture();
    let x = HiddenStateMatrix::from_rows(3, &[vec![1, 0], vec![1, 0], vec![2, 0]]).unwrap();
    assert_eq!(
        observation_loglik_total(&ObservationMatrix::empty(3, 2), &x, &model).unwrap(),
        0.0
    );

    let mut y = ObservationMatrix::empty(3, 2);
    y.set(0, 0, Some(Observation::Test(true)));
    assert_abs_diff_eq!(
        observation_loglik_total(&y, &x, &model).unwrap(),
        0.8f64.ln(),
        epsilon = 1e-15
    );

    let perfect = TabularModel::new(vec![0.5, 0.5], vec![vec![0.5, 0.5]; 2], vec![0.0, 1.0]).unwrap();
    let x = HiddenStateMatrix::from_rows(2, &[vec![1], vec![0]]).unwrap();
    let mut y = ObservationMatrix::empty(2, 1);
    y.set(0, 0, Some(Observation::Test(true)));
    y.set(1, 0, Some(Observation::Test(false)));
    assert_eq!(observation_loglik_total(&y, &x, &perfect).unwrap(), 0.0);
}
