//! Tiny fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rippler_core::models::{
    simulate_dataset, DiagnosticTestModel, Dynamics, EpidemicModel, InitialStates, MultiStrainParams,
    ObservationModel, SeirParams, SirParams,
};
use rippler_core::random::SamplerRng;
use rippler_core::rippler::BoundsGrids;
use rippler_core::{EmissionTable, HiddenStateMatrix, Observation, ObservationMatrix, StateSpace};

/// Two-state SIS: N = 2, T = 3, S = 2, uncertain initial states and three
/// noisy tests.
pub fn sis_fixture() -> (EpidemicModel, ObservationMatrix, StateSpace) {
    let model = EpidemicModel::new(
        Dynamics::MultiStrain(MultiStrainParams::new(vec![0.8], vec![0.5], 0.0).unwrap()),
        InitialStates::Shared(vec![0.6, 0.4]),
        ObservationModel::Test(DiagnosticTestModel {
            sensitivity: 0.8,
            specificity: 0.9,
            test_probability: 0.5,
            target_states: vec![1],
        }),
        2,
    )
    .unwrap();
    let mut y = ObservationMatrix::empty(3, 2);
    y.set(0, 0, Some(Observation::Test(true)));
    y.set(1, 1, Some(Observation::Test(false)));
    y.set(2, 0, Some(Observation::Test(true)));
    let space = model.state_space(3).unwrap();
    (model, y, space)
}

/// SIR: N = 2, T = 3, S = 3, each individual initially susceptible or
/// infective with equal probability.
pub fn sir_fixture() -> (EpidemicModel, ObservationMatrix, StateSpace) {
    let model = EpidemicModel::new(
        Dynamics::Sir(SirParams::new(0.9, 0.6).unwrap()),
        InitialStates::Shared(vec![0.5, 0.5, 0.0]),
        ObservationModel::Test(DiagnosticTestModel {
            sensitivity: 0.8,
            specificity: 0.9,
            test_probability: 0.5,
            target_states: vec![1],
        }),
        2,
    )
    .unwrap();
    let mut y = ObservationMatrix::empty(3, 2);
    y.set(0, 1, Some(Observation::Test(false)));
    y.set(1, 0, Some(Observation::Test(true)));
    y.set(2, 1, Some(Observation::Test(true)));
    let space = model.state_space(3).unwrap();
    (model, y, space)
}

pub fn emissions(model: &EpidemicModel, y: &ObservationMatrix) -> EmissionTable {
    EmissionTable::new(model, y).unwrap()
}

/// Path of a committed fixture file.
pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Posterior probabilities from an independently computed table, indexed by
/// configuration id.
pub fn read_posterior(name: &str) -> Vec<f64> {
    let mut reader = csv::Reader::from_path(fixture_path(name)).unwrap();
    let mut probs = Vec::new();
    for (k, row) in reader.records().enumerate() {
        let row = row.unwrap();
        assert_eq!(
            row[0].parse::<usize>().unwrap(),
            k,
            "ids must be dense and ordered"
        );
        probs.push(row[1].parse::<f64>().unwrap());
    }
    probs
}

/// A random small SIR, SEIR or multi-strain model with noisy tests, and a
/// dataset simulated from it.
pub fn random_instance(
    family: u8,
    n: usize,
    t_count: usize,
    seed: u64,
) -> (EpidemicModel, HiddenStateMatrix, EmissionTable) {
    let mut rng = SamplerRng::seed_from_u64(seed);
    let dynamics = match family {
        0 => Dynamics::Sir(SirParams::new(rng.gen_range(0.05..1.5), rng.gen_range(0.05..1.0)).unwrap()),
        1 => Dynamics::Seir(
            SeirParams::with_uniform_stages(
                rng.gen_range(0.05..1.5),
                rng.gen_range(1..3),
                rng.gen_range(0.05..1.0),
            )
            .unwrap(),
        ),
        _ => {
            let strains = rng.gen_range(1..3);
            Dynamics::MultiStrain(
                MultiStrainParams::new(
                    (0..strains).map(|_| rng.gen_range(0.05..1.5)).collect(),
                    (0..strains).map(|_| rng.gen_range(0.05..1.0)).collect(),
                    rng.gen_range(0.0..0.5),
                )
                .unwrap(),
            )
        }
    };
    let s = dynamics.num_states();
    let weights: Vec<f64> = (0..s).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let target_states = dynamics.infective_states();
    let model = EpidemicModel::new(
        dynamics,
        InitialStates::Shared(weights.iter().map(|w| w / total).collect()),
        ObservationModel::Test(DiagnosticTestModel {
            sensitivity: rng.gen_range(0.6..0.99),
            specificity: rng.gen_range(0.6..0.99),
            test_probability: 0.5,
            target_states,
        }),
        n,
    )
    .unwrap();
    let space = model.state_space(t_count).unwrap();
    let (x, y) = simulate_dataset(&model, &space, &mut rng);
    let em = EmissionTable::new(&model, &y).unwrap();
    (model, x, em)
}

pub fn sum_log_widths(bounds: &BoundsGrids) -> f64 {
    bounds
        .lower()
        .as_slice()
        .iter()
        .zip(bounds.upper().as_slice())
        .map(|(lo, hi)| (hi - lo).ln())
        .sum()
}
