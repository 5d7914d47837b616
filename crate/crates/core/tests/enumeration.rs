//! Brute-force posteriors against independently computed tables, and the
//! single-individual filter against textbook forward-backward.

mod common;

use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rippler_core::diagnostics::{config_from_id, config_id, enumerate_posterior, tv_distance, Hmm};
use rippler_core::iffbs::{iffbs_backward_sample, iffbs_filter};
use rippler_core::models::TabularModel;
use rippler_core::random::SamplerRng;
use rippler_core::{EmissionTable, Error, HiddenStateMatrix, Observation, ObservationMatrix, StateSpace};

#[test]
fn enumeration_matches_independent_tables() {
    for (fixture, table) in [
        (common::sis_fixture as fn() -> _, "sis_posterior.csv"),
        (common::sir_fixture, "sir_posterior.csv"),
    ] {
        let (model, y, space) = fixture();
        let exact = enumerate_posterior(&model, &common::emissions(&model, &y), &space).unwrap();
        let reference = common::read_posterior(table);
        assert_eq!(exact.probs().len(), reference.len());
        for (k, (a, b)) in exact.probs().iter().zip(&reference).enumerate() {
            assert!((a - b).abs() < 1e-12, "{table} config {k}: {a} vs {b}");
        }
    }
}

#[test]
fn config_ids_round_trip() {
    let space = StateSpace::new(3, 2, 3).unwrap();
    for id in 0..729 {
        assert_eq!(config_id(&config_from_id(id, &space)), id);
    }
}

#[test]
fn oversized_spaces_are_refused() {
    let model = TabularModel::new(vec![0.5, 0.5], vec![vec![0.5, 0.5]; 2], vec![0.5, 0.5]).unwrap();
    let space = StateSpace::new(2, 4, 5).unwrap();
    let err = enumerate_posterior(&model, &EmissionTable::unobserved(2, 5, 4), &space).unwrap_err();
    assert!(matches!(err, Error::EnumerationTooLarge { .. }), "{err}");
}

#[test]
fn uniform_chain_without_data_has_uniform_posterior() {
    let model = TabularModel::new(vec![0.5, 0.5], vec![vec![0.5, 0.5]; 2], vec![0.5, 0.5]).unwrap();
    let space = StateSpace::new(2, 2, 3).unwrap();
    let exact = enumerate_posterior(&model, &EmissionTable::unobserved(2, 3, 2), &space).unwrap();
    for &p in exact.probs() {
        assert_abs_diff_eq!(p, 1.0 / 64.0, epsilon = 1e-15);
    }
}

/// A three-state single chain observed through noisy tests.
fn single_chain() -> (TabularModel, ObservationMatrix, StateSpace) {
    let model = TabularModel::new(
        vec![0.6, 0.3, 0.1],
        vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.6, 0.3], vec![0.2, 0.2, 0.6]],
        vec![0.1, 0.8, 0.5],
    )
    .unwrap();
    let mut y = ObservationMatrix::empty(5, 1);
    y.set(0, 0, Some(Observation::Test(false)));
    y.set(2, 0, Some(Observation::Test(true)));
    y.set(3, 0, Some(Observation::Test(true)));
    let space = StateSpace::new(3, 1, 5).unwrap();
    (model, y, space)
}

fn hmm_of(model: &TabularModel, em: &EmissionTable, t_count: usize) -> Hmm {
    Hmm {
        initial: model.initial().to_vec(),
        transition: model.transition().to_vec(),
        likelihood: (0..t_count)
            .map(|t| (0..3).map(|s| em.log_f(t, 0, s).exp()).collect())
            .collect(),
    }
}

#[test]
fn single_chain_enumeration_matches_forward_backward() {
    let (model, y, space) = single_chain();
    let em = EmissionTable::new(&model, &y).unwrap();
    let exact = enumerate_posterior(&model, &em, &space).unwrap();
    let smoothed = hmm_of(&model, &em, 5).smoothed().unwrap();
    for (t, row) in smoothed.iter().enumerate() {
        for (s, &p) in row.iter().enumerate() {
            assert_abs_diff_eq!(exact.marginal(t, 0, s), p, epsilon = 1e-12);
        }
    }
}

#[test]
fn single_chain_filter_matches_forward_pass() {
    let (model, y, _) = single_chain();
    let em = EmissionTable::new(&model, &y).unwrap();
    let x = HiddenStateMatrix::from_rows(3, &vec![vec![0]; 5]).unwrap();
    let table = iffbs_filter(0, &x, &em, &model).unwrap();
    let forward = hmm_of(&model, &em, 5).forward().unwrap();
    for (t, row) in forward.iter().enumerate() {
        for (a, b) in table.row(t).iter().zip(row) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

/// Backward samples for one individual, with the other held fixed, follow
/// the conditional read off the independent posterior table.
#[test]
fn backward_sampling_draws_from_the_full_conditional() {
    for (fixture, table) in [
        (common::sis_fixture as fn() -> _, "sis_posterior.csv"),
        (common::sir_fixture, "sir_posterior.csv"),
    ] {
        let (model, y, space) = fixture();
        let em = common::emissions(&model, &y);
        let posterior = common::read_posterior(table);
        let mode = (0..posterior.len())
            .max_by(|&a, &b| posterior[a].total_cmp(&posterior[b]))
            .unwrap();
        let x = config_from_id(mode, &space);
        for i in 0..2 {
            let mut conditional = vec![0.0; posterior.len()];
            for (id, &p) in posterior.iter().enumerate() {
                let other = config_from_id(id, &space);
                if other.column(1 - i) == x.column(1 - i) {
                    conditional[id] = p;
                }
            }
            let total: f64 = conditional.iter().sum();
            conditional.iter_mut().for_each(|p| *p /= total);

            let filter = iffbs_filter(i, &x, &em, &model).unwrap();
            let mut rng = SamplerRng::seed_from_u64(60 + i as u64);
            let draws = 100_000;
            let mut counts = vec![0.0; posterior.len()];
            for _ in 0..draws {
                let mut xs = x.clone();
                xs.set_column(i, &iffbs_backward_sample(&filter, &mut rng));
                counts[config_id(&xs)] += 1.0 / draws as f64;
            }
            let tv = tv_distance(&counts, &conditional);
            assert!(tv < 0.01, "{table} individual {i}: tv {tv}");
        }
    }
}
