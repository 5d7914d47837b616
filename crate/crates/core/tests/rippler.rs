//! Rippler building blocks: bounds, the forward map, cell selection,
//! proposals and acceptance ratios.

mod common;

use std::fs::File;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rippler_core::chmm::csv_io::{read_hidden_states, read_uniforms};
use rippler_core::chmm::{log_prior, simulate_noncentred};
use rippler_core::config::preset;
use rippler_core::diagnostics::config_id;
use rippler_core::kernel::observation_loglik;
use rippler_core::models::{
    Dynamics, EpidemicModel, InitialStates, ObservationModel, SirParams, TabularModel,
};
use rippler_core::random::SamplerRng;
use rippler_core::rippler::{
    acceptance_log_ratio_data_informed, acceptance_log_ratio_standard, compute_bounds, draw_outside,
    materialise_u, propose_u_star, reconstruct, select_cells, BoundsGrids, KappaPolicy, ProposalKind,
    RipplerSampler,
};
use rippler_core::{
    Cell, EmissionTable, HiddenStateMatrix, LatentKernel, ModelSpec, StateSpace, UniformGrid,
};

const KINDS: [ProposalKind; 2] = [ProposalKind::Standard, ProposalKind::DataInformed];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bounds_materialise_reconstruct_round_trips(
        family in 0u8..3, n in 2usize..6, t_count in 2usize..7, seed: u64,
    ) {
        let (model, x, em) = common::random_instance(family, n, t_count, seed);
        let mut rng = SamplerRng::seed_from_u64(seed ^ 0x5eed);
        for kind in KINDS {
            let bounds = compute_bounds(&x, &model, kind, &em).unwrap();
            let u = materialise_u(&bounds, &mut rng);
            prop_assert_eq!(&reconstruct(&u, &model, kind, &em).unwrap(), &x);
            if kind == ProposalKind::Standard {
                let space = model.state_space(t_count).unwrap();
                prop_assert_eq!(&simulate_noncentred(&model, &space, &u), &x);
            }
        }
    }

    #[test]
    fn prior_cancels_against_bound_widths(
        family in 0u8..3, n in 2usize..6, t_count in 2usize..7, seed: u64,
    ) {
        let (model, x, em) = common::random_instance(family, n, t_count, seed);
        let bounds = compute_bounds(&x, &model, ProposalKind::Standard, &em).unwrap();
        prop_assert!((log_prior(&model, &x) - common::sum_log_widths(&bounds)).abs() < 1e-9);
    }

    #[test]
    fn data_informed_widths_cancel_to_normalisers(
        family in 0u8..3, n in 2usize..6, t_count in 2usize..7, seed: u64,
    ) {
        let (model, x, em) = common::random_instance(family, n, t_count, seed);
        let bounds = compute_bounds(&x, &model, ProposalKind::DataInformed, &em).unwrap();
        let lhs = observation_loglik(&x, &em) + log_prior(&model, &x) - common::sum_log_widths(&bounds);
        let rhs: f64 = bounds.log_normaliser().as_slice().iter().sum();
        prop_assert!((lhs - rhs).abs() < 1e-9, "lhs {} rhs {}", lhs, rhs);
    }
}

fn sir_model(n: usize, initial: Vec<usize>) -> EpidemicModel {
    EpidemicModel::new(
        Dynamics::Sir(SirParams::new(1.0 / 80.0, 1.0 / 10.0).unwrap()),
        InitialStates::Fixed(initial),
        ObservationModel::None,
        n,
    )
    .unwrap()
}

#[test]
fn absorbing_recovered_cell_has_full_bounds() {
    let model = sir_model(2, vec![1, 0]);
    let x = HiddenStateMatrix::from_rows(3, &[vec![1, 0], vec![2, 0], vec![2, 0]]).unwrap();
    let bounds = compute_bounds(
        &x,
        &model,
        ProposalKind::Standard,
        &EmissionTable::unobserved(3, 3, 2),
    )
    .unwrap();
    assert_eq!(bounds.get(2, 0), (0.0, 1.0));
    assert_eq!(bounds.weight(2, 0), 0.0);
}

#[test]
fn initial_state_bounds_are_cumulative_sums() {
    let model = TabularModel::new(
        vec![0.3, 0.7],
        vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        vec![0.5, 0.5],
    )
    .unwrap();
    let x = HiddenStateMatrix::from_rows(2, &[vec![1], vec![0]]).unwrap();
    let bounds = compute_bounds(
        &x,
        &model,
        ProposalKind::Standard,
        &EmissionTable::unobserved(2, 2, 1),
    )
    .unwrap();
    let (lo, hi) = bounds.get(0, 0);
    assert_abs_diff_eq!(lo, 0.3, epsilon = 1e-15);
    assert_eq!(hi, 1.0);
}

#[test]
fn infection_bounds_under_eight_infectives() {
    let mut initial = vec![1; 8];
    initial.push(0);
    let model = sir_model(9, initial);
    let mut second = vec![1; 8];
    second.push(1);
    let x = HiddenStateMatrix::from_rows(3, &[model_initial_row(&model), second]).unwrap();
    let bounds = compute_bounds(
        &x,
        &model,
        ProposalKind::Standard,
        &EmissionTable::unobserved(3, 2, 9),
    )
    .unwrap();
    let (lo, hi) = bounds.get(1, 8);
    assert_abs_diff_eq!(lo, 0.904_837_418_035_959_6, epsilon = 1e-12);
    assert_eq!(hi, 1.0);
    assert_abs_diff_eq!(bounds.weight(1, 8), lo, epsilon = 1e-12);
}

fn model_initial_row(model: &EpidemicModel) -> Vec<usize> {
    match model.initial() {
        InitialStates::Fixed(states) => states.clone(),
        InitialStates::Shared(_) => unreachable!(),
    }
}

#[test]
fn forward_map_matches_independent_golden_files() {
    let model = preset("sir-5.2").unwrap().build_model().unwrap();
    let space = model.state_space(50).unwrap();
    let em = EmissionTable::unobserved(3, 50, 100);
    let open = |name: &str| File::open(common::fixture_path(name)).unwrap();
    let u = read_uniforms(open("sir_golden_u.csv")).unwrap();
    let u_star = read_uniforms(open("sir_golden_u_star.csv")).unwrap();
    let x = read_hidden_states(open("sir_golden_x.csv"), 3).unwrap();
    let x_star = read_hidden_states(open("sir_golden_x_star.csv"), 3).unwrap();

    assert_eq!(reconstruct(&u, &model, ProposalKind::Standard, &em).unwrap(), x);
    assert_eq!(simulate_noncentred(&model, &space, &u), x);

    let bounds = compute_bounds(&x, &model, ProposalKind::Standard, &em).unwrap();
    let changed: Vec<(usize, usize)> = (0..50)
        .flat_map(|t| (0..100).map(move |j| (t, j)))
        .filter(|&(t, j)| u.get(t, j) != u_star.get(t, j))
        .collect();
    assert_eq!(changed, vec![(4, 7)]);
    let (lo, hi) = bounds.get(4, 7);
    let v = u_star.get(4, 7);
    assert!(v < lo || v >= hi);

    let proposed = reconstruct(&u_star, &model, ProposalKind::Standard, &em).unwrap();
    assert_eq!(proposed, x_star);
    assert_ne!(x.get(4, 7), x_star.get(4, 7));
    assert_eq!(x.count_differences(&x_star), 50);
}

#[test]
fn unchanged_uniforms_reproduce_the_state() {
    let (model, x, em) = common::random_instance(0, 4, 5, 7);
    let mut rng = SamplerRng::seed_from_u64(1);
    for kind in KINDS {
        let bounds = compute_bounds(&x, &model, kind, &em).unwrap();
        let u = materialise_u(&bounds, &mut rng);
        let same = propose_u_star(&u, &[], &bounds, &mut rng);
        assert_eq!(same, u);
        assert_eq!(reconstruct(&same, &model, kind, &em).unwrap(), x);
    }
}

/// Two live cells with weights 0.9 and 0.1 followed by absorbing cells.
fn two_weight_bounds() -> BoundsGrids {
    let model = TabularModel::new(
        vec![0.1, 0.9],
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![0.5, 0.5],
    )
    .unwrap();
    let x = HiddenStateMatrix::from_rows(2, &[vec![0, 1], vec![0, 1]]).unwrap();
    compute_bounds(
        &x,
        &model,
        ProposalKind::Standard,
        &EmissionTable::unobserved(2, 2, 2),
    )
    .unwrap()
}

#[test]
fn selection_frequencies_follow_weights() {
    let bounds = two_weight_bounds();
    assert_abs_diff_eq!(bounds.weight(0, 0), 0.9, epsilon = 1e-12);
    assert_abs_diff_eq!(bounds.weight(0, 1), 0.1, epsilon = 1e-12);
    let draws = 10_000;
    let mut rng = SamplerRng::seed_from_u64(3);
    let mut first = 0usize;
    for _ in 0..draws {
        let sel = select_cells(&bounds, 1, &mut rng);
        assert_eq!(sel.cells.len(), 1);
        assert_eq!(sel.cells[0].t, 0, "absorbing cells have no weight");
        first += (sel.cells[0].j == 0) as usize;
    }
    let freq = first as f64 / draws as f64;
    let se = (0.9f64 * 0.1 / draws as f64).sqrt();
    assert!((freq - 0.9).abs() < 3.0 * se, "frequency {freq}");
}

#[test]
fn selection_caps_kappa_at_live_cells() {
    let bounds = two_weight_bounds();
    let mut rng = SamplerRng::seed_from_u64(4);
    let sel = select_cells(&bounds, 5, &mut rng);
    assert_eq!(sel.num_positive, 2);
    let mut cells = sel.cells.clone();
    cells.sort_by_key(|c| (c.t, c.j));
    assert_eq!(cells, vec![Cell::new(0, 0), Cell::new(0, 1)]);
}

#[test]
fn draws_outside_the_bounds() {
    let mut rng = SamplerRng::seed_from_u64(5);
    for _ in 0..1000 {
        let v = draw_outside(0.9, 1.0, &mut rng);
        assert!(v > 0.0 && v < 0.9);
        let v = draw_outside(0.0, 0.4, &mut rng);
        assert!(v > 0.4 && v < 1.0);
    }
    let draws = 10_000;
    let below = (0..draws)
        .filter(|_| {
            let v = draw_outside(0.3, 0.6, &mut rng);
            assert!(!(0.3..=0.6).contains(&v));
            v < 0.3
        })
        .count();
    let p = 0.3 / 0.7;
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    assert!((below as f64 / draws as f64 - p).abs() < 3.0 * se);
}

/// One proposal from `x`: returns the selected cells, the current values,
/// both bounds and the proposed state.
fn one_proposal(
    model: &EpidemicModel,
    em: &EmissionTable,
    x: &HiddenStateMatrix,
    kind: ProposalKind,
    kappa: usize,
    rng: &mut SamplerRng,
) -> Option<(
    Vec<Cell>,
    UniformGrid,
    BoundsGrids,
    BoundsGrids,
    HiddenStateMatrix,
)> {
    let bounds = compute_bounds(x, model, kind, em).unwrap();
    let u = materialise_u(&bounds, rng);
    let sel = select_cells(&bounds, kappa, rng);
    if sel.is_empty() {
        return None;
    }
    let u_star = propose_u_star(&u, &sel.cells, &bounds, rng);
    let x_star = reconstruct(&u_star, model, kind, em).ok()?;
    let bounds_star = compute_bounds(&x_star, model, kind, em).ok()?;
    Some((sel.cells, u, bounds, bounds_star, x_star))
}

#[test]
fn single_cell_ratio_without_data_is_the_weight_ratio() {
    let (model, _, _) = common::random_instance(0, 5, 6, 11);
    let space = model.state_space(6).unwrap();
    let em = EmissionTable::unobserved(model.num_states(), 6, 5);
    let mut rng = SamplerRng::seed_from_u64(12);
    for _ in 0..500 {
        let x = rippler_core::chmm::simulate_centred(&model, &space, &mut rng);
        for kind in KINDS {
            let Some((cells, u, b, b_star, x_star)) = one_proposal(&model, &em, &x, kind, 1, &mut rng) else {
                continue;
            };
            let expected = b.total_weight().ln() - b_star.total_weight().ln();
            let got = match kind {
                ProposalKind::Standard => {
                    acceptance_log_ratio_standard(&x, &x_star, &em, &b, &b_star, &cells, &u, 1)
                }
                ProposalKind::DataInformed => acceptance_log_ratio_data_informed(&b, &b_star, &cells, &u, 1),
            };
            assert_abs_diff_eq!(got, expected, epsilon = 1e-12);
        }
    }
}

#[test]
fn unchanged_state_has_zero_log_ratio() {
    let (model, x, em) = common::random_instance(2, 3, 4, 21);
    for kind in KINDS {
        let b = compute_bounds(&x, &model, kind, &em).unwrap();
        assert_eq!(
            acceptance_log_ratio_standard(
                &x,
                &x,
                &em,
                &b,
                &b,
                &[],
                &materialise_u(&b, &mut SamplerRng::seed_from_u64(0)),
                1
            ),
            0.0
        );
        assert_eq!(
            acceptance_log_ratio_data_informed(
                &b,
                &b,
                &[],
                &materialise_u(&b, &mut SamplerRng::seed_from_u64(0)),
                1
            ),
            0.0
        );
    }
}

/// Log density of drawing `cells` in order and then their new values,
/// computed directly from the per-cell weights: each step picks a cell
/// with probability proportional to its weight among those left, and the
/// new value is uniform on a set of length equal to that weight.
fn ordered_proposal_log_density(bounds: &BoundsGrids, cells: &[Cell]) -> f64 {
    let mut left: f64 = bounds.total_weight();
    let mut total = 0.0;
    for c in cells {
        let w = bounds.weight(c.t, c.j);
        if w <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += (w / left).ln() - w.ln();
        left -= w;
    }
    total
}

/// The Metropolis-Hastings ratio on `U`, assembled from an independently
/// computed posterior table: the target density of `U` is `pi(X | Y)`
/// spread uniformly over the reproducing box of `X`.
fn oracle_log_ratio(
    posterior: &[f64],
    cells: &[Cell],
    u: &UniformGrid,
    b: &BoundsGrids,
    b_star: &BoundsGrids,
    x: &HiddenStateMatrix,
    x_star: &HiddenStateMatrix,
    kappa: usize,
) -> f64 {
    let reverse_possible = cells.iter().all(|c| {
        let (lo, hi) = b_star.get(c.t, c.j);
        let v = u.get(c.t, c.j);
        v < lo || v >= hi
    });
    let live_star = (0..b_star.num_timepoints())
        .flat_map(|t| (0..b_star.num_individuals()).map(move |j| (t, j)))
        .filter(|&(t, j)| b_star.weight(t, j) > 0.0)
        .count();
    if !reverse_possible || kappa.min(live_star) != cells.len() {
        return f64::NEG_INFINITY;
    }
    let target = |p: f64, bounds: &BoundsGrids| p.ln() - common::sum_log_widths(bounds);
    target(posterior[config_id(x_star)], b_star) - target(posterior[config_id(x)], b)
        + ordered_proposal_log_density(b_star, cells)
        - ordered_proposal_log_density(b, cells)
}

#[test]
fn acceptance_ratios_match_enumerated_posterior() {
    let fixtures: [(
        fn() -> (EpidemicModel, rippler_core::ObservationMatrix, StateSpace),
        &str,
    ); 2] = [
        (common::sis_fixture, "sis_posterior.csv"),
        (common::sir_fixture, "sir_posterior.csv"),
    ];
    let mut rng = SamplerRng::seed_from_u64(31);
    let mut compared = 0;
    for (fixture, table) in fixtures {
        let (model, y, space) = fixture();
        let em = common::emissions(&model, &y);
        let posterior = common::read_posterior(table);
        let support: Vec<usize> = (0..posterior.len()).filter(|&k| posterior[k] > 0.0).collect();
        for _ in 0..400 {
            let id = support[rng.gen_range(0..support.len())];
            let x = rippler_core::diagnostics::config_from_id(id, &space);
            for kind in KINDS {
                for kappa in [1, 2, 3] {
                    let Some((cells, u, b, b_star, x_star)) =
                        one_proposal(&model, &em, &x, kind, kappa, &mut rng)
                    else {
                        continue;
                    };
                    let got = match kind {
                        ProposalKind::Standard => {
                            acceptance_log_ratio_standard(&x, &x_star, &em, &b, &b_star, &cells, &u, kappa)
                        }
                        ProposalKind::DataInformed => {
                            acceptance_log_ratio_data_informed(&b, &b_star, &cells, &u, kappa)
                        }
                    };
                    let want = oracle_log_ratio(&posterior, &cells, &u, &b, &b_star, &x, &x_star, kappa);
                    if want == f64::NEG_INFINITY {
                        assert_eq!(got, f64::NEG_INFINITY, "{kind:?} kappa {kappa}");
                    } else {
                        assert!(
                            (got - want).abs() < 1e-9,
                            "{kind:?} kappa {kappa}: {got} vs {want}"
                        );
                        compared += 1;
                    }
                }
            }
        }
    }
    assert!(compared > 1000, "only {compared} finite ratios compared");
}

#[test]
fn every_proposal_changes_the_earliest_selected_cell() {
    for kind in KINDS {
        let (model, _, em) = common::random_instance(1, 6, 8, 41);
        let space = model.state_space(8).unwrap();
        let mut rng = SamplerRng::seed_from_u64(42);
        let x0 = rippler_core::initial_latent_state(&model, &em, &space, &mut rng).unwrap();
        let mut sampler = RipplerSampler::new(model, em, x0, kind, KappaPolicy::Fixed(3), 43).unwrap();
        for record in sampler.sweep(5000, &mut rng) {
            assert!(record.proposed);
            assert!(record.ripple_size >= 1);
            assert_eq!(record.earliest_flipped, Some(true));
        }
    }
}

#[test]
fn zero_updates_leave_the_state_alone() {
    let (model, x, em) = common::random_instance(0, 3, 4, 51);
    let mut sampler = RipplerSampler::new(
        model,
        em,
        x.clone(),
        ProposalKind::Standard,
        KappaPolicy::Fixed(1),
        0,
    )
    .unwrap();
    assert!(sampler.sweep(0, &mut SamplerRng::seed_from_u64(0)).is_empty());
    assert_eq!(sampler.state(), &x);
}
