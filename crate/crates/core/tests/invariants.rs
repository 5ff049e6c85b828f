use ab_rsa::analytic::{self, closed_form_rho_a, density_triple, rho_a_rate, ModelParams};
use ab_rsa::events;
use ab_rsa::lattice::{Boundary, SiteState};
use ab_rsa::oracle::{self, OracleProblem};
use ab_rsa::simulator::{self, LatticeConfig};
use ab_rsa::Error;
use proptest::prelude::*;

fn p(alpha: f64, t: f64) -> ModelParams {
    ModelParams::new(alpha, t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    // Every site attempts by t, so rho_A - rho_B = (alpha - beta) t exactly.
    #[test]
    fn species_difference_is_linear(alpha in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let triple = density_triple(&p(alpha, t)).unwrap();
        prop_assert!((triple.rho_a - triple.rho_b - (2.0 * alpha - 1.0) * t).abs() < 1e-15);
    }

    #[test]
    fn swapping_species_swaps_densities(alpha in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let q = p(alpha, t);
        let direct = density_triple(&q).unwrap();
        let mirrored = density_triple(&q.swapped()).unwrap();
        prop_assert!((direct.rho_a - mirrored.rho_b).abs() < 1e-15);
        prop_assert!((direct.rho_b - mirrored.rho_a).abs() < 1e-15);
    }

    #[test]
    fn rate_is_nonnegative_and_bounded(alpha in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let r = rho_a_rate(&p(alpha, t));
        prop_assert!(r >= 0.0 && r <= alpha + 1e-15);
    }

    #[test]
    fn event_sum_brackets_closed_form(alpha in 0.01f64..0.99, t in 0.05f64..=1.0, n in 1usize..6) {
        let q = p(alpha, t);
        let s = events::rho_a_event_sum(&q, n).unwrap();
        let gap = closed_form_rho_a(&q) - s.value;
        prop_assert!(gap >= -1e-15 && gap <= s.tail_bound + 1e-15, "gap {} bound {}", gap, s.tail_bound);
    }

    #[test]
    fn occupation_never_changes_once_set(
        n in 3usize..200,
        periodic in any::<bool>(),
        alpha in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let config = LatticeConfig {
            n_sites: n,
            boundary: if periodic { Boundary::Periodic } else { Boundary::Free },
            alpha,
            sample_times: vec![0.1, 0.25, 0.5, 0.75, 1.0],
            master_seed: seed,
            replicas: 1,
        };
        let run = simulator::run_once(&config, 0).unwrap();
        for w in run.site_states.windows(2) {
            for (before, after) in w[0].iter().zip(&w[1]) {
                prop_assert!(*before == SiteState::X || before == after);
            }
        }
        let again = simulator::replay(&run.attempt_times, &run.chosen_types, run.boundary, &run.sample_times)
            .unwrap();
        prop_assert_eq!(again, run.site_states);
    }

    #[test]
    fn oracle_is_reflection_and_translation_symmetric(
        n in 3usize..=7,
        alpha in 0.0f64..=1.0,
        t in 0.0f64..=1.0,
    ) {
        let free = oracle::exact_occupation_all(&OracleProblem {
            n_sites: n, boundary: Boundary::Free, alpha, t, target_site: 0,
        }).unwrap();
        for s in 0..n {
            prop_assert!((free[s].rho_a - free[n - 1 - s].rho_a).abs() < 1e-15);
        }
        let ring = oracle::exact_occupation_all(&OracleProblem {
            n_sites: n, boundary: Boundary::Periodic, alpha, t, target_site: 0,
        }).unwrap();
        for s in 1..n {
            prop_assert!((ring[s].rho_a - ring[0].rho_a).abs() < 1e-14);
        }
    }
}

#[test]
fn contour_reports_no_solution_above_terminal_density() {
    let terminal = closed_form_rho_a(&p(0.3, 1.0));
    assert_eq!(
        analytic::contour_solve_t(0.3, terminal + 1e-3).unwrap(),
        None
    );
    let t = analytic::contour_solve_t(0.3, terminal - 1e-3)
        .unwrap()
        .unwrap();
    assert!(t > 0.9 && t < 1.0);
}

#[test]
fn invalid_inputs_are_reported() {
    assert!(matches!(
        ModelParams::new(1.5, 0.5),
        Err(Error::OutOfRange { .. })
    ));
    assert!(matches!(
        ModelParams::new(0.5, f64::NAN),
        Err(Error::OutOfRange { .. })
    ));
    let err = oracle::exact_occupation(&OracleProblem {
        n_sites: 13,
        boundary: Boundary::Free,
        alpha: 0.5,
        t: 0.5,
        target_site: 0,
    })
    .unwrap_err();
    assert!(matches!(err, Error::SizeCap { .. }) && err.is_invalid_input());
}

#[test]
fn largest_oracle_lattice_is_tractable() {
    let ring = oracle::exact_occupation_all(&OracleProblem {
        n_sites: 12,
        boundary: Boundary::Periodic,
        alpha: 0.7,
        t: 1.0,
        target_site: 0,
    })
    .unwrap();
    // Twelve sites with chains wrapping round: close to, but not exactly, the bulk law.
    let bulk = closed_form_rho_a(&p(0.7, 1.0));
    assert!((ring[0].rho_a - bulk).abs() < 1e-4);
    assert!((ring[0].sum() - 1.0).abs() < 1e-13);
}
