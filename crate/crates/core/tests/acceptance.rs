//! Release acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that every criterion executes and
//! reports even when an earlier one fails. The process exits non-zero if any
//! criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ab_rsa::analytic::{self, closed_form_rho_a, density_triple, ModelParams};
use ab_rsa::events::{self, EventIndex, Parity};
use ab_rsa::lattice::Boundary;
use ab_rsa::oracle::{self, OracleProblem};
use ab_rsa::simulator::{self, DensityEstimate, LatticeConfig};
use ab_rsa::verify::standard_grid;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const SEED: u64 = 0xACCE_5757;

/// Quadrature values at (t=1, alpha=0.9), frozen at release.
const FROZEN_RHO_A_1_09: f64 = 0.837_812_042_669_067_5;
const FROZEN_RHO_B_1_09: f64 = 0.037_812_042_669_067_23;

struct Outcome {
    passed: bool,
    detail: String,
}

fn within(measured: f64, tol: f64, what: &str) -> Outcome {
    Outcome {
        passed: measured <= tol,
        detail: format!("{what} = {measured:.3e} (tol {tol:.0e})"),
    }
}

fn p(alpha: f64, t: f64) -> ModelParams {
    ModelParams::new(alpha, t).unwrap()
}

fn c1() -> Outcome {
    let worst = standard_grid()
        .map(|q| {
            let integral = analytic::integral_rho_a(&q, 1e-12).unwrap().value;
            (closed_form_rho_a(&q) - integral).abs()
        })
        .fold(0.0, f64::max);
    within(worst, 1e-10, "max |closed - quadrature|")
}

fn c2() -> Outcome {
    let (mut worst, mut tail) = (0.0f64, 0.0f64);
    for q in standard_grid() {
        let s = events::rho_a_event_sum(&q, 25).unwrap();
        worst = worst.max((closed_form_rho_a(&q) - s.value).abs());
        tail = tail.max(s.tail_bound);
    }
    Outcome {
        passed: worst <= 1e-12 && tail <= 1e-12,
        detail: format!(
            "max |closed - event sum| = {worst:.3e}, max tail bound = {tail:.3e} (tol 1e-12)"
        ),
    }
}

fn c3() -> Outcome {
    let worst = (0..100)
        .map(|i| {
            let t = i as f64 / 99.0;
            (closed_form_rho_a(&p(0.5, t)) - 0.5 * (1.0 - (-t).exp())).abs()
        })
        .fold(0.0, f64::max);
    within(worst, 1e-13, "max |rho_A(t, 0.5) - (1 - e^-t)/2|")
}

fn c4() -> Outcome {
    let rho_a = closed_form_rho_a(&p(0.9, 1.0));
    let rho_b = density_triple(&p(0.9, 1.0)).unwrap().rho_b;
    let quad_a = analytic::integral_rho_a(&p(0.9, 1.0), 1e-12).unwrap().value;
    let quad_b = analytic::integral_rho_a(&p(0.1, 1.0), 1e-12).unwrap().value;
    let frozen = (rho_a - FROZEN_RHO_A_1_09)
        .abs()
        .max((rho_b - FROZEN_RHO_B_1_09).abs())
        .max((quad_a - FROZEN_RHO_A_1_09).abs())
        .max((quad_b - FROZEN_RHO_B_1_09).abs());
    Outcome {
        passed: (rho_a - 0.84).abs() <= 0.01 && (rho_b - 0.038).abs() <= 0.005 && frozen <= 1e-12,
        detail: format!(
            "rho_A = {rho_a:.6} (0.84 +- 0.01), rho_B = {rho_b:.6} (0.038 +- 0.005), \
             drift from frozen digits = {frozen:.1e} (tol 1e-12)"
        ),
    }
}

fn c5() -> Outcome {
    let mut worst_t = 0.0f64;
    for &t in &[1e-3, 1e-2] {
        for i in 1..=9 {
            let q = p(i as f64 / 10.0, t);
            let s = analytic::series_rho_a_small_t(&q, 4).unwrap();
            worst_t = worst_t.max((closed_form_rho_a(&q) - s).abs() / (100.0 * t.powi(5)));
        }
    }
    let mut worst_a = 0.0f64;
    for &a in &[0.01, 0.02, 0.05] {
        let s = analytic::series_rho_a_t1_small_alpha(a, 4).unwrap();
        worst_a = worst_a.max((closed_form_rho_a(&p(a, 1.0)) - s).abs() / (10.0 * a.powf(4.5)));
    }
    Outcome {
        passed: worst_t <= 1.0 && worst_a <= 1.0,
        detail: format!(
            "worst error / 100 t^5 = {worst_t:.3e}, worst error / 10 alpha^4.5 = {worst_a:.3e} (cap 1)"
        ),
    }
}

fn c6() -> Outcome {
    let worst = (1..=10)
        .flat_map(|i| events::hyperbolic_resummation_check(i as f64 * 0.05, 30).unwrap())
        .fold(0.0, f64::max);
    within(worst, 1e-12, "max residual")
}

fn oracle_problem(
    n: usize,
    boundary: Boundary,
    alpha: f64,
    t: f64,
    target: usize,
) -> OracleProblem {
    OracleProblem {
        n_sites: n,
        boundary,
        alpha,
        t,
        target_site: target,
    }
}

fn c7() -> Outcome {
    let (mut pair, mut single) = (0.0f64, 0.0f64);
    for i in 1..=9 {
        for j in 1..=9 {
            let (a, t) = (i as f64 / 10.0, j as f64 / 10.0);
            let two =
                oracle::exact_occupation(&oracle_problem(2, Boundary::Free, a, t, 0)).unwrap();
            pair = pair.max((two.rho_a - (a * t - a * (1.0 - a) * t * t / 2.0)).abs());
            let one =
                oracle::exact_occupation(&oracle_problem(1, Boundary::Free, a, t, 0)).unwrap();
            single = single.max((one.rho_a - a * t).abs());
        }
    }
    Outcome {
        passed: pair <= 1e-14 && single <= 1e-15,
        detail: format!(
            "two-site max error = {pair:.3e} (tol 1e-14), one-site = {single:.3e} (tol 1e-15)"
        ),
    }
}

fn c8() -> Outcome {
    let config = LatticeConfig {
        n_sites: 6,
        boundary: Boundary::Free,
        alpha: 0.5,
        sample_times: vec![1.0],
        master_seed: SEED,
        replicas: 10_000_000,
    };
    let sim = simulator::estimate_site_occupation(&config).unwrap();
    let exact =
        oracle::exact_occupation_all(&oracle_problem(6, Boundary::Free, 0.5, 1.0, 0)).unwrap();
    let z: Vec<f64> = sim[0]
        .iter()
        .zip(&exact)
        .map(|(s, e)| (s.probability.rho_a - e.rho_a) / s.std_error.rho_a)
        .collect();
    let worst = z.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    let zs: Vec<String> = z.iter().map(|z| format!("{z:+.2}")).collect();
    Outcome {
        passed: worst <= 4.0,
        detail: format!("per-site z = [{}] (|z| <= 4)", zs.join(", ")),
    }
}

fn c9() -> Outcome {
    let mut zs = Vec::new();
    for &(t, a) in &[(1.0, 0.5), (1.0, 0.9), (0.5, 0.2)] {
        let est = simulator::estimate_density(&LatticeConfig {
            n_sites: 1_000_000,
            boundary: Boundary::Periodic,
            alpha: a,
            sample_times: vec![t],
            master_seed: SEED,
            replicas: 8,
        })
        .unwrap();
        zs.push((est[0].mean.rho_a - closed_form_rho_a(&p(a, t))) / est[0].std_error.rho_a);
    }
    let worst = zs.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    Outcome {
        passed: worst <= 4.0,
        detail: format!(
            "z = [{:+.2}, {:+.2}, {:+.2}] (|z| <= 4)",
            zs[0], zs[1], zs[2]
        ),
    }
}

fn c10() -> Outcome {
    let w = oracle::window_density(0.5, 0.3, 4).unwrap();
    let mut out = within(w.gap(), 1e-4, "|window - closed form|");
    out.detail += &format!(
        ", event-sum tail bound at index {} = {:.3e}",
        w.max_index, w.truncation_note
    );
    out
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn estimate_bytes(estimates: &[DensityEstimate]) -> Vec<u8> {
    let mut out = Vec::new();
    for e in estimates {
        for v in [
            e.time,
            e.mean.rho_a,
            e.mean.rho_b,
            e.mean.rho_x,
            e.std_error.rho_a,
            e.std_error.rho_b,
            e.std_error.rho_x,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&e.replicas.to_le_bytes());
        out.extend_from_slice(&(e.sites_counted as u64).to_le_bytes());
    }
    out
}

fn lattice_config() -> impl Strategy<Value = LatticeConfig> {
    (
        3usize..64,
        prop_oneof![Just(Boundary::Periodic), Just(Boundary::Free)],
        0.0f64..=1.0,
        prop::collection::btree_set(0u32..=1000, 1..4),
        any::<u64>(),
        1u64..4,
    )
        .prop_map(
            |(n_sites, boundary, alpha, times, master_seed, replicas)| LatticeConfig {
                n_sites,
                boundary,
                alpha,
                sample_times: times.into_iter().map(|k| k as f64 / 1000.0).collect(),
                master_seed,
                replicas,
            },
        )
}

const PROPERTY_CASES: u32 = 10_000;

fn c11() -> Outcome {
    let mut results = Vec::new();

    let monotone = runner(PROPERTY_CASES).run(
        &(1e-9f64..1.0, 0.0f64..=1.0, 0.0f64..=1.0)
            .prop_filter("distinct times", |(_, a, b)| a != b),
        |(alpha, a, b)| {
            let (t1, t2) = (a.min(b), a.max(b));
            prop_assert!(closed_form_rho_a(&p(alpha, t1)) <= closed_form_rho_a(&p(alpha, t2)));
            Ok(())
        },
    );
    results.push(("monotonicity", monotone.map_err(|e| e.to_string())));

    let bound = runner(PROPERTY_CASES).run(&(0.0f64..=1.0, 0.0f64..=1.0), |(alpha, t)| {
        let q = p(alpha, t);
        prop_assert!(closed_form_rho_a(&q) <= alpha * t);
        prop_assert!(density_triple(&q).unwrap().rho_b <= (1.0 - alpha) * t);
        Ok(())
    });
    results.push(("attempt bound", bound.map_err(|e| e.to_string())));

    let sum = runner(PROPERTY_CASES).run(
        &(
            0.0f64..=1.0,
            0.0f64..=1.0,
            1usize..=6,
            any::<bool>(),
            0usize..6,
        ),
        |(alpha, t, n, periodic, target)| {
            let triple = density_triple(&p(alpha, t)).unwrap();
            prop_assert!((triple.sum() - 1.0).abs() <= 1e-15);
            prop_assert!(triple.rho_a >= 0.0 && triple.rho_b >= 0.0 && triple.rho_x >= 0.0);
            let boundary = if periodic && n >= 3 {
                Boundary::Periodic
            } else {
                Boundary::Free
            };
            let exact =
                oracle::exact_occupation(&oracle_problem(n, boundary, alpha, t, target % n))
                    .unwrap();
            prop_assert!((exact.sum() - 1.0).abs() <= 1e-13);
            Ok(())
        },
    );
    results.push(("sum rule", sum.map_err(|e| e.to_string())));

    let adjacency =
        runner(PROPERTY_CASES).run(&(lattice_config(), 0u64..1000), |(config, replica)| {
            let run = simulator::run_once(&config, replica).unwrap();
            prop_assert!(simulator::check_adjacency(&run));
            Ok(())
        });
    results.push(("adjacency", adjacency.map_err(|e| e.to_string())));

    let contour = runner(PROPERTY_CASES).run(
        &(0.0f64..1.0, 0.0f64..=1.0).prop_map(|(u, t)| (1.0 - u, t)),
        |(alpha, t)| {
            let lambda = closed_form_rho_a(&p(alpha, t));
            prop_assume!(lambda > 0.0 && lambda < 1.0);
            let solved = analytic::contour_solve_t(alpha, lambda).unwrap();
            prop_assert!(solved.is_some());
            let solved = solved.unwrap();
            prop_assert!(
                (solved - t).abs() <= 1e-10,
                "alpha {} t {} solved {}",
                alpha,
                t,
                solved
            );
            Ok(())
        },
    );
    results.push(("contour round-trip", contour.map_err(|e| e.to_string())));

    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let three = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap();
    let determinism = runner(PROPERTY_CASES).run(&lattice_config(), |config| {
        let a = one
            .install(|| simulator::estimate_density(&config))
            .unwrap();
        let b = three
            .install(|| simulator::estimate_density(&config))
            .unwrap();
        prop_assert_eq!(estimate_bytes(&a), estimate_bytes(&b));
        let r1 = simulator::run_once(&config, 0).unwrap();
        let r2 = simulator::run_once(&config, 0).unwrap();
        prop_assert_eq!(r1, r2);
        Ok(())
    });
    results.push(("byte determinism", determinism.map_err(|e| e.to_string())));

    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    Outcome {
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("6 suites x {PROPERTY_CASES} cases, zero failures")
        } else {
            failed.join("; ")
        },
    }
}

fn c12() -> Outcome {
    let q = p(0.5, 1.0);
    let idx: Vec<EventIndex> = (0..2)
        .flat_map(|j| (0..2).flat_map(move |k| Parity::ALL.map(|par| EventIndex::new(j, k, par))))
        .collect();
    let freq = events::event_frequencies(&idx, &q, 10_000_000, SEED).unwrap();
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for (f, e) in freq.iter().zip(&idx) {
        let z = (f.frequency - events::prob_main_event(e, &q).unwrap()) / f.std_error;
        if z.abs() >= worst {
            worst = z.abs();
            worst_at = format!("G({},{}) {}", e.j, e.k, e.parity.label());
        }
    }
    Outcome {
        passed: worst <= 4.0,
        detail: format!("16 events, max |z| = {worst:.2} at {worst_at} (|z| <= 4)"),
    }
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, Option<u64>, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        (1, "closed form vs quadrature", Some(1), c1),
        (2, "event-sum equivalence", Some(5), c2),
        (3, "symmetric special case", None, c3),
        (4, "reference point values", None, c4),
        (5, "series consistency", None, c5),
        (6, "hyperbolic resummation", None, c6),
        (7, "oracle exactness", None, c7),
        (8, "oracle vs simulator", Some(120), c8),
        (9, "simulator vs closed form", Some(60), c9),
        (10, "window convergence", None, c10),
        (11, "property suites", None, c11),
        (12, "event frequencies", Some(180), c12),
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (number, name, limit, check) in criteria {
        if !filter.is_empty() && !filter.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        let elapsed = start.elapsed();
        let in_time = limit.map_or(true, |s| elapsed <= Duration::from_secs(s));
        let passed = outcome.passed && in_time;
        if !passed {
            failures += 1;
        }
        let budget = limit.map(|s| format!(" (limit {s} s)")).unwrap_or_default();
        println!(
            "criterion {number:>2} {:<4} {name}: {} [{:.2} s{budget}]",
            if passed { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
        );
    }
    println!("acceptance: {} failed", failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
