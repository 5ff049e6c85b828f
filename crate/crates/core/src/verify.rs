//! Cross-engine verification suite.
//!
//! Each check compares the density law under test against an independent
//! route (quadrature, event sum, series, exact enumeration, simulation) and
//! records the measured discrepancy next to its tolerance. The law is passed
//! in as a [`DensityLaw`] so that a deliberately perturbed law can be used to
//! confirm the suite actually fails.

use crate::analytic::{self, closed_form_rho_a, ModelParams};
use crate::error::Result;
use crate::events::{self, EventIndex, Parity};
use crate::lattice::Boundary;
use crate::oracle::{self, OracleProblem};
use crate::simulator::{self, LatticeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    /// Deterministic identities, series, resummation and small enumerations.
    Fast,
    /// Everything in `Fast` plus Monte Carlo comparisons.
    Full,
}

pub trait DensityLaw: Sync {
    fn rho_a(&self, params: &ModelParams) -> f64;
}

/// The production closed form.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedForm;

impl DensityLaw for ClosedForm {
    fn rho_a(&self, params: &ModelParams) -> f64 {
        closed_form_rho_a(params)
    }
}

impl<F: Fn(&ModelParams) -> f64 + Sync> DensityLaw for F {
    fn rho_a(&self, params: &ModelParams) -> f64 {
        self(params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn push(&mut self, name: &'static str, measured: f64, tolerance: f64) {
        self.checks.push(Check {
            name,
            measured,
            tolerance,
            // NaN must fail
            passed: measured <= tolerance,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// `alpha` in {0.05, ..., 0.95} x `t` in {0.1, ..., 1.0}.
pub fn standard_grid() -> impl Iterator<Item = ModelParams> {
    (1..=19).flat_map(|i| {
        (1..=10).map(move |j| {
            ModelParams::new(i as f64 / 20.0, j as f64 / 10.0).expect("grid in range")
        })
    })
}

fn params(alpha: f64, t: f64) -> ModelParams {
    ModelParams::new(alpha, t).expect("constant parameters are in range")
}

/// Seed for the Monte Carlo checks.
pub const VERIFY_SEED: u64 = 20_240_611;

pub fn run(tier: Tier, law: &dyn DensityLaw) -> Result<Report> {
    let mut report = Report::default();

    let mut worst = 0.0f64;
    for p in standard_grid() {
        let q = analytic::integral_rho_a(&p, 1e-12)?;
        worst = worst.max((law.rho_a(&p) - q.value).abs());
    }
    report.push("closed_form_vs_quadrature", worst, 1e-10);

    let (mut worst, mut worst_tail) = (0.0f64, 0.0f64);
    for p in standard_grid() {
        let s = events::rho_a_event_sum(&p, 25)?;
        worst = worst.max((law.rho_a(&p) - s.value).abs());
        worst_tail = worst_tail.max(s.tail_bound);
    }
    report.push("closed_form_vs_event_sum", worst, 1e-12);
    report.push("event_sum_tail_bound", worst_tail, 1e-12);

    let worst = (0..100)
        .map(|i| {
            let t = i as f64 / 99.0;
            (law.rho_a(&params(0.5, t)) - 0.5 * (1.0 - (-t).exp())).abs()
        })
        .fold(0.0, f64::max);
    report.push("symmetric_case_exponential", worst, 1e-13);

    let worst = (0..=10)
        .map(|i| {
            let t = i as f64 / 10.0;
            law.rho_a(&params(0.0, t))
                .abs()
                .max((law.rho_a(&params(1.0, t)) - t).abs())
        })
        .fold(0.0, f64::max);
    report.push("boundary_alphas", worst, 0.0);

    report.push(
        "reference_point_rho_a_1_0.9",
        (law.rho_a(&params(0.9, 1.0)) - 0.84).abs(),
        0.01,
    );
    report.push(
        "reference_point_rho_b_1_0.9",
        (law.rho_a(&params(0.1, 1.0)) - 0.038).abs(),
        0.005,
    );

    let mut worst = 0.0f64;
    for &t in &[1e-3, 1e-2] {
        for i in 1..=9 {
            let p = params(i as f64 / 10.0, t);
            let s = analytic::series_rho_a_small_t(&p, 4)?;
            worst = worst.max((law.rho_a(&p) - s).abs() / t.powi(5));
        }
    }
    report.push("small_t_series_over_t^5", worst, 100.0);

    let mut worst = 0.0f64;
    for &a in &[0.01, 0.02, 0.05] {
        let s = analytic::series_rho_a_t1_small_alpha(a, 4)?;
        worst = worst.max((law.rho_a(&params(a, 1.0)) - s).abs() / a.powf(4.5));
    }
    report.push("small_alpha_series_over_alpha^4.5", worst, 10.0);

    let mut worst = 0.0f64;
    for i in 1..=10 {
        for r in events::hyperbolic_resummation_check(i as f64 * 0.05, 30)? {
            worst = worst.max(r);
        }
    }
    report.push("hyperbolic_resummation", worst, 1e-12);

    let (mut single, mut pair) = (0.0f64, 0.0f64);
    for i in 1..=9 {
        for j in 1..=9 {
            let (a, t) = (i as f64 / 10.0, j as f64 / 10.0);
            let one = oracle::exact_occupation(&OracleProblem {
                n_sites: 1,
                boundary: Boundary::Free,
                alpha: a,
                t,
                target_site: 0,
            })?;
            single = single.max((one.rho_a - a * t).abs());
            let two = oracle::exact_occupation(&OracleProblem {
                n_sites: 2,
                boundary: Boundary::Free,
                alpha: a,
                t,
                target_site: 0,
            })?;
            pair = pair.max((two.rho_a - (a * t - a * (1.0 - a) * t * t / 2.0)).abs());
        }
    }
    report.push("oracle_single_site", single, 1e-15);
    report.push("oracle_two_site_path", pair, 1e-14);

    let w = oracle::window_density(0.5, 0.3, 4)?;
    report.push(
        "window_half_width_4_vs_law",
        (w.value - law.rho_a(&params(0.5, 0.3))).abs(),
        1e-4,
    );

    if tier == Tier::Full {
        full_checks(&mut report, law)?;
    }
    Ok(report)
}

fn full_checks(report: &mut Report, law: &dyn DensityLaw) -> Result<()> {
    let mut worst = 0.0f64;
    for &(t, a) in &[(1.0, 0.5), (1.0, 0.9), (0.5, 0.2)] {
        let est = simulator::estimate_density(&LatticeConfig {
            n_sites: 1_000_000,
            boundary: Boundary::Periodic,
            alpha: a,
            sample_times: vec![t],
            master_seed: VERIFY_SEED,
            replicas: 8,
        })?;
        let z = (est[0].mean.rho_a - law.rho_a(&params(a, t))) / est[0].std_error.rho_a;
        worst = worst.max(z.abs());
    }
    report.push("simulator_vs_law_max_abs_z", worst, 4.0);

    let sim = simulator::estimate_site_occupation(&LatticeConfig {
        n_sites: 6,
        boundary: Boundary::Free,
        alpha: 0.5,
        sample_times: vec![1.0],
        master_seed: VERIFY_SEED,
        replicas: 1_000_000,
    })?;
    let exact = oracle::exact_occupation_all(&OracleProblem {
        n_sites: 6,
        boundary: Boundary::Free,
        alpha: 0.5,
        t: 1.0,
        target_site: 0,
    })?;
    let worst = sim[0]
        .iter()
        .zip(&exact)
        .map(|(s, e)| ((s.probability.rho_a - e.rho_a) / s.std_error.rho_a).abs())
        .fold(0.0, f64::max);
    report.push("simulator_vs_oracle_6_site_max_abs_z", worst, 4.0);

    let p = params(0.5, 1.0);
    let idx: Vec<EventIndex> = (0..2)
        .flat_map(|j| (0..2).flat_map(move |k| Parity::ALL.map(|par| EventIndex::new(j, k, par))))
        .collect();
    let freq = events::event_frequencies(&idx, &p, 1_000_000, VERIFY_SEED)?;
    let mut worst = 0.0f64;
    for (f, e) in freq.iter().zip(&idx) {
        let exact = events::prob_main_event(e, &p)?;
        worst = worst.max(((f.frequency - exact) / f.std_error).abs());
    }
    report.push("event_frequencies_max_abs_z", worst, 4.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_tier_passes_on_production_law() {
        let report = run(Tier::Fast, &ClosedForm).unwrap();
        let failed: Vec<_> = report.failures().collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert_eq!(report.checks.len(), 13);
    }

    #[test]
    fn perturbed_law_is_caught() {
        let perturbed = |p: &ModelParams| closed_form_rho_a(p) * (1.0 + 1e-9);
        let report = run(Tier::Fast, &perturbed).unwrap();
        assert!(!report.passed());
        let names: Vec<_> = report.failures().map(|c| c.name).collect();
        assert!(names.contains(&"closed_form_vs_quadrature"), "{names:?}");
        assert!(names.contains(&"closed_form_vs_event_sum"));
    }
}
