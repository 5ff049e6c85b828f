//! Exact occupation probabilities on small lattices by exhaustive enumeration.
//!
//! For a lattice of `n` sites observed at time `t`, the outcome depends only on
//! which sites attempted before `t`, the order of those attempts and their
//! species. Conditioning on the attempted set `S` (probability
//! `t^|S| (1-t)^(n-|S|)`), every ordering of `S` has probability `1/|S|!` and a
//! species assignment with `a` A's has probability `alpha^a beta^(|S|-a)`.
//! Every (subset, ordering, assignment) triple is accounted for, with the
//! outcome tallied as an integer count keyed by `(|S|, a)`; the probabilities
//! are formed only at the end. Species of sites that never attempt do not
//! matter and are not enumerated.
//!
//! The replay here is written independently of [`crate::simulator`].

use std::collections::HashMap;

use crate::analytic::{closed_form_rho_a, DensityTriple, ModelParams};
use crate::error::{check_open_unit, check_unit, Error, Result};
use crate::events;
use crate::lattice::Boundary;
use crate::numeric::CompensatedSum;

pub const MAX_ORACLE_SITES: usize = 12;
pub const MAX_WINDOW_HALF_WIDTH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleProblem {
    pub n_sites: usize,
    pub boundary: Boundary,
    pub alpha: f64,
    pub t: f64,
    pub target_site: usize,
}

impl OracleProblem {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites > MAX_ORACLE_SITES {
            return Err(Error::SizeCap {
                what: "lattice size",
                requested: self.n_sites,
                cap: MAX_ORACLE_SITES,
            });
        }
        if self.n_sites == 0 {
            return Err(Error::InvalidConfig("n_sites must be positive".into()));
        }
        if self.boundary == Boundary::Periodic && self.n_sites < 3 {
            return Err(Error::InvalidConfig(
                "a periodic lattice needs at least 3 sites".into(),
            ));
        }
        if self.target_site >= self.n_sites {
            return Err(Error::InvalidConfig(format!(
                "target site {} is not on a lattice of {} sites",
                self.target_site, self.n_sites
            )));
        }
        check_unit("alpha", self.alpha)?;
        check_unit("t", self.t)?;
        Ok(())
    }
}

/// Exact `(p_A, p_B, p_X)` of the target site.
pub fn exact_occupation(problem: &OracleProblem) -> Result<DensityTriple> {
    problem.validate()?;
    Ok(exact_occupation_all(problem)?[problem.target_site])
}

/// Exact `(p_A, p_B, p_X)` of every site (the target is ignored).
pub fn exact_occupation_all(problem: &OracleProblem) -> Result<Vec<DensityTriple>> {
    problem.validate()?;
    let n = problem.n_sites;
    let tally = Tally::enumerate(n, problem.boundary);
    Ok(tally.probabilities(problem.alpha, problem.t))
}

/// Integer outcome counts: `a_count[k][site][a]` is the number of
/// (subset of size k, ordering, assignment with a A's) triples leaving `site` as A.
type Counts = [u64; MAX_ORACLE_SITES + 1];

// Two bits per site.
const UNTRIED: u32 = 0;
const CELL_A: u32 = 1;
const CELL_B: u32 = 2;
const CELL_X: u32 = 3;

fn cell(config: u32, site: usize) -> u32 {
    config >> (2 * site) & 3
}

fn opposite(cell: u32) -> u32 {
    if cell == CELL_A {
        CELL_B
    } else {
        CELL_A
    }
}

struct Tally {
    n: usize,
    a_count: Vec<Vec<Vec<u64>>>,
    b_count: Vec<Vec<Vec<u64>>>,
}

impl Tally {
    fn empty(n: usize) -> Self {
        let block = || vec![vec![vec![0u64; n + 1]; n]; n + 1];
        Self {
            n,
            a_count: block(),
            b_count: block(),
        }
    }

    /// Builds the counts by processing attempts one at a time. A layer maps
    /// each reachable lattice configuration after `k` attempts to the number
    /// of (ordering, assignment) pairs producing it, split by the number of
    /// A attempts. Configurations reached along different orderings are
    /// merged, which is what keeps this tractable up to the size cap.
    fn enumerate(n: usize, boundary: Boundary) -> Tally {
        let mut tally = Tally::empty(n);
        let mut layer: HashMap<u32, Counts> = HashMap::new();
        layer.insert(0, [0; MAX_ORACLE_SITES + 1]);
        layer.get_mut(&0).expect("just inserted")[0] = 1;
        for k in 0..=n {
            for (&config, counts) in &layer {
                tally.record(k, config, counts);
            }
            if k == n {
                break;
            }
            let mut next: HashMap<u32, Counts> = HashMap::with_capacity(layer.len() * 2);
            for (&config, counts) in &layer {
                for site in (0..n).filter(|&s| cell(config, s) == UNTRIED) {
                    for mine in [CELL_A, CELL_B] {
                        let blocked = boundary
                            .neighbors(site, n)
                            .into_iter()
                            .flatten()
                            .any(|nb| cell(config, nb) == opposite(mine));
                        let outcome = if blocked { CELL_X } else { mine };
                        let entry = next
                            .entry(config | outcome << (2 * site))
                            .or_insert([0; MAX_ORACLE_SITES + 1]);
                        let shift = usize::from(mine == CELL_A);
                        for a in 0..=k {
                            entry[a + shift] += counts[a];
                        }
                    }
                }
            }
            layer = next;
        }
        tally
    }

    fn record(&mut self, k: usize, config: u32, counts: &Counts) {
        for site in 0..self.n {
            let target = match cell(config, site) {
                CELL_A => &mut self.a_count[k][site],
                CELL_B => &mut self.b_count[k][site],
                _ => continue,
            };
            for (slot, &c) in target.iter_mut().zip(counts) {
                *slot += c;
            }
        }
    }

    fn probabilities(&self, alpha: f64, t: f64) -> Vec<DensityTriple> {
        let n = self.n;
        let beta = 1.0 - alpha;
        let mut factorial = 1.0;
        let subset_weight: Vec<f64> = (0..=n)
            .map(|k| {
                if k > 0 {
                    factorial *= k as f64;
                }
                t.powi(k as i32) * (1.0 - t).powi((n - k) as i32) / factorial
            })
            .collect();
        (0..n)
            .map(|site| {
                let mut pa = CompensatedSum::new();
                let mut pb = CompensatedSum::new();
                for (k, &weight) in subset_weight.iter().enumerate() {
                    for a in 0..=k {
                        let w = weight * alpha.powi(a as i32) * beta.powi((k - a) as i32);
                        pa.add(w * self.a_count[k][site][a] as f64);
                        pb.add(w * self.b_count[k][site][a] as f64);
                    }
                }
                let (pa, pb) = (pa.value(), pb.value());
                DensityTriple {
                    rho_a: pa,
                    rho_b: pb,
                    rho_x: 1.0 - pa - pb,
                }
            })
            .collect()
    }
}

/// Exact centre-site density on a free path of `2 half_width + 1` sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowDensity {
    pub value: f64,
    /// Event-sum tail bound at the largest truncation index whose events fit
    /// entirely inside the window.
    pub truncation_note: f64,
    pub max_index: usize,
    pub closed_form: f64,
}

impl WindowDensity {
    pub fn gap(&self) -> f64 {
        (self.value - self.closed_form).abs()
    }
}

pub fn window_density(alpha: f64, t: f64, half_width: usize) -> Result<WindowDensity> {
    let alpha = check_open_unit("alpha", alpha)?;
    if half_width == 0 {
        return Err(Error::InvalidConfig("half_width must be positive".into()));
    }
    if half_width > MAX_WINDOW_HALF_WIDTH {
        return Err(Error::SizeCap {
            what: "window half-width",
            requested: half_width,
            cap: MAX_WINDOW_HALF_WIDTH,
        });
    }
    let problem = OracleProblem {
        n_sites: 2 * half_width + 1,
        boundary: Boundary::Free,
        alpha,
        t,
        target_site: half_width,
    };
    let value = exact_occupation(&problem)?.rho_a;
    let params = ModelParams::new(alpha, t)?;
    // G_{j,k} touches sites up to 2j+1 on the left and 2k+1 on the right.
    let max_index = (half_width - 1) / 2;
    Ok(WindowDensity {
        value,
        truncation_note: events::tail_bound(&params, max_index),
        max_index,
        closed_form: closed_form_rho_a(&params),
    })
}
