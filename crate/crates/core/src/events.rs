//! Event decomposition of "site 0 holds an A particle at time t".
//!
//! Looking right from site 0, the chain event `C+_m` (m >= 1) says that
//! sites `0..m` attempted in strictly decreasing time order before `t`
//! with species `A, B, A, B, ...` (the last one replaced by `A` when `m` is
//! even), and, for odd `m`, that site `m` attempts later than site `m - 1`.
//! Each such chain leaves site 0 free of a B neighbour on the right when it
//! deposits. `C-_m` is the mirror image. Site 0 is A at time `t` exactly when
//! one `C-_j ∩ C+_k` occurs, and these intersections are disjoint. Grouping
//! them by parity gives the main events
//!
//! ```text
//! G_ee(j,k) = C-_{2j+2} ∩ C+_{2k+2}     G_oe(j,k) = C-_{2j+1} ∩ C+_{2k+2}
//! G_eo(j,k) = C-_{2j+2} ∩ C+_{2k+1}     G_oo(j,k) = C-_{2j+1} ∩ C+_{2k+1}
//! ```
//!
//! whose probabilities are linear combinations of
//!
//! ```text
//! Gamma_{j,k}(m,n) = x^{2j+2k+m+n+1} / ((2j+m)! (2k+n)! (2j+2k+m+n+1)),  x = gamma t.
//! ```
//!
//! Summing over parities collapses the prefactors to `theta, -1, -1, 1/theta`
//! and the double sum over `(j, k)` resums to the closed form in
//! [`crate::analytic`].
//!
//! # Tail bound
//!
//! Every main event requires `t > t_0 > t_{-1} > ... > t_{-2j}` and
//! `t_0 > t_1 > ... > t_{2k}` together with at least `j + k + 1` prescribed
//! A's and `j + k` prescribed B's, so each of the four parities has
//! probability at most `alpha t a_j a_k` with `a_i = x^{2i} / (2i)!`. The mass
//! dropped by truncating to `j, k <= N` is therefore at most
//! `4 alpha t (cosh^2 x - C_N^2) = 4 alpha t R_N (cosh x + C_N)`, where `C_N`
//! is the partial cosh sum and `R_N = cosh x - C_N` is bounded by a geometric
//! majorant of its first omitted term. All omitted terms are non-negative, so
//! the truncated sum and the sum plus the bound bracket the exact density.

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;

use crate::analytic::ModelParams;
use crate::error::{check_open_unit, Error, Result};
use crate::lattice::Species;
use crate::numeric::{sinh_minus_id, CompensatedSum};
use crate::rng;

/// Largest factorial argument handled by the tables.
pub const MAX_FACTORIAL: usize = 2048;

/// Largest `j + k` accepted by [`prob_ordering`].
pub const MAX_ORDERING_INDEX: usize = 300;

/// Largest `j` or `k` accepted by [`GammaTermSpec`] and the event sums.
pub const MAX_EVENT_INDEX: usize = 500;

struct FactorialTables {
    /// `n!` for `n <= 170`, the last finite value in f64.
    linear: Vec<f64>,
    /// `ln n!` for `n <= MAX_FACTORIAL`.
    log: Vec<f64>,
}

fn tables() -> &'static FactorialTables {
    static TABLES: OnceLock<FactorialTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut linear = Vec::with_capacity(171);
        let mut f = 1.0f64;
        linear.push(f);
        for n in 1..=170 {
            f *= n as f64;
            linear.push(f);
        }
        let mut log: Vec<f64> = linear.iter().map(|v| v.ln()).collect();
        let mut acc = CompensatedSum::new();
        acc.add(log[170]);
        for n in 171..=MAX_FACTORIAL {
            acc.add((n as f64).ln());
            log.push(acc.value());
        }
        FactorialTables { linear, log }
    })
}

/// `x^p / (a! b! d)`.
///
/// Evaluated directly when nothing can overflow or underflow, otherwise as
/// `exp(p ln x - ln a! - ln b! - ln d)`.
fn power_over_factorials(x: f64, p: usize, a: usize, b: usize, d: usize) -> f64 {
    if x == 0.0 {
        return if p == 0 { 1.0 / d as f64 } else { 0.0 };
    }
    let tab = tables();
    let log_power = p as f64 * x.ln();
    let log_value = log_power - tab.log[a] - tab.log[b] - (d as f64).ln();
    if a <= 170 && b <= 170 && log_power.abs() < 700.0 && log_value > -700.0 {
        x.powi(p as i32) / tab.linear[a] / tab.linear[b] / d as f64
    } else {
        log_value.exp()
    }
}

/// `P(t > t_0 > t_{-1} > ... > t_{-j}, t_0 > t_1 > ... > t_k) = t^{j+k+1} / (j! k! (j+k+1))`.
pub fn prob_ordering(j: usize, k: usize, t: f64) -> Result<f64> {
    if j + k > MAX_ORDERING_INDEX {
        return Err(Error::OutOfRange {
            name: "j + k",
            value: (j + k) as f64,
            range: "[0, 300]",
        });
    }
    let t = crate::error::check_unit("t", t)?;
    Ok(power_over_factorials(t, j + k + 1, j, k, j + k + 1))
}

/// Indices and argument of one `Gamma_{j,k}(m,n)` term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTermSpec {
    j: usize,
    k: usize,
    m: u8,
    n: u8,
    x: f64,
}

impl GammaTermSpec {
    pub fn new(j: usize, k: usize, m: u8, n: u8, x: f64) -> Result<Self> {
        if j > MAX_EVENT_INDEX || k > MAX_EVENT_INDEX {
            return Err(Error::OutOfRange {
                name: "j or k",
                value: j.max(k) as f64,
                range: "[0, 500]",
            });
        }
        if m > 1 || n > 1 {
            return Err(Error::OutOfRange {
                name: "m or n",
                value: m.max(n) as f64,
                range: "{0, 1}",
            });
        }
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::OutOfRange {
                name: "x",
                value: x,
                range: "[0, inf)",
            });
        }
        Ok(Self { j, k, m, n, x })
    }
}

/// `Gamma_{j,k}(m,n) = x^{2j+2k+m+n+1} / ((2j+m)! (2k+n)! (2j+2k+m+n+1))`.
pub fn gamma_term(spec: &GammaTermSpec) -> f64 {
    gamma(spec.j, spec.k, spec.m as usize, spec.n as usize, spec.x)
}

#[inline]
fn gamma(j: usize, k: usize, m: usize, n: usize, x: f64) -> f64 {
    let a = 2 * j + m;
    let b = 2 * k + n;
    power_over_factorials(x, a + b + 1, a, b, a + b + 1)
}

/// Parities of the left and right chain lengths (`e` = even, `o` = odd).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    EE,
    OE,
    EO,
    OO,
}

impl Parity {
    pub const ALL: [Parity; 4] = [Parity::EE, Parity::OE, Parity::EO, Parity::OO];

    /// Lengths of the left and right chain events for indices `(j, k)`.
    pub fn chain_lengths(self, j: usize, k: usize) -> (usize, usize) {
        let left_even = matches!(self, Parity::EE | Parity::EO);
        let right_even = matches!(self, Parity::EE | Parity::OE);
        (
            if left_even { 2 * j + 2 } else { 2 * j + 1 },
            if right_even { 2 * k + 2 } else { 2 * k + 1 },
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::EE => "ee",
            Parity::OE => "oe",
            Parity::EO => "eo",
            Parity::OO => "oo",
        }
    }
}

/// One main event `G_{j,k}` of the given parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventIndex {
    pub j: usize,
    pub k: usize,
    pub parity: Parity,
}

impl EventIndex {
    pub fn new(j: usize, k: usize, parity: Parity) -> Self {
        Self { j, k, parity }
    }

    /// Number of sites on each side of 0 that the event constrains.
    pub fn reach(&self) -> usize {
        let (l, r) = self.parity.chain_lengths(self.j, self.k);
        l.max(r)
    }
}

fn open_alpha(params: &ModelParams) -> Result<(f64, f64, f64)> {
    let alpha = check_open_unit("alpha", params.alpha())?;
    let beta = 1.0 - alpha;
    Ok((alpha, beta, (alpha * beta).sqrt() * params.t()))
}

/// Probability of one main event.
pub fn prob_main_event(idx: &EventIndex, params: &ModelParams) -> Result<f64> {
    let (alpha, beta, x) = open_alpha(params)?;
    let (j, k) = (idx.j, idx.k);
    if j > MAX_EVENT_INDEX || k > MAX_EVENT_INDEX {
        return Err(Error::OutOfRange {
            name: "j or k",
            value: j.max(k) as f64,
            range: "[0, 500]",
        });
    }
    let g = |m, n| gamma(j, k, m, n, x);
    let ratio = alpha / beta;
    let cross = alpha.sqrt() / (beta * beta.sqrt());
    let value = match idx.parity {
        Parity::EE => ratio * ratio.sqrt() * g(1, 1),
        Parity::OE => ratio * g(0, 1) - cross * g(1, 1),
        Parity::EO => ratio * g(1, 0) - cross * g(1, 1),
        Parity::OO => {
            let mut acc = CompensatedSum::new();
            acc.add(ratio.sqrt() * g(0, 0));
            acc.add(-g(1, 0) / beta);
            acc.add(-g(0, 1) / beta);
            acc.add(g(1, 1) / (alpha.sqrt() * beta * beta.sqrt()));
            acc.value()
        }
    };
    Ok(value)
}

/// Sum of the four parity probabilities for fixed `(j, k)`:
/// `theta Gamma(0,0) - Gamma(1,0) - Gamma(0,1) + Gamma(1,1) / theta`.
pub fn combined_term(j: usize, k: usize, params: &ModelParams) -> Result<f64> {
    let (alpha, beta, x) = open_alpha(params)?;
    if j > MAX_EVENT_INDEX || k > MAX_EVENT_INDEX {
        return Err(Error::OutOfRange {
            name: "j or k",
            value: j.max(k) as f64,
            range: "[0, 500]",
        });
    }
    Ok(combined(j, k, (alpha / beta).sqrt(), x))
}

fn combined(j: usize, k: usize, theta: f64, x: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.add(theta * gamma(j, k, 0, 0, x));
    acc.add(-gamma(j, k, 1, 0, x));
    acc.add(-gamma(j, k, 0, 1, x));
    acc.add(gamma(j, k, 1, 1, x) / theta);
    acc.value()
}

/// Truncated event sum with a rigorous bound on what was left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSum {
    pub value: f64,
    pub tail_bound: f64,
}

/// `rho_A` as the sum of [`combined_term`] over `0 <= j, k <= max_index`.
pub fn rho_a_event_sum(params: &ModelParams, max_index: usize) -> Result<EventSum> {
    let (alpha, beta, x) = open_alpha(params)?;
    if max_index == 0 || max_index > MAX_EVENT_INDEX {
        return Err(Error::OutOfRange {
            name: "max_index",
            value: max_index as f64,
            range: "[1, 500]",
        });
    }
    let theta = (alpha / beta).sqrt();
    let mut acc = CompensatedSum::new();
    for j in 0..=max_index {
        for k in 0..=max_index {
            acc.add(combined(j, k, theta, x));
        }
    }
    Ok(EventSum {
        value: acc.value(),
        tail_bound: tail_bound(params, max_index),
    })
}

/// Upper bound on the mass of all main events with `j > max_index` or `k > max_index`.
pub fn tail_bound(params: &ModelParams, max_index: usize) -> f64 {
    let alpha = params.alpha();
    let t = params.t();
    let x = (alpha * params.beta()).sqrt() * t;
    if alpha == 0.0 || t == 0.0 {
        return 0.0;
    }
    let n = max_index.min(MAX_EVENT_INDEX);
    let partial: f64 = (0..=n)
        .map(|i| power_over_factorials(x, 2 * i, 2 * i, 0, 1))
        .collect::<CompensatedSum>()
        .value();
    let first_omitted = power_over_factorials(x, 2 * n + 2, 2 * n + 2, 0, 1);
    let ratio = x * x / (((2 * n + 3) * (2 * n + 4)) as f64);
    let remainder = first_omitted / (1.0 - ratio);
    4.0 * alpha * t * remainder * (x.cosh() + partial)
}

/// Residuals `|sum_{j,k <= n_terms} Gamma_{j,k}(m,n) - I_{mn}(x)|` in the order
/// `(m,n) = (0,0), (0,1), (1,0), (1,1)`, where the exact sums are
/// `x/2 + sinh(2x)/4`, `sinh^2(x)/2`, `sinh^2(x)/2` and `sinh(2x)/4 - x/2`.
///
/// Both indices run over `0..=n_terms`.
pub fn hyperbolic_resummation_check(x: f64, n_terms: usize) -> Result<[f64; 4]> {
    if !(0.0..=0.5).contains(&x) {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
            range: "[0, 0.5]",
        });
    }
    if n_terms > 200 {
        return Err(Error::OutOfRange {
            name: "n_terms",
            value: n_terms as f64,
            range: "[0, 200]",
        });
    }
    let sh = x.sinh();
    let exact = [
        x / 2.0 + (2.0 * x).sinh() / 4.0,
        sh * sh / 2.0,
        sh * sh / 2.0,
        sinh_minus_id(2.0 * x) / 4.0,
    ];
    let mn = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let mut out = [0.0; 4];
    for (slot, (&(m, n), exact)) in out.iter_mut().zip(mn.iter().zip(exact)) {
        let mut acc = CompensatedSum::new();
        for j in 0..=n_terms {
            for k in 0..=n_terms {
                acc.add(gamma(j, k, m, n, x));
            }
        }
        *slot = (acc.value() - exact).abs();
    }
    Ok(out)
}

/// Attempt times and species on sites `-reach..=reach`, as used to test
/// whether a main event occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct EventWindow {
    reach: usize,
    times: Vec<f64>,
    species: Vec<Species>,
}

impl EventWindow {
    /// `times[i]` and `species[i]` belong to site `i - reach`.
    pub fn new(times: Vec<f64>, species: Vec<Species>) -> Result<Self> {
        if times.len() != species.len() || times.len() % 2 == 0 {
            return Err(Error::InvalidConfig(
                "event window needs an odd number of sites with one species each".into(),
            ));
        }
        if times.iter().any(|t| t.is_nan()) {
            return Err(Error::InvalidConfig("attempt times must not be NaN".into()));
        }
        Ok(Self {
            reach: times.len() / 2,
            times,
            species,
        })
    }

    pub fn reach(&self) -> usize {
        self.reach
    }

    fn time(&self, site: isize) -> f64 {
        self.times[(site + self.reach as isize) as usize]
    }

    fn species(&self, site: isize) -> Species {
        self.species[(site + self.reach as isize) as usize]
    }

    /// Chain event `C+_m` (direction `+1`) or `C-_m` (direction `-1`).
    fn chain(&self, m: usize, direction: isize, t: f64) -> bool {
        debug_assert!(m >= 1);
        let last = m - 1;
        if self.time(0) >= t {
            return false;
        }
        for i in 0..=last {
            let expected = if i % 2 == 0 || (m % 2 == 0 && i == last) {
                Species::A
            } else {
                Species::B
            };
            if self.species(direction * i as isize) != expected {
                return false;
            }
            if i > 0 && self.time(direction * i as isize) >= self.time(direction * (i as isize - 1))
            {
                return false;
            }
        }
        if m % 2 == 1 {
            let end = direction * last as isize;
            return self.time(end) < self.time(direction * m as isize);
        }
        true
    }

    /// Whether the main event occurred by time `t`. The window must reach
    /// at least `idx.reach()` sites in both directions.
    pub fn occurs(&self, idx: &EventIndex, t: f64) -> Result<bool> {
        if idx.reach() > self.reach {
            return Err(Error::InvalidConfig(format!(
                "event {idx:?} needs reach {}, window has {}",
                idx.reach(),
                self.reach
            )));
        }
        let (left, right) = idx.parity.chain_lengths(idx.j, idx.k);
        Ok(self.chain(left, -1, t) && self.chain(right, 1, t))
    }

    /// Draws uniform attempt times and species with `P(A) = alpha`.
    pub fn sample<R: Rng>(rng: &mut R, reach: usize, alpha: f64) -> Self {
        let n = 2 * reach + 1;
        let mut times = Vec::with_capacity(n);
        let mut species = Vec::with_capacity(n);
        for _ in 0..n {
            times.push(rng.random::<f64>());
            species.push(if rng.random::<f64>() < alpha {
                Species::A
            } else {
                Species::B
            });
        }
        Self {
            reach,
            times,
            species,
        }
    }
}

/// Monte Carlo relative frequency of one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    pub hits: u64,
    pub trials: u64,
    pub frequency: f64,
    /// `sqrt(f (1 - f) / trials)` with the observed frequency `f`.
    pub std_error: f64,
}

const TRIALS_PER_BATCH: u64 = 1 << 16;

/// Estimates the probabilities of several main events from `trials`
/// independent windows. Every trial is scored against every event.
pub fn event_frequencies(
    events: &[EventIndex],
    params: &ModelParams,
    trials: u64,
    seed: u64,
) -> Result<Vec<FrequencyEstimate>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    let reach = events.iter().map(EventIndex::reach).max().unwrap_or(1);
    let (alpha, t) = (params.alpha(), params.t());
    let batches = trials.div_ceil(TRIALS_PER_BATCH);
    let zero = || vec![0u64; events.len()];
    let hits = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = rng::stream(seed, batch);
            let count = TRIALS_PER_BATCH.min(trials - batch * TRIALS_PER_BATCH);
            let mut hits = zero();
            for _ in 0..count {
                let window = EventWindow::sample(&mut rng, reach, alpha);
                for (h, e) in hits.iter_mut().zip(events) {
                    let (left, right) = e.parity.chain_lengths(e.j, e.k);
                    if window.chain(left, -1, t) && window.chain(right, 1, t) {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .reduce(zero, |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        });
    Ok(hits
        .into_iter()
        .map(|h| {
            let f = h as f64 / trials as f64;
            FrequencyEstimate {
                hits: h,
                trials,
                frequency: f,
                std_error: (f * (1.0 - f) / trials as f64).sqrt(),
            }
        })
        .collect())
}
