//! Direct simulation of the one-attempt AB deposition process on finite lattices.
//!
//! Every site draws an attempt time uniform on `[0, 1)` and a species (A with
//! probability `alpha`). Sites are then visited once, in increasing attempt
//! time, and deposit their species unless a neighbour already holds the
//! opposite species. A blocked site stays empty for good.
//!
//! Each site is packed into one `u64` sort key:
//!
//! ```text
//! | attempt time (time_bits) | site index (index_bits) | species (1 bit) |
//! ```
//!
//! so a single `sort_unstable` orders attempts by time with ties broken by
//! ascending site index, and the run needs 9 bytes per site (key + state).
//! The time field has `min(53, 63 - index_bits)` bits, which keeps the
//! conversion to `f64` exact.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::analytic::DensityTriple;
use crate::error::{Error, Result};
use crate::lattice::{Boundary, SiteState, Species};
use crate::numeric::CompensatedSum;
use crate::rng;

/// Largest lattice the key layout supports.
pub const MAX_SITES: usize = 1 << 40;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConfig {
    pub n_sites: usize,
    pub boundary: Boundary,
    pub alpha: f64,
    /// Strictly ascending times in `[0, 1]` at which states are recorded.
    pub sample_times: Vec<f64>,
    pub master_seed: u64,
    pub replicas: u64,
}

impl LatticeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_sites == 0 || self.n_sites > MAX_SITES {
            return bad(format!("n_sites = {} must be in [1, 2^40]", self.n_sites));
        }
        if self.boundary == Boundary::Periodic && self.n_sites < 3 {
            return bad(format!(
                "a periodic lattice needs at least 3 sites, got {}",
                self.n_sites
            ));
        }
        crate::error::check_unit("alpha", self.alpha)?;
        if self.sample_times.is_empty() {
            return bad("sample_times is empty".into());
        }
        for &tau in &self.sample_times {
            crate::error::check_unit("sample time", tau)?;
        }
        if self.sample_times.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample_times must be strictly ascending".into());
        }
        if self.replicas == 0 {
            return bad("replicas must be positive".into());
        }
        Ok(())
    }
}

/// One realisation of the process.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeRun {
    pub boundary: Boundary,
    pub sample_times: Vec<f64>,
    pub attempt_times: Vec<f64>,
    pub chosen_types: Vec<Species>,
    /// `site_states[i][s]` is the state of site `s` at `sample_times[i]`.
    pub site_states: Vec<Vec<SiteState>>,
}

/// Lattice-averaged densities at one sample time, over all replicas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub time: f64,
    pub mean: DensityTriple,
    /// Across-replica sample standard deviation over `sqrt(replicas)`;
    /// zero for a single replica.
    pub std_error: DensityTriple,
    pub replicas: u64,
    pub n_sites: usize,
    /// Sites that entered the average (fewer than `n_sites` with a margin).
    pub sites_counted: usize,
}

/// Occupation probabilities of one site at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteOccupation {
    pub site: usize,
    pub probability: DensityTriple,
    pub std_error: DensityTriple,
}

#[derive(Debug, Clone, Copy)]
struct KeyLayout {
    index_bits: u32,
    time_bits: u32,
}

impl KeyLayout {
    fn for_sites(n: usize) -> Self {
        let index_bits = (usize::BITS - (n.max(2) - 1).leading_zeros()).max(1);
        let time_bits = (63 - index_bits).min(53);
        Self {
            index_bits,
            time_bits,
        }
    }

    fn shift(&self) -> u32 {
        self.index_bits + 1
    }

    fn make(&self, raw: u64, site: usize, species: Species) -> u64 {
        let time = raw >> (64 - self.time_bits);
        (time << self.shift()) | ((site as u64) << 1) | (species == Species::B) as u64
    }

    fn time(&self, key: u64) -> f64 {
        (key >> self.shift()) as f64 / (1u64 << self.time_bits) as f64
    }

    fn site(&self, key: u64) -> usize {
        ((key >> 1) & ((1u64 << self.index_bits) - 1)) as usize
    }

    fn species(key: u64) -> Species {
        if key & 1 == 1 {
            Species::B
        } else {
            Species::A
        }
    }
}

/// Reusable per-thread buffers.
struct Workspace {
    keys: Vec<u64>,
    state: Vec<u8>,
}

impl Workspace {
    fn new() -> Self {
        Self {
            keys: Vec::new(),
            state: Vec::new(),
        }
    }

    /// Draws the replica's attempts and sorts them into processing order.
    fn draw(&mut self, config: &LatticeConfig, layout: &KeyLayout, replica: u64) {
        let mut rng = rng::stream(config.master_seed, replica);
        let n = config.n_sites;
        self.keys.clear();
        self.keys.reserve(n);
        for site in 0..n {
            let raw = rng.next_u64();
            let species = if rng.random::<f64>() < config.alpha {
                Species::A
            } else {
                Species::B
            };
            self.keys.push(layout.make(raw, site, species));
        }
        self.keys.sort_unstable();
        self.state.clear();
        self.state.resize(n, SiteState::X as u8);
    }

    /// Replays the sorted attempts, calling `record(sample_index, state)` for
    /// each sample time once every attempt at or before it has been applied.
    fn deposit<F: FnMut(usize, &[u8], u64, u64)>(
        &mut self,
        config: &LatticeConfig,
        layout: &KeyLayout,
        counted: std::ops::Range<usize>,
        mut record: F,
    ) {
        let n = config.n_sites;
        let samples = &config.sample_times;
        let mut next_sample = 0;
        let (mut n_a, mut n_b) = (0u64, 0u64);
        for &key in &self.keys {
            let time = layout.time(key);
            while next_sample < samples.len() && samples[next_sample] < time {
                record(next_sample, &self.state, n_a, n_b);
                next_sample += 1;
            }
            if next_sample == samples.len() {
                return;
            }
            let site = layout.site(key);
            let mine = SiteState::occupied_by(KeyLayout::species(key));
            let blocked = config
                .boundary
                .neighbors(site, n)
                .into_iter()
                .flatten()
                .any(|nb| SiteState::from_u8(self.state[nb]).conflicts_with(mine));
            if !blocked {
                self.state[site] = mine as u8;
                if counted.contains(&site) {
                    match mine {
                        SiteState::A => n_a += 1,
                        _ => n_b += 1,
                    }
                }
            }
        }
        for i in next_sample..samples.len() {
            record(i, &self.state, n_a, n_b);
        }
    }
}

/// One replica of the process, with full per-site detail.
///
/// The run is a deterministic function of `(config, replica_index)`.
pub fn run_once(config: &LatticeConfig, replica_index: u64) -> Result<LatticeRun> {
    config.validate()?;
    let layout = KeyLayout::for_sites(config.n_sites);
    let mut ws = Workspace::new();
    ws.draw(config, &layout, replica_index);
    let n = config.n_sites;
    let mut attempt_times = vec![0.0; n];
    let mut chosen_types = vec![Species::A; n];
    for &key in &ws.keys {
        let site = layout.site(key);
        attempt_times[site] = layout.time(key);
        chosen_types[site] = KeyLayout::species(key);
    }
    let mut site_states = Vec::with_capacity(config.sample_times.len());
    ws.deposit(config, &layout, 0..n, |_, state, _, _| {
        site_states.push(state.iter().map(|&v| SiteState::from_u8(v)).collect());
    });
    Ok(LatticeRun {
        boundary: config.boundary,
        sample_times: config.sample_times.clone(),
        attempt_times,
        chosen_types,
        site_states,
    })
}

/// Runs the deposition rule on given attempt times and species.
///
/// Attempts are applied in increasing time, ties by ascending site index; a
/// site whose attempt time equals a sample time counts as attempted by then.
pub fn replay(
    attempt_times: &[f64],
    chosen_types: &[Species],
    boundary: Boundary,
    sample_times: &[f64],
) -> Result<Vec<Vec<SiteState>>> {
    let n = attempt_times.len();
    if chosen_types.len() != n {
        return Err(Error::InvalidConfig(
            "attempt_times and chosen_types differ in length".into(),
        ));
    }
    if boundary == Boundary::Periodic && n < 3 {
        return Err(Error::InvalidConfig(
            "a periodic lattice needs at least 3 sites".into(),
        ));
    }
    if attempt_times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidConfig("attempt times must be finite".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        attempt_times[a]
            .total_cmp(&attempt_times[b])
            .then(a.cmp(&b))
    });
    let mut state = vec![SiteState::X; n];
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next = 0;
    for &tau in sample_times {
        while next < n && attempt_times[order[next]] <= tau {
            let site = order[next];
            let mine = SiteState::occupied_by(chosen_types[site]);
            let blocked = boundary
                .neighbors(site, n)
                .into_iter()
                .flatten()
                .any(|nb| state[nb].conflicts_with(mine));
            if !blocked {
                state[site] = mine;
            }
            next += 1;
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// True when no A site neighbours a B site at any recorded time.
pub fn check_adjacency(run: &LatticeRun) -> bool {
    run.site_states
        .iter()
        .all(|states| states_are_admissible(states, run.boundary))
}

/// True when no A site neighbours a B site in `states`.
pub fn states_are_admissible(states: &[SiteState], boundary: Boundary) -> bool {
    let n = states.len();
    (0..n).all(|s| match boundary.neighbors(s, n)[1] {
        Some(right) => !states[s].conflicts_with(states[right]),
        None => true,
    })
}

/// Lattice-averaged densities at every sample time.
///
/// Replicas run in parallel; per-replica results are combined in replica
/// order, so the estimate is bit-identical for any thread count.
pub fn estimate_density(config: &LatticeConfig) -> Result<Vec<DensityEstimate>> {
    estimate_bulk_density(config, 0)
}

/// Like [`estimate_density`], but only sites at distance at least `margin`
/// from both ends enter the average (useful on free paths).
pub fn estimate_bulk_density(
    config: &LatticeConfig,
    margin: usize,
) -> Result<Vec<DensityEstimate>> {
    config.validate()?;
    let n = config.n_sites;
    if 2 * margin >= n {
        return Err(Error::InvalidConfig(format!(
            "margin {margin} leaves no sites on a lattice of {n}"
        )));
    }
    let counted = margin..n - margin;
    let sites_counted = counted.len();
    let layout = KeyLayout::for_sites(n);
    let samples = config.sample_times.len();
    let per_replica: Vec<Vec<(u64, u64)>> = (0..config.replicas)
        .into_par_iter()
        .map_init(Workspace::new, |ws, replica| {
            ws.draw(config, &layout, replica);
            let mut counts = vec![(0, 0); samples];
            ws.deposit(config, &layout, counted.clone(), |i, _, a, b| {
                counts[i] = (a, b)
            });
            counts
        })
        .collect();

    let r = config.replicas as f64;
    let norm = sites_counted as f64;
    Ok((0..samples)
        .map(|i| {
            let fractions: Vec<[f64; 3]> = per_replica
                .iter()
                .map(|c| {
                    let (a, b) = c[i];
                    let x = sites_counted as u64 - a - b;
                    [a as f64 / norm, b as f64 / norm, x as f64 / norm]
                })
                .collect();
            let mut mean = [0.0; 3];
            let mut err = [0.0; 3];
            for c in 0..3 {
                let m = fractions
                    .iter()
                    .map(|f| f[c])
                    .collect::<CompensatedSum>()
                    .value()
                    / r;
                mean[c] = m;
                if config.replicas > 1 {
                    let ss = fractions
                        .iter()
                        .map(|f| (f[c] - m) * (f[c] - m))
                        .collect::<CompensatedSum>()
                        .value();
                    err[c] = (ss / (r - 1.0)).sqrt() / r.sqrt();
                }
            }
            DensityEstimate {
                time: config.sample_times[i],
                mean: DensityTriple {
                    rho_a: mean[0],
                    rho_b: mean[1],
                    rho_x: mean[2],
                },
                std_error: DensityTriple {
                    rho_a: err[0],
                    rho_b: err[1],
                    rho_x: err[2],
                },
                replicas: config.replicas,
                n_sites: n,
                sites_counted,
            }
        })
        .collect())
}

const REPLICAS_PER_CHUNK: u64 = 4096;

/// Per-site occupation frequencies across replicas, indexed `[sample][site]`.
///
/// Meant for small lattices with many replicas; counts are integers, so the
/// result is independent of scheduling.
pub fn estimate_site_occupation(config: &LatticeConfig) -> Result<Vec<Vec<SiteOccupation>>> {
    config.validate()?;
    let n = config.n_sites;
    let samples = config.sample_times.len();
    let layout = KeyLayout::for_sites(n);
    let chunks = config.replicas.div_ceil(REPLICAS_PER_CHUNK);
    let zero = || vec![[0u64; 2]; samples * n];
    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut ws = Workspace::new();
            let mut counts = zero();
            let start = chunk * REPLICAS_PER_CHUNK;
            let end = (start + REPLICAS_PER_CHUNK).min(config.replicas);
            for replica in start..end {
                ws.draw(config, &layout, replica);
                ws.deposit(config, &layout, 0..n, |i, state, _, _| {
                    for (site, &v) in state.iter().enumerate() {
                        match SiteState::from_u8(v) {
                            SiteState::A => counts[i * n + site][0] += 1,
                            SiteState::B => counts[i * n + site][1] += 1,
                            SiteState::X => {}
                        }
                    }
                });
            }
            counts
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x[0] += y[0];
                x[1] += y[1];
            }
            a
        });

    let r = config.replicas;
    let rf = r as f64;
    let se = |p: f64| {
        if r > 1 {
            (p * (1.0 - p) / (rf - 1.0)).sqrt()
        } else {
            0.0
        }
    };
    Ok((0..samples)
        .map(|i| {
            (0..n)
                .map(|site| {
                    let [a, b] = counts[i * n + site];
                    let pa = a as f64 / rf;
                    let pb = b as f64 / rf;
                    let px = (r - a - b) as f64 / rf;
                    SiteOccupation {
                        site,
                        probability: DensityTriple {
                            rho_a: pa,
                            rho_b: pb,
                            rho_x: px,
                        },
                        std_error: DensityTriple {
                            rho_a: se(pa),
                            rho_b: se(pb),
                            rho_x: se(px),
                        },
                    }
                })
                .collect()
        })
        .collect())
}
