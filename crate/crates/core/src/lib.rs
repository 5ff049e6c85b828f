//! One-dimensional AB random sequential adsorption with one deposition
//! attempt per site.
//!
//! Every site of a line draws an attempt time uniform in `[0, 1]` and a
//! species (A with probability `alpha`, B otherwise). At its attempt time a
//! site is occupied by its species unless a nearest neighbour already holds
//! the opposite species; blocked sites stay empty. The crate provides several
//! independent routes to the site densities:
//!
//! * [`analytic`] : the exact density `rho_A(t; alpha)`, its integral form,
//!   time derivative, series expansions and level-set solver.
//! * [`events`] : the decomposition of "site 0 is A" into disjoint chain
//!   events, their probabilities, the truncated double sum with a rigorous
//!   tail bound, and a Monte Carlo check of the event probabilities.
//! * [`simulator`] : direct, reproducible simulation on finite lattices.
//! * [`oracle`] : exact enumeration on lattices of up to 12 sites.
//! * [`verify`] : a cross-check suite tying the routes together.
//!
//! ```
//! use ab_rsa::analytic::{closed_form_rho_a, ModelParams};
//!
//! let p = ModelParams::new(0.5, 1.0).unwrap();
//! let expected = 0.5 * (1.0 - (-1.0f64).exp());
//! assert!((closed_form_rho_a(&p) - expected).abs() < 1e-15);
//! ```

pub mod analytic;
pub mod error;
pub mod events;
pub mod lattice;
pub mod numeric;
pub mod oracle;
pub mod rng;
pub mod simulator;
pub mod verify;

pub use analytic::{DensityTriple, DerivedParams, ModelParams};
pub use error::{Error, Result};
pub use lattice::{Boundary, SiteState, Species};
