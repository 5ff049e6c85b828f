//! Exact site densities of the one-attempt AB adsorption process.
//!
//! For a type-A probability `alpha` (and `beta = 1 - alpha`) the A density at
//! time `t` is
//!
//! ```text
//! rho_A(t; alpha) = 1/(4 theta) [ 2 theta + (theta^2 - 1) 2 gamma t
//!                                 + (theta^2 + 1) sinh(2 gamma t)
//!                                 - 2 theta cosh(2 gamma t) ]
//! ```
//!
//! with `gamma = sqrt(alpha beta)` and `theta = sqrt(alpha / beta)`. The same
//! quantity is the integral of `(sqrt(theta) cosh u - sinh(u) / sqrt(theta))^2`
//! over `u` in `[0, gamma t]`; [`integral_rho_a`] evaluates that integral by
//! quadrature and serves as an independent check. B densities follow from
//! `rho_B(t; alpha) = rho_A(t; 1 - alpha)`.

use crate::error::{check_open_unit, check_unit, Error, Result};
use crate::numeric::{self, sinh_minus_id, sinhc, CompensatedSum, Quadrature};

/// Below this distance from 0 or 1 the `theta`-form is replaced by the
/// `alpha t - D` form, which has no `1/theta` prefactor.
pub const ENDPOINT_BAND: f64 = 1e-6;

/// Integrand evaluations allowed to [`integral_rho_a`].
pub const QUADRATURE_BUDGET: usize = 1_000_000;

/// Smallest absolute tolerance accepted by [`integral_rho_a`].
pub const MIN_QUADRATURE_TOL: f64 = 1e-14;

const ROOT_TOL: f64 = 1e-12;
const ROOT_MAX_ITER: usize = 200;

/// Deposition probability of species A and the observation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    alpha: f64,
    t: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, t: f64) -> Result<Self> {
        Ok(Self {
            alpha: check_unit("alpha", alpha)?,
            t: check_unit("t", t)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// The same time with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: 1.0 - self.alpha,
            t: self.t,
        }
    }

    /// `gamma` and `theta`; only defined for `alpha` strictly inside (0, 1).
    pub fn derived(&self) -> Result<DerivedParams> {
        DerivedParams::from_alpha(self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// `sqrt(alpha (1 - alpha))`
    pub gamma: f64,
    /// `sqrt(alpha / (1 - alpha))`
    pub theta: f64,
}

impl DerivedParams {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        let alpha = check_open_unit("alpha", alpha)?;
        let beta = 1.0 - alpha;
        Ok(Self {
            gamma: (alpha * beta).sqrt(),
            theta: (alpha / beta).sqrt(),
        })
    }
}

/// Densities of A-occupied, B-occupied and empty sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTriple {
    pub rho_a: f64,
    pub rho_b: f64,
    pub rho_x: f64,
}

impl DensityTriple {
    pub fn sum(&self) -> f64 {
        self.rho_a + self.rho_b + self.rho_x
    }
}

/// `rho_A(t; alpha)`.
///
/// The endpoints are exact (`0` at `alpha = 0`, `t` at `alpha = 1`). Within
/// [`ENDPOINT_BAND`] of either endpoint the result is computed as
/// `alpha t - (sinh^2(x) - t (sinhc(2x) - 1) / 2)` with `x = gamma t`; elsewhere
/// the `theta`-form is used with its cosh/sinh terms regrouped so that nothing
/// cancels for small `gamma t`. The value is clamped into `[0, alpha t]` to
/// absorb last-ulp rounding.
pub fn closed_form_rho_a(params: &ModelParams) -> f64 {
    let alpha = params.alpha;
    let t = params.t;
    if alpha == 0.0 || t == 0.0 {
        return 0.0;
    }
    if alpha == 1.0 {
        return t;
    }
    let raw = if !(ENDPOINT_BAND..=1.0 - ENDPOINT_BAND).contains(&alpha) {
        endpoint_form(alpha, t)
    } else {
        theta_form(alpha, t)
    };
    raw.clamp(0.0, alpha * t)
}

/// `[-4 theta sinh^2(y/2) + theta^2 (y + sinh y) + (sinh y - y)] / (4 theta)`, `y = 2 gamma t`.
fn theta_form(alpha: f64, t: f64) -> f64 {
    let beta = 1.0 - alpha;
    let gamma = (alpha * beta).sqrt();
    let theta = (alpha / beta).sqrt();
    let y = 2.0 * gamma * t;
    let half_sinh = (0.5 * y).sinh();
    let mut acc = CompensatedSum::new();
    acc.add(-4.0 * theta * half_sinh * half_sinh);
    acc.add(theta * theta * (y + y.sinh()));
    acc.add(sinh_minus_id(y));
    acc.value() / (4.0 * theta)
}

fn endpoint_form(alpha: f64, t: f64) -> f64 {
    let x = (alpha * (1.0 - alpha)).sqrt() * t;
    let sh = x.sinh();
    // sinhc(2x) - 1 = (sinh(2x) - 2x) / (2x)
    let excess = if x == 0.0 {
        0.0
    } else {
        sinh_minus_id(2.0 * x) / (2.0 * x)
    };
    alpha * t - (sh * sh - 0.5 * t * excess)
}

/// Full `(rho_A, rho_B, rho_X)` at the given parameters.
///
/// `rho_X` is clamped to zero only when rounding pushes it below zero by
/// at most `1e-12`; anything larger signals a defect and is returned as
/// [`Error::InconsistentDensities`].
pub fn density_triple(params: &ModelParams) -> Result<DensityTriple> {
    triple_from(
        closed_form_rho_a(params),
        closed_form_rho_a(&params.swapped()),
    )
}

pub(crate) fn triple_from(rho_a: f64, rho_b: f64) -> Result<DensityTriple> {
    let rest = 1.0 - rho_a - rho_b;
    if rest < -1e-12 {
        return Err(Error::InconsistentDensities(rest));
    }
    Ok(DensityTriple {
        rho_a,
        rho_b,
        rho_x: rest.clamp(0.0, 1.0),
    })
}

/// Quadrature of `(sqrt(theta) cosh u - sinh(u)/sqrt(theta))^2` over `[0, gamma t]`.
pub fn integral_rho_a(params: &ModelParams, abs_tol: f64) -> Result<Quadrature> {
    let DerivedParams { gamma, theta } = params.derived()?;
    if abs_tol.is_nan() || abs_tol < MIN_QUADRATURE_TOL {
        return Err(Error::OutOfRange {
            name: "abs_tol",
            value: abs_tol,
            range: "[1e-14, inf)",
        });
    }
    let root_theta = theta.sqrt();
    let integrand = |u: f64| {
        let v = root_theta * u.cosh() - u.sinh() / root_theta;
        v * v
    };
    numeric::integrate(integrand, 0.0, gamma * params.t, abs_tol, QUADRATURE_BUDGET)
}

/// Time derivative of `rho_A`: `gamma (sqrt(theta) cosh(gamma t) - sinh(gamma t)/sqrt(theta))^2`.
///
/// Evaluated as `alpha (cosh x - beta t sinhc x)^2`, `x = gamma t`, which is the
/// same expression with `gamma theta = alpha` and `x / theta = beta t`
/// substituted; this form is also valid at `alpha` in {0, 1}.
pub fn rho_a_rate(params: &ModelParams) -> f64 {
    let alpha = params.alpha;
    let beta = params.beta();
    let x = (alpha * beta).sqrt() * params.t;
    let v = x.cosh() - beta * params.t * sinhc(x);
    alpha * v * v
}

/// Taylor polynomial of `rho_A` about `t = 0`, truncated after `t^order`.
pub fn series_rho_a_small_t(params: &ModelParams, order: u32) -> Result<f64> {
    check_order(order)?;
    let a = params.alpha;
    let b = params.beta();
    let coefficients = [a, a * (a - 1.0), a * b / 3.0, -(a * a * b * b) / 3.0];
    Ok(horner_without_constant(
        &coefficients[..order as usize],
        params.t,
    ))
}

/// Expansion of `rho_A(1; alpha)` about `alpha = 0`, truncated after `alpha^order`.
pub fn series_rho_a_t1_small_alpha(alpha: f64, order: u32) -> Result<f64> {
    check_order(order)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "[0, 1)",
        });
    }
    let coefficients = [1.0 / 3.0, 2.0 / 5.0, 52.0 / 105.0, -88.0 / 567.0];
    Ok(horner_without_constant(
        &coefficients[..order as usize],
        alpha,
    ))
}

fn check_order(order: u32) -> Result<()> {
    if (1..=4).contains(&order) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "order",
            value: order as f64,
            range: "{1, 2, 3, 4}",
        })
    }
}

// c[0] z + c[1] z^2 + ...
fn horner_without_constant(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| (acc + ci) * z)
}

/// Time at which `rho_A(.; alpha)` reaches `lambda`, or `None` when the level
/// is above `rho_A(1; alpha)`.
pub fn contour_solve_t(alpha: f64, lambda: f64) -> Result<Option<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 1]",
        });
    }
    let lambda = check_open_unit("lambda", lambda)?;
    if alpha == 1.0 {
        return Ok(Some(lambda));
    }
    let level = |t: f64| closed_form_rho_a(&ModelParams { alpha, t }) - lambda;
    if level(1.0) < 0.0 {
        return Ok(None);
    }
    numeric::find_root(level, 0.0, 1.0, ROOT_TOL, ROOT_MAX_ITER).map(Some)
}
