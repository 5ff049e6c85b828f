use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument fell outside its admissible range.
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Exact enumeration refused because the lattice is too large.
    #[error("{what} of {requested} exceeds the enumeration cap of {cap}")]
    SizeCap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error(
        "quadrature did not converge within {evaluations} integrand evaluations \
         (estimate {estimate}, error estimate {error_estimate})"
    )]
    QuadratureBudget {
        evaluations: usize,
        estimate: f64,
        error_estimate: f64,
    },

    #[error("root finding did not reach tolerance after {iterations} iterations")]
    RootIterations { iterations: usize },

    /// 1 - rho_A - rho_B came out meaningfully negative.
    #[error("densities are inconsistent: 1 - rho_A - rho_B = {0}")]
    InconsistentDensities(f64),
}

impl Error {
    /// True for errors caused by the caller's arguments rather than a numerical engine.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::OutOfRange { .. } | Error::InvalidConfig(_) | Error::SizeCap { .. }
        )
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "(0, 1)",
        })
    }
}
