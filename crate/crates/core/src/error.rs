use alloc::string::String;

use num_complex::Complex64;

use crate::grating::Medium;
use crate::lattice::AnomalyReport;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{function}: argument {x} is outside the function's domain")]
    Domain { function: &'static str, x: f64 },

    #[error("order {order} at argument {x} is outside the supported evaluation envelope")]
    Range { order: i64, x: f64 },

    #[error("invalid {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error(
        "unsupported regime: eps_r*mu_r = {eps_mu} does not exceed cos^2(theta_i) = {cos2}; \
         the interior wavenumber would be imaginary"
    )]
    UnsupportedRegime { eps_mu: f64, cos2: f64 },

    #[error(
        "Rayleigh anomaly: krd(1+sin psi)/2pi is {plus:.3e} and krd(1-sin psi)/2pi is {minus:.3e} \
         from an integer (guard band {guard:.1e})",
        plus = .0.plus_branch, minus = .0.minus_branch, guard = .0.guard_band
    )]
    Anomaly(AnomalyReport),

    #[error(
        "lattice sum of order {order} did not converge within {terms} terms \
         (estimated error {est_error:.3e}, best estimate {best})"
    )]
    NonConvergence {
        order: i32,
        best: Complex64,
        est_error: f64,
        terms: usize,
    },

    #[error("resonance: the {medium:?} coefficient denominator vanishes at order {order}")]
    Resonance { order: i32, medium: Medium },

    #[error("elimination of n = 0 is ill-posed: 1 + a_0 J_0 vanishes for the {medium:?} equations")]
    EliminationSingular { medium: Medium },

    #[error("{what} is numerically singular at column {column} (pivot growth {pivot_growth:.3e})")]
    Singular {
        what: &'static str,
        column: usize,
        pivot_growth: f64,
    },

    #[error("lattice table covers |n| <= {available}, but order {required} is needed")]
    TableCoverage { available: usize, required: usize },

    #[error("field point at R = {r} is outside the exterior expansion region: {reason}")]
    FieldDomain { r: f64, reason: &'static str },
}

/// Coarse classification used by front-ends to map errors onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Anomaly,
    Unsupported,
    Singular,
    NonConvergence,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig { .. } | Error::TableCoverage { .. } | Error::FieldDomain { .. } => {
                ErrorKind::Config
            }
            Error::Anomaly(_) => ErrorKind::Anomaly,
            Error::Domain { .. } | Error::Range { .. } | Error::UnsupportedRegime { .. } => {
                ErrorKind::Unsupported
            }
            Error::Resonance { .. } | Error::EliminationSingular { .. } | Error::Singular { .. } => {
                ErrorKind::Singular
            }
            Error::NonConvergence { .. } => ErrorKind::NonConvergence,
        }
    }
}
