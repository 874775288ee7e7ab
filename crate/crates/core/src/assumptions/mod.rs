//! Checks of the structural assumptions on a symbol: the decay constant of
//! the semigroup, the exponent bookkeeping of the kernel estimates and the
//! weighted moments of the kernel envelopes.

mod constant;
mod envelopes;
mod exponents;

use num_rational::Rational64;
use thiserror::Error;

use crate::spectral::SpectralError;
use crate::symbols::SymbolError;

pub use constant::{decay_integral, radial_samples, verify_assumption1, Assumption1Report, ConstantSample};
pub use envelopes::{
    doubling_cutoffs, moment_integral, rescaled_exponent, synthesize_envelope_batch, synthesize_envelopes,
    EnvelopeFamily, MomentReport, MOMENT_TOLERANCE,
};
pub use exponents::{
    admissible_sup, derive_c3_delta0, mu_admissible, mu_admissible_exact, rational_from_f64, solve_mu, solve_row,
    theorem_exponents, theta, KernelExponents, RowSolution, RowStatus, ThetaIdentities,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssumptionError {
    #[error("c2 = {0} must exceed 1/2")]
    C2TooSmall(Rational64),
    #[error("unsupported dimension {0}")]
    Dimension(usize),
    #[error("parameter must be positive")]
    NonPositive,
    #[error("inconsistent exponents: {0}")]
    Inconsistent(String),
    #[error("{0} is not a rational with small denominator")]
    NotRational(f64),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("invalid time interval [{s}, {t}]")]
    Interval { s: f64, t: f64 },
    #[error("moment integral: {0}")]
    Moment(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}
