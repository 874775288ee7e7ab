//! Periodic grids, the discrete transform pair and kernel multipliers.
//!
//! The transform follows `f̂(ξ) = ∫ e^{-ix·ξ} f(x) dx`, discretised as
//! `f̂(ξ_j) = h^d Σ_x e^{-ix·ξ_j} f(x)` with inverse
//! `f(x) = L^{-d} Σ_j e^{ix·ξ_j} f̂(ξ_j)`, so the grid Parseval identity reads
//! `h^d Σ|f|² = L^{-d} Σ|f̂|²`.

mod field;
mod grid;
mod kernel;
pub mod plsf;

use thiserror::Error;

use crate::symbols::SymbolError;

pub use field::{xi_norm, Domain, Field, RealSpaceTime, SpaceTimeField};
pub(crate) use field::{forward_in_place, inverse_in_place};
pub(crate) use kernel::eta_weights;
pub use grid::{SpaceGrid, MAX_DIM};
pub use kernel::{
    aliasing_budget, apply_multiplier, convolve_slice, fractional_derivative, kernel_hat,
    synthesize_kernel, warn_if_aliased, KernelMultiplier, SymbolOnGrid, ALIASING_BUDGET,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value")]
    NonFinite,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field must be in the {expected:?} domain")]
    WrongDomain { expected: Domain },
    #[error("negative derivative order {0}")]
    NegativeOrder(f64),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}
