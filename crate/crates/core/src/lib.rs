//! Spectral numerics for parabolic Littlewood–Paley estimates.
//!
//! The crate is organised around a periodic space grid and the kernels
//! `p(t,s,·) = F⁻¹ exp(∫ₛᵗ ψ(r,ξ) dr)` generated by time-dependent symbols:
//!
//! * [`symbols`]: fractional, polynomial-form and Lévy-type symbols with
//!   piecewise-constant time dependence, plus ellipticity certificates.
//! * [`spectral`]: grids, fields, the transform pair, kernel multipliers and
//!   the `PLSF` binary field format.
//! * [`squarefn`]: the parabolic square function, space-time `L_p` norms and
//!   the empirical ratio reports.
//! * [`assumptions`]: exponent bookkeeping in exact rational arithmetic, kernel
//!   envelopes, moment integrals and the `L_2` kernel constant.
//! * [`maximal`]: discrete Hardy–Littlewood maximal functions and the
//!   parabolic sharp function.
//! * [`spde`]: Monte Carlo stochastic convolutions driven by a counter-based
//!   Gaussian stream.

pub mod assumptions;
pub mod maximal;
pub mod spde;
pub mod spectral;
pub mod squarefn;
pub mod symbols;

pub use num_complex::Complex64;
pub use num_rational::Rational64;
