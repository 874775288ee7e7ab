//! Time-dependent symbols `ψ(t,ξ)` of the operators `A(t)`.
//!
//! Three families are supported, all with piecewise-constant time
//! dependence so that `∫ₛᵗ ψ(r,ξ) dr` is an exact finite sum:
//!
//! * [`FractionalSymbol`]: `ψ = -a(t)|ξ|^γ`;
//! * [`PolyFormSymbol`]: `ψ = -Σ a^{αβ}(t) ξ^{α+β}` with `|α| = |β| = m`;
//! * [`LevySymbol`]: `ψ = -c₁|ξ|^{2k} ∫_{S} |(w,ξ)|^γ [1 - iφ^{(γ)}(w,ξ)] m(t,w) S₁(dw)`.

mod coeff;
mod ellipticity;
mod levy;

use num_complex::Complex64;
use thiserror::Error;

pub use coeff::PiecewiseConstant;
pub(crate) use coeff::segment_overlaps;
pub use ellipticity::{check_ellipticity, DerivativeBound, EllipticityReport};
pub use levy::{example_densities, LevySymbol, Psi7Report, SphereQuadrature};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("invalid symbol: {0}")]
    Invalid(String),
    #[error("non-finite input")]
    NonFinite,
    #[error("time interval reversed: s = {s} > t = {t}")]
    ReversedInterval { s: f64, t: f64 },
    #[error("frequency has dimension {got}, symbol expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cancellation check requires gamma = 1, got {0}")]
    NotCritical(f64),
}

/// `ψ(t,ξ) = -a(t)|ξ|^γ`, the symbol of `-a(t)(-Δ)^{γ/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalSymbol {
    gamma: f64,
    a: PiecewiseConstant,
    nu: f64,
}

impl FractionalSymbol {
    /// Requires `γ > 0` and `ν < Re a < 1/ν` on every piece.
    pub fn new(gamma: f64, a: PiecewiseConstant, nu: f64) -> Result<Self, SymbolError> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(SymbolError::Invalid(format!("gamma = {gamma} must be positive")));
        }
        if !(nu.is_finite() && nu > 0.0 && nu < 1.0) {
            return Err(SymbolError::Invalid(format!("nu = {nu} must lie in (0, 1)")));
        }
        for v in a.values() {
            if !(nu < v.re && v.re < nu.recip()) {
                return Err(SymbolError::Invalid(format!(
                    "coefficient {v} violates {nu} < Re a < {}",
                    nu.recip()
                )));
            }
        }
        Ok(Self { gamma, a, nu })
    }

    /// Time-independent `-c|ξ|^γ`; `ν` is chosen just inside the admissible range.
    pub fn constant(gamma: f64, c: f64) -> Result<Self, SymbolError> {
        let nu = 0.5 * c.min(c.recip()).min(1.0);
        Self::new(gamma, PiecewiseConstant::real_constant(c), nu)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn coefficient(&self) -> &PiecewiseConstant {
        &self.a
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// One term `a^{αβ}(t) ξ^{α+β}` of a polynomial-form symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyTerm {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub coeff: PiecewiseConstant,
}

/// `ψ(t,ξ) = -Σ_{|α|=|β|=m} a^{αβ}(t) ξ^{α+β}`, the symbol of the `2m`-order
/// operator `(-1)^{m-1} Σ a^{αβ}(t) D^{α+β}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFormSymbol {
    d: usize,
    m: u32,
    terms: Vec<PolyTerm>,
    nu: f64,
}

impl PolyFormSymbol {
    /// Validates multi-index orders and samples the form ellipticity
    /// `ν|ξ|^{2m} ≤ Σ ξ^α ξ^β Re a^{αβ} ≤ ν⁻¹|ξ|^{2m}` on unit vectors at every
    /// coefficient breakpoint.
    pub fn new(d: usize, m: u32, terms: Vec<PolyTerm>, nu: f64) -> Result<Self, SymbolError> {
        if d == 0 || d > 3 {
            return Err(SymbolError::Invalid(format!("dimension {d} unsupported")));
        }
        if m == 0 {
            return Err(SymbolError::Invalid("half-order m must be positive".into()));
        }
        if !(nu.is_finite() && nu > 0.0 && nu <= 1.0) {
            return Err(SymbolError::Invalid(format!("nu = {nu} must lie in (0, 1]")));
        }
        if terms.is_empty() {
            return Err(SymbolError::Invalid("no terms".into()));
        }
        for term in &terms {
            if term.alpha.len() != d || term.beta.len() != d {
                return Err(SymbolError::Invalid("multi-index length differs from d".into()));
            }
            if term.alpha.iter().sum::<u32>() != m || term.beta.iter().sum::<u32>() != m {
                return Err(SymbolError::Invalid(format!(
                    "multi-indices must have order {m}"
                )));
            }
        }
        let sym = Self { d, m, terms, nu };
        let times = sym.breakpoints();
        for &t in &times {
            for w in unit_samples(d) {
                let form: f64 = sym
                    .terms
                    .iter()
                    .map(|term| term.coeff.value_at(t).re * monomial(&w, &term.alpha, &term.beta))
                    .sum();
                // slack for the equality cases (e.g. ν = 1, ψ = -|ξ|^{2m})
                let tol = 1e-12;
                if form < nu - tol || form > nu.recip() + tol {
                    return Err(SymbolError::Invalid(format!(
                        "form ellipticity fails at t = {t}: value {form}"
                    )));
                }
            }
        }
        Ok(sym)
    }

    /// `-(Σ_i ξ_i²)^m` written out as a polynomial form with unit coefficients,
    /// optionally scaled by a time-dependent coefficient.
    pub fn polyharmonic(d: usize, m: u32, coeff: PiecewiseConstant, nu: f64) -> Result<Self, SymbolError> {
        // |ξ|^{2m} = (Σ ξ_i²)^m = Σ_{|α|=m} (m!/α!) ξ^{2α}; use α = β terms.
        let mut terms = Vec::new();
        for alpha in multi_indices(d, m) {
            let multinomial = factorial(m) / alpha.iter().map(|&a| factorial(a)).product::<f64>();
            let values = coeff.values().iter().map(|v| v * multinomial).collect();
            terms.push(PolyTerm {
                alpha: alpha.clone(),
                beta: alpha,
                coeff: PiecewiseConstant::new(coeff.breakpoints().to_vec(), values)?,
            });
        }
        Self::new(d, m, terms, nu)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn terms(&self) -> &[PolyTerm] {
        &self.terms
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    fn breakpoints(&self) -> Vec<f64> {
        merge_breakpoints(self.terms.iter().map(|t| t.coeff.breakpoints()))
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// All multi-indices in `d` variables of total order `m`.
pub(crate) fn multi_indices(d: usize, m: u32) -> Vec<Vec<u32>> {
    if d == 1 {
        return vec![vec![m]];
    }
    let mut out = Vec::new();
    for first in (0..=m).rev() {
        for mut rest in multi_indices(d - 1, m - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn monomial(xi: &[f64], alpha: &[u32], beta: &[u32]) -> f64 {
    xi.iter()
        .zip(alpha.iter().zip(beta))
        .map(|(x, (a, b))| x.powi((a + b) as i32))
        .product()
}

/// Deterministic unit-vector samples used for sampled ellipticity checks.
pub(crate) fn unit_samples(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..64)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / 64.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci sphere
            let count = 128;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
    }
}

fn merge_breakpoints<'a>(lists: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut all: Vec<f64> = lists.flat_map(|l| l.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// A symbol from one of the three supported families.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    Fractional(FractionalSymbol),
    PolyForm(PolyFormSymbol),
    Levy(LevySymbol),
}

impl From<FractionalSymbol> for Symbol {
    fn from(s: FractionalSymbol) -> Self {
        Symbol::Fractional(s)
    }
}

impl From<PolyFormSymbol> for Symbol {
    fn from(s: PolyFormSymbol) -> Self {
        Symbol::PolyForm(s)
    }
}

impl From<LevySymbol> for Symbol {
    fn from(s: LevySymbol) -> Self {
        Symbol::Levy(s)
    }
}

impl Symbol {
    /// Heat symbol `-|ξ|²`.
    pub fn heat() -> Self {
        FractionalSymbol::constant(2.0, 1.0)
            .expect("valid heat symbol")
            .into()
    }

    pub fn family(&self) -> &'static str {
        match self {
            Symbol::Fractional(_) => "fractional",
            Symbol::PolyForm(_) => "polyform",
            Symbol::Levy(_) => "levy",
        }
    }

    /// Order γ of the symbol: `γ`, `2m` or `2k + γ`.
    pub fn order(&self) -> f64 {
        match self {
            Symbol::Fractional(s) => s.gamma,
            Symbol::PolyForm(s) => 2.0 * s.m as f64,
            Symbol::Levy(s) => s.order(),
        }
    }

    /// Ellipticity parameter the symbol was built with.
    pub fn nu(&self) -> f64 {
        match self {
            Symbol::Fractional(s) => s.nu,
            Symbol::PolyForm(s) => s.nu,
            Symbol::Levy(s) => s.n0().min(1.0),
        }
    }

    /// Spatial dimension fixed by the symbol, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Symbol::Fractional(_) => None,
            Symbol::PolyForm(s) => Some(s.d),
            Symbol::Levy(s) => Some(s.dim()),
        }
    }

    /// Sorted union of all coefficient breakpoints; `ψ(·,ξ)` is constant on
    /// `[b_i, b_{i+1})`, on `(-∞, b_1)` and on `[b_last, ∞)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Symbol::Fractional(s) => s.a.breakpoints().to_vec(),
            Symbol::PolyForm(s) => s.breakpoints(),
            Symbol::Levy(s) => s.breakpoints().to_vec(),
        }
    }

    pub fn is_time_independent(&self) -> bool {
        match self {
            Symbol::Fractional(s) => s.a.is_constant(),
            Symbol::PolyForm(s) => s.terms.iter().all(|t| t.coeff.is_constant()),
            Symbol::Levy(s) => s.is_time_independent(),
        }
    }

    fn check_xi(&self, xi: &[f64]) -> Result<(), SymbolError> {
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(SymbolError::NonFinite);
        }
        if let Some(d) = self.dim() {
            if xi.len() != d {
                return Err(SymbolError::DimensionMismatch {
                    expected: d,
                    got: xi.len(),
                });
            }
        }
        if xi.is_empty() {
            return Err(SymbolError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(())
    }

    /// `ψ(t, ξ)`; `t` outside the breakpoint range is clamped to the end pieces.
    pub fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64, SymbolError> {
        if !t.is_finite() {
            return Err(SymbolError::NonFinite);
        }
        self.check_xi(xi)?;
        Ok(self.eval_unchecked(t, xi))
    }

    pub(crate) fn eval_unchecked(&self, t: f64, xi: &[f64]) -> Complex64 {
        match self {
            Symbol::Fractional(s) => {
                let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                -s.a.value_at(t) * norm.powf(s.gamma)
            }
            Symbol::PolyForm(s) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for term in &s.terms {
                    acc += term.coeff.value_at(t) * monomial(xi, &term.alpha, &term.beta);
                }
                -acc
            }
            Symbol::Levy(s) => s.eval_unchecked(t, xi),
        }
    }

    /// Exact `∫ₛᵗ ψ(r, ξ) dr` as a sum over constant pieces.
    pub fn time_integral(&self, s: f64, t: f64, xi: &[f64]) -> Result<Complex64, SymbolError> {
        if !(s.is_finite() && t.is_finite()) {
            return Err(SymbolError::NonFinite);
        }
        if s > t {
            return Err(SymbolError::ReversedInterval { s, t });
        }
        self.check_xi(xi)?;
        Ok(self.time_integral_unchecked(s, t, xi))
    }

    pub(crate) fn time_integral_unchecked(&self, s: f64, t: f64, xi: &[f64]) -> Complex64 {
        let bps = self.breakpoints();
        let mut acc = Complex64::new(0.0, 0.0);
        for (len, idx) in segment_overlaps(&bps, s, t) {
            acc += self.eval_unchecked(bps[idx], xi) * len;
        }
        acc
    }
}
