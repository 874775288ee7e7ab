use num_rational::Rational64;
use num_traits::{Signed, Zero};

use super::AssumptionError;

fn r(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn half() -> Rational64 {
    Rational64::new(1, 2)
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only if it reproduces `x` to `1e-12` relative accuracy.
pub fn rational_from_f64(x: f64, max_den: i64) -> Result<Rational64, AssumptionError> {
    if !x.is_finite() || x.abs() > 1e9 {
        return Err(AssumptionError::NotRational(x));
    }
    // continued-fraction convergents
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        let ai = a as i64;
        let h2 = ai.checked_mul(h1).and_then(|v| v.checked_add(h0));
        let k2 = ai.checked_mul(k1).and_then(|v| v.checked_add(k0));
        let (Some(h2), Some(k2)) = (h2, k2) else { break };
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Ok(Rational64::new(h1, k1));
        }
        let frac = rest - a;
        if frac == 0.0 {
            break;
        }
        rest = frac.recip();
    }
    Err(AssumptionError::NotRational(x))
}

/// `c₃ = (2(d+1)(c₂+1)+3) / (2(d+2))` and `δ₀ = c₂ - c₃ + 1`.
pub fn derive_c3_delta0(c2: Rational64, d: usize) -> Result<(Rational64, Rational64), AssumptionError> {
    if c2 <= half() {
        return Err(AssumptionError::C2TooSmall(c2));
    }
    if d == 0 {
        return Err(AssumptionError::Dimension(d));
    }
    let d = r(d as i64);
    let c3 = (r(2) * (d + r(1)) * (c2 + r(1)) + r(3)) / (r(2) * (d + r(2)));
    let delta0 = c2 - c3 + r(1);
    Ok((c3, delta0))
}

/// `Θ(θ, ϑ) = θd - 2ϑ`.
pub fn theta(th: Rational64, vth: Rational64, d: usize) -> Rational64 {
    th * r(d as i64) - r(2) * vth
}

/// The admissibility predicate on `μ` with both parity branches:
/// `2⌊μ/4⌋+1 ≤ ⌊d/2⌋+2` when `μ/2 - 2⌊μ/4⌋ ∈ [0,1)` and
/// `2⌊μ/4⌋+2 ≤ ⌊d/2⌋+2` when it lies in `[1,2)`.
pub fn mu_admissible(mu: f64, d: usize) -> bool {
    if !(mu.is_finite() && mu > 0.0) {
        return false;
    }
    let q = (mu / 4.0).floor();
    let frac = mu / 2.0 - 2.0 * q;
    let bound = (d / 2 + 2) as f64;
    if frac < 1.0 {
        2.0 * q + 1.0 <= bound
    } else {
        2.0 * q + 2.0 <= bound
    }
}

/// Exact version of [`mu_admissible`].
pub fn mu_admissible_exact(mu: Rational64, d: usize) -> bool {
    if mu <= Rational64::zero() {
        return false;
    }
    let q = (mu / r(4)).floor();
    let frac = mu / r(2) - r(2) * q;
    let bound = r((d / 2 + 2) as i64);
    if frac < r(1) {
        r(2) * q + r(1) <= bound
    } else {
        r(2) * q + r(2) <= bound
    }
}

/// Supremum of the admissible set: the predicate reduces to
/// `⌊μ/2⌋ + 1 ≤ ⌊d/2⌋ + 2`, i.e. `μ < 2(⌊d/2⌋ + 2)`.
pub fn admissible_sup(d: usize) -> Rational64 {
    r(2 * (d as i64 / 2 + 2))
}

/// Outcome of one row `(δ₀ - κ)μ = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub enum RowStatus {
    /// Unique solution.
    Solved,
    /// Zero coefficient with zero right-hand side; `μ` chosen from its window.
    Free,
    /// Zero coefficient with a nonzero right-hand side.
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowSolution {
    pub status: RowStatus,
    pub mu: Option<Rational64>,
    /// `μ > d + 2` and admissible (for free rows also inside the window).
    pub valid: bool,
    pub diagnostic: Option<String>,
}

/// Solves a single diagonal row; `window_upper` is the upper end of the
/// moment window used when the row is free.
pub fn solve_row(coef: Rational64, rhs: Rational64, d: usize, window_upper: Option<Rational64>) -> RowSolution {
    let lower = r(d as i64 + 2);
    if coef.is_zero() {
        if !rhs.is_zero() {
            return RowSolution {
                status: RowStatus::Inconsistent,
                mu: None,
                valid: false,
                diagnostic: Some(format!("zero coefficient but right-hand side {rhs}")),
            };
        }
        let mut upper = admissible_sup(d);
        if let Some(w) = window_upper {
            upper = upper.min(w);
        }
        if upper <= lower {
            return RowSolution {
                status: RowStatus::Free,
                mu: None,
                valid: false,
                diagnostic: Some(format!("empty window ({lower}, {upper})")),
            };
        }
        let mu = (lower + upper) / r(2);
        let valid = mu_admissible_exact(mu, d);
        return RowSolution {
            status: RowStatus::Free,
            mu: Some(mu),
            valid,
            diagnostic: (!valid).then(|| format!("midpoint {mu} not admissible")),
        };
    }
    let mu = rhs / coef;
    let mut problems = Vec::new();
    if mu <= lower {
        problems.push(format!("mu = {mu} does not exceed d + 2 = {lower}"));
    }
    if !mu_admissible_exact(mu, d) {
        problems.push(format!("mu = {mu} violates the admissibility parity condition"));
    }
    RowSolution {
        status: RowStatus::Solved,
        mu: Some(mu),
        valid: problems.is_empty(),
        diagnostic: (!problems.is_empty()).then(|| problems.join("; ")),
    }
}

/// Exponent tuple `(c₂, c₃, δ₀, κᵢ, σᵢ, μᵢ)` with validity bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelExponents {
    pub d: usize,
    pub c2: Rational64,
    pub c3: Rational64,
    pub delta0: Rational64,
    pub kappa: [Rational64; 3],
    pub sigma: [Rational64; 3],
    /// Upper ends of the moment windows `(d+2, ·)`, when known.
    pub windows: [Option<Rational64>; 3],
    pub rows: Option<[RowSolution; 3]>,
}

impl KernelExponents {
    pub fn new(d: usize, c2: Rational64, kappa: [Rational64; 3], sigma: [Rational64; 3]) -> Result<Self, AssumptionError> {
        let (c3, delta0) = derive_c3_delta0(c2, d)?;
        if kappa.iter().chain(sigma.iter()).any(|v| !v.is_positive()) {
            return Err(AssumptionError::NonPositive);
        }
        Ok(Self {
            d,
            c2,
            c3,
            delta0,
            kappa,
            sigma,
            windows: [None; 3],
            rows: None,
        })
    }

    /// Diagonal coefficients `δ₀ - κᵢ`.
    pub fn coefficients(&self) -> [Rational64; 3] {
        self.kappa.map(|k| self.delta0 - k)
    }

    /// Right-hand side in `Θ` form.
    pub fn rhs(&self) -> [Rational64; 3] {
        let d = self.d;
        let (k, s, d0) = (self.kappa, self.sigma, self.delta0);
        [
            theta(k[0] + d0, s[0] - d0, d) + r(1),
            theta(k[1] - d0, s[1] - self.c2, d),
            theta(k[2] - d0, s[2] - self.c3, d),
        ]
    }

    /// Right-hand side written out as in the original system.
    pub fn rhs_expanded(&self) -> [Rational64; 3] {
        let d = r(self.d as i64);
        let (k, s, c2, c3) = (self.kappa, self.sigma, self.c2, self.c3);
        [
            d * (k[0] + c2 - c3 + r(1)) + r(2) * (c2 - c3 - s[0]) + r(3),
            d * (k[1] - c2 + c3 - r(1)) + r(2) * (c2 - s[1]),
            d * (k[2] - c2 + c3 - r(1)) + r(2) * (c3 - s[2]),
        ]
    }

    pub fn mu(&self) -> [Option<Rational64>; 3] {
        match &self.rows {
            Some(rows) => [rows[0].mu, rows[1].mu, rows[2].mu],
            None => [None; 3],
        }
    }

    /// Every row solved or free with a valid `μ`.
    pub fn valid(&self) -> bool {
        self.rows.as_ref().is_some_and(|rows| rows.iter().all(|r| r.valid))
            && self.delta0.is_positive()
            && self.c2 > half()
    }

    /// `-2σ₁ + κ₁(μ₁ + d) > -1`, if `μ₁` is set.
    pub fn theta1range1(&self) -> Option<bool> {
        let mu1 = self.mu()[0]?;
        Some(-r(2) * self.sigma[0] + self.kappa[0] * (mu1 + r(self.d as i64)) > -r(1))
    }
}

pub fn solve_mu(ke: &KernelExponents) -> KernelExponents {
    let coef = ke.coefficients();
    let rhs = ke.rhs();
    let rows = [0, 1, 2].map(|i| solve_row(coef[i], rhs[i], ke.d, ke.windows[i]));
    KernelExponents {
        rows: Some(rows),
        ..ke.clone()
    }
}

/// The five closing identities, evaluated exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaIdentities {
    /// `Θ(κ₁+δ₀, σ₁-δ₀) + 1`, expected 0.
    pub row1: Rational64,
    /// `Θ(κ₂-δ₀, σ₂-c₂)`, expected 0.
    pub row2: Rational64,
    /// `Θ(κ₃-δ₀, σ₃-c₃)`, expected 0.
    pub row3: Rational64,
    /// `Θ(2δ₀, c₃-δ₀)`, expected -3.
    pub theta_c3: Rational64,
    /// `Θ(2δ₀, c₂-δ₀)`, expected `-2δ₀-1`.
    pub theta_c2: Rational64,
    pub delta0: Rational64,
}

impl ThetaIdentities {
    pub fn of(ke: &KernelExponents) -> Self {
        let rhs = ke.rhs();
        let d0 = ke.delta0;
        Self {
            row1: rhs[0],
            row2: rhs[1],
            row3: rhs[2],
            theta_c3: theta(r(2) * d0, ke.c3 - d0, ke.d),
            theta_c2: theta(r(2) * d0, ke.c2 - d0, ke.d),
            delta0: d0,
        }
    }

    pub fn all_hold(&self) -> bool {
        self.row1.is_zero()
            && self.row2.is_zero()
            && self.row3.is_zero()
            && self.theta_c3 == r(-3)
            && self.theta_c2 == -r(2) * self.delta0 - r(1)
    }
}

/// Exponents of the order-`γ` kernels:
/// `κᵢ = 1/γ`, `σ₁ = (d+1)/γ + 1/2`, `c₂ = σ₂ = (d+2)/γ + 1/2`,
/// `c₃ = σ₃ = (d+1)/γ + 3/2`, with `μ` chosen inside the windows
/// `(d+2, γ+d+2)`, `(d+2, γ+d+4)`, `(d+2, 3γ+d+2)`.
pub fn theorem_exponents(gamma: Rational64, d: usize) -> Result<KernelExponents, AssumptionError> {
    if !gamma.is_positive() {
        return Err(AssumptionError::NonPositive);
    }
    let dd = r(d as i64);
    let inv = gamma.recip();
    let kappa = [inv; 3];
    let c2 = (dd + r(2)) * inv + half();
    let sigma = [(dd + r(1)) * inv + half(), c2, (dd + r(1)) * inv + Rational64::new(3, 2)];
    let mut ke = KernelExponents::new(d, c2, kappa, sigma)?;
    if ke.c3 != sigma[2] {
        return Err(AssumptionError::Inconsistent(format!(
            "c3 = {} differs from sigma3 = {}",
            ke.c3, sigma[2]
        )));
    }
    ke.windows = [
        Some(gamma + dd + r(2)),
        Some(gamma + dd + r(4)),
        Some(r(3) * gamma + dd + r(2)),
    ];
    Ok(solve_mu(&ke))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn c3_and_delta0_examples() {
        let (c3, d0) = derive_c3_delta0(r(1), 1).unwrap();
        assert_eq!(c3, q(11, 6));
        assert_eq!(d0, q(1, 6));
        for (c2, d) in [(q(3, 4), 1), (q(7, 3), 2), (q(51, 100), 5), (r(4), 3)] {
            let (_, d0) = derive_c3_delta0(c2, d).unwrap();
            assert_eq!(d0, (r(2) * c2 - r(1)) / (r(2) * r(d as i64 + 2)));
        }
        let (_, tiny) = derive_c3_delta0(q(1_000_001, 2_000_000), 1).unwrap();
        assert!(tiny.is_positive() && tiny < q(1, 1_000_000));
        assert!(derive_c3_delta0(half(), 1).is_err());
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(r(0), r(0), 3), r(0));
        let (c3, d0) = derive_c3_delta0(r(1), 1).unwrap();
        assert_eq!(theta(r(2) * d0, c3 - d0, 1), r(-3));
        assert_eq!(theta(r(2) * d0, r(1) - d0, 1), -r(2) * d0 - r(1));
    }

    #[test]
    fn admissibility_examples() {
        assert!(mu_admissible(3.2, 1));
        assert!(!mu_admissible(8.0, 1));
        assert!(mu_admissible(8.0, 10));
        for d in 1..12 {
            let sup = admissible_sup(d);
            for k in 1..200 {
                let mu = q(k, 8);
                assert_eq!(mu_admissible_exact(mu, d), mu < sup, "d = {d}, mu = {mu}");
                let muf = k as f64 / 8.0;
                assert_eq!(mu_admissible(muf, d), mu_admissible_exact(mu, d));
            }
        }
    }

    #[test]
    fn synthetic_rows() {
        let row = solve_row(q(1, 2), r(2), 1, None);
        assert_eq!(row.mu, Some(r(4)));
        assert_eq!(row.status, RowStatus::Solved);
        // d + 2 = 3 < 4 but 4 is outside the admissible set for d = 1
        assert!(!row.valid);
        let row = solve_row(q(1, 2), r(2), 2, None);
        assert!(!row.valid, "d + 2 = 4 is not exceeded");
        let row = solve_row(r(0), r(1), 1, None);
        assert_eq!(row.status, RowStatus::Inconsistent);
        assert!(!row.valid);
        let row = solve_row(r(0), r(0), 1, Some(r(5)));
        assert_eq!(row.status, RowStatus::Free);
        assert_eq!(row.mu, Some(q(7, 2)));
        assert!(row.valid);
    }

    #[test]
    fn exponents_instantiate_for_sample_orders() {
        let ke = theorem_exponents(r(2), 1).unwrap();
        assert_eq!((ke.c2, ke.c3, ke.delta0), (r(2), q(5, 2), half()));
        let mus = ke.mu();
        assert_eq!(mus[0], Some(q(7, 2)));
        for gamma in [q(1, 2), r(1), r(2), r(4)] {
            for d in [1, 2, 3, 6] {
                let ke = theorem_exponents(gamma, d).unwrap();
                assert_eq!(ke.delta0, gamma.recip());
                assert!(ke.c2 > half());
                let ids = ThetaIdentities::of(&ke);
                assert!(ids.all_hold(), "{ids:?}");
                assert_eq!(ke.rhs(), ke.rhs_expanded());
                let rows = ke.rows.as_ref().unwrap();
                assert!(rows.iter().all(|row| row.status == RowStatus::Free));
                assert!(ke.valid());
                assert_eq!(ke.theta1range1(), Some(true));
            }
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(rational_from_f64(0.5, 1000).unwrap(), half());
        assert_eq!(rational_from_f64(4.0, 1000).unwrap(), r(4));
        assert_eq!(rational_from_f64(1.0 / 3.0, 1000).unwrap(), q(1, 3));
        assert_eq!(rational_from_f64(1.75, 1000).unwrap(), q(7, 4));
        assert!(rational_from_f64(std::f64::consts::PI, 1000).is_err());
        assert!(rational_from_f64(f64::NAN, 1000).is_err());
    }
}
