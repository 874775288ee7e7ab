use rayon::prelude::*;

use super::AssumptionError;
use crate::symbols::Symbol;

/// One sample of `|ξ|^{2η} ∫ₛ^∞ exp(2 Re ∫ₛᵗ ψ(r,ξ) dr) dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantSample {
    pub s: f64,
    pub xi: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assumption1Report {
    pub eta: f64,
    /// Supremum over all samples.
    pub c0: f64,
    pub samples: Vec<ConstantSample>,
}

/// `∫ₛ^∞ exp(2 Re ∫ₛᵗ ψ(r,ξ) dr) dt`.
///
/// `Re ψ(·, ξ)` is constant on each coefficient piece, so the inner integral
/// is piecewise linear in `t` and every piece integrates in closed form. The
/// last piece runs to infinity and must have a negative rate.
pub fn decay_integral(sym: &Symbol, s: f64, xi: &[f64]) -> Result<f64, AssumptionError> {
    let bps = sym.breakpoints();
    let first = bps.partition_point(|&b| b <= s).saturating_sub(1);
    let mut exponent = 0.0_f64;
    let mut total = 0.0;
    let mut lo = s;
    for idx in first..bps.len() {
        let rate = 2.0 * sym.eval_unchecked(bps[idx], xi).re;
        let hi = bps.get(idx + 1).copied().unwrap_or(f64::INFINITY);
        if hi.is_infinite() {
            if !(rate < 0.0) {
                return Err(AssumptionError::Divergent(format!(
                    "Re psi = {} at xi = {xi:?} does not decay",
                    rate / 2.0
                )));
            }
            total += exponent.exp() / (-rate);
            break;
        }
        let len = hi - lo;
        if len > 0.0 {
            // e^{E}(e^{r·len} − 1)/r, computed without cancellation
            let piece = if rate == 0.0 {
                len
            } else {
                (rate * len).exp_m1() / rate
            };
            total += exponent.exp() * piece;
            exponent += rate * len;
        }
        lo = hi.max(lo);
    }
    Ok(total)
}

/// Samples `|ξ|^{2η} ∫ₛ^∞ |exp(∫ₛᵗ ψ)|² dt` on `xi_samples × s_samples` and
/// returns its supremum. `ξ = 0` contributes zero when `η > 0`.
pub fn verify_assumption1(
    sym: &Symbol,
    eta: f64,
    xi_samples: &[Vec<f64>],
    s_samples: &[f64],
) -> Result<Assumption1Report, AssumptionError> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(AssumptionError::NonPositive);
    }
    if xi_samples.is_empty() || s_samples.is_empty() {
        return Err(AssumptionError::Inconsistent("empty sample set".into()));
    }
    for xi in xi_samples {
        sym.eval(0.0, xi)?;
    }
    if s_samples.iter().any(|s| !s.is_finite()) {
        return Err(AssumptionError::Interval { s: f64::NAN, t: f64::INFINITY });
    }
    let pairs: Vec<(f64, &Vec<f64>)> = s_samples
        .iter()
        .flat_map(|&s| xi_samples.iter().map(move |xi| (s, xi)))
        .collect();
    let samples = pairs
        .par_iter()
        .map(|&(s, xi)| {
            let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let value = if norm == 0.0 && eta > 0.0 {
                0.0
            } else {
                norm.powf(2.0 * eta) * decay_integral(sym, s, xi)?
            };
            Ok(ConstantSample { s, xi: xi.clone(), value })
        })
        .collect::<Result<Vec<_>, AssumptionError>>()?;
    let c0 = samples.iter().map(|c| c.value).fold(0.0, f64::max);
    Ok(Assumption1Report { eta, c0, samples })
}

/// Radial sample set `r·e` for `r` log-spaced in `[r_min, r_max]` and
/// directions `e` on the unit sphere of dimension `d ≤ 2`.
pub fn radial_samples(d: usize, r_min: f64, r_max: f64, radii: usize, directions: usize) -> Vec<Vec<f64>> {
    let dirs: Vec<Vec<f64>> = match d {
        1 => vec![vec![1.0], vec![-1.0]],
        _ => (0..directions.max(1))
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / directions.max(1) as f64;
                let mut v = vec![0.0; d];
                v[0] = th.cos();
                v[1] = th.sin();
                v
            })
            .collect(),
    };
    let radii = radii.max(2);
    let mut out = Vec::with_capacity(radii * dirs.len());
    for k in 0..radii {
        let r = r_min * (r_max / r_min).powf(k as f64 / (radii - 1) as f64);
        for e in &dirs {
            out.push(e.iter().map(|v| v * r).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{FractionalSymbol, PiecewiseConstant};
    use num_complex::Complex64;

    /// Composite Simpson on each coefficient piece, truncated at `s + horizon`.
    fn quadrature_oracle(sym: &Symbol, s: f64, xi: &[f64], horizon: f64) -> f64 {
        let mut edges = vec![s];
        edges.extend(sym.breakpoints().into_iter().filter(|&b| b > s));
        edges.push(s + horizon);
        let g = |t: f64| (2.0 * sym.time_integral(s, t, xi).unwrap().re).exp();
        let steps = 20_000;
        let mut total = 0.0;
        for w in edges.windows(2) {
            let h = (w[1] - w[0]) / steps as f64;
            let mut sum = g(w[0]) + g(w[1]);
            for k in 1..steps {
                sum += if k % 2 == 1 { 4.0 } else { 2.0 } * g(w[0] + k as f64 * h);
            }
            total += sum * h / 3.0;
        }
        total
    }

    #[test]
    fn stationary_symbols_give_half_over_nu() {
        let xis = radial_samples(1, 0.05, 20.0, 30, 1);
        for gamma in [0.5, 1.0, 2.0, 4.0] {
            let sym: Symbol = FractionalSymbol::constant(gamma, 1.0).unwrap().into();
            let rep = verify_assumption1(&sym, gamma / 2.0, &xis, &[0.0, 3.0]).unwrap();
            assert!((rep.c0 - 0.5).abs() < 1e-12, "gamma {gamma}: {}", rep.c0);
            let sym: Symbol = FractionalSymbol::constant(gamma, 2.5).unwrap().into();
            let rep = verify_assumption1(&sym, gamma / 2.0, &xis, &[0.0]).unwrap();
            assert!((rep.c0 - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn piecewise_coefficient_matches_quadrature() {
        let a = PiecewiseConstant::new(
            vec![0.0, 0.4, 1.1],
            vec![Complex64::new(1.0, 0.3), Complex64::new(3.0, -1.0), Complex64::new(0.5, 0.0)],
        )
        .unwrap();
        let sym: Symbol = FractionalSymbol::new(2.0, a, 0.25).unwrap().into();
        for (s, xi) in [(0.0, 1.3), (0.2, 0.7), (0.9, 2.0), (-1.0, 1.0)] {
            let exact = decay_integral(&sym, s, &[xi]).unwrap();
            let quad = quadrature_oracle(&sym, s, &[xi], 80.0);
            assert!((exact - quad).abs() < 1e-8 * exact, "{s} {xi}: {exact} vs {quad}");
        }
    }

    #[test]
    fn zero_frequency_and_divergence() {
        let sym = Symbol::heat();
        let rep = verify_assumption1(&sym, 1.0, &[vec![0.0, 0.0], vec![1.0, 0.0]], &[0.0]).unwrap();
        assert_eq!(rep.samples[0].value, 0.0);
        assert!(matches!(
            verify_assumption1(&sym, 0.0, &[vec![0.0, 0.0]], &[0.0]),
            Err(AssumptionError::Divergent(_))
        ));
        assert!(verify_assumption1(&sym, -1.0, &[vec![1.0, 0.0]], &[0.0]).is_err());
        assert!(verify_assumption1(&sym, 1.0, &[vec![f64::NAN]], &[0.0]).is_err());
    }
}
