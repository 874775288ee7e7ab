use super::{multi_indices, Symbol, SymbolError};

/// Relative step of the central differences, `h = STEP·|ξ|`.
const STEP: f64 = 1e-3;
/// Slack absorbing finite-difference rounding in the bound comparisons.
const FD_SLACK: f64 = 1e-6;

/// Observed `sup |D^αψ(t,ξ)|·|ξ|^{|α|-γ}` for one multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeBound {
    pub alpha: Vec<u32>,
    pub sup_ratio: f64,
}

/// Sampled certificate for `Re ψ ≤ -ν|ξ|^γ` and `|D^αψ| ≤ ν⁻¹|ξ|^{γ-|α|}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticityReport {
    pub nu_requested: f64,
    /// Largest ν for which the real-part bound holds on every sample.
    pub nu_observed: f64,
    pub derivative_bounds: Vec<DerivativeBound>,
    pub real_part_pass: bool,
    pub derivative_pass: bool,
    pub pass: bool,
}

impl EllipticityReport {
    pub fn max_derivative_ratio(&self) -> f64 {
        self.derivative_bounds
            .iter()
            .map(|b| b.sup_ratio)
            .fold(0.0, f64::max)
    }
}

/// Samples both ellipticity conditions; derivatives of order up to
/// `⌊d/2⌋ + 2` are estimated by nested central differences.
pub fn check_ellipticity(
    sym: &Symbol,
    nu: f64,
    xi_samples: &[Vec<f64>],
    t_samples: &[f64],
) -> Result<EllipticityReport, SymbolError> {
    if xi_samples.is_empty() || t_samples.is_empty() {
        return Err(SymbolError::Invalid("sample sets must be nonempty".into()));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(SymbolError::Invalid(format!("nu = {nu} must be positive")));
    }
    let d = xi_samples[0].len();
    for xi in xi_samples {
        if xi.len() != d {
            return Err(SymbolError::DimensionMismatch {
                expected: d,
                got: xi.len(),
            });
        }
        if xi.iter().all(|&v| v == 0.0) {
            return Err(SymbolError::Invalid("ξ = 0 is not an admissible sample".into()));
        }
    }
    for &t in t_samples {
        if !t.is_finite() {
            return Err(SymbolError::NonFinite);
        }
    }
    let gamma = sym.order();
    let max_order = (d / 2 + 2) as u32;
    let alphas: Vec<Vec<u32>> = (0..=max_order).flat_map(|k| multi_indices(d, k)).collect();

    let mut nu_observed = f64::INFINITY;
    let mut sups = vec![0.0f64; alphas.len()];
    for &t in t_samples {
        for xi in xi_samples {
            let psi = sym.eval(t, xi)?;
            let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            nu_observed = nu_observed.min(-psi.re / norm.powf(gamma));
            let h = STEP * norm;
            for (alpha, sup) in alphas.iter().zip(sups.iter_mut()) {
                let order: u32 = alpha.iter().sum();
                let deriv = central_difference(sym, t, xi, alpha, h);
                let ratio = deriv * norm.powf(order as f64 - gamma);
                *sup = sup.max(ratio);
            }
        }
    }
    let derivative_bounds: Vec<DerivativeBound> = alphas
        .into_iter()
        .zip(sups)
        .map(|(alpha, sup_ratio)| DerivativeBound { alpha, sup_ratio })
        .collect();
    let real_part_pass = nu_observed >= nu * (1.0 - FD_SLACK);
    let derivative_pass = derivative_bounds
        .iter()
        .all(|b| b.sup_ratio.is_finite() && b.sup_ratio <= nu.recip() * (1.0 + FD_SLACK));
    Ok(EllipticityReport {
        nu_requested: nu,
        nu_observed,
        derivative_bounds,
        real_part_pass,
        derivative_pass,
        pass: real_part_pass && derivative_pass,
    })
}

/// `|D^α ψ(t, ξ)|` by a tensor product of central difference stencils.
fn central_difference(
    sym: &Symbol,
    t: f64,
    xi: &[f64],
    alpha: &[u32],
    h: f64,
) -> f64 {
    let d = xi.len();
    // stencil per axis: offsets (k/2 - i)·h with weights (-1)^i C(k, i)
    let stencils: Vec<Vec<(f64, f64)>> = alpha
        .iter()
        .map(|&k| {
            (0..=k)
                .map(|i| {
                    let offset = (k as f64 / 2.0 - i as f64) * h;
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    (offset, sign * binomial(k, i))
                })
                .collect()
        })
        .collect();
    let order: u32 = alpha.iter().sum();
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; d];
    let mut point = xi.to_vec();
    loop {
        let mut weight = 1.0;
        for axis in 0..d {
            let (off, w) = stencils[axis][idx[axis]];
            point[axis] = xi[axis] + off;
            weight *= w;
        }
        acc += sym.eval_unchecked(t, &point) * weight;
        // odometer over stencil indices
        let mut axis = 0;
        loop {
            if axis == d {
                return acc.norm() / h.powi(order as i32);
            }
            idx[axis] += 1;
            if idx[axis] < stencils[axis].len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
