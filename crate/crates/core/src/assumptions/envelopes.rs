use num_complex::Complex64;
use rayon::prelude::*;

use super::AssumptionError;
use crate::spectral::{inverse_in_place, xi_norm, Domain, Field, SpaceGrid};
use crate::symbols::{segment_overlaps, Symbol};

/// Grid samples of the three kernel envelopes for one pair `s < t`.
#[derive(Clone, Debug)]
pub struct EnvelopeFamily {
    pub s: f64,
    pub t: f64,
    pub gamma: f64,
    pub f1: Field,
    pub f2: Field,
    pub f3: Field,
}

impl EnvelopeFamily {
    pub fn fields(&self) -> [&Field; 3] {
        [&self.f1, &self.f2, &self.f3]
    }
}

/// Rescaled exponent `M(t,s,ξ) = ∫ₛᵗ ψ(r, ξ(t-s)^{-1/γ}) dr`.
pub fn rescaled_exponent(sym: &Symbol, s: f64, t: f64, xi: &[f64]) -> Complex64 {
    let lambda = (t - s).powf(-sym.order().recip());
    let scaled: Vec<f64> = xi.iter().map(|v| v * lambda).collect();
    let bps = sym.breakpoints();
    let mut acc = Complex64::new(0.0, 0.0);
    for (len, idx) in segment_overlaps(&bps, s, t) {
        acc += sym.eval_unchecked(bps[idx], &scaled) * len;
    }
    acc
}

/// `F₁ = Σᵢ|F⁻¹(ξⁱ|ξ|^{γ/2}e^M)|`, `F₂ = Σᵢⱼ|F⁻¹(ξⁱξʲ|ξ|^{γ/2}e^M)|` and
/// `F₃ = Σᵢ|F⁻¹((t-s)ψ(t, ξ(t-s)^{-1/γ}) ξⁱ|ξ|^{γ/2}e^M)|` on the grid.
pub fn synthesize_envelopes(sym: &Symbol, grid: &SpaceGrid, s: f64, t: f64) -> Result<EnvelopeFamily, AssumptionError> {
    if !(s.is_finite() && t.is_finite() && s < t) {
        return Err(AssumptionError::Interval { s, t });
    }
    if let Some(d) = sym.dim() {
        if d != grid.dim() {
            return Err(AssumptionError::Dimension(grid.dim()));
        }
    }
    let d = grid.dim();
    let gamma = sym.order();
    let lambda = (t - s).powf(-gamma.recip());
    let len = grid.len();
    // base(ξ) = |ξ|^{γ/2} e^{M}, drift(ξ) = (t-s)ψ(t, λξ)
    let (base, drift): (Vec<Complex64>, Vec<Complex64>) = (0..len)
        .into_par_iter()
        .map(|j| {
            let xi = grid.frequency(j);
            let xi = &xi[..d];
            let norm = xi_norm(&grid.frequency(j), d);
            let m = rescaled_exponent(sym, s, t, xi);
            let scaled: Vec<f64> = xi.iter().map(|v| v * lambda).collect();
            let drift = sym.eval_unchecked(t, &scaled) * (t - s);
            (m.exp() * norm.powf(gamma / 2.0), drift)
        })
        .unzip();
    let freqs = grid.frequencies();

    let accumulate = |target: &mut [f64], weight: &dyn Fn(usize) -> Complex64| {
        let mut data: Vec<Complex64> = (0..len).map(weight).collect();
        inverse_in_place(grid, &mut data);
        for (a, v) in target.iter_mut().zip(&data) {
            *a += v.norm();
        }
    };
    let mut f1 = vec![0.0; len];
    let mut f2 = vec![0.0; len];
    let mut f3 = vec![0.0; len];
    for i in 0..d {
        accumulate(&mut f1, &|j| base[j] * freqs[j][i]);
        accumulate(&mut f3, &|j| drift[j] * base[j] * freqs[j][i]);
        for k in 0..d {
            accumulate(&mut f2, &|j| base[j] * (freqs[j][i] * freqs[j][k]));
        }
    }
    let to_field = |v: Vec<f64>| Field::from_real(grid, &v).map_err(AssumptionError::from);
    Ok(EnvelopeFamily {
        s,
        t,
        gamma,
        f1: to_field(f1)?,
        f2: to_field(f2)?,
        f3: to_field(f3)?,
    })
}

/// Envelopes for many `(s, t)` pairs in parallel.
pub fn synthesize_envelope_batch(
    sym: &Symbol,
    grid: &SpaceGrid,
    pairs: &[(f64, f64)],
) -> Result<Vec<EnvelopeFamily>, AssumptionError> {
    pairs
        .par_iter()
        .map(|&(s, t)| synthesize_envelopes(sym, grid, s, t))
        .collect()
}

/// Relative change below which a doubling of the outer cutoff counts as converged.
pub const MOMENT_TOLERANCE: f64 = 1e-6;

/// Partial moment integrals `∫_{inner<|x|≤R_k} |x|^μ |F|² dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub mu: f64,
    pub inner: f64,
    pub cutoffs: Vec<f64>,
    pub partials: Vec<f64>,
    /// Relative change over the last cutoff doubling.
    pub last_change: f64,
    pub converged: bool,
}

/// Outer cutoffs `R₀, 2R₀, 4R₀, …` up to the half-width of the grid.
pub fn doubling_cutoffs(r0: f64, grid: &SpaceGrid) -> Vec<f64> {
    let mut out = Vec::new();
    let half = 0.5 * grid.length();
    let mut r = r0;
    while r <= half * (1.0 + 1e-12) {
        out.push(r);
        r *= 2.0;
    }
    out
}

pub fn moment_integral(f: &Field, mu: f64, inner: f64, cutoffs: &[f64]) -> Result<MomentReport, AssumptionError> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(AssumptionError::Moment(format!("mu = {mu} must be positive")));
    }
    if f.domain() != Domain::Space {
        return Err(AssumptionError::Moment("envelope must be a space-side field".into()));
    }
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[0] >= w[1]) || !(inner >= 0.0) {
        return Err(AssumptionError::Moment("cutoffs must be nonempty and increasing".into()));
    }
    let grid = f.grid();
    let d = grid.dim();
    let dv = grid.cell_volume();
    let weights = f.norm_sq_pointwise();
    // bucket every node by the first cutoff that contains it
    let mut shells = vec![0.0; cutoffs.len()];
    for (j, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let x = grid.position(j);
        let r = xi_norm(&x, d);
        if r <= inner {
            continue;
        }
        let k = cutoffs.partition_point(|&c| c < r);
        if k < cutoffs.len() {
            shells[k] += dv * r.powf(mu) * w;
        }
    }
    let mut partials = Vec::with_capacity(cutoffs.len());
    let mut acc = 0.0;
    for s in shells {
        acc += s;
        partials.push(acc);
    }
    let last = *partials.last().expect("nonempty");
    let last_change = if partials.len() < 2 || last == 0.0 {
        0.0
    } else {
        (last - partials[partials.len() - 2]) / last
    };
    let converged = partials.len() >= 2 && last_change < MOMENT_TOLERANCE || last == 0.0;
    Ok(MomentReport {
        mu,
        inner,
        cutoffs: cutoffs.to_vec(),
        partials,
        last_change,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::FractionalSymbol;

    /// `(1/π)|∫₀^Ξ ξ² e^{-ξ²} sin(xξ) dξ|` by composite Simpson.
    fn f1_oracle(x: f64) -> f64 {
        let upper = 12.0;
        let steps = 24_000;
        let h = upper / steps as f64;
        let g = |xi: f64| xi * xi * (-xi * xi).exp() * (x * xi).sin();
        let mut sum = g(0.0) + g(upper);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * g(k as f64 * h);
        }
        (sum * h / 3.0 / std::f64::consts::PI).abs()
    }

    /// `|L⁻¹ Σⱼ ξⱼ|ξⱼ| e^{-ξⱼ²} e^{ixξⱼ}|`, the periodised continuum kernel.
    fn f1_discrete(x: f64, n: usize, length: f64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n as i64 {
            let k = if j < n as i64 / 2 { j } else { j - n as i64 };
            let xi = std::f64::consts::TAU * k as f64 / length;
            acc += Complex64::from_polar(xi * xi.abs() * (-xi * xi).exp(), x * xi);
        }
        acc.norm() / length
    }

    #[test]
    fn heat_f1_matches_direct_quadrature() {
        let grid = SpaceGrid::new(1, 4096, 128.0).unwrap();
        let env = synthesize_envelopes(&Symbol::heat(), &grid, 0.0, 0.3).unwrap();
        let h = grid.spacing();
        for x in [0.5, 1.0, 1.5, 2.25, 3.0, 4.0] {
            let j = ((x + 64.0) / h).round() as usize;
            let got = env.f1.values()[j].re;
            let exact = f1_discrete(x, 4096, 128.0);
            assert!((got - exact).abs() <= 1e-10 * exact, "x = {x}: {got} vs {exact}");
            // periodic images of a |x|^{-3} tail shift the value by about 1e-7
            let want = f1_oracle(x);
            assert!((got - want).abs() <= 1e-7, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn time_independent_envelopes_do_not_move() {
        let grid = SpaceGrid::new(1, 256, 40.0).unwrap();
        let sym: Symbol = FractionalSymbol::constant(1.0, 1.0).unwrap().into();
        let a = synthesize_envelopes(&sym, &grid, 0.0, 0.5).unwrap();
        let b = synthesize_envelopes(&sym, &grid, 2.0, 7.0).unwrap();
        for (x, y) in a.fields().iter().zip(b.fields()) {
            assert!(x.max_abs_diff(y).unwrap() < 1e-12);
            assert!(x.values().iter().all(|v| v.re >= 0.0 && v.re.is_finite()));
        }
    }

    #[test]
    fn envelope_sup_bounded_in_two_dimensions() {
        let grid = SpaceGrid::new(2, 64, 24.0).unwrap();
        let env = synthesize_envelopes(&Symbol::heat(), &grid, 0.0, 1.0).unwrap();
        for f in env.fields() {
            let m = f.max_abs();
            assert!(m.is_finite() && m > 0.0);
        }
    }

    #[test]
    fn moments_of_zero_and_inclusion() {
        let grid = SpaceGrid::new(1, 256, 32.0).unwrap();
        let zero = Field::zeros(&grid, 1, Domain::Space);
        let cut = doubling_cutoffs(1.0, &grid);
        assert_eq!(cut, vec![1.0, 2.0, 4.0, 8.0, 16.0]);
        let rep = moment_integral(&zero, 2.0, 0.0, &cut).unwrap();
        assert!(rep.converged && rep.partials.iter().all(|&v| v == 0.0));

        let env = synthesize_envelopes(&Symbol::heat(), &grid, 0.0, 1.0).unwrap();
        let a = moment_integral(&env.f2, 3.5, 0.5, &cut).unwrap();
        let b = moment_integral(&env.f2, 3.5, 1.0, &cut).unwrap();
        assert!(a.partials.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.partials.last() >= b.partials.last());
        assert!(moment_integral(&env.f2, -1.0, 0.0, &cut).is_err());
    }
}
