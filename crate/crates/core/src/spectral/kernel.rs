use num_complex::Complex64;

use super::{forward_in_place, inverse_in_place, xi_norm, Domain, Field, SpaceGrid, SpectralError};
use crate::symbols::{segment_overlaps, Symbol, SymbolError};

/// Tolerated size of `exp(-ν T_min |ξ_max|^γ)` before a run is warned about.
pub const ALIASING_BUDGET: f64 = 1e-12;

/// `ψ` tabulated on every frequency node for every constant time piece.
///
/// `∫ₛᵗ ψ(r, ξ) dr` then becomes a short weighted sum of table rows, which is
/// what every kernel evaluation in the crate reduces to.
#[derive(Clone, Debug)]
pub struct SymbolOnGrid {
    grid: SpaceGrid,
    breakpoints: Vec<f64>,
    table: Vec<Vec<Complex64>>,
    order: f64,
}

impl SymbolOnGrid {
    pub fn new(sym: &Symbol, grid: &SpaceGrid) -> Result<Self, SpectralError> {
        if let Some(d) = sym.dim() {
            if d != grid.dim() {
                return Err(SymbolError::DimensionMismatch {
                    expected: d,
                    got: grid.dim(),
                }
                .into());
            }
        }
        let d = grid.dim();
        let breakpoints = sym.breakpoints();
        let freqs = grid.frequencies();
        let table = breakpoints
            .iter()
            .map(|&b| freqs.iter().map(|xi| sym.eval_unchecked(b, &xi[..d])).collect())
            .collect();
        Ok(Self {
            grid: grid.clone(),
            breakpoints,
            table,
            order: sym.order(),
        })
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    /// `ψ(t, ξ_j)` for every node `j`.
    pub fn at(&self, t: f64) -> &[Complex64] {
        let idx = self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1);
        &self.table[idx]
    }

    /// `∫ₛᵗ ψ(r, ξ_j) dr` for every node; requires `s ≤ t`.
    pub fn integral(&self, s: f64, t: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (len, idx) in segment_overlaps(&self.breakpoints, s, t) {
            for (o, v) in out.iter_mut().zip(&self.table[idx]) {
                *o += v * len;
            }
        }
        out
    }

    /// `|ξ|^η exp(∫ₛᵗψ)` on the grid.
    pub fn kernel(&self, s: f64, t: f64, eta: f64) -> Result<KernelMultiplier, SpectralError> {
        check_times(s, t)?;
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(SpectralError::NegativeOrder(eta));
        }
        let weights = eta_weights(&self.grid, eta);
        let values = self
            .integral(s, t)
            .into_iter()
            .zip(&weights)
            .map(|(e, w)| e.exp() * w)
            .collect();
        Ok(KernelMultiplier {
            grid: self.grid.clone(),
            s,
            t,
            eta,
            values,
        })
    }
}

fn check_times(s: f64, t: f64) -> Result<(), SpectralError> {
    if !(s.is_finite() && t.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    if s > t {
        return Err(SymbolError::ReversedInterval { s, t }.into());
    }
    Ok(())
}

/// `|ξ_j|^η` per node with `|0|^η = 0` for `η > 0` and `1` for `η = 0`.
pub(crate) fn eta_weights(grid: &SpaceGrid, eta: f64) -> Vec<f64> {
    let d = grid.dim();
    (0..grid.len())
        .map(|j| {
            let r = xi_norm(&grid.frequency(j), d);
            if eta == 0.0 {
                1.0
            } else {
                r.powf(eta)
            }
        })
        .collect()
}

/// Frequency-side kernel `K̂(t,s,ξ) = |ξ|^η exp(∫ₛᵗψ(r,ξ)dr)` on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMultiplier {
    pub grid: SpaceGrid,
    pub s: f64,
    pub t: f64,
    pub eta: f64,
    pub values: Vec<Complex64>,
}

impl KernelMultiplier {
    /// Multiplier that is identically one.
    pub fn identity(grid: &SpaceGrid) -> Self {
        Self {
            grid: grid.clone(),
            s: 0.0,
            t: 0.0,
            eta: 0.0,
            values: vec![Complex64::new(1.0, 0.0); grid.len()],
        }
    }

    /// Multiplies a frequency-side channel in place.
    pub(crate) fn apply_hat(&self, data: &mut [Complex64]) {
        for (v, k) in data.iter_mut().zip(&self.values) {
            *v *= k;
        }
    }
}

pub fn kernel_hat(
    sym: &Symbol,
    s: f64,
    t: f64,
    eta: f64,
    grid: &SpaceGrid,
) -> Result<KernelMultiplier, SpectralError> {
    check_times(s, t)?;
    SymbolOnGrid::new(sym, grid)?.kernel(s, t, eta)
}

/// Physical-space kernel `F⁻¹ K̂`.
pub fn synthesize_kernel(kmult: &KernelMultiplier) -> Field {
    let mut data = kmult.values.clone();
    inverse_in_place(&kmult.grid, &mut data);
    Field::from_values(&kmult.grid, 1, data, Domain::Space).expect("finite kernel values")
}

/// `K(t,s,·) ∗ f` per channel, computed on the frequency side.
pub fn convolve_slice(kmult: &KernelMultiplier, f: &Field) -> Result<Field, SpectralError> {
    if f.grid() != &kmult.grid {
        return Err(SpectralError::GridMismatch);
    }
    if f.domain() != Domain::Space {
        return Err(SpectralError::WrongDomain {
            expected: Domain::Space,
        });
    }
    let mut out = f.clone();
    for ch in 0..f.channels() {
        let data = out.channel_mut(ch);
        forward_in_place(&kmult.grid, data);
        kmult.apply_hat(data);
        inverse_in_place(&kmult.grid, data);
    }
    Ok(out)
}

/// Applies the Fourier multiplier `m(ξ)` to a space-side field.
pub fn apply_multiplier<M>(f: &Field, mult: M) -> Result<Field, SpectralError>
where
    M: Fn(&[f64]) -> Complex64,
{
    if f.domain() != Domain::Space {
        return Err(SpectralError::WrongDomain {
            expected: Domain::Space,
        });
    }
    let grid = f.grid().clone();
    let d = grid.dim();
    let values: Vec<Complex64> = (0..grid.len()).map(|j| mult(&grid.frequency(j)[..d])).collect();
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(SpectralError::NonFinite);
    }
    let kmult = KernelMultiplier {
        grid,
        s: 0.0,
        t: 0.0,
        eta: 0.0,
        values,
    };
    convolve_slice(&kmult, f)
}

/// `(-Δ)^{η/2} f`, i.e. the multiplier `|ξ|^η` with the zero mode removed for `η > 0`.
pub fn fractional_derivative(f: &Field, eta: f64) -> Result<Field, SpectralError> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(SpectralError::NegativeOrder(eta));
    }
    let weights = eta_weights(f.grid(), eta);
    let kmult = KernelMultiplier {
        grid: f.grid().clone(),
        s: 0.0,
        t: 0.0,
        eta,
        values: weights.into_iter().map(|w| Complex64::new(w, 0.0)).collect(),
    };
    convolve_slice(&kmult, f)
}

/// `exp(-ν T_min |ξ_max|^γ)` with `|ξ_max|` the largest node norm on the grid:
/// the weight the kernel still carries at the truncation frequency.
pub fn aliasing_budget(nu: f64, gamma: f64, t_min: f64, grid: &SpaceGrid) -> f64 {
    let xi_max = grid.max_frequency() * (grid.dim() as f64).sqrt();
    (-nu * t_min * xi_max.powf(gamma)).exp()
}

/// Logs a warning when the truncation weight exceeds [`ALIASING_BUDGET`];
/// returns the computed weight.
pub fn warn_if_aliased(sym: &Symbol, t_min: f64, grid: &SpaceGrid) -> f64 {
    let budget = aliasing_budget(sym.nu(), sym.order(), t_min, grid);
    if budget > ALIASING_BUDGET {
        log::warn!(
            "spectral truncation weight {budget:.3e} exceeds {ALIASING_BUDGET:.0e} \
             (family {}, order {}, smallest time gap {t_min}, n = {}, L = {})",
            sym.family(),
            sym.order(),
            grid.n(),
            grid.length()
        );
    }
    budget
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{FractionalSymbol, PiecewiseConstant};
    use std::f64::consts::PI;

    #[test]
    fn heat_kernel_node_values() {
        let grid = SpaceGrid::new(1, 16, 2.0 * PI).unwrap();
        let heat = Symbol::heat();
        // node j = 2 has |ξ| = 2
        let k0 = kernel_hat(&heat, 0.0, 0.1, 0.0, &grid).unwrap();
        assert!((k0.values[2].re - (-0.4f64).exp()).abs() < 1e-15);
        let k1 = kernel_hat(&heat, 0.0, 0.1, 1.0, &grid).unwrap();
        assert!((k1.values[2].re - 2.0 * (-0.4f64).exp()).abs() < 1e-15);
        assert_eq!(k1.values[0], Complex64::new(0.0, 0.0));
        assert_eq!(k0.values[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn reversed_interval_rejected() {
        let grid = SpaceGrid::new(1, 16, 1.0).unwrap();
        assert!(kernel_hat(&Symbol::heat(), 1.0, 0.5, 0.0, &grid).is_err());
        assert!(kernel_hat(&Symbol::heat(), 0.0, 0.5, -1.0, &grid).is_err());
    }

    #[test]
    fn sine_is_laplacian_eigenfunction() {
        let grid = SpaceGrid::new(1, 32, 2.0 * PI).unwrap();
        let f = Field::from_fn(&grid, 1, |_, x| Complex64::new(x[0].sin(), 0.0));
        let g = apply_multiplier(&f, |xi| Complex64::new(xi[0] * xi[0], 0.0)).unwrap();
        assert!(g.max_abs_diff(&f).unwrap() < 1e-12);

        let e2 = Field::from_fn(&grid, 1, |_, x| Complex64::from_polar(1.0, 2.0 * x[0]));
        let g = fractional_derivative(&e2, 1.0).unwrap();
        assert!(g.max_abs_diff(&e2.scaled(Complex64::new(2.0, 0.0))).unwrap() < 1e-12);
        let same = fractional_derivative(&e2, 0.0).unwrap();
        assert!(same.max_abs_diff(&e2).unwrap() < 1e-13);
    }

    #[test]
    fn identity_kernel_and_delta() {
        let grid = SpaceGrid::new(1, 64, 10.0).unwrap();
        let f = Field::from_fn(&grid, 2, |ch, x| Complex64::new((x[0] + ch as f64).cos(), 0.3));
        let g = convolve_slice(&KernelMultiplier::identity(&grid), &f).unwrap();
        assert!(g.max_abs_diff(&f).unwrap() < 1e-13);

        // a unit-mass delta at the origin returns the kernel itself
        let k = kernel_hat(&Symbol::heat(), 0.0, 0.3, 0.0, &grid).unwrap();
        let centre = grid.n() / 2;
        let h = grid.spacing();
        let delta = Field::from_fn(&grid, 1, |_, x| {
            if (x[0]).abs() < 0.5 * h {
                Complex64::new(1.0 / h, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!(delta.values()[centre].re > 0.0);
        let conv = convolve_slice(&k, &delta).unwrap();
        assert!(conv.max_abs_diff(&synthesize_kernel(&k)).unwrap() < 1e-12);
    }

    #[test]
    fn kernel_mass_is_zero_mode() {
        let grid = SpaceGrid::new(2, 32, 12.0).unwrap();
        let sym: Symbol = FractionalSymbol::constant(1.0, 1.5).unwrap().into();
        let k = kernel_hat(&sym, 0.2, 0.7, 0.0, &grid).unwrap();
        let p = synthesize_kernel(&k);
        let mass: f64 = p.values().iter().map(|v| v.re).sum::<f64>() * grid.cell_volume();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn piecewise_integral_on_grid() {
        let c = |v: f64| Complex64::new(v, 0.0);
        let a = PiecewiseConstant::new(vec![0.0, 1.0], vec![c(1.0), c(2.0)]).unwrap();
        let sym: Symbol = FractionalSymbol::new(1.0, a, 0.4).unwrap().into();
        let grid = SpaceGrid::new(1, 8, 2.0 * PI).unwrap();
        let table = SymbolOnGrid::new(&sym, &grid).unwrap();
        let integral = table.integral(0.0, 2.0);
        assert!((integral[1] - c(-3.0)).norm() < 1e-14);
        assert_eq!(table.at(1.5)[1], c(-2.0));
    }

    #[test]
    fn budget_is_monotone_in_time() {
        let grid = SpaceGrid::new(1, 128, 20.0).unwrap();
        let small = aliasing_budget(1.0, 2.0, 1e-4, &grid);
        let large = aliasing_budget(1.0, 2.0, 1e-1, &grid);
        assert!(large < small);
        assert!(large < ALIASING_BUDGET);
    }
}
