//! The parabolic square function
//! `𝒢f(t,x) = (∫_{-∞}^t |K(t,s,·) ∗ f(s,·)(x)|²_H ds)^{1/2}` with
//! `K̂(t,s,ξ) = |ξ|^η exp(∫ₛᵗψ(r,ξ)dr)`, space-time `L_p` norms and the
//! empirical ratio `‖𝒢f‖_p / ‖f‖_p`.
//!
//! The `ds` integral uses the trapezoid rule on the time grid of `f`,
//! including the endpoint `s = t`, starting from the first slice.

pub mod corpus;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::spectral::{
    forward_in_place, inverse_in_place, Field, RealSpaceTime, SpaceGrid, SpaceTimeField,
    SpectralError, SymbolOnGrid,
};
use crate::symbols::Symbol;

/// `𝒢f` sampled on the grid times of `f`; entries are nonnegative.
pub type SquareField = RealSpaceTime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SquareError {
    #[error("derivative order eta = {0} must be a nonnegative finite number")]
    NegativeOrder(f64),
    #[error("exponent p = {0} must be at least 1")]
    InvalidExponent(f64),
    #[error("invalid scaling: {0}")]
    Scaling(String),
    #[error("invalid order gamma = {0}")]
    InvalidGamma(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Space-time `L_p` norm with the `H`-norm taken first.
pub trait LpNorm {
    /// `(Σ h^d·dt·|g|_H^p)^{1/p}`; `p ≥ 1` is the caller's responsibility.
    fn lp_norm(&self, p: f64) -> f64;
}

/// Scaled power sum `(w Σ v^p)^{1/p}`, safe against overflow for large `p`.
fn power_mean(values: impl Iterator<Item = f64> + Clone, weight: f64, p: f64) -> f64 {
    let max = values.clone().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let sum: f64 = values.map(|v| (v / max).powf(p)).sum();
    max * (weight * sum).powf(p.recip())
}

impl LpNorm for RealSpaceTime {
    fn lp_norm(&self, p: f64) -> f64 {
        let weight = self.grid.cell_volume() * self.dt;
        power_mean(self.slices.iter().flat_map(|s| s.iter().map(|v| v.abs())), weight, p)
    }
}

impl LpNorm for SpaceTimeField {
    fn lp_norm(&self, p: f64) -> f64 {
        self.norm_sq_pointwise().map(f64::sqrt).lp_norm(p)
    }
}

impl LpNorm for Field {
    /// Spatial norm `(Σ h^d |f|_H^p)^{1/p}` of a single slice.
    fn lp_norm(&self, p: f64) -> f64 {
        let weight = self.grid().cell_volume();
        let norms: Vec<f64> = self.norm_sq_pointwise().into_iter().map(f64::sqrt).collect();
        power_mean(norms.iter().copied(), weight, p)
    }
}

pub fn lp_space_time_norm<T: LpNorm + ?Sized>(g: &T, p: f64) -> Result<f64, SquareError> {
    check_p(p)?;
    Ok(g.lp_norm(p))
}

fn check_p(p: f64) -> Result<(), SquareError> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(SquareError::InvalidExponent(p))
    }
}

fn check_eta(eta: f64) -> Result<(), SquareError> {
    if eta.is_finite() && eta >= 0.0 {
        Ok(())
    } else {
        Err(SquareError::NegativeOrder(eta))
    }
}

/// Frequency-side slices of `f`, with `None` for identically zero slices.
fn transformed_slices(f: &SpaceTimeField) -> Vec<Option<Vec<Complex64>>> {
    let grid = f.grid();
    f.slices()
        .par_iter()
        .map(|slice| {
            if slice.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                return None;
            }
            let mut data = slice.values().to_vec();
            for chunk in data.chunks_mut(grid.len()) {
                forward_in_place(grid, chunk);
            }
            Some(data)
        })
        .collect()
}

/// Trapezoid weight of slice `j` in `∫_{t_0}^{t_i} ds`.
fn trapezoid_weight(i: usize, j: usize, dt: f64) -> f64 {
    if i == 0 {
        0.0
    } else if j == 0 || j == i {
        0.5 * dt
    } else {
        dt
    }
}

pub fn square_function(sym: &Symbol, eta: f64, f: &SpaceTimeField) -> Result<SquareField, SquareError> {
    check_eta(eta)?;
    let grid = f.grid().clone();
    let table = SymbolOnGrid::new(sym, &grid)?;
    let hats = transformed_slices(f);
    let len = grid.len();
    let slices: Vec<Vec<f64>> = (0..f.nt())
        .into_par_iter()
        .map(|i| {
            let t = f.time(i);
            let mut acc = vec![0.0; len];
            let mut work = vec![Complex64::new(0.0, 0.0); len];
            for (j, hat) in hats.iter().enumerate().take(i + 1) {
                let Some(hat) = hat else { continue };
                let w = trapezoid_weight(i, j, f.dt());
                if w == 0.0 {
                    continue;
                }
                let kmult = table.kernel(f.time(j), t, eta).expect("validated times and order");
                for chunk in hat.chunks(len) {
                    for ((o, v), k) in work.iter_mut().zip(chunk).zip(&kmult.values) {
                        *o = v * k;
                    }
                    inverse_in_place(&grid, &mut work);
                    for (a, v) in acc.iter_mut().zip(&work) {
                        *a += w * v.norm_sqr();
                    }
                }
            }
            acc.into_iter().map(f64::sqrt).collect()
        })
        .collect();
    Ok(RealSpaceTime {
        grid,
        t0: f.t0(),
        dt: f.dt(),
        slices,
    })
}

/// `‖𝒢f‖²_{L_2}` evaluated entirely on the frequency side:
/// `Σ_i dt Σ_j w_ij L^{-d} Σ_ξ |K̂(t_i,s_j,ξ)|² |f̂(s_j,ξ)|²_H`.
pub fn square_norm_sq_frequency(sym: &Symbol, eta: f64, f: &SpaceTimeField) -> Result<f64, SquareError> {
    check_eta(eta)?;
    let grid = f.grid();
    let table = SymbolOnGrid::new(sym, grid)?;
    let hats = transformed_slices(f);
    let len = grid.len();
    let norm = grid.length().powi(grid.dim() as i32).recip();
    let per_time: Vec<f64> = (0..f.nt())
        .into_par_iter()
        .map(|i| {
            let mut total = 0.0;
            for (j, hat) in hats.iter().enumerate().take(i + 1) {
                let Some(hat) = hat else { continue };
                let w = trapezoid_weight(i, j, f.dt());
                if w == 0.0 {
                    continue;
                }
                let kmult = table.kernel(f.time(j), f.time(i), eta).expect("validated");
                for chunk in hat.chunks(len) {
                    let s: f64 = chunk
                        .iter()
                        .zip(&kmult.values)
                        .map(|(v, k)| (v * k).norm_sqr())
                        .sum();
                    total += w * norm * s;
                }
            }
            total
        })
        .collect();
    Ok(f.dt() * per_time.iter().sum::<f64>())
}

/// Empirical `‖𝒢f‖_p / ‖|f|_H‖_p` together with its ingredients.
#[derive(Clone, Debug, PartialEq)]
pub struct LpReport {
    pub family: &'static str,
    pub order: f64,
    pub p: f64,
    pub d: usize,
    pub n: usize,
    pub nt: usize,
    pub norm_g: f64,
    pub norm_f: f64,
    pub ratio: f64,
    /// Set when `‖f‖_p = 0`; the ratio is then reported as zero.
    pub degenerate: bool,
}

impl LpReport {
    fn new(family: &'static str, order: f64, p: f64, grid: &SpaceGrid, nt: usize, norm_g: f64, norm_f: f64) -> Self {
        let degenerate = norm_f == 0.0;
        Self {
            family,
            order,
            p,
            d: grid.dim(),
            n: grid.n(),
            nt,
            norm_g,
            norm_f,
            ratio: if degenerate { 0.0 } else { norm_g / norm_f },
            degenerate,
        }
    }
}

pub fn lp_ratio(sym: &Symbol, eta: f64, f: &SpaceTimeField, p: f64) -> Result<LpReport, SquareError> {
    Ok(lp_ratios(sym, eta, f, &[p])?.remove(0))
}

/// One report per exponent, sharing a single square-function evaluation.
pub fn lp_ratios(sym: &Symbol, eta: f64, f: &SpaceTimeField, ps: &[f64]) -> Result<Vec<LpReport>, SquareError> {
    for &p in ps {
        check_p(p)?;
    }
    let g = square_function(sym, eta, f)?;
    Ok(ps
        .iter()
        .map(|&p| {
            LpReport::new(sym.family(), sym.order(), p, f.grid(), f.nt(), g.lp_norm(p), f.lp_norm(p))
        })
        .collect())
}

/// Log-spaced time nodes `t_k = e^{u_k}` and weights `Δu·t_k` covering
/// every rate in `[r_min, r_max]`.
fn geometric_time_nodes(r_min: f64, r_max: f64) -> Vec<(f64, f64)> {
    const DU: f64 = 0.2;
    let u_lo = (1e-12 / r_max).ln();
    let u_hi = (40.0 / r_min).ln();
    let count = ((u_hi - u_lo) / DU).ceil() as usize + 1;
    (0..count)
        .map(|k| {
            let t = (u_lo + k as f64 * DU).exp();
            (t, DU * t)
        })
        .collect()
}

/// Elliptic square function `(∫₀^∞ |(-Δ)^{γ/2} e^{-t(-Δ)^γ} f|²_H dt)^{1/2}`
/// and its `L_p(ℝ^d)` ratio to `f`.
///
/// The time integral runs over a truncated geometric grid, i.e. the trapezoid
/// rule in `u = ln t`, which is spectrally accurate for these integrands.
pub fn elliptic_square_function(f: &Field, gamma: f64, p: f64) -> Result<LpReport, SquareError> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(SquareError::InvalidGamma(gamma));
    }
    check_p(p)?;
    let grid = f.grid().clone();
    let d = grid.dim();
    let len = grid.len();
    let rates: Vec<f64> = (0..len)
        .map(|j| crate::spectral::xi_norm(&grid.frequency(j), d).powf(2.0 * gamma))
        .collect();
    let r_max = rates.iter().copied().fold(0.0, f64::max);
    let r_min = grid.frequency_spacing().powf(2.0 * gamma);
    let nodes = geometric_time_nodes(r_min, r_max);

    let mut hat = f.values().to_vec();
    for chunk in hat.chunks_mut(len) {
        forward_in_place(&grid, chunk);
    }
    let partial: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&(t, w)| {
            let mut acc = vec![0.0; len];
            let mut work = vec![Complex64::new(0.0, 0.0); len];
            for chunk in hat.chunks(len) {
                for ((o, v), r) in work.iter_mut().zip(chunk).zip(&rates) {
                    *o = v * (r.sqrt() * (-t * r).exp());
                }
                inverse_in_place(&grid, &mut work);
                for (a, v) in acc.iter_mut().zip(&work) {
                    *a += w * v.norm_sqr();
                }
            }
            acc
        })
        .collect();
    let mut s_sq = vec![0.0; len];
    for row in &partial {
        for (a, v) in s_sq.iter_mut().zip(row) {
            *a += v;
        }
    }
    let s: Vec<f64> = s_sq.into_iter().map(f64::sqrt).collect();
    let norm_g = power_mean(s.iter().copied(), grid.cell_volume(), p);
    Ok(LpReport::new("elliptic", gamma, p, &grid, nodes.len(), norm_g, f.lp_norm(p)))
}

/// Relative discrepancy in the parabolic scaling identity
/// `𝒢f_c(t,x) = c^{η-γ/2}·𝒢f(c^γ t, c x)` with `f_c(t,x) = f(c^γ t, c x)`.
///
/// Both sides are computed on the grid of `f`: the spatial rescaling is the
/// periodic index map `x_i ↦ c·x_i`, the time rescaling picks every
/// `c^γ`-th slice (so `c^γ` must be an integer and `t_0 = 0`). Slices past
/// the end of `f` are taken as zero.
pub fn scaling_check(sym: &Symbol, eta: f64, f: &SpaceTimeField, c: f64) -> Result<f64, SquareError> {
    if !sym.is_time_independent() {
        return Err(SquareError::Scaling("symbol must be time independent".into()));
    }
    if f.t0() != 0.0 {
        return Err(SquareError::Scaling("time window must start at t = 0".into()));
    }
    let grid = f.grid().clone();
    let n = grid.n();
    let ci = c.round();
    if !(c >= 1.0 && c == ci && (ci as usize).is_power_of_two() && (ci as usize) < n) {
        return Err(SquareError::Scaling(format!("c = {c} is not a dyadic factor below n")));
    }
    let c_int = ci as usize;
    let gamma = sym.order();
    let ct = c.powf(gamma);
    let ct_int = ct.round();
    if (ct - ct_int).abs() > 1e-9 || ct_int < 1.0 {
        return Err(SquareError::Scaling(format!("c^gamma = {ct} is not an integer")));
    }
    let step = ct_int as usize;
    let d = grid.dim();
    let map_axis = |i: usize| (c_int * i + n * c_int - (c_int - 1) * n / 2) % n;
    let map_flat = |flat: usize| {
        let idx = grid.multi_index(flat);
        let mut out = [0usize; crate::spectral::MAX_DIM];
        for axis in 0..d {
            out[axis] = map_axis(idx[axis]);
        }
        grid.flat_index(&out[..d])
    };
    let len = grid.len();
    let channels = f.channels();
    let zero = Field::zeros(&grid, channels, crate::spectral::Domain::Space);
    let slices: Vec<Field> = (0..f.nt())
        .map(|k| {
            let src = k * step;
            if src >= f.nt() {
                return zero.clone();
            }
            let from = f.slice(src);
            let mut values = Vec::with_capacity(channels * len);
            for ch in 0..channels {
                let data = from.channel(ch);
                values.extend((0..len).map(|i| data[map_flat(i)]));
            }
            Field::from_values(&grid, channels, values, crate::spectral::Domain::Space)
                .expect("rearranged finite values")
        })
        .collect();
    let f_c = SpaceTimeField::new(0.0, f.dt(), slices)?;

    let g = square_function(sym, eta, f)?;
    let g_c = square_function(sym, eta, &f_c)?;
    let factor = c.powf(eta - gamma / 2.0);
    let scale = g.max().max(0.0);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for k in 0..f.nt() {
        let src = k * step;
        if src >= f.nt() {
            break;
        }
        for i in 0..len {
            let diff = (g_c.slices[k][i] - factor * g.slices[src][map_flat(i)]).abs();
            worst = worst.max(diff);
        }
    }
    Ok(worst / (factor * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::FractionalSymbol;
    use std::f64::consts::PI;

    fn single_mode(grid: &SpaceGrid, xi0: f64, dt: f64, nt: usize, on: std::ops::RangeInclusive<usize>) -> SpaceTimeField {
        SpaceTimeField::from_fn(grid, 1, 0.0, dt, nt, |_, t, x| {
            let j = (t / dt).round() as usize;
            if on.contains(&j) {
                Complex64::from_polar(1.0, xi0 * x[0])
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn zero_input_gives_zero() {
        let grid = SpaceGrid::new(1, 16, 5.0).unwrap();
        let f = SpaceTimeField::from_fn(&grid, 2, 0.0, 0.1, 5, |_, _, _| Complex64::new(0.0, 0.0));
        let g = square_function(&Symbol::heat(), 1.0, &f).unwrap();
        assert_eq!(g.max(), 0.0);
        let report = lp_ratio(&Symbol::heat(), 1.0, &f, 2.0).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.ratio, 0.0);
    }

    #[test]
    fn single_mode_matches_closed_form() {
        // discrete oracle: trapezoid sum of |ξ|^γ e^{-2(t-s)|ξ|^γ} over the slices
        let grid = SpaceGrid::new(1, 16, 2.0 * PI).unwrap();
        let dt = 0.01;
        let f = single_mode(&grid, 1.0, dt, 60, 1..=59);
        let g = square_function(&Symbol::heat(), 1.0, &f).unwrap();
        for i in [10usize, 30, 59] {
            let t = i as f64 * dt;
            let mut expected = 0.0;
            for j in 1..=i {
                let w = if j == i { 0.5 * dt } else { dt };
                expected += w * (-2.0 * (t - j as f64 * dt)).exp();
            }
            for x in 0..16 {
                assert!((g.value(i, x).powi(2) - expected).abs() < 1e-12);
            }
            let continuum = 0.5 * (1.0 - (-2.0 * (t - dt)).exp());
            assert!((expected - continuum).abs() < 0.01);
        }
    }

    #[test]
    fn channels_add_in_l2() {
        let grid = SpaceGrid::new(1, 32, 8.0).unwrap();
        let one = SpaceTimeField::from_fn(&grid, 1, 0.0, 0.05, 8, |_, t, x| {
            Complex64::new((-x[0] * x[0]).exp() * t, 0.0)
        });
        let two = SpaceTimeField::from_fn(&grid, 2, 0.0, 0.05, 8, |_, t, x| {
            Complex64::new((-x[0] * x[0]).exp() * t, 0.0)
        });
        let g1 = square_function(&Symbol::heat(), 1.0, &one).unwrap();
        let g2 = square_function(&Symbol::heat(), 1.0, &two).unwrap();
        for (a, b) in g1.slices.iter().flatten().zip(g2.slices.iter().flatten()) {
            assert!((b - 2f64.sqrt() * a).abs() < 1e-12);
        }
    }

    #[test]
    fn norms_of_constants_and_homogeneity() {
        let grid = SpaceGrid::new(1, 8, 2.0).unwrap();
        let f = SpaceTimeField::from_fn(&grid, 1, 0.0, 0.25, 4, |_, _, _| Complex64::new(1.0, 0.0));
        // window measure V = L·nt·dt = 2
        for p in [1.0, 2.0, 3.5] {
            let v = lp_space_time_norm(&f, p).unwrap();
            assert!((v - 2f64.powf(1.0 / p)).abs() < 1e-14);
            let doubled = lp_space_time_norm(&f.scaled(Complex64::new(2.0, 0.0)), p).unwrap();
            assert!((doubled - 2.0 * v).abs() < 1e-14);
        }
        assert!(lp_space_time_norm(&f, 0.5).is_err());
    }

    #[test]
    fn plancherel_agrees_with_physical_space() {
        let grid = SpaceGrid::new(1, 32, 10.0).unwrap();
        let f = SpaceTimeField::from_fn(&grid, 2, 0.0, 0.02, 12, |ch, t, x| {
            Complex64::new((-(x[0] - ch as f64).powi(2)).exp() * t.sin(), 0.1 * x[0].cos() * t)
        });
        let sym: Symbol = FractionalSymbol::constant(1.0, 1.3).unwrap().into();
        let g = square_function(&sym, 0.5, &f).unwrap();
        let physical = g.lp_norm(2.0).powi(2);
        let spectral = square_norm_sq_frequency(&sym, 0.5, &f).unwrap();
        assert!((physical - spectral).abs() <= 1e-10 * spectral);
    }

    #[test]
    fn elliptic_half_per_mode() {
        let grid = SpaceGrid::new(1, 64, 20.0).unwrap();
        let f = Field::from_fn(&grid, 1, |_, x| {
            Complex64::new(x[0] * (-x[0] * x[0] / 2.0).exp(), 0.0)
        });
        for gamma in [0.5, 1.0, 2.0] {
            let r = elliptic_square_function(&f, gamma, 2.0).unwrap();
            assert!((r.ratio.powi(2) - 0.5).abs() < 1e-6, "gamma {gamma}: {}", r.ratio);
        }
        let zero = Field::zeros(&grid, 1, crate::spectral::Domain::Space);
        assert!(elliptic_square_function(&zero, 1.0, 2.0).unwrap().degenerate);
    }

    #[test]
    fn scaling_identity_single_mode() {
        let grid = SpaceGrid::new(1, 32, 2.0 * PI).unwrap();
        // switched on from the first slice so both clocks share the same edge
        let f = single_mode(&grid, 1.0, 0.002, 200, 0..=199);
        assert_eq!(scaling_check(&Symbol::heat(), 1.0, &f, 1.0).unwrap(), 0.0);
        let e = scaling_check(&Symbol::heat(), 1.0, &f, 2.0).unwrap();
        assert!(e < 1e-3, "{e}");
        let lin: Symbol = FractionalSymbol::constant(1.0, 1.0).unwrap().into();
        let e = scaling_check(&lin, 0.5, &f, 2.0).unwrap();
        assert!(e < 1e-3, "{e}");
        assert!(scaling_check(&lin, 0.5, &f, 3.0).is_err());
    }
}
