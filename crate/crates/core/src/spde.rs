//! Monte Carlo for the stochastic convolution `u = Σ_k ∫ p(t,s)∗f^k(s) dw^k_s`.
//!
//! Brownian increments come from a counter-based stream: path `m` reads the
//! ChaCha20 stream number `m` under the run seed, and increment `(k, j)` is
//! built from the two 64-bit words starting at word `4(k·nt + j)`. Any path
//! can therefore be regenerated on its own, and ensembles are bitwise
//! reproducible regardless of thread count.

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use thiserror::Error;

use crate::spectral::{
    inverse_in_place, Domain, Field, RealSpaceTime, SpaceTimeField, SpectralError, SymbolOnGrid,
};
use crate::squarefn::{lp_space_time_norm, square_function, SquareError};
use crate::symbols::{FractionalSymbol, PiecewiseConstant, Symbol, SymbolError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpdeError {
    #[error("invalid noise specification: {0}")]
    Noise(String),
    #[error("forcing does not match the noise: {0}")]
    Mismatch(String),
    #[error("observation point out of range: {0}")]
    Observation(String),
    #[error("too few paths: {0}")]
    Paths(usize),
    #[error("invalid exponent p = {0}")]
    Exponent(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Square(#[from] SquareError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// `K` independent Wiener processes sampled on `nt` steps of size `dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub modes: usize,
    pub seed: u64,
    pub dt: f64,
    pub nt: usize,
}

impl NoiseSpec {
    pub fn new(modes: usize, seed: u64, dt: f64, nt: usize) -> Result<Self, SpdeError> {
        if modes == 0 {
            return Err(SpdeError::Noise("need at least one Wiener mode".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SpdeError::Noise(format!("dt = {dt} must be positive")));
        }
        Ok(Self {
            modes,
            seed,
            dt,
            nt,
        })
    }

    /// First 32-bit word position not used by the increments of a path.
    fn words_used(&self) -> u128 {
        4 * (self.modes as u128) * (self.nt as u128)
    }
}

fn stream(spec: &NoiseSpec, path: u64, word: u128) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(path);
    rng.set_word_pos(word);
    rng
}

fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal from two uniforms (Box–Muller, cosine branch).
fn normal(rng: &mut ChaCha20Rng) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// `ΔW^k_j ~ N(0, dt)` indexed `[k][j]`.
pub fn sample_brownian_increments(spec: &NoiseSpec, path: u64) -> Vec<Vec<f64>> {
    let scale = spec.dt.sqrt();
    // word 4(k·nt + j) for consecutive j is exactly a sequential read
    let mut rng = stream(spec, path, 0);
    (0..spec.modes)
        .map(|_| (0..spec.nt).map(|_| scale * normal(&mut rng)).collect())
        .collect()
}

/// One increment read directly from its counter.
pub fn brownian_increment(spec: &NoiseSpec, path: u64, k: usize, j: usize) -> f64 {
    let mut rng = stream(spec, path, 4 * (k as u128 * spec.nt as u128 + j as u128));
    spec.dt.sqrt() * normal(&mut rng)
}

fn check_forcing(f: &SpaceTimeField, spec: &NoiseSpec) -> Result<(), SpdeError> {
    if f.channels() != spec.modes {
        return Err(SpdeError::Mismatch(format!(
            "{} channels for {} Wiener modes",
            f.channels(),
            spec.modes
        )));
    }
    if f.nt() != spec.nt || (f.dt() - spec.dt).abs() > 1e-12 * spec.dt {
        return Err(SpdeError::Mismatch(format!(
            "forcing has nt = {}, dt = {}; noise has nt = {}, dt = {}",
            f.nt(),
            f.dt(),
            spec.nt,
            spec.dt
        )));
    }
    Ok(())
}

/// Frequency-side data shared by every path: `f̂^k(s_j)` and the one-step
/// propagators `exp ∫_{t_j}^{t_{j+1}} ψ`.
struct Propagation {
    hats: Vec<Vec<Complex64>>,
    steps: Vec<Vec<Complex64>>,
}

impl Propagation {
    fn new(sym: &Symbol, f: &SpaceTimeField) -> Result<Self, SpdeError> {
        let table = SymbolOnGrid::new(sym, f.grid())?;
        let hats = f
            .slices()
            .par_iter()
            .map(|s| s.to_frequency().map(Field::into_values))
            .collect::<Result<Vec<_>, _>>()?;
        let steps = (0..f.nt())
            .into_par_iter()
            .map(|j| {
                let (a, b) = (f.time(j), f.time(j) + f.dt());
                table.integral(a, b).into_iter().map(Complex64::exp).collect()
            })
            .collect();
        Ok(Self { hats, steps })
    }

    /// Runs `û_{j+1} = E_j(û_j + Σ_k f̂^k(s_j)ΔW^k_j)` from `û_0 = 0`, calling
    /// `visit(i, û_i)` for every slice.
    fn run(&self, len: usize, dw: &[Vec<f64>], mut visit: impl FnMut(usize, &[Complex64])) {
        let mut u = vec![Complex64::new(0.0, 0.0); len];
        for j in 0..self.steps.len() {
            visit(j, &u);
            for (k, dwk) in dw.iter().enumerate() {
                let w = dwk[j];
                for (o, v) in u.iter_mut().zip(&self.hats[j][k * len..(k + 1) * len]) {
                    *o += v * w;
                }
            }
            for (o, e) in u.iter_mut().zip(&self.steps[j]) {
                *o *= e;
            }
        }
    }
}

/// Left-point stochastic convolution on the time grid of `f`, one path.
/// The result has one channel; `u(t_0) = 0`.
pub fn stochastic_convolution(
    sym: &Symbol,
    f: &SpaceTimeField,
    spec: &NoiseSpec,
    path: u64,
) -> Result<SpaceTimeField, SpdeError> {
    check_forcing(f, spec)?;
    let prop = Propagation::new(sym, f)?;
    let dw = sample_brownian_increments(spec, path);
    convolve_with(&prop, f, &dw)
}

fn convolve_with(prop: &Propagation, f: &SpaceTimeField, dw: &[Vec<f64>]) -> Result<SpaceTimeField, SpdeError> {
    let grid = f.grid();
    let len = grid.len();
    let mut slices = Vec::with_capacity(f.nt());
    prop.run(len, dw, |_, u| {
        let mut v = u.to_vec();
        inverse_in_place(grid, &mut v);
        slices.push(v);
    });
    let slices = slices
        .into_iter()
        .map(|v| Field::from_values(grid, 1, v, Domain::Space))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpaceTimeField::new(f.t0(), f.dt(), slices)?)
}

/// Per-path coefficient resampling: each piece of `a(t)` is multiplied by an
/// independent factor uniform in `[1 - spread, 1 + spread]`, drawn from the
/// part of the path's stream that follows its increments.
pub fn randomize_fractional(
    base: &FractionalSymbol,
    spread: f64,
    spec: &NoiseSpec,
    path: u64,
) -> Result<Symbol, SpdeError> {
    if !(spread.is_finite() && (0.0..1.0).contains(&spread)) {
        return Err(SpdeError::Noise(format!("spread = {spread} must lie in [0, 1)")));
    }
    let mut rng = stream(spec, path, spec.words_used());
    let coeff = base.coefficient();
    let values: Vec<Complex64> = coeff
        .values()
        .iter()
        .map(|v| v * (1.0 + spread * (2.0 * uniform(&mut rng) - 1.0)))
        .collect();
    let nu = values
        .iter()
        .map(|v| v.re.min(v.re.recip()))
        .fold(1.0f64, f64::min)
        * 0.5;
    let a = PiecewiseConstant::new(coeff.breakpoints().to_vec(), values)?;
    Ok(FractionalSymbol::new(base.gamma(), a, nu)?.into())
}

/// Stochastic convolution whose symbol is chosen per path, e.g. by
/// [`randomize_fractional`].
pub fn stochastic_convolution_random(
    symbol_for_path: impl Fn(u64) -> Result<Symbol, SpdeError>,
    f: &SpaceTimeField,
    spec: &NoiseSpec,
    path: u64,
) -> Result<SpaceTimeField, SpdeError> {
    let sym = symbol_for_path(path)?;
    stochastic_convolution(&sym, f, spec, path)
}

/// Fixed-order pairwise sum, so reductions do not depend on scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// Sample mean of i.i.d. path values with its standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
    pub paths: usize,
}

impl MomentEstimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self, SpdeError> {
        let m = samples.len();
        if m < 2 {
            return Err(SpdeError::Paths(m));
        }
        let mean = pairwise_sum(samples) / m as f64;
        let dev: Vec<f64> = samples.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&dev) / (m - 1) as f64;
        Ok(Self {
            value: mean,
            std_error: (var / m as f64).sqrt(),
            paths: m,
        })
    }
}

/// Observation point `(t_index, x_index)` on the time × space grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observation {
    pub t_index: usize,
    pub x_index: usize,
}

/// Deterministic weights `c_kj = [p(t*, s_j) ∗ f^k(s_j)](x*)` for `s_j < t*`,
/// so that `u(t*, x*) = Σ_kj c_kj ΔW^k_j`.
pub fn observation_weights(
    sym: &Symbol,
    f: &SpaceTimeField,
    at: Observation,
) -> Result<Vec<Vec<Complex64>>, SpdeError> {
    let grid = f.grid();
    if at.t_index >= f.nt() || at.x_index >= grid.len() {
        return Err(SpdeError::Observation(format!(
            "({}, {}) outside {} slices × {} nodes",
            at.t_index,
            at.x_index,
            f.nt(),
            grid.len()
        )));
    }
    let table = SymbolOnGrid::new(sym, grid)?;
    let len = grid.len();
    let t = f.time(at.t_index);
    let per_slice: Vec<Vec<Complex64>> = (0..at.t_index)
        .into_par_iter()
        .map(|j| {
            let kmult = table.kernel(f.time(j), t, 0.0)?;
            let hat = f.slice(j).to_frequency()?;
            let mut out = Vec::with_capacity(f.channels());
            for k in 0..f.channels() {
                let mut v: Vec<Complex64> =
                    hat.channel(k).iter().zip(&kmult.values).map(|(a, b)| a * b).collect();
                inverse_in_place(grid, &mut v);
                out.push(v[at.x_index]);
            }
            debug_assert_eq!(hat.values().len(), len * f.channels());
            Ok(out)
        })
        .collect::<Result<_, SpectralError>>()?;
    Ok((0..f.channels())
        .map(|k| {
            let mut row: Vec<Complex64> = per_slice.iter().map(|c| c[k]).collect();
            row.resize(f.nt(), Complex64::new(0.0, 0.0));
            row
        })
        .collect())
}

/// `u(t*, x*)` on paths `0..paths`.
pub fn sample_point_values(
    sym: &Symbol,
    f: &SpaceTimeField,
    spec: &NoiseSpec,
    paths: usize,
    at: Observation,
) -> Result<Vec<Complex64>, SpdeError> {
    check_forcing(f, spec)?;
    let weights = observation_weights(sym, f, at)?;
    Ok((0..paths as u64)
        .into_par_iter()
        .map(|path| {
            let dw = sample_brownian_increments(spec, path);
            let mut acc = Complex64::new(0.0, 0.0);
            for (wk, dk) in weights.iter().zip(&dw) {
                for (c, w) in wk.iter().zip(dk).take(at.t_index) {
                    acc += c * w;
                }
            }
            acc
        })
        .collect())
}

/// Paths `0..M` of `u` kept at selected time indices.
#[derive(Clone, Debug)]
pub struct PathEnsemble {
    pub seed: u64,
    pub times: Vec<usize>,
    /// `fields[path][time position]`; path `m` was generated from stream `m`.
    pub fields: Vec<Vec<Field>>,
}

impl PathEnsemble {
    pub fn simulate(
        sym: &Symbol,
        f: &SpaceTimeField,
        spec: &NoiseSpec,
        paths: usize,
        times: &[usize],
    ) -> Result<Self, SpdeError> {
        check_forcing(f, spec)?;
        if let Some(&t) = times.iter().find(|&&t| t >= f.nt()) {
            return Err(SpdeError::Observation(format!("time index {t}")));
        }
        let prop = Propagation::new(sym, f)?;
        let grid = f.grid();
        let len = grid.len();
        let fields = (0..paths as u64)
            .into_par_iter()
            .map(|path| {
                let dw = sample_brownian_increments(spec, path);
                let mut kept = vec![None; times.len()];
                prop.run(len, &dw, |i, u| {
                    for (slot, &t) in kept.iter_mut().zip(times) {
                        if t == i {
                            let mut v = u.to_vec();
                            inverse_in_place(grid, &mut v);
                            *slot = Some(v);
                        }
                    }
                });
                kept.into_iter()
                    .map(|v| Field::from_values(grid, 1, v.expect("time index checked"), Domain::Space))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            seed: spec.seed,
            times: times.to_vec(),
            fields,
        })
    }

    pub fn paths(&self) -> usize {
        self.fields.len()
    }

    /// Values at `(times[time_pos], x_index)` across paths.
    pub fn point_values(&self, time_pos: usize, x_index: usize) -> Vec<Complex64> {
        self.fields.iter().map(|p| p[time_pos].values()[x_index]).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsometryReport {
    /// Monte Carlo estimate of `E|u(t*,x*)|²`.
    pub estimate: MomentEstimate,
    /// `Σ_kj |c_kj|² dt`.
    pub deterministic: f64,
    pub relative_error: f64,
    /// Standard error of the estimate relative to the deterministic value.
    pub relative_std_error: f64,
    /// The deterministic side vanishes.
    pub degenerate: bool,
}

pub fn ito_isometry_check(
    sym: &Symbol,
    f: &SpaceTimeField,
    spec: &NoiseSpec,
    paths: usize,
    at: Observation,
) -> Result<IsometryReport, SpdeError> {
    check_forcing(f, spec)?;
    let weights = observation_weights(sym, f, at)?;
    let sq: Vec<f64> = weights.iter().flatten().map(|c| c.norm_sqr() * spec.dt).collect();
    let deterministic = pairwise_sum(&sq);
    let values = sample_point_values(sym, f, spec, paths, at)?;
    let samples: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    let estimate = MomentEstimate::from_samples(&samples)?;
    let degenerate = deterministic == 0.0;
    let (relative_error, relative_std_error) = if degenerate {
        (0.0, 0.0)
    } else {
        (
            (estimate.value - deterministic).abs() / deterministic,
            estimate.std_error / deterministic,
        )
    };
    Ok(IsometryReport {
        estimate,
        deterministic,
        relative_error,
        relative_std_error,
        degenerate,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentBoundReport {
    pub p: f64,
    pub eta: f64,
    /// `E‖(−Δ)^{η/2}u‖_p^p / ‖|f|_{ℓ₂}‖_p^p`.
    pub estimate: MomentEstimate,
    /// `‖𝒢f‖_p^p / ‖|f|_{ℓ₂}‖_p^p` with the same `η`.
    pub square_majorant: f64,
    pub degenerate: bool,
}

/// Monte Carlo `p`-th moment of `η` derivatives of `u` against the forcing.
pub fn moment_bound_check(
    sym: &Symbol,
    f: &SpaceTimeField,
    spec: &NoiseSpec,
    paths: usize,
    p: f64,
    eta: f64,
) -> Result<MomentBoundReport, SpdeError> {
    if !(p.is_finite() && p >= 2.0) {
        return Err(SpdeError::Exponent(p));
    }
    check_forcing(f, spec)?;
    let f_norm = lp_space_time_norm(&f.norm_sq_pointwise().map(f64::sqrt), p)?.powf(p);
    if f_norm == 0.0 {
        return Ok(MomentBoundReport {
            p,
            eta,
            estimate: MomentEstimate {
                value: 0.0,
                std_error: 0.0,
                paths,
            },
            square_majorant: 0.0,
            degenerate: true,
        });
    }
    let g = square_function(sym, eta, f)?;
    let square_majorant = lp_space_time_norm(&g, p)?.powf(p) / f_norm;
    let prop = Propagation::new(sym, f)?;
    let grid = f.grid();
    let len = grid.len();
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(SquareError::NegativeOrder(eta).into());
    }
    let weights = crate::spectral::eta_weights(grid, eta);
    let cell = grid.cell_volume() * f.dt();
    let samples: Vec<f64> = (0..paths as u64)
        .into_par_iter()
        .map(|path| {
            let dw = sample_brownian_increments(spec, path);
            let mut acc = 0.0;
            prop.run(len, &dw, |_, u| {
                let mut v: Vec<Complex64> = u.iter().zip(&weights).map(|(a, w)| a * w).collect();
                inverse_in_place(grid, &mut v);
                acc += v.iter().map(|z| z.norm().powf(p)).sum::<f64>();
            });
            acc * cell / f_norm
        })
        .collect();
    Ok(MomentBoundReport {
        p,
        eta,
        estimate: MomentEstimate::from_samples(&samples)?,
        square_majorant,
        degenerate: false,
    })
}

/// Excess kurtosis of `Re u` across paths; `None` when the sample has no spread.
pub fn gaussianity_diagnostic(values: &[Complex64]) -> Option<f64> {
    let m = values.len();
    if m < 4 {
        return None;
    }
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let mean = pairwise_sum(&re) / m as f64;
    let c2: Vec<f64> = re.iter().map(|v| (v - mean).powi(2)).collect();
    let c4: Vec<f64> = re.iter().map(|v| (v - mean).powi(4)).collect();
    let m2 = pairwise_sum(&c2) / m as f64;
    let m4 = pairwise_sum(&c4) / m as f64;
    let scale = re.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(m2 > 1e-24 * scale * scale) || m2 == 0.0 {
        return None;
    }
    Some(m4 / (m2 * m2) - 3.0)
}

/// Largest `|u|` over a realisation; convenient for causality and linearity checks.
pub fn max_abs(u: &SpaceTimeField) -> f64 {
    u.slices().iter().map(Field::max_abs).fold(0.0, f64::max)
}

/// `|u|²` pointwise, e.g. for maximal-function diagnostics of a path.
pub fn intensity(u: &SpaceTimeField) -> RealSpaceTime {
    u.norm_sq_pointwise()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{convolve_slice, kernel_hat, SpaceGrid};

    fn single_mode(grid: &SpaceGrid, nt: usize, dt: f64, mode: i64) -> SpaceTimeField {
        let xi0 = std::f64::consts::TAU * mode as f64 / grid.length();
        SpaceTimeField::from_fn(grid, 1, 0.0, dt, nt, |_, _, x| Complex64::from_polar(1.0, xi0 * x[0]))
    }

    #[test]
    fn increments_are_counter_based() {
        let spec = NoiseSpec::new(3, 42, 0.01, 50).unwrap();
        let a = sample_brownian_increments(&spec, 7);
        assert_eq!(a, sample_brownian_increments(&spec, 7));
        assert_ne!(a, sample_brownian_increments(&spec, 8));
        for (k, j) in [(0, 0), (1, 17), (2, 49)] {
            assert_eq!(a[k][j], brownian_increment(&spec, 7, k, j));
        }
    }

    #[test]
    fn increment_moments() {
        let dt = 0.01;
        let spec = NoiseSpec::new(1, 3, dt, 1000).unwrap();
        let draws: Vec<f64> = (0..1000u64)
            .into_par_iter()
            .flat_map(|p| sample_brownian_increments(&spec, p).remove(0))
            .collect();
        assert_eq!(draws.len(), 1_000_000);
        let mean = pairwise_sum(&draws) / 1e6;
        let var = pairwise_sum(&draws.iter().map(|v| (v - mean).powi(2)).collect::<Vec<_>>()) / 1e6;
        assert!(mean.abs() < 4e-3 * dt.sqrt(), "{mean}");
        assert!((var / dt - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn recursion_matches_direct_double_sum() {
        let grid = SpaceGrid::new(1, 32, 8.0).unwrap();
        let dt = 0.02;
        let nt = 25;
        let f = SpaceTimeField::from_fn(&grid, 2, 0.0, dt, nt, |ch, t, x| {
            Complex64::new((-(x[0] - t).powi(2)).exp(), 0.3 * ch as f64 * x[0].sin())
        });
        let spec = NoiseSpec::new(2, 11, dt, nt).unwrap();
        let sym = Symbol::heat();
        let u = stochastic_convolution(&sym, &f, &spec, 5).unwrap();
        let dw = sample_brownian_increments(&spec, 5);
        for i in [0, 1, 9, 24] {
            let mut direct = Field::zeros(&grid, 1, Domain::Space);
            for j in 0..i {
                let kmult = kernel_hat(&sym, f.time(j), f.time(i), 0.0, &grid).unwrap();
                let conv = convolve_slice(&kmult, f.slice(j)).unwrap();
                for k in 0..2 {
                    let part = Field::from_values(&grid, 1, conv.channel(k).to_vec(), Domain::Space).unwrap();
                    direct = direct.add(&part.scaled(Complex64::new(dw[k][j], 0.0))).unwrap();
                }
            }
            assert!(u.slice(i).max_abs_diff(&direct).unwrap() < 1e-12);
        }
    }

    #[test]
    fn single_mode_scalar_oracle() {
        let grid = SpaceGrid::new(1, 16, 6.0).unwrap();
        let (dt, nt) = (0.05, 30);
        let f = single_mode(&grid, nt, dt, 2);
        let spec = NoiseSpec::new(1, 9, dt, nt).unwrap();
        let u = stochastic_convolution(&Symbol::heat(), &f, &spec, 3).unwrap();
        let dw = sample_brownian_increments(&spec, 3);
        let xi0 = std::f64::consts::TAU * 2.0 / 6.0;
        for i in [5, 29] {
            let t = i as f64 * dt;
            let scalar: f64 = (0..i).map(|j| (-xi0 * xi0 * (t - j as f64 * dt)).exp() * dw[0][j]).sum();
            for x in [0, 7] {
                let pos = grid.position(x)[0];
                let want = Complex64::from_polar(1.0, xi0 * pos) * scalar;
                assert!((u.slice(i).values()[x] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_and_causal() {
        let grid = SpaceGrid::new(1, 16, 6.0).unwrap();
        let (dt, nt) = (0.05, 20);
        let f = single_mode(&grid, nt, dt, 1);
        let spec = NoiseSpec::new(1, 1, dt, nt).unwrap();
        let sym = Symbol::heat();
        let u = stochastic_convolution(&sym, &f, &spec, 0).unwrap();
        let u2 = stochastic_convolution(&sym, &f.scaled(Complex64::new(2.0, 0.0)), &spec, 0).unwrap();
        for (a, b) in u.slices().iter().zip(u2.slices()) {
            assert!(a.scaled(Complex64::new(2.0, 0.0)).max_abs_diff(b).unwrap() < 1e-12);
        }
        // perturb increments from step 10 on: slices up to 10 are untouched
        let prop = Propagation::new(&sym, &f).unwrap();
        let mut dw = sample_brownian_increments(&spec, 0);
        for v in &mut dw[0][10..] {
            *v += 1.0;
        }
        let w = convolve_with(&prop, &f, &dw).unwrap();
        for i in 0..=10 {
            assert_eq!(w.slice(i), u.slice(i));
        }
        assert!(w.slice(11).max_abs_diff(u.slice(11)).unwrap() > 0.0);
        let zero = f.scaled(Complex64::new(0.0, 0.0));
        assert_eq!(max_abs(&stochastic_convolution(&sym, &zero, &spec, 0).unwrap()), 0.0);
    }

    #[test]
    fn ensemble_and_point_weights_agree() {
        let grid = SpaceGrid::new(1, 16, 6.0).unwrap();
        let (dt, nt) = (0.05, 20);
        let f = SpaceTimeField::from_fn(&grid, 2, 0.0, dt, nt, |ch, t, x| {
            Complex64::new((-(x[0] + ch as f64).powi(2)).exp() * t, 0.0)
        });
        let spec = NoiseSpec::new(2, 77, dt, nt).unwrap();
        let sym = Symbol::heat();
        let ens = PathEnsemble::simulate(&sym, &f, &spec, 6, &[12, 19]).unwrap();
        assert_eq!(ens.paths(), 6);
        let at = Observation { t_index: 19, x_index: 5 };
        let direct = sample_point_values(&sym, &f, &spec, 6, at).unwrap();
        for (a, b) in ens.point_values(1, 5).iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn isometry_single_mode_and_scaling() {
        let grid = SpaceGrid::new(1, 16, 6.0).unwrap();
        let (dt, nt) = (0.02, 40);
        let f = single_mode(&grid, nt, dt, 1);
        let spec = NoiseSpec::new(1, 2024, dt, nt).unwrap();
        let at = Observation { t_index: 39, x_index: 3 };
        let sym = Symbol::heat();
        let rep = ito_isometry_check(&sym, &f, &spec, 4096, at).unwrap();
        let xi0 = std::f64::consts::TAU / 6.0;
        let closed: f64 = (0..39).map(|j| (-2.0 * xi0 * xi0 * (39 - j) as f64 * dt).exp() * dt).sum();
        assert!((rep.deterministic - closed).abs() < 1e-12 * closed);
        assert!(rep.relative_error < 0.05, "{}", rep.relative_error);
        let big = ito_isometry_check(&sym, &f, &spec, 16384, at).unwrap();
        let ratio = rep.estimate.std_error / big.estimate.std_error;
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
        let zero = f.scaled(Complex64::new(0.0, 0.0));
        assert!(ito_isometry_check(&sym, &zero, &spec, 16, at).unwrap().degenerate);
    }

    #[test]
    fn kurtosis_near_zero_for_gaussian_paths() {
        let grid = SpaceGrid::new(1, 16, 6.0).unwrap();
        let (dt, nt) = (0.02, 30);
        let f = single_mode(&grid, nt, dt, 1);
        let spec = NoiseSpec::new(1, 5, dt, nt).unwrap();
        let at = Observation { t_index: 29, x_index: 0 };
        let values = sample_point_values(&Symbol::heat(), &f, &spec, 10_000, at).unwrap();
        let k = gaussianity_diagnostic(&values).unwrap();
        assert!(k.abs() < 0.15, "{k}");
        let zero = vec![Complex64::new(0.0, 0.0); 100];
        assert_eq!(gaussianity_diagnostic(&zero), None);
    }

    #[test]
    fn moment_bound_p2_tracks_square_function() {
        let grid = SpaceGrid::new(1, 32, 12.0).unwrap();
        let (dt, nt) = (0.01, 60);
        let f = SpaceTimeField::from_fn(&grid, 1, 0.0, dt, nt, |_, t, x| {
            let u = 2.0 * t / (nt as f64 * dt * 0.5) - 1.0;
            Complex64::new(crate::squarefn::corpus::smooth_bump(u) * (-x[0] * x[0]).exp(), 0.0)
        });
        let spec = NoiseSpec::new(1, 8, dt, nt).unwrap();
        let rep = moment_bound_check(&Symbol::heat(), &f, &spec, 2000, 2.0, 1.0).unwrap();
        assert!(rep.square_majorant <= 0.5);
        let gap = (rep.estimate.value - rep.square_majorant).abs();
        assert!(gap <= 0.05 * rep.square_majorant + 3.0 * rep.estimate.std_error, "{rep:?}");
        assert!(moment_bound_check(&Symbol::heat(), &f, &spec, 10, 1.5, 1.0).is_err());
    }

    #[test]
    fn random_coefficients_per_path() {
        let base = FractionalSymbol::constant(2.0, 1.0).unwrap();
        let spec = NoiseSpec::new(1, 4, 0.1, 10).unwrap();
        let a = randomize_fractional(&base, 0.3, &spec, 0).unwrap();
        let b = randomize_fractional(&base, 0.3, &spec, 1).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, randomize_fractional(&base, 0.3, &spec, 0).unwrap());
        let v = a.eval(0.0, &[1.0]).unwrap().re;
        assert!((-1.3..=-0.7).contains(&v));
        let grid = SpaceGrid::new(1, 16, 6.0).unwrap();
        let f = single_mode(&grid, 10, 0.1, 1);
        let u = stochastic_convolution_random(|p| randomize_fractional(&base, 0.3, &spec, p), &f, &spec, 0).unwrap();
        assert_eq!(u, stochastic_convolution(&a, &f, &spec, 0).unwrap());
    }
}
