//! Seeded test corpus of space-time data.
//!
//! Every corpus function is a continuum object (Gaussian bumps and a
//! band-limited trigonometric noise term, each switched on by a smooth
//! compactly supported time bump), so it can be sampled on any grid. Time
//! supports are given as fractions of the sampling window and lie inside
//! `[0.05, 0.55]`, leaving the second half of the window for the square
//! function to decay. Odd-numbered functions carry three `H`-channels, even
//! ones a single channel.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::spectral::{SpaceGrid, SpaceTimeField};

/// `exp(1 - 1/(1 - u²))` on `(-1, 1)`, zero outside; equals one at `u = 0`.
pub fn smooth_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Time window `[start, start + width]` as fractions of the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeBump {
    pub start: f64,
    pub width: f64,
}

impl TimeBump {
    pub fn eval(&self, tau: f64) -> f64 {
        let u = 2.0 * (tau - self.start) / self.width - 1.0;
        smooth_bump(u)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub sigma: f64,
    pub amplitude: Complex64,
    pub time: TimeBump,
}

/// Band-limited noise `Σ_j c_j e^{i(2π/L)j·x}` over integer wave vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTerm {
    pub modes: Vec<(Vec<i64>, Complex64)>,
    pub time: TimeBump,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusChannel {
    pub bumps: Vec<GaussianBump>,
    pub noise: NoiseTerm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusFunction {
    pub index: usize,
    pub channels: Vec<CorpusChannel>,
}

impl CorpusFunction {
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Value at `(channel, τ, x)` with `τ ∈ [0,1]` the window fraction and
    /// `length` the period of the noise modes.
    pub fn eval(&self, ch: usize, tau: f64, x: &[f64], length: f64) -> Complex64 {
        let c = &self.channels[ch];
        let mut acc = Complex64::new(0.0, 0.0);
        for b in &c.bumps {
            let phi = b.time.eval(tau);
            if phi == 0.0 {
                continue;
            }
            let r2: f64 = x.iter().zip(&b.center).map(|(a, m)| (a - m) * (a - m)).sum();
            acc += b.amplitude * (phi * (-0.5 * r2 / (b.sigma * b.sigma)).exp());
        }
        let phi = c.noise.time.eval(tau);
        if phi != 0.0 {
            let k = TAU / length;
            for (j, coeff) in &c.noise.modes {
                let phase: f64 = j.iter().zip(x).map(|(&ja, &xa)| ja as f64 * k * xa).sum();
                acc += coeff * Complex64::from_polar(phi, phase);
            }
        }
        acc
    }

    /// Samples on `grid` × `{0, dt, …, (nt-1)dt}`; the horizon is `nt·dt`.
    pub fn sample(&self, grid: &SpaceGrid, dt: f64, nt: usize) -> SpaceTimeField {
        let horizon = nt as f64 * dt;
        let length = grid.length();
        SpaceTimeField::from_fn(grid, self.channel_count(), 0.0, dt, nt, |ch, t, x| {
            self.eval(ch, t / horizon, x, length)
        })
    }
}

struct Uniform(ChaCha20Rng);

impl Uniform {
    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }

    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next() * (hi - lo + 1) as f64).floor() as i64
    }
}

/// Parameters that size the corpus to a physical domain.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
    pub dim: usize,
    /// Domain length `L`; bump centres stay in `[-L/8, L/8]^d`.
    pub length: f64,
    /// Bump widths are drawn from `[sigma_min, 2·sigma_min]`.
    pub sigma_min: f64,
    /// Largest integer wave number per axis of the noise term.
    pub max_mode: i64,
}

impl CorpusSpec {
    pub fn new(seed: u64, count: usize, dim: usize, length: f64) -> Self {
        Self {
            seed,
            count,
            dim,
            length,
            sigma_min: 0.6,
            max_mode: 2,
        }
    }

    pub fn generate(&self) -> Vec<CorpusFunction> {
        let mut rng = Uniform(ChaCha20Rng::seed_from_u64(self.seed));
        (0..self.count)
            .map(|index| {
                let channels = if index % 2 == 1 { 3 } else { 1 };
                let channels = (0..channels).map(|_| self.channel(&mut rng)).collect();
                CorpusFunction { index, channels }
            })
            .collect()
    }

    fn time_bump(&self, rng: &mut Uniform) -> TimeBump {
        let width = rng.range(0.2, 0.4);
        let start = rng.range(0.05, 0.55 - width);
        TimeBump { start, width }
    }

    fn channel(&self, rng: &mut Uniform) -> CorpusChannel {
        let bump_count = 1 + rng.int(0, 2) as usize;
        let spread = self.length / 8.0;
        let bumps = (0..bump_count)
            .map(|_| GaussianBump {
                center: (0..self.dim).map(|_| rng.range(-spread, spread)).collect(),
                sigma: rng.range(self.sigma_min, 2.0 * self.sigma_min),
                amplitude: Complex64::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
                time: self.time_bump(rng),
            })
            .collect();
        let mut modes = Vec::new();
        let m = self.max_mode;
        let mut j = vec![-m; self.dim];
        loop {
            let norm2: i64 = j.iter().map(|v| v * v).sum();
            if norm2 > 0 {
                let scale = 0.3 / (1.0 + norm2 as f64);
                modes.push((
                    j.clone(),
                    Complex64::new(rng.range(-scale, scale), rng.range(-scale, scale)),
                ));
            }
            let mut axis = 0;
            while axis < self.dim {
                j[axis] += 1;
                if j[axis] <= m {
                    break;
                }
                j[axis] = -m;
                axis += 1;
            }
            if axis == self.dim {
                break;
            }
        }
        CorpusChannel {
            bumps,
            noise: NoiseTerm {
                modes,
                time: self.time_bump(rng),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_shaped() {
        let spec = CorpusSpec::new(7, 6, 1, 20.0);
        let a = spec.generate();
        assert_eq!(a, spec.generate());
        assert_eq!(a.len(), 6);
        assert_eq!(a[0].channel_count(), 1);
        assert_eq!(a[1].channel_count(), 3);
        assert_ne!(a, CorpusSpec::new(8, 6, 1, 20.0).generate());
    }

    #[test]
    fn compact_in_time() {
        let spec = CorpusSpec::new(1, 4, 2, 16.0);
        let grid = SpaceGrid::new(2, 16, 16.0).unwrap();
        for func in spec.generate() {
            let f = func.sample(&grid, 0.01, 40);
            assert!(f.slice(0).max_abs() == 0.0);
            assert!(f.slice(39).max_abs() == 0.0);
            assert!(f.slices().iter().any(|s| s.max_abs() > 0.0));
        }
    }

    #[test]
    fn bump_profile() {
        assert_eq!(smooth_bump(0.0), 1.0);
        assert_eq!(smooth_bump(1.0), 0.0);
        assert!(smooth_bump(0.5) > 0.0 && smooth_bump(0.5) < 1.0);
    }
}
