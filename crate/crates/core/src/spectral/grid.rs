use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SpectralError;

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on `[-L/2, L/2)^d` with `n` points per axis.
///
/// Flat indices are row-major with axis 0 slowest. Frequency nodes are
/// `ξ_j = 2πj/L` for `j ∈ [-n/2, n/2)`, stored in FFT order.
#[derive(Clone)]
pub struct SpaceGrid {
    d: usize,
    n: usize,
    length: f64,
    plans: Arc<Plans>,
}

impl fmt::Debug for SpaceGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceGrid")
            .field("d", &self.d)
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for SpaceGrid {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.length == other.length
    }
}

impl SpaceGrid {
    pub fn new(d: usize, n: usize, length: f64) -> Result<Self, SpectralError> {
        if d == 0 || d > MAX_DIM {
            return Err(SpectralError::InvalidGrid(format!(
                "dimension {d} outside 1..={MAX_DIM}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "domain length {length} must be positive and finite"
            )));
        }
        n.checked_pow(d as u32)
            .ok_or_else(|| SpectralError::InvalidGrid("grid size overflows".into()))?;
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            d,
            n,
            length,
            plans: Arc::new(plans),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing `h = L/n`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of grid points, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Frequency spacing `2π/L`.
    pub fn frequency_spacing(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest resolved frequency magnitude along one axis, `πn/L`.
    pub fn max_frequency(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Per-axis integer coordinates of a flat index.
    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        let mut rest = flat;
        for axis in (0..self.d).rev() {
            idx[axis] = rest % self.n;
            rest /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .take(self.d)
            .fold(0usize, |acc, &i| acc * self.n + (i % self.n))
    }

    /// Physical position of a node: `x = -L/2 + i·h` per axis.
    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.d {
            x[axis] = -0.5 * self.length + idx[axis] as f64 * h;
        }
        x
    }

    /// Signed frequency index `j ∈ [-n/2, n/2)` of an FFT-order index.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Frequency vector of a flat frequency-order index.
    pub fn frequency(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let dxi = self.frequency_spacing();
        let mut xi = [0.0; MAX_DIM];
        for axis in 0..self.d {
            xi[axis] = self.signed_index(idx[axis]) as f64 * dxi;
        }
        xi
    }

    /// All frequency vectors in flat order (`d` entries per node).
    pub fn frequencies(&self) -> Vec<[f64; MAX_DIM]> {
        (0..self.len()).map(|i| self.frequency(i)).collect()
    }

    /// `(-1)^{Σ i_a}`, the phase that moves the origin to the grid center.
    pub(crate) fn center_phase(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        let parity: usize = idx.iter().take(self.d).sum();
        if parity % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Unnormalised n-dimensional FFT of one channel in place.
    pub(crate) fn fft_nd(&self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len());
        let fft = if inverse {
            &self.plans.inverse
        } else {
            &self.plans.forward
        };
        let n = self.n;
        // Last axis is contiguous.
        fft.process(data);
        if self.d == 1 {
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.d - 1 {
            let stride = n.pow((self.d - 1 - axis) as u32);
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[start + k * stride];
                    }
                    fft.process(&mut line);
                    for (k, v) in line.iter().enumerate() {
                        data[start + k * stride] = *v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(SpaceGrid::new(1, 12, 1.0).is_err());
        assert!(SpaceGrid::new(1, 4, 1.0).is_err());
        assert!(SpaceGrid::new(0, 8, 1.0).is_err());
        assert!(SpaceGrid::new(4, 8, 1.0).is_err());
        assert!(SpaceGrid::new(1, 8, 0.0).is_err());
        assert!(SpaceGrid::new(1, 8, f64::NAN).is_err());
    }

    #[test]
    fn zero_frequency_appears_once() {
        let grid = SpaceGrid::new(2, 8, 3.0).unwrap();
        let zeros = grid
            .frequencies()
            .iter()
            .filter(|xi| xi[0] == 0.0 && xi[1] == 0.0)
            .count();
        assert_eq!(zeros, 1);
        // node range is [-n/2, n/2)
        let js: Vec<i64> = (0..8).map(|i| grid.signed_index(i)).collect();
        assert_eq!(js, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn index_round_trip() {
        let grid = SpaceGrid::new(3, 8, 1.0).unwrap();
        for flat in [0, 1, 63, 100, 511] {
            let idx = grid.multi_index(flat);
            assert_eq!(grid.flat_index(&idx[..3]), flat);
        }
        let x = grid.position(0);
        assert_eq!(x[0], -0.5);
    }
}
