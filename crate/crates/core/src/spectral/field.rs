use num_complex::Complex64;

use super::{SpaceGrid, SpectralError, MAX_DIM};

/// Which side of the transform a [`Field`] lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Space,
    Frequency,
}

/// `K_H` complex channels sampled on a [`SpaceGrid`].
///
/// Channel `k` occupies `values[k·n^d .. (k+1)·n^d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: SpaceGrid,
    channels: usize,
    values: Vec<Complex64>,
    domain: Domain,
}

impl Field {
    pub fn zeros(grid: &SpaceGrid, channels: usize, domain: Domain) -> Self {
        assert!(channels >= 1, "a field needs at least one channel");
        Self {
            grid: grid.clone(),
            channels,
            values: vec![Complex64::new(0.0, 0.0); channels * grid.len()],
            domain,
        }
    }

    pub fn from_values(
        grid: &SpaceGrid,
        channels: usize,
        values: Vec<Complex64>,
        domain: Domain,
    ) -> Result<Self, SpectralError> {
        if channels == 0 {
            return Err(SpectralError::Shape("zero channels".into()));
        }
        let expected = channels
            .checked_mul(grid.len())
            .ok_or_else(|| SpectralError::Shape("value count overflows".into()))?;
        if values.len() != expected {
            return Err(SpectralError::Shape(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(SpectralError::NonFinite);
        }
        Ok(Self {
            grid: grid.clone(),
            channels,
            values,
            domain,
        })
    }

    /// Samples `f(channel, x)` at every grid node.
    pub fn from_fn<F>(grid: &SpaceGrid, channels: usize, mut f: F) -> Self
    where
        F: FnMut(usize, &[f64]) -> Complex64,
    {
        let mut field = Self::zeros(grid, channels, Domain::Space);
        let d = grid.dim();
        for ch in 0..channels {
            for (i, v) in field.channel_mut(ch).iter_mut().enumerate() {
                let x = grid.position(i);
                *v = f(ch, &x[..d]);
            }
        }
        field
    }

    /// Real scalar field embedded as a single channel.
    pub fn from_real(grid: &SpaceGrid, values: &[f64]) -> Result<Self, SpectralError> {
        let values = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_values(grid, 1, values, Domain::Space)
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn channel(&self, k: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.values[k * len..(k + 1) * len]
    }

    pub fn channel_mut(&mut self, k: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.values[k * len..(k + 1) * len]
    }

    /// `|f(x)|²_H` at every node.
    pub fn norm_sq_pointwise(&self) -> Vec<f64> {
        let len = self.grid.len();
        let mut out = vec![0.0; len];
        for ch in 0..self.channels {
            for (o, v) in out.iter_mut().zip(self.channel(ch)) {
                *o += v.norm_sqr();
            }
        }
        out
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn add(&self, other: &Field) -> Result<Self, SpectralError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(out)
    }

    pub(crate) fn check_compatible(&self, other: &Field) -> Result<(), SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        if self.channels != other.channels || self.domain != other.domain {
            return Err(SpectralError::Shape(
                "channel count or domain differs".into(),
            ));
        }
        Ok(())
    }

    /// Forward transform `f̂(ξ) = h^d Σ_x e^{-ix·ξ} f(x)`.
    pub fn to_frequency(&self) -> Result<Field, SpectralError> {
        if self.domain != Domain::Space {
            return Err(SpectralError::WrongDomain {
                expected: Domain::Space,
            });
        }
        let mut out = self.clone();
        let scale = self.grid.cell_volume();
        let len = self.grid.len();
        for ch in 0..self.channels {
            let data = &mut out.values[ch * len..(ch + 1) * len];
            self.grid.fft_nd(data, false);
            for (i, v) in data.iter_mut().enumerate() {
                *v *= scale * self.grid.center_phase(i);
            }
        }
        out.domain = Domain::Frequency;
        Ok(out)
    }

    /// Inverse transform `f(x) = L^{-d} Σ_ξ e^{ix·ξ} f̂(ξ)`.
    pub fn to_space(&self) -> Result<Field, SpectralError> {
        if self.domain != Domain::Frequency {
            return Err(SpectralError::WrongDomain {
                expected: Domain::Frequency,
            });
        }
        let mut out = self.clone();
        let len = self.grid.len();
        for ch in 0..self.channels {
            let data = &mut out.values[ch * len..(ch + 1) * len];
            inverse_in_place(&self.grid, data);
        }
        out.domain = Domain::Space;
        Ok(out)
    }

    /// Max-abs difference between two compatible fields.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64, SpectralError> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Inverse transform of one frequency-side channel, in place.
pub(crate) fn inverse_in_place(grid: &SpaceGrid, data: &mut [Complex64]) {
    for (i, v) in data.iter_mut().enumerate() {
        *v *= grid.center_phase(i);
    }
    grid.fft_nd(data, true);
    let scale = grid.length().powi(grid.dim() as i32).recip();
    data.iter_mut().for_each(|v| *v *= scale);
}

/// Forward transform of one space-side channel, in place.
pub(crate) fn forward_in_place(grid: &SpaceGrid, data: &mut [Complex64]) {
    grid.fft_nd(data, false);
    let scale = grid.cell_volume();
    for (i, v) in data.iter_mut().enumerate() {
        *v *= scale * grid.center_phase(i);
    }
}

/// Uniform-in-time sequence of [`Field`] slices, `t_i = t0 + i·dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    t0: f64,
    dt: f64,
    slices: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(t0: f64, dt: f64, slices: Vec<Field>) -> Result<Self, SpectralError> {
        if !(dt.is_finite() && dt > 0.0) || !t0.is_finite() {
            return Err(SpectralError::Shape(format!("time step {dt} must be positive")));
        }
        let first = slices
            .first()
            .ok_or_else(|| SpectralError::Shape("no time slices".into()))?;
        for s in &slices[1..] {
            if s.grid != first.grid || s.channels != first.channels {
                return Err(SpectralError::GridMismatch);
            }
            if s.domain != Domain::Space {
                return Err(SpectralError::WrongDomain {
                    expected: Domain::Space,
                });
            }
        }
        if first.domain != Domain::Space {
            return Err(SpectralError::WrongDomain {
                expected: Domain::Space,
            });
        }
        Ok(Self { t0, dt, slices })
    }

    /// Samples `f(channel, t, x)` on the grid and time axis.
    pub fn from_fn<F>(grid: &SpaceGrid, channels: usize, t0: f64, dt: f64, nt: usize, f: F) -> Self
    where
        F: Fn(usize, f64, &[f64]) -> Complex64,
    {
        let slices = (0..nt)
            .map(|i| {
                let t = t0 + i as f64 * dt;
                Field::from_fn(grid, channels, |ch, x| f(ch, t, x))
            })
            .collect();
        Self::new(t0, dt, slices).expect("valid construction")
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nt(&self) -> usize {
        self.slices.len()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn grid(&self) -> &SpaceGrid {
        self.slices[0].grid()
    }

    pub fn channels(&self) -> usize {
        self.slices[0].channels()
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn slice(&self, i: usize) -> &Field {
        &self.slices[i]
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt,
            slices: self.slices.iter().map(|s| s.scaled(factor)).collect(),
        }
    }

    /// Appends `extra` zero slices at the end of the time window.
    pub fn padded(&self, extra: usize) -> Self {
        let mut slices = self.slices.clone();
        let zero = Field::zeros(self.grid(), self.channels(), Domain::Space);
        slices.extend(std::iter::repeat_n(zero, extra));
        Self {
            t0: self.t0,
            dt: self.dt,
            slices,
        }
    }

    /// `|f(t_i, x)|²_H` for every slice.
    pub fn norm_sq_pointwise(&self) -> RealSpaceTime {
        RealSpaceTime {
            grid: self.grid().clone(),
            t0: self.t0,
            dt: self.dt,
            slices: self.slices.iter().map(|s| s.norm_sq_pointwise()).collect(),
        }
    }
}

/// Real scalar values on a space grid × uniform time axis.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSpaceTime {
    pub grid: SpaceGrid,
    pub t0: f64,
    pub dt: f64,
    pub slices: Vec<Vec<f64>>,
}

impl RealSpaceTime {
    pub fn zeros(grid: &SpaceGrid, t0: f64, dt: f64, nt: usize) -> Self {
        Self {
            grid: grid.clone(),
            t0,
            dt,
            slices: vec![vec![0.0; grid.len()]; nt],
        }
    }

    pub fn nt(&self) -> usize {
        self.slices.len()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            t0: self.t0,
            dt: self.dt,
            slices: self
                .slices
                .iter()
                .map(|s| s.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    pub fn max(&self) -> f64 {
        self.slices
            .iter()
            .flat_map(|s| s.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean over all space-time nodes.
    pub fn mean(&self) -> f64 {
        let count = (self.nt() * self.grid.len()) as f64;
        self.slices.iter().flat_map(|s| s.iter()).sum::<f64>() / count
    }

    pub fn value(&self, t: usize, x: usize) -> f64 {
        self.slices[t][x]
    }
}

/// `|ξ|` for a frequency vector truncated to `d` components.
pub fn xi_norm(xi: &[f64; MAX_DIM], d: usize) -> f64 {
    xi[..d].iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(n: usize, l: f64) -> SpaceGrid {
        SpaceGrid::new(1, n, l).unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        for d in 1..=3 {
            let grid = SpaceGrid::new(d, 8, 5.0).unwrap();
            let f = Field::from_fn(&grid, 2, |ch, x| {
                let s: f64 = x.iter().sum();
                Complex64::new((s + ch as f64).sin(), (1.3 * s).cos())
            });
            let back = f.to_frequency().unwrap().to_space().unwrap();
            assert!(f.max_abs_diff(&back).unwrap() < 1e-12);
        }
    }

    #[test]
    fn constant_concentrates_at_zero_mode() {
        let grid = SpaceGrid::new(2, 16, 3.0).unwrap();
        let f = Field::from_fn(&grid, 1, |_, _| Complex64::new(1.0, 0.0));
        let fh = f.to_frequency().unwrap();
        assert!((fh.values()[0] - Complex64::new(9.0, 0.0)).norm() < 1e-12);
        let rest = fh.values()[1..].iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(rest < 1e-12);
    }

    #[test]
    fn single_mode_is_a_delta() {
        let l = 2.0 * PI;
        let grid = grid1(32, l);
        for j in [-16i64, -3, 0, 5, 15] {
            let xi = j as f64;
            let f = Field::from_fn(&grid, 1, |_, x| Complex64::new(0.0, xi * x[0]).exp());
            let fh = f.to_frequency().unwrap();
            for (i, v) in fh.values().iter().enumerate() {
                let expected = if grid.signed_index(i) == j { l } else { 0.0 };
                assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-11, "j={j} i={i}");
            }
        }
    }

    #[test]
    fn wrong_domain_rejected() {
        let grid = grid1(8, 1.0);
        let f = Field::zeros(&grid, 1, Domain::Space);
        assert!(matches!(
            f.to_space(),
            Err(SpectralError::WrongDomain { .. })
        ));
        let fh = f.to_frequency().unwrap();
        assert!(fh.to_frequency().is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let grid = grid1(8, 1.0);
        assert!(Field::from_values(&grid, 1, vec![Complex64::new(0.0, 0.0); 7], Domain::Space).is_err());
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[3].re = f64::INFINITY;
        assert!(matches!(
            Field::from_values(&grid, 1, v, Domain::Space),
            Err(SpectralError::NonFinite)
        ));
    }

    #[test]
    fn space_time_requires_matching_slices() {
        let g1 = grid1(8, 1.0);
        let g2 = grid1(16, 1.0);
        let a = Field::zeros(&g1, 1, Domain::Space);
        let b = Field::zeros(&g2, 1, Domain::Space);
        assert!(SpaceTimeField::new(0.0, 0.1, vec![a.clone(), b]).is_err());
        assert!(SpaceTimeField::new(0.0, 0.0, vec![a.clone()]).is_err());
        assert!(SpaceTimeField::new(0.0, 0.1, vec![]).is_err());
        let st = SpaceTimeField::new(0.0, 0.1, vec![a]).unwrap();
        assert_eq!(st.padded(3).nt(), 4);
    }
}
