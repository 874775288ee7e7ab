//! Discrete Hardy–Littlewood maximal functions and the parabolic sharp
//! function.
//!
//! Balls and intervals are index sets: a ball of radius `k` cells around a
//! node holds every node at periodic distance at most `k·h`, and a time
//! interval of radius `k` holds the slices `i-k..=i+k`. Time is not periodic;
//! data outside the sampled window is taken to be zero, which is exact for
//! the compactly supported inputs the estimates are stated for.

mod sharp;

use rayon::prelude::*;
use thiserror::Error;

use crate::spectral::{Field, RealSpaceTime, SpaceGrid, SpaceTimeField, SpectralError};
use crate::squarefn::SquareError;

pub use sharp::{
    cylinder_maximal, fefferman_stein_check, mean_oscillation, rescale_parabolic, sharp_function, sharp_radii,
    verify_sharp_bound, FeffermanSteinReport, ParabolicCylinder, SharpOptions, SharpReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaximalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Square(#[from] SquareError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Which radii the discrete supremum runs over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RadiusLadder {
    /// `0, 1, 2, 4, …` cells, closed off by the largest radius.
    #[default]
    Dyadic,
    /// Every integer radius.
    Full,
}

impl RadiusLadder {
    /// Integer radii from `0` up to and including `max`.
    pub fn radii(self, max: usize) -> Vec<usize> {
        let mut out = vec![0];
        match self {
            RadiusLadder::Dyadic => {
                let mut k = 1;
                while k < max {
                    out.push(k);
                    k *= 2;
                }
                if max > 0 {
                    out.push(max);
                }
            }
            RadiusLadder::Full => out.extend(1..=max),
        }
        out
    }
}

/// Periodic prefix sums along the contiguous (last) axis of a grid.
pub(crate) struct RowSums {
    n: usize,
    prefix: Vec<f64>,
}

impl RowSums {
    pub(crate) fn new(values: &[f64], n: usize) -> Self {
        let rows = values.len() / n;
        let mut prefix = Vec::with_capacity(rows * (n + 1));
        for row in values.chunks(n) {
            let mut acc = 0.0;
            prefix.push(0.0);
            for v in row {
                acc += v;
                prefix.push(acc);
            }
        }
        Self { n, prefix }
    }

    /// Sum and count of the run `center-w..=center+w` (mod `n`) in `row`.
    pub(crate) fn run(&self, row: usize, center: usize, w: usize) -> (f64, usize) {
        let n = self.n;
        let p = &self.prefix[row * (n + 1)..(row + 1) * (n + 1)];
        if 2 * w + 1 >= n {
            return (p[n], n);
        }
        let start = (center + n - w) % n;
        let end = start + 2 * w + 1;
        let sum = if end <= n {
            p[end] - p[start]
        } else {
            p[n] - p[start] + p[end - n]
        };
        (sum, 2 * w + 1)
    }
}

/// Offsets of the leading axes inside a ball, each with the half-width of
/// the run along the last axis. `radius_sq` is in squared cells; `open`
/// excludes the boundary sphere.
pub(crate) fn ball_stencil(d: usize, n: usize, radius_sq: f64, open: bool) -> Vec<(Vec<i64>, usize)> {
    let inside = |r2: f64| {
        if open {
            r2 < radius_sq * (1.0 - 1e-9)
        } else {
            r2 <= radius_sq * (1.0 + 1e-9)
        }
    };
    // distinct residues per axis: -(n/2 - 1) ..= n/2
    let reach = radius_sq.sqrt().floor() as i64 + 1;
    let lo = -(reach.min(n as i64 / 2 - 1));
    let hi = reach.min(n as i64 / 2);
    let mut out = Vec::new();
    let lead = d - 1;
    let mut offs = vec![lo; lead];
    loop {
        let r2: f64 = offs.iter().map(|&o| (o * o) as f64).sum();
        if inside(r2) {
            let mut w = 0usize;
            while inside(r2 + ((w + 1) * (w + 1)) as f64) && w < n {
                w += 1;
            }
            out.push((offs.clone(), w));
        }
        let mut axis = 0;
        while axis < lead {
            offs[axis] += 1;
            if offs[axis] <= hi {
                break;
            }
            offs[axis] = lo;
            axis += 1;
        }
        if axis == lead {
            break;
        }
    }
    out
}

/// Row number of a flat index once the last axis is dropped.
pub(crate) fn row_of(grid: &SpaceGrid, idx: &[usize], offs: &[i64]) -> usize {
    let n = grid.n() as i64;
    let mut row = 0usize;
    for (a, &o) in offs.iter().enumerate() {
        let i = (idx[a] as i64 + o).rem_euclid(n) as usize;
        row = row * grid.n() + i;
    }
    row
}

/// `𝕄ₓ` of one nonnegative slice.
pub fn maximal_space_values(grid: &SpaceGrid, values: &[f64], ladder: RadiusLadder) -> Vec<f64> {
    let d = grid.dim();
    let n = grid.n();
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let sums = RowSums::new(&abs, n);
    let stencils: Vec<Vec<(Vec<i64>, usize)>> = ladder
        .radii(n / 2)
        .into_iter()
        .map(|k| ball_stencil(d, n, (k * k) as f64, false))
        .collect();
    (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let idx = grid.multi_index(j);
            let last = idx[d - 1];
            let mut best = 0.0f64;
            for stencil in &stencils {
                let mut sum = 0.0;
                let mut count = 0usize;
                for (offs, w) in stencil {
                    let (s, c) = sums.run(row_of(grid, &idx, offs), last, *w);
                    sum += s;
                    count += c;
                }
                best = best.max(sum / count as f64);
            }
            best
        })
        .collect()
}

/// `𝕄ₓ` of the pointwise `H`-norm of a field; returns a one-channel real field.
pub fn maximal_space(f: &Field, ladder: RadiusLadder) -> Result<Field, MaximalError> {
    let norms: Vec<f64> = f.norm_sq_pointwise().into_iter().map(f64::sqrt).collect();
    Ok(Field::from_real(f.grid(), &maximal_space_values(f.grid(), &norms, ladder))?)
}

/// `𝕄ₓ` applied slice by slice.
pub fn maximal_x(g: &RealSpaceTime, ladder: RadiusLadder) -> RealSpaceTime {
    RealSpaceTime {
        grid: g.grid.clone(),
        t0: g.t0,
        dt: g.dt,
        slices: g
            .slices
            .par_iter()
            .map(|s| maximal_space_values(&g.grid, s, ladder))
            .collect(),
    }
}

/// `𝕄ₜ` at every spatial node, with zero extension outside the window.
pub fn maximal_t(g: &RealSpaceTime, ladder: RadiusLadder) -> RealSpaceTime {
    let nt = g.nt();
    let len = g.grid.len();
    let radii = ladder.radii(nt);
    let columns: Vec<Vec<f64>> = (0..len)
        .into_par_iter()
        .map(|x| {
            let mut prefix = Vec::with_capacity(nt + 1);
            let mut acc = 0.0;
            prefix.push(0.0);
            for s in &g.slices {
                acc += s[x].abs();
                prefix.push(acc);
            }
            (0..nt)
                .map(|i| {
                    radii
                        .iter()
                        .map(|&k| {
                            let lo = i.saturating_sub(k);
                            let hi = (i + k + 1).min(nt);
                            (prefix[hi] - prefix[lo]) / (2 * k + 1) as f64
                        })
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    let slices = (0..nt).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    RealSpaceTime {
        grid: g.grid.clone(),
        t0: g.t0,
        dt: g.dt,
        slices,
    }
}

/// `𝕄ₜ` of the pointwise `H`-norm of a space-time field.
pub fn maximal_time(f: &SpaceTimeField, ladder: RadiusLadder) -> RealSpaceTime {
    maximal_t(&f.norm_sq_pointwise().map(f64::sqrt), ladder)
}

/// `𝕄ₜ𝕄ₓ g`.
pub fn maximal_tx(g: &RealSpaceTime, ladder: RadiusLadder) -> RealSpaceTime {
    maximal_t(&maximal_x(g, ladder), ladder)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cell averages of `1_{[a,b]}` on a one-dimensional grid.
    fn indicator_cells(grid: &SpaceGrid, a: f64, b: f64) -> Vec<f64> {
        let h = grid.spacing();
        (0..grid.len())
            .map(|j| {
                let x = grid.position(j)[0];
                let lo = (x - 0.5 * h).max(a);
                let hi = (x + 0.5 * h).min(b);
                ((hi - lo) / h).max(0.0)
            })
            .collect()
    }

    #[test]
    fn ladders() {
        assert_eq!(RadiusLadder::Dyadic.radii(8), vec![0, 1, 2, 4, 8]);
        assert_eq!(RadiusLadder::Dyadic.radii(10), vec![0, 1, 2, 4, 8, 10]);
        assert_eq!(RadiusLadder::Full.radii(3), vec![0, 1, 2, 3]);
        assert_eq!(RadiusLadder::Dyadic.radii(0), vec![0]);
    }

    #[test]
    fn stencil_counts_distinct_nodes() {
        // radius 1 in 2-d: the five-point cross
        let s = ball_stencil(2, 16, 1.0, false);
        assert_eq!(s.iter().map(|(_, w)| 2 * w + 1).sum::<usize>(), 5);
        // a ball of half the period covers the torus exactly once
        let grid = SpaceGrid::new(2, 8, 1.0).unwrap();
        let ones = vec![1.0; 64];
        let sums = RowSums::new(&ones, 8);
        let total: usize = ball_stencil(2, 8, 64.0, false)
            .iter()
            .map(|(o, w)| sums.run(row_of(&grid, &[3, 3, 0], o), 3, *w).1)
            .sum();
        assert_eq!(total, 64);
        assert_eq!(ball_stencil(1, 8, 4.0, true), vec![(vec![], 1)]);
    }

    #[test]
    fn interval_indicator_quarter() {
        let grid = SpaceGrid::new(1, 1024, 20.0).unwrap();
        let f = indicator_cells(&grid, 0.0, 1.0);
        let m = maximal_space_values(&grid, &f, RadiusLadder::Full);
        let h = grid.spacing();
        // grid node nearest to x = 2
        let j = ((2.0 + 10.0) / h).round() as usize;
        assert!((m[j] - 0.25).abs() < 1e-3, "{}", m[j]);
        // away from x = 2 the error stays of relative order h/x
        for jj in [j - 40, j - 3, j + 5, j + 200] {
            let x = grid.position(jj)[0];
            let exact = 0.5 / x;
            assert!((m[jj] - exact).abs() <= exact * h / x, "{} vs {exact}", m[jj]);
        }
        // dyadic radii undercount by a bounded factor
        let dy = maximal_space_values(&grid, &f, RadiusLadder::Dyadic);
        assert!(dy[j] <= m[j] + 1e-15 && dy[j] >= 0.5 * m[j]);
    }

    #[test]
    fn time_indicator_quarter() {
        let grid = SpaceGrid::new(1, 8, 1.0).unwrap();
        let dt = 0.01;
        let nt = 400;
        // 1_{[1,2]} in time, sampled as cell averages on t_i = i·dt
        let slices = (0..nt)
            .map(|i| {
                let t = i as f64 * dt;
                let v = ((t + 0.5 * dt).min(2.0) - (t - 0.5 * dt).max(1.0)).max(0.0) / dt;
                vec![v; 8]
            })
            .collect();
        let g = RealSpaceTime { grid, t0: 0.0, dt, slices };
        let m = maximal_t(&g, RadiusLadder::Full);
        // distance 1 past the right end of the interval
        assert!((m.value(300, 3) - 0.25).abs() < 1e-3, "{}", m.value(300, 3));
        assert!((m.value(150, 5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constants_and_translation() {
        let grid = SpaceGrid::new(2, 16, 4.0).unwrap();
        let c = vec![2.5; 256];
        for v in maximal_space_values(&grid, &c, RadiusLadder::Dyadic) {
            assert!((v - 2.5).abs() < 1e-12);
        }
        let f: Vec<f64> = (0..256).map(|j| ((j * 37) % 11) as f64).collect();
        let m = maximal_space_values(&grid, &f, RadiusLadder::Dyadic);
        // shift by one row and three columns
        let shift = |v: &[f64]| -> Vec<f64> {
            (0..256)
                .map(|j| {
                    let (r, c) = (j / 16, j % 16);
                    v[((r + 15) % 16) * 16 + (c + 13) % 16]
                })
                .collect()
        };
        let ms = maximal_space_values(&grid, &shift(&f), RadiusLadder::Dyadic);
        for (a, b) in ms.iter().zip(shift(&m)) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in m.iter().zip(&f) {
            assert!(a >= b);
        }
    }

    #[test]
    fn time_maximal_commutes_with_space_shift() {
        let grid = SpaceGrid::new(1, 16, 4.0).unwrap();
        let slices: Vec<Vec<f64>> = (0..20)
            .map(|i| (0..16).map(|x| ((i * 7 + x * 3) % 5) as f64).collect())
            .collect();
        let g = RealSpaceTime { grid: grid.clone(), t0: 0.0, dt: 0.1, slices };
        let shifted = g.map(|v| v);
        let shifted = RealSpaceTime {
            slices: shifted
                .slices
                .iter()
                .map(|s| (0..16).map(|x| s[(x + 5) % 16]).collect())
                .collect(),
            ..shifted
        };
        let a = maximal_t(&g, RadiusLadder::Dyadic);
        let b = maximal_t(&shifted, RadiusLadder::Dyadic);
        for i in 0..20 {
            for x in 0..16 {
                assert_eq!(b.value(i, x), a.value(i, (x + 5) % 16));
            }
        }
        let constant = g.map(|_| 3.0);
        let m = maximal_t(&constant, RadiusLadder::Dyadic);
        assert!(m.slices.iter().flatten().all(|&v| (v - 3.0).abs() < 1e-12));
    }
}
