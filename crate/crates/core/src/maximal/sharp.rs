use rayon::prelude::*;

use super::{ball_stencil, maximal_tx, MaximalError, RadiusLadder};
use crate::spectral::{RealSpaceTime, SpaceGrid, SpaceTimeField};
use crate::squarefn::{lp_space_time_norm, square_function};
use crate::symbols::Symbol;

/// `(s - R, s + R) × B_{R^{δ₀}}(y)`, open in both variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicCylinder {
    pub s: f64,
    pub y: Vec<f64>,
    pub radius: f64,
    pub delta0: f64,
}

impl ParabolicCylinder {
    pub fn new(s: f64, y: Vec<f64>, radius: f64, delta0: f64) -> Result<Self, MaximalError> {
        if !(radius.is_finite() && radius > 0.0 && delta0.is_finite() && delta0 > 0.0) {
            return Err(MaximalError::InvalidParameter(format!(
                "cylinder needs R > 0 and delta0 > 0, got R = {radius}, delta0 = {delta0}"
            )));
        }
        Ok(Self { s, y, radius, delta0 })
    }

    pub fn space_radius(&self) -> f64 {
        self.radius.powf(self.delta0)
    }

    /// Membership on the torus of side `length`.
    pub fn contains(&self, t: f64, x: &[f64], length: f64) -> bool {
        if (t - self.s).abs() >= self.radius * (1.0 - 1e-9) {
            return false;
        }
        let r2: f64 = x
            .iter()
            .zip(&self.y)
            .map(|(a, b)| {
                let d = (a - b).rem_euclid(length);
                let d = d.min(length - d);
                d * d
            })
            .sum();
        let rho = self.space_radius();
        r2 < rho * rho * (1.0 - 1e-9)
    }
}

/// `(1/|Q|)∫_Q |g - g_Q|` by direct enumeration of the grid nodes in `Q`;
/// `None` when no node lies inside.
pub fn mean_oscillation(g: &RealSpaceTime, q: &ParabolicCylinder) -> Option<f64> {
    let d = g.grid.dim();
    let length = g.grid.length();
    let mut vals = Vec::new();
    for (i, slice) in g.slices.iter().enumerate() {
        let t = g.t0 + i as f64 * g.dt;
        for (j, v) in slice.iter().enumerate() {
            if q.contains(t, &g.grid.position(j)[..d], length) {
                vals.push(*v);
            }
        }
    }
    if vals.is_empty() {
        return None;
    }
    Some(oscillation(&vals))
}

fn oscillation(vals: &[f64]) -> f64 {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    vals.iter().map(|v| (v - mean).abs()).sum::<f64>() / n
}

fn average_abs(vals: &[f64]) -> f64 {
    vals.iter().map(|v| v.abs()).sum::<f64>() / vals.len() as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SharpOptions {
    /// Ladder of `R` for cylinders (in units of `dt`) and of radii for the
    /// maximal functions.
    pub ladder: RadiusLadder,
    /// Largest cylinder half-length `R`; unbounded when `None`.
    pub max_radius: Option<f64>,
}

/// Cylinder half-lengths `R`: `dt·2^k` (dyadic) or `k·dt` up to the window
/// and then doubling (full), stopping once a cylinder spans the whole
/// window in time and the whole torus in space.
pub fn sharp_radii(grid: &SpaceGrid, dt: f64, nt: usize, delta0: f64, opts: &SharpOptions) -> Vec<f64> {
    let half_diag = 0.5 * grid.length() * (grid.dim() as f64).sqrt();
    let horizon = nt as f64 * dt;
    let covered = |r: f64| r >= horizon && r.powf(delta0) > half_diag;
    let cap = opts.max_radius.unwrap_or(f64::INFINITY);
    let mut out = Vec::new();
    let mut k = 1usize;
    loop {
        let r = match opts.ladder {
            RadiusLadder::Dyadic => dt * (1u64 << (k - 1).min(62)) as f64,
            RadiusLadder::Full if k <= nt => dt * k as f64,
            RadiusLadder::Full => horizon * (1u64 << (k - nt).min(62)) as f64,
        };
        if r > cap * (1.0 + 1e-12) {
            break;
        }
        out.push(r);
        if covered(r) || out.len() > 4096 {
            break;
        }
        k += 1;
    }
    out
}

/// One level of the cylinder family: lattice of centres and the node sets
/// of the cylinders around them.
struct Level {
    half_slices: usize,
    time_centers: Vec<usize>,
    /// Spatial node lists, one per lattice centre.
    balls: Vec<Vec<usize>>,
}

fn level(grid: &SpaceGrid, nt: usize, dt: f64, radius: f64, delta0: f64) -> Level {
    let d = grid.dim();
    let n = grid.n();
    // open interval: |j - c|·dt < R
    let ratio = radius / dt;
    let mut half_slices = (ratio * (1.0 - 1e-9)).ceil() as usize;
    half_slices = half_slices.saturating_sub(1).min(nt);
    let time_stride = half_slices.max(1);
    let time_centers: Vec<usize> = (0..nt).step_by(time_stride).collect();

    let q = radius.powf(delta0) / grid.spacing();
    let stencil = ball_stencil(d, n, q * q, true);
    let space_stride = ((q / (d as f64).sqrt()).floor() as usize).clamp(1, n);
    let axis_centers: Vec<usize> = (0..n).step_by(space_stride).collect();
    let mut centers = vec![Vec::new()];
    for _ in 0..d {
        centers = centers
            .into_iter()
            .flat_map(|c: Vec<usize>| {
                axis_centers.iter().map(move |&a| {
                    let mut c = c.clone();
                    c.push(a);
                    c
                })
            })
            .collect();
    }
    let balls = centers
        .par_iter()
        .map(|c| {
            let mut nodes = Vec::new();
            let ni = n as i64;
            for (offs, w) in &stencil {
                let mut idx = [0usize; crate::spectral::MAX_DIM];
                for a in 0..d - 1 {
                    idx[a] = (c[a] as i64 + offs[a]).rem_euclid(ni) as usize;
                }
                let span = if 2 * w + 1 >= n { n } else { 2 * w + 1 };
                let start = if span == n { 0 } else { (c[d - 1] + n - w) % n };
                for k in 0..span {
                    idx[d - 1] = (start + k) % n;
                    nodes.push(grid.flat_index(&idx[..d]));
                }
            }
            nodes
        })
        .collect();
    Level {
        half_slices,
        time_centers,
        balls,
    }
}

/// Supremum of `stat` over the cylinders of the family containing each node.
fn cylinder_sup(
    g: &RealSpaceTime,
    delta0: f64,
    opts: &SharpOptions,
    stat: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<RealSpaceTime, MaximalError> {
    if !(delta0.is_finite() && delta0 > 0.0) {
        return Err(MaximalError::InvalidParameter(format!("delta0 = {delta0}")));
    }
    if !(g.dt.is_finite() && g.dt > 0.0) {
        return Err(MaximalError::InvalidParameter(format!("dt = {}", g.dt)));
    }
    let nt = g.nt();
    let len = g.grid.len();
    let mut out = vec![vec![0.0f64; len]; nt];
    for r in sharp_radii(&g.grid, g.dt, nt, delta0, opts) {
        let lv = level(&g.grid, nt, g.dt, r, delta0);
        let m = lv.half_slices;
        let values: Vec<Vec<f64>> = lv
            .time_centers
            .par_iter()
            .map(|&c| {
                let lo = c.saturating_sub(m);
                let hi = (c + m + 1).min(nt);
                let mut buf = Vec::new();
                lv.balls
                    .iter()
                    .map(|ball| {
                        buf.clear();
                        for slice in &g.slices[lo..hi] {
                            buf.extend(ball.iter().map(|&j| slice[j]));
                        }
                        stat(&buf)
                    })
                    .collect()
            })
            .collect();
        out.par_iter_mut().enumerate().for_each(|(i, row)| {
            for (ci, &c) in lv.time_centers.iter().enumerate() {
                if c.abs_diff(i) > m {
                    continue;
                }
                for (ball, &v) in lv.balls.iter().zip(&values[ci]) {
                    for &j in ball {
                        if v > row[j] {
                            row[j] = v;
                        }
                    }
                }
            }
        });
    }
    Ok(RealSpaceTime {
        grid: g.grid.clone(),
        t0: g.t0,
        dt: g.dt,
        slices: out,
    })
}

/// `g♯`: supremum of the mean oscillation over the cylinders of the family
/// that contain each node. Cylinders are clipped to the time window and wrap
/// periodically in space.
pub fn sharp_function(g: &RealSpaceTime, delta0: f64, opts: &SharpOptions) -> Result<RealSpaceTime, MaximalError> {
    cylinder_sup(g, delta0, opts, oscillation)
}

/// Supremum of `|g|` averages over the same cylinder family as [`sharp_function`].
pub fn cylinder_maximal(g: &RealSpaceTime, delta0: f64, opts: &SharpOptions) -> Result<RealSpaceTime, MaximalError> {
    cylinder_sup(g, delta0, opts, average_abs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SharpReport {
    pub delta0: f64,
    /// `sup (𝒢f)♯ / (𝕄ₜ𝕄ₓ|f|²_H)^{1/2}` over the grid, with `0/0 = 0`.
    pub sup_ratio: f64,
    /// `(time index, flat space index)` of the supremum.
    pub argmax: (usize, usize),
    pub sharp_max: f64,
    pub finite: bool,
}

/// Pointwise ratio of the sharp function of the square function to the
/// root of the iterated maximal function of `|f|²_H`.
pub fn verify_sharp_bound(
    sym: &Symbol,
    eta: f64,
    f: &SpaceTimeField,
    delta0: f64,
    opts: &SharpOptions,
) -> Result<SharpReport, MaximalError> {
    let g = square_function(sym, eta, f)?;
    let sharp = sharp_function(&g, delta0, opts)?;
    let mm = maximal_tx(&f.norm_sq_pointwise(), opts.ladder);
    let mut best = 0.0f64;
    let mut argmax = (0, 0);
    for (i, (a, b)) in sharp.slices.iter().zip(&mm.slices).enumerate() {
        for (j, (&s, &m)) in a.iter().zip(b).enumerate() {
            let r = if s == 0.0 { 0.0 } else { s / m.sqrt() };
            if r > best || r.is_nan() {
                best = r;
                argmax = (i, j);
            }
        }
    }
    Ok(SharpReport {
        delta0,
        sup_ratio: best,
        argmax,
        sharp_max: sharp.max(),
        finite: best.is_finite(),
    })
}

/// `f_c(t, x) = f(c^γ t, c x)` on the grid of side `L/c` and step `dt/c^γ`,
/// reusing the samples of `f`.
pub fn rescale_parabolic(f: &SpaceTimeField, c: f64, gamma: f64) -> Result<SpaceTimeField, MaximalError> {
    if !(c.is_finite() && c > 0.0 && gamma.is_finite() && gamma > 0.0) {
        return Err(MaximalError::InvalidParameter(format!("c = {c}, gamma = {gamma}")));
    }
    let grid = f.grid();
    let scaled = SpaceGrid::new(grid.dim(), grid.n(), grid.length() / c)?;
    let ct = c.powf(gamma);
    let slices = f
        .slices()
        .iter()
        .map(|s| crate::spectral::Field::from_values(&scaled, s.channels(), s.values().to_vec(), s.domain()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpaceTimeField::new(f.t0() / ct, f.dt() / ct, slices)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeffermanSteinReport {
    pub p: f64,
    pub norm: f64,
    pub sharp_norm: f64,
    /// `‖h - mean‖_p / ‖(h - mean)♯‖_p`; zero when degenerate.
    pub ratio: f64,
    /// `h` is constant, so both sides vanish.
    pub degenerate: bool,
}

pub fn fefferman_stein_check(
    h: &RealSpaceTime,
    p: f64,
    delta0: f64,
    opts: &SharpOptions,
) -> Result<FeffermanSteinReport, MaximalError> {
    if !(p.is_finite() && p > 1.0) {
        return Err(MaximalError::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    let mean = h.mean();
    let centred = h.map(|v| v - mean);
    let scale = h.map(f64::abs).max();
    let spread = centred.map(f64::abs).max();
    if !(spread > 1e-14 * scale) {
        return Ok(FeffermanSteinReport {
            p,
            norm: 0.0,
            sharp_norm: 0.0,
            ratio: 0.0,
            degenerate: true,
        });
    }
    let sharp = sharp_function(&centred, delta0, opts)?;
    let norm = lp_space_time_norm(&centred, p)?;
    let sharp_norm = lp_space_time_norm(&sharp, p)?;
    Ok(FeffermanSteinReport {
        p,
        norm,
        sharp_norm,
        ratio: norm / sharp_norm,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(grid: &SpaceGrid, nt: usize, dt: f64, f: impl Fn(f64, &[f64]) -> f64) -> RealSpaceTime {
        let slices = (0..nt)
            .map(|i| {
                (0..grid.len())
                    .map(|j| f(i as f64 * dt, &grid.position(j)[..grid.dim()]))
                    .collect()
            })
            .collect();
        RealSpaceTime {
            grid: grid.clone(),
            t0: 0.0,
            dt,
            slices,
        }
    }

    #[test]
    fn constants_have_no_oscillation() {
        let grid = SpaceGrid::new(2, 16, 4.0).unwrap();
        let g = field(&grid, 12, 0.1, |_, _| 3.0);
        let s = sharp_function(&g, 0.5, &SharpOptions::default()).unwrap();
        assert_eq!(s.max(), 0.0);
        let fs = fefferman_stein_check(&g, 2.0, 0.5, &SharpOptions::default()).unwrap();
        assert!(fs.degenerate && fs.ratio == 0.0);
    }

    #[test]
    fn linear_profile_matches_direct_oscillation() {
        let grid = SpaceGrid::new(1, 256, 32.0).unwrap();
        let h = grid.spacing();
        let dt = 0.05;
        let g = field(&grid, 40, dt, |_, x| x[0]);
        let delta0 = 0.5;
        let opts = SharpOptions {
            max_radius: Some(dt * 64.0),
            ..Default::default()
        };
        let s = sharp_function(&g, delta0, &opts).unwrap();
        let coarsest = *sharp_radii(&grid, dt, 40, delta0, &opts).last().unwrap();
        assert_eq!(coarsest, dt * 64.0);
        // centre node, far from the periodic seam
        let cyl = ParabolicCylinder::new(1.0, vec![0.0], coarsest, delta0).unwrap();
        let direct = mean_oscillation(&g, &cyl).unwrap();
        let r = ((coarsest.sqrt() / h) * (1.0 - 1e-9)).floor();
        assert!((direct - h * r * (r + 1.0) / (2.0 * r + 1.0)).abs() < 1e-12);
        assert!((s.value(20, 128) - direct).abs() < 1e-12, "{} vs {direct}", s.value(20, 128));
        // smaller cylinders oscillate less, proportionally to R^δ₀
        let small = ParabolicCylinder::new(1.0, vec![0.0], coarsest / 16.0, delta0).unwrap();
        let ratio = direct / mean_oscillation(&g, &small).unwrap();
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn lattice_values_are_direct_oscillations() {
        let grid = SpaceGrid::new(1, 32, 8.0).unwrap();
        let g = field(&grid, 16, 0.1, |t, x| (1.3 * x[0]).sin() * (t + 0.2) + 0.1 * x[0] * x[0]);
        let delta0 = 0.5;
        let opts = SharpOptions::default();
        let s = sharp_function(&g, delta0, &opts).unwrap();
        let length = grid.length();
        // brute force over all cylinders centred on nodes with the same radii
        let radii = sharp_radii(&grid, 0.1, 16, delta0, &opts);
        for &(i, j) in &[(0usize, 0usize), (7, 11), (15, 31), (9, 16)] {
            let t = i as f64 * 0.1;
            let x = grid.position(j)[0];
            let mut best = 0.0f64;
            for &r in &radii {
                for ci in 0..16 {
                    for cj in 0..32 {
                        let cyl = ParabolicCylinder::new(ci as f64 * 0.1, vec![grid.position(cj)[0]], r, delta0).unwrap();
                        if cyl.contains(t, &[x], length) {
                            best = best.max(mean_oscillation(&g, &cyl).unwrap());
                        }
                    }
                }
            }
            // the lattice family is a subfamily of all node-centred cylinders
            assert!(s.value(i, j) <= best + 1e-12);
            assert!(s.value(i, j) >= 0.25 * best, "{} vs {best}", s.value(i, j));
        }
    }

    #[test]
    fn sharp_below_twice_cylinder_maximal() {
        let grid = SpaceGrid::new(2, 16, 6.0).unwrap();
        let g = field(&grid, 10, 0.2, |t, x| (x[0] - t).cos() * x[1].sin() + t);
        let opts = SharpOptions::default();
        let s = sharp_function(&g, 0.5, &opts).unwrap();
        for c in [0.0, 0.7, -1.3] {
            let m = cylinder_maximal(&g.map(|v| v - c), 0.5, &opts).unwrap();
            for (a, b) in s.slices.iter().flatten().zip(m.slices.iter().flatten()) {
                assert!(*a <= 2.0 * b + 1e-12);
            }
        }
    }

    #[test]
    fn fefferman_stein_homogeneous() {
        let grid = SpaceGrid::new(1, 64, 10.0).unwrap();
        let g = field(&grid, 20, 0.05, |t, x| (-(x[0] - t).powi(2)).exp());
        let opts = SharpOptions::default();
        let a = fefferman_stein_check(&g, 3.0, 0.5, &opts).unwrap();
        let b = fefferman_stein_check(&g.map(|v| 2.0 * v), 3.0, 0.5, &opts).unwrap();
        assert!(!a.degenerate && a.ratio.is_finite() && a.ratio > 0.0);
        assert!((a.ratio - b.ratio).abs() < 1e-12 * a.ratio);
        assert!(fefferman_stein_check(&g, 1.0, 0.5, &opts).is_err());
    }

    #[test]
    fn radii_ladders_terminate() {
        let grid = SpaceGrid::new(1, 64, 20.0).unwrap();
        let r = sharp_radii(&grid, 0.01, 100, 0.25, &SharpOptions::default());
        assert_eq!(r[0], 0.01);
        let last = *r.last().unwrap();
        assert!(last >= 1.0 && last.powf(0.25) > 10.0);
        let full = sharp_radii(&grid, 0.01, 10, 0.5, &SharpOptions { ladder: RadiusLadder::Full, max_radius: None });
        assert_eq!(&full[..3], &[0.01, 0.02, 0.03]);
    }
}
