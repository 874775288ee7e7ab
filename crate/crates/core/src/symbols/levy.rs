use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::SymbolError;

/// Quadrature for the unit sphere `∂B₁`.
///
/// In one dimension this is the counting measure on `{-1, 1}`; in two
/// dimensions the trapezoid rule on equally spaced circle nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereQuadrature {
    d: usize,
    nodes: Vec<[f64; 2]>,
    weight: f64,
}

impl SphereQuadrature {
    pub const DEFAULT_CIRCLE_NODES: usize = 256;

    pub fn new(d: usize, circle_nodes: usize) -> Result<Self, SymbolError> {
        match d {
            1 => Ok(Self {
                d,
                nodes: vec![[-1.0, 0.0], [1.0, 0.0]],
                weight: 1.0,
            }),
            2 => {
                if circle_nodes < 4 {
                    return Err(SymbolError::Invalid(format!(
                        "circle quadrature needs at least 4 nodes, got {circle_nodes}"
                    )));
                }
                let nodes = (0..circle_nodes)
                    .map(|l| {
                        let th = TAU * l as f64 / circle_nodes as f64;
                        [th.cos(), th.sin()]
                    })
                    .collect();
                Ok(Self {
                    d,
                    nodes,
                    weight: TAU / circle_nodes as f64,
                })
            }
            _ => Err(SymbolError::Invalid(format!(
                "Lévy symbols support d ∈ {{1, 2}}, got {d}"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, l: usize) -> &[f64] {
        &self.nodes[l][..self.d]
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `∫ g(w) S₁(dw)` for node values `g`.
    pub fn integrate(&self, values: impl Iterator<Item = f64>) -> f64 {
        self.weight * values.sum::<f64>()
    }
}

/// Symbol of `(-Δ)^k 𝓛₀(t)` for a zero-order homogeneous jump density
/// `m(t, w)`, tabulated on time breakpoints × sphere nodes.
/// `|w·ξ| ≤ DOT_ROUNDING·|ξ|` is indistinguishable from zero in double precision.
const DOT_ROUNDING: f64 = 8.0 * f64::EPSILON;

#[derive(Clone, Debug, PartialEq)]
pub struct LevySymbol {
    k: u32,
    gamma: f64,
    breakpoints: Vec<f64>,
    quadrature: SphereQuadrature,
    density: Vec<Vec<f64>>,
    c1: f64,
    c2: f64,
    n0: f64,
}

impl LevySymbol {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: u32,
        gamma: f64,
        breakpoints: Vec<f64>,
        quadrature: SphereQuadrature,
        density: Vec<Vec<f64>>,
        c1: f64,
        c2: f64,
        n0: f64,
    ) -> Result<Self, SymbolError> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(SymbolError::Invalid(format!("gamma = {gamma} outside (0, 2)")));
        }
        for (name, v) in [("c1", c1), ("c2", c2), ("N0", n0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SymbolError::Invalid(format!("{name} = {v} must be positive")));
            }
        }
        if breakpoints.is_empty() || breakpoints.len() != density.len() {
            return Err(SymbolError::Invalid(
                "density needs one row per time breakpoint".into(),
            ));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(SymbolError::NonFinite);
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SymbolError::Invalid(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        for row in &density {
            if row.len() != quadrature.len() {
                return Err(SymbolError::Invalid(format!(
                    "density row has {} entries, quadrature has {} nodes",
                    row.len(),
                    quadrature.len()
                )));
            }
            if row.iter().any(|&m| !(m.is_finite() && m >= 0.0)) {
                return Err(SymbolError::Invalid(
                    "density values must be finite and nonnegative".into(),
                ));
            }
        }
        Ok(Self {
            k,
            gamma,
            breakpoints,
            quadrature,
            density,
            c1,
            c2,
            n0,
        })
    }

    /// Tabulates `m(t, w)` at the breakpoints and quadrature nodes.
    #[allow(clippy::too_many_arguments)]
    pub fn from_density_fn(
        d: usize,
        k: u32,
        gamma: f64,
        breakpoints: Vec<f64>,
        circle_nodes: usize,
        c1: f64,
        c2: f64,
        n0: f64,
        m: impl Fn(f64, &[f64]) -> f64,
    ) -> Result<Self, SymbolError> {
        let quadrature = SphereQuadrature::new(d, circle_nodes)?;
        let density = breakpoints
            .iter()
            .map(|&t| (0..quadrature.len()).map(|l| m(t, quadrature.node(l))).collect())
            .collect();
        Self::new(k, gamma, breakpoints, quadrature, density, c1, c2, n0)
    }

    /// Time-independent density `m ≡ value`.
    pub fn uniform(d: usize, k: u32, gamma: f64, value: f64) -> Result<Self, SymbolError> {
        Self::from_density_fn(
            d,
            k,
            gamma,
            vec![0.0],
            SphereQuadrature::DEFAULT_CIRCLE_NODES,
            1.0,
            1.0,
            value.min(1.0) * 0.5,
            |_, _| value,
        )
    }

    pub fn dim(&self) -> usize {
        self.quadrature.dim()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `2k + γ`.
    pub fn order(&self) -> f64 {
        2.0 * self.k as f64 + self.gamma
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn quadrature(&self) -> &SphereQuadrature {
        &self.quadrature
    }

    pub fn density(&self) -> &[Vec<f64>] {
        &self.density
    }

    pub fn is_time_independent(&self) -> bool {
        self.density.windows(2).all(|w| w[0] == w[1])
    }

    fn row(&self, t: f64) -> &[f64] {
        let idx = self
            .breakpoints
            .partition_point(|&b| b <= t)
            .saturating_sub(1);
        &self.density[idx]
    }

    pub(crate) fn eval_unchecked(&self, t: f64, xi: &[f64]) -> Complex64 {
        let row = self.row(t);
        let norm_sq: f64 = xi.iter().map(|v| v * v).sum();
        let radial = norm_sq.powi(self.k as i32);
        let norm = norm_sq.sqrt();
        let critical = self.gamma == 1.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, &m) in row.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let w = self.quadrature.node(l);
            let dot: f64 = w.iter().zip(xi).map(|(a, b)| a * b).sum();
            // a node perpendicular to ξ gives rounding noise, which |·|^γ
            // would amplify; |0|^γ · [1 - iφ] := 0, including 0·ln|0| at γ = 1
            if dot.abs() <= DOT_ROUNDING * norm {
                continue;
            }
            let abs = dot.abs();
            let sign = dot.signum();
            let phi = if critical {
                -2.0 / PI * sign * abs.ln()
            } else {
                self.c2 * sign
            };
            acc += Complex64::new(1.0, -phi) * (abs.powf(self.gamma) * m);
        }
        -acc * (self.c1 * radial * self.quadrature.weight())
    }

    /// `∫ w m(t,w) S₁(dw)` by quadrature; must vanish when `γ = 1`.
    pub fn cancellation_vector(&self, t: f64) -> Result<Vec<f64>, SymbolError> {
        if self.gamma != 1.0 {
            return Err(SymbolError::NotCritical(self.gamma));
        }
        if !t.is_finite() {
            return Err(SymbolError::NonFinite);
        }
        let row = self.row(t);
        let d = self.dim();
        Ok((0..d)
            .map(|axis| {
                self.quadrature
                    .integrate((0..row.len()).map(|l| self.quadrature.node(l)[axis] * row[l]))
            })
            .collect())
    }

    /// Samples `sup_{t, |ξ|=1} Re ψ(t,ξ)` over all breakpoints and `directions`
    /// unit vectors (the two points `±1` in one dimension).
    pub fn check_psi7(&self, directions: usize) -> Psi7Report {
        let dirs: Vec<Vec<f64>> = match self.dim() {
            1 => vec![vec![1.0], vec![-1.0]],
            _ => (0..directions.max(4))
                .map(|i| {
                    // offset by half a step so samples avoid the node perpendiculars
                    let th = TAU * (i as f64 + 0.5) / directions.max(4) as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect(),
        };
        let mut sup = f64::NEG_INFINITY;
        for &t in &self.breakpoints {
            for xi in &dirs {
                sup = sup.max(self.eval_unchecked(t, xi).re);
            }
        }
        Psi7Report {
            sup_re: sup,
            n0: self.n0,
            pass: sup <= -self.n0,
        }
    }
}

/// Outcome of the sampled check `sup_{t,|ξ|=1} Re ψ(t,ξ) ≤ -N₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct Psi7Report {
    pub sup_re: f64,
    pub n0: f64,
    pub pass: bool,
}

/// Reference densities used by the structure checks, as `(name, symbol)`.
///
/// Every entry satisfies `sup Re ψ ≤ -N₀` with the stated `N₀`; the
/// `γ = 1` entries are even in `w` so the cancellation condition holds.
pub fn example_densities() -> Vec<(&'static str, LevySymbol)> {
    let n = SphereQuadrature::DEFAULT_CIRCLE_NODES;
    let build = |d, k, gamma, n0, m: fn(f64, &[f64]) -> f64| {
        LevySymbol::from_density_fn(d, k, gamma, vec![0.0, 1.0], n, 1.0, 1.0, n0, m)
            .expect("example density is valid")
    };
    vec![
        ("uniform-1d-half", build(1, 0, 0.5, 1.0, |_, _| 1.0)),
        ("asymmetric-1d", build(1, 0, 1.5, 1.0, |t, w| if w[0] > 0.0 { 2.0 + t } else { 1.0 })),
        ("uniform-2d", build(2, 0, 0.5, 1.0, |_, _| 1.0)),
        (
            "even-cos2-2d-critical",
            build(2, 0, 1.0, 1.0, |t, w| 1.0 + 0.5 * (2.0 * w[0] * w[0] - 1.0) * (1.0 - 0.5 * t)),
        ),
        (
            "quarter-arc-2d",
            build(2, 1, 0.7, 0.1, |_, w| if w[0] >= 0.0 && w[1] >= 0.0 { 1.0 } else { 0.0 }),
        ),
    ]
}
