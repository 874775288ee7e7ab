//! Experiment configuration.
//!
//! One JSON file per experiment. Every block is optional; defaults give a
//! one-dimensional heat-kernel run on a 128-point grid. A complete example:
//!
//! ```json
//! {
//!   "suite": "lp-ratio",
//!   "symbols": [
//!     { "family": "heat" },
//!     { "family": "fractional", "gamma": 1.0, "coefficient": [1.0, 0.2] },
//!     { "family": "fractional", "gamma": 2.0,
//!       "coefficient": { "breakpoints": [0.0, 0.5], "values": [1.0, [2.0, -0.5]] },
//!       "nu": 0.25 },
//!     { "family": "polyharmonic", "d": 1, "m": 2 },
//!     { "family": "polyform", "d": 1, "m": 1, "nu": 0.5,
//!       "terms": [ { "alpha": [1], "beta": [1], "coefficient": [1.0, 0.3] } ] },
//!     { "family": "levy", "d": 1, "k": 0, "gamma": 0.5, "density": 1.0 },
//!     { "family": "levy", "d": 1, "gamma": 1.5, "density": { "example": "asymmetric-1d" } }
//!   ],
//!   "grid": { "d": 1, "n": 128, "L": 20.0, "nt": 128, "dt": 0.01 },
//!   "corpus": { "seed": 7, "count": 20 },
//!   "p": [2.0, 4.0, 8.0],
//!   "mc": { "M": 4096, "K": 1, "seed": 1 },
//!   "output": { "dir": "out" }
//! }
//! ```
//!
//! Coefficients are a real number, an `[re, im]` pair, or a piecewise-constant
//! table `{ "breakpoints": [...], "values": [...] }` whose values are numbers
//! or pairs. Lévy densities are a constant, a table with one row per time
//! breakpoint and one column per sphere node, or `{ "example": NAME }`.
//! `symbol` (a single block) and `symbols` (a list) may be combined; the
//! single block runs first.

use std::path::Path;

use paleyscope_core::spectral::SpaceGrid;
use paleyscope_core::symbols::{
    example_densities, FractionalSymbol, LevySymbol, PiecewiseConstant, PolyFormSymbol, PolyTerm, SphereQuadrature,
    Symbol,
};
use paleyscope_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Names accepted as the suite selector.
pub const SUITES: &[&str] = &["assumptions", "lp-ratio", "sharp-bound", "spde", "exponents", "kernel-dump"];

/// Maps aliases onto canonical suite names.
pub fn canonical_suite(name: &str) -> Option<&'static str> {
    match name {
        "verify-assumptions" => Some("assumptions"),
        other => SUITES.iter().copied().find(|s| *s == other),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolConfig>,
    #[serde(default)]
    pub symbols: Vec<SymbolConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub samples: SampleConfig,
    #[serde(default)]
    pub sharp: SharpConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_p() -> Vec<f64> {
    vec![2.0]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: None,
            symbol: None,
            symbols: Vec::new(),
            grid: GridConfig::default(),
            corpus: CorpusConfig::default(),
            p: default_p(),
            mc: McConfig::default(),
            samples: SampleConfig::default(),
            sharp: SharpConfig::default(),
            kernel: KernelConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub nt: usize,
    pub dt: f64,
    /// Three-dimensional grids are large; they must be asked for explicitly.
    #[serde(default)]
    pub allow_3d: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            d: 1,
            n: 128,
            length: 20.0,
            nt: 128,
            dt: 0.01,
            allow_3d: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self { seed: 7, count: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(rename = "M")]
    pub paths: usize,
    #[serde(rename = "K")]
    pub modes: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 4096,
            modes: 1,
            seed: 1,
        }
    }
}

/// Frequencies and start times at which the `L₂` kernel constant is sampled,
/// in addition to every nonzero grid frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub directions: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-2,
            r_max: 1e2,
            radii: 64,
            directions: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LadderConfig {
    #[default]
    Dyadic,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SharpConfig {
    #[serde(default)]
    pub ladder: LadderConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_radius: Option<f64>,
}

/// Kernel `K(t, s)` written by `kernel-dump`; `t` defaults to `nt·dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default)]
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default)]
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// A scalar coefficient: real, or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarConfig {
    Real(f64),
    Complex([f64; 2]),
}

impl ScalarConfig {
    pub fn value(self) -> Complex64 {
        match self {
            ScalarConfig::Real(v) => Complex64::new(v, 0.0),
            ScalarConfig::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientConfig {
    Constant(ScalarConfig),
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<ScalarConfig>,
    },
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        CoefficientConfig::Constant(ScalarConfig::Real(1.0))
    }
}

impl CoefficientConfig {
    pub fn build(&self) -> Result<PiecewiseConstant, CliError> {
        match self {
            CoefficientConfig::Constant(v) => Ok(PiecewiseConstant::constant(v.value())),
            CoefficientConfig::Piecewise { breakpoints, values } => Ok(PiecewiseConstant::new(
                breakpoints.clone(),
                values.iter().map(|v| v.value()).collect(),
            )
            .map_err(|e| CliError::Config(format!("coefficient: {e}")))?),
        }
    }
}

/// `ν` just inside `ν < Re a < 1/ν` for every piece.
fn default_nu(a: &PiecewiseConstant) -> f64 {
    a.values()
        .iter()
        .map(|v| v.re.min(v.re.recip()).min(1.0))
        .fold(1.0, f64::min)
        * 0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub coefficient: CoefficientConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityConfig {
    Uniform(f64),
    Table(Vec<Vec<f64>>),
    Example { example: String },
}

fn zero_time() -> Vec<f64> {
    vec![0.0]
}

fn one() -> f64 {
    1.0
}

fn circle_nodes() -> usize {
    SphereQuadrature::DEFAULT_CIRCLE_NODES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum SymbolConfig {
    /// `-|ξ|²`.
    Heat,
    Fractional {
        gamma: f64,
        #[serde(default)]
        coefficient: CoefficientConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<f64>,
    },
    Polyharmonic {
        d: usize,
        m: u32,
        #[serde(default)]
        coefficient: CoefficientConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<f64>,
    },
    Polyform {
        d: usize,
        m: u32,
        terms: Vec<TermConfig>,
        nu: f64,
    },
    Levy {
        d: usize,
        #[serde(default)]
        k: u32,
        gamma: f64,
        density: DensityConfig,
        #[serde(default = "zero_time")]
        breakpoints: Vec<f64>,
        #[serde(default = "circle_nodes")]
        circle_nodes: usize,
        #[serde(default = "one")]
        c1: f64,
        #[serde(default = "one")]
        c2: f64,
        #[serde(default = "one")]
        n0: f64,
    },
}

impl SymbolConfig {
    pub fn build(&self) -> Result<Symbol, CliError> {
        let invalid = |e: paleyscope_core::symbols::SymbolError| CliError::Config(format!("symbol: {e}"));
        Ok(match self {
            SymbolConfig::Heat => Symbol::heat(),
            SymbolConfig::Fractional { gamma, coefficient, nu } => {
                let a = coefficient.build()?;
                let nu = nu.unwrap_or_else(|| default_nu(&a));
                FractionalSymbol::new(*gamma, a, nu).map_err(invalid)?.into()
            }
            SymbolConfig::Polyharmonic { d, m, coefficient, nu } => {
                let a = coefficient.build()?;
                let nu = nu.unwrap_or_else(|| default_nu(&a));
                PolyFormSymbol::polyharmonic(*d, *m, a, nu).map_err(invalid)?.into()
            }
            SymbolConfig::Polyform { d, m, terms, nu } => {
                let terms = terms
                    .iter()
                    .map(|t| {
                        Ok(PolyTerm {
                            alpha: t.alpha.clone(),
                            beta: t.beta.clone(),
                            coeff: t.coefficient.build()?,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                PolyFormSymbol::new(*d, *m, terms, *nu).map_err(invalid)?.into()
            }
            SymbolConfig::Levy {
                d,
                k,
                gamma,
                density,
                breakpoints,
                circle_nodes,
                c1,
                c2,
                n0,
            } => match density {
                DensityConfig::Uniform(v) => {
                    let v = *v;
                    LevySymbol::from_density_fn(*d, *k, *gamma, breakpoints.clone(), *circle_nodes, *c1, *c2, *n0, |_, _| v)
                        .map_err(invalid)?
                        .into()
                }
                DensityConfig::Table(rows) => {
                    let quad = SphereQuadrature::new(*d, *circle_nodes).map_err(invalid)?;
                    LevySymbol::new(*k, *gamma, breakpoints.clone(), quad, rows.clone(), *c1, *c2, *n0)
                        .map_err(invalid)?
                        .into()
                }
                DensityConfig::Example { example } => {
                    let (_, sym) = example_densities()
                        .into_iter()
                        .find(|(name, _)| name == example)
                        .ok_or_else(|| CliError::Config(format!("unknown example density `{example}`")))?;
                    if sym.dim() != *d || sym.gamma() != *gamma || sym.k() != *k {
                        return Err(CliError::Config(format!(
                            "example `{example}` has d = {}, k = {}, gamma = {}",
                            sym.dim(),
                            sym.k(),
                            sym.gamma()
                        )));
                    }
                    sym.into()
                }
            },
        })
    }

    /// `γ` for fractional and Lévy symbols, `m` for polynomial forms.
    pub fn gamma_or_m(&self, sym: &Symbol) -> f64 {
        match self {
            SymbolConfig::Polyharmonic { m, .. } | SymbolConfig::Polyform { m, .. } => *m as f64,
            SymbolConfig::Levy { gamma, .. } => *gamma,
            _ => sym.order(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked without running a suite,
    /// including that every symbol builds and fits the grid.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(s) = &self.suite {
            if canonical_suite(s).is_none() {
                return Err(CliError::Usage(format!("unknown suite `{s}`")));
            }
        }
        let g = &self.grid;
        if g.d == 3 && !g.allow_3d {
            return Err(CliError::Config("d = 3 requires \"allow_3d\": true in the grid block".into()));
        }
        if !(1..=3).contains(&g.d) {
            return Err(CliError::Config(format!("grid dimension {} unsupported", g.d)));
        }
        self.space_grid()?;
        if g.nt == 0 {
            return Err(CliError::Config("nt must be positive".into()));
        }
        if !(g.dt.is_finite() && g.dt > 0.0) {
            return Err(CliError::Config(format!("dt = {} must be positive", g.dt)));
        }
        if self.p.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return Err(CliError::Config(format!("p-list {:?} must hold finite values ≥ 1", self.p)));
        }
        if self.mc.paths < 2 || self.mc.modes == 0 {
            return Err(CliError::Config("mc needs M ≥ 2 and K ≥ 1".into()));
        }
        let s = &self.samples;
        if !(s.r_min > 0.0 && s.r_max > s.r_min && s.r_max.is_finite()) || s.radii < 2 {
            return Err(CliError::Config("samples need 0 < r_min < r_max and radii ≥ 2".into()));
        }
        if let Some(r) = self.sharp.max_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(CliError::Config(format!("sharp.max_radius = {r} must be positive")));
            }
        }
        for sc in self.symbol_configs() {
            let sym = sc.build()?;
            if let Some(d) = sym.dim() {
                if d != g.d {
                    return Err(CliError::Config(format!(
                        "{} symbol has dimension {d}, grid has {}",
                        sym.family(),
                        g.d
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn space_grid(&self) -> Result<SpaceGrid, CliError> {
        SpaceGrid::new(self.grid.d, self.grid.n, self.grid.length).map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    /// `symbol` followed by `symbols`; the heat symbol when both are absent.
    pub fn symbol_configs(&self) -> Vec<SymbolConfig> {
        let mut out: Vec<SymbolConfig> = self.symbol.iter().cloned().collect();
        out.extend(self.symbols.iter().cloned());
        if out.is_empty() {
            out.push(SymbolConfig::Heat);
        }
        out
    }

    /// Canonical serialisation; fixes the config hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg.grid.n, 128);
        assert_eq!(cfg.symbol_configs(), vec![SymbolConfig::Heat]);
    }

    #[test]
    fn coefficient_shapes() {
        let cfg = ExperimentConfig::from_json(
            r#"{"symbols":[
                {"family":"fractional","gamma":1.5,"coefficient":[1.0,0.5]},
                {"family":"fractional","gamma":2,"coefficient":{"breakpoints":[0,1],"values":[1,[2,0]]},"nu":0.25}
            ]}"#,
        )
        .unwrap();
        let syms: Vec<Symbol> = cfg.symbol_configs().iter().map(|s| s.build().unwrap()).collect();
        assert_eq!(syms[0].eval(0.0, &[1.0]).unwrap(), Complex64::new(-1.0, -0.5));
        assert_eq!(syms[1].eval(2.0, &[1.0]).unwrap().re, -2.0);
    }

    #[test]
    fn rejects_bad_grids_and_fields() {
        assert!(ExperimentConfig::from_json(r#"{"grid":{"d":1,"n":100,"L":10,"nt":4,"dt":0.1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"grid":{"d":3,"n":8,"L":10,"nt":4,"dt":0.1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"bogus":1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"suite":"nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"symbol":{"family":"levy","d":2,"gamma":0.5,"density":1}}"#).is_err());
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let cfg = ExperimentConfig::from_json(
            r#"{"symbol":{"family":"levy","d":1,"gamma":0.5,"density":{"example":"uniform-1d-half"},"breakpoints":[0,1]},
                "p":[2,4]}"#,
        )
        .unwrap();
        let text = cfg.canonical_json();
        let again = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.canonical_json(), text);
    }
}
