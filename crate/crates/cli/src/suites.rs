//! Suite runners. Each returns rows for the CSV report, one JSON item per
//! unit of work, and an overall verdict. Independent items run on the rayon
//! pool; results are collected in input order so the reports do not depend
//! on scheduling.

use paleyscope_core::assumptions::{
    radial_samples, rational_from_f64, theorem_exponents, verify_assumption1, ThetaIdentities,
};
use paleyscope_core::maximal::{fefferman_stein_check, verify_sharp_bound, RadiusLadder, SharpOptions};
use paleyscope_core::spde::{
    gaussianity_diagnostic, ito_isometry_check, moment_bound_check, sample_point_values, NoiseSpec, Observation,
};
use paleyscope_core::spectral::{kernel_hat, plsf, synthesize_kernel, warn_if_aliased, SpaceGrid, SpaceTimeField};
use paleyscope_core::squarefn::corpus::CorpusSpec;
use paleyscope_core::squarefn::{lp_ratios, square_function};
use paleyscope_core::symbols::{check_ellipticity, Symbol};
use paleyscope_core::{Complex64, Rational64};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{CoefficientConfig, ExperimentConfig, LadderConfig, ScalarConfig, SymbolConfig};
use crate::report::{num, sha256_hex, Cell, Obj};
use crate::CliError;

/// Slack on the `p = 2` bound `‖𝒢f‖₂/‖f‖₂ ≤ √C₀`.
pub const L2_SLACK: f64 = 1e-3;
/// Tolerance against closed-form kernel constants.
pub const C0_TOLERANCE: f64 = 1e-6;
/// Monte Carlo checks allow this many standard errors.
pub const MC_SIGMAS: f64 = 4.0;

/// Everything a suite produces.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub items: Vec<Value>,
    pub pass: bool,
    /// Additional binary artefacts, `(file name, bytes)`.
    pub files: Vec<(String, Vec<u8>)>,
    /// Human-readable lines for standard output.
    pub summary: Vec<String>,
}

impl SuiteOutcome {
    fn new(suite: &'static str, header: &[&'static str]) -> Self {
        Self {
            suite,
            header: header.to_vec(),
            rows: Vec::new(),
            items: Vec::new(),
            pass: true,
            files: Vec::new(),
            summary: Vec::new(),
        }
    }

    fn failure(&mut self, context: Obj, err: impl std::fmt::Display) {
        self.pass = false;
        self.items.push(context.set("error", err.to_string()).set("pass", false).build());
    }
}

/// A validated configuration with its symbols built.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub grid: SpaceGrid,
    pub symbols: Vec<(SymbolConfig, Symbol)>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, CliError> {
        config.validate()?;
        let grid = config.space_grid()?;
        let symbols = config
            .symbol_configs()
            .into_iter()
            .map(|sc| {
                let sym = sc.build()?;
                Ok((sc, sym))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Self { config, grid, symbols })
    }

    fn corpus(&self, count: usize) -> Vec<paleyscope_core::squarefn::corpus::CorpusFunction> {
        let c = &self.config;
        CorpusSpec::new(c.corpus.seed, count, c.grid.d, c.grid.length).generate()
    }

    fn sampled_corpus(&self) -> Vec<SpaceTimeField> {
        self.corpus(self.config.corpus.count)
            .iter()
            .map(|f| f.sample(&self.grid, self.config.grid.dt, self.config.grid.nt))
            .collect()
    }

    fn sharp_options(&self) -> SharpOptions {
        SharpOptions {
            ladder: match self.config.sharp.ladder {
                LadderConfig::Dyadic => RadiusLadder::Dyadic,
                LadderConfig::Full => RadiusLadder::Full,
            },
            max_radius: self.config.sharp.max_radius,
        }
    }

    fn warn_aliasing(&self) {
        for (_, sym) in &self.symbols {
            warn_if_aliased(sym, self.config.grid.dt, &self.grid);
        }
    }
}

fn symbol_obj(sc: &SymbolConfig, sym: &Symbol) -> Obj {
    Obj::new()
        .set("family", sym.family())
        .float("gamma_or_m", sc.gamma_or_m(sym))
        .float("order", sym.order())
        .set("symbol", serde_json::to_value(sc).expect("symbol config serialises"))
}

/// `1/(2 Re c)` for stationary symbols `-c|ξ|^γ`, where the kernel constant
/// has a closed form.
fn closed_form_c0(sc: &SymbolConfig) -> Option<f64> {
    let c = match sc {
        SymbolConfig::Heat => Complex64::new(1.0, 0.0),
        SymbolConfig::Fractional {
            coefficient: CoefficientConfig::Constant(v),
            ..
        }
        | SymbolConfig::Polyharmonic {
            coefficient: CoefficientConfig::Constant(v),
            ..
        } => ScalarConfig::value(*v),
        _ => return None,
    };
    Some(0.5 / c.re)
}

/// Sample frequencies: a radial family plus every nonzero grid frequency.
fn frequency_samples(exp: &Experiment) -> Vec<Vec<f64>> {
    let s = &exp.config.samples;
    let d = exp.grid.dim();
    let mut xis = radial_samples(d, s.r_min, s.r_max, s.radii, s.directions);
    xis.extend(
        (1..exp.grid.len()).map(|j| exp.grid.frequency(j)[..d].to_vec()),
    );
    xis
}

/// Start times covering every coefficient piece; the functional is
/// monotone in `s` within a piece, so piece ends suffice.
fn start_samples(sym: &Symbol) -> Vec<f64> {
    let bps = sym.breakpoints();
    let mut s = vec![bps[0] - 1e3];
    s.extend(bps);
    s
}

/// Sampled `L₂` kernel constant with `η = γ/2`.
pub fn kernel_constant(exp: &Experiment, sym: &Symbol) -> Result<f64, CliError> {
    let xis = frequency_samples(exp);
    let rep = verify_assumption1(sym, sym.order() / 2.0, &xis, &start_samples(sym))
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    Ok(rep.c0)
}

/// Exact exponent tuple for order `γ`, when `γ` is rational.
fn exponents_for(gamma: f64, d: usize) -> Result<(Rational64, ThetaIdentities, bool), CliError> {
    let g = rational_from_f64(gamma, 1000).map_err(|e| CliError::Numeric(e.to_string()))?;
    let ke = theorem_exponents(g, d).map_err(|e| CliError::Numeric(e.to_string()))?;
    let ids = ThetaIdentities::of(&ke);
    let ok = ids.all_hold() && ke.delta0 == g.recip() && ke.valid();
    Ok((ke.delta0, ids, ok))
}

fn rational(r: Rational64) -> Value {
    Value::String(r.to_string())
}

fn r_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn assumptions(exp: &Experiment) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(
        "assumptions",
        &["family", "gamma_or_m", "d", "c0", "c0_expected", "delta0", "theta_identities", "ellipticity", "psi7", "pass"],
    );
    let d = exp.grid.dim();
    let s = &exp.config.samples;
    let results: Vec<_> = exp
        .symbols
        .par_iter()
        .map(|(sc, sym)| -> Result<_, CliError> {
            let c0 = kernel_constant(exp, sym)?;
            let expected = closed_form_c0(sc);
            let (delta0, ids, ids_ok) = exponents_for(sym.order(), d)?;
            let xis = radial_samples(d, s.r_min, s.r_max, s.radii, s.directions);
            let ell = check_ellipticity(sym, sym.nu(), &xis, &sym.breakpoints())
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            let psi7 = match sym {
                Symbol::Levy(l) => Some(l.check_psi7(256)),
                _ => None,
            };
            Ok((c0, expected, delta0, ids, ids_ok, ell, psi7))
        })
        .collect();
    for ((sc, sym), res) in exp.symbols.iter().zip(results) {
        let ctx = symbol_obj(sc, sym);
        match res {
            Err(e) => {
                out.rows.push(vec![
                    sym.family().into(),
                    sc.gamma_or_m(sym).into(),
                    d.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    false.into(),
                    false.into(),
                    "".into(),
                    false.into(),
                ]);
                out.failure(ctx, e);
            }
            Ok((c0, expected, delta0, ids, ids_ok, ell, psi7)) => {
                let c0_ok = c0.is_finite() && expected.is_none_or(|e| (c0 - e).abs() <= C0_TOLERANCE);
                let psi7_ok = psi7.as_ref().is_none_or(|p| p.pass);
                let pass = c0_ok && ids_ok && ell.real_part_pass && psi7_ok;
                out.pass &= pass;
                out.rows.push(vec![
                    sym.family().into(),
                    sc.gamma_or_m(sym).into(),
                    d.into(),
                    c0.into(),
                    expected.unwrap_or(f64::NAN).into(),
                    r_to_f64(delta0).into(),
                    ids_ok.into(),
                    ell.real_part_pass.into(),
                    psi7.as_ref().map_or(Cell::from(""), |p| p.pass.into()),
                    pass.into(),
                ]);
                out.summary.push(format!("{} order {}: C0 = {c0:.6}, pass = {pass}", sym.family(), sym.order()));
                let mut obj = ctx
                    .float("c0", c0)
                    .set("c0_expected", expected.map_or(Value::Null, num))
                    .set("delta0", rational(delta0))
                    .set(
                        "theta",
                        Obj::new()
                            .set("row1", rational(ids.row1))
                            .set("row2", rational(ids.row2))
                            .set("row3", rational(ids.row3))
                            .set("theta_c2", rational(ids.theta_c2))
                            .set("theta_c3", rational(ids.theta_c3))
                            .set("hold", ids_ok)
                            .build(),
                    )
                    .set(
                        "ellipticity",
                        Obj::new()
                            .float("nu_requested", ell.nu_requested)
                            .float("nu_observed", ell.nu_observed)
                            .float("max_derivative_ratio", ell.max_derivative_ratio())
                            .set("real_part_pass", ell.real_part_pass)
                            .set("derivative_pass", ell.derivative_pass)
                            .build(),
                    )
                    .set("pass", pass);
                if let Some(p) = psi7 {
                    obj = obj.set(
                        "psi7",
                        Obj::new().float("sup_re", p.sup_re).float("n0", p.n0).set("pass", p.pass).build(),
                    );
                }
                out.items.push(obj.build());
            }
        }
    }
    out
}

pub fn lp_ratio(exp: &Experiment) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(
        "lp-ratio",
        &["family", "gamma_or_m", "p", "n", "nt", "ratio", "C0_bound", "pass"],
    );
    exp.warn_aliasing();
    let corpus = exp.sampled_corpus();
    let ps = &exp.config.p;
    let bounds: Vec<Result<f64, CliError>> = exp
        .symbols
        .par_iter()
        .map(|(_, sym)| kernel_constant(exp, sym).map(f64::sqrt))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..exp.symbols.len())
        .flat_map(|s| (0..corpus.len()).map(move |f| (s, f)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(s, f)| lp_ratios(&exp.symbols[s].1, exp.symbols[s].1.order() / 2.0, &corpus[f], ps))
        .collect();
    for (&(s, f), res) in jobs.iter().zip(results) {
        let (sc, sym) = &exp.symbols[s];
        let ctx = symbol_obj(sc, sym).set("index", f);
        let bound = match &bounds[s] {
            Ok(b) => *b,
            Err(e) => {
                out.failure(ctx, e);
                continue;
            }
        };
        match res {
            Err(e) => out.failure(ctx, e),
            Ok(reports) => {
                let mut per_p = Vec::new();
                for r in reports {
                    let pass = if r.p == 2.0 {
                        r.ratio <= bound + L2_SLACK
                    } else {
                        r.ratio.is_finite()
                    };
                    out.pass &= pass;
                    out.rows.push(vec![
                        sym.family().into(),
                        sc.gamma_or_m(sym).into(),
                        r.p.into(),
                        r.n.into(),
                        r.nt.into(),
                        r.ratio.into(),
                        bound.into(),
                        pass.into(),
                    ]);
                    per_p.push(
                        Obj::new()
                            .float("p", r.p)
                            .float("norm_g", r.norm_g)
                            .float("norm_f", r.norm_f)
                            .float("ratio", r.ratio)
                            .set("degenerate", r.degenerate)
                            .set("pass", pass)
                            .build(),
                    );
                }
                let pass = per_p.iter().all(|v| v["pass"] == Value::Bool(true));
                out.items.push(ctx.float("C0_bound", bound).set("ratios", per_p).set("pass", pass).build());
            }
        }
    }
    let worst = out
        .rows
        .iter()
        .filter_map(|r| match (&r[2], &r[5]) {
            (Cell::Float(p), Cell::Float(v)) if *p == 2.0 => Some(*v),
            _ => None,
        })
        .fold(0.0, f64::max);
    out.summary.push(format!("{} rows, largest p = 2 ratio {worst:.6}", out.rows.len()));
    out
}

/// Anisotropy exponent `δ₀ = 1/γ`, exact when the order is rational.
fn delta0_for(sym: &Symbol, d: usize) -> f64 {
    exponents_for(sym.order(), d).map_or(sym.order().recip(), |(d0, _, _)| r_to_f64(d0))
}

pub fn sharp_bound(exp: &Experiment) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("sharp-bound", &["family", "gamma", "n", "nt", "sup_ratio_sharp", "fs_ratio"]);
    exp.warn_aliasing();
    let corpus = exp.sampled_corpus();
    let opts = exp.sharp_options();
    let p_fs = exp.config.p.iter().copied().find(|&p| p > 1.0).unwrap_or(2.0);
    let d = exp.grid.dim();
    let jobs: Vec<(usize, usize)> = (0..exp.symbols.len())
        .flat_map(|s| (0..corpus.len()).map(move |f| (s, f)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(s, f)| -> Result<_, CliError> {
            let sym = &exp.symbols[s].1;
            let eta = sym.order() / 2.0;
            let delta0 = delta0_for(sym, d);
            let numeric = |e: &dyn std::fmt::Display| CliError::Numeric(e.to_string());
            let rep = verify_sharp_bound(sym, eta, &corpus[f], delta0, &opts).map_err(|e| numeric(&e))?;
            let g = square_function(sym, eta, &corpus[f]).map_err(|e| numeric(&e))?;
            let fs = fefferman_stein_check(&g, p_fs, delta0, &opts).map_err(|e| numeric(&e))?;
            Ok((rep, fs))
        })
        .collect();
    for (&(s, f), res) in jobs.iter().zip(results) {
        let (sc, sym) = &exp.symbols[s];
        let ctx = symbol_obj(sc, sym).set("index", f);
        match res {
            Err(e) => {
                out.rows.push(vec![
                    sym.family().into(),
                    sc.gamma_or_m(sym).into(),
                    exp.grid.n().into(),
                    exp.config.grid.nt.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                ]);
                out.failure(ctx, e);
            }
            Ok((rep, fs)) => {
                let pass = rep.finite && fs.ratio.is_finite();
                out.pass &= pass;
                out.rows.push(vec![
                    sym.family().into(),
                    sc.gamma_or_m(sym).into(),
                    exp.grid.n().into(),
                    exp.config.grid.nt.into(),
                    rep.sup_ratio.into(),
                    fs.ratio.into(),
                ]);
                out.items.push(
                    ctx.float("delta0", rep.delta0)
                        .float("sup_ratio_sharp", rep.sup_ratio)
                        .set("argmax", vec![rep.argmax.0, rep.argmax.1])
                        .float("sharp_max", rep.sharp_max)
                        .set(
                            "fefferman_stein",
                            Obj::new()
                                .float("p", fs.p)
                                .float("norm", fs.norm)
                                .float("sharp_norm", fs.sharp_norm)
                                .float("ratio", fs.ratio)
                                .set("degenerate", fs.degenerate)
                                .build(),
                        )
                        .set("pass", pass)
                        .build(),
                );
            }
        }
    }
    let worst = out
        .rows
        .iter()
        .filter_map(|r| match &r[4] {
            Cell::Float(v) => Some(*v),
            _ => None,
        })
        .fold(0.0, f64::max);
    out.summary.push(format!("{} rows, largest sharp ratio {worst:.6}", out.rows.len()));
    out
}

/// `K` forcing channels, channel `k` taken from corpus function `k`.
fn forcing(exp: &Experiment) -> SpaceTimeField {
    let c = &exp.config;
    let modes = c.mc.modes;
    let corpus = exp.corpus(modes);
    let horizon = c.grid.nt as f64 * c.grid.dt;
    let length = c.grid.length;
    SpaceTimeField::from_fn(&exp.grid, modes, 0.0, c.grid.dt, c.grid.nt, |k, t, x| {
        corpus[k].eval(0, t / horizon, x, length)
    })
}

/// Flat index of the origin.
fn centre_index(grid: &SpaceGrid) -> usize {
    let idx = vec![grid.n() / 2; grid.dim()];
    grid.flat_index(&idx)
}

pub fn spde(exp: &Experiment) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(
        "spde",
        &["family", "gamma_or_m", "M", "K", "estimate", "exact", "rel_error", "std_error", "kurtosis", "pass"],
    );
    exp.warn_aliasing();
    let c = &exp.config;
    let f = forcing(exp);
    let paths = c.mc.paths;
    let kurtosis_limit = 3.0 * (24.0 / paths as f64).sqrt();
    let at = Observation {
        t_index: c.grid.nt - 1,
        x_index: centre_index(&exp.grid),
    };
    for (sc, sym) in &exp.symbols {
        let ctx = symbol_obj(sc, sym);
        let run = || -> Result<_, CliError> {
            let numeric = |e: paleyscope_core::spde::SpdeError| CliError::Numeric(e.to_string());
            let spec = NoiseSpec::new(c.mc.modes, c.mc.seed, c.grid.dt, c.grid.nt).map_err(numeric)?;
            let iso = ito_isometry_check(sym, &f, &spec, paths, at).map_err(numeric)?;
            let values = sample_point_values(sym, &f, &spec, paths, at).map_err(numeric)?;
            let kurt = gaussianity_diagnostic(&values);
            let moments = c
                .p
                .iter()
                .filter(|&&p| p >= 2.0)
                .map(|&p| moment_bound_check(sym, &f, &spec, paths, p, sym.order() / 2.0))
                .collect::<Result<Vec<_>, _>>()
                .map_err(numeric)?;
            Ok((iso, kurt, moments))
        };
        match run() {
            Err(e) => {
                out.rows.push(vec![
                    sym.family().into(),
                    sc.gamma_or_m(sym).into(),
                    paths.into(),
                    c.mc.modes.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    false.into(),
                ]);
                out.failure(ctx, e);
            }
            Ok((iso, kurt, moments)) => {
                let gap = (iso.estimate.value - iso.deterministic).abs();
                let iso_ok = iso.degenerate || gap <= MC_SIGMAS * iso.estimate.std_error;
                let kurt_ok = kurt.is_none_or(|k| k.abs() <= kurtosis_limit);
                let moments_ok = moments.iter().all(|m| m.estimate.value.is_finite());
                let pass = iso_ok && kurt_ok && moments_ok;
                out.pass &= pass;
                out.rows.push(vec![
                    sym.family().into(),
                    sc.gamma_or_m(sym).into(),
                    paths.into(),
                    c.mc.modes.into(),
                    iso.estimate.value.into(),
                    iso.deterministic.into(),
                    iso.relative_error.into(),
                    iso.estimate.std_error.into(),
                    kurt.unwrap_or(f64::NAN).into(),
                    pass.into(),
                ]);
                out.summary.push(format!(
                    "{} order {}: isometry rel. error {:.4}, kurtosis {:.4}, pass = {pass}",
                    sym.family(),
                    sym.order(),
                    iso.relative_error,
                    kurt.unwrap_or(f64::NAN)
                ));
                let moments: Vec<Value> = moments
                    .iter()
                    .map(|m| {
                        Obj::new()
                            .float("p", m.p)
                            .float("eta", m.eta)
                            .float("estimate", m.estimate.value)
                            .float("std_error", m.estimate.std_error)
                            .float("square_majorant", m.square_majorant)
                            .set("degenerate", m.degenerate)
                            .build()
                    })
                    .collect();
                out.items.push(
                    ctx.set("observation", vec![at.t_index, at.x_index])
                        .set(
                            "isometry",
                            Obj::new()
                                .float("estimate", iso.estimate.value)
                                .float("std_error", iso.estimate.std_error)
                                .float("exact", iso.deterministic)
                                .float("relative_error", iso.relative_error)
                                .set("pass", iso_ok)
                                .build(),
                        )
                        .set("excess_kurtosis", kurt.map_or(Value::Null, num))
                        .float("kurtosis_limit", kurtosis_limit)
                        .set("moments", moments)
                        .set("pass", pass)
                        .build(),
                );
            }
        }
    }
    out
}

/// Exponent bookkeeping for each `(γ, d)`.
pub fn exponents(cases: &[(Rational64, usize)]) -> SuiteOutcome {
    let mut out = SuiteOutcome::new(
        "exponents",
        &["gamma", "d", "c2", "c3", "delta0", "mu1", "mu2", "mu3", "identities", "pass"],
    );
    for &(gamma, d) in cases {
        let ctx = Obj::new().set("gamma", rational(gamma)).set("d", d);
        let ke = match theorem_exponents(gamma, d) {
            Ok(ke) => ke,
            Err(e) => {
                out.rows.push(vec![
                    gamma.to_string().into(),
                    d.into(),
                    "".into(),
                    "".into(),
                    "".into(),
                    "".into(),
                    "".into(),
                    "".into(),
                    false.into(),
                    false.into(),
                ]);
                out.failure(ctx, e);
                continue;
            }
        };
        let ids = ThetaIdentities::of(&ke);
        let pass = ids.all_hold() && ke.delta0 == gamma.recip() && ke.valid();
        out.pass &= pass;
        let mu = ke.mu();
        let mu_text = |m: Option<Rational64>| m.map_or(String::new(), |m| m.to_string());
        out.rows.push(vec![
            gamma.to_string().into(),
            d.into(),
            ke.c2.to_string().into(),
            ke.c3.to_string().into(),
            ke.delta0.to_string().into(),
            mu_text(mu[0]).into(),
            mu_text(mu[1]).into(),
            mu_text(mu[2]).into(),
            ids.all_hold().into(),
            pass.into(),
        ]);
        out.summary.push(format!("gamma = {gamma}, d = {d}"));
        out.summary.push(format!("c2 = {}", ke.c2));
        out.summary.push(format!("c3 = {}", ke.c3));
        out.summary.push(format!("delta0 = {}", ke.delta0));
        let list = |v: [Rational64; 3]| Value::Array(v.iter().map(|r| rational(*r)).collect());
        out.items.push(
            ctx.set("c2", rational(ke.c2))
                .set("c3", rational(ke.c3))
                .set("delta0", rational(ke.delta0))
                .float("c2_value", r_to_f64(ke.c2))
                .float("c3_value", r_to_f64(ke.c3))
                .float("delta0_value", r_to_f64(ke.delta0))
                .set("kappa", list(ke.kappa))
                .set("sigma", list(ke.sigma))
                .set("mu", Value::Array(mu.iter().map(|m| m.map_or(Value::Null, rational)).collect()))
                .set(
                    "windows",
                    Value::Array(ke.windows.iter().map(|m| m.map_or(Value::Null, rational)).collect()),
                )
                .set(
                    "theta",
                    Obj::new()
                        .set("row1", rational(ids.row1))
                        .set("row2", rational(ids.row2))
                        .set("row3", rational(ids.row3))
                        .set("theta_c2", rational(ids.theta_c2))
                        .set("theta_c3", rational(ids.theta_c3))
                        .set("hold", ids.all_hold())
                        .build(),
                )
                .set("valid", ke.valid())
                .set("pass", pass)
                .build(),
        );
    }
    out
}

/// Exponent cases implied by a configuration: one per symbol order.
pub fn exponent_cases(exp: &Experiment) -> Result<Vec<(Rational64, usize)>, CliError> {
    exp.symbols
        .iter()
        .map(|(_, sym)| {
            rational_from_f64(sym.order(), 1000)
                .map(|g| (g, exp.grid.dim()))
                .map_err(|e| CliError::Config(e.to_string()))
        })
        .collect()
}

pub fn kernel_dump(exp: &Experiment) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("kernel-dump", &["index", "family", "file", "bytes", "sha256", "max_abs"]);
    let k = &exp.config.kernel;
    let t = k.t.unwrap_or(exp.config.grid.nt as f64 * exp.config.grid.dt);
    for (i, (sc, sym)) in exp.symbols.iter().enumerate() {
        let ctx = symbol_obj(sc, sym).set("index", i).float("s", k.s).float("t", t).float("eta", k.eta);
        let kernel = match kernel_hat(sym, k.s, t, k.eta, &exp.grid) {
            Ok(m) => synthesize_kernel(&m),
            Err(e) => {
                out.failure(ctx, e);
                continue;
            }
        };
        let bytes = plsf::encode(&kernel);
        let round_trip = plsf::decode(&bytes).is_ok();
        out.pass &= round_trip;
        let name = format!("kernel_{i}_{}.plsf", sym.family());
        let digest = sha256_hex(&bytes);
        out.rows.push(vec![
            i.into(),
            sym.family().into(),
            name.clone().into(),
            bytes.len().into(),
            digest.clone().into(),
            kernel.max_abs().into(),
        ]);
        out.items.push(
            ctx.set("file", name.clone())
                .set("bytes", bytes.len())
                .set("sha256", digest)
                .float("max_abs", kernel.max_abs())
                .set("pass", round_trip)
                .build(),
        );
        out.summary.push(format!("wrote {name}"));
        out.files.push((name, bytes));
    }
    out
}
