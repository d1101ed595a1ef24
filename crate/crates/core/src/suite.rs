//! Scenario configs and the suite runner.
//!
//! A config document is one scenario object or an array of them. Each
//! scenario runs its suites in dependency order (space, dyadic systems,
//! weights, domination, theorem checks) and yields report rows keyed by the
//! scenario id.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dyadic::{build_adjacent_systems, build_dyadic_system, verify_system, AdjacentSystems};
use crate::error::{Error, Result};
use crate::generators::FunctionSpec;
use crate::operators::{weak_type_constant, ProbeSet};
use crate::report::{rel_diff, CheckKind, CheckRow, Report, ScenarioRecord};
use crate::space::{build_space, QuasiMetricSpace, SpaceKind, SpaceParams};
use crate::sparse::{build_domination, evaluate_bound, oscillation_domination, DominationCertificate};
use crate::verify::{
    ap_duality, power_weight_sweep, verify_bloom_jn, verify_duality_chain, verify_lower_bound, verify_upper_bound_bm,
    verify_upper_bound_cb, IDENTITY_TOL,
};
use crate::weights::conjugate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Upper,
    Lower,
    Jn,
    Exponent,
    Domination,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 5] = [
        SuiteKind::Upper,
        SuiteKind::Lower,
        SuiteKind::Jn,
        SuiteKind::Exponent,
        SuiteKind::Domination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Upper => "upper",
            SuiteKind::Lower => "lower",
            SuiteKind::Jn => "jn",
            SuiteKind::Exponent => "exponent",
            SuiteKind::Domination => "domination",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SuiteKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`; expected one of upper, lower, jn, exponent, domination"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: SpaceKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: SpaceParams,
    /// Defaults to the scenario seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicConfig {
    #[serde(default = "half")]
    pub delta: f64,
    #[serde(default = "three")]
    pub t_count: usize,
    /// Defaults to the scenario seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for DyadicConfig {
    fn default() -> Self {
        DyadicConfig {
            delta: 0.5,
            t_count: 3,
            seed: None,
        }
    }
}

/// Pass thresholds for measured constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "hundred")]
    pub rho_cap: f64,
    #[serde(default = "hundred")]
    pub c_meas_cap: f64,
    #[serde(default = "hundred")]
    pub jn_cap: f64,
    #[serde(default = "c_emp_cap")]
    pub c_emp_cap: f64,
    #[serde(default = "capture_min")]
    pub capture_min: f64,
    #[serde(default = "eta_min")]
    pub eta_min: f64,
    #[serde(default = "fit_margin")]
    pub fit_margin: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            rho_cap: hundred(),
            c_meas_cap: hundred(),
            jn_cap: hundred(),
            c_emp_cap: c_emp_cap(),
            capture_min: capture_min(),
            eta_min: eta_min(),
            fit_margin: fit_margin(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JnConfig {
    /// Exponents `r`; defaults to `[1, p']`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Power exponents as fractions of `p - 1`.
    #[serde(default = "sweep_fractions")]
    pub fractions: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            fractions: sweep_fractions(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    /// Master seed; every unset seed below derives from it.
    pub seed: u64,
    pub p: f64,
    pub space: SpaceConfig,
    #[serde(default)]
    pub dyadic: DyadicConfig,
    #[serde(default = "unit")]
    pub lambda1: FunctionSpec,
    #[serde(default = "unit")]
    pub lambda2: FunctionSpec,
    pub b: FunctionSpec,
    #[serde(default = "default_f")]
    pub f: FunctionSpec,
    #[serde(default)]
    pub probes: ProbeSet,
    /// Random dual functions in the duality chain.
    #[serde(default = "four")]
    pub g_probes: usize,
    #[serde(default = "default_suites")]
    pub suites: Vec<SuiteKind>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub jn: JnConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Output directory used by the CLI when `--out` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}
fn half() -> f64 {
    0.5
}
fn three() -> usize {
    3
}
fn four() -> usize {
    4
}
fn hundred() -> f64 {
    100.0
}
fn c_emp_cap() -> f64 {
    1e6
}
fn capture_min() -> f64 {
    0.99
}
fn eta_min() -> f64 {
    0.05
}
fn fit_margin() -> f64 {
    0.2
}
fn sweep_fractions() -> Vec<f64> {
    vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
}
fn unit() -> FunctionSpec {
    FunctionSpec::Constant { value: 1.0 }
}
fn default_f() -> FunctionSpec {
    FunctionSpec::Lognormal { sigma: 1.0, seed: None }
}
fn default_suites() -> Vec<SuiteKind> {
    vec![SuiteKind::Upper, SuiteKind::Lower, SuiteKind::Jn, SuiteKind::Domination]
}

fn config_error(path: impl Into<String>, message: impl fmt::Display) -> Error {
    Error::Config {
        path: path.into(),
        message: message.to_string(),
    }
}

impl ScenarioConfig {
    /// Minimal scenario on `space` with unit weights.
    pub fn new(id: &str, seed: u64, p: f64, kind: SpaceKind, n: usize, b: FunctionSpec) -> Self {
        ScenarioConfig {
            id: id.to_string(),
            seed,
            p,
            space: SpaceConfig {
                kind,
                n,
                params: SpaceParams::default(),
                seed: None,
            },
            dyadic: DyadicConfig::default(),
            lambda1: unit(),
            lambda2: unit(),
            b,
            f: default_f(),
            probes: ProbeSet::default(),
            g_probes: four(),
            suites: default_suites(),
            thresholds: Thresholds::default(),
            jn: JnConfig::default(),
            sweep: SweepConfig::default(),
            output: None,
        }
    }

    pub fn jn_exponents(&self) -> Vec<f64> {
        self.jn.r.clone().unwrap_or_else(|| vec![1.0, conjugate(self.p)])
    }

    /// Field-level checks; errors name the offending field path.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(config_error("id", "must not be empty"));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(config_error("p", format!("need 1 < p < inf, got {}", self.p)));
        }
        if self.space.n == 0 {
            return Err(config_error("space.n", "need at least one point"));
        }
        if !(self.dyadic.delta > 0.0 && self.dyadic.delta < 1.0) {
            return Err(config_error("dyadic.delta", format!("need 0 < delta < 1, got {}", self.dyadic.delta)));
        }
        if self.dyadic.t_count == 0 {
            return Err(config_error("dyadic.t_count", "need at least one system"));
        }
        let pp = conjugate(self.p);
        if !(self.jn.epsilon >= 0.0 && self.jn.epsilon.is_finite()) {
            return Err(config_error("jn.epsilon", "need a finite epsilon >= 0"));
        }
        for (i, &r) in self.jn_exponents().iter().enumerate() {
            if !(r >= 1.0 && r <= pp + self.jn.epsilon) {
                return Err(config_error(format!("jn.r[{i}]"), format!("need 1 <= r <= p' + eps = {}, got {r}", pp + self.jn.epsilon)));
            }
        }
        for (i, &a) in self.sweep.fractions.iter().enumerate() {
            if !(a > 0.0 && a < 1.0) {
                return Err(config_error(format!("sweep.fractions[{i}]"), format!("need 0 < a < 1, got {a}")));
            }
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("thresholds.rho_cap", t.rho_cap),
            ("thresholds.c_meas_cap", t.c_meas_cap),
            ("thresholds.jn_cap", t.jn_cap),
            ("thresholds.c_emp_cap", t.c_emp_cap),
            ("thresholds.fit_margin", t.fit_margin),
        ] {
            if !(v >= 0.0) {
                return Err(config_error(name, format!("need a non-negative number, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&t.capture_min) {
            return Err(config_error("thresholds.capture_min", "need a rate in [0, 1]"));
        }
        if self.suites.is_empty() {
            return Err(config_error("suites", "enable at least one suite"));
        }
        Ok(())
    }

    fn space_seed(&self) -> u64 {
        self.space.seed.unwrap_or(self.seed)
    }

    fn dyadic_seed(&self) -> u64 {
        self.dyadic.seed.unwrap_or(self.seed)
    }

    pub fn build_space(&self) -> Result<QuasiMetricSpace> {
        build_space(self.space.kind, self.space.n, &self.space.params, self.space_seed()).map_err(|e| config_error("space", e))
    }

    /// `(lambda1, lambda2, b, f)`; unseeded generators draw from
    /// `seed + 1, ..., seed + 4`.
    pub fn evaluate_inputs(&self, space: &QuasiMetricSpace) -> Result<[Vec<f64>; 4]> {
        let eval = |name: &str, spec: &FunctionSpec, offset: u64| {
            spec.evaluate(space, self.seed.wrapping_add(offset)).map_err(|e| config_error(name, e))
        };
        let l1 = eval("lambda1", &self.lambda1, 1)?;
        let l2 = eval("lambda2", &self.lambda2, 2)?;
        for (name, w) in [("lambda1", &l1), ("lambda2", &l2)] {
            if let Some(x) = w.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(config_error(name, format!("weight is not positive and finite at point {x}")));
            }
        }
        let b = eval("b", &self.b, 3)?;
        let f = eval("f", &self.f, 4)?;
        for (name, g) in [("b", &b), ("f", &f)] {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(config_error(name, "function is not finite"));
            }
        }
        Ok([l1, l2, b, f])
    }
}

/// Parses a scenario object or an array of scenarios and validates each.
pub fn parse_configs(text: &str) -> Result<Vec<ScenarioConfig>> {
    let value: Value = serde_json::from_str(text).map_err(|e| config_error("", e))?;
    let (items, array) = match value {
        Value::Array(items) => (items, true),
        other => (vec![other], false),
    };
    let mut out = Vec::with_capacity(items.len());
    let mut ids = BTreeSet::new();
    for (i, item) in items.into_iter().enumerate() {
        let prefix = if array { format!("[{i}].") } else { String::new() };
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(item).map_err(|e| {
            let path = e.path().to_string();
            config_error(format!("{prefix}{path}"), e.into_inner())
        })?;
        cfg.validate().map_err(|e| match e {
            Error::Config { path, message } => config_error(format!("{prefix}{path}"), message),
            other => other,
        })?;
        if !ids.insert(cfg.id.clone()) {
            return Err(config_error(format!("{prefix}id"), format!("duplicate scenario id `{}`", cfg.id)));
        }
        out.push(cfg);
    }
    Ok(out)
}

/// Parses a standalone space config.
pub fn parse_space_config(text: &str) -> Result<SpaceConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: SpaceConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_error(path, e.into_inner())
    })?;
    if cfg.n == 0 {
        return Err(config_error("n", "need at least one point"));
    }
    Ok(cfg)
}

/// Runs `job` on a pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| config_error("jobs", e))?
        .install(job)
}

/// The default suite: domination on lines, two-weight upper, lower and
/// John–Nirenberg checks on several spaces, and the power-weight sweep.
pub fn default_suite(seed: u64) -> Vec<ScenarioConfig> {
    let lognormal = |sigma: f64| FunctionSpec::Lognormal { sigma, seed: None };
    let mut out = Vec::new();
    let mut k = 0u64;
    let mut next = || {
        k += 1;
        seed.wrapping_add(k)
    };
    for n in [16, 32, 64] {
        for rep in 0..2 {
            let mut c = ScenarioConfig::new(
                &format!("domination-line{n}-{rep}"),
                next(),
                2.0,
                SpaceKind::Line,
                n,
                FunctionSpec::Normal { sigma: 1.0, seed: None },
            );
            c.lambda1 = lognormal(0.5);
            c.lambda2 = lognormal(0.5);
            c.suites = vec![SuiteKind::Domination];
            out.push(c);
        }
    }
    for (kind, n) in [(SpaceKind::Line, 32), (SpaceKind::Sqline, 32), (SpaceKind::Tree, 32), (SpaceKind::Grid2d, 36)] {
        for p in [1.5, 2.0, 3.0] {
            let mut c = ScenarioConfig::new(&format!("weighted-{}{n}-p{p}", kind.name()), next(), p, kind, n, lognormal(1.0));
            c.lambda1 = lognormal(0.5);
            c.lambda2 = lognormal(0.5);
            c.suites = vec![SuiteKind::Upper, SuiteKind::Lower, SuiteKind::Jn];
            out.push(c);
        }
    }
    for p in [1.5, 2.0, 3.0] {
        let mut c = ScenarioConfig::new(&format!("exponent-line256-p{p}"), next(), p, SpaceKind::Line, 256, FunctionSpec::Log { eps: None });
        c.probes = sweep_probes();
        c.suites = vec![SuiteKind::Exponent];
        out.push(c);
    }
    out
}

/// Singletons, balls around the origin and three random functions.
pub fn sweep_probes() -> ProbeSet {
    use crate::operators::BallProbes;
    ProbeSet {
        singletons: true,
        balls: BallProbes::Center { center: 0 },
        weighted_balls: BallProbes::Center { center: 0 },
        random: 3,
    }
}

struct Run<'a> {
    id: &'a str,
    rows: Vec<CheckRow>,
    details: serde_json::Map<String, Value>,
}

impl Run<'_> {
    fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    fn finish(self) -> Report {
        Report {
            rows: self.rows,
            scenarios: vec![ScenarioRecord {
                id: self.id.to_string(),
                details: Value::Object(self.details),
            }],
            runtime_seconds: None,
        }
    }

    fn detail(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.details.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }
}

/// Runs the enabled suites of one scenario; `only` restricts them further.
pub fn run_scenario(cfg: &ScenarioConfig, only: Option<&[SuiteKind]>) -> Result<Report> {
    cfg.validate()?;
    let enabled: BTreeSet<SuiteKind> = cfg
        .suites
        .iter()
        .copied()
        .filter(|s| only.is_none_or(|o| o.contains(s)))
        .collect();
    let mut run = Run {
        id: &cfg.id,
        rows: Vec::new(),
        details: serde_json::Map::new(),
    };
    if enabled.is_empty() {
        return Ok(Report::default());
    }
    let space = cfg.build_space()?;
    let [l1, l2, b, f] = cfg.evaluate_inputs(&space)?;
    let p = cfg.p;
    let t = &cfg.thresholds;
    run.detail("space", json!({ "kind": cfg.space.kind.name(), "n": space.n(), "constants": space.constants() }))?;

    if enabled.contains(&SuiteKind::Domination) {
        run_domination(cfg, &space, &l1, &l2, &b, &f, false, &mut run)?;
    }
    if enabled.iter().any(|s| matches!(s, SuiteKind::Upper | SuiteKind::Lower | SuiteKind::Jn)) {
        let d1 = ap_duality(&space, &l1, p)?;
        let d2 = ap_duality(&space, &l2, p)?;
        run.push(d1.row(run.id, "weights.duality.lambda1"));
        run.push(d2.row(run.id, "weights.duality.lambda2"));
        run.detail("weights", json!({ "lambda1": d1, "lambda2": d2 }))?;
    }
    if enabled.contains(&SuiteKind::Upper) {
        let cb = verify_upper_bound_cb(&space, &b, &l1, &l2, p, &cfg.probes, cfg.seed, t.rho_cap)?;
        let bm = verify_upper_bound_bm(&space, &b, &l1, &l2, p, &cfg.probes, cfg.seed, t.rho_cap)?;
        run.push(cb.row(run.id, "upper_cb.rho"));
        run.push(bm.bound.row(run.id, "upper_bm.rho"));
        if b.iter().all(|&v| v >= 0.0) {
            run.push(bm.pointwise.row(run.id));
            if let (Some(r_bm), Some(r_cb)) = (bm.bound.rho, cb.rho) {
                run.push(
                    CheckRow::at_most(run.id, "upper_bm.monotone", CheckKind::Exact, crate::report::excess(r_bm, r_cb), IDENTITY_TOL)
                        .with_note("rho([b,M]) <= rho(C_b) on the same probes"),
                );
            }
        } else {
            run.push(
                CheckRow::at_most(run.id, "upper_bm.pointwise", CheckKind::Exact, 0.0, IDENTITY_TOL)
                    .with_note("not applicable: the reduction needs b >= 0"),
            );
        }
        run.detail("upper", json!({ "cb": cb, "bm": bm }))?;
    }
    if enabled.contains(&SuiteKind::Lower) {
        let lb = verify_lower_bound(&space, &b, &l1, &l2, p, &cfg.probes, cfg.seed)?;
        run.rows.extend(lb.rows(run.id, t.c_meas_cap));
        run.detail("lower", &lb)?;
    }
    if enabled.contains(&SuiteKind::Jn) {
        let mut out = Vec::new();
        for r in cfg.jn_exponents() {
            let jn = verify_bloom_jn(&space, &b, &l1, &l2, p, r, cfg.jn.epsilon)?;
            let row = if jn.branch == 1 {
                jn.row(run.id, t.jn_cap)
            } else {
                jn.row(run.id, f64::MAX).with_note("measurement only")
            };
            run.push(row);
            out.push(jn);
        }
        run.detail("jn", out)?;
    }
    if enabled.contains(&SuiteKind::Exponent) {
        let system = build_dyadic_system(&space, cfg.dyadic.delta, cfg.dyadic_seed())?;
        let cubes: Vec<usize> = (0..system.len()).collect();
        let exponents: Vec<f64> = cfg.sweep.fractions.iter().map(|a| a * (p - 1.0)).collect();
        let sweep = power_weight_sweep(&space, &system, &cubes, &b, p, &exponents, &cfg.probes, t.fit_margin, cfg.seed)?;
        run.rows.extend(sweep.rows(run.id));
        run.detail("exponent", &sweep)?;
    }

    Ok(run.finish())
}

/// The dyadic stage alone (`dyadic_only`) or followed by the domination
/// stage, with their report rows.
pub fn run_dominate(cfg: &ScenarioConfig, dyadic_only: bool) -> Result<(AdjacentSystems, Option<DominationCertificate>, Report)> {
    cfg.validate()?;
    let space = cfg.build_space()?;
    let [l1, l2, b, f] = cfg.evaluate_inputs(&space)?;
    let mut run = Run {
        id: &cfg.id,
        rows: Vec::new(),
        details: serde_json::Map::new(),
    };
    let (adj, cert) = run_domination(cfg, &space, &l1, &l2, &b, &f, dyadic_only, &mut run)?;
    Ok((adj, cert, run.finish()))
}

fn finite_row(id: &str, check: &str, value: f64, cap: f64) -> CheckRow {
    CheckRow::at_most(id, check, CheckKind::Ratio, value, cap)
}

#[allow(clippy::too_many_arguments)]
fn run_domination(
    cfg: &ScenarioConfig,
    space: &QuasiMetricSpace,
    l1: &[f64],
    l2: &[f64],
    b: &[f64],
    f: &[f64],
    dyadic_only: bool,
    run: &mut Run<'_>,
) -> Result<(AdjacentSystems, Option<DominationCertificate>)> {
    let t = &cfg.thresholds;
    let adj: AdjacentSystems = build_adjacent_systems(space, cfg.dyadic.delta, cfg.dyadic.t_count, cfg.dyadic_seed())?;
    let mut systems = Vec::new();
    for (i, sys) in adj.systems.iter().enumerate() {
        let check = verify_system(sys, space);
        run.push(
            CheckRow::at_most(run.id, &format!("dyadic.t{i}.violations"), CheckKind::Exact, check.violations.len() as f64, 0.0)
                .with_note(format!("{} cubes", sys.len())),
        );
        let spread = if check.c1 > 0.0 { check.big_c1 / check.c1 } else { f64::INFINITY };
        run.push(finite_row(run.id, &format!("dyadic.t{i}.ball_ratio"), spread, f64::MAX).with_note(format!("c1 {:e}, C1 {:e}", check.c1, check.big_c1)));
        systems.push(check);
    }
    run.push(
        CheckRow::at_least(run.id, "dyadic.capture", CheckKind::Ratio, adj.capture_rate(), t.capture_min).with_note(format!(
            "{} of {} balls, constant {:e}",
            adj.balls_captured, adj.balls_scanned, adj.capture_constant
        )),
    );
    run.detail(
        "dyadic",
        json!({
            "systems": systems,
            "capture_rate": adj.capture_rate(),
            "capture_constant": adj.capture_constant,
            "capture_failures": adj.capture_failures,
            "t_bound": adj.t_bound,
        }),
    )?;
    if dyadic_only || adj.capture_rate() < t.capture_min {
        return Ok((adj, None));
    }

    let weak = weak_type_constant(space, 8, cfg.seed);
    let cert: DominationCertificate = match build_domination(space, &adj, b, f, None, weak) {
        Ok(c) => c,
        Err(Error::Domination(msg)) => {
            run.push(CheckRow::at_most(run.id, "dominate.recursion", CheckKind::Exact, 1.0, 0.0).with_note(msg));
            return Ok((adj, None));
        }
        Err(e) => return Err(e),
    };
    run.push(CheckRow::at_most(run.id, "dominate.recursion", CheckKind::Exact, 0.0, 0.0).with_note(format!("{} nodes", cert.nodes.len())));
    run.push(CheckRow::at_most(run.id, "dominate.exceptional", CheckKind::Exact, cert.exceptional.len() as f64, 0.0));
    run.push(CheckRow::at_least(run.id, "dominate.eta", CheckKind::Ratio, cert.eta_min(), t.eta_min));
    run.push(finite_row(run.id, "dominate.c_emp", cert.c_emp, t.c_emp_cap));
    let recomputed = evaluate_bound(space, &adj.systems, &cert.families, b, f);
    let drift = recomputed.iter().zip(&cert.bound).map(|(a, c)| rel_diff(*a, *c)).fold(0.0, f64::max);
    let rechecked = cert.families.iter().all(|fam| fam.recheck(&adj.systems[fam.system]));
    run.push(
        CheckRow::at_most(run.id, "dominate.recheck", CheckKind::Exact, if rechecked { drift } else { f64::INFINITY }, IDENTITY_TOL)
            .with_note("bound recomputed and packing re-checked"),
    );

    let mut osc_details = Vec::new();
    let mut chains = Vec::new();
    for fam in cert.families.iter().filter(|fam| !fam.cubes.is_empty()) {
        let sys = &adj.systems[fam.system];
        let tag = format!("t{}", fam.system);
        let osc = oscillation_domination(space, sys, fam, b);
        run.push(CheckRow::at_most(run.id, &format!("osc.{tag}.contains"), CheckKind::Exact, if osc.contains_input { 0.0 } else { 1.0 }, 0.0));
        run.push(CheckRow::at_most(
            run.id,
            &format!("osc.{tag}.packing"),
            CheckKind::Exact,
            if osc.packing_ok && osc.recheck_ok { 0.0 } else { 1.0 },
            0.0,
        ));
        run.push(finite_row(run.id, &format!("osc.{tag}.c_emp"), osc.c_emp, t.c_emp_cap));
        let chain = verify_duality_chain(space, sys, fam, b, l1, l2, cfg.p, f, &cfg.probes, cfg.g_probes, cfg.seed)?;
        for mut row in chain.rows(run.id) {
            row.check = row.check.replacen("duality.", &format!("duality.{tag}."), 1);
            run.push(row);
        }
        osc_details.push(json!({
            "system": fam.system,
            "s_size": fam.cubes.len(),
            "s_tilde_size": osc.family.cubes.len(),
            "eta_input": osc.eta_input,
            "eta_tilde": osc.family.eta_certified,
            "c_emp": osc.c_emp,
        }));
        chains.push(chain);
    }
    run.detail(
        "domination",
        json!({
            "weak_type": cert.weak_type,
            "nodes": cert.nodes.len(),
            "overlap": cert.overlap,
            "families": cert.families.iter().map(|f| json!({ "system": f.system, "cubes": f.cubes.len(), "eta": f.eta_certified })).collect::<Vec<_>>(),
            "c_emp": cert.c_emp,
            "oscillation": osc_details,
            "duality": chains,
        }),
    )?;
    Ok((adj, Some(cert)))
}

/// Runs every scenario on at most `jobs` threads and merges the reports in
/// scenario-id order.
pub fn run_suite(configs: &[ScenarioConfig], only: Option<&[SuiteKind]>, jobs: usize) -> Result<Report> {
    let reports: Vec<Report> = with_threads(jobs, || configs.par_iter().map(|c| run_scenario(c, only)).collect())?;
    let mut out = Report::default();
    for r in reports {
        out.extend(r);
    }
    out.sort();
    Ok(out)
}
