//! Checks of the two-weight commutator bounds: probe-estimated upper bounds,
//! the duality chain through the sparse and oscillation families, the
//! lower-bound chain ball by ball, the Bloom–John–Nirenberg estimate and
//! exponent fits over power-weight families.
//!
//! Operator norms are probe estimates, i.e. lower bounds. Each chain step
//! records the largest relative excess of its left side over its right side
//! and the tolerance it is held to.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicSystem;
use crate::error::{invalid, Result};
use crate::operators::{
    commutator_bm, for_each_probe, maximal_commutator, maximal_function, operator_norm_estimate, sparse_commutator,
    sparse_commutator_adjoint, sparse_operator, weighted_lp_norm, NormEstimate, ProbeSet,
};
use crate::report::{excess, rel_diff, CheckKind, CheckRow};
use crate::space::QuasiMetricSpace;
use crate::sparse::{oscillation_domination, SparseFamily};
use crate::weights::{ap_characteristic, ball_oscillation_integrals, bloom_weight, bmo_norm, conjugate, reverse_holder_constant};

/// Tolerance for finite Hölder steps and other exact inequalities.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// `max{1, 1/(p-1)}`.
pub fn sharp_exponent(p: f64) -> f64 {
    1f64.max(1.0 / (p - 1.0))
}

fn is_constant(b: &[f64]) -> bool {
    b.iter().all(|&v| v == b[0])
}

fn dot(space: &QuasiMetricSpace, a: &[f64], b: &[f64]) -> f64 {
    (0..space.n()).map(|x| a[x] * b[x] * space.mass(x)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub name: String,
    pub relation: Relation,
    /// Multiplier on the right side.
    pub constant: f64,
    /// Largest `lhs / rhs` seen, without the multiplier.
    pub ratio: f64,
    /// Largest relative excess of `lhs` over `constant * rhs` (relative
    /// difference for identities).
    pub excess: f64,
    pub tol: f64,
}

impl ChainStep {
    fn new(name: &str, relation: Relation, constant: f64, tol: f64) -> Self {
        ChainStep {
            name: name.to_string(),
            relation,
            constant,
            ratio: 0.0,
            excess: 0.0,
            tol,
        }
    }

    fn observe(&mut self, lhs: f64, rhs: f64) {
        if rhs > 0.0 {
            self.ratio = self.ratio.max(lhs / rhs);
        } else if lhs > 0.0 {
            self.ratio = f64::INFINITY;
        }
        let e = match self.relation {
            Relation::Le => excess(lhs, self.constant * rhs),
            Relation::Eq => rel_diff(lhs, self.constant * rhs),
        };
        self.excess = self.excess.max(e);
    }

    pub fn pass(&self) -> bool {
        self.excess <= self.tol
    }

    pub fn row(&self, scenario: &str, prefix: &str) -> CheckRow {
        CheckRow::at_most(scenario, &format!("{prefix}.{}", self.name), CheckKind::Exact, self.excess, self.tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    pub operator: String,
    pub estimate: NormEstimate,
    pub ap1: f64,
    pub ap2: f64,
    pub exponent: f64,
    pub bmo_nu: f64,
    /// `estimate / (([l1][l2])^exponent ||b||)`; `None` when `b` is constant.
    pub rho: Option<f64>,
    pub rho_cap: f64,
}

impl UpperBound {
    pub fn pass(&self) -> bool {
        self.rho.is_none_or(|r| r <= self.rho_cap)
    }

    pub fn row(&self, scenario: &str, check: &str) -> CheckRow {
        let note = match self.rho {
            Some(_) => format!("probe estimate (lower bound) over {} probes, best {}", self.estimate.probes, self.estimate.best_probe),
            None => "vacuous: constant symbol".to_string(),
        };
        CheckRow::at_most(scenario, check, CheckKind::Ratio, self.rho.unwrap_or(0.0), self.rho_cap).with_note(note)
    }
}

#[allow(clippy::too_many_arguments)]
fn upper_bound(
    space: &QuasiMetricSpace,
    name: &str,
    op: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    lambda1: &[f64],
    lambda2: &[f64],
    p: f64,
    probes: &ProbeSet,
    seed: u64,
    rho_cap: f64,
) -> Result<UpperBound> {
    let (ap1, _) = ap_characteristic(space, lambda1, p)?;
    let (ap2, _) = ap_characteristic(space, lambda2, p)?;
    let nu = bloom_weight(lambda1, lambda2, p)?;
    let (bmo_nu, _) = bmo_norm(space, b, nu.nu.values())?;
    let estimate = operator_norm_estimate(space, op, lambda1, lambda2, p, probes, seed)?;
    let exponent = sharp_exponent(p);
    let rho = if is_constant(b) {
        None
    } else {
        Some(estimate.value / ((ap1 * ap2).powf(exponent) * bmo_nu))
    };
    Ok(UpperBound {
        operator: name.to_string(),
        estimate,
        ap1,
        ap2,
        exponent,
        bmo_nu,
        rho,
        rho_cap,
    })
}

/// Probe estimate of `||C_b : L^p_{l1} -> L^p_{l2}||` against the sharp
/// two-weight bound.
#[allow(clippy::too_many_arguments)]
pub fn verify_upper_bound_cb(
    space: &QuasiMetricSpace,
    b: &[f64],
    lambda1: &[f64],
    lambda2: &[f64],
    p: f64,
    probes: &ProbeSet,
    seed: u64,
    rho_cap: f64,
) -> Result<UpperBound> {
    let op = |f: &[f64]| maximal_commutator(space, b, f).values;
    upper_bound(space, "C_b", op, b, lambda1, lambda2, p, probes, seed, rho_cap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReduction {
    pub probes: usize,
    pub violations: usize,
    /// Largest `(|[b,M]f| - C_b|f|) / scale`, with `scale` the size of the
    /// terms in `b Mf - M(bf)`.
    pub max_excess: f64,
    pub tol: f64,
}

impl PointwiseReduction {
    fn empty(tol: f64) -> Self {
        PointwiseReduction {
            probes: 0,
            violations: 0,
            max_excess: 0.0,
            tol,
        }
    }

    /// Adds one probe `f`; the reduction needs `b >= 0`.
    pub fn observe(&mut self, space: &QuasiMetricSpace, b: &[f64], f: &[f64]) {
        let absf: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        let mf = maximal_function(space, f).values;
        let bf: Vec<f64> = b.iter().zip(f).map(|(x, y)| x * y).collect();
        let mbf = maximal_function(space, &bf).values;
        let cb = maximal_commutator(space, b, &absf).values;
        self.probes += 1;
        for x in 0..space.n() {
            let bm = b[x] * mf[x] - mbf[x];
            let scale = 1f64.max(b[x].abs() * mf[x]).max(mbf[x]);
            let e = (bm.abs() - cb[x]) / scale;
            if e > self.tol {
                self.violations += 1;
            }
            self.max_excess = self.max_excess.max(e);
        }
    }

    pub fn row(&self, scenario: &str) -> CheckRow {
        CheckRow::at_most(scenario, "upper_bm.pointwise", CheckKind::Exact, self.max_excess.max(0.0), self.tol)
            .with_note(format!("{} probes, {} violations", self.probes, self.violations))
    }
}

/// `|[b,M]f| <= C_b(|f|)` at every point, for one function.
pub fn pointwise_reduction(space: &QuasiMetricSpace, b: &[f64], f: &[f64]) -> PointwiseReduction {
    let mut out = PointwiseReduction::empty(IDENTITY_TOL);
    out.observe(space, b, f);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundBm {
    pub bound: UpperBound,
    pub pointwise: PointwiseReduction,
}

/// The `[b,M]` analogue of [`verify_upper_bound_cb`], plus the pointwise
/// reduction to `C_b` on every probe.
#[allow(clippy::too_many_arguments)]
pub fn verify_upper_bound_bm(
    space: &QuasiMetricSpace,
    b: &[f64],
    lambda1: &[f64],
    lambda2: &[f64],
    p: f64,
    probes: &ProbeSet,
    seed: u64,
    rho_cap: f64,
) -> Result<UpperBoundBm> {
    let op = |f: &[f64]| commutator_bm(space, b, f);
    let bound = upper_bound(space, "[b,M]", op, b, lambda1, lambda2, p, probes, seed, rho_cap)?;
    let mut pointwise = PointwiseReduction::empty(IDENTITY_TOL);
    for_each_probe(space, probes, lambda1, p, seed, |_, f| pointwise.observe(space, b, f));
    Ok(UpperBoundBm { bound, pointwise })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityChain {
    pub s_size: usize,
    pub s_tilde_size: usize,
    pub eta_tilde: f64,
    /// Measured constant of the oscillation bound on the family.
    pub c_osc: f64,
    /// `max_{P} Omega(b,P) mu(P) / (nu(P) ||b||_{BMO_nu})` over the family:
    /// cubes are not balls, so the ball norm does not bound this by 1.
    pub k1: f64,
    /// Probe estimates of `||A_S~||` on `L^p_{l2}` and `L^p_{l1}`; the chain
    /// functions are among the probes.
    pub k_a2: f64,
    pub k_a1: f64,
    pub bmo_nu: f64,
    pub steps: Vec<ChainStep>,
    /// `||T_{S,b} f||_{L^p_{l2}} / (||b|| ||f||_{L^p_{l1}})`.
    pub end_to_end: f64,
    /// `c_osc k1 k_a2 k_a1`.
    pub predicted: f64,
    pub self_adjoint_diff: f64,
    pub pairing_diff: f64,
}

impl DualityChain {
    pub fn rows(&self, scenario: &str) -> Vec<CheckRow> {
        let mut rows: Vec<CheckRow> = self.steps.iter().map(|s| s.row(scenario, "duality")).collect();
        rows.push(CheckRow::at_most(
            scenario,
            "duality.self_adjoint",
            CheckKind::Exact,
            self.self_adjoint_diff,
            IDENTITY_TOL,
        ));
        rows.push(CheckRow::at_most(scenario, "duality.pairing", CheckKind::Exact, self.pairing_diff, IDENTITY_TOL));
        rows.push(
            CheckRow::at_most(scenario, "duality.end_to_end", CheckKind::Ratio, self.end_to_end, self.predicted * (1.0 + EXACT_TOL))
                .with_note("threshold is c_osc * k1 * k_a2 * k_a1"),
        );
        rows
    }

    pub fn pass(&self) -> bool {
        self.steps.iter().all(ChainStep::pass)
            && self.self_adjoint_diff <= IDENTITY_TOL
            && self.pairing_diff <= IDENTITY_TOL
            && self.end_to_end <= self.predicted * (1.0 + EXACT_TOL)
    }
}

fn positive_random(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z.exp()
        })
        .collect()
}

fn signed_random(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Evaluates every step of the duality argument for `T_{S,b} f`, for the
/// extremal dual function and `g_probes` seeded random ones.
#[allow(clippy::too_many_arguments)]
pub fn verify_duality_chain(
    space: &QuasiMetricSpace,
    system: &DyadicSystem,
    family: &SparseFamily,
    b: &[f64],
    lambda1: &[f64],
    lambda2: &[f64],
    p: f64,
    f: &[f64],
    probes: &ProbeSet,
    g_probes: usize,
    seed: u64,
) -> Result<DualityChain> {
    let n = space.n();
    let pp = conjugate(p);
    let nu_w = bloom_weight(lambda1, lambda2, p)?;
    let nu = nu_w.nu.values();
    let (bmo_nu, _) = bmo_norm(space, b, nu)?;
    let osc = oscillation_domination(space, system, family, b);
    let tilde = &osc.family.cubes;
    let s = &family.cubes;
    let absf: Vec<f64> = f.iter().map(|v| v.abs()).collect();

    let avg = |q: usize, g: &[f64]| {
        system.cube(q).members.iter().map(|&y| g[y] * space.mass(y)).sum::<f64>() / system.measure(q)
    };
    let integral = |q: usize, g: &[f64]| system.cube(q).members.iter().map(|&y| g[y] * space.mass(y)).sum::<f64>();

    // Per cube of S~: b_P, Omega(b,P), nu(P)/mu(P).
    let info: Vec<(f64, f64, f64)> = tilde
        .iter()
        .map(|&q| {
            let bq = avg(q, b);
            let dev: Vec<f64> = b.iter().map(|v| (v - bq).abs()).collect();
            (bq, avg(q, &dev), avg(q, nu))
        })
        .collect();
    let mut k1 = 0.0f64;
    if bmo_nu > 0.0 {
        for (i, &q) in tilde.iter().enumerate() {
            let (_, omega, nu_avg) = info[i];
            let _ = q;
            k1 = k1.max(omega / (nu_avg * bmo_nu));
        }
    }
    // Chains of S~ cubes containing each point, coarse to fine.
    let mut chains: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &q) in tilde.iter().enumerate() {
        for &x in &system.cube(q).members {
            chains[x].push(i);
        }
    }
    let pos = |q: usize| tilde.binary_search(&q).expect("S is inside S~");
    let fq: Vec<f64> = s.iter().map(|&q| avg(q, &absf)).collect();

    let tf = sparse_commutator(space, system, s, b, f);
    let v0 = weighted_lp_norm(space, &tf, lambda2, p);
    let a_f = sparse_operator(space, system, tilde, &absf);
    let a_f_nu: Vec<f64> = (0..n).map(|x| a_f[x] * nu[x]).collect();
    let aa = sparse_operator(space, system, tilde, &a_f_nu);
    let as_f = sparse_operator(space, system, s, &absf);
    let f_norm = weighted_lp_norm(space, f, lambda1, p);

    let op = |g: &[f64]| sparse_operator(space, system, tilde, g);
    let mut est2 = operator_norm_estimate(space, op, lambda2, lambda2, p, probes, seed)?;
    let h_norm = weighted_lp_norm(space, &a_f_nu, lambda2, p);
    if h_norm > 0.0 {
        est2.observe("chain", weighted_lp_norm(space, &aa, lambda2, p) / h_norm);
    }
    let mut est1 = operator_norm_estimate(space, op, lambda1, lambda1, p, probes, seed)?;
    if f_norm > 0.0 {
        est1.observe("chain", weighted_lp_norm(space, &a_f, lambda1, p) / f_norm);
    }
    let (k_a2, k_a1) = (est2.value, est1.value);

    let names: [(&str, Relation, f64, f64); 15] = [
        ("dual_extremal", Relation::Le, 1.0, EXACT_TOL),
        ("holder_dual", Relation::Le, 1.0, EXACT_TOL),
        ("oscillation", Relation::Le, osc.c_emp, EXACT_TOL),
        ("bmo", Relation::Le, k1 * bmo_nu, EXACT_TOL),
        ("exchange_p", Relation::Eq, 1.0, IDENTITY_TOL),
        ("averages", Relation::Eq, 1.0, IDENTITY_TOL),
        ("nu_measure", Relation::Eq, 1.0, IDENTITY_TOL),
        ("drop_inclusion", Relation::Le, 1.0, EXACT_TOL),
        ("exchange_q", Relation::Eq, 1.0, IDENTITY_TOL),
        ("enlarge_family", Relation::Le, 1.0, EXACT_TOL),
        ("self_adjoint", Relation::Eq, 1.0, IDENTITY_TOL),
        ("holder", Relation::Le, 1.0, EXACT_TOL),
        ("sparse_bound_l2", Relation::Le, k_a2, EXACT_TOL),
        ("bloom_identity", Relation::Eq, 1.0, IDENTITY_TOL),
        ("sparse_bound_l1", Relation::Le, k_a1, EXACT_TOL),
    ];
    let mut steps: Vec<ChainStep> = names.iter().map(|&(nm, r, c, t)| ChainStep::new(nm, r, c, t)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut duals: Vec<Vec<f64>> = Vec::new();
    if v0 > 0.0 {
        duals.push((0..n).map(|x| (tf[x].abs() / v0).powf(p - 1.0)).collect());
    }
    for _ in 0..g_probes {
        duals.push(positive_random(n, &mut rng));
    }
    for (gi, g) in duals.iter().enumerate() {
        let gn = weighted_lp_norm(space, g, lambda2, pp);
        if gn == 0.0 {
            continue;
        }
        let g: Vec<f64> = g.iter().map(|v| v / gn).collect();
        let gl: Vec<f64> = (0..n).map(|x| g[x].abs() * lambda2[x]).collect();

        let paired = dot(space, &tf.iter().map(|v| v.abs()).collect::<Vec<_>>(), &gl);
        let mut v1 = 0.0;
        let mut v2 = 0.0;
        let mut v3 = 0.0;
        let mut v4 = 0.0;
        let mut v5 = 0.0;
        let mut v6 = 0.0;
        let mut v7 = 0.0;
        let a_g = sparse_operator(space, system, tilde, &gl);
        let gl_avg: Vec<f64> = tilde.iter().map(|&q| avg(q, &gl)).collect();
        for (qi, &q) in s.iter().enumerate() {
            let qp = pos(q);
            let bq = info[qp].0;
            let mut t1 = 0.0;
            let mut t2 = 0.0;
            let mut t3 = 0.0;
            let mut t6 = 0.0;
            let mut t7 = 0.0;
            for &x in &system.cube(q).members {
                let m = space.mass(x);
                let chain = &chains[x];
                let start = chain.iter().position(|&i| i == qp).expect("x lies in Q");
                let mut om = 0.0;
                let mut nr = 0.0;
                let mut ga = 0.0;
                for &i in &chain[start..] {
                    om += info[i].1;
                    nr += info[i].2;
                    ga += gl_avg[i];
                }
                t1 += gl[x] * (b[x] - bq).abs() * m;
                t2 += gl[x] * om * m;
                t3 += gl[x] * nr * m;
                t6 += ga * nu[x] * m;
                t7 += a_g[x] * nu[x] * m;
            }
            let mut t4 = 0.0;
            let mut t5 = 0.0;
            for (i, &pc) in tilde.iter().enumerate() {
                if system.is_within(pc, q) {
                    t4 += info[i].2 * integral(pc, &gl);
                    t5 += integral(pc, nu) * gl_avg[i];
                }
            }
            v1 += t1 * fq[qi];
            v2 += t2 * fq[qi];
            v3 += t3 * fq[qi];
            v4 += t4 * fq[qi];
            v5 += t5 * fq[qi];
            v6 += t6 * fq[qi];
            v7 += t7 * fq[qi];
        }
        let v8 = dot(space, &as_f, &(0..n).map(|x| a_g[x] * nu[x]).collect::<Vec<_>>());
        let v9 = dot(space, &a_f, &(0..n).map(|x| a_g[x] * nu[x]).collect::<Vec<_>>());
        let v10 = dot(space, &aa, &gl);
        let v11 = weighted_lp_norm(space, &aa, lambda2, p) * weighted_lp_norm(space, &g, lambda2, pp);
        let v12 = h_norm;
        let v13 = weighted_lp_norm(space, &a_f, lambda1, p);

        if gi == 0 && v0 > 0.0 {
            steps[0].observe(v0, v1);
        }
        steps[1].observe(paired, v0);
        steps[2].observe(v1, v2);
        steps[3].observe(v2, v3);
        steps[4].observe(v3, v4);
        steps[5].observe(v4, v5);
        steps[6].observe(v5, v6);
        steps[7].observe(v6, v7);
        steps[8].observe(v7, v8);
        steps[9].observe(v8, v9);
        steps[10].observe(v9, v10);
        steps[11].observe(v10, v11);
        steps[12].observe(v11, v12);
        steps[13].observe(v12, v13);
        steps[14].observe(v13, f_norm);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let rf = signed_random(n, &mut rng);
    let rg = signed_random(n, &mut rng);
    let self_adjoint_diff = rel_diff(
        dot(space, &sparse_operator(space, system, tilde, &rf), &rg),
        dot(space, &rf, &sparse_operator(space, system, tilde, &rg)),
    );
    let pairing_diff = rel_diff(
        dot(space, &sparse_commutator(space, system, s, b, &rf), &rg),
        dot(space, &rf, &sparse_commutator_adjoint(space, system, s, b, &rg)),
    );

    let end_to_end = if bmo_nu > 0.0 && f_norm > 0.0 { v0 / (bmo_nu * f_norm) } else { 0.0 };
    Ok(DualityChain {
        s_size: s.len(),
        s_tilde_size: tilde.len(),
        eta_tilde: osc.family.eta_certified,
        c_osc: osc.c_emp,
        k1,
        k_a2,
        k_a1,
        bmo_nu,
        steps,
        end_to_end,
        predicted: osc.c_emp * k1 * k_a2 * k_a1,
        self_adjoint_diff,
        pairing_diff,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// Probe estimate of `||C_b||`, including every ball indicator; it is a
    /// lower bound of the norm, so `c_meas` is an upper estimate.
    pub norm: NormEstimate,
    pub bmo_nu: f64,
    /// `||b||_{BMO_nu} / norm`.
    pub c_meas: f64,
    pub steps: Vec<ChainStep>,
    /// `max_B mu(B) l1(B)^(1/p) / (nu(B) l2(B)^(1/p))`.
    pub aux_max: f64,
    pub aux_witness: usize,
    /// Reverse Hölder constant of `l1` at exponent `1/(1+p)`.
    pub rh: f64,
    /// `rh^(1/p)`.
    pub aux_bound: f64,
    pub balls: usize,
    pub vacuous: bool,
}

impl LowerBound {
    pub fn rows(&self, scenario: &str, c_cap: f64) -> Vec<CheckRow> {
        let mut rows: Vec<CheckRow> = self.steps.iter().map(|s| s.row(scenario, "lower")).collect();
        rows.push(CheckRow::at_most(
            scenario,
            "lower.aux",
            CheckKind::Exact,
            excess(self.aux_max, self.aux_bound),
            EXACT_TOL,
        ));
        rows.push(
            CheckRow::at_most(scenario, "lower.c_meas", CheckKind::Ratio, self.c_meas, c_cap)
                .with_note("norm is a probe estimate (lower bound); ratio is an upper estimate"),
        );
        rows
    }

    pub fn pass(&self) -> bool {
        self.steps.iter().all(ChainStep::pass) && excess(self.aux_max, self.aux_bound) <= EXACT_TOL && self.c_meas.is_finite()
    }
}

/// Walks the lower-bound chain on every distinct canonical ball.
#[allow(clippy::too_many_arguments)]
pub fn verify_lower_bound(
    space: &QuasiMetricSpace,
    b: &[f64],
    lambda1: &[f64],
    lambda2: &[f64],
    p: f64,
    probes: &ProbeSet,
    seed: u64,
) -> Result<LowerBound> {
    let nu_w = bloom_weight(lambda1, lambda2, p)?;
    let nu = nu_w.nu.values();
    let (bmo_nu, _) = bmo_norm(space, b, nu)?;
    let (rh, _) = reverse_holder_constant(space, lambda1, 1.0 / (1.0 + p))?;
    let mut norm = operator_norm_estimate(space, |f| maximal_commutator(space, b, f).values, lambda1, lambda2, p, probes, seed)?;
    let reps = space.distinct_ball_sets().to_vec();
    let n = space.n();
    let inv_p = 1.0 / p;

    struct PerBall {
        s: [f64; 7],
        factor: f64,
        l1_root: f64,
        aux: f64,
    }
    let mut per_ball = Vec::with_capacity(reps.len());
    let mut chi = vec![0.0; n];
    for &id in &reps {
        let ball = space.ball(id);
        let members: Vec<usize> = ball.members().iter().map(|&y| y as usize).collect();
        let mass = |y: usize| space.mass(y);
        let mu_b: f64 = members.iter().map(|&y| mass(y)).sum();
        let nu_b: f64 = members.iter().map(|&y| nu[y] * mass(y)).sum();
        let l1_b: f64 = members.iter().map(|&y| lambda1[y] * mass(y)).sum();
        let l2_b: f64 = members.iter().map(|&y| lambda2[y] * mass(y)).sum();
        let spread = |c: f64| members.iter().map(|&y| (b[y] - c).abs() * mass(y)).sum::<f64>();
        let b_b = members.iter().map(|&y| b[y] * mass(y)).sum::<f64>() / mu_b;
        let flat = members.iter().all(|&y| b[y] == b[members[0]]);
        let s1 = if flat { 0.0 } else { spread(b_b) / nu_b };

        let mut sorted = members.clone();
        sorted.sort_by(|&x, &y| b[x].total_cmp(&b[y]));
        let mut acc = 0.0;
        let mut median = b[sorted[0]];
        for &y in &sorted {
            acc += mass(y);
            if acc >= mu_b / 2.0 {
                median = b[y];
                break;
            }
        }
        let s2 = spread(median) / nu_b;
        let s3 = members.iter().map(|&y| spread(b[y])).fold(f64::INFINITY, f64::min) / nu_b;
        let s4 = members.iter().map(|&y| spread(b[y]) * lambda2[y] * mass(y)).sum::<f64>() / (nu_b * l2_b);

        for &y in &members {
            chi[y] = 1.0;
        }
        let cb = maximal_commutator(space, b, &chi).values;
        for &y in &members {
            chi[y] = 0.0;
        }
        let l1_root = l1_b.powf(inv_p);
        let cb_norm = weighted_lp_norm(space, &cb, lambda2, p);
        norm.observe("ball", cb_norm / l1_root);

        let s5 = mu_b / (nu_b * l2_b) * members.iter().map(|&y| cb[y] * lambda2[y] * mass(y)).sum::<f64>();
        let factor = mu_b / (nu_b * l2_b.powf(inv_p));
        let s6 = factor * members.iter().map(|&y| cb[y].powf(p) * lambda2[y] * mass(y)).sum::<f64>().powf(inv_p);
        let s7 = factor * cb_norm;
        per_ball.push(PerBall {
            s: [s1, s2, s3, s4, s5, s6, s7],
            factor,
            l1_root,
            aux: factor * l1_root,
        });
    }

    let mut steps = vec![
        ChainStep::new("median", Relation::Le, 2.0, EXACT_TOL),
        ChainStep::new("median_inf", Relation::Le, 1.0, EXACT_TOL),
        ChainStep::new("inf_average", Relation::Le, 1.0, EXACT_TOL),
        ChainStep::new("maximal_commutator", Relation::Le, 1.0, EXACT_TOL),
        ChainStep::new("holder", Relation::Le, 1.0, EXACT_TOL),
        ChainStep::new("extend_norm", Relation::Le, 1.0, EXACT_TOL),
        ChainStep::new("testing", Relation::Le, 1.0, EXACT_TOL),
    ];
    let mut aux_max = 0.0f64;
    let mut aux_witness = reps.first().copied().unwrap_or(0);
    for (pb, &id) in per_ball.iter().zip(&reps) {
        for i in 0..6 {
            steps[i].observe(pb.s[i], pb.s[i + 1]);
        }
        steps[6].observe(pb.s[6], norm.value * pb.factor * pb.l1_root);
        if pb.aux > aux_max {
            aux_max = pb.aux;
            aux_witness = id;
        }
    }
    let vacuous = is_constant(b);
    let c_meas = if vacuous || norm.value == 0.0 { 0.0 } else { bmo_nu / norm.value };
    Ok(LowerBound {
        norm,
        bmo_nu,
        c_meas,
        steps,
        aux_max,
        aux_witness,
        rh,
        aux_bound: rh.powf(inv_p),
        balls: reps.len(),
        vacuous,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JohnNirenberg {
    pub p: f64,
    pub r: f64,
    /// 1 for `r <= p'`, 2 above it (measurement only).
    pub branch: u8,
    /// Smallest multiplier making the branch inequality hold on every ball.
    pub constant: f64,
    pub witness: usize,
    pub bmo_nu: f64,
    pub vacuous: bool,
}

impl JohnNirenberg {
    pub fn row(&self, scenario: &str, cap: f64) -> CheckRow {
        let name = format!("jn.branch{}.r{}", self.branch, self.r);
        let row = CheckRow::at_most(scenario, &name, CheckKind::Ratio, self.constant, cap);
        if self.vacuous {
            row.with_note("vacuous: constant symbol")
        } else {
            row
        }
    }
}

/// `mu(B)^-1 ∫_B |b - b_B|^r l1^(-r/p)` against the matching branch of the
/// Bloom–John–Nirenberg bound, on every distinct canonical ball.
pub fn verify_bloom_jn(
    space: &QuasiMetricSpace,
    b: &[f64],
    lambda1: &[f64],
    lambda2: &[f64],
    p: f64,
    r: f64,
    epsilon: f64,
) -> Result<JohnNirenberg> {
    let pp = conjugate(p);
    if !(r >= 1.0 && r <= pp + epsilon.max(0.0)) {
        return Err(invalid("r", format!("need 1 <= r <= p' + eps = {}, got {r}", pp + epsilon.max(0.0))));
    }
    let nu_w = bloom_weight(lambda1, lambda2, p)?;
    let (bmo_nu, _) = bmo_norm(space, b, nu_w.nu.values())?;
    let (ap1, _) = ap_characteristic(space, lambda1, p)?;
    let (ap2, _) = ap_characteristic(space, lambda2, p)?;
    let branch = if r <= pp { 1 } else { 2 };
    let vacuous = is_constant(b);
    let mu = space.ball_measures();
    let ib = space.ball_integrals(b);
    let l2_root: Vec<f64> = lambda2.iter().map(|v| v.powf(-1.0 / p)).collect();
    let il2 = space.ball_integrals(&l2_root);
    let l1_pow: Vec<f64> = lambda1.iter().map(|v| v.powf(-r / p)).collect();
    let osc = if r == 1.0 && lambda1.iter().all(|&v| v == 1.0) {
        Some(ball_oscillation_integrals(space, b))
    } else {
        None
    };
    let mut constant = 0.0f64;
    let mut witness = 0;
    for &id in space.distinct_ball_sets() {
        let ball = space.ball(id);
        let b_b = ib[id] / mu[id];
        let integral = match &osc {
            Some(o) => o[id],
            None => ball
                .members()
                .iter()
                .map(|&y| {
                    let y = y as usize;
                    (b[y] - b_b).abs().powf(r) * l1_pow[y] * space.mass(y)
                })
                .sum(),
        };
        let lhs = integral / mu[id];
        let mut rhs = bmo_nu.powf(r) * ap2.powf(r / p) * (il2[id] / mu[id]).powf(r);
        if branch == 2 {
            rhs *= ap1.powf(r / p);
        }
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs > 0.0 {
            lhs / rhs
        } else {
            f64::INFINITY
        };
        if ratio > constant {
            constant = ratio;
            witness = id;
        }
    }
    Ok(JohnNirenberg {
        p,
        r,
        branch,
        constant,
        witness,
        bmo_nu,
        vacuous,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApDuality {
    /// `[w^(1-p')]_{A_p'}`.
    pub dual: f64,
    /// `[w]_{A_p}^(p'-1)`.
    pub primal: f64,
    pub rel_diff: f64,
}

impl ApDuality {
    pub fn row(&self, scenario: &str, check: &str) -> CheckRow {
        CheckRow::at_most(scenario, check, CheckKind::Exact, self.rel_diff, EXACT_TOL)
    }
}

/// `[w^(1-p')]_{A_p'} = [w]_{A_p}^(p'-1)`.
pub fn ap_duality(space: &QuasiMetricSpace, w: &[f64], p: f64) -> Result<ApDuality> {
    let pp = conjugate(p);
    let sigma: Vec<f64> = w.iter().map(|v| v.powf(1.0 - pp)).collect();
    let (dual, _) = ap_characteristic(space, &sigma, pp)?;
    let (ap, _) = ap_characteristic(space, w, p)?;
    let primal = ap.powf(pp - 1.0);
    Ok(ApDuality {
        dual,
        primal,
        rel_diff: rel_diff(dual, primal),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// `(log characteristic, log norm)` of the usable points.
    pub points: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Standard error of the slope.
    pub slope_stderr: Option<f64>,
    pub ceiling: f64,
    pub status: String,
}

impl ExponentFit {
    pub fn pass(&self) -> bool {
        self.slope.is_none_or(|s| s <= self.ceiling)
    }

    pub fn row(&self, scenario: &str, check: &str) -> CheckRow {
        CheckRow::at_most(scenario, check, CheckKind::Fit, self.slope.unwrap_or(0.0), self.ceiling).with_note(match self.slope_stderr {
            Some(se) => format!("{}; {} points; stderr {se:e}", self.status, self.points.len()),
            None => self.status.clone(),
        })
    }
}

/// Least-squares slope of `log norm` against `log characteristic`.
/// `ceiling` is the largest acceptable slope.
pub fn fit_weight_exponent(samples: &[(f64, f64)], ceiling: f64) -> ExponentFit {
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(c, v)| c.is_finite() && v.is_finite() && *c > 0.0 && *v > 0.0)
        .map(|(c, v)| (c.ln(), v.ln()))
        .collect();
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 3 || sxx < 1e-12 {
        return ExponentFit {
            points,
            slope: None,
            intercept: None,
            slope_stderr: None,
            ceiling,
            status: "insufficient spread".to_string(),
        };
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (sse / (k - 2.0) / sxx).sqrt();
    ExponentFit {
        points,
        slope: Some(slope),
        intercept: Some(intercept),
        slope_stderr: Some(stderr),
        ceiling,
        status: "ok".to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub a: f64,
    pub ap: f64,
    pub sparse: f64,
    pub cb: f64,
    pub bm: f64,
    pub bmo: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSweep {
    pub p: f64,
    pub points: Vec<SweepPoint>,
    /// `||A_S||_{L^p_w}` against `[w]_{A_p}`.
    pub sparse: ExponentFit,
    /// `||C_b||_{L^p_w} / ||b||_{BMO}` against `[w]_{A_p}^2`.
    pub cb: ExponentFit,
    pub bm: ExponentFit,
}

impl ExponentSweep {
    pub fn rows(&self, scenario: &str) -> Vec<CheckRow> {
        vec![
            self.sparse.row(scenario, "exponent.sparse"),
            self.cb.row(scenario, "exponent.cb"),
            self.bm.row(scenario, "exponent.bm"),
        ]
    }

    pub fn pass(&self) -> bool {
        self.sparse.pass() && self.cb.pass() && self.bm.pass()
    }
}

/// Power weights `w_a = (x + 1/N)^a` with `lambda1 = lambda2 = w_a`, the
/// symbol `b`, and `S` the given cubes. The fit ceiling is
/// `max{1, 1/(p-1)} + margin`.
#[allow(clippy::too_many_arguments)]
pub fn power_weight_sweep(
    space: &QuasiMetricSpace,
    system: &DyadicSystem,
    cubes: &[usize],
    b: &[f64],
    p: f64,
    exponents: &[f64],
    probes: &ProbeSet,
    margin: f64,
    seed: u64,
) -> Result<ExponentSweep> {
    let n = space.n();
    let mut points = Vec::with_capacity(exponents.len());
    for &a in exponents {
        let w: Vec<f64> = (0..n).map(|x| (space.position(x) + 1.0 / n as f64).powf(a)).collect();
        let (ap, _) = ap_characteristic(space, &w, p)?;
        let (bmo, _) = bmo_norm(space, b, &vec![1.0; n])?;
        let sparse = operator_norm_estimate(space, |f| sparse_operator(space, system, cubes, f), &w, &w, p, probes, seed)?.value;
        let cb = operator_norm_estimate(space, |f| maximal_commutator(space, b, f).values, &w, &w, p, probes, seed)?.value;
        let bm = operator_norm_estimate(space, |f| commutator_bm(space, b, f), &w, &w, p, probes, seed)?.value;
        points.push(SweepPoint { a, ap, sparse, cb, bm, bmo });
    }
    let ceiling = sharp_exponent(p) + margin;
    let fit = |value: &dyn Fn(&SweepPoint) -> f64, square: bool| {
        let samples: Vec<(f64, f64)> = points
            .iter()
            .map(|pt| (if square { pt.ap * pt.ap } else { pt.ap }, value(pt)))
            .collect();
        fit_weight_exponent(&samples, ceiling)
    };
    Ok(ExponentSweep {
        p,
        sparse: fit(&|pt| pt.sparse, false),
        cb: fit(&|pt| pt.cb / pt.bmo, true),
        bm: fit(&|pt| pt.bm / pt.bmo, true),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::build_dyadic_system;
    use crate::space::{build_space, SpaceKind, SpaceParams};

    fn pair() -> QuasiMetricSpace {
        build_space(SpaceKind::Pair, 2, &SpaceParams::default(), 0).unwrap()
    }

    #[test]
    fn constant_symbol_is_vacuous() {
        let s = build_space(SpaceKind::Line, 8, &SpaceParams::default(), 0).unwrap();
        let w = vec![1.0; 8];
        let up = verify_upper_bound_cb(&s, &[3.0; 8], &w, &w, 2.0, &ProbeSet::default(), 1, 100.0).unwrap();
        assert!(up.rho.is_none());
        assert_eq!(up.estimate.value, 0.0);
        let jn = verify_bloom_jn(&s, &[3.0; 8], &w, &w, 2.0, 1.0, 0.0).unwrap();
        assert_eq!(jn.constant, 0.0);
    }

    #[test]
    fn pair_lower_bound() {
        let s = pair();
        let w = [1.0, 1.0];
        let lb = verify_lower_bound(&s, &[0.0, 1.0], &w, &w, 2.0, &ProbeSet::default(), 0).unwrap();
        assert_eq!(lb.bmo_nu, 0.5);
        assert!(lb.norm.value >= 0.5);
        assert!(lb.c_meas <= 1.0);
        assert!(lb.pass());
        assert!((lb.aux_max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pair_jn_two_weights() {
        let s = pair();
        let jn = verify_bloom_jn(&s, &[0.0, 1.0], &[1.0, 4.0], &[4.0, 1.0], 2.0, 2.0, 0.0).unwrap();
        assert_eq!(jn.branch, 1);
        assert!(jn.constant.is_finite() && jn.constant > 0.0);
        assert!(verify_bloom_jn(&s, &[0.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], 2.0, 2.5, 0.5).is_ok());
        assert!(verify_bloom_jn(&s, &[0.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], 2.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn fit_recovers_slope() {
        let samples: Vec<(f64, f64)> = (1..8).map(|i| (i as f64, 3.0 * (i as f64).powf(1.5))).collect();
        let fit = fit_weight_exponent(&samples, 2.0);
        assert!((fit.slope.unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(fit_weight_exponent(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], 1.0).status, "insufficient spread");
    }

    #[test]
    fn duality_chain_line() {
        let s = build_space(SpaceKind::Line, 16, &SpaceParams::default(), 0).unwrap();
        let sys = build_dyadic_system(&s, 0.5, 0).unwrap();
        let fam = SparseFamily::new(0, &sys, vec![0, 1, 2]);
        let b: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64).collect();
        let l1: Vec<f64> = (0..16).map(|i| 1.0 + i as f64 / 8.0).collect();
        let l2: Vec<f64> = (0..16).map(|i| 2.0 - i as f64 / 16.0).collect();
        let f: Vec<f64> = (0..16).map(|i| (i as f64 - 7.5).abs()).collect();
        let chain = verify_duality_chain(&s, &sys, &fam, &b, &l1, &l2, 2.0, &f, &ProbeSet::default(), 4, 3).unwrap();
        for step in &chain.steps {
            assert!(step.pass(), "{step:?}");
        }
        assert!(chain.pass());
    }
}
