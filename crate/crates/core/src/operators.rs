//! Maximal operators, maximal commutators, sparse operators and probe-based
//! norm estimates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicSystem;
use crate::error::{invalid, Error, Result};
use crate::space::{BallRef, QuasiMetricSpace};
use crate::weights::conjugate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    pub values: Vec<f64>,
    /// Ball id attaining the supremum at each point; empty for operators
    /// that are sums rather than suprema.
    pub witness: Vec<usize>,
}

/// `<g>_B` for every canonical ball.
pub fn ball_averages(space: &QuasiMetricSpace, g: &[f64]) -> Vec<f64> {
    let ints = space.ball_integrals(g);
    ints.iter().zip(space.ball_measures()).map(|(i, m)| i / m).collect()
}

/// `Mf(x) = sup_{B ∋ x} <|f|>_B`. For each center the balls containing `x`
/// are the levels from `level_of(c, x)` up, so a suffix maximum per center
/// gives the answer in `O(N^2)`.
pub fn maximal_function(space: &QuasiMetricSpace, f: &[f64]) -> OperatorResult {
    let n = space.n();
    let absf: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let avg = ball_averages(space, &absf);
    let mut suffix: Vec<(f64, usize)> = vec![(0.0, 0); avg.len()];
    for c in 0..n {
        let first = space.ball_id(c, 0);
        let levels = space.levels_at(c);
        let mut best = (f64::NEG_INFINITY, 0);
        for l in (0..levels).rev() {
            let id = first + l;
            if avg[id] >= best.0 {
                best = (avg[id], id);
            }
            suffix[id] = best;
        }
    }
    let mut values = vec![f64::NEG_INFINITY; n];
    let mut witness = vec![0; n];
    for c in 0..n {
        for x in 0..n {
            let (v, id) = suffix[space.ball_id(c, space.level_of(c, x))];
            if v > values[x] {
                values[x] = v;
                witness[x] = id;
            }
        }
    }
    OperatorResult { values, witness }
}

/// `C_b f(x) = sup_{B ∋ x} mu(B)^-1 ∫_B |b(x) - b(y)| |f(y)| dmu(y)`.
///
/// For fixed `x` and center the integral only changes at levels where a
/// support point of `f` enters, and between such levels the average
/// decreases, so only those levels (and the first level containing `x`)
/// are candidates.
pub fn maximal_commutator(space: &QuasiMetricSpace, b: &[f64], f: &[f64]) -> OperatorResult {
    let n = space.n();
    let mu = space.ball_measures();
    let support: Vec<Vec<(u32, u32)>> = (0..n)
        .map(|c| {
            space
                .order_from(c)
                .iter()
                .filter(|&&y| f[y as usize] != 0.0)
                .map(|&y| (y, space.level_of(c, y as usize) as u32))
                .collect()
        })
        .collect();
    let per_point: Vec<(f64, usize)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let bx = b[x];
            let mut best = (f64::NEG_INFINITY, 0usize);
            for c in 0..n {
                let first = space.ball_id(c, 0);
                let l0 = space.level_of(c, x) as u32;
                let seq = &support[c];
                let term = |y: u32| (bx - b[y as usize]).abs() * f[y as usize].abs() * space.mass(y as usize);
                let mut acc = 0.0;
                let mut i = 0;
                while i < seq.len() && seq[i].1 <= l0 {
                    acc += term(seq[i].0);
                    i += 1;
                }
                let mut consider = |level: u32, acc: f64| {
                    let id = first + level as usize;
                    let v = acc / mu[id];
                    if v > best.0 {
                        best = (v, id);
                    }
                };
                consider(l0, acc);
                while i < seq.len() {
                    let l = seq[i].1;
                    while i < seq.len() && seq[i].1 == l {
                        acc += term(seq[i].0);
                        i += 1;
                    }
                    consider(l, acc);
                }
            }
            best
        })
        .collect();
    OperatorResult {
        values: per_point.iter().map(|p| p.0).collect(),
        witness: per_point.iter().map(|p| p.1).collect(),
    }
}

/// Recomputes `<|b(x) - b||f|>_B` in distance order; matches the values of
/// [`maximal_commutator`] bit for bit at its witnesses.
pub fn commutator_average(space: &QuasiMetricSpace, b: &[f64], f: &[f64], x: usize, ball: BallRef<'_>) -> f64 {
    let mut acc = 0.0;
    for &y in ball.members() {
        let y = y as usize;
        if f[y] != 0.0 {
            acc += (b[x] - b[y]).abs() * f[y].abs() * space.mass(y);
        }
    }
    acc / ball.measure()
}

/// `[b, M] f = b Mf - M(bf)`.
pub fn commutator_bm(space: &QuasiMetricSpace, b: &[f64], f: &[f64]) -> Vec<f64> {
    let mf = maximal_function(space, f);
    let bf: Vec<f64> = b.iter().zip(f).map(|(x, y)| x * y).collect();
    let mbf = maximal_function(space, &bf);
    (0..space.n()).map(|x| b[x] * mf.values[x] - mbf.values[x]).collect()
}

/// Local grand maximal operator of a region `R` with enlargement `E`:
/// for `x ∈ R`, the maximum over canonical balls `x ∈ B ⊆ R` and points
/// `ξ ∈ B` of `M(f χ_{E \ 4A0 B})(ξ)`, where `4A0 B` is the closed dilation of
/// `B` at its realized radius. Values outside `R` are zero.
pub fn local_grand_maximal_region(space: &QuasiMetricSpace, region: &[bool], enlarged: &[bool], f: &[f64]) -> Vec<f64> {
    let n = space.n();
    let factor = 4.0 * space.a0();
    let mut out = vec![0.0; n];
    let mut g = vec![0.0; n];
    for c in (0..n).filter(|&c| region[c]) {
        let order = space.order_from(c);
        let mut last_key: Option<usize> = None;
        let mut mg: Vec<f64> = Vec::new();
        let mut zero = true;
        for l in 0..space.levels_at(c) {
            let start = if l == 0 { 0 } else { space.level_end(c, l - 1) };
            let end = space.level_end(c, l);
            if order[start..end].iter().any(|&y| !region[y as usize]) {
                break;
            }
            let ball = space.ball_at(c, l);
            let dil = space.dilate(ball, factor);
            if last_key != Some(dil.level) {
                last_key = Some(dil.level);
                zero = true;
                for y in 0..n {
                    let keep = enlarged[y] && !dil.contains(y) && f[y] != 0.0;
                    g[y] = if keep { f[y] } else { 0.0 };
                    zero &= !keep;
                }
                if !zero {
                    mg = maximal_function(space, &g).values;
                }
            }
            if zero {
                continue;
            }
            let members = &order[..end];
            let v = members.iter().map(|&y| mg[y as usize]).fold(0.0, f64::max);
            for &y in members {
                let y = y as usize;
                if v > out[y] {
                    out[y] = v;
                }
            }
        }
    }
    out
}

/// `M_{B0} f` on the ball `b0`, indexed by point; rejects queries outside it.
#[derive(Clone, Debug)]
pub struct LocalMaximal {
    pub region: Vec<bool>,
    pub values: Vec<f64>,
}

impl LocalMaximal {
    pub fn at(&self, x: usize) -> Result<f64> {
        if !self.region.get(x).copied().unwrap_or(false) {
            return Err(Error::OutsideRegion { point: x });
        }
        Ok(self.values[x])
    }
}

pub fn local_grand_maximal(space: &QuasiMetricSpace, b0: usize, f: &[f64]) -> LocalMaximal {
    let ball = space.ball(b0);
    let mut region = vec![false; space.n()];
    for &y in ball.members() {
        region[y as usize] = true;
    }
    let big = space.dilate(ball, 4.0 * space.a0());
    let enlarged: Vec<bool> = (0..space.n()).map(|y| big.contains(y)).collect();
    let values = local_grand_maximal_region(space, &region, &enlarged, f);
    LocalMaximal { region, values }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMaximalCheck {
    /// Smallest `c` with `M(f χ_{4A0 B0}) <= c |f| + M_{B0} f` on `B0`.
    pub c_emp: f64,
    pub pass: bool,
    pub weak_type: f64,
}

pub fn local_maximal_check(space: &QuasiMetricSpace, b0: usize, f: &[f64], weak_type: f64) -> LocalMaximalCheck {
    let local = local_grand_maximal(space, b0, f);
    let ball = space.ball(b0);
    let big = space.dilate(ball, 4.0 * space.a0());
    let cut: Vec<f64> = (0..space.n()).map(|y| if big.contains(y) { f[y] } else { 0.0 }).collect();
    let lhs = maximal_function(space, &cut).values;
    let mut c_emp = 0.0f64;
    for &x in ball.members() {
        let x = x as usize;
        let excess = lhs[x] - local.values[x];
        if excess > 0.0 {
            c_emp = c_emp.max(if f[x] != 0.0 { excess / f[x].abs() } else { f64::INFINITY });
        }
    }
    LocalMaximalCheck {
        c_emp,
        pass: c_emp.is_finite(),
        weak_type,
    }
}

/// `sup_lambda lambda mu{g > lambda}`, attained just below a value of `g`.
pub fn weak_l1_quasinorm(space: &QuasiMetricSpace, g: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..space.n()).collect();
    idx.sort_by(|&a, &b| g[b].total_cmp(&g[a]));
    let mut best = 0.0f64;
    let mut mass = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let v = g[idx[i]];
        while i < idx.len() && g[idx[i]] == v {
            mass += space.mass(idx[i]);
            i += 1;
        }
        best = best.max(v * mass);
    }
    best
}

/// Probe estimate of `||M||_{L^1 -> L^{1,inf}}` from all singleton
/// indicators and `random` seeded positive functions.
pub fn weak_type_constant(space: &QuasiMetricSpace, random: usize, seed: u64) -> f64 {
    let n = space.n();
    let mut best = 0.0f64;
    let mut ratio = |f: &[f64]| {
        let norm: f64 = f.iter().enumerate().map(|(y, v)| v.abs() * space.mass(y)).sum();
        if norm > 0.0 {
            best = best.max(weak_l1_quasinorm(space, &maximal_function(space, f).values) / norm);
        }
    };
    let mut e = vec![0.0; n];
    for x in 0..n {
        e[x] = 1.0;
        ratio(&e);
        e[x] = 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        let f: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (2.0 * z).exp()
            })
            .collect();
        ratio(&f);
    }
    best
}

/// `A_S f = Σ_{Q ∈ S} <f>_Q χ_Q`.
pub fn sparse_operator(space: &QuasiMetricSpace, system: &DyadicSystem, cubes: &[usize], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; space.n()];
    for &q in cubes {
        let cube = system.cube(q);
        let avg = cube.members.iter().map(|&y| f[y] * space.mass(y)).sum::<f64>() / system.measure(q);
        for &y in &cube.members {
            out[y] += avg;
        }
    }
    out
}

fn cube_average(space: &QuasiMetricSpace, system: &DyadicSystem, q: usize, g: &[f64]) -> f64 {
    system.cube(q).members.iter().map(|&y| g[y] * space.mass(y)).sum::<f64>() / system.measure(q)
}

/// `T_{S,b} f(x) = Σ_{Q ∈ S} |b(x) - b_Q| <f>_Q χ_Q(x)`.
pub fn sparse_commutator(space: &QuasiMetricSpace, system: &DyadicSystem, cubes: &[usize], b: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; space.n()];
    for &q in cubes {
        let bq = cube_average(space, system, q, b);
        let fq = cube_average(space, system, q, f);
        for &y in &system.cube(q).members {
            out[y] += (b[y] - bq).abs() * fq;
        }
    }
    out
}

/// `T*_{S,b} f(x) = Σ_{Q ∈ S} <|b - b_Q| f>_Q χ_Q(x)`.
pub fn sparse_commutator_adjoint(
    space: &QuasiMetricSpace,
    system: &DyadicSystem,
    cubes: &[usize],
    b: &[f64],
    f: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; space.n()];
    for &q in cubes {
        let cube = system.cube(q);
        let bq = cube_average(space, system, q, b);
        let v = cube.members.iter().map(|&y| (b[y] - bq).abs() * f[y] * space.mass(y)).sum::<f64>()
            / system.measure(q);
        for &y in &cube.members {
            out[y] += v;
        }
    }
    out
}

/// `(Σ |f|^p w mu)^(1/p)`.
pub fn weighted_lp_norm(space: &QuasiMetricSpace, f: &[f64], w: &[f64], p: f64) -> f64 {
    f.iter()
        .zip(w)
        .enumerate()
        .map(|(y, (v, wy))| v.abs().powf(p) * wy * space.mass(y))
        .sum::<f64>()
        .powf(1.0 / p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallProbes {
    None,
    All,
    /// At most this many distinct ball sets, spread evenly over the list.
    Max(usize),
    /// Balls centered at `center` at levels `0, 1, 3, 7, ...` and the
    /// outermost level.
    Center { center: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSet {
    #[serde(default = "yes")]
    pub singletons: bool,
    #[serde(default = "all_balls")]
    pub balls: BallProbes,
    /// Testing functions `lambda1^(1-p') χ_B`.
    #[serde(default = "no_balls")]
    pub weighted_balls: BallProbes,
    #[serde(default = "default_random")]
    pub random: usize,
}

fn yes() -> bool {
    true
}
fn all_balls() -> BallProbes {
    BallProbes::All
}
fn no_balls() -> BallProbes {
    BallProbes::None
}
fn default_random() -> usize {
    20
}

impl Default for ProbeSet {
    fn default() -> Self {
        ProbeSet {
            singletons: true,
            balls: BallProbes::All,
            weighted_balls: BallProbes::None,
            random: default_random(),
        }
    }
}

fn pick_balls(space: &QuasiMetricSpace, which: BallProbes) -> Vec<usize> {
    let reps = space.distinct_ball_sets();
    match which {
        BallProbes::None => Vec::new(),
        BallProbes::All => reps.to_vec(),
        BallProbes::Max(k) if k >= reps.len() => reps.to_vec(),
        BallProbes::Max(k) => (0..k).map(|i| reps[i * reps.len() / k]).collect(),
        BallProbes::Center { center } => {
            let center = center.min(space.n() - 1);
            let levels = space.levels_at(center);
            let mut out: Vec<usize> = (0..)
                .map(|j: u32| (1usize << j) - 1)
                .take_while(|&l| l < levels)
                .map(|l| space.ball_id(center, l))
                .collect();
            let last = space.ball_id(center, levels - 1);
            if out.last() != Some(&last) {
                out.push(last);
            }
            out
        }
    }
}

/// Streams the probe functions of `set` in a fixed order.
pub fn for_each_probe(
    space: &QuasiMetricSpace,
    set: &ProbeSet,
    lambda1: &[f64],
    p: f64,
    seed: u64,
    mut visit: impl FnMut(&str, &[f64]),
) {
    let n = space.n();
    let mut f = vec![0.0; n];
    if set.singletons {
        for x in 0..n {
            f[x] = 1.0;
            visit("singleton", &f);
            f[x] = 0.0;
        }
    }
    for id in pick_balls(space, set.balls) {
        f.iter_mut().for_each(|v| *v = 0.0);
        for &y in space.ball(id).members() {
            f[y as usize] = 1.0;
        }
        visit("ball", &f);
    }
    let sigma_exp = 1.0 - conjugate(p);
    for id in pick_balls(space, set.weighted_balls) {
        f.iter_mut().for_each(|v| *v = 0.0);
        for &y in space.ball(id).members() {
            f[y as usize] = lambda1[y as usize].powf(sigma_exp);
        }
        visit("weighted_ball", &f);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..set.random {
        for v in f.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            let s: f64 = StandardNormal.sample(&mut rng);
            *v = z.exp().copysign(s);
        }
        visit("random", &f);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// Largest observed `||T f||_{L^p_{lambda2}} / ||f||_{L^p_{lambda1}}`; a
    /// lower bound for the operator norm.
    pub value: f64,
    pub best_probe: String,
    pub probes: usize,
}

impl NormEstimate {
    pub fn empty() -> Self {
        NormEstimate {
            value: 0.0,
            best_probe: String::new(),
            probes: 0,
        }
    }

    pub fn observe(&mut self, label: &str, ratio: f64) {
        self.probes += 1;
        if ratio > self.value {
            self.value = ratio;
            self.best_probe = label.to_string();
        }
    }
}

pub fn operator_norm_estimate(
    space: &QuasiMetricSpace,
    op: impl Fn(&[f64]) -> Vec<f64>,
    lambda1: &[f64],
    lambda2: &[f64],
    p: f64,
    probes: &ProbeSet,
    seed: u64,
) -> Result<NormEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need 1 < p < inf, got {p}")));
    }
    let mut est = NormEstimate::empty();
    for_each_probe(space, probes, lambda1, p, seed, |label, f| {
        let den = weighted_lp_norm(space, f, lambda1, p);
        if den > 0.0 {
            est.observe(label, weighted_lp_norm(space, &op(f), lambda2, p) / den);
        }
    });
    if est.probes == 0 {
        return Err(invalid("probes", "the probe set is empty"));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::build_dyadic_system;
    use crate::space::{build_space, SpaceKind, SpaceParams};

    fn line(n: usize) -> QuasiMetricSpace {
        build_space(SpaceKind::Line, n, &SpaceParams::default(), 0).unwrap()
    }

    #[test]
    fn maximal_function_line_four() {
        let s = line(4);
        let m = maximal_function(&s, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.values, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
    }

    #[test]
    fn pair_commutators() {
        let s = build_space(SpaceKind::Pair, 2, &SpaceParams::default(), 0).unwrap();
        let b = [0.0, 1.0];
        let f = [1.0, 1.0];
        assert_eq!(maximal_commutator(&s, &b, &f).values, vec![0.5, 0.5]);
        assert_eq!(commutator_bm(&s, &b, &f), vec![-0.5, 0.0]);
    }

    #[test]
    fn sparse_operator_line_four() {
        let s = line(4);
        let sys = build_dyadic_system(&s, 0.5, 0).unwrap();
        let af = sparse_operator(&s, &sys, &[0, 1], &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(af, vec![0.75, 0.75, 0.25, 0.25]);
    }

    #[test]
    fn pair_sparse_commutators() {
        let s = build_space(SpaceKind::Pair, 2, &SpaceParams::default(), 0).unwrap();
        let sys = build_dyadic_system(&s, 0.5, 0).unwrap();
        let t = sparse_commutator(&s, &sys, &[0], &[0.0, 1.0], &[1.0, 1.0]);
        let ts = sparse_commutator_adjoint(&s, &sys, &[0], &[0.0, 1.0], &[1.0, 1.0]);
        assert_eq!(t[0], 0.5);
        assert_eq!(ts[0], 0.5);
    }

    #[test]
    fn weighted_norm_pair() {
        let s = build_space(SpaceKind::Pair, 2, &SpaceParams::default(), 0).unwrap();
        assert_eq!(weighted_lp_norm(&s, &[1.0, 2.0], &[1.0, 1.0], 2.0), 2.5f64.sqrt());
    }

    #[test]
    fn local_maximal_singleton_ball_is_zero() {
        let s = line(8);
        let b0 = s.ball_id(3, 0);
        let f = vec![1.0; 8];
        let local = local_grand_maximal(&s, b0, &f);
        assert_eq!(local.at(3).unwrap(), 0.0);
        assert!(local.at(4).is_err());
    }

    #[test]
    fn identity_norm_is_one() {
        let s = line(8);
        let w = vec![1.0; 8];
        let est = operator_norm_estimate(&s, |f| f.to_vec(), &w, &w, 2.0, &ProbeSet::default(), 1).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
    }
}
