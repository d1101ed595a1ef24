//! Sparse families, Carleson packing, Calderón–Zygmund selection, the
//! stopping-time sparse domination of the maximal commutator and the
//! oscillation family of a symbol.
//!
//! The domination recursion works on regions: the root ball `B0`, the balls
//! covering the annuli `2^j B0 \ 2^(j-1) B0`, and dyadic cubes below them.
//! Each region `R` has the enlargement `4A0 R`, the closed dilation at the
//! realized radius, and the cube `R_Q`: the smallest cube of any adjacent
//! system containing `4A0 R` (lowest `t`, then lowest id, on ties).

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dyadic::{AdjacentSystems, DyadicSystem};
use crate::error::{invalid, Error, Result};
use crate::operators::{
    local_grand_maximal_region, maximal_commutator, maximal_function, sparse_commutator, sparse_commutator_adjoint,
};
use crate::space::{BallRef, QuasiMetricSpace};

/// Relative slack on comparisons between sums of masses accumulated in
/// different orders.
pub const MASS_TOL: f64 = 1e-12;

const MAX_DOUBLINGS: usize = 200;
const BISECTION_STEPS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseFamily {
    /// Index of the host system among the adjacent systems.
    pub system: usize,
    /// Sorted, deduplicated flat cube ids.
    pub cubes: Vec<usize>,
    pub eta_certified: f64,
}

impl SparseFamily {
    pub fn new(system_index: usize, system: &DyadicSystem, mut cubes: Vec<usize>) -> Self {
        cubes.sort_unstable();
        cubes.dedup();
        let eta_certified = packing_constant(system, &cubes);
        SparseFamily {
            system: system_index,
            cubes,
            eta_certified,
        }
    }

    /// Brute-force check of `Σ_{P ⊆ Q} mu(P) <= mu(Q) / eta` for every cube.
    pub fn recheck(&self, system: &DyadicSystem) -> bool {
        (0..system.len()).all(|q| {
            let sum: f64 = self
                .cubes
                .iter()
                .filter(|&&p| system.is_within(p, q))
                .map(|&p| system.measure(p))
                .sum();
            sum * self.eta_certified <= system.measure(q) * (1.0 + MASS_TOL)
        })
    }
}

/// `min_Q mu(Q) / Σ_{P ∈ S, P ⊆ Q} mu(P)`, clamped to 1.
pub fn packing_constant(system: &DyadicSystem, cubes: &[usize]) -> f64 {
    let mut sum = vec![0.0; system.len()];
    for &q in cubes {
        sum[q] = system.measure(q);
    }
    // Children always have larger flat ids than their parents.
    for id in (0..system.len()).rev() {
        if let Some(parent) = system.cube(id).parent {
            sum[parent] += sum[id];
        }
    }
    let mut eta = 1.0f64;
    for (id, s) in sum.iter().enumerate() {
        if *s > 0.0 {
            eta = eta.min(system.measure(id) / s);
        }
    }
    eta
}

fn cube_average(space: &QuasiMetricSpace, system: &DyadicSystem, q: usize, g: &[f64]) -> f64 {
    system.cube(q).members.iter().map(|&y| g[y] * space.mass(y)).sum::<f64>() / system.measure(q)
}

/// Maximal cubes `Q` with all members in `region` and `<g>_Q > height`,
/// sorted by id.
pub fn cz_select(
    space: &QuasiMetricSpace,
    system: &DyadicSystem,
    g: &[f64],
    height: f64,
    region: &[bool],
) -> Result<Vec<usize>> {
    if !(height > 0.0) {
        return Err(invalid("height", format!("need height > 0, got {height}")));
    }
    if let Some(v) = g.iter().find(|v| !(**v >= 0.0)) {
        return Err(invalid("g", format!("need g >= 0, got {v}")));
    }
    let mut selected = Vec::new();
    let mut stack = vec![system.root()];
    while let Some(q) = stack.pop() {
        let cube = system.cube(q);
        if !cube.members.iter().any(|&y| g[y] > 0.0) {
            continue;
        }
        if cube.members.iter().all(|&y| region[y]) && cube_average(space, system, q, g) > height {
            selected.push(q);
        } else {
            stack.extend(cube.children.iter().copied());
        }
    }
    selected.sort_unstable();
    Ok(selected)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Ball { id: usize },
    Cube { system: usize, id: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeRef {
    pub system: usize,
    pub id: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub region: Region,
    pub parent: Option<usize>,
    pub region_measure: f64,
    /// The cube `R_Q` containing `4A0 R`.
    pub r_q: CubeRef,
    /// `max_{y ∈ R_Q} d(x_R, y)` over the radius of `4A0 R`.
    pub capture_ratio: f64,
    /// `mu(R_Q) / mu(4A0 R)`.
    pub measure_ratio: f64,
    /// `2^n` used for the stopping heights.
    pub two_n: f64,
    pub alpha: f64,
    /// Largest admissible `mu(E)`.
    pub tau: f64,
    /// Point counts of `E1..E4`.
    pub e_sizes: [usize; 4],
    pub e_measure: f64,
    /// Selected cubes `P_j` in the system of `cz_system`.
    pub cz_system: usize,
    pub selected: Vec<usize>,
    /// `mu(R \ ∪ P_j)`.
    pub e_q_measure: f64,
    /// Largest `sup_{P_j} M(g χ_{4A0 R \ 4A0 P_j}) / (alpha C' <|g|>_{4A0 R})`
    /// for `g = f` and `g = (b - b_{R_Q}) f`.
    pub esssup_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationCertificate {
    pub b0: usize,
    /// Measured weak-type constant `C'` used in `E2` and `E4`.
    pub weak_type: f64,
    /// Largest number of top regions containing a point.
    pub overlap: usize,
    pub nodes: Vec<NodeRecord>,
    pub families: Vec<SparseFamily>,
    /// `Σ_t (T_{S_t,b}|f| + T*_{S_t,b}|f|)`.
    pub bound: Vec<f64>,
    pub cb: Vec<f64>,
    /// `max C_b f / bound` over points with a positive bound.
    pub c_emp: f64,
    /// Points with `bound = 0 < C_b f`.
    pub exceptional: Vec<usize>,
}

impl DominationCertificate {
    pub fn eta_min(&self) -> f64 {
        self.families.iter().map(|f| f.eta_certified).fold(1.0, f64::min)
    }

    pub fn passes(&self) -> bool {
        self.exceptional.is_empty() && self.c_emp.is_finite()
    }
}

/// Right-hand side of the pointwise domination, shared by construction and
/// re-checks.
pub fn evaluate_bound(
    space: &QuasiMetricSpace,
    systems: &[DyadicSystem],
    families: &[SparseFamily],
    b: &[f64],
    f: &[f64],
) -> Vec<f64> {
    let absf: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let mut out = vec![0.0; space.n()];
    for fam in families {
        let sys = &systems[fam.system];
        let t = sparse_commutator(space, sys, &fam.cubes, b, &absf);
        let ts = sparse_commutator_adjoint(space, sys, &fam.cubes, b, &absf);
        for x in 0..space.n() {
            out[x] += t[x] + ts[x];
        }
    }
    out
}

/// Smallest-measure canonical ball containing the support of `f`, lowest id
/// on ties. For `f = 0` every ball qualifies.
pub fn smallest_covering_ball(space: &QuasiMetricSpace, f: &[f64]) -> usize {
    let support: Vec<usize> = (0..space.n()).filter(|&y| f[y] != 0.0).collect();
    let mu = space.ball_measures();
    let mut best = (f64::INFINITY, 0usize);
    for c in 0..space.n() {
        let level = support.iter().map(|&y| space.level_of(c, y)).max().unwrap_or(0);
        let id = space.ball_id(c, level);
        if mu[id] < best.0 {
            best = (mu[id], id);
        }
    }
    best.1
}

fn ball_mask(n: usize, ball: BallRef<'_>) -> Vec<bool> {
    let mut m = vec![false; n];
    for &y in ball.members() {
        m[y as usize] = true;
    }
    m
}

struct Context<'a> {
    space: &'a QuasiMetricSpace,
    systems: &'a [DyadicSystem],
    b: &'a [f64],
    f: &'a [f64],
    weak_type: f64,
    two_n: Vec<f64>,
}

impl Context<'_> {
    /// Smallest cube over all systems containing every point of `mask`.
    fn r_q(&self, mask: &[bool], anchor: usize) -> CubeRef {
        let mut best = (f64::INFINITY, CubeRef { system: 0, id: 0 });
        for (t, sys) in self.systems.iter().enumerate() {
            for li in 0..sys.n_levels() {
                let q = sys.cube_containing(li, anchor);
                let inside = (0..mask.len()).filter(|&y| mask[y]).all(|y| sys.cube_containing(li, y) == q);
                if !inside {
                    break;
                }
                if sys.measure(q) < best.0 {
                    best = (sys.measure(q), CubeRef { system: t, id: q });
                }
            }
        }
        best.1
    }

    fn node(&self, region: Region, parent: Option<usize>) -> Result<NodeRecord> {
        let space = self.space;
        let n = space.n();
        let factor = 4.0 * space.a0();
        let (region_mask, center, big, cz_system) = match region {
            Region::Ball { id } => {
                let ball = space.ball(id);
                (ball_mask(n, ball), ball.center, space.dilate(ball, factor), None)
            }
            Region::Cube { system, id } => {
                let sys = &self.systems[system];
                let c = sys.cube(id).center;
                (sys.members_mask(id, n), c, space.closed_ball(c, factor * sys.maxdist(id)), Some(system))
            }
        };
        let enlarged = ball_mask(n, big);
        let big_measure = big.measure();
        let r_q = self.r_q(&enlarged, center);
        let rq_sys = &self.systems[r_q.system];
        let rq_far = rq_sys.cube(r_q.id).members.iter().map(|&y| space.dist(center, y)).fold(0.0, f64::max);
        let big_radius = big.realized_radius();
        let capture_ratio = if rq_far == 0.0 { 1.0 } else { rq_far / big_radius };
        let measure_ratio = rq_sys.measure(r_q.id) / big_measure;
        let cz_system = cz_system.unwrap_or(r_q.system);
        let cz = &self.systems[cz_system];
        let two_n = self.two_n[cz_system];

        let b_q = cube_average(space, rq_sys, r_q.id, self.b);
        let h: Vec<f64> = (0..n).map(|y| (self.b[y] - b_q) * self.f[y]).collect();
        let avg_abs = |g: &[f64]| big.members().iter().map(|&y| g[y as usize].abs() * space.mass(y as usize)).sum::<f64>() / big_measure;
        let avg_f = avg_abs(self.f);
        let avg_h = avg_abs(&h);
        let thresholds = [avg_f, self.weak_type * avg_f, avg_h, self.weak_type * avg_h];
        let mf = local_grand_maximal_region(space, &region_mask, &enlarged, self.f);
        let mh = local_grand_maximal_region(space, &region_mask, &enlarged, &h);
        let q = |i: usize, x: usize| match i {
            0 => self.f[x].abs(),
            1 => mf[x],
            2 => h[x].abs(),
            _ => mh[x],
        };
        let ratio = |v: f64, thr: f64| {
            if v == 0.0 {
                0.0
            } else if thr == 0.0 {
                f64::INFINITY
            } else {
                v / thr
            }
        };
        let critical: Vec<f64> = (0..n)
            .map(|x| {
                if !region_mask[x] {
                    return 0.0;
                }
                (0..4).map(|i| ratio(q(i, x), thresholds[i])).fold(0.0, f64::max)
            })
            .collect();

        let region_measure = space.mask_measure(&region_mask);
        let tau = region_measure / (4.0 * two_n);
        let height = 1.0 / (2.0 * two_n);
        let attempt = |alpha: f64| -> Result<(bool, Vec<f64>, Vec<usize>)> {
            let chi: Vec<f64> = critical.iter().map(|&a| if a > alpha { 1.0 } else { 0.0 }).collect();
            let mu_e: f64 = (0..n).filter(|&x| chi[x] > 0.0).map(|x| space.mass(x)).sum();
            if mu_e > tau {
                return Ok((false, chi, Vec::new()));
            }
            let selected = cz_select(space, cz, &chi, height, &region_mask)?;
            let ok = selected.iter().all(|&p| cz.cube(p).members.iter().any(|&y| chi[y] == 0.0));
            Ok((ok, chi, selected))
        };

        let mut alpha = 4.0;
        let mut doublings = 0;
        let (mut chi, mut selected) = loop {
            let (ok, chi, sel) = attempt(alpha)?;
            if ok {
                break (chi, sel);
            }
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::Domination(format!("no admissible alpha for region {region:?}")));
            }
            alpha *= 2.0;
        };
        if alpha > 4.0 {
            let mut lo = alpha / 2.0;
            for _ in 0..BISECTION_STEPS {
                let mid = (lo + alpha) / 2.0;
                let (ok, c, s) = attempt(mid)?;
                if ok {
                    alpha = mid;
                    chi = c;
                    selected = s;
                } else {
                    lo = mid;
                }
            }
        }

        let fail = |what: &str| Err(Error::Domination(format!("{what} at region {region:?}")));
        let mut covered = vec![false; n];
        let mut selected_measure = 0.0;
        for &p in &selected {
            for &y in &cz.cube(p).members {
                if covered[y] {
                    return fail("selected cubes overlap");
                }
                if !region_mask[y] {
                    return fail("selected cube leaves the region");
                }
                covered[y] = true;
            }
            selected_measure += cz.measure(p);
        }
        if selected_measure > 0.5 * region_measure * (1.0 + MASS_TOL) {
            return fail("selected cubes exceed half the region");
        }
        if selected.iter().any(|&p| cz.cube(p).members.iter().all(|&y| chi[y] > 0.0)) {
            return fail("a selected cube lies inside E");
        }
        if (0..n).any(|x| chi[x] > 0.0 && !covered[x]) {
            return fail("E is not covered by the selected cubes");
        }
        for x in (0..n).filter(|&x| region_mask[x] && !covered[x]) {
            if (0..4).any(|i| q(i, x) > alpha * thresholds[i]) {
                return fail("pointwise bound fails off the selected cubes");
            }
        }
        let e_q_measure: f64 = (0..n).filter(|&x| region_mask[x] && !covered[x]).map(|x| space.mass(x)).sum();
        if e_q_measure < 0.5 * region_measure * (1.0 - MASS_TOL) {
            return fail("mu(E_Q) < mu(Q)/2");
        }

        let mut e_sizes = [0usize; 4];
        for x in (0..n).filter(|&x| region_mask[x]) {
            for (i, size) in e_sizes.iter_mut().enumerate() {
                if q(i, x) > alpha * thresholds[i] {
                    *size += 1;
                }
            }
        }
        let e_measure = (0..n).filter(|&x| chi[x] > 0.0).map(|x| space.mass(x)).sum();

        let mut esssup_ratio = 0.0f64;
        for &p in &selected {
            let pc = cz.cube(p);
            let inner = space.closed_ball(pc.center, factor * cz.maxdist(p));
            for (g, avg) in [(self.f, avg_f), (h.as_slice(), avg_h)] {
                if avg == 0.0 {
                    continue;
                }
                let cut: Vec<f64> = (0..n).map(|y| if enlarged[y] && !inner.contains(y) { g[y] } else { 0.0 }).collect();
                let m = maximal_function(space, &cut).values;
                let sup = pc.members.iter().map(|&y| m[y]).fold(0.0, f64::max);
                esssup_ratio = esssup_ratio.max(sup / (alpha * self.weak_type * avg));
            }
        }

        Ok(NodeRecord {
            region,
            parent,
            region_measure,
            r_q,
            capture_ratio,
            measure_ratio,
            two_n,
            alpha,
            tau,
            e_sizes,
            e_measure,
            cz_system,
            selected,
            e_q_measure,
            esssup_ratio,
        })
    }
}

/// Top regions: `B0` and, when `f` is nonzero, balls covering the annuli
/// `2^j B0 \ 2^(j-1) B0`, each enlarged until `4A0 B` contains `supp f`.
fn top_regions(space: &QuasiMetricSpace, b0: usize, f: &[f64]) -> Vec<usize> {
    let n = space.n();
    let mut out = vec![b0];
    let support: Vec<usize> = (0..n).filter(|&y| f[y] != 0.0).collect();
    if support.is_empty() {
        return out;
    }
    let factor = 4.0 * space.a0();
    let root = space.ball(b0);
    let (c0, r0) = (root.center, root.radius());
    let mut inner = ball_mask(n, root);
    let mut j = 1;
    while inner.iter().any(|v| !v) {
        let scale = 2f64.powi(j);
        let outer = space.closed_ball(c0, scale * r0);
        let outer_mask = ball_mask(n, outer);
        let mut done = vec![false; n];
        for y in 0..n {
            if !outer_mask[y] || inner[y] || done[y] {
                continue;
            }
            let mut rho = scale / 4.0 * r0;
            let mut ball = space.closed_ball(y, rho);
            while !support.iter().all(|&s| space.dilate(ball, factor).contains(s)) {
                rho *= 2.0;
                ball = space.closed_ball(y, rho);
            }
            for &m in ball.members() {
                done[m as usize] = true;
            }
            if !out.contains(&ball.id) {
                out.push(ball.id);
            }
        }
        for y in 0..n {
            inner[y] |= outer_mask[y];
        }
        j += 1;
    }
    out
}

/// Runs the stopping-time construction and assembles the certificate.
/// `b0` defaults to [`smallest_covering_ball`]; `weak_type` is the measured
/// constant `C'` of the maximal operator.
pub fn build_domination(
    space: &QuasiMetricSpace,
    adjacent: &AdjacentSystems,
    b: &[f64],
    f: &[f64],
    b0: Option<usize>,
    weak_type: f64,
) -> Result<DominationCertificate> {
    let n = space.n();
    if b.len() != n || f.len() != n {
        return Err(invalid("b/f", "length does not match the space"));
    }
    if !(weak_type > 0.0 && weak_type.is_finite()) {
        return Err(invalid("weak_type", format!("need a positive constant, got {weak_type}")));
    }
    let b0 = b0.unwrap_or_else(|| smallest_covering_ball(space, f));
    if b0 >= space.ball_count() {
        return Err(invalid("b0", format!("ball {b0} out of range")));
    }
    if let Some(y) = (0..n).find(|&y| f[y] != 0.0 && !space.ball(b0).contains(y)) {
        return Err(invalid("b0", format!("f is nonzero at {y} outside B0")));
    }
    let systems = &adjacent.systems;
    let two_n: Vec<f64> = systems.iter().map(|s| 2f64.powf(space.updim()).max(s.child_ratio())).collect();
    let ctx = Context {
        space,
        systems,
        b,
        f,
        weak_type,
        two_n,
    };

    let tops = top_regions(space, b0, f);
    let mut count = vec![0usize; n];
    for &id in &tops {
        for &y in space.ball(id).members() {
            count[y as usize] += 1;
        }
    }
    let overlap = count.iter().copied().max().unwrap_or(0);

    let mut nodes: Vec<NodeRecord> = Vec::new();
    let mut queue: VecDeque<(Region, Option<usize>)> = tops.iter().map(|&id| (Region::Ball { id }, None)).collect();
    while let Some((region, parent)) = queue.pop_front() {
        let node = ctx.node(region, parent)?;
        let idx = nodes.len();
        for &p in &node.selected {
            queue.push_back((Region::Cube { system: node.cz_system, id: p }, Some(idx)));
        }
        nodes.push(node);
    }

    let mut per_t: Vec<Vec<usize>> = vec![Vec::new(); systems.len()];
    for node in &nodes {
        per_t[node.r_q.system].push(node.r_q.id);
    }
    let families: Vec<SparseFamily> = per_t
        .into_iter()
        .enumerate()
        .map(|(t, cubes)| SparseFamily::new(t, &systems[t], cubes))
        .collect();
    let bound = evaluate_bound(space, systems, &families, b, f);
    let cb = maximal_commutator(space, b, f).values;
    let mut c_emp = 0.0f64;
    let mut exceptional = Vec::new();
    for x in 0..n {
        if bound[x] > 0.0 {
            c_emp = c_emp.max(cb[x] / bound[x]);
        } else if cb[x] > 0.0 {
            exceptional.push(x);
        }
    }
    Ok(DominationCertificate {
        b0,
        weak_type,
        overlap,
        nodes,
        families,
        bound,
        cb,
        c_emp,
        exceptional,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationFamily {
    pub family: SparseFamily,
    /// Packing constant of the input family.
    pub eta_input: f64,
    /// `eta / (2 (eta + 1))`.
    pub packing_target: f64,
    pub packing_ok: bool,
    pub recheck_ok: bool,
    pub contains_input: bool,
    /// Smallest `c` with `|b(x) - b_Q| <= c Σ_{R ⊆ Q} Omega(b,R) χ_R(x)` on
    /// every `Q` of the family.
    pub c_emp: f64,
}

/// Stopping-time augmentation: every `Q` of the family receives the maximal
/// `P ⊊ Q` with `<|b - b_Q|>_P > 2 Omega(b, Q)`, coarse cubes first.
pub fn oscillation_domination(
    space: &QuasiMetricSpace,
    system: &DyadicSystem,
    family: &SparseFamily,
    b: &[f64],
) -> OscillationFamily {
    let mut tilde: BTreeSet<usize> = family.cubes.iter().copied().collect();
    let mut queue = tilde.clone();
    while let Some(q) = queue.pop_first() {
        let b_q = cube_average(space, system, q, b);
        let dev: Vec<f64> = b.iter().map(|v| (v - b_q).abs()).collect();
        let omega = cube_average(space, system, q, &dev);
        if omega == 0.0 {
            continue;
        }
        let mut stack: Vec<usize> = system.cube(q).children.clone();
        while let Some(p) = stack.pop() {
            if cube_average(space, system, p, &dev) > 2.0 * omega {
                if tilde.insert(p) {
                    queue.insert(p);
                }
            } else {
                stack.extend(system.cube(p).children.iter().copied());
            }
        }
    }

    let cubes: Vec<usize> = tilde.into_iter().collect();
    let n = space.n();
    let mut chains: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
    for &q in &cubes {
        let b_q = cube_average(space, system, q, b);
        let dev: Vec<f64> = b.iter().map(|v| (v - b_q).abs()).collect();
        let omega = cube_average(space, system, q, &dev);
        for &x in &system.cube(q).members {
            chains[x].push((b_q, omega));
        }
    }
    let mut c_emp = 0.0f64;
    for (x, chain) in chains.iter().enumerate() {
        let mut tail = 0.0;
        for &(b_q, omega) in chain.iter().rev() {
            tail += omega;
            let num = (b[x] - b_q).abs();
            if num > 0.0 {
                c_emp = c_emp.max(if tail > 0.0 { num / tail } else { f64::INFINITY });
            }
        }
    }

    let contains_input = family.cubes.iter().all(|q| cubes.binary_search(q).is_ok());
    let tilde = SparseFamily::new(family.system, system, cubes);
    let eta = family.eta_certified;
    let packing_target = eta / (2.0 * (eta + 1.0));
    OscillationFamily {
        packing_ok: tilde.eta_certified >= packing_target,
        recheck_ok: tilde.recheck(system),
        family: tilde,
        eta_input: eta,
        packing_target,
        contains_input,
        c_emp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{build_adjacent_systems, build_dyadic_system};
    use crate::space::{build_space, SpaceKind, SpaceParams};

    fn line(n: usize) -> QuasiMetricSpace {
        build_space(SpaceKind::Line, n, &SpaceParams::default(), 0).unwrap()
    }

    #[test]
    fn packing_examples() {
        let s = line(4);
        let sys = build_dyadic_system(&s, 0.5, 0).unwrap();
        assert_eq!(packing_constant(&sys, &[0]), 1.0);
        let all: Vec<usize> = (0..sys.len()).collect();
        assert!((packing_constant(&sys, &all) - 1.0 / 3.0).abs() < 1e-15);
        let last: Vec<usize> = sys.level_range(sys.n_levels() - 1).collect();
        assert_eq!(packing_constant(&sys, &last), 1.0);
        assert_eq!(packing_constant(&sys, &[]), 1.0);
    }

    #[test]
    fn cz_select_atom() {
        let s = line(8);
        let sys = build_dyadic_system(&s, 0.5, 0).unwrap();
        let region = vec![true; 8];
        assert!(cz_select(&s, &sys, &[0.0; 8], 0.5, &region).unwrap().is_empty());
        let mut g = vec![0.0; 8];
        g[5] = 1.0;
        let sel = cz_select(&s, &sys, &g, 0.3, &region).unwrap();
        assert_eq!(sel.len(), 1);
        let cube = sys.cube(sel[0]);
        assert!(cube.members.contains(&5));
        assert!(1.0 / cube.members.len() as f64 > 0.3);
        let parent = cube.parent.unwrap();
        assert!(1.0 / sys.cube(parent).members.len() as f64 <= 0.3);
    }

    #[test]
    fn constant_symbol_and_zero_function() {
        let s = line(16);
        let adj = build_adjacent_systems(&s, 0.5, 3, 42).unwrap();
        let f: Vec<f64> = (0..16).map(|i| 1.0 + i as f64).collect();
        let cert = build_domination(&s, &adj, &[2.0; 16], &f, None, 2.0).unwrap();
        assert!(cert.passes());
        assert_eq!(cert.c_emp, 0.0);
        let cert = build_domination(&s, &adj, &f, &[0.0; 16], None, 2.0).unwrap();
        assert_eq!(cert.nodes.len(), 1);
        assert!(cert.bound.iter().all(|&v| v == 0.0));
        assert!(cert.cb.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pair_oscillation() {
        let s = build_space(SpaceKind::Pair, 2, &SpaceParams::default(), 0).unwrap();
        let sys = build_dyadic_system(&s, 0.5, 0).unwrap();
        let fam = SparseFamily::new(0, &sys, vec![0]);
        let out = oscillation_domination(&s, &sys, &fam, &[0.0, 1.0]);
        assert_eq!(out.family.cubes, vec![0]);
        assert_eq!(out.c_emp, 1.0);
        let out = oscillation_domination(&s, &sys, &fam, &[3.0, 3.0]);
        assert_eq!(out.c_emp, 0.0);
        assert_eq!(out.family.cubes, vec![0]);
    }
}
