//! Systems of dyadic cubes and adjacent systems on a finite space.
//!
//! Cubes come from nested nets built by farthest-point sampling: the net of
//! generation `k` is extended greedily with the point farthest from the
//! current centers as long as that distance is at least `delta^k`, so every
//! net contains the previous one. Points are assigned to the nearest new
//! center inside their parent cube, which makes nesting hold by construction.
//! The containment radii `c1`, `C1` are measured afterwards.
//!
//! Adjacent system `t` starts its nets at a seeded point and offsets their
//! scale by `t` generations, so the cube boundaries of different systems fall
//! at different places and different scales.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::QuasiMetricSpace;

/// Relative slack applied to radius comparisons.
pub const RADIUS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicCube {
    /// Generation `k`; side length `delta^k`.
    pub level: i32,
    pub alpha: usize,
    pub center: usize,
    /// Sorted point ids.
    pub members: Vec<usize>,
    /// Flat id of the parent cube.
    pub parent: Option<usize>,
    /// Flat ids of the children.
    pub children: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct DyadicSystem {
    delta: f64,
    k_top: i32,
    seed: u64,
    start: usize,
    phase: i32,
    cubes: Vec<DyadicCube>,
    level_start: Vec<usize>,
    /// `cube_of[level_index][x]`, `u32::MAX` where a level misses `x`.
    cube_of: Vec<Vec<u32>>,
    measure: Vec<f64>,
    maxdist: Vec<f64>,
    pub measured_c1: f64,
    pub measured_big_c1: f64,
    pub max_children: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRecord {
    pub k: i32,
    pub alpha: usize,
    pub center: usize,
    pub members: Vec<usize>,
    /// Index of the parent within the previous level.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub delta: f64,
    pub k_top: i32,
    pub seed: u64,
    pub start: usize,
    #[serde(default)]
    pub phase: i32,
    pub levels: Vec<Vec<CubeRecord>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum Violation {
    /// A level is not a disjoint cover of the space.
    Partition { level: i32, detail: String },
    /// A finer cube meets a coarser one without being inside it.
    Nesting { level: i32, alpha: usize, other_level: i32, other_alpha: usize },
    /// A cube has no unique ancestor at a coarser level.
    UniqueAncestor { level: i32, alpha: usize, ancestor_level: i32, count: usize },
    /// Children do not tile the parent.
    Children { level: i32, alpha: usize, detail: String },
    Containment { level: i32, alpha: usize, detail: String },
    MonotoneBalls { level: i32, alpha: usize, ancestor_level: i32, ancestor_alpha: usize, point: usize },
    CenterNotMember { level: i32, alpha: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemCheck {
    pub c1: f64,
    pub big_c1: f64,
    pub max_children: usize,
    /// Largest `mu(parent) / mu(child)`.
    pub child_ratio: f64,
    pub violations: Vec<Violation>,
}

fn level_distance(delta: f64, k: i32) -> f64 {
    delta.powi(k)
}

impl DyadicSystem {
    /// Builds a system from explicit level partitions, coarsest first. No
    /// property is assumed; run [`verify_system`] to certify it.
    pub fn from_levels(
        space: &QuasiMetricSpace,
        delta: f64,
        k_top: i32,
        levels: Vec<Vec<(usize, Vec<usize>)>>,
    ) -> Result<Self> {
        check_delta(delta)?;
        if levels.is_empty() {
            return Err(Error::Dyadic("no levels".into()));
        }
        let n = space.n();
        let mut cubes = Vec::new();
        let mut level_start = vec![0];
        let mut cube_of: Vec<Vec<u32>> = Vec::with_capacity(levels.len());
        for (li, level) in levels.into_iter().enumerate() {
            let mut owner = vec![u32::MAX; n];
            let base = cubes.len();
            for (alpha, (center, mut members)) in level.into_iter().enumerate() {
                if members.is_empty() {
                    return Err(Error::Dyadic(format!("empty cube at level index {li}")));
                }
                members.sort_unstable();
                members.dedup();
                if let Some(&bad) = members.iter().find(|&&m| m >= n) {
                    return Err(invalid("members", format!("point {bad} out of range")));
                }
                if center >= n {
                    return Err(invalid("center", format!("point {center} out of range")));
                }
                let id = base + alpha;
                for &m in &members {
                    owner[m] = id as u32;
                }
                let parent = if li == 0 {
                    None
                } else {
                    let prev = &cube_of[li - 1];
                    let p = prev[members[0]];
                    (p != u32::MAX).then_some(p as usize)
                };
                cubes.push(DyadicCube {
                    level: k_top + li as i32,
                    alpha,
                    center,
                    members,
                    parent,
                    children: Vec::new(),
                });
            }
            cube_of.push(owner);
            level_start.push(cubes.len());
        }
        for id in 0..cubes.len() {
            if let Some(p) = cubes[id].parent {
                cubes[p].children.push(id);
            }
        }
        let measure = cubes
            .iter()
            .map(|c| c.members.iter().map(|&m| space.mass(m)).sum())
            .collect();
        let maxdist = cubes
            .iter()
            .map(|c| {
                c.members
                    .iter()
                    .map(|&m| space.dist(c.center, m))
                    .fold(0.0, f64::max)
            })
            .collect();
        let mut sys = DyadicSystem {
            delta,
            k_top,
            seed: 0,
            start: 0,
            phase: 0,
            cubes,
            level_start,
            cube_of,
            measure,
            maxdist,
            measured_c1: 0.0,
            measured_big_c1: 0.0,
            max_children: 0,
        };
        sys.measure_constants(space);
        Ok(sys)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn k_top(&self) -> i32 {
        self.k_top
    }

    pub fn k_bot(&self) -> i32 {
        self.k_top + self.n_levels() as i32 - 1
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Generation offset of the nets: generation `k` uses separation
    /// `delta^(k - phase)`.
    pub fn phase(&self) -> i32 {
        self.phase
    }

    pub fn n_levels(&self) -> usize {
        self.level_start.len() - 1
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn cube(&self, id: usize) -> &DyadicCube {
        &self.cubes[id]
    }

    /// Cubes of level index `li` (generation `k_top + li`).
    pub fn level(&self, li: usize) -> &[DyadicCube] {
        &self.cubes[self.level_start[li]..self.level_start[li + 1]]
    }

    pub fn level_range(&self, li: usize) -> std::ops::Range<usize> {
        self.level_start[li]..self.level_start[li + 1]
    }

    pub fn level_index(&self, id: usize) -> usize {
        (self.cubes[id].level - self.k_top) as usize
    }

    /// Flat id of the cube of level index `li` containing `x`.
    pub fn cube_containing(&self, li: usize, x: usize) -> usize {
        self.cube_of[li][x] as usize
    }

    /// Cube of generation `k` containing `x`, extending the root above the
    /// top level and the finest level below the bottom.
    pub fn cube_at_generation(&self, k: i32, x: usize) -> usize {
        let li = (k - self.k_top).clamp(0, self.n_levels() as i32 - 1) as usize;
        self.cube_containing(li, x)
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn measure(&self, id: usize) -> f64 {
        self.measure[id]
    }

    /// Largest distance from the center to a member.
    pub fn maxdist(&self, id: usize) -> f64 {
        self.maxdist[id]
    }

    /// Whether `inner` is contained in `outer`.
    pub fn is_within(&self, inner: usize, outer: usize) -> bool {
        let lo = self.level_index(outer);
        let li = self.level_index(inner);
        li >= lo && self.cube_of[lo][self.cubes[inner].center] as usize == outer
    }

    pub fn side(&self, id: usize) -> f64 {
        level_distance(self.delta, self.cubes[id].level)
    }

    pub fn members_mask(&self, id: usize, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &x in &self.cubes[id].members {
            m[x] = true;
        }
        m
    }

    /// Largest `mu(parent) / mu(child)` over all parent-child pairs.
    pub fn child_ratio(&self) -> f64 {
        self.cubes
            .iter()
            .enumerate()
            .filter_map(|(id, c)| c.parent.map(|p| self.measure[p] / self.measure[id]))
            .fold(1.0, f64::max)
    }

    fn measure_constants(&mut self, space: &QuasiMetricSpace) {
        let n = space.n();
        let mut c1 = f64::INFINITY;
        let mut contain = 0.0f64;
        let mut inside = vec![false; n];
        for c in &self.cubes {
            let side = level_distance(self.delta, c.level);
            let maxd = c.members.iter().map(|&m| space.dist(c.center, m)).fold(0.0, f64::max);
            contain = contain.max(maxd / side);
            if c.members.len() < n {
                for &m in &c.members {
                    inside[m] = true;
                }
                let gap = (0..n)
                    .filter(|&y| !inside[y])
                    .map(|y| space.dist(c.center, y))
                    .fold(f64::INFINITY, f64::min);
                for &m in &c.members {
                    inside[m] = false;
                }
                c1 = c1.min(gap / side);
            }
        }
        self.measured_c1 = c1;
        self.measured_big_c1 = self.monotone_radius(space, contain);
        self.max_children = self.cubes.iter().map(|c| c.children.len()).max().unwrap_or(0);
    }

    /// Smallest `C >= c0` such that every child's closed ball
    /// `{d(x_child, .) <= C delta^(k+1)}` lies in its parent's ball. For a
    /// point `y` the inclusion fails exactly for `C` in
    /// `[d(x_child, y)/delta^(k+1), d(x_parent, y)/delta^k)`, so the answer
    /// is the first `C >= c0` outside the union of these intervals.
    fn monotone_radius(&self, space: &QuasiMetricSpace, c0: f64) -> f64 {
        let n = space.n();
        let mut bad: Vec<(f64, f64)> = Vec::new();
        for c in &self.cubes {
            let Some(p) = c.parent else { continue };
            let parent = &self.cubes[p];
            let sc = level_distance(self.delta, c.level);
            let sp = level_distance(self.delta, parent.level);
            for y in 0..n {
                let a = space.dist(c.center, y) / sc;
                let b = space.dist(parent.center, y) / sp;
                if a < b && b > c0 {
                    bad.push((a, b));
                }
            }
        }
        bad.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut c = c0;
        for (a, b) in bad {
            if a > c {
                break;
            }
            c = c.max(b);
        }
        c
    }

    pub fn to_file(&self) -> SystemFile {
        let levels = (0..self.n_levels())
            .map(|li| {
                self.level(li)
                    .iter()
                    .map(|c| CubeRecord {
                        k: c.level,
                        alpha: c.alpha,
                        center: c.center,
                        members: c.members.clone(),
                        parent: c.parent.map(|p| self.cubes[p].alpha),
                    })
                    .collect()
            })
            .collect();
        SystemFile {
            delta: self.delta,
            k_top: self.k_top,
            seed: self.seed,
            start: self.start,
            phase: self.phase,
            levels,
        }
    }

    pub fn from_file(space: &QuasiMetricSpace, file: SystemFile) -> Result<Self> {
        let levels = file
            .levels
            .into_iter()
            .map(|lv| lv.into_iter().map(|c| (c.center, c.members)).collect())
            .collect();
        let mut sys = Self::from_levels(space, file.delta, file.k_top, levels)?;
        sys.seed = file.seed;
        sys.start = file.start;
        sys.phase = file.phase;
        Ok(sys)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_file())?)?;
        Ok(())
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} is not in (0, 1)")));
    }
    Ok(())
}

/// Nested-net construction started at the lowest-id point.
pub fn build_dyadic_system(space: &QuasiMetricSpace, delta: f64, seed: u64) -> Result<DyadicSystem> {
    build_from_start(space, delta, 0, seed)
}

/// Nested-net construction with the first net point `start`.
pub fn build_from_start(space: &QuasiMetricSpace, delta: f64, start: usize, seed: u64) -> Result<DyadicSystem> {
    build_shifted(space, delta, start, 0, seed)
}

/// Nested-net construction whose generation `k` net is
/// `delta^(k - phase)`-separated.
pub fn build_shifted(space: &QuasiMetricSpace, delta: f64, start: usize, phase: i32, seed: u64) -> Result<DyadicSystem> {
    check_delta(delta)?;
    let n = space.n();
    if start >= n {
        return Err(invalid("start", format!("point {start} out of range")));
    }
    let diam = space.diameter();
    let mut k_top = 0i32;
    while level_distance(delta, k_top) <= diam {
        k_top -= 1;
    }
    while level_distance(delta, k_top + 1) > diam {
        k_top += 1;
    }
    k_top += phase;

    let mut mindist: Vec<f64> = (0..n).map(|y| space.dist(start, y)).collect();
    let mut is_center = vec![false; n];
    is_center[start] = true;

    let mut levels: Vec<Vec<(usize, Vec<usize>)>> = vec![vec![(start, (0..n).collect())]];
    let mut k = k_top;
    while levels.last().unwrap().iter().any(|(_, m)| m.len() > 1) {
        k += 1;
        let r = level_distance(delta, k - phase);
        loop {
            let mut best = 0usize;
            for y in 1..n {
                if mindist[y] > mindist[best] {
                    best = y;
                }
            }
            if is_center[best] || mindist[best] < r {
                break;
            }
            is_center[best] = true;
            for y in 0..n {
                let d = space.dist(best, y);
                if d < mindist[y] {
                    mindist[y] = d;
                }
            }
        }
        let mut next = Vec::new();
        for (_, members) in levels.last().unwrap() {
            let centers: Vec<usize> = members.iter().copied().filter(|&m| is_center[m]).collect();
            if centers.is_empty() {
                return Err(Error::Dyadic(format!("no net point inside a cube at generation {k}")));
            }
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
            for &x in members {
                let mut bi = 0;
                let mut bd = space.dist(centers[0], x);
                for (i, &c) in centers.iter().enumerate().skip(1) {
                    let d = space.dist(c, x);
                    if d < bd {
                        bd = d;
                        bi = i;
                    }
                }
                groups[bi].push(x);
            }
            for (c, g) in centers.into_iter().zip(groups) {
                next.push((c, g));
            }
        }
        levels.push(next);
    }
    let mut sys = DyadicSystem::from_levels(space, delta, k_top, levels)?;
    sys.seed = seed;
    sys.start = start;
    sys.phase = phase;
    Ok(sys)
}

/// Exhaustive certification of the dyadic properties.
pub fn verify_system(system: &DyadicSystem, space: &QuasiMetricSpace) -> SystemCheck {
    let n = space.n();
    let mut violations = Vec::new();
    let nl = system.n_levels();

    for li in 0..nl {
        let k = system.k_top + li as i32;
        let mut count = vec![0usize; n];
        for c in system.level(li) {
            for &m in &c.members {
                count[m] += 1;
            }
            if c.members.binary_search(&c.center).is_err() {
                violations.push(Violation::CenterNotMember { level: k, alpha: c.alpha });
            }
        }
        if let Some(x) = count.iter().position(|&c| c != 1) {
            violations.push(Violation::Partition {
                level: k,
                detail: format!("point {x} covered {} times", count[x]),
            });
        }
    }

    let mut hits: Vec<usize> = Vec::new();
    for li in 1..nl {
        for q in system.level(li) {
            for lk in 0..li {
                hits.clear();
                for &m in &q.members {
                    let o = system.cube_of[lk][m];
                    if o != u32::MAX && !hits.contains(&(o as usize)) {
                        hits.push(o as usize);
                    }
                }
                let contained: Vec<usize> = hits
                    .iter()
                    .copied()
                    .filter(|&h| {
                        let hm = &system.cubes[h].members;
                        q.members.iter().all(|m| hm.binary_search(m).is_ok())
                    })
                    .collect();
                if contained.len() != 1 {
                    violations.push(Violation::UniqueAncestor {
                        level: q.level,
                        alpha: q.alpha,
                        ancestor_level: system.k_top + lk as i32,
                        count: contained.len(),
                    });
                }
                for &h in &hits {
                    if !contained.contains(&h) {
                        violations.push(Violation::Nesting {
                            level: q.level,
                            alpha: q.alpha,
                            other_level: system.cubes[h].level,
                            other_alpha: system.cubes[h].alpha,
                        });
                    }
                }
            }
        }
    }

    for li in 0..nl.saturating_sub(1) {
        for (id, q) in system.level_range(li).zip(system.level(li)) {
            let mut union: Vec<usize> = system
                .level(li + 1)
                .iter()
                .filter(|c| c.members.iter().all(|m| q.members.binary_search(m).is_ok()))
                .flat_map(|c| c.members.iter().copied())
                .collect();
            union.sort_unstable();
            if union != q.members {
                violations.push(Violation::Children {
                    level: q.level,
                    alpha: q.alpha,
                    detail: format!("children cover {} of {} points", union.len(), q.members.len()),
                });
            }
            let linked: usize = q.children.iter().map(|&c| system.cubes[c].members.len()).sum();
            if linked != q.members.len() || q.children.iter().any(|&c| system.cubes[c].parent != Some(id)) {
                violations.push(Violation::Children {
                    level: q.level,
                    alpha: q.alpha,
                    detail: "parent links disagree with the partition".into(),
                });
            }
        }
    }

    let c1 = system.measured_c1;
    let big_c1 = system.measured_big_c1;
    for q in system.cubes() {
        let side = level_distance(system.delta, q.level);
        let inner = c1 * side * (1.0 - RADIUS_TOL);
        let outer = big_c1 * side * (1.0 + RADIUS_TOL);
        for y in 0..n {
            let d = space.dist(q.center, y);
            let member = q.members.binary_search(&y).is_ok();
            if d < inner && !member {
                violations.push(Violation::Containment {
                    level: q.level,
                    alpha: q.alpha,
                    detail: format!("point {y} in the inner ball but not in the cube"),
                });
            }
            if member && d > outer {
                violations.push(Violation::Containment {
                    level: q.level,
                    alpha: q.alpha,
                    detail: format!("member {y} outside the outer ball"),
                });
            }
        }
    }

    if violations.iter().all(|v| !matches!(v, Violation::Partition { .. })) {
        for (id, q) in system.cubes().iter().enumerate() {
            let li = system.level_index(id);
            let side = level_distance(system.delta, q.level);
            for lk in 0..li {
                let anc = system.cube_of[lk][q.center] as usize;
                let a = &system.cubes[anc];
                let aside = level_distance(system.delta, a.level);
                for y in 0..n {
                    if space.dist(q.center, y) <= big_c1 * side
                        && space.dist(a.center, y) > big_c1 * aside * (1.0 + RADIUS_TOL)
                    {
                        violations.push(Violation::MonotoneBalls {
                            level: q.level,
                            alpha: q.alpha,
                            ancestor_level: a.level,
                            ancestor_alpha: a.alpha,
                            point: y,
                        });
                        break;
                    }
                }
            }
        }
    }

    SystemCheck {
        c1,
        big_c1,
        max_children: system.max_children,
        child_ratio: system.child_ratio(),
        violations,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureFailure {
    pub ball: usize,
    pub center: usize,
    pub radius: f64,
    pub k: i32,
}

#[derive(Clone, Debug)]
pub struct AdjacentSystems {
    pub systems: Vec<DyadicSystem>,
    /// Smallest `C` with `B(x,r) ⊆ Q ⊆ B(x,Cr)` over all captured balls,
    /// each taken at its canonical radius.
    pub capture_constant: f64,
    pub capture_failures: Vec<CaptureFailure>,
    pub balls_scanned: usize,
    pub balls_captured: usize,
    /// Greedy lower bound for the geometric doubling constant.
    pub a1: usize,
    /// `A1^6 (A0^4/delta)^(log2 A1)`.
    pub t_bound: f64,
    /// Smallest `d(x_a, x_b) / delta^(k - phase)` between distinct centers of a
    /// level.
    pub center_separation: f64,
    /// Largest `min_a d(x, x_a) / delta^(k - phase)`.
    pub covering_ratio: f64,
}

impl AdjacentSystems {
    pub fn capture_rate(&self) -> f64 {
        if self.balls_scanned == 0 {
            1.0
        } else {
            self.balls_captured as f64 / self.balls_scanned as f64
        }
    }

    pub fn t_count(&self) -> usize {
        self.systems.len()
    }

    pub fn within_t_bound(&self) -> bool {
        self.t_count() as f64 <= self.t_bound
    }
}

/// First net point of system `t`: the lowest id for `t = 0`, a seeded
/// uniform draw otherwise.
pub fn start_point(n: usize, seed: u64, t: usize) -> usize {
    if t == 0 {
        0
    } else {
        ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64)).random_range(0..n)
    }
}

pub fn build_adjacent_systems(
    space: &QuasiMetricSpace,
    delta: f64,
    t_count: usize,
    seed: u64,
) -> Result<AdjacentSystems> {
    if t_count == 0 {
        return Err(invalid("t_count", "need at least one system"));
    }
    let systems = (0..t_count)
        .map(|t| {
            let start = start_point(space.n(), seed, t);
            build_shifted(space, delta, start, t as i32, seed.wrapping_add(t as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(scan_capture(space, systems))
}

/// Scans every canonical ball against the adjacent-systems capture property.
pub fn scan_capture(space: &QuasiMetricSpace, systems: Vec<DyadicSystem>) -> AdjacentSystems {
    let delta = systems[0].delta;
    let mut failures = Vec::new();
    let mut capture_constant = 0.0f64;
    let mut balls_captured = 0;
    for ball in space.balls() {
        let r = ball.radius();
        let k = capture_generation(delta, r);
        let mut best = f64::INFINITY;
        for sys in &systems {
            if k > sys.k_bot() && ball.len() > 1 {
                continue;
            }
            let q = sys.cube_at_generation(k, ball.center);
            let li = sys.level_index(q);
            if ball.members().iter().all(|&y| sys.cube_containing(li, y as usize) == q) {
                let md = sys
                    .cube(q)
                    .members
                    .iter()
                    .map(|&y| space.dist(ball.center, y))
                    .fold(0.0, f64::max);
                best = best.min(md / r);
            }
        }
        if best.is_finite() {
            balls_captured += 1;
            capture_constant = capture_constant.max(best);
        } else {
            failures.push(CaptureFailure {
                ball: ball.id,
                center: ball.center,
                radius: r,
                k,
            });
        }
    }

    let a1 = greedy_doubling(space, delta);
    let a0 = space.a0();
    let a1f = a1 as f64;
    let t_bound = a1f.powi(6) * (a0.powi(4) / delta).powf(a1f.log2());

    let mut center_separation = f64::INFINITY;
    let mut covering_ratio = 0.0f64;
    for sys in &systems {
        for li in 0..sys.n_levels() {
            let cubes = sys.level(li);
            let side = level_distance(delta, sys.k_top + li as i32 - sys.phase);
            for (i, a) in cubes.iter().enumerate() {
                for b in &cubes[i + 1..] {
                    center_separation = center_separation.min(space.dist(a.center, b.center) / side);
                }
            }
            for x in 0..space.n() {
                let m = cubes.iter().map(|c| space.dist(x, c.center)).fold(f64::INFINITY, f64::min);
                covering_ratio = covering_ratio.max(m / side);
            }
        }
    }

    AdjacentSystems {
        systems,
        capture_constant,
        capture_failures: failures,
        balls_scanned: space.ball_count(),
        balls_captured,
        a1,
        t_bound,
        center_separation,
        covering_ratio,
    }
}

/// The generation `k` with `delta^(k+3) < r <= delta^(k+2)`.
pub fn capture_generation(delta: f64, r: f64) -> i32 {
    let mut k = (r.ln() / delta.ln()).floor() as i32 - 2;
    while level_distance(delta, k + 2) < r {
        k -= 1;
    }
    while level_distance(delta, k + 3) >= r {
        k += 1;
    }
    k
}

/// Largest greedy count of `delta r`-separated points inside a canonical
/// ball of radius `r`.
fn greedy_doubling(space: &QuasiMetricSpace, delta: f64) -> usize {
    let mut best = 1;
    let mut kept: Vec<usize> = Vec::new();
    for ball in space.balls() {
        let sep = delta * ball.radius();
        kept.clear();
        for &y in ball.members() {
            let y = y as usize;
            if kept.iter().all(|&k| space.dist(k, y) >= sep) {
                kept.push(y);
            }
        }
        best = best.max(kept.len());
    }
    best
}
