//! Finite spaces of homogeneous type.
//!
//! A space is a finite point set with a quasi-metric stored as a dense
//! matrix and an atomic measure. Every open ball `B(x, r) = {y : d(x, y) < r}`
//! of such a space is one of finitely many *canonical balls*: for a center
//! `c`, the balls are exactly the prefixes of the points sorted by distance
//! from `c`, cut between distinct distance values. All suprema over balls in
//! this crate run over that finite list.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Upper bound on the number of points; the distance matrix is dense.
pub const MAX_POINTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    /// Points `i/N` on the unit interval with `|x - y|`.
    Line,
    /// Points `i/N` with the quasi-metric `|x - y|^2`.
    Sqline,
    /// A `s x s` grid in the unit square, Euclidean distance (`N = s^2`).
    Grid2d,
    /// Leaves of a binary tree with the ultrametric `2^(h(x xor y)) / 2^depth`.
    Tree,
    /// Two atoms at distance 1 with mass 1/2 each.
    Pair,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Line => "line",
            SpaceKind::Sqline => "sqline",
            SpaceKind::Grid2d => "grid2d",
            SpaceKind::Tree => "tree",
            SpaceKind::Pair => "pair",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceParams {
    /// Log-normal spread of the atom masses. `None` gives uniform masses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_sigma: Option<f64>,
}

/// Quasi-triangle constant, doubling constant and upper dimension measured
/// on the finite space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredConstants {
    pub a0: f64,
    pub c_mu: f64,
    pub updim: f64,
}

/// A canonical ball: its member set plus the radius that realizes it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub id: usize,
    pub center: usize,
    /// Midpoint between the largest member distance and the next distance
    /// from the center, so `members = {y : d(center, y) < radius}` is exact.
    pub radius: f64,
    pub members: Vec<usize>,
}

/// Borrowed view of a canonical ball.
#[derive(Clone, Copy, Debug)]
pub struct BallRef<'a> {
    space: &'a QuasiMetricSpace,
    pub id: usize,
    pub center: usize,
    pub level: usize,
}

impl<'a> BallRef<'a> {
    /// Members sorted by (distance from the center, id).
    pub fn members(&self) -> &'a [u32] {
        let idx = &self.space.index;
        let n = self.space.n;
        let end = idx.level_ends[self.center][self.level] as usize;
        &idx.order[self.center * n..self.center * n + end]
    }

    pub fn len(&self) -> usize {
        self.space.index.level_ends[self.center][self.level] as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, y: usize) -> bool {
        self.space.index.level_of[self.center * self.space.n + y] as usize <= self.level
    }

    /// Largest distance from the center to a member.
    pub fn realized_radius(&self) -> f64 {
        self.space.index.level_dist[self.center][self.level]
    }

    pub fn radius(&self) -> f64 {
        self.space.canonical_radius(self.center, self.level)
    }

    pub fn measure(&self) -> f64 {
        self.space.ball_measures()[self.id]
    }

    pub fn to_ball(&self) -> Ball {
        let mut members: Vec<usize> = self.members().iter().map(|&y| y as usize).collect();
        members.sort_unstable();
        Ball {
            id: self.id,
            center: self.center,
            radius: self.radius(),
            members,
        }
    }
}

#[derive(Clone, Debug)]
struct BallIndex {
    /// `order[c * n + k]`: k-th point by distance from `c`, ties by id.
    order: Vec<u32>,
    /// `level_of[c * n + y]`: index of the smallest ball at `c` containing `y`.
    level_of: Vec<u32>,
    /// Cumulative member counts per level.
    level_ends: Vec<Vec<u32>>,
    /// Distance value of each level.
    level_dist: Vec<Vec<f64>>,
    /// First ball id of every center; length `n + 1`.
    offsets: Vec<usize>,
}

impl BallIndex {
    fn build(n: usize, dist: &[f64]) -> Self {
        let mut order = Vec::with_capacity(n * n);
        let mut level_of = vec![0u32; n * n];
        let mut level_ends = Vec::with_capacity(n);
        let mut level_dist = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in 0..n {
            let row = &dist[c * n..(c + 1) * n];
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                row[a as usize]
                    .total_cmp(&row[b as usize])
                    .then(a.cmp(&b))
            });
            let mut ends = Vec::new();
            let mut dists = Vec::new();
            for (k, &y) in idx.iter().enumerate() {
                let d = row[y as usize];
                if dists.last() != Some(&d) {
                    if !dists.is_empty() {
                        ends.push(k as u32);
                    }
                    dists.push(d);
                }
                level_of[c * n + y as usize] = (dists.len() - 1) as u32;
            }
            ends.push(n as u32);
            offsets.push(offsets[c] + ends.len());
            order.extend_from_slice(&idx);
            level_ends.push(ends);
            level_dist.push(dists);
        }
        BallIndex {
            order,
            level_of,
            level_ends,
            level_dist,
            offsets,
        }
    }
}

/// A finite quasi-metric measure space.
#[derive(Debug)]
pub struct QuasiMetricSpace {
    n: usize,
    coords: Option<Vec<Vec<f64>>>,
    dist: Vec<f64>,
    mass: Vec<f64>,
    meta: serde_json::Value,
    constants: MeasuredConstants,
    index: BallIndex,
    measures: OnceLock<Vec<f64>>,
    distinct: OnceLock<Vec<usize>>,
}

impl Clone for QuasiMetricSpace {
    fn clone(&self) -> Self {
        QuasiMetricSpace {
            n: self.n,
            coords: self.coords.clone(),
            dist: self.dist.clone(),
            mass: self.mass.clone(),
            meta: self.meta.clone(),
            constants: self.constants,
            index: self.index.clone(),
            measures: OnceLock::new(),
            distinct: OnceLock::new(),
        }
    }
}

/// On-disk representation: row-major distances and masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub n: usize,
    pub dist: Vec<f64>,
    pub mass: Vec<f64>,
    #[serde(default)]
    pub meta: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
}

impl QuasiMetricSpace {
    /// Validates the raw data and measures the structural constants.
    pub fn from_parts(
        dist: Vec<f64>,
        mass: Vec<f64>,
        coords: Option<Vec<Vec<f64>>>,
        meta: serde_json::Value,
    ) -> Result<Self> {
        let n = mass.len();
        if n < 2 {
            return Err(Error::InvalidSpace(format!("need at least 2 points, got {n}")));
        }
        if n > MAX_POINTS {
            return Err(Error::InvalidSpace(format!(
                "{n} points exceeds the cap of {MAX_POINTS}"
            )));
        }
        if dist.len() != n * n {
            return Err(Error::InvalidSpace(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        if let Some((i, m)) = mass.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidSpace(format!("mass of point {i} is {m}, must be positive")));
        }
        for x in 0..n {
            if dist[x * n + x] != 0.0 {
                return Err(Error::InvalidSpace(format!("d({x},{x}) is not zero")));
            }
            for y in 0..n {
                let d = dist[x * n + y];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidSpace(format!("d({x},{y}) = {d}")));
                }
                if x != y && d == 0.0 {
                    return Err(Error::InvalidSpace(format!("d({x},{y}) = 0 for distinct points")));
                }
                if d != dist[y * n + x] {
                    return Err(Error::InvalidSpace(format!("d({x},{y}) != d({y},{x})")));
                }
            }
        }
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(Error::InvalidSpace("coords length does not match".into()));
            }
        }
        let index = BallIndex::build(n, &dist);
        let mut space = QuasiMetricSpace {
            n,
            coords,
            dist,
            mass,
            meta,
            constants: MeasuredConstants {
                a0: 1.0,
                c_mu: 1.0,
                updim: 1.0,
            },
            index,
            measures: OnceLock::new(),
            distinct: OnceLock::new(),
        };
        space.constants = space.compute_constants();
        Ok(space)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    pub fn dist_matrix(&self) -> &[f64] {
        &self.dist
    }

    pub fn mass(&self, x: usize) -> f64 {
        self.mass[x]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn meta(&self) -> &serde_json::Value {
        &self.meta
    }

    pub fn constants(&self) -> MeasuredConstants {
        self.constants
    }

    pub fn a0(&self) -> f64 {
        self.constants.a0
    }

    pub fn c_mu(&self) -> f64 {
        self.constants.c_mu
    }

    pub fn updim(&self) -> f64 {
        self.constants.updim
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    /// First coordinate of `x`, or `x / N` when the space has no embedding.
    pub fn position(&self, x: usize) -> f64 {
        match &self.coords {
            Some(c) if !c[x].is_empty() => c[x][0],
            _ => x as f64 / self.n as f64,
        }
    }

    // ---- canonical balls -------------------------------------------------

    pub fn ball_count(&self) -> usize {
        self.index.offsets[self.n]
    }

    pub fn levels_at(&self, center: usize) -> usize {
        self.index.level_ends[center].len()
    }

    pub fn ball_id(&self, center: usize, level: usize) -> usize {
        debug_assert!(level < self.levels_at(center));
        self.index.offsets[center] + level
    }

    pub fn ball(&self, id: usize) -> BallRef<'_> {
        let center = match self.index.offsets.binary_search(&id) {
            Ok(c) => c,
            Err(c) => c - 1,
        };
        BallRef {
            space: self,
            id,
            center,
            level: id - self.index.offsets[center],
        }
    }

    pub fn ball_at(&self, center: usize, level: usize) -> BallRef<'_> {
        BallRef {
            space: self,
            id: self.ball_id(center, level),
            center,
            level,
        }
    }

    pub fn balls(&self) -> impl Iterator<Item = BallRef<'_>> + '_ {
        (0..self.n).flat_map(move |c| (0..self.levels_at(c)).map(move |l| self.ball_at(c, l)))
    }

    /// Points sorted by distance from `center`.
    pub fn order_from(&self, center: usize) -> &[u32] {
        &self.index.order[center * self.n..(center + 1) * self.n]
    }

    /// Level of the smallest ball centered at `center` containing `y`.
    pub fn level_of(&self, center: usize, y: usize) -> usize {
        self.index.level_of[center * self.n + y] as usize
    }

    pub fn level_end(&self, center: usize, level: usize) -> usize {
        self.index.level_ends[center][level] as usize
    }

    pub fn level_distance(&self, center: usize, level: usize) -> f64 {
        self.index.level_dist[center][level]
    }

    pub(crate) fn canonical_radius(&self, center: usize, level: usize) -> f64 {
        let d = &self.index.level_dist[center];
        let here = d[level];
        let mid = if level + 1 < d.len() {
            here + (d[level + 1] - here) / 2.0
        } else {
            // n >= 2, so the outermost level is never level 0.
            here + (here - d[level - 1]) / 2.0
        };
        // Adjacent levels one ulp apart have no midpoint; the next float
        // still separates them under strict inequality.
        mid.max(f64::from_bits(here.to_bits() + 1))
    }

    /// Largest level at `center` whose distance satisfies `keep(d)`; the
    /// level distances are increasing, `keep` must be monotone decreasing.
    fn last_level_where(&self, center: usize, keep: impl Fn(f64) -> bool) -> Option<usize> {
        let d = &self.index.level_dist[center];
        let k = d.partition_point(|&x| keep(x));
        k.checked_sub(1)
    }

    /// The canonical ball equal to the open ball `B(center, radius)`.
    pub fn open_ball(&self, center: usize, radius: f64) -> Option<BallRef<'_>> {
        self.last_level_where(center, |d| d < radius)
            .map(|l| self.ball_at(center, l))
    }

    /// The canonical ball equal to `{y : d(center, y) <= radius}`.
    pub fn closed_ball(&self, center: usize, radius: f64) -> BallRef<'_> {
        let l = self.last_level_where(center, |d| d <= radius).unwrap_or(0);
        self.ball_at(center, l)
    }

    /// Dilation of a ball at its realized radius: `{y : d(c, y) <= factor * r}`
    /// where `r` is the largest member distance. This is the smallest set
    /// `B(c, factor * s)` over all radii `s` that realize the ball.
    pub fn dilate(&self, ball: BallRef<'_>, factor: f64) -> BallRef<'_> {
        self.closed_ball(ball.center, factor * ball.realized_radius())
    }

    /// The ball `B(c, factor * radius)` for the canonical radius.
    pub fn scale_canonical(&self, ball: BallRef<'_>, factor: f64) -> BallRef<'_> {
        self.open_ball(ball.center, factor * ball.radius())
            .expect("scaled ball contains its center")
    }

    /// `∫_B g dμ` for every canonical ball, by per-center prefix sums in
    /// distance order. [`Self::integral_in_order`] reproduces each entry
    /// bit-exactly.
    pub fn ball_integrals(&self, g: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.ball_count());
        for c in 0..self.n {
            let order = self.order_from(c);
            let mut acc = 0.0;
            let mut k = 0usize;
            for &end in &self.index.level_ends[c] {
                while k < end as usize {
                    let y = order[k] as usize;
                    acc += g[y] * self.mass[y];
                    k += 1;
                }
                out.push(acc);
            }
        }
        out
    }

    /// Sequential `Σ g·μ` over the ball's members in distance order.
    pub fn integral_in_order(&self, g: &[f64], ball: BallRef<'_>) -> f64 {
        let mut acc = 0.0;
        for &y in ball.members() {
            acc += g[y as usize] * self.mass[y as usize];
        }
        acc
    }

    pub fn ball_measures(&self) -> &[f64] {
        self.measures
            .get_or_init(|| self.ball_integrals(&vec![1.0; self.n]))
    }

    /// One representative (lowest id) per distinct member set.
    pub fn distinct_ball_sets(&self) -> &[usize] {
        self.distinct.get_or_init(|| {
            let words = self.n.div_ceil(64);
            let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
            let mut reps = Vec::new();
            for ball in self.balls() {
                let mut key = vec![0u64; words];
                for &y in ball.members() {
                    key[y as usize / 64] |= 1 << (y % 64);
                }
                seen.entry(key).or_insert_with(|| {
                    reps.push(ball.id);
                    ball.id
                });
            }
            reps
        })
    }

    /// Full list of canonical balls, deduplicated by (center, member set).
    pub fn canonical_balls(&self) -> Vec<Ball> {
        self.balls().map(|b| b.to_ball()).collect()
    }

    // ---- measures and averages -------------------------------------------

    pub fn set_measure(&self, set: &[usize]) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(set.iter().map(|&y| self.mass[y]).sum())
    }

    pub fn set_average(&self, f: &[f64], set: &[usize]) -> Result<f64> {
        let mu = self.set_measure(set)?;
        Ok(set.iter().map(|&y| f[y] * self.mass[y]).sum::<f64>() / mu)
    }

    pub fn mask_measure(&self, mask: &[bool]) -> f64 {
        mask.iter()
            .zip(&self.mass)
            .filter(|(m, _)| **m)
            .map(|(_, w)| w)
            .sum()
    }

    /// `(1/μ(A)) ∫_A g dμ`, zero for an empty mask.
    pub fn mask_average(&self, g: &[f64], mask: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for y in 0..self.n {
            if mask[y] {
                num += g[y] * self.mass[y];
                den += self.mass[y];
            }
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    // ---- constants ---------------------------------------------------------

    fn compute_constants(&self) -> MeasuredConstants {
        let n = self.n;
        let mut a0 = 1.0f64;
        for x in 0..n {
            for y in (x + 1)..n {
                let dxy = self.dist(x, y);
                for z in 0..n {
                    let ratio = dxy / (self.dist(x, z) + self.dist(z, y));
                    if ratio > a0 {
                        a0 = ratio;
                    }
                }
            }
        }
        let c_mu = self.growth_ratio(2.0);
        let mut updim = 0.0f64;
        for lambda in [2.0f64, 4.0, 8.0] {
            let r = self.growth_ratio(lambda);
            updim = updim.max((r / c_mu).ln() / lambda.ln());
        }
        MeasuredConstants {
            a0,
            c_mu,
            updim: updim.max(1e-9),
        }
    }

    /// `sup μ(B(x, λr)) / μ(B(x, r))` over all centers and radii. For a ball
    /// realized on `(d_i, d_{i+1}]` the supremum is reached as `r → d_{i+1}`,
    /// where `B(x, λr)` tends to `{y : d(x, y) < λ d_{i+1}}`.
    pub fn growth_ratio(&self, lambda: f64) -> f64 {
        let measures = self.ball_measures();
        let mut best = 1.0f64;
        for c in 0..self.n {
            let d = &self.index.level_dist[c];
            for i in 0..d.len().saturating_sub(1) {
                let limit = lambda * d[i + 1];
                let j = self.last_level_where(c, |x| x < limit).unwrap_or(0);
                let ratio = measures[self.ball_id(c, j)] / measures[self.ball_id(c, i)];
                best = best.max(ratio);
            }
        }
        best
    }

    // ---- IO ------------------------------------------------------------------

    pub fn to_file(&self) -> SpaceFile {
        SpaceFile {
            n: self.n,
            dist: self.dist.clone(),
            mass: self.mass.clone(),
            meta: self.meta.clone(),
            coords: self.coords.clone(),
        }
    }

    pub fn from_file(file: SpaceFile) -> Result<Self> {
        if file.mass.len() != file.n {
            return Err(Error::InvalidSpace(format!(
                "n = {} but {} masses",
                file.n,
                file.mass.len()
            )));
        }
        Self::from_parts(file.dist, file.mass, file.coords, file.meta)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_file())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file(serde_json::from_str(&text)?)
    }
}

/// Instantiates one of the built-in generators.
pub fn build_space(kind: SpaceKind, n: usize, params: &SpaceParams, seed: u64) -> Result<QuasiMetricSpace> {
    if n < 2 {
        return Err(invalid("n", format!("need n >= 2, got {n}")));
    }
    let (coords, dist): (Vec<Vec<f64>>, Vec<f64>) = match kind {
        SpaceKind::Line | SpaceKind::Sqline => {
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
            let mut dist = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let d = (xs[i] - xs[j]).abs();
                    dist[i * n + j] = if kind == SpaceKind::Sqline { d * d } else { d };
                }
            }
            (xs.into_iter().map(|x| vec![x]).collect(), dist)
        }
        SpaceKind::Grid2d => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(invalid("n", format!("grid2d needs a perfect square, got {n}")));
            }
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|i| vec![(i / side) as f64 / side as f64, (i % side) as f64 / side as f64])
                .collect();
            let mut dist = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let dx = pts[i][0] - pts[j][0];
                    let dy = pts[i][1] - pts[j][1];
                    dist[i * n + j] = (dx * dx + dy * dy).sqrt();
                }
            }
            (pts, dist)
        }
        SpaceKind::Tree => {
            let depth = usize::BITS - (n - 1).leading_zeros();
            let scale = (depth as f64).exp2();
            let mut dist = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let h = usize::BITS - (i ^ j).leading_zeros();
                        dist[i * n + j] = (h as f64).exp2() / scale;
                    }
                }
            }
            ((0..n).map(|i| vec![i as f64 / n as f64]).collect(), dist)
        }
        SpaceKind::Pair => {
            if n != 2 {
                return Err(invalid("n", "the pair space has exactly 2 points"));
            }
            (vec![vec![0.0], vec![1.0]], vec![0.0, 1.0, 1.0, 0.0])
        }
    };
    let mass = match params.mass_sigma {
        None => vec![1.0 / n as f64; n],
        Some(sigma) => {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(invalid("mass_sigma", format!("{sigma} is not a valid spread")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    (sigma * z).exp()
                })
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|m| m / total).collect()
        }
    };
    let meta = serde_json::json!({
        "kind": kind.name(),
        "n": n,
        "params": params,
        "seed": seed,
    });
    QuasiMetricSpace::from_parts(dist, mass, Some(coords), meta)
}

/// Role of a point function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    F,
    B,
    W,
    Lambda1,
    Lambda2,
    Nu,
    G,
}

impl Role {
    pub fn is_weight(self) -> bool {
        matches!(self, Role::W | Role::Lambda1 | Role::Lambda2 | Role::Nu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFunction {
    pub values: Vec<f64>,
    pub role: Role,
}

impl PointFunction {
    pub fn new(space: &QuasiMetricSpace, values: Vec<f64>, role: Role) -> Result<Self> {
        if values.len() != space.n() {
            return Err(invalid(
                "values",
                format!("length {} does not match space size {}", values.len(), space.n()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid("values", format!("non-finite entry {v}")));
        }
        if role.is_weight() {
            if let Some(v) = values.iter().find(|v| **v <= 0.0) {
                return Err(invalid("values", format!("weight entry {v} is not positive")));
            }
        }
        Ok(PointFunction { values, role })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }
}

pub fn measured_constants(space: &QuasiMetricSpace) -> MeasuredConstants {
    space.constants()
}

pub fn canonical_balls(space: &QuasiMetricSpace) -> Vec<Ball> {
    space.canonical_balls()
}
