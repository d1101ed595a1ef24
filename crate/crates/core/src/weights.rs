//! Muckenhoupt characteristics, reverse Hölder constants, weighted BMO and
//! the Bloom weight. Every supremum runs over the canonical balls.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operators::maximal_function;
use crate::space::QuasiMetricSpace;

/// Maximum of `value(ball)` over canonical balls, lowest id on ties.
fn argmax_balls(count: usize, mut value: impl FnMut(usize) -> f64) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for id in 0..count {
        let v = value(id);
        if v > best.0 {
            best = (v, id);
        }
    }
    best
}

fn check_positive(w: &[f64]) -> Result<()> {
    if let Some(v) = w.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(invalid("w", format!("weight entry {v} is not positive")));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(invalid("p", format!("need 1 < p < inf, got {p}")));
    }
    Ok(())
}

/// `p' = p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `[w]_{A_p}` and the ball attaining it.
pub fn ap_characteristic(space: &QuasiMetricSpace, w: &[f64], p: f64) -> Result<(f64, usize)> {
    check_p(p)?;
    check_positive(w)?;
    let e = -1.0 / (p - 1.0);
    let dual: Vec<f64> = w.iter().map(|v| v.powf(e)).collect();
    let iw = space.ball_integrals(w);
    let id = space.ball_integrals(&dual);
    let mu = space.ball_measures();
    Ok(argmax_balls(mu.len(), |b| {
        (iw[b] / mu[b]) * (id[b] / mu[b]).powf(p - 1.0)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct A1Check {
    /// `max_x Mw(x) / w(x)`.
    pub ratio: f64,
    pub witness: usize,
    pub is_a1: bool,
}

pub fn a1_check(space: &QuasiMetricSpace, w: &[f64]) -> Result<A1Check> {
    check_positive(w)?;
    let mw = maximal_function(space, w);
    let mut best = (f64::NEG_INFINITY, 0);
    for x in 0..space.n() {
        let r = mw.values[x] / w[x];
        if r > best.0 {
            best = (r, x);
        }
    }
    Ok(A1Check {
        ratio: best.0,
        witness: best.1,
        is_a1: best.0 <= 1.0 + 1e-9,
    })
}

/// `[w]_{A_inf} = sup_B <w>_B exp(<log 1/w>_B)`.
pub fn ainf_characteristic(space: &QuasiMetricSpace, w: &[f64]) -> Result<(f64, usize)> {
    check_positive(w)?;
    let logs: Vec<f64> = w.iter().map(|v| -v.ln()).collect();
    let iw = space.ball_integrals(w);
    let il = space.ball_integrals(&logs);
    let mu = space.ball_measures();
    Ok(argmax_balls(mu.len(), |b| (iw[b] / mu[b]) * (il[b] / mu[b]).exp()))
}

/// Smallest `C` with `<w>_B <= C <w^delta>_B^(1/delta)` on every ball.
pub fn reverse_holder_constant(space: &QuasiMetricSpace, w: &[f64], delta_exp: f64) -> Result<(f64, usize)> {
    if !(delta_exp > 0.0 && delta_exp < 1.0) {
        return Err(invalid("delta_exp", format!("{delta_exp} is not in (0, 1)")));
    }
    check_positive(w)?;
    let wd: Vec<f64> = w.iter().map(|v| v.powf(delta_exp)).collect();
    let iw = space.ball_integrals(w);
    let id = space.ball_integrals(&wd);
    let mu = space.ball_measures();
    Ok(argmax_balls(mu.len(), |b| {
        (iw[b] / mu[b]) / (id[b] / mu[b]).powf(1.0 / delta_exp)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingCheck {
    /// `max w(lambda B) / (lambda^(np) [w]_{A_p} w(B))`.
    pub ratio: f64,
    /// The same ratio divided by `C_mu^p`; at most 1 for the sampled
    /// dilations, since `mu(lambda B) <= C_mu lambda^n mu(B)` there.
    pub normalized_ratio: f64,
    pub ball: usize,
    pub lambda: f64,
}

/// Weight doubling against the dilations `lambdas` (canonical radius times
/// `lambda`, members recomputed).
pub fn weight_doubling_check(space: &QuasiMetricSpace, w: &[f64], p: f64, lambdas: &[f64]) -> Result<DoublingCheck> {
    let (ap, _) = ap_characteristic(space, w, p)?;
    if let Some(l) = lambdas.iter().find(|l| !(**l > 1.0 && l.is_finite())) {
        return Err(invalid("lambdas", format!("dilation {l} is not in (1, inf)")));
    }
    let iw = space.ball_integrals(w);
    let n = space.updim();
    let mut best = DoublingCheck {
        ratio: f64::NEG_INFINITY,
        normalized_ratio: f64::NEG_INFINITY,
        ball: 0,
        lambda: lambdas.first().copied().unwrap_or(2.0),
    };
    for &lambda in lambdas {
        let scale = lambda.powf(n * p) * ap;
        for ball in space.balls() {
            let big = space.scale_canonical(ball, lambda);
            let r = iw[big.id] / (scale * iw[ball.id]);
            if r > best.ratio {
                best.ratio = r;
                best.ball = ball.id;
                best.lambda = lambda;
            }
        }
    }
    best.normalized_ratio = best.ratio / space.c_mu().powf(p);
    Ok(best)
}

/// `∫_B |b - b_B| dmu` for every canonical ball, with `b_B` the mu-average.
pub fn ball_oscillation_integrals(space: &QuasiMetricSpace, b: &[f64]) -> Vec<f64> {
    let ib = space.ball_integrals(b);
    let mu = space.ball_measures();
    space
        .balls()
        .map(|ball| {
            let avg = ib[ball.id] / mu[ball.id];
            ball.members()
                .iter()
                .map(|&y| (b[y as usize] - avg).abs() * space.mass(y as usize))
                .sum()
        })
        .collect()
}

/// `||b||_{BMO_w} = sup_B w(B)^-1 ∫_B |b - b_B| dmu`.
pub fn bmo_norm(space: &QuasiMetricSpace, b: &[f64], w: &[f64]) -> Result<(f64, usize)> {
    check_positive(w)?;
    let osc = ball_oscillation_integrals(space, b);
    let iw = space.ball_integrals(w);
    Ok(argmax_balls(osc.len(), |id| osc[id] / iw[id]))
}

/// `Omega(b, E) = mu(E)^-1 ∫_E |b - b_E| dmu`.
pub fn mean_oscillation(space: &QuasiMetricSpace, b: &[f64], set: &[usize]) -> Result<f64> {
    let avg = space.set_average(b, set)?;
    let mu = space.set_measure(set)?;
    Ok(set.iter().map(|&y| (b[y] - avg).abs() * space.mass(y)).sum::<f64>() / mu)
}

/// A positive weight with cached characteristics.
#[derive(Debug)]
pub struct Weight {
    values: Vec<f64>,
    ap: Mutex<Vec<(u64, f64)>>,
}

impl Clone for Weight {
    fn clone(&self) -> Self {
        Weight {
            values: self.values.clone(),
            ap: Mutex::new(self.ap.lock().unwrap().clone()),
        }
    }
}

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_positive(&values)?;
        Ok(Weight {
            values,
            ap: Mutex::new(Vec::new()),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ap(&self, space: &QuasiMetricSpace, p: f64) -> Result<f64> {
        let key = p.to_bits();
        if let Some(&(_, v)) = self.ap.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Ok(v);
        }
        let (v, _) = ap_characteristic(space, &self.values, p)?;
        self.ap.lock().unwrap().push((key, v));
        Ok(v)
    }

    pub fn profile(&self, space: &QuasiMetricSpace, ps: &[f64], rh_exponents: &[f64]) -> Result<WeightProfile> {
        Ok(WeightProfile {
            ap: ps
                .iter()
                .map(|&p| Ok((p, self.ap(space, p)?)))
                .collect::<Result<_>>()?,
            ainf: ainf_characteristic(space, &self.values)?.0,
            a1_ratio: a1_check(space, &self.values)?.ratio,
            reverse_holder: rh_exponents
                .iter()
                .map(|&d| Ok((d, reverse_holder_constant(space, &self.values, d)?.0)))
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub ap: Vec<(f64, f64)>,
    pub ainf: f64,
    pub a1_ratio: f64,
    pub reverse_holder: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct BloomWeight {
    pub nu: Weight,
    pub p: f64,
}

/// `nu = lambda1^(1/p) lambda2^(-1/p)`.
pub fn bloom_weight(lambda1: &[f64], lambda2: &[f64], p: f64) -> Result<BloomWeight> {
    check_p(p)?;
    check_positive(lambda1)?;
    check_positive(lambda2)?;
    if lambda1.len() != lambda2.len() {
        return Err(invalid("lambda2", "length differs from lambda1"));
    }
    let values = lambda1
        .iter()
        .zip(lambda2)
        .map(|(a, b)| a.powf(1.0 / p) * b.powf(-1.0 / p))
        .collect();
    Ok(BloomWeight { nu: Weight::new(values)?, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceKind, SpaceParams};

    fn pair() -> QuasiMetricSpace {
        build_space(SpaceKind::Pair, 2, &SpaceParams::default(), 0).unwrap()
    }

    #[test]
    fn pair_closed_forms() {
        let s = pair();
        assert_eq!(ap_characteristic(&s, &[1.0, 4.0], 2.0).unwrap().0, 25.0 / 16.0);
        assert_eq!(ainf_characteristic(&s, &[1.0, 4.0]).unwrap().0, 1.25);
        assert!((reverse_holder_constant(&s, &[1.0, 4.0], 0.5).unwrap().0 - 10.0 / 9.0).abs() < 1e-15);
        assert_eq!(a1_check(&s, &[1.0, 3.0]).unwrap().ratio, 2.0);
        assert_eq!(bmo_norm(&s, &[0.0, 1.0], &[1.0, 1.0]).unwrap().0, 0.5);
        assert_eq!(mean_oscillation(&s, &[0.0, 1.0], &[0, 1]).unwrap(), 0.5);
        let nu = bloom_weight(&[1.0, 4.0], &[4.0, 1.0], 2.0).unwrap();
        assert_eq!(nu.nu.values(), &[0.5, 2.0]);
    }

    #[test]
    fn unit_weight() {
        let s = build_space(SpaceKind::Line, 8, &SpaceParams::default(), 0).unwrap();
        let w = vec![1.0; 8];
        assert_eq!(ap_characteristic(&s, &w, 3.0).unwrap().0, 1.0);
        assert_eq!(a1_check(&s, &w).unwrap().ratio, 1.0);
        assert_eq!(ainf_characteristic(&s, &w).unwrap().0, 1.0);
        assert_eq!(reverse_holder_constant(&s, &w, 0.3).unwrap().0, 1.0);
        assert!(weight_doubling_check(&s, &w, 2.0, &[2.0, 4.0, 8.0]).unwrap().normalized_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn rejects_p_at_most_one() {
        let s = pair();
        assert!(ap_characteristic(&s, &[1.0, 1.0], 1.0).is_err());
    }
}
