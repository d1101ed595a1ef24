use proptest::prelude::*;

use shtlab::generators::FunctionSpec;
use shtlab::space::{build_space, QuasiMetricSpace, SpaceKind, SpaceParams};
use shtlab::weights::{
    a1_check, ainf_characteristic, ap_characteristic, bloom_weight, bmo_norm, conjugate, weight_doubling_check,
};

fn spaces() -> impl Strategy<Value = QuasiMetricSpace> {
    let kinds = prop_oneof![
        (2usize..33).prop_map(|n| (SpaceKind::Line, n)),
        (2usize..33).prop_map(|n| (SpaceKind::Sqline, n)),
        (2usize..6).prop_map(|s| (SpaceKind::Grid2d, s * s)),
        (1u32..6).prop_map(|d| (SpaceKind::Tree, 1usize << d)),
    ];
    (kinds, any::<u64>(), prop::option::of(0.1f64..1.0))
        .prop_map(|((kind, n), seed, sigma)| build_space(kind, n, &SpaceParams { mass_sigma: sigma }, seed).unwrap())
}

fn lognormal(s: &QuasiMetricSpace, sigma: f64, seed: u64) -> Vec<f64> {
    FunctionSpec::Lognormal { sigma, seed: Some(seed) }.evaluate(s, 0).unwrap()
}

/// Member sets of all open balls, found from the distance matrix alone.
fn brute_force_balls(s: &QuasiMetricSpace) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for c in 0..s.n() {
        let mut radii: Vec<f64> = (0..s.n()).map(|y| s.dist(c, y)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        for r in radii {
            out.push((0..s.n()).filter(|&y| s.dist(c, y) <= r).collect());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ap_dominates_ainf(s in spaces(), sigma in 0.1f64..2.0, seed in any::<u64>(), p in 1.1f64..5.0) {
        let w = lognormal(&s, sigma, seed);
        let (ap, _) = ap_characteristic(&s, &w, p).unwrap();
        let (ainf, _) = ainf_characteristic(&s, &w).unwrap();
        prop_assert!(ainf >= 1.0 - 1e-12);
        prop_assert!(ap >= ainf * (1.0 - 1e-12));
    }

    #[test]
    fn characteristic_is_scale_invariant(s in spaces(), seed in any::<u64>(), c in 1e-3f64..1e3, p in 1.1f64..5.0) {
        let w = lognormal(&s, 1.0, seed);
        let cw: Vec<f64> = w.iter().map(|v| c * v).collect();
        let a = ap_characteristic(&s, &w, p).unwrap().0;
        let b = ap_characteristic(&s, &cw, p).unwrap().0;
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn ap_duality_identity(s in spaces(), seed in any::<u64>(), sigma in 0.1f64..2.0, p in 1.1f64..5.0) {
        let w = lognormal(&s, sigma, seed);
        let pp = conjugate(p);
        let sigma_w: Vec<f64> = w.iter().map(|v| v.powf(1.0 - pp)).collect();
        let lhs = ap_characteristic(&s, &sigma_w, pp).unwrap().0;
        let rhs = ap_characteristic(&s, &w, p).unwrap().0.powf(pp - 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn bmo_matches_double_loop(s in spaces(), seed in any::<u64>()) {
        let b = FunctionSpec::Normal { sigma: 1.0, seed: Some(seed) }.evaluate(&s, 0).unwrap();
        let (norm, _) = bmo_norm(&s, &b, &vec![1.0; s.n()]).unwrap();
        let mut oracle = 0.0f64;
        for set in brute_force_balls(&s) {
            let mu: f64 = set.iter().map(|&y| s.mass(y)).sum();
            let avg = set.iter().map(|&y| b[y] * s.mass(y)).sum::<f64>() / mu;
            let osc = set.iter().map(|&y| (b[y] - avg).abs() * s.mass(y)).sum::<f64>() / mu;
            oracle = oracle.max(osc);
        }
        prop_assert!((norm - oracle).abs() <= 1e-12 * (1.0 + oracle));
    }

    #[test]
    fn bloom_weight_is_pointwise(seed in any::<u64>(), p in 1.1f64..5.0) {
        let s = build_space(SpaceKind::Line, 8, &SpaceParams::default(), 0).unwrap();
        let l1 = lognormal(&s, 1.0, seed);
        let l2 = lognormal(&s, 1.0, seed ^ 1);
        let nu = bloom_weight(&l1, &l2, p).unwrap();
        for x in 0..8 {
            let expect = (l1[x] / l2[x]).powf(1.0 / p);
            prop_assert!((nu.nu.values()[x] - expect).abs() <= 1e-12 * expect);
        }
    }
}

#[test]
fn power_weight_characteristic_increases() {
    let s = build_space(SpaceKind::Line, 64, &SpaceParams::default(), 0).unwrap();
    let mut last = 0.0;
    for a in [0.2, 0.5, 0.8] {
        let w = FunctionSpec::Power { exponent: a, eps: None }.evaluate(&s, 0).unwrap();
        let (ap, _) = ap_characteristic(&s, &w, 2.0).unwrap();
        assert!(ap > last, "a = {a}: {ap} <= {last}");
        last = ap;
    }
}

#[test]
fn random_a2_weight_doubles() {
    let s = build_space(SpaceKind::Line, 32, &SpaceParams::default(), 0).unwrap();
    for seed in 0..5 {
        let w = lognormal(&s, 0.7, seed);
        let check = weight_doubling_check(&s, &w, 2.0, &[2.0, 3.0]).unwrap();
        assert!(check.normalized_ratio <= 1.0, "{check:?}");
    }
}

#[test]
fn pair_a1_ratio() {
    let s = build_space(SpaceKind::Pair, 2, &SpaceParams::default(), 0).unwrap();
    assert_eq!(a1_check(&s, &[1.0, 3.0]).unwrap().ratio, 2.0);
}
