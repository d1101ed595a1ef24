use proptest::prelude::*;

use shtlab::dyadic::build_dyadic_system;
use shtlab::generators::FunctionSpec;
use shtlab::operators::{BallProbes, ProbeSet};
use shtlab::space::{build_space, QuasiMetricSpace, SpaceKind, SpaceParams};
use shtlab::sparse::SparseFamily;
use shtlab::verify::{
    ap_duality, fit_weight_exponent, pointwise_reduction, power_weight_sweep, sharp_exponent, verify_bloom_jn,
    verify_duality_chain, verify_lower_bound, verify_upper_bound_bm, verify_upper_bound_cb,
};

fn pair() -> QuasiMetricSpace {
    build_space(SpaceKind::Pair, 2, &SpaceParams::default(), 0).unwrap()
}

fn line(n: usize) -> QuasiMetricSpace {
    build_space(SpaceKind::Line, n, &SpaceParams::default(), 0).unwrap()
}

fn small_probes() -> ProbeSet {
    ProbeSet { singletons: true, balls: BallProbes::All, weighted_balls: BallProbes::None, random: 3 }
}

fn lognormal(s: &QuasiMetricSpace, sigma: f64, seed: u64) -> Vec<f64> {
    FunctionSpec::Lognormal { sigma, seed: Some(seed) }.evaluate(s, 0).unwrap()
}

#[test]
fn pair_upper_bound_is_sharp() {
    // C_b f = (|f_2|, |f_1|) / 2 for b = (0, 1), so the norm is 1/2 = ||b||_BMO.
    let s = pair();
    let w = [1.0, 1.0];
    let up = verify_upper_bound_cb(&s, &[0.0, 1.0], &w, &w, 2.0, &ProbeSet::default(), 0, 100.0).unwrap();
    assert_eq!(up.bmo_nu, 0.5);
    assert!((up.rho.unwrap() - 1.0).abs() < 1e-12);
    assert!(up.pass());
}

#[test]
fn pair_jn_constant() {
    // nu = (1/2, 2), ||b||_BMO(nu) = 1 / 2.5, [l2]_A2 = 2.5 * 0.625.
    // Whole ball: lhs = (1/4 + 1/16) / 2, rhs = 0.4^2 * 25/16 * 0.75^2.
    let s = pair();
    let jn = verify_bloom_jn(&s, &[0.0, 1.0], &[1.0, 4.0], &[4.0, 1.0], 2.0, 2.0, 0.0).unwrap();
    assert!((jn.bmo_nu - 0.4).abs() < 1e-15);
    let lhs = (0.25 + 0.0625) / 2.0;
    let rhs = 0.16 * (25.0 / 16.0) * 0.5625;
    assert!((jn.constant - lhs / rhs).abs() < 1e-12);
    assert!((jn.constant - 10.0 / 9.0).abs() < 1e-12);
}

#[test]
fn constant_symbol_gives_zero_chain() {
    let s = line(16);
    let sys = build_dyadic_system(&s, 0.5, 0).unwrap();
    let fam = SparseFamily::new(0, &sys, vec![0, 1, 2]);
    let w = lognormal(&s, 0.5, 3);
    let f = lognormal(&s, 1.0, 4);
    let chain = verify_duality_chain(&s, &sys, &fam, &[2.0; 16], &w, &w, 2.0, &f, &small_probes(), 2, 0).unwrap();
    assert_eq!(chain.end_to_end, 0.0);
    assert!(chain.pass());
    let lb = verify_lower_bound(&s, &[2.0; 16], &w, &w, 2.0, &small_probes(), 0).unwrap();
    assert!(lb.vacuous);
    let bm = verify_upper_bound_bm(&s, &[2.0; 16], &w, &w, 2.0, &small_probes(), 0, 100.0).unwrap();
    assert!(bm.bound.rho.is_none());
}

#[test]
fn constant_weights_have_no_spread() {
    let s = line(16);
    let sys = build_dyadic_system(&s, 0.5, 0).unwrap();
    let b = FunctionSpec::Normal { sigma: 1.0, seed: Some(1) }.evaluate(&s, 0).unwrap();
    let sweep = power_weight_sweep(&s, &sys, &[0], &b, 2.0, &[0.0, 0.0, 0.0], &small_probes(), 0.2, 0).unwrap();
    assert_eq!(sweep.sparse.status, "insufficient spread");
    assert!(sweep.sparse.slope.is_none());
}

#[test]
fn fit_of_exact_power_law() {
    let samples: Vec<(f64, f64)> = (1..6).map(|i| (2f64.powi(i), 0.5 * 2f64.powi(i).powf(0.75))).collect();
    let fit = fit_weight_exponent(&samples, 1.0);
    assert!((fit.slope.unwrap() - 0.75).abs() < 1e-12);
    assert!((fit.intercept.unwrap() - 0.5f64.ln()).abs() < 1e-12);
    assert!(fit.pass());
    assert!(!fit_weight_exponent(&samples, 0.5).pass());
}

#[test]
fn sharp_exponent_values() {
    assert_eq!(sharp_exponent(2.0), 1.0);
    assert_eq!(sharp_exponent(3.0), 1.0);
    assert_eq!(sharp_exponent(1.5), 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rho_is_invariant_under_scaling_b(seed in any::<u64>(), c in 0.1f64..10.0, p in 1.3f64..3.5) {
        let s = line(12);
        let b = FunctionSpec::Normal { sigma: 1.0, seed: Some(seed) }.evaluate(&s, 0).unwrap();
        let cb: Vec<f64> = b.iter().map(|v| c * v).collect();
        let (l1, l2) = (lognormal(&s, 0.5, seed ^ 1), lognormal(&s, 0.5, seed ^ 2));
        let a = verify_upper_bound_cb(&s, &b, &l1, &l2, p, &small_probes(), seed, 100.0).unwrap().rho.unwrap();
        let z = verify_upper_bound_cb(&s, &cb, &l1, &l2, p, &small_probes(), seed, 100.0).unwrap().rho.unwrap();
        prop_assert!((a - z).abs() <= 1e-9 * a);
    }

    #[test]
    fn bm_rho_is_below_cb_rho(seed in any::<u64>(), p in 1.3f64..3.5) {
        let s = line(12);
        let b = lognormal(&s, 1.0, seed);
        let (l1, l2) = (lognormal(&s, 0.5, seed ^ 1), lognormal(&s, 0.5, seed ^ 2));
        let cb = verify_upper_bound_cb(&s, &b, &l1, &l2, p, &small_probes(), seed, 100.0).unwrap();
        let bm = verify_upper_bound_bm(&s, &b, &l1, &l2, p, &small_probes(), seed, 100.0).unwrap();
        prop_assert!(bm.pointwise.violations == 0);
        prop_assert!(bm.bound.rho.unwrap() <= cb.rho.unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn pointwise_reduction_holds(seed in any::<u64>()) {
        let s = line(20);
        let b = lognormal(&s, 1.0, seed);
        let f = lognormal(&s, 1.0, seed ^ 9);
        let red = pointwise_reduction(&s, &b, &f);
        prop_assert_eq!(red.violations, 0);
        prop_assert!(red.max_excess <= red.tol);
    }

    #[test]
    fn lower_bound_chain_holds(seed in any::<u64>(), p in 1.3f64..3.5) {
        let s = line(12);
        let b = FunctionSpec::Normal { sigma: 1.0, seed: Some(seed) }.evaluate(&s, 0).unwrap();
        let (l1, l2) = (lognormal(&s, 0.4, seed ^ 1), lognormal(&s, 0.4, seed ^ 2));
        let lb = verify_lower_bound(&s, &b, &l1, &l2, p, &small_probes(), seed).unwrap();
        prop_assert!(lb.pass(), "{:?}", lb.steps);
        prop_assert!(lb.aux_max <= lb.aux_bound * (1.0 + 1e-12));
    }

    #[test]
    fn duality_identities_hold(seed in any::<u64>(), p in 1.3f64..3.5) {
        let s = line(16);
        let sys = build_dyadic_system(&s, 0.5, seed).unwrap();
        let cubes: Vec<usize> = (0..sys.len()).filter(|q| (seed >> (q % 64)) & 1 == 1).collect();
        let fam = SparseFamily::new(0, &sys, cubes);
        let b = FunctionSpec::Normal { sigma: 1.0, seed: Some(seed) }.evaluate(&s, 0).unwrap();
        let (l1, l2) = (lognormal(&s, 0.4, seed ^ 1), lognormal(&s, 0.4, seed ^ 2));
        let f = lognormal(&s, 1.0, seed ^ 3);
        let chain = verify_duality_chain(&s, &sys, &fam, &b, &l1, &l2, p, &f, &small_probes(), 2, seed).unwrap();
        prop_assert!(chain.self_adjoint_diff <= 1e-12);
        prop_assert!(chain.pairing_diff <= 1e-12);
        prop_assert!(chain.end_to_end <= chain.predicted * (1.0 + 1e-9));
    }

    #[test]
    fn ap_duality_identity(seed in any::<u64>(), p in 1.2f64..4.0) {
        let s = line(16);
        let d = ap_duality(&s, &lognormal(&s, 1.0, seed), p).unwrap();
        prop_assert!(d.rel_diff <= 1e-9);
    }
}
