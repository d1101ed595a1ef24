use proptest::prelude::*;

use shtlab::dyadic::build_dyadic_system;
use shtlab::operators::{
    commutator_average, commutator_bm, maximal_commutator, maximal_function, operator_norm_estimate, sparse_commutator,
    sparse_commutator_adjoint, sparse_operator, BallProbes, ProbeSet,
};
use shtlab::space::{build_space, QuasiMetricSpace, SpaceKind, SpaceParams};

fn spaces() -> impl Strategy<Value = QuasiMetricSpace> {
    let kinds = prop_oneof![
        (2usize..24).prop_map(|n| (SpaceKind::Line, n)),
        (2usize..24).prop_map(|n| (SpaceKind::Sqline, n)),
        (2usize..5).prop_map(|s| (SpaceKind::Grid2d, s * s)),
        (1u32..5).prop_map(|d| (SpaceKind::Tree, 1usize << d)),
    ];
    (kinds, any::<u64>(), prop::option::of(0.1f64..1.0))
        .prop_map(|((kind, n), seed, sigma)| build_space(kind, n, &SpaceParams { mass_sigma: sigma }, seed).unwrap())
}

fn with_functions() -> impl Strategy<Value = (QuasiMetricSpace, Vec<f64>, Vec<f64>)> {
    spaces().prop_flat_map(|s| {
        let n = s.n();
        let vals = || prop::collection::vec(prop_oneof![Just(0.0), -4.0f64..4.0], n);
        (Just(s), vals(), vals())
    })
}

/// `sup_{B ∋ x} <g_x>_B` over every canonical ball, directly from member lists.
fn brute_sup(s: &QuasiMetricSpace, x: usize, g: impl Fn(usize) -> f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for ball in s.balls() {
        let b = s.ball(ball.id);
        if b.contains(x) {
            let v = b.members().iter().map(|&y| g(y as usize) * s.mass(y as usize)).sum::<f64>() / b.measure();
            best = best.max(v);
        }
    }
    best
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maximal_function_matches_brute_force((s, f, _) in with_functions()) {
        let m = maximal_function(&s, &f);
        for x in 0..s.n() {
            prop_assert!(close(m.values[x], brute_sup(&s, x, |y| f[y].abs())));
            prop_assert!(m.values[x] >= f[x].abs() * (1.0 - 1e-12));
            let w = s.ball(m.witness[x]);
            prop_assert!(w.contains(x));
            let avg = w.members().iter().map(|&y| f[y as usize].abs() * s.mass(y as usize)).sum::<f64>() / w.measure();
            prop_assert!(close(avg, m.values[x]));
        }
    }

    #[test]
    fn maximal_function_is_sublinear((s, f, g) in with_functions(), c in -3.0f64..3.0) {
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let scaled: Vec<f64> = f.iter().map(|a| c * a).collect();
        let (mf, mg) = (maximal_function(&s, &f).values, maximal_function(&s, &g).values);
        let msum = maximal_function(&s, &sum).values;
        let mscaled = maximal_function(&s, &scaled).values;
        for x in 0..s.n() {
            prop_assert!(msum[x] <= (mf[x] + mg[x]) * (1.0 + 1e-12) + 1e-300);
            prop_assert!(close(mscaled[x], c.abs() * mf[x]));
        }
    }

    #[test]
    fn maximal_commutator_matches_brute_force((s, b, f) in with_functions()) {
        let cb = maximal_commutator(&s, &b, &f);
        for x in 0..s.n() {
            let oracle = brute_sup(&s, x, |y| (b[x] - b[y]).abs() * f[y].abs());
            prop_assert!(close(cb.values[x], oracle));
            let w = s.ball(cb.witness[x]);
            prop_assert!(w.contains(x));
            prop_assert_eq!(commutator_average(&s, &b, &f, x, w), cb.values[x]);
        }
    }

    #[test]
    fn maximal_commutator_dominates_bm((s, b, f) in with_functions()) {
        let b: Vec<f64> = b.iter().map(|v| v.abs()).collect();
        let f: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        let cb = maximal_commutator(&s, &b, &f).values;
        let bm = commutator_bm(&s, &b, &f);
        for x in 0..s.n() {
            prop_assert!(bm[x].abs() <= cb[x] * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn sparse_operators_are_additive((s, b, f) in with_functions(), seed in any::<u64>(), mask in any::<u64>()) {
        let sys = build_dyadic_system(&s, 0.5, seed).unwrap();
        let (left, right): (Vec<usize>, Vec<usize>) = (0..sys.len()).partition(|&q| mask >> (q % 64) & 1 == 1);
        let f: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        let all: Vec<usize> = (0..sys.len()).collect();
        let ops: [Box<dyn Fn(&[usize]) -> Vec<f64>>; 3] = [
            Box::new(|c| sparse_operator(&s, &sys, c, &f)),
            Box::new(|c| sparse_commutator(&s, &sys, c, &b, &f)),
            Box::new(|c| sparse_commutator_adjoint(&s, &sys, c, &b, &f)),
        ];
        for op in &ops {
            let (l, r, a) = (op(&left), op(&right), op(&all));
            for x in 0..s.n() {
                prop_assert!(close(l[x] + r[x], a[x]));
                prop_assert!(l[x] <= a[x] * (1.0 + 1e-12) + 1e-300);
            }
        }
        // Oracle for A_S on the full family: sum of averages over cubes containing x.
        let a = sparse_operator(&s, &sys, &all, &f);
        for x in 0..s.n() {
            let mut expect = 0.0;
            for q in 0..sys.len() {
                let c = sys.cube(q);
                if c.members.contains(&x) {
                    expect += c.members.iter().map(|&y| f[y] * s.mass(y)).sum::<f64>() / sys.measure(q);
                }
            }
            prop_assert!(close(a[x], expect));
        }
    }

    #[test]
    fn sparse_commutator_adjoint_pairing((s, b, f) in with_functions(), seed in any::<u64>()) {
        let sys = build_dyadic_system(&s, 0.5, seed).unwrap();
        let all: Vec<usize> = (0..sys.len()).collect();
        let g: Vec<f64> = f.iter().rev().map(|v| v.abs()).collect();
        let f: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        let t = sparse_commutator(&s, &sys, &all, &b, &f);
        let ts = sparse_commutator_adjoint(&s, &sys, &all, &b, &g);
        let lhs: f64 = (0..s.n()).map(|x| t[x] * g[x] * s.mass(x)).sum();
        let rhs: f64 = (0..s.n()).map(|x| f[x] * ts[x] * s.mass(x)).sum();
        prop_assert!(close(lhs, rhs));
    }

    #[test]
    fn more_probes_never_lower_the_estimate(s in spaces(), seed in any::<u64>(), p in 1.2f64..4.0) {
        let w = vec![1.0; s.n()];
        let op = |f: &[f64]| maximal_function(&s, f).values;
        let small = ProbeSet { singletons: true, balls: BallProbes::None, weighted_balls: BallProbes::None, random: 2 };
        let big = ProbeSet { balls: BallProbes::All, random: 4, ..small.clone() };
        let a = operator_norm_estimate(&s, op, &w, &w, p, &small, seed).unwrap();
        let b = operator_norm_estimate(&s, op, &w, &w, p, &big, seed).unwrap();
        prop_assert!(b.value >= a.value);
        prop_assert!(b.probes > a.probes);
        prop_assert!(a.value >= 1.0 - 1e-12);
    }
}

#[test]
fn norm_estimate_rejects_p_one() {
    let s = build_space(SpaceKind::Line, 4, &SpaceParams::default(), 0).unwrap();
    let w = vec![1.0; 4];
    let op = |f: &[f64]| f.to_vec();
    assert!(operator_norm_estimate(&s, op, &w, &w, 1.0, &ProbeSet::default(), 0).is_err());
}
