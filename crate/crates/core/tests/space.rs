use proptest::prelude::*;

use shtlab::space::{build_space, QuasiMetricSpace, SpaceKind, SpaceParams};

fn kinds() -> impl Strategy<Value = (SpaceKind, usize)> {
    prop_oneof![
        (4usize..24).prop_map(|n| (SpaceKind::Line, n)),
        (4usize..24).prop_map(|n| (SpaceKind::Sqline, n)),
        (2usize..6).prop_map(|s| (SpaceKind::Grid2d, s * s)),
        (2u32..5).prop_map(|d| (SpaceKind::Tree, 1usize << d)),
        Just((SpaceKind::Pair, 2)),
    ]
}

fn spaces() -> impl Strategy<Value = QuasiMetricSpace> {
    (kinds(), any::<u64>(), prop::option::of(0.1f64..1.0)).prop_map(|((kind, n), seed, sigma)| {
        build_space(kind, n, &SpaceParams { mass_sigma: sigma }, seed).unwrap()
    })
}

fn open_set(s: &QuasiMetricSpace, c: usize, r: f64) -> Vec<usize> {
    (0..s.n()).filter(|&y| s.dist(c, y) < r).collect()
}

fn members(s: &QuasiMetricSpace, id: usize) -> Vec<usize> {
    let mut m: Vec<usize> = s.ball(id).members().iter().map(|&y| y as usize).collect();
    m.sort_unstable();
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distance_is_symmetric_with_zero_diagonal(s in spaces()) {
        for x in 0..s.n() {
            prop_assert_eq!(s.dist(x, x), 0.0);
            for y in 0..s.n() {
                prop_assert_eq!(s.dist(x, y), s.dist(y, x));
                if x != y {
                    prop_assert!(s.dist(x, y) > 0.0);
                }
            }
        }
    }

    #[test]
    fn balls_grow_with_radius(s in spaces()) {
        for c in 0..s.n() {
            for l in 1..s.levels_at(c) {
                let inner = members(&s, s.ball_id(c, l - 1));
                let outer = members(&s, s.ball_id(c, l));
                prop_assert!(inner.iter().all(|y| outer.binary_search(y).is_ok()));
                prop_assert!(inner.len() < outer.len());
            }
        }
    }

    #[test]
    fn canonical_balls_are_exhaustive(s in spaces(), probes in prop::collection::vec((any::<prop::sample::Index>(), 0.0f64..1.5), 64)) {
        let diam = s.diameter();
        for (c, t) in probes {
            let c = c.index(s.n());
            let r = t * diam + 1e-9;
            let set = open_set(&s, c, r);
            let ball = s.open_ball(c, r).expect("the center is inside");
            prop_assert_eq!(members(&s, ball.id), set.clone());
            prop_assert!(s.balls().any(|b| members(&s, b.id) == set));
        }
    }

    #[test]
    fn canonical_radius_realizes_the_set(s in spaces()) {
        for b in s.balls() {
            prop_assert_eq!(open_set(&s, b.center, b.radius()), members(&s, b.id));
        }
    }

    #[test]
    fn measured_a0_is_valid(s in spaces()) {
        let a0 = s.a0();
        for x in 0..s.n() {
            for y in 0..s.n() {
                for z in 0..s.n() {
                    prop_assert!(s.dist(x, y) <= a0 * (s.dist(x, z) + s.dist(z, y)) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn measured_doubling_is_valid(s in spaces(), radii in prop::collection::vec((any::<prop::sample::Index>(), 0.0f64..1.2), 64)) {
        let mass = |set: &[usize]| set.iter().map(|&y| s.mass(y)).sum::<f64>();
        let diam = s.diameter();
        for (c, t) in radii {
            let c = c.index(s.n());
            let r = t * diam + 1e-9;
            let small = mass(&open_set(&s, c, r));
            let big = mass(&open_set(&s, c, 2.0 * r));
            prop_assert!(big <= s.c_mu() * small * (1.0 + 1e-12));
        }
    }
}

#[test]
fn sqline_a0_is_two_by_triples() {
    for n in [3, 5, 9] {
        let s = build_space(SpaceKind::Sqline, n, &SpaceParams::default(), 0).unwrap();
        let mut best = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let den = s.dist(x, z) + s.dist(z, y);
                    if den > 0.0 {
                        best = best.max(s.dist(x, y) / den);
                    }
                }
            }
        }
        assert!((best - 2.0).abs() < 1e-12);
        assert!((s.a0() - best).abs() < 1e-12);
    }
}

#[test]
fn save_and_load() {
    let s = build_space(SpaceKind::Grid2d, 9, &SpaceParams { mass_sigma: Some(0.5) }, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("space.json");
    s.save(&path).unwrap();
    let back = QuasiMetricSpace::load(&path).unwrap();
    assert_eq!(back.dist_matrix(), s.dist_matrix());
    assert_eq!(back.masses(), s.masses());
    assert_eq!(back.constants(), s.constants());
}
