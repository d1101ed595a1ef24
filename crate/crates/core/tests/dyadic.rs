use proptest::prelude::*;

use shtlab::dyadic::{build_adjacent_systems, build_dyadic_system, verify_system, DyadicSystem};
use shtlab::space::{build_space, QuasiMetricSpace, SpaceKind, SpaceParams};

fn spaces() -> impl Strategy<Value = QuasiMetricSpace> {
    let kinds = prop_oneof![
        (2usize..40).prop_map(|n| (SpaceKind::Line, n)),
        (2usize..40).prop_map(|n| (SpaceKind::Sqline, n)),
        (2usize..6).prop_map(|s| (SpaceKind::Grid2d, s * s)),
        (1u32..6).prop_map(|d| (SpaceKind::Tree, 1usize << d)),
    ];
    (kinds, any::<u64>(), prop::option::of(0.1f64..1.0))
        .prop_map(|((kind, n), seed, sigma)| build_space(kind, n, &SpaceParams { mass_sigma: sigma }, seed).unwrap())
}

fn serialized(sys: &DyadicSystem) -> String {
    serde_json::to_string(&sys.to_file()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn systems_certify(s in spaces(), delta in prop::sample::select(vec![0.25, 0.5, 0.7]), seed in any::<u64>()) {
        let sys = build_dyadic_system(&s, delta, seed).unwrap();
        let check = verify_system(&sys, &s);
        prop_assert!(check.violations.is_empty(), "{:?}", check.violations);
        prop_assert!(check.c1 > 0.0 && check.big_c1.is_finite());
        // Partition oracle: every point lies in exactly one cube per level.
        for li in 0..sys.n_levels() {
            let mut seen = vec![0u32; s.n()];
            for c in sys.level(li) {
                for &x in &c.members {
                    seen[x] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
        // Children tile their parent.
        for (id, c) in sys.cubes().iter().enumerate() {
            if c.children.is_empty() {
                continue;
            }
            let mut union: Vec<usize> = c.children.iter().flat_map(|&ch| sys.cube(ch).members.clone()).collect();
            union.sort_unstable();
            prop_assert_eq!(&union, &c.members);
            prop_assert!(c.children.iter().all(|&ch| sys.cube(ch).parent == Some(id)));
            prop_assert!(c.children.len() <= check.max_children);
        }
    }

    #[test]
    fn construction_is_deterministic(s in spaces(), seed in any::<u64>()) {
        let a = build_dyadic_system(&s, 0.5, seed).unwrap();
        let b = build_dyadic_system(&s, 0.5, seed).unwrap();
        prop_assert_eq!(serialized(&a), serialized(&b));
    }

    #[test]
    fn adjacent_centers_are_separated(s in spaces(), seed in any::<u64>()) {
        let adj = build_adjacent_systems(&s, 0.5, 3, seed).unwrap();
        prop_assert!(adj.center_separation >= 1.0 - 1e-12);
        prop_assert_eq!(adj.balls_captured + adj.capture_failures.len(), adj.balls_scanned);
        for sys in &adj.systems {
            prop_assert!(verify_system(sys, &s).violations.is_empty());
        }
    }
}

#[test]
fn line_sixteen_capture_is_complete() {
    let s = build_space(SpaceKind::Line, 16, &SpaceParams::default(), 0).unwrap();
    let adj = build_adjacent_systems(&s, 0.5, 3, 42).unwrap();
    assert!(adj.capture_failures.is_empty(), "{:?}", adj.capture_failures);
    assert_eq!(adj.balls_scanned, s.ball_count());
    assert!(adj.capture_constant.is_finite());
}

#[test]
fn line_sixteen_has_no_violations() {
    let s = build_space(SpaceKind::Line, 16, &SpaceParams::default(), 0).unwrap();
    let sys = build_dyadic_system(&s, 0.5, 0).unwrap();
    assert!(verify_system(&sys, &s).violations.is_empty());
}

#[test]
fn save_and_reload() {
    let s = build_space(SpaceKind::Tree, 16, &SpaceParams::default(), 0).unwrap();
    let sys = build_dyadic_system(&s, 0.5, 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("system.json");
    sys.save(&path).unwrap();
    let file = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let back = DyadicSystem::from_file(&s, file).unwrap();
    assert_eq!(serialized(&back), serialized(&sys));
}
