use proptest::prelude::*;

use shtlab::generators::FunctionSpec;
use shtlab::space::SpaceKind;
use shtlab::suite::{parse_configs, run_scenario, run_suite, ScenarioConfig, SuiteKind};
use shtlab::Error;

fn kinds() -> impl Strategy<Value = (SpaceKind, usize)> {
    prop_oneof![
        (2usize..20).prop_map(|n| (SpaceKind::Line, n)),
        (2usize..20).prop_map(|n| (SpaceKind::Sqline, n)),
        (2usize..5).prop_map(|s| (SpaceKind::Grid2d, s * s)),
        (1u32..5).prop_map(|d| (SpaceKind::Tree, 1usize << d)),
    ]
}

fn specs() -> impl Strategy<Value = FunctionSpec> {
    prop_oneof![
        (-5.0f64..5.0).prop_map(|value| FunctionSpec::Constant { value }),
        (-1.0f64..1.0, prop::option::of(0.01f64..1.0)).prop_map(|(exponent, eps)| FunctionSpec::Power { exponent, eps }),
        (0.1f64..2.0, prop::option::of(any::<u64>())).prop_map(|(sigma, seed)| FunctionSpec::Lognormal { sigma, seed }),
        (0.1f64..2.0, prop::option::of(any::<u64>())).prop_map(|(sigma, seed)| FunctionSpec::Normal { sigma, seed }),
        (-3.0f64..3.0, -3.0f64..3.0, 0.1f64..0.9).prop_map(|(left, right, split)| FunctionSpec::TwoBlock { left, right, split }),
    ]
}

fn configs() -> impl Strategy<Value = ScenarioConfig> {
    (
        "[a-z][a-z0-9_]{0,8}",
        any::<u64>(),
        1.1f64..6.0,
        kinds(),
        specs(),
        specs(),
        prop::sample::subsequence(SuiteKind::ALL.to_vec(), 1..=SuiteKind::ALL.len()),
    )
        .prop_map(|(id, seed, p, (kind, n), b, f, suites)| {
            let mut c = ScenarioConfig::new(&id, seed, p, kind, n, b);
            c.f = f;
            c.suites = suites;
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips(c in configs()) {
        let text = serde_json::to_string_pretty(&c).unwrap();
        prop_assert_eq!(parse_configs(&text).unwrap(), vec![c.clone()]);
        let array = serde_json::to_string(&[&c]).unwrap();
        prop_assert_eq!(parse_configs(&array).unwrap(), vec![c]);
    }
}

fn line_config(id: &str) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(id, 7, 2.0, SpaceKind::Line, 12, FunctionSpec::Normal { sigma: 1.0, seed: None });
    c.lambda1 = FunctionSpec::Lognormal { sigma: 0.4, seed: None };
    c.lambda2 = FunctionSpec::Lognormal { sigma: 0.4, seed: None };
    c.probes.random = 3;
    c
}

#[test]
fn scenarios_are_deterministic() {
    let c = line_config("det");
    let csv = |r: &shtlab::Report| {
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        out
    };
    let a = run_scenario(&c, None).unwrap();
    let b = run_scenario(&c, None).unwrap();
    assert_eq!(csv(&a), csv(&b));
    assert!(a.passed(), "{:?}", a.failures().collect::<Vec<_>>());
    let suite = run_suite(&[c.clone(), line_config("other")], None, 2).unwrap();
    let serial = run_suite(&[c, line_config("other")], None, 1).unwrap();
    assert_eq!(csv(&suite), csv(&serial));
}

#[test]
fn only_filter_restricts_rows() {
    let c = line_config("upper_only");
    let r = run_scenario(&c, Some(&[SuiteKind::Upper])).unwrap();
    assert!(!r.rows.is_empty());
    assert!(r.rows.iter().all(|row| row.check.starts_with("upper") || row.check.starts_with("weights")));
}

#[test]
fn duplicate_ids_are_rejected() {
    let c = line_config("same");
    let text = serde_json::to_string(&[&c, &c]).unwrap();
    assert!(matches!(parse_configs(&text), Err(Error::Config { .. })));
}

#[test]
fn nonpositive_weight_is_a_config_error() {
    let mut c = line_config("neg");
    c.lambda1 = FunctionSpec::Constant { value: -1.0 };
    assert!(run_scenario(&c, None).is_err());
}
