use deft_core::objectives::ObjectiveKind;
use deft_core::verification::{
    gradient_flow_difference, gradient_flow_ordering, minimize_risk, peak_location, run_property_suite,
    run_property_suite_with, FlowRegime, SuiteConfig, ScoringRuleKind,
};
use deft_core::{Dist64, FocusIndex64};

#[test]
fn suite_passes_for_several_seeds() {
    for seed in [0, 7, 2024] {
        let reports = run_property_suite(seed);
        let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| (&r.name, &r.detail)).collect();
        assert!(failed.is_empty(), "seed {seed}: {failed:?}");
    }
}

#[test]
fn suite_is_deterministic_and_sorted() {
    let a = run_property_suite(11);
    let b = run_property_suite(11);
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[0].name < w[1].name));
    assert!(a.iter().all(|r| r.name.starts_with("core_math.")
        || r.name.starts_with("objectives.")
        || r.name.starts_with("verification.")));
}

#[test]
fn zero_tolerance_exposes_finite_difference_error() {
    let cfg = SuiteConfig {
        tolerance_override: Some(0.0),
        ..SuiteConfig::new(7)
    };
    let reports = run_property_suite_with(&cfg);
    for name in ["objectives.fd_static", "objectives.fd_dynamic"] {
        let r = reports.iter().find(|r| r.name == name).unwrap();
        assert!(!r.passed, "{name} should fail at zero tolerance");
    }
}

#[test]
fn wrong_kappa_is_not_surprisal_affine() {
    for kappa in [0.0, 0.5, 2.0] {
        let cfg = SuiteConfig {
            cayley_kappa: kappa,
            ..SuiteConfig::new(7)
        };
        let r = run_property_suite_with(&cfg)
            .into_iter()
            .find(|r| r.name == "core_math.surprisal_linearization")
            .unwrap();
        assert!(!r.passed, "kappa {kappa} certified");
    }
}

#[test]
fn flow_sign_flips_between_regimes() {
    let pair = (ObjectiveKind::LinearProb, ObjectiveKind::Nll);
    for seed in 0..20 {
        assert!(gradient_flow_difference(FlowRegime::Strong, pair, seed).unwrap() >= 0.0);
        assert!(gradient_flow_difference(FlowRegime::Weak, pair, seed).unwrap() <= 0.0);
        assert!(gradient_flow_ordering(FlowRegime::Weak, pair, seed).unwrap().passed);
    }
    assert!(gradient_flow_ordering(FlowRegime::Strong, (ObjectiveKind::Deft, ObjectiveKind::Nll), 0).is_err());
}

#[test]
fn proper_minimizer_is_truth_and_main_text_is_escort() {
    let r = Dist64::new(vec![0.8, 0.2]).unwrap();
    let a = FocusIndex64::new(0.5).unwrap();
    let (m, _) = minimize_risk(&r, a, ScoringRuleKind::ProperTsallis).unwrap();
    assert!((m.probs()[0] - 0.8).abs() < 1e-4);
    let (m, _) = minimize_risk(&r, a, ScoringRuleKind::MainText).unwrap();
    assert!((m.probs()[0] - 16.0 / 17.0).abs() < 1e-4);
    assert!(minimize_risk(&Dist64::uniform(7).unwrap(), a, ScoringRuleKind::ProperTsallis).is_err());
}

#[test]
fn peak_of_convex_weight_is_left_of_half() {
    assert!(peak_location(|p: f64| -p.ln()) <= 0.5 + 1e-3);
    assert!((peak_location(|p: f64| (1.0 - p * p) / 2.0) - 2.0 / 3.0).abs() <= 1e-3);
}
