use deft_core::objectives::ObjectiveKind;
use deft_core::trainer::{
    build_task, finetune, histogram_of, mean_target_p, moving_average, probability_histogram, quadrant_stats,
    uniform_edges, ConflictPolicy, FeatureMap, Quadrant, Regime, RegimeSpec, TokenDelta, TrainConfig,
};

fn strong(rho: f64) -> RegimeSpec {
    RegimeSpec::new(Regime::ModelStrong).with_conflicts(rho, ConflictPolicy::ConfidentOnly)
}

fn train(spec: &RegimeSpec, seed: u64, kind: ObjectiveKind, steps: usize) -> deft_core::trainer::RunRecord {
    let (mut model, labels) = build_task(spec, seed).unwrap();
    let mut cfg = TrainConfig::new(kind, spec.num_contexts, seed);
    cfg.steps = steps;
    finetune(&mut model, &labels, &cfg).unwrap()
}

#[test]
fn regimes_reach_their_targets() {
    let (m, l) = build_task(&strong(0.0), 7).unwrap();
    assert!(mean_target_p(&m, &l.targets).unwrap() >= 0.6);
    let (m, l) = build_task(&RegimeSpec::new(Regime::ModelWeak), 7).unwrap();
    assert!((mean_target_p(&m, &l.targets).unwrap() - 1.0 / 32.0).abs() <= 0.01);
    let (m, l) = build_task(&RegimeSpec::new(Regime::ModelIntermediate), 7).unwrap();
    let p = mean_target_p(&m, &l.targets).unwrap();
    assert!((0.25..=0.45).contains(&p), "{p}");
}

#[test]
fn confident_conflicts_are_counted_and_confident() {
    let spec = strong(0.1);
    let (clean, _) = build_task(&strong(0.0), 7).unwrap();
    let (model, labels) = build_task(&spec, 7).unwrap();
    assert_eq!(model, clean);
    let flagged: Vec<usize> = (0..labels.len()).filter(|&c| labels.conflicted[c]).collect();
    assert_eq!(flagged.len(), 25);
    for c in flagged {
        let (top, p) = model.dist(c).unwrap().argmax();
        assert!(p >= 0.5);
        assert_ne!(labels.targets[c], top);
    }
}

#[test]
fn confident_conflicts_impossible_on_weak_model() {
    let spec = RegimeSpec::new(Regime::ModelWeak).with_conflicts(0.1, ConflictPolicy::ConfidentOnly);
    assert!(matches!(build_task(&spec, 1), Err(deft_core::Error::Build(_))));
    let spec = RegimeSpec::new(Regime::ModelWeak).with_conflicts(0.1, ConflictPolicy::Uniform);
    assert_eq!(build_task(&spec, 1).unwrap().1.conflicted.iter().filter(|&&c| c).count(), 25);
}

#[test]
fn invalid_specs_are_config_errors() {
    let mut spec = RegimeSpec::new(Regime::ModelWeak);
    spec.vocab_size = 4;
    assert!(matches!(build_task(&spec, 0), Err(deft_core::Error::Config { field: "vocab_size", .. })));
    let mut spec = RegimeSpec::new(Regime::ModelWeak);
    spec.conflict_fraction = 1.0;
    assert!(build_task(&spec, 0).is_err());
    let (mut m, l) = build_task(&RegimeSpec::new(Regime::ModelWeak), 0).unwrap();
    let mut cfg = TrainConfig::new(ObjectiveKind::Nll, 256, 0);
    cfg.learning_rate = 0.0;
    assert!(finetune(&mut m, &l, &cfg).is_err());
}

#[test]
fn zero_steps_leave_the_model_alone() {
    let r = train(&strong(0.1), 3, ObjectiveKind::Deft, 0);
    assert!(r.mean_target_p.is_empty() && r.mean_alpha.is_empty());
    assert!(r.deltas.iter().all(|d| d.p_before == d.p_after && d.loss_before == d.loss_after));
    assert_eq!(r.quadrants.learning, 0.0);
    assert_eq!(r.quadrants.forgetting, 0.0);
}

#[test]
fn traces_have_one_entry_per_step_and_runs_repeat_exactly() {
    let spec = strong(0.1);
    let a = train(&spec, 5, ObjectiveKind::CayleyTrans, 30);
    let b = train(&spec, 5, ObjectiveKind::CayleyTrans, 30);
    assert_eq!(a.mean_target_p.len(), 30);
    assert_eq!(a.mean_alpha.len(), 30);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.gate_audit.violations, 0);
    assert_eq!(a.gate_audit.checked, 30 * 100);
}

#[test]
fn minibatches_are_seeded() {
    let spec = RegimeSpec::new(Regime::ModelWeak);
    let run = |seed| {
        let (mut m, l) = build_task(&spec, 1).unwrap();
        let mut cfg = TrainConfig::new(ObjectiveKind::Nll, 256, seed);
        cfg.batch_size = 32;
        cfg.steps = 10;
        finetune(&mut m, &l, &cfg).unwrap()
    };
    assert_eq!(run(4), run(4));
    assert_ne!(run(4).mean_target_p, run(5).mean_target_p);
}

#[test]
fn one_hot_table_never_forgets_its_own_labels() {
    let mut spec = strong(0.1);
    spec.features = FeatureMap::OneHot;
    let r = train(&spec, 2, ObjectiveKind::Nll, 20);
    assert_eq!(r.quadrants.forgetting, 0.0);
    assert!(r.quadrants.learning > 0.99);
}

#[test]
fn deft_alpha_starts_higher_on_strong_and_grows_on_weak() {
    let s = train(&strong(0.1), 1, ObjectiveKind::Deft, 1);
    let w = train(&RegimeSpec::new(Regime::ModelWeak), 1, ObjectiveKind::Deft, 200);
    assert!(s.mean_alpha[0] > w.mean_alpha[0]);
    let smooth = moving_average(&w.mean_alpha, 5);
    assert!(smooth.windows(2).all(|p| p[1] >= p[0]));
}

#[test]
fn quadrant_definitions() {
    let same = TokenDelta::new(0, 0, false, 0.3, 0.3, 1.0, 1.0);
    let s = quadrant_stats(&[same]).unwrap();
    assert_eq!((s.learning, s.forgetting), (0.0, 0.0));
    let forgot = TokenDelta::new(0, 0, false, 0.8, 0.4, -(0.8f64).ln(), -(0.4f64).ln());
    assert_eq!(forgot.quadrant, Quadrant::Q2);
    let s = quadrant_stats(&[forgot]).unwrap();
    assert_eq!(s.forgetting, 1.0);
    assert_eq!(s.forgetting_high_share, 1.0);
    assert!(quadrant_stats(&[]).is_err());
}

#[test]
fn histograms() {
    let edges = uniform_edges(10);
    let h = histogram_of(&[1.0, 1.0, 0.95], &edges).unwrap();
    assert_eq!(h.counts[9], 3);
    let (m, l) = build_task(&RegimeSpec::new(Regime::ModelWeak), 9).unwrap();
    let h = probability_histogram(&m, &l.targets, &edges).unwrap();
    assert_eq!(h.counts[0], 256);
    assert_eq!(h.total(), 256);
    assert!(histogram_of(&[0.5], &[0.0, 0.5, 0.4, 1.0]).is_err());
    assert!(histogram_of(&[0.5], &[0.1, 1.0]).is_err());
    assert!(histogram_of(&[0.5], &[0.0]).is_err());

    let r = train(&strong(0.0), 4, ObjectiveKind::LinearProb, 100);
    assert!(r.histograms[1].counts[9] >= r.histograms[0].counts[9]);
}
