//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness so the lines are always shown; exits nonzero if any criterion
//! fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use deft_core::export::{render, Artifact, Format};
use deft_core::landscape::{gradient_landscape, h_grid, p_grid};
use deft_core::math::{cayley_alpha, concentration, mobius_alpha, tsallis_entropy, UncertaintyRadius};
use deft_core::objectives::{gate, logit_gradient, ObjectiveKind};
use deft_core::trainer::{
    build_task, finetune, moving_average, ConflictPolicy, Regime, RegimeSpec, RunRecord, TrainConfig,
};
use deft_core::verification::{
    fd_gradient, gradient_flow_difference, minimize_risk, peak_location, relative_error, run_property_suite_with,
    FlowRegime, ScoringRuleKind, SuiteConfig, PEAK_GRID_POINTS,
};
use deft_core::{Dist64, FocusIndex64, Logits64, Objective64};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(
        elapsed <= Duration::from_secs(limit_s),
        format!("runtime {elapsed:.2?} exceeds {limit_s} s"),
    )
}

fn random_dist(rng: &mut ChaCha8Rng, vocab: usize) -> Dist64 {
    let scale = rng.random_range(0.0..8.0);
    let z: Vec<f64> = (0..vocab).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    Dist64::softmax(&z).expect("finite logits")
}

fn random_simplex(rng: &mut ChaCha8Rng, vocab: usize) -> Dist64 {
    let w: Vec<f64> = (0..vocab).map(|_| -rng.random_range(f64::EPSILON..1.0).ln()).collect();
    let s: f64 = w.iter().sum();
    Dist64::new(w.into_iter().map(|x| x / s).collect()).expect("normalized")
}

fn six_kinds() -> Vec<Objective64> {
    ["nll", "linear", "alpha:0.5", "cayley", "deft", "eaft"]
        .iter()
        .map(|s| s.parse().expect("known objective"))
        .collect()
}

fn gradient_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for kind in six_kinds() {
        for _ in 0..1000 {
            let v = rng.random_range(2..=32);
            let z = Logits64::new((0..v).map(|_| rng.random_range(-4.0..4.0)).collect()).map_err(|e| e.to_string())?;
            let t = rng.random_range(0..v);
            let a = logit_gradient(&kind, &z, t).map_err(|e| e.to_string())?;
            let f = fd_gradient(&kind, &z, t, 1e-5).map_err(|e| e.to_string())?;
            let err = relative_error(&a, &f);
            ensure(err <= 1e-6, format!("{kind}: relative error {err:e}"))?;
            worst = worst.max(err);
        }
    }
    within(start.elapsed(), 5)?;
    Ok(format!("6000 cases, worst relative error {worst:.2e}, {:.2?}", start.elapsed()))
}

fn duality() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut risk_err, mut arg_err) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let v = rng.random_range(2..=3);
        let r = random_simplex(&mut rng, v);
        for alpha in [0.25, 0.5, 1.0] {
            let a = FocusIndex64::new(alpha).map_err(|e| e.to_string())?;
            let (m, risk) = minimize_risk(&r, a, ScoringRuleKind::ProperTsallis).map_err(|e| e.to_string())?;
            let s = tsallis_entropy(&r, 1.0 + alpha).map_err(|e| e.to_string())?;
            risk_err = risk_err.max((risk - s).abs());
            arg_err = arg_err.max(linf(m.probs(), r.probs()));
        }
    }
    ensure(risk_err <= 1e-3, format!("risk gap {risk_err:e}"))?;
    ensure(arg_err <= 0.01, format!("minimizer distance {arg_err:e}"))?;
    let r = Dist64::new(vec![0.8, 0.2]).map_err(|e| e.to_string())?;
    let (m, _) = minimize_risk(&r, FocusIndex64::new(0.5).map_err(|e| e.to_string())?, ScoringRuleKind::MainText)
        .map_err(|e| e.to_string())?;
    let gap = linf(m.probs(), r.probs());
    ensure(gap > 0.05, format!("main-text minimizer only {gap} from r"))?;
    within(start.elapsed(), 30)?;
    Ok(format!(
        "risk gap {risk_err:.1e}, minimizer gap {arg_err:.1e}, main-text gap {gap:.4}, {:.2?}",
        start.elapsed()
    ))
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn alpha_star(p: f64) -> Result<f64, String> {
    cayley_alpha::<f64>(p).map(|a| a.value()).map_err(|e| e.to_string())
}

fn cayley_identities() -> Outcome {
    ensure(alpha_star(0.0)? == 0.0 && alpha_star(1.0)? == 1.0, "endpoints not exact")?;
    let mut atanh_err = 0.0f64;
    for i in 0..=20_000 {
        let p = (1e-6f64.ln() + (0.999f64.ln() - 1e-6f64.ln()) * i as f64 / 20_000.0).exp();
        atanh_err = atanh_err.max((alpha_star(p)?.atanh() + 0.25 * (-p).ln_1p()).abs());
    }
    ensure(atanh_err <= 1e-9, format!("arctanh identity error {atanh_err:e}"))?;
    let mut inv_err = 0.0f64;
    for kappa in [0.0, 0.5, 1.0, 2.0] {
        for i in 0..=1000 {
            let z = UncertaintyRadius::<f64>::new(i as f64 / 1000.0).map_err(|e| e.to_string())?;
            let once = mobius_alpha(z, kappa).map_err(|e| e.to_string())?;
            let twice = mobius_alpha(UncertaintyRadius::<f64>::new(once).map_err(|e| e.to_string())?, kappa)
                .map_err(|e| e.to_string())?;
            inv_err = inv_err.max((twice - z.value()).abs());
        }
    }
    ensure(inv_err <= 1e-12, format!("involution error {inv_err:e}"))?;
    let mut certified = Vec::new();
    for kappa in [0.0, 0.5, 1.0, 2.0] {
        let cfg = SuiteConfig {
            cayley_kappa: kappa,
            ..SuiteConfig::new(7)
        };
        let report = run_property_suite_with(&cfg)
            .into_iter()
            .find(|r| r.name == "core_math.surprisal_linearization")
            .ok_or("surprisal linearization report missing")?;
        if report.passed {
            certified.push(kappa);
        }
    }
    ensure(certified == [1.0], format!("surprisal-affine kappas {certified:?}"))?;
    Ok(format!("arctanh error {atanh_err:.1e}, involution error {inv_err:.1e}, affine only at kappa = 1"))
}

fn cayley_signal(p: f64) -> Result<f64, String> {
    let d = Dist64::new(vec![p, 1.0 - p]).map_err(|e| e.to_string())?;
    gate(&ObjectiveKind::CayleyTrans, &d, 0).map(|g| g.gate).map_err(|e| e.to_string())
}

fn gate_limits() -> Outcome {
    let low = cayley_signal(1e-6)?;
    let high = cayley_signal(0.999)? / 0.999;
    ensure(low >= 0.999, format!("gate at 1e-6 is {low}"))?;
    ensure((high - 1.0).abs() <= 1e-3, format!("gate/p at 0.999 is {high}"))?;
    Ok(format!("gate(1e-6) = {low:.6}, gate(0.999)/0.999 = {high:.6}"))
}

fn deft_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let v = rng.random_range(2..=64);
        let d = random_dist(&mut rng, v);
        let t = rng.random_range(0..v);
        let p = d.probs()[t];
        let q = 1.0 - p;
        let alpha = concentration(&d).value();
        let lower = p * p + q * q / (v - 1) as f64;
        let upper = p * p + q * q;
        if q > 0.0 {
            let tail: f64 = d
                .probs()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != t)
                .map(|(_, &x)| (x / q).powi(2))
                .sum();
            worst = worst.max((alpha - (p * p + q * q * tail)).abs());
        }
        worst = worst.max(lower - alpha).max(alpha - upper);
    }
    ensure(worst <= 1e-12, format!("worst violation {worst:e}"))?;
    Ok(format!("1e4 distributions, worst violation {worst:.1e}"))
}

fn conflict_suppression() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for vocab in [3usize, 10, 64] {
        for i in 0..1000 {
            let p = 1e-6 + (0.1 - 2e-6) * i as f64 / 999.0;
            let rest = (0.1 - p) / (vocab - 2) as f64;
            let mut probs = vec![rest; vocab];
            probs[0] = p;
            probs[1] = 0.9;
            let d = Dist64::new(probs).map_err(|e| e.to_string())?;
            let w = gate(&ObjectiveKind::Deft, &d, 0).map_err(|e| e.to_string())?.signal;
            let bound = p.powf(0.81) * (1.0 - p);
            worst = worst.max(w - bound);
        }
    }
    ensure(worst <= 0.0, format!("DEFT signal exceeds bound by {worst:e}"))?;
    let mut probs = vec![(0.1 - 1e-6) / 8.0; 10];
    probs[0] = 1e-6;
    probs[1] = 0.9;
    let d = Dist64::new(probs).map_err(|e| e.to_string())?;
    let c = gate(&ObjectiveKind::CayleyTrans, &d, 0).map_err(|e| e.to_string())?.signal;
    ensure(c >= 0.999, format!("Cayley signal at 1e-6 is {c}"))?;
    Ok(format!("max signal - bound = {worst:.2e}, Cayley signal {c:.6}"))
}

fn peak_location_check() -> Outcome {
    let nll = peak_location(|p: f64| -p.ln());
    let lin = peak_location(|p: f64| 1.0 - p);
    let concave = peak_location(|p: f64| (1.0 - p * p) / 2.0);
    ensure(nll <= 0.5 + 1e-3 && lin <= 0.5 + 1e-3, format!("convex peaks at {nll}, {lin}"))?;
    ensure(concave >= 0.5 - 1e-3, format!("concave peak at {concave}"))?;
    ensure((concave - 2.0 / 3.0).abs() <= 1e-3, format!("concave peak {concave} != 2/3"))?;
    Ok(format!(
        "-ln p -> {nll:.4}, 1-p -> {lin:.4}, (1-p^2)/2 -> {concave:.4} on a {PEAK_GRID_POINTS}-point grid"
    ))
}

fn gradient_flow() -> Outcome {
    let pair = (ObjectiveKind::LinearProb, ObjectiveKind::Nll);
    let (mut min_strong, mut max_weak) = (f64::INFINITY, f64::NEG_INFINITY);
    for seed in 0..20 {
        let s = gradient_flow_difference(FlowRegime::Strong, pair, seed).map_err(|e| e.to_string())?;
        let w = gradient_flow_difference(FlowRegime::Weak, pair, seed).map_err(|e| e.to_string())?;
        ensure(s >= 0.0, format!("strong seed {seed}: Rdot(linear) - Rdot(nll) = {s:e}"))?;
        ensure(w <= 0.0, format!("weak seed {seed}: Rdot(linear) - Rdot(nll) = {w:e}"))?;
        min_strong = min_strong.min(s);
        max_weak = max_weak.max(w);
    }
    Ok(format!("20 seeds: strong min {min_strong:.3e} >= 0, weak max {max_weak:.3e} <= 0"))
}

fn run(spec: &RegimeSpec, seed: u64, kind: Objective64, steps: usize) -> Result<RunRecord, String> {
    let (mut model, labels) = build_task(spec, seed).map_err(|e| e.to_string())?;
    let mut cfg = TrainConfig::new(kind, spec.num_contexts, seed);
    cfg.steps = steps;
    finetune(&mut model, &labels, &cfg).map_err(|e| e.to_string())
}

fn mechanism_trends() -> Outcome {
    let start = Instant::now();
    let strong = RegimeSpec::new(Regime::ModelStrong).with_conflicts(0.1, ConflictPolicy::ConfidentOnly);
    let weak = RegimeSpec::new(Regime::ModelWeak);
    let (mut forget_wins, mut clean_wins, mut linear_lags, mut deft_keeps, mut alpha_order) = (0, 0, 0, 0, 0);
    let mut monotone = true;
    for seed in 0..5 {
        let nll = run(&strong, seed, ObjectiveKind::Nll, 100)?;
        let deft = run(&strong, seed, ObjectiveKind::Deft, 100)?;
        forget_wins += usize::from(deft.quadrants.forgetting_high < nll.quadrants.forgetting_high);
        clean_wins += usize::from(deft.clean_mean_target_p() >= nll.clean_mean_target_p());

        let w_nll = run(&weak, seed, ObjectiveKind::Nll, 200)?;
        let w_lin = run(&weak, seed, ObjectiveKind::LinearProb, 200)?;
        let w_deft = run(&weak, seed, ObjectiveKind::Deft, 200)?;
        let p_nll = w_nll.final_mean_target_p();
        linear_lags += usize::from(w_lin.final_mean_target_p() < p_nll);
        deft_keeps += usize::from(w_deft.final_mean_target_p() >= 0.9 * p_nll);
        alpha_order += usize::from(deft.mean_alpha[0] > w_deft.mean_alpha[0]);
        monotone &= moving_average(&w_deft.mean_alpha, 5).windows(2).all(|w| w[1] >= w[0]);
    }
    let summary = format!(
        "high-conf forgetting {forget_wins}/5, clean p {clean_wins}/5, linear lags {linear_lags}/5, \
         deft coverage {deft_keeps}/5, alpha order {alpha_order}/5, smoothed alpha monotone {monotone}"
    );
    ensure(
        forget_wins >= 4 && clean_wins >= 4 && linear_lags >= 4 && deft_keeps >= 4 && alpha_order == 5 && monotone,
        summary.clone(),
    )?;
    within(start.elapsed(), 60)?;
    Ok(format!("{summary}, {:.2?}", start.elapsed()))
}

fn landscape_sanity() -> Outcome {
    let vocab = 16;
    let nll = gradient_landscape(&ObjectiveKind::Nll, &p_grid(25), &h_grid(25, vocab), vocab).map_err(|e| e.to_string())?;
    let mut spread = 0.0f64;
    for row in &nll.cells {
        let vals: Vec<f64> = row.iter().flatten().copied().collect();
        if let (Some(lo), Some(hi)) = (vals.iter().copied().reduce(f64::min), vals.iter().copied().reduce(f64::max)) {
            spread = spread.max(hi - lo);
        }
    }
    ensure(spread <= 1e-9, format!("NLL row spread {spread:e}"))?;
    let deft = gradient_landscape(&ObjectiveKind::Deft, &[0.1], &h_grid(50, vocab), vocab).map_err(|e| e.to_string())?;
    let row: Vec<f64> = deft.cells[0].iter().flatten().copied().collect();
    ensure(row.len() >= 2, "too few feasible DEFT cells at p = 0.1")?;
    ensure(row.windows(2).all(|w| w[1] >= w[0]), "DEFT magnitude decreases with entropy at p = 0.1")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_deft");
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let status = Command::new(bin)
            .args(["landscape", "--objective", "deft", "--p-steps", "20", "--h-steps", "20", "--vocab", "16", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), format!("landscape exited with {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], "CSV bytes differ between runs")?;
    let direct = render(
        Artifact::Landscape(
            &gradient_landscape(&ObjectiveKind::Deft, &p_grid(20), &h_grid(20, 16), 16).map_err(|e| e.to_string())?,
        ),
        Format::Csv,
    )
    .map_err(|e| e.to_string())?;
    ensure(direct.as_bytes() == outputs[0], "CLI CSV differs from library rendering")?;
    Ok(format!(
        "NLL spread {spread:.1e}, DEFT row of {} cells nondecreasing, CSV identical ({} bytes)",
        row.len(),
        outputs[0].len()
    ))
}

fn cli_gate() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_deft"))
        .args(["verify", "--seed", "7"])
        .output()
        .map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("stdout is not JSON: {e}"))?;
    let reports = report["reports"].as_array().ok_or("missing reports array")?;
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| r["passed"] != serde_json::Value::Bool(true))
        .filter_map(|r| r["name"].as_str())
        .collect();
    ensure(out.status.success(), format!("exit status {}, failing: {failed:?}", out.status))?;
    ensure(failed.is_empty() && !reports.is_empty(), format!("failing reports {failed:?}"))?;
    Ok(format!("exit 0, {} reports passed", reports.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("gradient exactness", gradient_exactness),
        ("Bayes risk duality", duality),
        ("Cayley identities", cayley_identities),
        ("gate limits", gate_limits),
        ("DEFT bounds", deft_bounds),
        ("conflict suppression", conflict_suppression),
        ("peak location", peak_location_check),
        ("gradient-flow ordering", gradient_flow),
        ("mechanism trends", mechanism_trends),
        ("landscape sanity", landscape_sanity),
        ("CLI gate", cli_gate),
    ];
    let mut failures = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {title}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] criterion {}: {title}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
