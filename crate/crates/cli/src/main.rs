use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use deft_core::export::{self, Artifact, Format};
use deft_core::landscape::{gradient_landscape, h_grid, p_grid};
use deft_core::math::{tsallis_entropy, Dist, FocusIndex};
use deft_core::objectives::ObjectiveKind;
use deft_core::trainer::{build_task, finetune, ConflictPolicy, FeatureMap, Regime, RegimeSpec, RunRecord, TrainConfig};
use deft_core::verification::{minimize_risk, run_property_suite, PropertyReport, ScoringRuleKind};
use deft_core::Error;

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "deft", version, about = "Deformed-log token objectives: certification, landscapes and toy fine-tuning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the property suite; prints a JSON report and exits 0 iff every check passed.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Also write the report here (format from --format or the extension).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Gradient magnitude over a (target probability, entropy) grid.
    Landscape {
        /// nll, linear, alpha:<a>, cayley, deft or eaft.
        #[arg(long)]
        objective: ObjectiveKind,
        #[arg(long)]
        p_steps: usize,
        #[arg(long)]
        h_steps: usize,
        #[arg(long)]
        vocab: usize,
        #[arg(long)]
        out: PathBuf,
        /// csv or json; defaults to the output extension.
        #[arg(long)]
        format: Option<Format>,
    },
    /// Build a synthetic task and fine-tune on it.
    ///
    /// The config is a JSON object with fields regime, vocab_size,
    /// num_contexts, conflict_fraction, conflict_policy, features, objective,
    /// learning_rate, steps, batch_size and seed. Flags given on the command
    /// line override the corresponding config fields.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        format: Option<Format>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        objective: Option<ObjectiveKind>,
        #[arg(long)]
        learning_rate: Option<f64>,
    },
    /// Minimize the expected score of a rule against a fixed distribution.
    Duality {
        /// Comma-separated probabilities, e.g. "0.8,0.2".
        #[arg(long)]
        r: String,
        #[arg(long)]
        alpha: f64,
        /// proper or main.
        #[arg(long, default_value = "proper")]
        rule: ScoringRuleKind,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn runtime(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }

    /// Validation-stage errors are the caller's fault.
    fn usage(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn default_vocab() -> usize {
    32
}

fn default_contexts() -> usize {
    256
}

fn default_policy() -> ConflictPolicy {
    ConflictPolicy::ConfidentOnly
}

fn default_lr() -> f64 {
    0.5
}

fn default_steps() -> usize {
    200
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    regime: Regime,
    #[serde(default = "default_vocab")]
    vocab_size: usize,
    #[serde(default = "default_contexts")]
    num_contexts: usize,
    #[serde(default)]
    conflict_fraction: f64,
    #[serde(default = "default_policy")]
    conflict_policy: ConflictPolicy,
    #[serde(default)]
    features: FeatureMap,
    objective: ObjectiveKind,
    #[serde(default = "default_lr")]
    learning_rate: f64,
    #[serde(default = "default_steps")]
    steps: usize,
    /// Full batch when absent.
    batch_size: Option<usize>,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    task: &'a RegimeSpec,
    #[serde(flatten)]
    record: &'a RunRecord,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    seed: u64,
    all_passed: bool,
    reports: &'a [PropertyReport],
}

#[derive(Serialize)]
struct DualityOutput<'a> {
    rule: ScoringRuleKind,
    alpha: f64,
    r: &'a [f64],
    minimizer: &'a [f64],
    min_risk: f64,
    tsallis_entropy: f64,
    linf_to_r: f64,
}

fn format_for(explicit: Option<Format>, path: &Path) -> Format {
    explicit.unwrap_or_else(|| Format::from_path(path))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))
}

fn verify(seed: u64, out: Option<PathBuf>, format: Option<Format>) -> Result<bool, Failure> {
    let reports = run_property_suite(seed);
    let all_passed = reports.iter().all(|r| r.passed);
    let body = export::json(&VerifyOutput {
        seed,
        all_passed,
        reports: &reports,
    })
    .map_err(Failure::runtime)?;
    if let Some(path) = out {
        let text = match format_for(format, &path) {
            Format::Json => body.clone(),
            Format::Csv => export::render(Artifact::Reports(&reports), Format::Csv).map_err(Failure::runtime)?,
        };
        write_file(&path, &text)?;
    }
    io::stdout()
        .write_all(body.as_bytes())
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(all_passed)
}

fn landscape(
    kind: ObjectiveKind,
    p_steps: usize,
    h_steps: usize,
    vocab: usize,
    out: &Path,
    format: Option<Format>,
) -> Result<(), Failure> {
    if p_steps == 0 || h_steps == 0 {
        return Err(Failure::Usage("--p-steps and --h-steps must be positive".into()));
    }
    if vocab < 3 {
        return Err(Failure::Usage(format!("--vocab must be at least 3, got {vocab}")));
    }
    let grid = gradient_landscape(&kind, &p_grid(p_steps), &h_grid(h_steps, vocab), vocab).map_err(Failure::runtime)?;
    export::emit(Artifact::Landscape(&grid), out, format_for(format, out)).map_err(Failure::runtime)
}

struct TrainOverrides {
    seed: Option<u64>,
    steps: Option<usize>,
    objective: Option<ObjectiveKind>,
    learning_rate: Option<f64>,
}

fn load_train(path: &Path, o: TrainOverrides) -> Result<(RegimeSpec, TrainConfig), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading config {}: {e}", path.display())))?;
    let file: TrainFile =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
    let spec = RegimeSpec {
        variant: file.regime,
        vocab_size: file.vocab_size,
        num_contexts: file.num_contexts,
        conflict_fraction: file.conflict_fraction,
        conflict_policy: file.conflict_policy,
        features: file.features,
    };
    let cfg = TrainConfig {
        objective: o.objective.unwrap_or(file.objective),
        learning_rate: o.learning_rate.unwrap_or(file.learning_rate),
        steps: o.steps.unwrap_or(file.steps),
        batch_size: file.batch_size.unwrap_or(file.num_contexts),
        seed: o.seed.unwrap_or(file.seed),
    };
    spec.validate().map_err(Failure::usage)?;
    cfg.validate().map_err(Failure::usage)?;
    Ok((spec, cfg))
}

fn train(config: &Path, out: &Path, format: Option<Format>, overrides: TrainOverrides) -> Result<(), Failure> {
    let (spec, cfg) = load_train(config, overrides)?;
    let (mut model, labels) = build_task(&spec, cfg.seed).map_err(Failure::runtime)?;
    let record = finetune(&mut model, &labels, &cfg).map_err(Failure::runtime)?;
    let text = match format_for(format, out) {
        Format::Json => export::json(&TrainOutput {
            task: &spec,
            record: &record,
        }),
        Format::Csv => export::render(Artifact::Run(&record), Format::Csv),
    }
    .map_err(Failure::runtime)?;
    write_file(out, &text)
}

fn duality(r: &str, alpha: f64, rule: ScoringRuleKind, out: &Path) -> Result<(), Failure> {
    let probs = r
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("--r: {e}")))?;
    let r = Dist::new(probs).map_err(|e| Failure::Usage(format!("--r: {e}")))?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Failure::Usage(format!("--alpha must be positive, got {alpha}")));
    }
    let focus = FocusIndex::new(alpha).map_err(Failure::usage)?;
    let (minimizer, min_risk) = minimize_risk(&r, focus, rule).map_err(Failure::runtime)?;
    let entropy = tsallis_entropy(&r, 1.0 + alpha).map_err(Failure::runtime)?;
    let linf = minimizer
        .probs()
        .iter()
        .zip(r.probs())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let body = export::json(&DualityOutput {
        rule,
        alpha,
        r: r.probs(),
        minimizer: minimizer.probs(),
        min_risk,
        tsallis_entropy: entropy,
        linf_to_r: linf,
    })
    .map_err(Failure::runtime)?;
    write_file(out, &body)?;
    io::stdout()
        .write_all(body.as_bytes())
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Verify { seed, out, format } => verify(seed, out, format),
        Command::Landscape {
            objective,
            p_steps,
            h_steps,
            vocab,
            out,
            format,
        } => landscape(objective, p_steps, h_steps, vocab, &out, format).map(|_| true),
        Command::Train {
            config,
            out,
            format,
            seed,
            steps,
            objective,
            learning_rate,
        } => train(
            &config,
            &out,
            format,
            TrainOverrides {
                seed,
                steps,
                objective,
                learning_rate,
            },
        )
        .map(|_| true),
        Command::Duality { r, alpha, rule, out } => duality(&r, alpha, rule, &out).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_RUNTIME),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
