//! `tagrpo` command line: scenario generation, training, ablations,
//! verification and ad-hoc Pass@k queries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analytics::{pass_at_k_estimator, pass_at_k_exact};
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::scenario::{check_assumptions, generate_scenario, Scenario};
use crate::trainer::{self, Regime, TrainConfig};
use crate::verify::{self, VerifyConfig};

#[derive(Debug, Parser)]
#[command(name = "tagrpo", version, about = "Desk-scale simulation lab for transform-augmented GRPO")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic scenario and write it as JSON.
    Generate(GenerateArgs),
    /// Train one regime and write records, summary CSV and final policy.
    Train(TrainArgs),
    /// Train all three regimes and write a comparison CSV.
    Ablate(RunArgs),
    /// Check every closed form against enumeration, Monte Carlo or finite differences.
    Verify(VerifyArgs),
    /// Exact Pass@k for a success rate, or the unbiased estimator from n samples with c correct.
    Passk(PasskArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub questions: usize,
    #[arg(long)]
    pub transforms: usize,
    #[arg(long)]
    pub spread: f64,
    #[arg(long)]
    pub vocab: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Overrides the config's regime.
    #[arg(long, value_parser = parse_regime)]
    pub regime: Option<Regime>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials per profile.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Random profiles for the property checks.
    #[arg(long, default_value_t = 1000)]
    pub profiles: usize,
    /// Skip the desk-scale training comparisons.
    #[arg(long)]
    pub skip_training: bool,
    /// Also write the report and a manifest to this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PasskArgs {
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u64>,
    #[arg(long, conflicts_with_all = ["n", "c"], required_unless_present = "n")]
    pub rho: Option<f64>,
    #[arg(long, requires = "c")]
    pub n: Option<usize>,
    #[arg(long, requires = "n")]
    pub c: Option<usize>,
}

fn parse_regime(s: &str) -> std::result::Result<Regime, String> {
    Regime::ALL
        .iter()
        .copied()
        .find(|r| r.name() == s)
        .ok_or_else(|| format!("unknown regime `{s}` (expected grpo, ta_grpo or ta_no_pooling)"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub scenario_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub resolved_seed: u64,
    pub version: &'static str,
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::param(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn prepare_output_dir(manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(&manifest.output_dir).map_err(|e| Error::io(&manifest.output_dir, e))?;
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    write_atomic(&manifest.output_dir.join("manifest.json"), &text)
}

/// Runs a parsed command. Returns the text for stdout and whether the
/// command succeeded; only `verify` can return `false`.
pub fn run(cli: Cli) -> Result<(String, bool)> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a).map(|s| (s, true)),
        Command::Train(a) => cmd_train(&a).map(|s| (s, true)),
        Command::Ablate(a) => cmd_ablate(&a).map(|s| (s, true)),
        Command::Verify(a) => cmd_verify(&a),
        Command::Passk(a) => cmd_passk(&a).map(|s| (s, true)),
    }
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<String> {
    let scenario = generate_scenario(a.questions, a.transforms, a.spread, a.vocab, a.seed)?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut json = scenario.to_json()?;
    json.push('\n');
    write_atomic(&a.out, &json)?;

    let mut out = String::new();
    let _ = writeln!(out, "wrote {} ({} questions, {} transforms)", a.out.display(), a.questions, a.transforms);
    let _ = writeln!(out, "success rates under the uniform policy:");
    for r in check_assumptions(&scenario, &Policy::uniform(&scenario))? {
        let rhos: Vec<String> = r.rhos.iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(out, "q{} rho=[{}] pooled={:.6}", r.qid, rhos.join(", "), r.pooled_success);
    }
    Ok(out)
}

/// Loads and validates a scenario and config, then creates the output
/// directory and writes the manifest. `regimes` are the regimes the config
/// will be run under.
fn load_run(a: &RunArgs, command: &str, regime: Option<Regime>, regimes: &[Regime]) -> Result<(Scenario, TrainConfig)> {
    let scenario = Scenario::load(&a.scenario)?;
    let mut config = TrainConfig::load(&a.config)?;
    if let Some(regime) = regime {
        config.regime = regime;
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if regimes.is_empty() {
        config.validate_for(&scenario)?;
    }
    for &r in regimes {
        config.with_regime(r).validate_for(&scenario)?;
    }
    prepare_output_dir(&RunManifest {
        command: command.to_string(),
        config_path: Some(a.config.clone()),
        scenario_path: Some(a.scenario.clone()),
        output_dir: a.out.clone(),
        resolved_seed: config.seed,
        version: env!("CARGO_PKG_VERSION"),
    })?;
    Ok((scenario, config))
}

pub fn cmd_train(a: &TrainArgs) -> Result<String> {
    let (scenario, config) = load_run(&a.run, "train", a.regime, &[])?;
    let run = trainer::run_training(&scenario, &config)?;
    let dir = &a.run.out;
    write_atomic(&dir.join("records.jsonl"), &trainer::records_jsonl(&run.records)?)?;
    write_atomic(
        &dir.join("summary.csv"),
        &trainer::summary_csv(config.regime, &run.records, &config.eval_k),
    )?;
    let mut policy = run.policy.to_json()?;
    policy.push('\n');
    write_atomic(&dir.join("policy.json"), &policy)?;

    let mut out = String::new();
    if let Some(last) = run.records.last() {
        let _ = writeln!(
            out,
            "{}: {} iterations, final zero_grad_frac={:.4} train_pass={:.4} pooled_success={:.4}",
            config.regime,
            run.records.len(),
            last.zero_gradient_fraction,
            last.train_pass_rate,
            last.pooled_success_mean
        );
    }
    let _ = writeln!(out, "wrote {}", dir.display());
    Ok(out)
}

pub fn cmd_ablate(a: &RunArgs) -> Result<String> {
    let (scenario, config) = load_run(a, "ablate", None, &Regime::ALL)?;
    let report = trainer::run_ablation_suite(&scenario, &config)?;
    write_atomic(&a.out.join("ablation.csv"), &trainer::ablation_csv(&report, &config.eval_k))?;
    for run in &report.runs {
        write_atomic(
            &a.out.join(format!("records_{}.jsonl", run.regime)),
            &trainer::records_jsonl(&run.records)?,
        )?;
    }

    let mut out = String::new();
    let _ = writeln!(out, "regime          zero_grad_tail  train_pass  pooled_success  entropy");
    for row in report.final_rows() {
        let _ = writeln!(
            out,
            "{:<15} {:<15.4} {:<11.4} {:<15.4} {}",
            row.regime.name(),
            row.zero_gradient_tail_mean,
            row.train_pass_rate,
            row.pooled_success_mean,
            row.entropy_mean.map(|e| format!("{e:.4}")).unwrap_or_else(|| "-".into())
        );
    }
    let _ = writeln!(out, "wrote {}", a.out.display());
    Ok(out)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(String, bool)> {
    let cfg = VerifyConfig {
        seed: a.seed,
        trials: a.trials,
        profiles: a.profiles,
        training: !a.skip_training,
    };
    cfg.validate()?;
    if let Some(dir) = &a.out {
        prepare_output_dir(&RunManifest {
            command: "verify".to_string(),
            config_path: None,
            scenario_path: None,
            output_dir: dir.clone(),
            resolved_seed: a.seed,
            version: env!("CARGO_PKG_VERSION"),
        })?;
    }
    let report = verify::run_all(&cfg)?;
    let text = report.render();
    if let Some(dir) = &a.out {
        write_atomic(&dir.join("verify.txt"), &text)?;
    }
    Ok((text, report.all_passed()))
}

pub fn cmd_passk(a: &PasskArgs) -> Result<String> {
    let mut out = String::new();
    match (a.rho, a.n, a.c) {
        (Some(rho), _, _) => {
            for &k in &a.k {
                let _ = writeln!(out, "pass@{k} = {:.6}", pass_at_k_exact(rho, k)?);
            }
        }
        (None, Some(n), Some(c)) => {
            for &k in &a.k {
                let k = usize::try_from(k).map_err(|_| Error::param(format!("k too large: {k}")))?;
                let _ = writeln!(out, "pass@{k} = {:.6}", pass_at_k_estimator(n, c, k)?);
            }
        }
        _ => return Err(Error::param("give either --rho or both --n and --c")),
    }
    Ok(out)
}

/// Builds the global rayon pool from `TAGRPO_THREADS` when it is set.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("TAGRPO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::param(format!("TAGRPO_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::param(format!("thread pool: {e}")))
}
