use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use timt_core::{CurriculumStrategy, RewardMode, TaskLayout};
use timt_harness::correlate::{correlate, mode_series, render_table};
use timt_harness::experiments::{run_experiment, run_sweep, toy_rollouts, SweepAxis};
use timt_harness::manifest::{ExperimentManifest, Overrides};
use timt_harness::score::{parse_responses, score_all, ScoreError, ScoreSummary, SummaryLine};
use timt_harness::{service, Dataset};

#[derive(Parser)]
#[command(
    name = "timt",
    version,
    about = "Multi-mixed reward scoring and toy GRPO training for text-image translation"
)]
struct Cli {
    /// RNG seed; overrides the manifest.
    #[arg(long, global = true, env = "TIMT_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score responses JSONL against a dataset.
    Score {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long, default_value = "full_tasks")]
        layout: TaskLayout,
        #[arg(long, default_value = "mixed")]
        mode: RewardMode,
    },
    /// Run one training experiment from a manifest.
    Train(TrainArgs),
    /// Run a manifest once per layout, curriculum or reward mode.
    Sweep {
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        over: SweepAxis,
    },
    /// Serve the reward endpoint.
    Serve {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, env = "TIMT_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
    },
    /// Spearman and Kendall matrices across reward modes.
    Correlate {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated mode names, e.g. `mixed,bleu,chrf_pp,meteor`.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "mixed,bleu,chrf_pp,meteor"
        )]
        modes: Vec<RewardMode>,
    },
    /// Sample responses from the untrained toy policy as responses JSONL.
    Rollouts {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value = "full_tasks")]
        layout: TaskLayout,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    layout: Option<TaskLayout>,
    #[arg(long)]
    mode: Option<RewardMode>,
    #[arg(long)]
    curriculum: Option<CurriculumStrategy>,
    /// `estimator` or `exact`.
    #[arg(long)]
    kl_mode: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn init_logging(default: &str) {
    let filter =
        tracing_subscriber::EnvFilter::try_from_env("TIMT_LOG").unwrap_or_else(|_| default.into());
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let serving = matches!(cli.command, Command::Serve { .. });
    init_logging(if serving { "info" } else { "warn" });
    let code = match cli.command {
        Command::Score {
            dataset,
            responses,
            layout,
            mode,
        } => cmd_score(&dataset, &responses, layout, &mode),
        Command::Train(args) => cmd_train(&args, cli.seed, None),
        Command::Sweep { train, over } => cmd_train(&train, cli.seed, Some(over)),
        Command::Serve { dataset, bind } => cmd_serve(&dataset, &bind),
        Command::Correlate { input, modes } => cmd_correlate(&input, &modes),
        Command::Rollouts { dataset, n, layout } => {
            cmd_rollouts(&dataset, n, layout, cli.seed.unwrap_or(0))
        }
    };
    ExitCode::from(code)
}

fn fail(code: u8, err: impl std::fmt::Display) -> u8 {
    eprintln!("error: {err:#}");
    code
}

fn cmd_score(dataset: &Path, responses: &Path, layout: TaskLayout, mode: &RewardMode) -> u8 {
    let dataset = match Dataset::load(dataset) {
        Ok(d) => d,
        Err(e) => return fail(1, e),
    };
    let lines = match std::fs::read_to_string(responses)
        .with_context(|| format!("cannot read {}", responses.display()))
        .and_then(|t| parse_responses(&t).with_context(|| responses.display().to_string()))
    {
        Ok(l) => l,
        Err(e) => return fail(1, e),
    };
    let scored = match score_all(&dataset, &lines, layout, mode) {
        Ok(s) => s,
        Err(e @ ScoreError::UnknownRecord { .. }) => return fail(2, e),
        Err(e) => return fail(1, e),
    };
    let summary = ScoreSummary::of(&scored.iter().map(|s| &s.breakdown).collect::<Vec<_>>());
    let write = || -> std::io::Result<()> {
        let mut out = BufWriter::new(std::io::stdout().lock());
        for s in &scored {
            serde_json::to_writer(&mut out, s)?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(
            &mut out,
            &SummaryLine {
                summary: summary.clone(),
            },
        )?;
        out.write_all(b"\n")?;
        out.flush()
    };
    if let Err(e) = write() {
        return fail(1, e);
    }
    eprintln!("{} layout={layout} mode={mode}", summary.describe());
    0
}

fn cmd_train(args: &TrainArgs, seed: Option<u64>, sweep: Option<SweepAxis>) -> u8 {
    let build = || -> anyhow::Result<ExperimentManifest> {
        let mut manifest = ExperimentManifest::load(&args.manifest)?;
        manifest.apply(&Overrides::process_env()?);
        let cli = Overrides {
            seed,
            max_steps: args.max_steps,
            layout: args.layout,
            reward_mode: args.mode.clone(),
            curriculum: args.curriculum,
            kl_mode: args
                .kl_mode
                .as_deref()
                .map(Overrides::parse_kl_mode)
                .transpose()?,
            output_dir: args.output_dir.clone(),
        };
        manifest.apply(&cli);
        manifest.config.validate()?;
        Ok(manifest)
    };
    let manifest = match build() {
        Ok(m) => m,
        Err(e) => return fail(1, e),
    };

    if let Some(axis) = sweep {
        return match run_sweep(&manifest, axis) {
            Ok(entries) => {
                println!(
                    "{}",
                    serde_json::to_string(&entries).expect("sweep serializes")
                );
                for e in &entries {
                    eprintln!(
                        "{:<16} converged_at={:<6} format={:<8} translation={:<8} final={}",
                        e.variant,
                        e.steps_to_format_convergence
                            .map_or("-".into(), |s| s.to_string()),
                        fmt_opt(e.final_mean_format),
                        fmt_opt(e.final_mean_translation),
                        fmt_opt(e.final_mean_final),
                    );
                }
                0
            }
            Err(e) => fail(e.exit_code() as u8, e),
        };
    }

    match run_experiment(&manifest) {
        Ok(summary) => {
            println!(
                "{}",
                serde_json::to_string(&summary).expect("summary serializes")
            );
            let last = summary.training.final_report.as_ref();
            eprintln!(
                "{}: {} steps, format convergence {}, final translation {}, output in {}",
                summary.name,
                summary.training.steps,
                summary
                    .training
                    .steps_to_format_convergence
                    .map_or("never".into(), |s| format!("step {s}")),
                fmt_opt(last.map(|r| r.mean_translation)),
                manifest.output_dir.display()
            );
            0
        }
        Err(e) => fail(e.exit_code() as u8, e),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.4}"))
}

fn cmd_serve(dataset: &Path, bind: &str) -> u8 {
    let dataset = match Dataset::load(dataset) {
        Ok(d) => d,
        Err(e) => return fail(1, e),
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => return fail(1, e),
    };
    match runtime.block_on(service::serve(dataset, bind)) {
        Ok(()) => 0,
        Err(e) => fail(1, format!("{bind}: {e}")),
    }
}

fn cmd_correlate(input: &Path, modes: &[RewardMode]) -> u8 {
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => return fail(1, format!("cannot read {}: {e}", input.display())),
    };
    let report = match mode_series(&text, modes).and_then(|s| correlate(&s, modes)) {
        Ok(r) => r,
        Err(e) => return fail(1, e),
    };
    println!(
        "{}",
        serde_json::to_string(&report).expect("report serializes")
    );
    eprint!("{}", render_table(&report));
    0
}

fn cmd_rollouts(dataset: &Path, n: usize, layout: TaskLayout, seed: u64) -> u8 {
    let dataset = match Dataset::load(dataset) {
        Ok(d) => d,
        Err(e) => return fail(1, e),
    };
    let mut out = BufWriter::new(std::io::stdout().lock());
    let write = |out: &mut BufWriter<_>| -> std::io::Result<()> {
        for line in toy_rollouts(dataset.records(), layout, n, seed) {
            serde_json::to_writer(&mut *out, &line)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    };
    match write(&mut out) {
        Ok(()) => 0,
        Err(e) => fail(1, e),
    }
}
