//! Training runs and the comparison sweeps built from them.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use timt_core::grpo::{build_vocabulary, GrpoError, TrainingSummary};
use timt_core::{CorpusError, CurriculumStrategy, RewardMode, TaskLayout, TimtRecord, Trainer};

use crate::manifest::ExperimentManifest;
use crate::score::ResponseLine;
use crate::Dataset;

pub const CURVES_FILE: &str = "curves.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SWEEP_FILE: &str = "sweep.json";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("dataset: {0}")]
    Dataset(#[from] CorpusError),
    #[error("configuration: {0}")]
    Config(#[source] GrpoError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("training failed at step {step} ({step} curve lines written): {source}")]
    Training {
        step: usize,
        #[source]
        source: GrpoError,
    },
}

impl RunError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Training { .. } => 3,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub records: usize,
    #[serde(flatten)]
    pub training: TrainingSummary,
}

pub fn run_experiment(manifest: &ExperimentManifest) -> Result<ExperimentSummary, RunError> {
    run_experiment_with(manifest, |_| {})
}

/// Trains per the manifest, streaming one JSON line per step to
/// `curves.jsonl` and writing `summary.json` at the end. `prepare` sees the
/// trainer before the first step. On a mid-run failure the curves written
/// so far are flushed before returning.
pub fn run_experiment_with(
    manifest: &ExperimentManifest,
    prepare: impl FnOnce(&mut Trainer),
) -> Result<ExperimentSummary, RunError> {
    let records = Dataset::load(&manifest.dataset_path)?.records().to_vec();
    let n_records = records.len();
    let mut trainer = Trainer::new(records, manifest.config.clone()).map_err(RunError::Config)?;
    prepare(&mut trainer);

    let out = &manifest.output_dir;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let curves_path = out.join(CURVES_FILE);
    let mut curves = BufWriter::new(File::create(&curves_path).map_err(io_err(&curves_path))?);

    while trainer.steps_done() < manifest.config.max_steps {
        let step = trainer.steps_done();
        match trainer.step() {
            Ok(report) => {
                serde_json::to_writer(&mut curves, &report).expect("step report serializes");
                curves.write_all(b"\n").map_err(io_err(&curves_path))?;
                tracing::debug!(
                    step,
                    mean_format = report.mean_format,
                    mean_final = report.mean_final,
                    "step"
                );
            }
            Err(source) => {
                curves.flush().map_err(io_err(&curves_path))?;
                return Err(RunError::Training { step, source });
            }
        }
    }
    curves.flush().map_err(io_err(&curves_path))?;

    let summary = ExperimentSummary {
        name: manifest.name.clone(),
        records: n_records,
        training: trainer.summary(),
    };
    let summary_path = out.join(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    fs::write(&summary_path, text).map_err(io_err(&summary_path))?;
    Ok(summary)
}

/// What a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Layout,
    Curriculum,
    RewardMode,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "layout" | "layouts" => Ok(SweepAxis::Layout),
            "curriculum" | "curricula" => Ok(SweepAxis::Curriculum),
            "reward_mode" | "mode" | "modes" => Ok(SweepAxis::RewardMode),
            _ => Err(format!(
                "unknown sweep axis `{s}` (layout, curriculum, reward_mode)"
            )),
        }
    }
}

/// One run of a sweep, reduced to the numbers compared across variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub variant: String,
    pub output_dir: PathBuf,
    pub steps_to_format_convergence: Option<usize>,
    pub final_mean_format: Option<f64>,
    pub final_mean_translation: Option<f64>,
    pub final_mean_final: Option<f64>,
}

/// Manifests for every variant along `axis`, each writing to its own
/// subdirectory of the base output directory.
pub fn sweep_manifests(
    base: &ExperimentManifest,
    axis: SweepAxis,
) -> Vec<(String, ExperimentManifest)> {
    let variant = |label: String, edit: &dyn Fn(&mut ExperimentManifest)| {
        let mut m = base.clone();
        m.name = format!("{}-{label}", base.name);
        m.output_dir = base.output_dir.join(&label);
        edit(&mut m);
        (label, m)
    };
    match axis {
        SweepAxis::Layout => TaskLayout::ALL
            .iter()
            .map(|&l| variant(l.name().to_string(), &|m| m.config.layout = l))
            .collect(),
        SweepAxis::Curriculum => CurriculumStrategy::ALL
            .iter()
            .map(|&c| variant(c.name().to_string(), &|m| m.config.curriculum = c))
            .collect(),
        SweepAxis::RewardMode => RewardMode::standard_modes()
            .into_iter()
            .map(|mode| variant(mode.name(), &|m| m.config.reward_mode = mode.clone()))
            .collect(),
    }
}

/// Runs every variant and writes `sweep.json` into the base output
/// directory.
pub fn run_sweep(base: &ExperimentManifest, axis: SweepAxis) -> Result<Vec<SweepEntry>, RunError> {
    let mut entries = Vec::new();
    for (label, manifest) in sweep_manifests(base, axis) {
        let summary = run_experiment(&manifest)?;
        let last = summary.training.final_report.as_ref();
        entries.push(SweepEntry {
            variant: label,
            output_dir: manifest.output_dir.clone(),
            steps_to_format_convergence: summary.training.steps_to_format_convergence,
            final_mean_format: last.map(|r| r.mean_format),
            final_mean_translation: last.map(|r| r.mean_translation),
            final_mean_final: last.map(|r| r.mean_final),
        });
    }
    let path = base.output_dir.join(SWEEP_FILE);
    fs::create_dir_all(&base.output_dir).map_err(io_err(&base.output_dir))?;
    let mut text = serde_json::to_string_pretty(&entries).expect("sweep serializes");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(entries)
}

/// `n` responses drawn uniformly from the untrained policy's vocabularies,
/// cycling through the records in order.
pub fn toy_rollouts(
    records: &[TimtRecord],
    layout: TaskLayout,
    n: usize,
    seed: u64,
) -> Vec<ResponseLine> {
    if records.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocabularies: Vec<Vec<String>> = records
        .iter()
        .map(|r| build_vocabulary(r, layout))
        .collect();
    (0..n)
        .map(|i| {
            let k = i % records.len();
            let v = &vocabularies[k];
            ResponseLine {
                record_id: records[k].id.clone(),
                response: v[rng.gen_range(0..v.len())].clone(),
            }
        })
        .collect()
}
