use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{grpo_objective, Candidate, GrpoError, KlMode, RolloutGroup, ToyPolicy, TrainerConfig};
use crate::corpus::{build_curriculum, CurriculumPlan, TimtRecord};
use crate::format::{parse_response, TaskLayout};
use crate::reward::{final_reward, RewardBreakdown, RewardError, RewardMode};

/// Mean format reward at or above which training counts as format-converged.
pub const FORMAT_CONVERGENCE_THRESHOLD: f64 = 0.95;

/// Anything that turns a raw response into a reward breakdown.
pub trait Scorer: Sync {
    fn score(&self, response: &str, record: &TimtRecord) -> Result<RewardBreakdown, RewardError>;
}

/// Parses with a fixed layout and scores with [`final_reward`].
#[derive(Debug, Clone)]
pub struct LayoutScorer {
    pub layout: TaskLayout,
    pub mode: RewardMode,
}

impl Scorer for LayoutScorer {
    fn score(&self, response: &str, record: &TimtRecord) -> Result<RewardBreakdown, RewardError> {
        final_reward(&parse_response(response, self.layout), record, &self.mode)
    }
}

/// Memoizes a pure scorer by `(record id, response)`.
#[derive(Debug)]
pub struct CachedScorer<S> {
    inner: S,
    cache: Mutex<HashMap<(String, String), RewardBreakdown>>,
}

impl<S: Scorer> CachedScorer<S> {
    pub fn new(inner: S) -> Self {
        CachedScorer {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl<S: Scorer> Scorer for CachedScorer<S> {
    fn score(&self, response: &str, record: &TimtRecord) -> Result<RewardBreakdown, RewardError> {
        let key = (record.id.clone(), response.to_string());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let scored = self.inner.score(response, record)?;
        self.cache.lock().unwrap().insert(key, scored.clone());
        Ok(scored)
    }
}

/// Per-step training metrics, one JSONL line each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    /// Objective summed over the batch's groups.
    pub objective: f64,
    pub mean_final: f64,
    pub mean_format: f64,
    /// Absent recognition rewards (malformed responses, layouts without a
    /// recognition block) count as 0.
    pub mean_recognition: f64,
    /// Absent translation rewards (malformed responses) count as 0.
    pub mean_translation: f64,
    /// Mean response length in characters.
    pub mean_len: f64,
    /// Mean KL term over the batch's groups, under the active [`KlMode`].
    pub kl: f64,
}

/// Inverse-CDF draw from `softmax(log_probs / temperature)`.
pub fn sample_index(log_probs: &[f64], temperature: f64, rng: &mut impl Rng) -> usize {
    let scaled: Vec<f64> = log_probs.iter().map(|l| l / temperature).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scaled.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// One GRPO update over `batch`.
///
/// Syncs the behavior snapshot, samples `G` responses per record, scores
/// them, standardizes rewards per group, and takes one gradient-ascent step
/// on the objective summed over the batch. Groups with a degenerate rollout
/// are skipped.
pub fn train_step(
    step: usize,
    batch: &[TimtRecord],
    policy: &mut ToyPolicy,
    config: &TrainerConfig,
    scorer: &dyn Scorer,
    rng: &mut impl Rng,
) -> Result<StepReport, GrpoError> {
    config.validate()?;
    if batch.is_empty() {
        return Err(GrpoError::EmptyBatch);
    }
    policy.sync_behavior();

    let g = config.group_size;
    let mut groups = Vec::with_capacity(batch.len());
    let (mut sum_final, mut sum_format, mut sum_rec, mut sum_trans, mut sum_len) =
        (0.0, 0.0, 0.0, 0.0, 0.0);

    for record in batch {
        let q = policy
            .question_index(&record.id)
            .ok_or_else(|| GrpoError::UnknownQuestion(record.id.clone()))?;
        let behavior = policy.behavior_log_probs(q);
        let reference = policy.reference_log_probs(q);
        let mut candidates = Vec::with_capacity(g);
        let mut rewards = Vec::with_capacity(g);
        for _ in 0..g {
            let action = sample_index(&behavior, config.temperature, rng);
            let response = policy.question(q).responses[action].clone();
            let scored = scorer.score(&response, record)?;
            sum_final += scored.final_reward;
            sum_format += scored.format;
            sum_rec += scored.recognition.unwrap_or(0.0);
            sum_trans += scored.translation.unwrap_or(0.0);
            sum_len += response.chars().count() as f64;
            rewards.push(scored.final_reward);
            candidates.push(Candidate {
                response,
                action,
                old_logprobs: Some(vec![behavior[action]]),
                ref_logprobs: Some(vec![reference[action]]),
            });
        }
        groups.push(RolloutGroup::new(record.id.clone(), candidates, rewards)?);
    }

    let mut gradient = vec![0.0; policy.num_params()];
    let (mut objective, mut kl, mut used) = (0.0, 0.0, 0usize);
    for group in &groups {
        match grpo_objective(group, policy, config) {
            Ok(eval) => {
                objective += eval.value;
                kl += eval.kl;
                used += 1;
                for (acc, d) in gradient.iter_mut().zip(&eval.gradient) {
                    *acc += d;
                }
            }
            Err(GrpoError::DegenerateRollout { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(GrpoError::StepAborted);
    }
    policy.ascend(&gradient, config.learning_rate);

    let n = (batch.len() * g) as f64;
    Ok(StepReport {
        step,
        objective,
        mean_final: sum_final / n,
        mean_format: sum_format / n,
        mean_recognition: sum_rec / n,
        mean_translation: sum_trans / n,
        mean_len: sum_len / n,
        kl: kl / used as f64,
    })
}

/// End-of-run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub steps: usize,
    pub seed: u64,
    pub layout: TaskLayout,
    pub reward_mode: RewardMode,
    pub curriculum: crate::corpus::CurriculumStrategy,
    pub kl_mode: KlMode,
    pub tokenizer: String,
    /// First step whose mean format reward reached the convergence threshold.
    pub steps_to_format_convergence: Option<usize>,
    pub final_report: Option<StepReport>,
}

pub const TOKENIZER_DESCRIPTION: &str =
    "zh: one token per non-whitespace character; other languages: lowercased whitespace words with punctuation split out";

/// Drives the toy policy over a dataset in curriculum order.
pub struct Trainer {
    config: TrainerConfig,
    records: Vec<TimtRecord>,
    by_id: HashMap<String, usize>,
    plan: CurriculumPlan,
    policy: ToyPolicy,
    scorer: Box<dyn Scorer + Send>,
    rng: ChaCha8Rng,
    step: usize,
    cursor: usize,
    converged_at: Option<usize>,
    last: Option<StepReport>,
}

impl std::fmt::Debug for Trainer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trainer")
            .field("config", &self.config)
            .field("step", &self.step)
            .field("plan", &self.plan)
            .finish_non_exhaustive()
    }
}

impl Trainer {
    pub fn new(records: Vec<TimtRecord>, config: TrainerConfig) -> Result<Self, GrpoError> {
        config.validate()?;
        let plan = build_curriculum(&records, config.curriculum, config.seed)?;
        let policy = ToyPolicy::for_records(&records, config.layout);
        Ok(Self::with_policy(records, config, plan, policy))
    }

    /// Uses a caller-built policy; every record id must be a policy question.
    pub fn with_policy(
        records: Vec<TimtRecord>,
        config: TrainerConfig,
        plan: CurriculumPlan,
        policy: ToyPolicy,
    ) -> Self {
        let by_id = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        let scorer = Box::new(CachedScorer::new(LayoutScorer {
            layout: config.layout,
            mode: config.reward_mode.clone(),
        }));
        Trainer {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            records,
            by_id,
            plan,
            policy,
            scorer,
            step: 0,
            cursor: 0,
            converged_at: None,
            last: None,
        }
    }

    /// Replaces the default cached [`LayoutScorer`].
    pub fn set_scorer(&mut self, scorer: impl Scorer + Send + 'static) {
        self.scorer = Box::new(scorer);
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.config
    }

    pub fn policy(&self) -> &ToyPolicy {
        &self.policy
    }

    pub fn plan(&self) -> &CurriculumPlan {
        &self.plan
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    /// Next `batch_size` records in curriculum order, wrapping around.
    pub fn next_batch(&mut self) -> Vec<TimtRecord> {
        let n = self.plan.order.len();
        let batch = (0..self.config.batch_size)
            .map(|k| {
                let id = &self.plan.order[(self.cursor + k) % n];
                self.records[self.by_id[id]].clone()
            })
            .collect();
        self.cursor = (self.cursor + self.config.batch_size) % n;
        batch
    }

    pub fn step(&mut self) -> Result<StepReport, GrpoError> {
        let batch = self.next_batch();
        let report = train_step(
            self.step,
            &batch,
            &mut self.policy,
            &self.config,
            self.scorer.as_ref(),
            &mut self.rng,
        )?;
        if self.converged_at.is_none() && report.mean_format >= FORMAT_CONVERGENCE_THRESHOLD {
            self.converged_at = Some(self.step);
        }
        self.step += 1;
        self.last = Some(report.clone());
        Ok(report)
    }

    /// Runs until `max_steps`, handing each report to `on_step` as it is
    /// produced.
    pub fn run(
        &mut self,
        mut on_step: impl FnMut(&StepReport),
    ) -> Result<TrainingSummary, GrpoError> {
        while self.step < self.config.max_steps {
            let report = self.step()?;
            on_step(&report);
        }
        Ok(self.summary())
    }

    pub fn summary(&self) -> TrainingSummary {
        TrainingSummary {
            steps: self.step,
            seed: self.config.seed,
            layout: self.config.layout,
            reward_mode: self.config.reward_mode.clone(),
            curriculum: self.config.curriculum,
            kl_mode: self.config.kl_mode,
            tokenizer: TOKENIZER_DESCRIPTION.to_string(),
            steps_to_format_convergence: self.converged_at,
            final_report: self.last.clone(),
        }
    }
}
