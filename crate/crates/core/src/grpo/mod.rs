//! Group Relative Policy Optimization.
//!
//! For each question a group of `G` responses is sampled from the behavior
//! policy, scored, and standardized into advantages. The policy then
//! maximizes
//!
//! ```text
//! J = 1/G * sum_i min(rho_i * A_i, clip(rho_i, 1 - eps, 1 + eps) * A_i) - beta * KL(pi || pi_ref)
//! rho_i = pi(o_i | q) / pi_old(o_i | q)
//! ```
//!
//! The KL term is either the per-sample estimator
//! `pi_ref/pi - ln(pi_ref/pi) - 1` averaged over the group, or the exact
//! categorical divergence. Gradients are analytic with respect to the toy
//! policy's logits.

mod policy;
mod trainer;

use serde::{Deserialize, Serialize};

pub use policy::{build_vocabulary, QuestionVocab, ToyPolicy};
pub use trainer::{
    sample_index, train_step, CachedScorer, LayoutScorer, Scorer, StepReport, Trainer,
    TrainingSummary, FORMAT_CONVERGENCE_THRESHOLD, TOKENIZER_DESCRIPTION,
};

use crate::corpus::CurriculumStrategy;
use crate::format::TaskLayout;
use crate::reward::{RewardError, RewardMode};

#[derive(Debug, thiserror::Error)]
pub enum GrpoError {
    #[error("group size must be at least 2, got {0}")]
    GroupTooSmall(usize),
    #[error("group is inconsistent: {0}")]
    InconsistentGroup(String),
    #[error("candidate {index} is missing {which} log-probabilities")]
    IncompleteGroup { index: usize, which: &'static str },
    #[error("candidate {index} has a non-finite probability ratio")]
    DegenerateRollout { index: usize },
    #[error("unknown question `{0}`")]
    UnknownQuestion(String),
    #[error("invalid trainer configuration: {0}")]
    InvalidConfig(String),
    #[error("every group in the batch was degenerate; step aborted")]
    StepAborted,
    #[error("empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

/// How `D_KL(pi || pi_ref)` enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlMode {
    /// Per-sample `x - ln x - 1` with `x = pi_ref / pi`, averaged over the group.
    #[default]
    Estimator,
    /// Exact divergence of the question's categorical distributions.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    /// Clip range.
    pub epsilon: f64,
    /// KL weight.
    pub beta: f64,
    pub group_size: usize,
    /// Questions per step.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub curriculum: CurriculumStrategy,
    pub reward_mode: RewardMode,
    pub layout: TaskLayout,
    pub max_steps: usize,
    /// Applied to sampling only; 1.0 samples from the behavior policy itself.
    pub temperature: f64,
    pub kl_mode: KlMode,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            epsilon: 0.2,
            beta: 0.01,
            group_size: 16,
            batch_size: 64,
            learning_rate: 1.0,
            seed: 0,
            curriculum: CurriculumStrategy::Shuffle,
            reward_mode: RewardMode::mixed(),
            layout: TaskLayout::FullTasks,
            max_steps: 500,
            temperature: 1.0,
            kl_mode: KlMode::Estimator,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<(), GrpoError> {
        if self.group_size < 2 {
            return Err(GrpoError::GroupTooSmall(self.group_size));
        }
        let bad = |what: &str| Err(GrpoError::InvalidConfig(what.to_string()));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta must be non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        Ok(())
    }
}

/// Population-standardized rewards. A group with zero variance gets all-zero
/// advantages.
pub fn compute_advantages(rewards: &[f64]) -> Result<Vec<f64>, GrpoError> {
    if rewards.len() < 2 {
        return Err(GrpoError::GroupTooSmall(rewards.len()));
    }
    // compared directly: the computed mean of equal values can be off by an ulp
    if rewards.iter().all(|r| *r == rewards[0]) {
        return Ok(vec![0.0; rewards.len()]);
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    Ok(rewards.iter().map(|r| (r - mean) / std).collect())
}

/// One sampled response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub response: String,
    /// Index into the question's response vocabulary.
    pub action: usize,
    /// Per-token log-probabilities under the behavior policy.
    pub old_logprobs: Option<Vec<f64>>,
    /// Per-token log-probabilities under the reference policy.
    pub ref_logprobs: Option<Vec<f64>>,
}

impl Candidate {
    fn sequence_logprob(
        tokens: &Option<Vec<f64>>,
        index: usize,
        which: &'static str,
    ) -> Result<f64, GrpoError> {
        match tokens {
            Some(t) if !t.is_empty() => Ok(t.iter().sum()),
            _ => Err(GrpoError::IncompleteGroup { index, which }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutGroup {
    pub question_id: String,
    pub candidates: Vec<Candidate>,
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
}

impl RolloutGroup {
    /// Builds a group and standardizes its rewards.
    pub fn new(
        question_id: impl Into<String>,
        candidates: Vec<Candidate>,
        rewards: Vec<f64>,
    ) -> Result<Self, GrpoError> {
        if candidates.len() != rewards.len() {
            return Err(GrpoError::InconsistentGroup(format!(
                "{} candidates but {} rewards",
                candidates.len(),
                rewards.len()
            )));
        }
        let advantages = compute_advantages(&rewards)?;
        Ok(RolloutGroup {
            question_id: question_id.into(),
            candidates,
            rewards,
            advantages,
        })
    }

    pub fn size(&self) -> usize {
        self.candidates.len()
    }

    fn check(&self) -> Result<(), GrpoError> {
        let g = self.candidates.len();
        if g < 2 {
            return Err(GrpoError::GroupTooSmall(g));
        }
        if self.rewards.len() != g || self.advantages.len() != g {
            return Err(GrpoError::InconsistentGroup(format!(
                "{g} candidates, {} rewards, {} advantages",
                self.rewards.len(),
                self.advantages.len()
            )));
        }
        Ok(())
    }
}

/// Objective value for one group and its gradient over all policy logits.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Value of the KL term before weighting by beta.
    pub kl: f64,
    /// Candidates whose clipped branch was active.
    pub clipped: usize,
}

/// `PPO`-style clipped term `min(rho * A, clip(rho) * A)` and its derivative
/// with respect to `rho`.
pub fn clipped_term(ratio: f64, advantage: f64, epsilon: f64) -> (f64, f64) {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage;
    if unclipped <= clipped {
        (unclipped, advantage)
    } else {
        (clipped, 0.0)
    }
}

/// Evaluates the clipped surrogate minus the weighted KL penalty for one
/// group under the policy's current parameters.
pub fn grpo_objective(
    group: &RolloutGroup,
    policy: &ToyPolicy,
    config: &TrainerConfig,
) -> Result<ObjectiveEval, GrpoError> {
    group.check()?;
    let q = policy
        .question_index(&group.question_id)
        .ok_or_else(|| GrpoError::UnknownQuestion(group.question_id.clone()))?;
    let range = policy.param_range(q);
    let actions = range.len();
    let probs = policy.probs(q);
    let log_probs = policy.log_probs(q);
    let g = group.size() as f64;

    let degenerate = group.advantages.iter().all(|a| *a == 0.0);
    let mut value = 0.0;
    let mut kl = 0.0;
    let mut clipped = 0;
    // Gradient restricted to this question's logits.
    let mut local = vec![0.0; actions];

    for (i, (cand, &adv)) in group.candidates.iter().zip(&group.advantages).enumerate() {
        if cand.action >= actions {
            return Err(GrpoError::InconsistentGroup(format!(
                "candidate {i} action {} out of range {actions}",
                cand.action
            )));
        }
        let old = Candidate::sequence_logprob(&cand.old_logprobs, i, "behavior")?;
        let reference = Candidate::sequence_logprob(&cand.ref_logprobs, i, "reference")?;
        let current = log_probs[cand.action];
        let ratio = (current - old).exp();
        if !ratio.is_finite() || !reference.is_finite() {
            return Err(GrpoError::DegenerateRollout { index: i });
        }

        // d log pi(a) / d theta_k = 1[k = a] - p_k
        let mut add_scaled_score = |scale: f64| {
            for (k, p) in probs.iter().enumerate() {
                local[k] -= scale * p;
            }
            local[cand.action] += scale;
        };

        if !degenerate {
            let (term, d_ratio) = clipped_term(ratio, adv, config.epsilon);
            if d_ratio == 0.0 && adv != 0.0 {
                clipped += 1;
            }
            value += term / g;
            add_scaled_score(d_ratio * ratio / g);
        }

        if config.kl_mode == KlMode::Estimator {
            let x = (reference - current).exp();
            kl += (x - (reference - current) - 1.0) / g;
            // d/dtheta (x - ln x - 1) = -(x - 1) * dlog pi
            add_scaled_score(config.beta * (x - 1.0) / g);
        }
    }

    if config.kl_mode == KlMode::Exact {
        let ref_log = policy.reference_log_probs(q);
        kl = exact_kl(&probs, &log_probs, &ref_log);
        for k in 0..actions {
            local[k] -= config.beta * probs[k] * (log_probs[k] - ref_log[k] - kl);
        }
    }
    value -= config.beta * kl;

    let mut gradient = vec![0.0; policy.num_params()];
    gradient[range].copy_from_slice(&local);
    Ok(ObjectiveEval {
        value,
        gradient,
        kl,
        clipped,
    })
}

/// `sum_k p_k (ln p_k - ln r_k)` for one categorical pair.
pub fn exact_kl(probs: &[f64], log_probs: &[f64], ref_log_probs: &[f64]) -> f64 {
    probs
        .iter()
        .zip(log_probs.iter().zip(ref_log_probs))
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, (lp, lr))| p * (lp - lr))
        .sum()
}
