//! Reward engine and desk-scale GRPO trainer for text-image machine
//! translation.
//!
//! The crate is organised bottom-up:
//!
//! - [`textmetrics`]: tokenization plus BLEU, chrF++, METEOR, token F1,
//!   normalized edit distance and CER, all on a unit scale.
//! - [`format`]: the tagged response layouts and their parser.
//! - [`reward`]: format, recognition and translation rewards, the final
//!   mixed reward, and rank correlation between reward variants.
//! - [`corpus`]: dataset records, difficulty classes and curriculum ordering.
//! - [`grpo`]: group-relative advantages, the clipped surrogate objective
//!   with a KL anchor, a toy categorical policy and the training loop.

pub mod corpus;
pub mod format;
pub mod grpo;
pub mod reward;
pub mod textmetrics;

pub use corpus::{
    build_curriculum, classify_difficulty, load_dataset, CorpusError, CurriculumPlan,
    CurriculumStrategy, Difficulty, TimtRecord,
};
pub use format::{format_reward, parse_response, ParsedResponse, Tag, TaskLayout};
pub use grpo::{
    compute_advantages, grpo_objective, GrpoError, RolloutGroup, StepReport, ToyPolicy, Trainer,
    TrainerConfig,
};
pub use reward::{
    final_reward, rank_correlation, recognition_reward, translation_reward, CorrelationKind,
    RewardBreakdown, RewardError, RewardMode,
};
pub use textmetrics::{tokenize, Lang, MetricError, TokenizedText};
