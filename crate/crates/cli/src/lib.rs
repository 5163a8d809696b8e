//! Scoring CLI, reward service, and experiment orchestration on top of
//! `timt-core`.

pub mod correlate;
pub mod dataset;
pub mod experiments;
pub mod manifest;
pub mod score;
pub mod service;

pub use dataset::Dataset;
