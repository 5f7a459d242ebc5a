//! Tabular simulation lab for transform-augmented GRPO.
//!
//! Synthetic questions come with `N` answer-preserving transforms whose only
//! effect is a shift of the correct answers' logits. Softmax policies over a
//! small answer vocabulary are trained with standard GRPO, with group-pooled
//! advantages across transforms, or with per-transform advantages, and every
//! Monte Carlo statistic the trainer reports has a closed form in
//! [`analytics`] to check it against.

pub mod advantage;
pub mod analytics;
pub mod cli;
pub mod error;
pub mod policy;
pub mod rng;
pub mod scenario;
pub mod trainer;
pub mod verify;

pub use error::{Error, Result};
