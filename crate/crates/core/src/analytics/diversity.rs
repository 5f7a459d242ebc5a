use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::RolloutBatch;

/// Categorical diversity of a question group's rollouts. Pairwise
/// disagreement is the mean pairwise distance under the 0/1 metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversityMetrics {
    pub distinct_answers: usize,
    /// Shannon entropy of the empirical answer distribution, in nats.
    pub answer_entropy: f64,
    /// Fraction of unordered rollout pairs whose answers differ.
    pub pairwise_disagreement: f64,
}

pub fn diversity_metrics(batches: &[RolloutBatch]) -> Result<DiversityMetrics> {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for &a in batches.iter().flat_map(|b| b.answers.iter()) {
        *counts.entry(a).or_default() += 1;
    }
    let n: u64 = counts.values().sum();
    if n < 2 {
        return Err(Error::param(format!("diversity needs at least 2 rollouts, got {n}")));
    }
    let nf = n as f64;
    let answer_entropy = counts
        .values()
        .map(|&c| {
            let p = c as f64 / nf;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0);
    let same_pairs: u64 = counts.values().map(|&c| c * (c - 1) / 2).sum();
    let all_pairs = n * (n - 1) / 2;
    Ok(DiversityMetrics {
        distinct_answers: counts.len(),
        answer_entropy,
        pairwise_disagreement: (all_pairs - same_pairs) as f64 / all_pairs as f64,
    })
}
