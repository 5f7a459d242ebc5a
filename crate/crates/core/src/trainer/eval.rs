//! Held-out Pass@k evaluation.
//!
//! The held-out mixture covers the scenario's transforms `0..=N` and,
//! optionally, one unseen transform per question. An unseen transform has no
//! context of its own: it reuses the identity context's logits with a fresh
//! correct-answer shift, drawn once per question.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::analytics::{pass_at_k_estimator, pass_at_k_exact, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::policy::{self, Policy};
use crate::rng;
use crate::scenario::{Scenario, SyntheticQuestion};

#[derive(Debug, Clone, PartialEq)]
pub struct Holdout {
    weights: DiscreteDistribution,
    /// One shift per scenario question, in scenario order; empty when the
    /// mixture has no unseen slot.
    unseen_shifts: Vec<f64>,
}

impl Holdout {
    /// Mixture over the scenario's own transforms only (`N + 1` weights).
    pub fn over_transforms(scenario: &Scenario, weights: DiscreteDistribution) -> Result<Self> {
        if weights.len() != scenario.n_transforms() + 1 {
            return Err(Error::param(format!(
                "holdout over transforms needs {} weights, got {}",
                scenario.n_transforms() + 1,
                weights.len()
            )));
        }
        Ok(Self {
            weights,
            unseen_shifts: Vec::new(),
        })
    }

    /// `N + 2` weights; the last slot is an unseen transform whose shift is
    /// uniform on `[-s, s)` with `s` the scenario's largest absolute shift.
    pub fn with_unseen(scenario: &Scenario, weights: DiscreteDistribution, seed: u64) -> Result<Self> {
        if weights.len() != scenario.n_transforms() + 2 {
            return Err(Error::param(format!(
                "holdout with an unseen transform needs {} weights, got {}",
                scenario.n_transforms() + 2,
                weights.len()
            )));
        }
        let spread = scenario.max_abs_shift();
        let unseen_shifts = scenario
            .questions()
            .iter()
            .map(|q| {
                let u: f64 = rng::substream(seed, "unseen-shift", &[q.id()]).gen();
                spread * (2.0 * u - 1.0)
            })
            .collect();
        Ok(Self {
            weights,
            unseen_shifts,
        })
    }

    /// Uniform over every transform plus the unseen one.
    pub fn default_for(scenario: &Scenario, seed: u64) -> Self {
        let w = DiscreteDistribution::uniform(scenario.n_transforms() + 2).expect("nonempty support");
        Self::with_unseen(scenario, w, seed).expect("weights sized for scenario")
    }

    pub fn weights(&self) -> &DiscreteDistribution {
        &self.weights
    }

    fn slot_probs(&self, policy: &Policy, q: &SyntheticQuestion, q_index: usize) -> Result<Vec<Vec<f64>>> {
        let n_seen = q.transforms().len();
        let mut slots = (0..n_seen)
            .map(|t| policy::context_probs(policy, q, t))
            .collect::<Result<Vec<_>>>()?;
        if !self.unseen_shifts.is_empty() {
            let base = policy.logits(q.id(), 0).ok_or(Error::Coverage { qid: q.id(), tidx: 0 })?;
            let shift = self.unseen_shifts[q_index];
            let mut z = base.to_vec();
            for &o in q.answer_space().correct_set() {
                z[o] += shift;
            }
            slots.push(policy::softmax(&z));
        }
        Ok(slots)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassAtKReport {
    /// Unbiased estimator on `n_samples` draws per question, averaged over questions.
    pub estimated: BTreeMap<usize, f64>,
    /// `1 - (1 - rho)^k` on the exact held-out success rate, averaged over questions.
    pub exact: BTreeMap<usize, f64>,
    /// Exact held-out success rate averaged over questions.
    pub mean_rho: f64,
}

fn sample_index<R: Rng>(probs: &[f64], stream: &mut R) -> usize {
    let u: f64 = stream.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Per-question held-out Pass@k, sampled and exact.
pub fn evaluate_pass_at_k(
    policy: &Policy,
    scenario: &Scenario,
    holdout: &Holdout,
    k_values: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<PassAtKReport> {
    if k_values.is_empty() {
        return Err(Error::param("no k values requested"));
    }
    for &k in k_values {
        if k == 0 || k > n_samples {
            return Err(Error::param(format!("k = {k} must lie in 1..={n_samples}")));
        }
    }
    let expected_slots = scenario.n_transforms() + 1 + usize::from(!holdout.unseen_shifts.is_empty());
    if holdout.weights.len() != expected_slots || (!holdout.unseen_shifts.is_empty() && holdout.unseen_shifts.len() != scenario.questions().len()) {
        return Err(Error::param("holdout was built for a different scenario"));
    }
    let w = holdout.weights.probs();
    let mut estimated: BTreeMap<usize, f64> = k_values.iter().map(|&k| (k, 0.0)).collect();
    let mut exact = estimated.clone();
    let mut mean_rho = 0.0;
    let nq = scenario.questions().len() as f64;
    for (qi, q) in scenario.questions().iter().enumerate() {
        let slots = holdout.slot_probs(policy, q, qi)?;
        let space = q.answer_space();
        let rho: f64 = slots
            .iter()
            .zip(w)
            .map(|(probs, wi)| wi * space.correct_set().iter().map(|&o| probs[o]).sum::<f64>())
            .sum::<f64>()
            .clamp(0.0, 1.0);
        let mut stream = rng::substream(seed, "eval", &[q.id()]);
        let mut correct = 0;
        for _ in 0..n_samples {
            let slot = sample_index(w, &mut stream);
            let answer = sample_index(&slots[slot], &mut stream);
            correct += usize::from(space.is_correct(answer));
        }
        for &k in k_values {
            *estimated.get_mut(&k).expect("seeded") += pass_at_k_estimator(n_samples, correct, k)? / nq;
            *exact.get_mut(&k).expect("seeded") += pass_at_k_exact(rho, k as u64)? / nq;
        }
        mean_rho += rho / nq;
    }
    Ok(PassAtKReport {
        estimated,
        exact,
        mean_rho,
    })
}
