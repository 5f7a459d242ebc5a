//! Tabular softmax policy.
//!
//! Each (question, transform) context owns a logit vector over the answer
//! vocabulary. The distribution a context actually samples from is
//! `softmax(logits + shift * 1[correct])`, where `shift` is the transform's
//! difficulty offset. The shift is constant in the parameters, so gradients
//! with respect to the effective logits and the stored logits coincide.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scenario::{Scenario, SyntheticQuestion};

/// `(question id, transform index)`.
pub type ContextKey = (u64, usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyDoc", into = "PolicyDoc")]
pub struct Policy {
    contexts: BTreeMap<ContextKey, Vec<f64>>,
}

impl Policy {
    /// All-zero logits for every context of `scenario`.
    pub fn uniform(scenario: &Scenario) -> Self {
        let contexts = scenario
            .questions()
            .iter()
            .flat_map(|q| {
                let v = q.answer_space().vocab_size();
                (0..q.transforms().len()).map(move |t| ((q.id(), t), vec![0.0; v]))
            })
            .collect();
        Self { contexts }
    }

    /// Logits drawn uniformly on `[-scale, scale)`, one seeded substream per context.
    pub fn random(scenario: &Scenario, scale: f64, seed: u64) -> Self {
        let contexts = scenario
            .questions()
            .iter()
            .flat_map(|q| {
                let v = q.answer_space().vocab_size();
                (0..q.transforms().len()).map(move |t| {
                    let mut s = rng::substream(seed, "policy-init", &[q.id(), t as u64]);
                    let logits = (0..v).map(|_| scale * (2.0 * s.gen::<f64>() - 1.0)).collect();
                    ((q.id(), t), logits)
                })
            })
            .collect();
        Self { contexts }
    }

    pub fn from_contexts(contexts: impl IntoIterator<Item = (ContextKey, Vec<f64>)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (key, logits) in contexts {
            check_logits(key, &logits)?;
            if map.insert(key, logits).is_some() {
                return Err(Error::param(format!("duplicate context {key:?}")));
            }
        }
        Ok(Self { contexts: map })
    }

    pub fn logits(&self, qid: u64, tidx: usize) -> Option<&[f64]> {
        self.contexts.get(&(qid, tidx)).map(Vec::as_slice)
    }

    pub fn set_logits(&mut self, qid: u64, tidx: usize, logits: Vec<f64>) -> Result<()> {
        check_logits((qid, tidx), &logits)?;
        self.contexts.insert((qid, tidx), logits);
        Ok(())
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&ContextKey, &Vec<f64>)> {
        self.contexts.iter()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn check_logits(key: ContextKey, logits: &[f64]) -> Result<()> {
    if logits.len() < 2 {
        return Err(Error::param(format!("context {key:?}: fewer than two logits")));
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::param(format!("context {key:?}: non-finite logit")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextDoc {
    qid: u64,
    tidx: usize,
    logits: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyDoc {
    contexts: Vec<ContextDoc>,
}

impl TryFrom<PolicyDoc> for Policy {
    type Error = Error;

    fn try_from(doc: PolicyDoc) -> Result<Self> {
        Policy::from_contexts(doc.contexts.into_iter().map(|c| ((c.qid, c.tidx), c.logits)))
    }
}

impl From<Policy> for PolicyDoc {
    fn from(p: Policy) -> Self {
        PolicyDoc {
            contexts: p
                .contexts
                .into_iter()
                .map(|((qid, tidx), logits)| ContextDoc { qid, tidx, logits })
                .collect(),
        }
    }
}

pub(crate) fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Logits plus the transform's shift on every correct answer.
pub fn effective_logits(
    logits: &[f64],
    question: &SyntheticQuestion,
    transform_index: usize,
) -> Result<Vec<f64>> {
    let shift = question.shift(transform_index).ok_or(Error::Coverage {
        qid: question.id(),
        tidx: transform_index,
    })?;
    let space = question.answer_space();
    if logits.len() != space.vocab_size() {
        return Err(Error::param(format!(
            "context ({}, {transform_index}) has {} logits, vocabulary is {}",
            question.id(),
            logits.len(),
            space.vocab_size()
        )));
    }
    let mut z = logits.to_vec();
    for &o in space.correct_set() {
        z[o] += shift;
    }
    Ok(z)
}

fn context_logits<'a>(policy: &'a Policy, question: &SyntheticQuestion, tidx: usize) -> Result<&'a [f64]> {
    policy.logits(question.id(), tidx).ok_or(Error::Coverage {
        qid: question.id(),
        tidx,
    })
}

/// Answer distribution of one context, shift included.
pub fn context_probs(policy: &Policy, question: &SyntheticQuestion, transform_index: usize) -> Result<Vec<f64>> {
    let z = effective_logits(context_logits(policy, question, transform_index)?, question, transform_index)?;
    Ok(softmax(&z))
}

/// Exact probability mass on the correct set for one context.
pub fn success_rate(policy: &Policy, question: &SyntheticQuestion, transform_index: usize) -> Result<f64> {
    let probs = context_probs(policy, question, transform_index)?;
    let rho: f64 = question.answer_space().correct_set().iter().map(|&o| probs[o]).sum();
    Ok(rho.clamp(0.0, 1.0))
}

/// Mean success rate over the identity and every transform of `question`.
pub fn pooled_success(policy: &Policy, question: &SyntheticQuestion) -> Result<f64> {
    let n = question.transforms().len();
    let mut total = 0.0;
    for t in 0..n {
        total += success_rate(policy, question, t)?;
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutBatch {
    pub qid: u64,
    pub tidx: usize,
    pub answers: Vec<usize>,
    /// Log-probability of each answer under the policy that sampled it.
    pub old_logprobs: Vec<f64>,
    /// 1 iff the answer is in the correct set.
    pub rewards: Vec<u8>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    pub fn n_correct(&self) -> usize {
        self.rewards.iter().filter(|&&r| r == 1).count()
    }
}

/// Draws `group_size` i.i.d. answers from one context by inverse CDF.
pub fn sample_rollouts<R: Rng + ?Sized>(
    policy: &Policy,
    question: &SyntheticQuestion,
    transform_index: usize,
    group_size: usize,
    stream: &mut R,
) -> Result<RolloutBatch> {
    if group_size == 0 {
        return Err(Error::param("group size must be >= 1"));
    }
    let z = effective_logits(context_logits(policy, question, transform_index)?, question, transform_index)?;
    let logp = log_softmax(&z);
    let probs = softmax(&z);
    let last_live = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
    let space = question.answer_space();

    let mut answers = Vec::with_capacity(group_size);
    let mut old_logprobs = Vec::with_capacity(group_size);
    let mut rewards = Vec::with_capacity(group_size);
    for _ in 0..group_size {
        let u: f64 = stream.gen();
        let mut acc = 0.0;
        let mut pick = last_live;
        for (o, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                pick = o;
                break;
            }
        }
        answers.push(pick);
        old_logprobs.push(logp[pick]);
        rewards.push(u8::from(space.is_correct(pick)));
    }
    Ok(RolloutBatch {
        qid: question.id(),
        tidx: transform_index,
        answers,
        old_logprobs,
        rewards,
    })
}

/// A rollout batch together with one advantage per rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredBatch {
    pub batch: RolloutBatch,
    pub advantages: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateConfig {
    pub lr: f64,
    pub clip_low: f64,
    pub clip_high: f64,
    pub kl_coef: f64,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        Self {
            lr: 1e-6,
            clip_low: 0.8,
            clip_high: 1.2,
            kl_coef: 0.01,
        }
    }
}

impl UpdateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::param(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.clip_low > 0.0 && self.clip_low <= 1.0 && self.clip_high >= 1.0 && self.clip_high.is_finite()) {
            return Err(Error::param(format!(
                "clip bounds must satisfy 0 < low <= 1 <= high, got [{}, {}]",
                self.clip_low, self.clip_high
            )));
        }
        if !(self.kl_coef >= 0.0 && self.kl_coef.is_finite()) {
            return Err(Error::param(format!("kl_coef must be >= 0, got {}", self.kl_coef)));
        }
        Ok(())
    }
}

struct ContextTerms<'a> {
    question: &'a SyntheticQuestion,
    batches: Vec<&'a ScoredBatch>,
}

fn group_by_context<'a>(scenario: &'a Scenario, batches: &'a [ScoredBatch]) -> Result<BTreeMap<ContextKey, ContextTerms<'a>>> {
    let mut out: BTreeMap<ContextKey, ContextTerms<'a>> = BTreeMap::new();
    for sb in batches {
        let b = &sb.batch;
        if b.is_empty() || b.old_logprobs.len() != b.len() || b.rewards.len() != b.len() || sb.advantages.len() != b.len() {
            return Err(Error::param(format!(
                "batch ({}, {}) has mismatched lengths or is empty",
                b.qid, b.tidx
            )));
        }
        if let Some(a) = sb.advantages.iter().find(|a| !a.is_finite()) {
            return Err(Error::param(format!("batch ({}, {}) has advantage {a}", b.qid, b.tidx)));
        }
        let question = scenario.question(b.qid).ok_or(Error::Coverage { qid: b.qid, tidx: b.tidx })?;
        out.entry((b.qid, b.tidx))
            .or_insert_with(|| ContextTerms {
                question,
                batches: Vec::new(),
            })
            .batches
            .push(sb);
    }
    Ok(out)
}

fn kl_terms(p_log: &[f64], r_log: &[f64]) -> f64 {
    p_log
        .iter()
        .zip(r_log)
        .map(|(lp, lr)| if lp.exp() > 0.0 { lp.exp() * (lp - lr) } else { 0.0 })
        .sum()
}

/// Value of the clipped surrogate minus the KL penalty, summed over contexts.
///
/// Each batch contributes `(1/G) * sum_j min(ratio_j * A_j, clip(ratio_j) * A_j)`
/// and each distinct context contributes `-kl_coef * KL(pi || reference)` once.
pub fn surrogate_objective(
    policy: &Policy,
    reference: &Policy,
    scenario: &Scenario,
    batches: &[ScoredBatch],
    cfg: &UpdateConfig,
) -> Result<f64> {
    cfg.validate()?;
    let mut total = 0.0;
    for ((qid, tidx), terms) in group_by_context(scenario, batches)? {
        let q = terms.question;
        let logp = log_softmax(&effective_logits(context_logits(policy, q, tidx)?, q, tidx)?);
        for sb in &terms.batches {
            let g = sb.batch.len() as f64;
            for ((&o, &old), &a) in sb.batch.answers.iter().zip(&sb.batch.old_logprobs).zip(&sb.advantages) {
                let ratio = (logp[o] - old).exp();
                let clipped = ratio.clamp(cfg.clip_low, cfg.clip_high);
                total += (ratio * a).min(clipped * a) / g;
            }
        }
        if cfg.kl_coef > 0.0 {
            let r = reference.logits(qid, tidx).ok_or(Error::Coverage { qid, tidx })?;
            let ref_log = log_softmax(&effective_logits(r, q, tidx)?);
            total -= cfg.kl_coef * kl_terms(&logp, &ref_log);
        }
    }
    Ok(total)
}

/// Exact gradient of [`surrogate_objective`] with respect to each touched
/// context's logits.
///
/// A rollout whose clipped term is the active side of the min contributes
/// nothing; otherwise it contributes `A * ratio * (onehot(o) - pi) / G`. The
/// KL term contributes `-kl_coef * pi_k * (log pi_k - log ref_k - KL)`.
pub fn objective_gradient(
    policy: &Policy,
    reference: &Policy,
    scenario: &Scenario,
    batches: &[ScoredBatch],
    cfg: &UpdateConfig,
) -> Result<BTreeMap<ContextKey, Vec<f64>>> {
    cfg.validate()?;
    let mut grads = BTreeMap::new();
    for ((qid, tidx), terms) in group_by_context(scenario, batches)? {
        let q = terms.question;
        let z = effective_logits(context_logits(policy, q, tidx)?, q, tidx)?;
        let logp = log_softmax(&z);
        let probs = softmax(&z);
        let mut grad = vec![0.0; probs.len()];
        for sb in &terms.batches {
            let g = sb.batch.len() as f64;
            for ((&o, &old), &a) in sb.batch.answers.iter().zip(&sb.batch.old_logprobs).zip(&sb.advantages) {
                if a == 0.0 {
                    continue;
                }
                let ratio = (logp[o] - old).exp();
                let clipped = ratio.clamp(cfg.clip_low, cfg.clip_high);
                if ratio * a > clipped * a {
                    continue;
                }
                let scale = a * ratio / g;
                for (k, gk) in grad.iter_mut().enumerate() {
                    let onehot = if k == o { 1.0 } else { 0.0 };
                    *gk += scale * (onehot - probs[k]);
                }
            }
        }
        if cfg.kl_coef > 0.0 {
            let r = reference.logits(qid, tidx).ok_or(Error::Coverage { qid, tidx })?;
            let ref_log = log_softmax(&effective_logits(r, q, tidx)?);
            let kl = kl_terms(&logp, &ref_log);
            for (k, gk) in grad.iter_mut().enumerate() {
                *gk -= cfg.kl_coef * probs[k] * (logp[k] - ref_log[k] - kl);
            }
        }
        grads.insert((qid, tidx), grad);
    }
    Ok(grads)
}

/// One gradient-ascent step on the clipped, KL-penalised surrogate.
pub fn grpo_update(
    policy: &Policy,
    reference: &Policy,
    scenario: &Scenario,
    batches: &[ScoredBatch],
    cfg: &UpdateConfig,
) -> Result<Policy> {
    let grads = objective_gradient(policy, reference, scenario, batches, cfg)?;
    let mut next = policy.clone();
    for (key, grad) in grads {
        let logits = next.contexts.get_mut(&key).ok_or(Error::Coverage { qid: key.0, tidx: key.1 })?;
        for (z, g) in logits.iter_mut().zip(grad) {
            // skip exact zeros so no-signal steps leave the logits bit-identical
            if g != 0.0 {
                *z += cfg.lr * g;
            }
        }
    }
    Ok(next)
}
