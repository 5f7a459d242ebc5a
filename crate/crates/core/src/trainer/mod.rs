//! Training loops for standard GRPO, pooled TA-GRPO and the no-pooling
//! ablation, with per-iteration telemetry.
//!
//! One iteration, for each question in the batch:
//! 1. form the group: the identity context plus the first `N` transforms
//!    (`N = 0` for `grpo`);
//! 2. sample `G` rollouts per member from the current policy;
//! 3. compute advantages under the regime;
//! 4. record telemetry against the policy that produced the rollouts.
//!
//! The update is then applied once for all questions. Rollouts for
//! `(question, transform, iteration)` always come from the same substream, so
//! runs are reproducible under any thread schedule and regimes that share a
//! context see the same draws.

mod ablation;
mod config;
mod eval;
mod report;

pub use ablation::{run_ablation_suite, AblationReport, FinalRow, RegimeRun, TAIL_WINDOW};
pub use config::{Regime, TrainConfig};
pub use eval::{evaluate_pass_at_k, Holdout, PassAtKReport};
pub use report::{ablation_csv, records_jsonl, summary_csv};

use std::collections::BTreeMap;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::advantage::{advantages_per_variant, advantages_pooled, AdvantageSet, RewardGroup};
use crate::analytics::{
    diversity_metrics, zero_grad_prob_per_variant, zero_grad_prob_standard, zero_grad_prob_ta, DiscreteDistribution,
    SuccessProfile,
};
use crate::error::Result;
use crate::policy::{self, Policy, ScoredBatch};
use crate::rng;
use crate::scenario::{Scenario, SyntheticQuestion};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversitySummary {
    pub distinct_answers_mean: f64,
    pub entropy_mean: f64,
    pub disagreement_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionTrace {
    pub qid: u64,
    pub zero_gradient: bool,
    /// Row-major `(N+1) x G` advantages.
    pub advantages: Vec<f64>,
}

/// Telemetry for one iteration, measured on the policy that sampled it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub iteration: usize,
    /// Share of batch questions whose group advantages are all exactly zero.
    pub zero_gradient_fraction: f64,
    /// Closed-form probability of the above under the current exact success rates.
    pub expected_zero_gradient_fraction: f64,
    /// Share of this iteration's rollouts that were correct.
    pub train_pass_rate: f64,
    /// Exact pooled success over all of each question's transforms, averaged.
    pub pooled_success_mean: f64,
    pub eval_pass_at_k: BTreeMap<usize, f64>,
    pub eval_pass_at_k_exact: BTreeMap<usize, f64>,
    /// `None` when no group holds two rollouts.
    pub diversity: Option<DiversitySummary>,
    pub questions: Vec<QuestionTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub records: Vec<RunRecord>,
    pub policy: Policy,
}

struct GroupOutcome {
    trace: QuestionTrace,
    scored: Vec<ScoredBatch>,
    n_rollouts: usize,
    n_correct: usize,
    expected_zero: f64,
    diversity: Option<crate::analytics::DiversityMetrics>,
}

/// Advantages for one group's reward rows under `regime`.
pub fn group_advantages(regime: Regime, group: &RewardGroup) -> AdvantageSet {
    match regime {
        Regime::TaGrpo => advantages_pooled(group),
        // a single row normalised on its own is standard GRPO
        Regime::Grpo | Regime::TaNoPooling => advantages_per_variant(group),
    }
}

/// Closed-form chance that a group of this regime carries no signal.
pub fn expected_zero_gradient(regime: Regime, profile: &SuccessProfile, group_size: usize) -> Result<f64> {
    match regime {
        Regime::Grpo => zero_grad_prob_standard(profile.rho0(), group_size),
        Regime::TaGrpo => zero_grad_prob_ta(profile, group_size),
        Regime::TaNoPooling => zero_grad_prob_per_variant(profile, group_size),
    }
}

fn run_group(policy: &Policy, q: &SyntheticQuestion, config: &TrainConfig, iteration: usize) -> Result<GroupOutcome> {
    let members = config.effective_n() + 1;
    let mut batches = Vec::with_capacity(members);
    let mut rhos = Vec::with_capacity(members);
    for t in 0..members {
        let mut stream = rng::substream(config.seed, "rollout", &[q.id(), t as u64, iteration as u64]);
        batches.push(policy::sample_rollouts(policy, q, t, config.group_size, &mut stream)?);
        rhos.push(policy::success_rate(policy, q, t)?);
    }
    let group = RewardGroup::new(batches.iter().map(|b| b.rewards.clone()).collect(), config.epsilon)?;
    let adv = group_advantages(config.regime, &group);
    let expected_zero = expected_zero_gradient(config.regime, &SuccessProfile::new(rhos)?, config.group_size)?;
    let n_rollouts = members * config.group_size;
    let diversity = if n_rollouts >= 2 {
        Some(diversity_metrics(&batches)?)
    } else {
        None
    };
    let n_correct = batches.iter().map(|b| b.n_correct()).sum();
    let trace = QuestionTrace {
        qid: q.id(),
        zero_gradient: adv.is_all_zero(),
        advantages: adv.flat(),
    };
    let scored = batches
        .into_iter()
        .zip(adv.values)
        .map(|(batch, advantages)| ScoredBatch { batch, advantages })
        .collect();
    Ok(GroupOutcome {
        trace,
        scored,
        n_rollouts,
        n_correct,
        expected_zero,
        diversity,
    })
}

fn batch_indices(n_questions: usize, config: &TrainConfig, iteration: usize) -> Vec<usize> {
    if config.batch_size >= n_questions {
        return (0..n_questions).collect();
    }
    let mut stream = rng::substream(config.seed, "batch", &[iteration as u64]);
    let mut picked = index::sample(&mut stream, n_questions, config.batch_size).into_vec();
    picked.sort_unstable();
    picked
}

/// Trains from the uniform policy. The reference for the KL penalty is the
/// initial policy.
pub fn run_training(scenario: &Scenario, config: &TrainConfig) -> Result<TrainingRun> {
    run_training_from(scenario, config, Policy::uniform(scenario))
}

pub fn run_training_from(scenario: &Scenario, config: &TrainConfig, initial: Policy) -> Result<TrainingRun> {
    config.validate_for(scenario)?;
    let holdout = match &config.holdout_weights {
        Some(w) => Holdout::with_unseen(scenario, DiscreteDistribution::from_weights(w.clone())?, config.seed)?,
        None => Holdout::default_for(scenario, config.seed),
    };
    let update = config.update();
    let reference = initial.clone();
    let mut policy = initial;
    let mut records = Vec::with_capacity(config.iterations);

    for iteration in 0..config.iterations {
        let chosen = batch_indices(scenario.questions().len(), config, iteration);
        let outcomes = chosen
            .par_iter()
            .map(|&i| run_group(&policy, &scenario.questions()[i], config, iteration))
            .collect::<Result<Vec<_>>>()?;

        let pooled_success_mean = scenario
            .questions()
            .par_iter()
            .map(|q| policy::pooled_success(&policy, q))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .sum::<f64>()
            / scenario.questions().len() as f64;
        let eval = evaluate_pass_at_k(
            &policy,
            scenario,
            &holdout,
            &config.eval_k,
            config.eval_samples,
            rng::derive_seed(config.seed, "eval-iteration", &[iteration as u64]),
        )?;

        let nq = outcomes.len() as f64;
        let zero = outcomes.iter().filter(|o| o.trace.zero_gradient).count() as f64 / nq;
        let expected_zero = outcomes.iter().map(|o| o.expected_zero).sum::<f64>() / nq;
        let (rollouts, correct) = outcomes
            .iter()
            .fold((0, 0), |(r, c), o| (r + o.n_rollouts, c + o.n_correct));
        let div: Vec<_> = outcomes.iter().filter_map(|o| o.diversity).collect();
        let diversity = (!div.is_empty()).then(|| {
            let n = div.len() as f64;
            DiversitySummary {
                distinct_answers_mean: div.iter().map(|d| d.distinct_answers as f64).sum::<f64>() / n,
                entropy_mean: div.iter().map(|d| d.answer_entropy).sum::<f64>() / n,
                disagreement_mean: div.iter().map(|d| d.pairwise_disagreement).sum::<f64>() / n,
            }
        });

        let mut scored = Vec::new();
        let mut questions = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            questions.push(o.trace);
            scored.extend(o.scored);
        }
        records.push(RunRecord {
            iteration,
            zero_gradient_fraction: zero,
            expected_zero_gradient_fraction: expected_zero,
            train_pass_rate: correct as f64 / rollouts as f64,
            pooled_success_mean,
            eval_pass_at_k: eval.estimated,
            eval_pass_at_k_exact: eval.exact,
            diversity,
            questions,
        });

        for _ in 0..config.update_epochs {
            policy = policy::grpo_update(&policy, &reference, scenario, &scored, &update)?;
        }
    }
    Ok(TrainingRun { records, policy })
}
