//! Self-contained verification suite: every closed form in [`analytics`]
//! and [`advantage`] checked against enumeration, Monte Carlo through the real
//! sampler, or finite differences. The report is a pure function of the
//! config, so two runs with the same seed print identical bytes.
//!
//! [`analytics`]: crate::analytics
//! [`advantage`]: crate::advantage

use std::fmt::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::advantage::{advantages_bernoulli_group, advantages_pooled, RewardGroup};
use crate::analytics::{
    kl_chain_decompose, kl_divergence, pass_at_k_estimator, pass_at_k_exact, verify_theorem1, zero_grad_prob_per_variant,
    zero_grad_prob_standard, zero_grad_prob_ta, DiscreteDistribution, JointDistribution, SuccessProfile,
};
use crate::error::{Error, Result};
use crate::policy::{self, Policy, RolloutBatch, ScoredBatch, UpdateConfig};
use crate::rng::{self, Stream};
use crate::scenario::{generate_scenario, AnswerSpace, Scenario, SyntheticQuestion};
use crate::trainer::{self, group_advantages, FinalRow, Regime, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Monte Carlo trials per profile.
    pub trials: usize,
    /// Random profiles / triples for the property checks.
    pub profiles: usize,
    /// Also run the desk-scale training comparisons (advisory).
    pub training: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100_000,
            profiles: 1000,
            training: true,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.trials == 0 {
            bad.push("`trials` must be >= 1".to_string());
        }
        if self.profiles == 0 {
            bad.push("`profiles` must be >= 1".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// An advisory check that did not hold; does not fail the suite.
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            outcome: if passed { Outcome::Pass } else { Outcome::Fail },
            detail,
        }
    }

    fn advisory(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            outcome: if passed { Outcome::Pass } else { Outcome::Warn },
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Warn => "WARN",
            };
            let _ = writeln!(out, "[{tag}] {:<28} {}", c.name, c.detail);
        }
        let failed = self.checks.iter().filter(|c| c.outcome == Outcome::Fail).count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

pub fn run_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut checks = vec![
        check_pass_at_k_numbers()?,
        check_zero_grad_enumeration()?,
        check_zero_grad_ordering(cfg)?,
        check_zero_grad_monte_carlo(cfg)?,
        check_pooled_reward_moments(cfg)?,
        check_binary_identity(cfg)?,
        check_pinsker(cfg)?,
        check_kl_chain(cfg)?,
        check_pass_at_k_estimator()?,
        check_gradient(cfg)?,
    ];
    if cfg.training {
        checks.extend(check_training_directions()?);
    }
    Ok(VerifyReport { checks })
}

pub fn check_pass_at_k_numbers() -> Result<CheckResult> {
    let cases = [(1u64, 0.3), (5, 0.83), (10, 0.97)];
    let mut ok = true;
    let mut detail = String::new();
    for (k, expected) in cases {
        let v = pass_at_k_exact(0.3, k)?;
        let want = 1.0 - 0.7f64.powi(k as i32);
        ok &= (v - want).abs() < 1e-12;
        let _ = write!(detail, "Pass@{k}(0.3)={v:.5} (expected ~{expected}) ");
    }
    ok &= (pass_at_k_exact(0.3, 5)? - 0.83193).abs() <= 0.005;
    ok &= (pass_at_k_exact(0.3, 10)? - 0.97175).abs() <= 0.005;
    Ok(CheckResult::new("pass_at_k_worked_numbers", ok, detail.trim_end().to_string()))
}

/// Probability of every reward matrix for which `zero` holds, by enumeration.
fn enumerate_prob(rhos: &[f64], g: usize, zero: impl Fn(&RewardGroup) -> bool) -> Result<f64> {
    let cells = rhos.len() * g;
    let mut total = 0.0;
    for mask in 0u32..1 << cells {
        let rows: Vec<Vec<u8>> = (0..rhos.len())
            .map(|i| (0..g).map(|j| ((mask >> (i * g + j)) & 1) as u8).collect())
            .collect();
        let group = RewardGroup::new(rows, 0.0)?;
        if zero(&group) {
            total += (0..cells)
                .map(|c| {
                    let r = rhos[c / g];
                    if (mask >> c) & 1 == 1 { r } else { 1.0 - r }
                })
                .product::<f64>();
        }
    }
    Ok(total)
}

pub fn check_zero_grad_enumeration() -> Result<CheckResult> {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 0..=2usize {
        let mut idx = vec![0usize; n + 1];
        loop {
            let rhos: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
            let profile = SuccessProfile::new(rhos.clone())?;
            for g in 1..=3usize {
                let std = enumerate_prob(&rhos[..1], g, |grp| group_advantages(Regime::Grpo, grp).is_all_zero())?;
                let ta = enumerate_prob(&rhos, g, |grp| group_advantages(Regime::TaGrpo, grp).is_all_zero())?;
                let pv = enumerate_prob(&rhos, g, |grp| group_advantages(Regime::TaNoPooling, grp).is_all_zero())?;
                worst = worst
                    .max((std - zero_grad_prob_standard(rhos[0], g)?).abs())
                    .max((ta - zero_grad_prob_ta(&profile, g)?).abs())
                    .max((pv - zero_grad_prob_per_variant(&profile, g)?).abs());
                cases += 1;
            }
            // odometer over the grid
            let mut d = 0;
            while d <= n {
                idx[d] += 1;
                if idx[d] < grid.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d > n {
                break;
            }
        }
    }
    Ok(CheckResult::new(
        "zero_grad_enumeration",
        worst <= 1e-12,
        format!("{cases} (profile, G) cases, max |closed form - enumeration| = {worst:.2e}"),
    ))
}

fn random_profile(stream: &mut Stream, n: usize) -> Vec<f64> {
    (0..=n).map(|_| stream.gen::<f64>()).collect()
}

pub fn check_zero_grad_ordering(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut stream = rng::substream(cfg.seed, "verify-theorem", &[]);
    let (mut tested, mut violations, mut strict_cases, mut strict_hits) = (0, 0, 0, 0);
    while tested < cfg.profiles {
        let n = stream.gen_range(1..=5);
        let g = stream.gen_range(1..=16);
        let profile = SuccessProfile::new(random_profile(&mut stream, n))?;
        let c = verify_theorem1(&profile, g)?;
        if !c.premise {
            continue;
        }
        tested += 1;
        violations += usize::from(!c.holds);
        if c.strict_premise {
            strict_cases += 1;
            strict_hits += usize::from(c.strict);
        }
    }
    let strict_share = strict_hits as f64 / strict_cases.max(1) as f64;
    Ok(CheckResult::new(
        "zero_grad_ordering",
        violations == 0 && strict_share >= 0.95,
        format!("{tested} profiles, {violations} violations, strict in {strict_hits}/{strict_cases}"),
    ))
}

/// A question whose transform `i` has success rate `rhos[i]` under the
/// uniform policy: two answers, answer 0 correct, shift = logit(rho_i).
pub fn question_with_rates(id: u64, rhos: &[f64]) -> Result<SyntheticQuestion> {
    let shifts: Vec<f64> = rhos.iter().map(|&r| (r / (1.0 - r)).ln()).collect();
    let base = shifts[0];
    let relative: Vec<f64> = shifts.iter().map(|s| s - base).collect();
    SyntheticQuestion::new(id, AnswerSpace::new(2, [0])?, &relative)
}

/// Policy putting logit `logit(rho_0)` on the correct answer of every context,
/// so context `i` of [`question_with_rates`] has success rate `rho_i`.
pub fn policy_with_rates(q: &SyntheticQuestion, rho0: f64) -> Result<Policy> {
    let z = (rho0 / (1.0 - rho0)).ln();
    Policy::from_contexts((0..q.transforms().len()).map(|t| ((q.id(), t), vec![z, 0.0])))
}

const TRIAL_CHUNK: usize = 1000;

pub fn check_zero_grad_monte_carlo(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut stream = rng::substream(cfg.seed, "verify-mc-profiles", &[]);
    let pairs: Vec<(Vec<f64>, usize)> = (0..50)
        .map(|_| {
            let n = stream.gen_range(0..=3);
            let g = [2usize, 4, 8][stream.gen_range(0..3)];
            let rhos = (0..=n).map(|_| stream.gen_range(0.05..0.95)).collect();
            (rhos, g)
        })
        .collect();
    let trials = cfg.trials;
    let results = pairs
        .par_iter()
        .enumerate()
        .map(|(pi, (rhos, g))| -> Result<f64> {
            let q = question_with_rates(pi as u64, rhos)?;
            let policy = policy_with_rates(&q, rhos[0])?;
            let profile = SuccessProfile::new(rhos.clone())?;
            let mut zeros = [0usize; 3];
            for chunk in 0..trials.div_ceil(TRIAL_CHUNK) {
                let mut s = rng::substream(cfg.seed, "verify-mc", &[pi as u64, chunk as u64]);
                for _ in 0..TRIAL_CHUNK.min(trials - chunk * TRIAL_CHUNK) {
                    let rows = (0..rhos.len())
                        .map(|t| Ok(policy::sample_rollouts(&policy, &q, t, *g, &mut s)?.rewards))
                        .collect::<Result<Vec<_>>>()?;
                    let group = RewardGroup::new(rows, 1e-8)?;
                    let std_group = RewardGroup::new(vec![group.rows()[0].clone()], 1e-8)?;
                    zeros[0] += usize::from(group_advantages(Regime::Grpo, &std_group).is_all_zero());
                    zeros[1] += usize::from(group_advantages(Regime::TaGrpo, &group).is_all_zero());
                    zeros[2] += usize::from(group_advantages(Regime::TaNoPooling, &group).is_all_zero());
                }
            }
            let closed = [
                zero_grad_prob_standard(rhos[0], *g)?,
                zero_grad_prob_ta(&profile, *g)?,
                zero_grad_prob_per_variant(&profile, *g)?,
            ];
            let mut worst = 0.0f64;
            for (&hits, &p) in zeros.iter().zip(&closed) {
                let freq = hits as f64 / trials as f64;
                let sd = (p * (1.0 - p) / trials as f64).sqrt();
                let z = if sd > 0.0 {
                    (freq - p).abs() / sd
                } else if freq == p {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = results.iter().copied().fold(0.0, f64::max);
    Ok(CheckResult::new(
        "zero_grad_monte_carlo",
        worst <= 4.0,
        format!("50 (profile, G) pairs x {trials} trials x 3 regimes, worst deviation {worst:.2} sigma"),
    ))
}

pub fn check_pooled_reward_moments(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut stream = rng::substream(cfg.seed, "verify-lemma-profiles", &[]);
    let profiles: Vec<Vec<f64>> = (0..50)
        .map(|_| {
            let n = stream.gen_range(1..=5);
            (0..=n).map(|_| stream.gen_range(0.02..0.98)).collect()
        })
        .collect();
    let draws = cfg.trials;
    let results = profiles
        .par_iter()
        .enumerate()
        .map(|(pi, rhos)| -> Result<(f64, f64)> {
            let q = question_with_rates(pi as u64, rhos)?;
            let policy = policy_with_rates(&q, rhos[0])?;
            let rho = rhos.iter().sum::<f64>() / rhos.len() as f64;
            let mut s = rng::substream(cfg.seed, "verify-lemma", &[pi as u64]);
            let mut hits = 0usize;
            for _ in 0..draws {
                let t = s.gen_range(0..rhos.len());
                hits += policy::sample_rollouts(&policy, &q, t, 1, &mut s)?.n_correct();
            }
            let n = draws as f64;
            let mean = hits as f64 / n;
            let var = if draws > 1 { mean * (1.0 - mean) * n / (n - 1.0) } else { 0.0 };
            let v = rho * (1.0 - rho);
            let z_mean = (mean - rho).abs() / (v / n).sqrt();
            // unbiased Bernoulli sample variance: (1-2rho)(m-rho) - (m-rho)^2 + O(v/n^2)
            let sd_var = ((1.0 - 2.0 * rho).powi(2) * v / n + 2.0 * v * v / (n * n)).sqrt();
            let z_var = (var - v).abs() / sd_var;
            Ok((z_mean, z_var))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_mean = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_var = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(CheckResult::new(
        "pooled_reward_moments",
        worst_mean <= 4.0 && worst_var <= 4.0,
        format!("50 profiles x {draws} draws, worst mean {worst_mean:.2} sigma, worst variance {worst_var:.2} sigma"),
    ))
}

pub fn check_binary_identity(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut s = rng::substream(cfg.seed, "verify-binary", &[]);
    let mut worst_sigma = 0.0f64;
    let mut worst_adv = 0.0f64;
    for _ in 0..cfg.profiles {
        let rows = s.gen_range(1..=6);
        let g = s.gen_range(1..=16);
        let p: f64 = s.gen();
        let m: Vec<Vec<u8>> = (0..rows).map(|_| (0..g).map(|_| u8::from(s.gen::<f64>() < p)).collect()).collect();
        let group = RewardGroup::new(m, 0.0)?;
        let mu = group.mu();
        worst_sigma = worst_sigma.max((group.sigma() - (mu * (1.0 - mu)).sqrt()).abs());
        if !group.is_uniform() {
            let a = advantages_pooled(&group).flat();
            let b = advantages_bernoulli_group(&group, mu)?.flat();
            worst_adv = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(worst_adv, f64::max);
        }
    }
    Ok(CheckResult::new(
        "binary_sigma_identity",
        worst_sigma <= 1e-12 && worst_adv <= 1e-12,
        format!(
            "{} matrices, max |sigma - sqrt(mu(1-mu))| = {worst_sigma:.2e}, max pooled vs whitened = {worst_adv:.2e}",
            cfg.profiles
        ),
    ))
}

fn random_simplex(s: &mut Stream, n: usize, zero_prob: f64) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| if s.gen::<f64>() < zero_prob { 0.0 } else { -s.gen::<f64>().ln() })
            .collect();
        let t: f64 = w.iter().sum();
        if t > 0.0 {
            return w.into_iter().map(|x| x / t).collect();
        }
    }
}

pub fn check_pinsker(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut s = rng::substream(cfg.seed, "verify-pinsker", &[]);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..cfg.profiles {
        let n = s.gen_range(2..=10);
        let q = DiscreteDistribution::new(random_simplex(&mut s, n, 0.0))?;
        let p = DiscreteDistribution::new(random_simplex(&mut s, n, 0.3))?;
        let g: Vec<f64> = (0..n).map(|_| s.gen()).collect();
        let gap = (p.expect(|i| g[i]) - q.expect(|i| g[i])).abs();
        let bound = (2.0 * kl_divergence(&p, &q)?).sqrt();
        violations += usize::from(gap > bound);
        tightest = tightest.min(bound - gap);
    }
    Ok(CheckResult::new(
        "pinsker_property",
        violations == 0,
        format!("{} triples, {violations} violations, min slack {tightest:.3e}", cfg.profiles),
    ))
}

pub fn check_kl_chain(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut s = rng::substream(cfg.seed, "verify-chain", &[]);
    let mut worst = 0.0f64;
    let cases = cfg.profiles.max(100);
    for _ in 0..cases {
        let (r, c) = (s.gen_range(1..=5), s.gen_range(1..=5));
        let q = JointDistribution::new(r, c, random_simplex(&mut s, r * c, 0.0))?;
        let p = JointDistribution::new(r, c, random_simplex(&mut s, r * c, 0.3))?;
        let chain = kl_chain_decompose(&p, &q)?;
        let direct = kl_divergence(p.flat(), q.flat())?;
        worst = worst.max((chain.total - direct).abs());
    }
    Ok(CheckResult::new(
        "kl_chain_rule",
        worst <= 1e-10,
        format!("{cases} joints, max |chain - direct| = {worst:.2e}"),
    ))
}

pub fn check_pass_at_k_estimator() -> Result<CheckResult> {
    let mut worst_subsets = 0.0f64;
    let mut worst_unbiased = 0.0f64;
    for n in 1..=12usize {
        for c in 0..=n {
            for k in 1..=n {
                // samples 0..c are the correct ones
                let (mut hit, mut total) = (0u64, 0u64);
                for mask in 0u32..1 << n {
                    if mask.count_ones() as usize != k {
                        continue;
                    }
                    total += 1;
                    hit += u64::from(mask & ((1u32 << c) - 1) != 0);
                }
                let est = pass_at_k_estimator(n, c, k)?;
                worst_subsets = worst_subsets.max((est - hit as f64 / total as f64).abs());
            }
        }
        for k in 1..=n {
            for rho in [0.05f64, 0.3, 0.5, 0.9] {
                let mut expect = 0.0;
                let mut binom = 1.0f64;
                for c in 0..=n {
                    if c > 0 {
                        binom *= (n - c + 1) as f64 / c as f64;
                    }
                    expect += binom * rho.powi(c as i32) * (1.0 - rho).powi((n - c) as i32) * pass_at_k_estimator(n, c, k)?;
                }
                worst_unbiased = worst_unbiased.max((expect - pass_at_k_exact(rho, k as u64)?).abs());
            }
        }
    }
    Ok(CheckResult::new(
        "pass_at_k_estimator",
        worst_subsets <= 1e-12 && worst_unbiased <= 1e-12,
        format!("n <= 12: max |estimator - subset enumeration| = {worst_subsets:.2e}, max bias = {worst_unbiased:.2e}"),
    ))
}

/// One random gradient-check instance: a single-question scenario, current
/// and reference policies, scored batches, and the update config.
pub struct GradientInstance {
    pub scenario: Scenario,
    pub policy: Policy,
    pub reference: Policy,
    pub batches: Vec<ScoredBatch>,
    pub cfg: UpdateConfig,
    /// Rollouts whose clipped term is active.
    pub clipped: usize,
}

/// Ratios closer than this (relative) to a clip edge are redrawn so finite
/// differences never straddle the kink.
const KINK_MARGIN: f64 = 1e-3;

pub fn random_gradient_instance(s: &mut Stream) -> Result<GradientInstance> {
    loop {
        let vocab = s.gen_range(3..=6);
        let n = s.gen_range(0..=2);
        let shifts: Vec<f64> = std::iter::once(0.0).chain((0..n).map(|_| s.gen_range(-2.0..2.0))).collect();
        let correct = s.gen_range(0..vocab);
        let q = SyntheticQuestion::new(0, AnswerSpace::new(vocab, [correct])?, &shifts)?;
        let scenario = Scenario::new(0, n, vec![q.clone()])?;
        let seed = s.gen();
        let policy = Policy::random(&scenario, 1.5, seed);
        let reference = Policy::random(&scenario, 1.5, seed ^ 0xABCD);
        let cfg = UpdateConfig {
            lr: 1.0,
            clip_low: 0.8,
            clip_high: 1.2,
            kl_coef: if s.gen_bool(0.5) { 0.0 } else { s.gen_range(0.01..0.5) },
        };
        let mut batches = Vec::new();
        let mut clipped = 0;
        let mut near_kink = false;
        for t in 0..=n {
            let g = s.gen_range(1..=5);
            let probs = policy::context_probs(&policy, &q, t)?;
            let mut b = RolloutBatch {
                qid: 0,
                tidx: t,
                answers: Vec::new(),
                old_logprobs: Vec::new(),
                rewards: Vec::new(),
            };
            let mut adv = Vec::new();
            for _ in 0..g {
                let o = s.gen_range(0..vocab);
                let ratio: f64 = s.gen_range(0.5..2.0);
                let a: f64 = s.gen_range(-2.0..2.0);
                b.answers.push(o);
                b.old_logprobs.push((probs[o] / ratio).ln());
                b.rewards.push(u8::from(o == correct));
                adv.push(a);
                let edge = |c: f64| ((ratio - c) / c).abs() < KINK_MARGIN;
                near_kink |= edge(cfg.clip_low) || edge(cfg.clip_high);
                clipped += usize::from((a > 0.0 && ratio > cfg.clip_high) || (a < 0.0 && ratio < cfg.clip_low));
            }
            batches.push(ScoredBatch { batch: b, advantages: adv });
        }
        if near_kink {
            continue;
        }
        return Ok(GradientInstance {
            scenario,
            policy,
            reference,
            batches,
            cfg,
            clipped,
        });
    }
}

/// Largest relative gap between the analytic gradient and central
/// differences with step `h`, relative to `max(|grad|_inf, 1e-3)`.
pub fn gradient_check_error(inst: &GradientInstance, h: f64) -> Result<f64> {
    let analytic = policy::objective_gradient(&inst.policy, &inst.reference, &inst.scenario, &inst.batches, &inst.cfg)?;
    let scale = analytic.values().flatten().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-3);
    let mut worst = 0.0f64;
    for (&(qid, tidx), grad) in &analytic {
        let base = inst.policy.logits(qid, tidx).expect("context exists").to_vec();
        for k in 0..base.len() {
            let eval = |delta: f64| -> Result<f64> {
                let mut p = inst.policy.clone();
                let mut z = base.clone();
                z[k] += delta;
                p.set_logits(qid, tidx, z)?;
                policy::surrogate_objective(&p, &inst.reference, &inst.scenario, &inst.batches, &inst.cfg)
            };
            let fd = (eval(h)? - eval(-h)?) / (2.0 * h);
            worst = worst.max((fd - grad[k]).abs() / scale);
        }
    }
    Ok(worst)
}

pub fn check_gradient(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut s = rng::substream(cfg.seed, "verify-gradient", &[]);
    let mut worst = 0.0f64;
    let mut clipped = 0;
    for _ in 0..100 {
        let inst = random_gradient_instance(&mut s)?;
        clipped += inst.clipped;
        worst = worst.max(gradient_check_error(&inst, 1e-5)?);
    }
    Ok(CheckResult::new(
        "gradient_finite_differences",
        worst <= 1e-5 && clipped > 0,
        format!("100 instances ({clipped} clipped rollouts), max relative error {worst:.2e}"),
    ))
}

/// Desk-scale scenario and config for the directional comparisons.
pub fn desk_setup() -> Result<(Scenario, TrainConfig)> {
    let scenario = generate_scenario(20, 3, 2.0, 8, 42)?;
    let config = TrainConfig {
        n_transforms: 3,
        group_size: 8,
        lr: 0.1,
        iterations: 200,
        seed: 42,
        ..Default::default()
    };
    Ok((scenario, config))
}

pub fn check_training_directions() -> Result<Vec<CheckResult>> {
    let (scenario, base) = desk_setup()?;
    let report = trainer::run_ablation_suite(&scenario, &base)?;
    let rows = report.final_rows();
    let row = |r: Regime| rows.iter().find(|x| x.regime == r).expect("all regimes run");
    let (grpo, ta, np) = (row(Regime::Grpo), row(Regime::TaGrpo), row(Regime::TaNoPooling));
    let ent = |r: &FinalRow| r.entropy_mean.unwrap_or(0.0);
    Ok(vec![
        CheckResult::advisory(
            "zero_grad_tail_ta_below_grpo",
            ta.zero_gradient_tail_mean < grpo.zero_gradient_tail_mean,
            format!(
                "last-50 mean zero-gradient fraction: ta_grpo {:.4}, grpo {:.4}, ta_no_pooling {:.4}",
                ta.zero_gradient_tail_mean, grpo.zero_gradient_tail_mean, np.zero_gradient_tail_mean
            ),
        ),
        CheckResult::advisory(
            "final_entropy_ta_vs_grpo",
            ent(ta) >= ent(grpo),
            format!("final mean answer entropy: ta_grpo {:.4}, grpo {:.4}", ent(ta), ent(grpo)),
        ),
    ])
}
