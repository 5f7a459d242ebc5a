//! Advantage regimes for binary rewards.
//!
//! * standard: normalise one G-rollout row by its own mean and population std.
//! * pooled: normalise every entry of the `(N+1) x G` group by the group-wide
//!   mean and population std.
//! * per-variant: the standard rule applied row by row (the no-pooling ablation).
//! * Bernoulli-whitened: `(r - rho) / sqrt(rho (1 - rho) + eps)` with an
//!   externally supplied pooled success rate.
//!
//! For a binary sample with mean `m` the population std is exactly
//! `sqrt(m (1 - m))`, so pooled normalisation is Bernoulli whitening with the
//! plug-in estimate of `rho`.
//!
//! An entry whose reward equals the normaliser's mean gets advantage exactly 0,
//! whatever `eps` is; uniform rows and groups therefore produce all-zero
//! advantages even with `eps = 0`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Advantage-normalisation constant used when none is given.
pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdvantageRegime {
    Standard,
    Pooled,
    PerVariant,
    BernoulliWhitened,
}

/// The `(N+1) x G` binary rewards of one question group.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardGroup {
    rows: Vec<Vec<u8>>,
    epsilon: f64,
}

impl RewardGroup {
    pub fn new(rows: Vec<Vec<u8>>, epsilon: f64) -> Result<Self> {
        let g = rows.first().map(Vec::len).unwrap_or(0);
        if g == 0 {
            return Err(Error::param("reward group needs at least one nonempty row"));
        }
        if rows.iter().any(|r| r.len() != g) {
            return Err(Error::param("reward group rows differ in length"));
        }
        if rows.iter().flatten().any(|&r| r > 1) {
            return Err(Error::param("rewards must be 0 or 1"));
        }
        check_epsilon(epsilon)?;
        Ok(Self { rows, epsilon })
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn group_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn mu(&self) -> f64 {
        mean(self.rows.iter().flatten())
    }

    /// Population standard deviation over every entry.
    pub fn sigma(&self) -> f64 {
        pop_std(self.rows.iter().flatten(), self.mu())
    }

    /// True when every reward in the group is the same.
    pub fn is_uniform(&self) -> bool {
        let first = self.rows[0][0];
        self.rows.iter().flatten().all(|&r| r == first)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvantageSet {
    pub values: Vec<Vec<f64>>,
    pub regime: AdvantageRegime,
}

impl AdvantageSet {
    pub fn is_all_zero(&self) -> bool {
        self.values.iter().flatten().all(|&a| a == 0.0)
    }

    pub fn flat(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::param(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    Ok(())
}

fn mean<'a>(rewards: impl Iterator<Item = &'a u8>) -> f64 {
    let (sum, n) = rewards.fold((0u64, 0u64), |(s, n), &r| (s + u64::from(r), n + 1));
    sum as f64 / n as f64
}

fn pop_std<'a>(rewards: impl Iterator<Item = &'a u8>, mu: f64) -> f64 {
    let (ss, n) = rewards.fold((0.0, 0u64), |(ss, n), &r| {
        let d = f64::from(r) - mu;
        (ss + d * d, n + 1)
    });
    (ss / n as f64).sqrt()
}

fn normalise(reward: u8, mu: f64, scale: f64) -> f64 {
    let diff = f64::from(reward) - mu;
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Within-row normalisation of one question's G rewards.
pub fn advantages_standard(rewards: &[u8], epsilon: f64) -> Result<Vec<f64>> {
    if rewards.is_empty() {
        return Err(Error::param("reward row is empty"));
    }
    if rewards.iter().any(|&r| r > 1) {
        return Err(Error::param("rewards must be 0 or 1"));
    }
    check_epsilon(epsilon)?;
    let mu = mean(rewards.iter());
    let scale = pop_std(rewards.iter(), mu) + epsilon;
    Ok(rewards.iter().map(|&r| normalise(r, mu, scale)).collect())
}

/// Group-wide normalisation across all `(N+1) x G` rewards.
pub fn advantages_pooled(group: &RewardGroup) -> AdvantageSet {
    let mu = group.mu();
    let scale = group.sigma() + group.epsilon;
    AdvantageSet {
        values: group
            .rows
            .iter()
            .map(|row| row.iter().map(|&r| normalise(r, mu, scale)).collect())
            .collect(),
        regime: AdvantageRegime::Pooled,
    }
}

/// Row-by-row standard normalisation; transforms share data but not statistics.
pub fn advantages_per_variant(group: &RewardGroup) -> AdvantageSet {
    AdvantageSet {
        values: group
            .rows
            .iter()
            .map(|row| advantages_standard(row, group.epsilon).expect("rows validated by RewardGroup"))
            .collect(),
        regime: AdvantageRegime::PerVariant,
    }
}

/// Whitening by the Bernoulli variance of the pooled reward.
pub fn advantages_bernoulli(rewards: &[u8], rho_pooled: f64, epsilon: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rho_pooled) {
        return Err(Error::param(format!("rho must lie in [0, 1], got {rho_pooled}")));
    }
    if rewards.iter().any(|&r| r > 1) {
        return Err(Error::param("rewards must be 0 or 1"));
    }
    check_epsilon(epsilon)?;
    let scale = (rho_pooled * (1.0 - rho_pooled) + epsilon).sqrt();
    rewards
        .iter()
        .map(|&r| {
            let a = normalise(r, rho_pooled, scale);
            if a.is_finite() {
                Ok(a)
            } else {
                Err(Error::param(format!(
                    "reward {r} is impossible under rho = {rho_pooled} with epsilon = 0"
                )))
            }
        })
        .collect()
}

/// [`advantages_bernoulli`] applied to every row of a group, as an [`AdvantageSet`].
pub fn advantages_bernoulli_group(group: &RewardGroup, rho_pooled: f64) -> Result<AdvantageSet> {
    Ok(AdvantageSet {
        values: group
            .rows
            .iter()
            .map(|row| advantages_bernoulli(row, rho_pooled, group.epsilon))
            .collect::<Result<_>>()?,
        regime: AdvantageRegime::BernoulliWhitened,
    })
}
