//! Closed-form quantities and their finite-sample estimators.

mod divergence;
mod diversity;
mod passk;
mod success;
mod zero_grad;

pub use divergence::{kl_chain_decompose, kl_divergence, pinsker_bound, JointDistribution, KlChain, PinskerBound};
pub use diversity::{diversity_metrics, DiversityMetrics};
pub use passk::{pass_at_k_estimator, pass_at_k_exact};
pub use success::aggregate_success;
pub use zero_grad::{
    verify_theorem1, zero_grad_prob_per_variant, zero_grad_prob_standard, zero_grad_prob_ta, TheoremCheck,
};

use crate::error::{Error, Result};

/// Per-transform success rates `rho_0..rho_N` of one question.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessProfile {
    rhos: Vec<f64>,
}

impl SuccessProfile {
    pub fn new(rhos: Vec<f64>) -> Result<Self> {
        if rhos.is_empty() {
            return Err(Error::param("success profile needs at least the identity transform"));
        }
        if let Some(r) = rhos.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::param(format!("success rate {r} outside [0, 1]")));
        }
        Ok(Self { rhos })
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    pub fn rho0(&self) -> f64 {
        self.rhos[0]
    }

    pub fn n_transforms(&self) -> usize {
        self.rhos.len() - 1
    }

    /// Mean success over all members of the group.
    pub fn pooled(&self) -> f64 {
        self.rhos.iter().sum::<f64>() / self.rhos.len() as f64
    }
}

/// Probability vector over a finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

/// Tolerance on `sum(p) = 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("distribution has empty support"));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::param(format!("probability {p} is negative or non-finite")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::param(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { probs })
    }

    /// Normalises nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::param("weights must be nonnegative with a positive finite sum"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("distribution has empty support"));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::param(format!("point mass at {at} outside support of size {n}")));
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `sum_i p_i * g(i)`.
    pub fn expect(&self, g: impl Fn(usize) -> f64) -> f64 {
        self.probs.iter().enumerate().map(|(i, p)| p * g(i)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_validation() {
        assert!(SuccessProfile::new(vec![]).is_err());
        assert!(SuccessProfile::new(vec![0.2, 1.1]).is_err());
        assert!(SuccessProfile::new(vec![0.2, f64::NAN]).is_err());
    }

    #[test]
    fn pooled_profile_examples() {
        let p = SuccessProfile::new(vec![0.4, 0.0, 0.0]).unwrap();
        assert!((p.pooled() - 0.4 / 3.0).abs() < 1e-15);
        assert!(p.pooled() >= 0.4 / 3.0 - 1e-15);
        let q = SuccessProfile::new(vec![0.2, 0.5]).unwrap();
        assert!((q.pooled() - 0.35).abs() < 1e-15);
        assert!(q.pooled() > q.rho0());
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![]).is_err());
        assert!(DiscreteDistribution::new(vec![0.1, 0.2, 0.7]).is_ok());
        assert_eq!(DiscreteDistribution::from_weights(vec![1.0, 3.0]).unwrap().probs(), &[0.25, 0.75]);
        assert!(DiscreteDistribution::point_mass(3, 3).is_err());
    }
}
