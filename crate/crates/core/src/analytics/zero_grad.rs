//! Probability that a question's whole group gets identical rewards, and so
//! contributes no gradient, under each advantage regime.

use serde::Serialize;

use super::SuccessProfile;
use crate::error::{Error, Result};

fn check(rho: f64, group_size: usize) -> Result<i32> {
    if group_size == 0 {
        return Err(Error::param("group size must be >= 1"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::param(format!("rho must lie in [0, 1], got {rho}")));
    }
    i32::try_from(group_size).map_err(|_| Error::param(format!("group size {group_size} too large")))
}

/// `rho0^G + (1 - rho0)^G`. A single rollout is always uniform, so `G = 1` gives 1.
pub fn zero_grad_prob_standard(rho0: f64, group_size: usize) -> Result<f64> {
    let g = check(rho0, group_size)?;
    Ok(rho0.powi(g) + (1.0 - rho0).powi(g))
}

/// `prod_i rho_i^G + prod_i (1 - rho_i)^G` over all `N + 1` members.
pub fn zero_grad_prob_ta(profile: &SuccessProfile, group_size: usize) -> Result<f64> {
    let g = check(profile.rho0(), group_size)?;
    let all_right: f64 = profile.rhos().iter().map(|r| r.powi(g)).product();
    let all_wrong: f64 = profile.rhos().iter().map(|r| (1.0 - r).powi(g)).product();
    Ok(all_right + all_wrong)
}

/// `prod_i (rho_i^G + (1 - rho_i)^G)`: every row uniform on its own, which is
/// when per-variant normalisation yields no signal.
pub fn zero_grad_prob_per_variant(profile: &SuccessProfile, group_size: usize) -> Result<f64> {
    let g = check(profile.rho0(), group_size)?;
    Ok(profile
        .rhos()
        .iter()
        .map(|r| r.powi(g) + (1.0 - r).powi(g))
        .product())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub ta: f64,
    pub std: f64,
    /// `ta <= std`.
    pub holds: bool,
    /// `ta < std`.
    pub strict: bool,
    /// Some transform is weakly harder and some weakly easier than the
    /// identity (vacuously true with no transforms).
    pub premise: bool,
    /// Some transform is strictly harder and some strictly easier.
    pub strict_premise: bool,
}

/// Evaluates both zero-gradient closed forms and compares them.
pub fn verify_theorem1(profile: &SuccessProfile, group_size: usize) -> Result<TheoremCheck> {
    let ta = zero_grad_prob_ta(profile, group_size)?;
    let std = zero_grad_prob_standard(profile.rho0(), group_size)?;
    let rho0 = profile.rho0();
    let others = &profile.rhos()[1..];
    let premise = others.is_empty()
        || (others.iter().any(|&r| r <= rho0) && others.iter().any(|&r| r >= rho0));
    let strict_premise = others.iter().any(|&r| r < rho0) && others.iter().any(|&r| r > rho0);
    Ok(TheoremCheck {
        ta,
        std,
        holds: ta <= std,
        strict: ta < std,
        premise,
        strict_premise,
    })
}
