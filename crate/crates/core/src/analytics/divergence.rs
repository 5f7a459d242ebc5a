//! KL divergence, its chain rule over (transform, question) joints, and the
//! Pinsker lower bound on test success.

use serde::Serialize;

use super::DiscreteDistribution;
use crate::error::{Error, Result};

fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        total += pi * (pi / qi).ln();
    }
    // rounding can leave a tiny negative value when p ~ q
    total.max(0.0)
}

/// `KL(p || q) = sum_i p_i ln(p_i / q_i)` with `0 ln 0 = 0`; `+inf` when `p` is
/// not absolutely continuous with respect to `q`.
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::param(format!(
            "support sizes differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(kl_slices(p.probs(), q.probs()))
}

/// Distribution over `(t, q)` pairs stored row-major, one row per `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    flat: DiscreteDistribution,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || probs.len() != rows * cols {
            return Err(Error::param(format!(
                "joint of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                probs.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            flat: DiscreteDistribution::new(probs)?,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn flat(&self) -> &DiscreteDistribution {
        &self.flat
    }

    fn row(&self, t: usize) -> &[f64] {
        &self.flat.probs()[t * self.cols..(t + 1) * self.cols]
    }

    /// Marginal over `t`.
    pub fn marginal(&self) -> Vec<f64> {
        (0..self.rows).map(|t| self.row(t).iter().sum()).collect()
    }

    /// `P(q | t)`, or `None` when `P(t) = 0`.
    pub fn conditional(&self, t: usize) -> Option<Vec<f64>> {
        let row = self.row(t);
        let mass: f64 = row.iter().sum();
        (mass > 0.0).then(|| row.iter().map(|p| p / mass).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlChain {
    pub marginal_kl: f64,
    pub expected_conditional_kl: f64,
    pub total: f64,
}

/// `KL(P(t,q) || Q(t,q)) = KL(P(t) || Q(t)) + E_{t~P} KL(P(q|t) || Q(q|t))`.
pub fn kl_chain_decompose(p: &JointDistribution, q: &JointDistribution) -> Result<KlChain> {
    if p.shape() != q.shape() {
        return Err(Error::param(format!(
            "joint shapes differ: {:?} vs {:?}",
            p.shape(),
            q.shape()
        )));
    }
    let pm = p.marginal();
    let qm = q.marginal();
    let marginal_kl = kl_slices(&pm, &qm);
    let mut expected_conditional_kl = 0.0;
    for (t, &pt) in pm.iter().enumerate() {
        let Some(pc) = p.conditional(t) else { continue };
        match q.conditional(t) {
            Some(qc) => expected_conditional_kl += pt * kl_slices(&pc, &qc),
            None => {
                expected_conditional_kl = f64::INFINITY;
                break;
            }
        }
    }
    Ok(KlChain {
        marginal_kl,
        expected_conditional_kl,
        total: marginal_kl + expected_conditional_kl,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinskerBound {
    /// `max(0, rho_tr - sqrt(2 kl))`.
    pub bound: f64,
    /// `rho_tr - sqrt(2 kl)`, possibly negative or `-inf`.
    pub unclamped: f64,
}

/// Lower bound on test success from train success and `KL(P_te || P_tr)`.
pub fn pinsker_bound(rho_tr: f64, kl: f64) -> Result<PinskerBound> {
    if !(0.0..=1.0).contains(&rho_tr) {
        return Err(Error::param(format!("rho_tr must lie in [0, 1], got {rho_tr}")));
    }
    if kl.is_nan() || kl < 0.0 {
        return Err(Error::param(format!("kl must be >= 0, got {kl}")));
    }
    let unclamped = rho_tr - (2.0 * kl).sqrt();
    Ok(PinskerBound {
        bound: unclamped.max(0.0),
        unclamped,
    })
}
