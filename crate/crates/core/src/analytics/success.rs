use super::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::policy::{self, Policy};
use crate::scenario::Scenario;

/// `sum_{(q,t)} w(q,t) * rho(q, T_t)`.
///
/// `weights` is indexed question-major over the scenario's contexts: entry
/// `i * (N + 1) + t` belongs to transform `t` of the `i`-th question.
pub fn aggregate_success(policy: &Policy, scenario: &Scenario, weights: &DiscreteDistribution) -> Result<f64> {
    let per_q = scenario.n_transforms() + 1;
    if weights.len() > scenario.n_contexts() {
        return Err(Error::param(format!(
            "{} weights for {} contexts",
            weights.len(),
            scenario.n_contexts()
        )));
    }
    let mut total = 0.0;
    for (i, q) in scenario.questions().iter().enumerate() {
        for t in 0..per_q {
            let w = *weights.probs().get(i * per_q + t).ok_or(Error::Coverage { qid: q.id(), tidx: t })?;
            if w > 0.0 {
                total += w * policy::success_rate(policy, q, t)?;
            }
        }
    }
    Ok(total)
}
