use serde::Serialize;

use super::{run_training, Regime, RunRecord, TrainConfig};
use crate::error::Result;
use crate::policy::Policy;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeRun {
    pub regime: Regime,
    pub records: Vec<RunRecord>,
    pub policy: Policy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub runs: Vec<RegimeRun>,
}

/// Last-iteration comparison for one regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalRow {
    pub regime: Regime,
    pub zero_gradient_fraction: f64,
    /// Mean zero-gradient fraction over the trailing window.
    pub zero_gradient_tail_mean: f64,
    pub train_pass_rate: f64,
    pub pooled_success_mean: f64,
    pub eval_pass_at_k: Vec<(usize, f64)>,
    pub entropy_mean: Option<f64>,
}

/// Iterations averaged by [`AblationReport::final_rows`].
pub const TAIL_WINDOW: usize = 50;

impl AblationReport {
    pub fn run(&self, regime: Regime) -> Option<&RegimeRun> {
        self.runs.iter().find(|r| r.regime == regime)
    }

    pub fn final_rows(&self) -> Vec<FinalRow> {
        self.runs
            .iter()
            .filter_map(|run| {
                let last = run.records.last()?;
                let tail = &run.records[run.records.len().saturating_sub(TAIL_WINDOW)..];
                Some(FinalRow {
                    regime: run.regime,
                    zero_gradient_fraction: last.zero_gradient_fraction,
                    zero_gradient_tail_mean: tail.iter().map(|r| r.zero_gradient_fraction).sum::<f64>()
                        / tail.len() as f64,
                    train_pass_rate: last.train_pass_rate,
                    pooled_success_mean: last.pooled_success_mean,
                    eval_pass_at_k: last.eval_pass_at_k.iter().map(|(&k, &v)| (k, v)).collect(),
                    entropy_mean: last.diversity.map(|d| d.entropy_mean),
                })
            })
            .collect()
    }
}

/// Trains `grpo`, `ta_grpo` and `ta_no_pooling` on one scenario with the same
/// seed. `base.n_transforms` applies to both transform regimes.
pub fn run_ablation_suite(scenario: &Scenario, base: &TrainConfig) -> Result<AblationReport> {
    let runs = Regime::ALL
        .iter()
        .map(|&regime| {
            let run = run_training(scenario, &base.with_regime(regime))?;
            Ok(RegimeRun {
                regime,
                records: run.records,
                policy: run.policy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationReport { runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::generate_scenario;

    #[test]
    fn zero_transforms_give_three_identical_runs() {
        let s = generate_scenario(4, 2, 2.0, 5, 8).unwrap();
        let base = TrainConfig {
            n_transforms: 0,
            lr: 0.5,
            iterations: 4,
            eval_k: vec![1, 2],
            eval_samples: 4,
            ..Default::default()
        };
        let rep = run_ablation_suite(&s, &base).unwrap();
        assert_eq!(rep.runs.len(), 3);
        assert_eq!(rep.runs[0].records, rep.runs[1].records);
        assert_eq!(rep.runs[0].records, rep.runs[2].records);
        assert_eq!(rep.runs[0].policy, rep.runs[2].policy);
        let rows = rep.final_rows();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].zero_gradient_tail_mean, rows[1].zero_gradient_tail_mean);
    }
}
