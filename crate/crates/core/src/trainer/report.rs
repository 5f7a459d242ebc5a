//! Text outputs: JSON-lines records and CSV summaries (`.` decimals, LF
//! endings, shortest round-trip float formatting).

use std::fmt::Write;

use super::{AblationReport, Regime, RunRecord};
use crate::error::Result;

pub fn records_jsonl(records: &[RunRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

fn header(k_values: &[usize]) -> String {
    let mut h = String::from("iteration,regime,zero_grad_frac,train_pass");
    for k in k_values {
        let _ = write!(h, ",pass_at_{k}");
    }
    h.push_str(",distinct_answers_mean,entropy_mean,disagreement_mean\n");
    h
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row(out: &mut String, regime: Regime, r: &RunRecord, k_values: &[usize]) {
    let _ = write!(
        out,
        "{},{},{},{}",
        r.iteration, regime, r.zero_gradient_fraction, r.train_pass_rate
    );
    for k in k_values {
        let _ = write!(out, ",{}", opt(r.eval_pass_at_k.get(k).copied()));
    }
    let d = r.diversity;
    let _ = writeln!(
        out,
        ",{},{},{}",
        opt(d.map(|d| d.distinct_answers_mean)),
        opt(d.map(|d| d.entropy_mean)),
        opt(d.map(|d| d.disagreement_mean))
    );
}

/// One row per iteration.
pub fn summary_csv(regime: Regime, records: &[RunRecord], k_values: &[usize]) -> String {
    let mut out = header(k_values);
    for r in records {
        row(&mut out, regime, r, k_values);
    }
    out
}

/// One row per (regime, iteration), then a blank line and a block of
/// final-iteration comparisons.
pub fn ablation_csv(report: &AblationReport, k_values: &[usize]) -> String {
    let mut out = header(k_values);
    for run in &report.runs {
        for r in &run.records {
            row(&mut out, run.regime, r, k_values);
        }
    }
    out.push('\n');
    out.push_str("final,regime,zero_grad_frac,zero_grad_frac_tail_mean,train_pass,pooled_success");
    for k in k_values {
        let _ = write!(out, ",pass_at_{k}");
    }
    out.push_str(",entropy_mean\n");
    for f in report.final_rows() {
        let _ = write!(
            out,
            "final,{},{},{},{},{}",
            f.regime, f.zero_gradient_fraction, f.zero_gradient_tail_mean, f.train_pass_rate, f.pooled_success_mean
        );
        for k in k_values {
            let v = f.eval_pass_at_k.iter().find(|(kk, _)| kk == k).map(|(_, v)| *v);
            let _ = write!(out, ",{}", opt(v));
        }
        let _ = writeln!(out, ",{}", opt(f.entropy_mean));
    }
    out
}
