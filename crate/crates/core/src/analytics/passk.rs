use crate::error::{Error, Result};

/// `1 - (1 - rho)^k`, evaluated as `-expm1(k * ln_1p(-rho))` so tiny `rho`
/// with huge `k` keeps full precision.
pub fn pass_at_k_exact(rho: f64, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::param(format!("rho must lie in [0, 1], got {rho}")));
    }
    let v = -(k as f64 * (-rho).ln_1p()).exp_m1();
    Ok(if v == 0.0 { 0.0 } else { v.min(1.0) })
}

/// Unbiased Pass@k from `n` samples of which `c` are correct:
/// `1 - C(n-c, k) / C(n, k)`, as the product `prod_{i=n-c+1}^{n} (1 - k/i)`.
pub fn pass_at_k_estimator(n_samples: usize, n_correct: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    if k > n_samples {
        return Err(Error::param(format!("k = {k} exceeds n_samples = {n_samples}")));
    }
    if n_correct > n_samples {
        return Err(Error::param(format!(
            "n_correct = {n_correct} exceeds n_samples = {n_samples}"
        )));
    }
    if n_samples - n_correct < k {
        return Ok(1.0);
    }
    let all_wrong: f64 = (n_samples - n_correct + 1..=n_samples)
        .map(|i| 1.0 - k as f64 / i as f64)
        .product();
    Ok(1.0 - all_wrong)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_numbers_at_rho_point_three() {
        assert!((pass_at_k_exact(0.3, 1).unwrap() - 0.3).abs() < 1e-15);
        assert!((pass_at_k_exact(0.3, 5).unwrap() - 0.83193).abs() < 1e-12);
        assert!((pass_at_k_exact(0.3, 10).unwrap() - 0.9717524751).abs() < 1e-12);
    }

    #[test]
    fn boundaries() {
        for k in [1, 2, 7, 1000] {
            assert_eq!(pass_at_k_exact(0.0, k).unwrap(), 0.0);
            assert_eq!(pass_at_k_exact(1.0, k).unwrap(), 1.0);
        }
        assert!(pass_at_k_exact(0.3, 0).is_err());
        assert!(pass_at_k_exact(-0.1, 3).is_err());
    }

    #[test]
    fn tiny_rate_huge_k_is_accurate() {
        // 1 - (1 - 1e-9)^1e6 = 1 - exp(-a), a = -1e6 * ln(1 - 1e-9) = 1e-3 + 5e-13 + O(1e-22)
        let v = pass_at_k_exact(1e-9, 1_000_000).unwrap();
        let a: f64 = 1e-3 + 5e-13;
        let series = a - a * a / 2.0 + a.powi(3) / 6.0 - a.powi(4) / 24.0;
        assert!((v - series).abs() < 1e-17, "{v} vs {series}");
    }

    #[test]
    fn estimator_examples() {
        assert!((pass_at_k_estimator(4, 2, 2).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(pass_at_k_estimator(10, 0, 3).unwrap(), 0.0);
        assert_eq!(pass_at_k_estimator(10, 10, 3).unwrap(), 1.0);
        assert_eq!(pass_at_k_estimator(32, 8, 32).unwrap(), 1.0);
        assert!((pass_at_k_estimator(10, 3, 1).unwrap() - 0.3).abs() < 1e-15);
        assert!(pass_at_k_estimator(4, 2, 5).is_err());
        assert!(pass_at_k_estimator(4, 5, 2).is_err());
        assert!(pass_at_k_estimator(4, 2, 0).is_err());
    }
}
