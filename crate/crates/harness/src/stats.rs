//! Summary statistics for experiment reports.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{HarnessError, Result};

/// Pearson statistic `Σ (Oᵢ − E)²/E` against the uniform law.
pub fn chi_square_statistic(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum()
}

/// p-value of Pearson's χ² test of `counts` against the uniform law. Needs
/// two or more categories and an expected count of at least 5 per category.
pub fn chi_square_uniform(counts: &[u64]) -> Result<f64> {
    let k = counts.len();
    if k < 2 {
        return Err(HarnessError::TooFewCategories(k));
    }
    let total: u64 = counts.iter().sum();
    let needed = 5 * k as u64;
    if total < needed {
        return Err(HarnessError::Undersampled { total, categories: k, needed });
    }
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    Ok(dist.sf(chi_square_statistic(counts)))
}

/// Wilson score interval for a binomial proportion at `z` standard deviations.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 }).collect()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different supports");
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_counts_give_p_one() {
        assert!((chi_square_uniform(&[100, 100, 100, 100]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concentrated_counts_give_tiny_p() {
        assert!(chi_square_uniform(&[200, 0, 0, 0]).unwrap() < 1e-10);
    }

    #[test]
    fn known_statistic() {
        // (10−15)²/15 + (20−15)²/15 = 10/3 on 1 degree of freedom
        assert!((chi_square_statistic(&[10, 20]) - 10.0 / 3.0).abs() < 1e-12);
        assert!((chi_square_uniform(&[10, 20]).unwrap() - 0.067889154861829).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(chi_square_uniform(&[5]), Err(HarnessError::TooFewCategories(1))));
        assert!(matches!(chi_square_uniform(&[3, 3, 3]), Err(HarnessError::Undersampled { .. })));
    }

    #[test]
    fn wilson_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(90, 100, 1.96);
        assert!(lo < 0.9 && 0.9 < hi);
        assert!((lo - 0.8256).abs() < 1e-3 && (hi - 0.9448).abs() < 1e-3);
    }

    #[test]
    fn tv_of_disjoint_laws_is_one() {
        assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(total_variation(&normalize(&[3, 1]), &[0.75, 0.25]), 0.0);
    }
}
