//! Gini impurity over class counts.

use crate::SrvError;

/// `1 - Σ (cᵢ / n)²` for class counts `cᵢ` summing to `n`.
pub fn gini(class_counts: &[u64]) -> Result<f64, SrvError> {
    let total: u64 = class_counts.iter().sum();
    if total == 0 {
        return Err(SrvError::EmptyCounts);
    }
    let n = total as f64;
    let sum_sq: f64 = class_counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum();
    Ok(1.0 - sum_sq)
}
