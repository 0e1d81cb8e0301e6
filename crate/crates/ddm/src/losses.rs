//! The unsupervised batch losses, in the report-friendly form: costs enter
//! unscaled, values are in bits.
//!
//! For a batch of probability vectors `p_b` with batch marginal
//! `P̄ = mean_b(p_b)`:
//!   - uniformity loss: `Σ_i P̄_i log2 P̄_i` (negative marginal entropy;
//!     minimal when the marginal is uniform),
//!   - cost loss: `Σ_i P̄_i · C_i` (expected dialect cost),
//!   - consolidated: `a · cost + (1 − a) · uniformity`,
//!   - mean entropy: `mean_b(−Σ_i p_bi log2 p_bi)` (per-sample confidence;
//!     a regularizer, not part of the consolidated loss itself).

use crate::DdmError;

fn batch_marginal(batch: &[Vec<f64>]) -> Result<Vec<f64>, DdmError> {
    let first = batch.first().ok_or(DdmError::EmptyBatch)?;
    let width = first.len();
    let mut marginal = vec![0.0; width];
    for row in batch {
        if row.len() != width {
            return Err(DdmError::DimensionMismatch {
                want: width,
                got: row.len(),
            });
        }
        for (slot, &p) in marginal.iter_mut().zip(row) {
            *slot += p;
        }
    }
    let scale = 1.0 / batch.len() as f64;
    for slot in &mut marginal {
        *slot *= scale;
    }
    Ok(marginal)
}

/// `x · log2(x)` with the measure-zero convention `0 · log2(0) = 0`.
fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Negative entropy of the batch marginal: `Σ P̄ log2 P̄`.
pub fn uniformity_loss(batch: &[Vec<f64>]) -> Result<f64, DdmError> {
    Ok(batch_marginal(batch)?.into_iter().map(xlog2x).sum())
}

/// Expected dialect cost under the batch marginal: `Σ P̄_i · C_i`.
pub fn cost_loss(batch: &[Vec<f64>], costs: &[f64]) -> Result<f64, DdmError> {
    let marginal = batch_marginal(batch)?;
    if marginal.len() != costs.len() {
        return Err(DdmError::DimensionMismatch {
            want: costs.len(),
            got: marginal.len(),
        });
    }
    Ok(marginal.iter().zip(costs).map(|(&p, &c)| p * c).sum())
}

/// The blended objective: `a · cost_loss + (1 − a) · uniformity_loss`.
pub fn consolidated_loss(batch: &[Vec<f64>], costs: &[f64], trade_off: f64) -> Result<f64, DdmError> {
    if !(0.0..=1.0).contains(&trade_off) {
        return Err(DdmError::InvalidTradeOff(trade_off));
    }
    Ok(trade_off * cost_loss(batch, costs)? + (1.0 - trade_off) * uniformity_loss(batch)?)
}

/// Mean per-sample Shannon entropy in bits.
pub fn mean_entropy(batch: &[Vec<f64>]) -> Result<f64, DdmError> {
    let first = batch.first().ok_or(DdmError::EmptyBatch)?;
    let width = first.len();
    let mut total = 0.0;
    for row in batch {
        if row.len() != width {
            return Err(DdmError::DimensionMismatch {
                want: width,
                got: row.len(),
            });
        }
        total -= row.iter().copied().map(xlog2x).sum::<f64>();
    }
    Ok(total / batch.len() as f64)
}
