//! Frozen-value checks for the batch losses. Expected numbers were
//! computed independently (closed-form, double precision) and pinned.

use vp_ddm::{consolidated_loss, cost_loss, mean_entropy, uniformity_loss, DdmError};

fn uniform_batch(rows: usize, width: usize) -> Vec<Vec<f64>> {
    vec![vec![1.0 / width as f64; width]; rows]
}

#[test]
fn uniformity_of_uniform_15_way_marginal_is_minus_log2_15() {
    let batch = uniform_batch(128, 15);
    let loss = uniformity_loss(&batch).unwrap();
    assert!(
        (loss - (-3.906_890_595_608_518_7)).abs() < 1e-12,
        "got {loss}"
    );
}

#[test]
fn uniformity_is_minimal_at_the_uniform_marginal() {
    let uniform = uniformity_loss(&uniform_batch(4, 15)).unwrap();
    let mut skewed_row = vec![1.0 / 15.0; 15];
    skewed_row[0] += 0.05;
    skewed_row[7] -= 0.05;
    let skewed = uniformity_loss(&vec![skewed_row; 4]).unwrap();
    assert!(skewed > uniform);
}

#[test]
fn uniformity_of_one_hot_marginal_is_zero() {
    let mut row = vec![0.0; 15];
    row[3] = 1.0;
    assert_eq!(uniformity_loss(&vec![row; 8]).unwrap(), 0.0);
}

#[test]
fn cost_of_one_hot_marginal_is_that_dialect_cost() {
    let costs: Vec<f64> = (1..=15).map(|k| 1000.0 * k as f64).collect();
    let mut row = vec![0.0; 15];
    row[0] = 1.0;
    let loss = cost_loss(&vec![row; 32], &costs).unwrap();
    assert!((loss - 1000.0).abs() < 1e-9, "got {loss}");
}

#[test]
fn cost_of_uniform_marginal_is_mean_cost() {
    let costs: Vec<f64> = (1..=15).map(|k| 1000.0 * k as f64).collect();
    let mean = costs.iter().sum::<f64>() / 15.0;
    let loss = cost_loss(&uniform_batch(5, 15), &costs).unwrap();
    assert!((loss - mean).abs() < 1e-9, "got {loss}, want {mean}");
}

/// Two asymmetric rows; marginal [0.375, 0.25, 0.375], costs [1, 2, 4].
fn mixed_batch() -> (Vec<Vec<f64>>, Vec<f64>) {
    (
        vec![vec![0.5, 0.25, 0.25], vec![0.25, 0.25, 0.5]],
        vec![1.0, 2.0, 4.0],
    )
}

#[test]
fn mixed_batch_frozen_values() {
    let (batch, costs) = mixed_batch();
    assert!((uniformity_loss(&batch).unwrap() - (-1.561_278_124_459_133)).abs() < 1e-12);
    assert!((cost_loss(&batch, &costs).unwrap() - 2.375).abs() < 1e-12);
    assert!((mean_entropy(&batch).unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn consolidated_blend_at_four_trade_off_points() {
    let (batch, costs) = mixed_batch();
    let expected = [
        (0.0, -1.561_278_124_459_133),
        (0.25, -0.577_208_593_344_349_8),
        (0.5, 0.406_860_937_770_433_53),
        (1.0, 2.375),
    ];
    for (trade_off, want) in expected {
        let got = consolidated_loss(&batch, &costs, trade_off).unwrap();
        assert!(
            (got - want).abs() < 1e-12,
            "a={trade_off}: got {got}, want {want}"
        );
    }
}

#[test]
fn consolidated_extremes_match_the_pure_losses() {
    let (batch, costs) = mixed_batch();
    assert_eq!(
        consolidated_loss(&batch, &costs, 0.0).unwrap(),
        uniformity_loss(&batch).unwrap()
    );
    assert_eq!(
        consolidated_loss(&batch, &costs, 1.0).unwrap(),
        cost_loss(&batch, &costs).unwrap()
    );
}

#[test]
fn zero_probability_slots_contribute_zero_not_nan() {
    let batch = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
    let loss = uniformity_loss(&batch).unwrap();
    assert!((loss - (-1.0)).abs() < 1e-12, "got {loss}");
    assert_eq!(mean_entropy(&batch).unwrap(), 0.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    let (batch, costs) = mixed_batch();
    assert!(matches!(
        uniformity_loss(&[]).unwrap_err(),
        DdmError::EmptyBatch
    ));
    assert!(matches!(
        mean_entropy(&[]).unwrap_err(),
        DdmError::EmptyBatch
    ));
    let ragged = vec![vec![0.5, 0.5], vec![1.0]];
    assert!(matches!(
        uniformity_loss(&ragged).unwrap_err(),
        DdmError::DimensionMismatch { want: 2, got: 1 }
    ));
    assert!(matches!(
        mean_entropy(&ragged).unwrap_err(),
        DdmError::DimensionMismatch { want: 2, got: 1 }
    ));
    assert!(matches!(
        cost_loss(&batch, &[1.0, 2.0]).unwrap_err(),
        DdmError::DimensionMismatch { want: 2, got: 3 }
    ));
    for bad in [-0.1, 1.5, f64::NAN] {
        assert!(matches!(
            consolidated_loss(&batch, &costs, bad).unwrap_err(),
            DdmError::InvalidTradeOff(_)
        ));
    }
}
