//! The deployed `f32` model and its inference path.
//!
//! Inference is hand-written with a fixed accumulation order on purpose:
//! cross-process bit-determinism is a correctness requirement here (both
//! endpoints must derive the same dialect), so nothing in this path may
//! reassociate floating-point sums or vary with build flags.

use vp_dialect::DialectId;

use crate::vectorize::{vectorize_request, RequestVector, INPUT_DIM};
use crate::HIDDEN_DIM;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseLayer {
    /// Row-major `out_dim × in_dim`.
    pub(crate) weights: Vec<f32>,
    pub(crate) bias: Vec<f32>,
}

/// A feed-forward classifier `INPUT_DIM → 128 → 128 → M` with relu hidden
/// activations and a softmax head over `M` dialects.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) dims: Vec<usize>,
    pub(crate) layers: Vec<DenseLayer>,
}

impl MlpModel {
    /// An all-zero model: every request maps to a uniform distribution,
    /// and prediction ties resolve to the first dialect.
    pub fn zeros(output_dim: usize) -> Self {
        let dims = vec![INPUT_DIM, HIDDEN_DIM, HIDDEN_DIM, output_dim];
        let layers = dims
            .windows(2)
            .map(|pair| DenseLayer {
                weights: vec![0.0; pair[0] * pair[1]],
                bias: vec![0.0; pair[1]],
            })
            .collect();
        Self { dims, layers }
    }

    pub(crate) fn from_parts(dims: Vec<usize>, layers: Vec<DenseLayer>) -> Self {
        Self { dims, layers }
    }

    /// Number of dialects the model chooses between.
    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("at least two dims")
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    /// Full forward pass to a probability vector (sums to 1).
    pub fn forward(&self, input: &RequestVector) -> Vec<f32> {
        debug_assert_eq!(self.input_dim(), INPUT_DIM);
        let mut activations: Vec<f32> = input.0.to_vec();
        let last = self.layers.len() - 1;
        for (index, layer) in self.layers.iter().enumerate() {
            let in_dim = self.dims[index];
            let out_dim = self.dims[index + 1];
            let mut next = vec![0.0f32; out_dim];
            for (o, slot) in next.iter_mut().enumerate() {
                let row = &layer.weights[o * in_dim..(o + 1) * in_dim];
                let mut acc = layer.bias[o];
                for (&w, &x) in row.iter().zip(&activations) {
                    acc += w * x;
                }
                *slot = acc;
            }
            if index < last {
                for value in &mut next {
                    *value = value.max(0.0);
                }
            } else {
                softmax_in_place(&mut next);
            }
            activations = next;
        }
        activations
    }

    /// Maps a request to its dialect: argmax of the forward pass, ties to
    /// the lowest id.
    pub fn predict_dialect(&self, request: &str) -> DialectId {
        let probabilities = self.forward(&vectorize_request(request));
        let mut best = 0usize;
        for (index, &p) in probabilities.iter().enumerate() {
            if p > probabilities[best] {
                best = index;
            }
        }
        DialectId::from_index(best)
    }
}

/// Numerically stabilized softmax: subtract the row max before
/// exponentiating.
fn softmax_in_place(logits: &mut [f32]) {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut total = 0.0f32;
    for value in logits.iter_mut() {
        *value = (*value - max).exp();
        total += *value;
    }
    for value in logits.iter_mut() {
        *value /= total;
    }
}
