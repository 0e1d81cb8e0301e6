//! Fixed-width numeric encoding of a request string.

/// Model input width. Longer requests are truncated, shorter ones padded
/// with zeros.
pub const INPUT_DIM: usize = 100;

/// One encoded request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestVector(pub [f32; INPUT_DIM]);

/// Encodes a request: one slot per byte, scaled to `[0, 1]` by 1/255.
/// Both endpoints run this on the identical request string, so the
/// encoding must stay byte-exact — no trimming, no case folding.
pub fn vectorize_request(request: &str) -> RequestVector {
    let mut out = [0.0f32; INPUT_DIM];
    for (slot, &byte) in out.iter_mut().zip(request.as_bytes()) {
        *slot = f32::from(byte) / 255.0;
    }
    RequestVector(out)
}
