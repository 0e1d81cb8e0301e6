//! Full response verification: structural classification by the decision
//! tree, exact shape comparison against the expected dialect, then
//! per-field content checks against the originating request.

use vp_dialect::{
    DialectId, DialectRegistry, FieldSemantic, FieldValue, RegistryError, RequestContext,
    ResponseStructure,
};

use crate::features::extract_features;
use crate::tree::DecisionTree;

/// What an accepted response asserts about the requested file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseOutcome {
    FileFound,
    FileMissing,
}

/// Why a response was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// The reply's shape is not the expected dialect's.
    DialectMismatch,
    /// Right shape, wrong values for this request.
    ContentMismatch,
}

/// Verification result. An accepted reply also reports the decoded file
/// outcome, so the caller knows whether a transfer follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept(ResponseOutcome),
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept(_))
    }
}

/// Errors that are caller bugs rather than peer misbehavior.
#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    UnknownDialect(#[from] RegistryError),
}

/// Verifies a parsed reply against the dialect both endpoints derived for
/// this request.
///
/// A reply passes only if (1) the tree classifies its shape as the
/// expected dialect, (2) its signature equals the expected schema exactly,
/// and (3) every field value is consistent with the request context. The
/// tree is the deployed classifier; the signature comparison closes the
/// gap for shapes outside the training distribution, which by definition
/// no genuine peer produces.
pub fn verify_response(
    tree: &DecisionTree,
    registry: &DialectRegistry,
    structure: &ResponseStructure,
    expected: DialectId,
    ctx: &RequestContext,
) -> Result<Verdict, VerifyError> {
    let schema = registry.get(expected)?.schema();

    let Ok(features) = extract_features(structure) else {
        return Ok(Verdict::Reject(RejectReason::DialectMismatch));
    };
    if tree.predict(&features) != expected {
        return Ok(Verdict::Reject(RejectReason::DialectMismatch));
    }
    if structure.signature() != schema.signature() {
        return Ok(Verdict::Reject(RejectReason::DialectMismatch));
    }

    // Signatures match, so schema fields and received fields zip exactly.
    let fields: Vec<(FieldSemantic, &FieldValue)> = schema
        .packets()
        .iter()
        .zip(structure.packets())
        .flat_map(|(ps, pv)| ps.fields().iter().copied().zip(pv.iter()))
        .collect();

    let Some(outcome) = detect_outcome(&fields) else {
        return Ok(Verdict::Reject(RejectReason::ContentMismatch));
    };
    if !fields.iter().all(|&(s, f)| field_ok(s, f, outcome, ctx)) {
        return Ok(Verdict::Reject(RejectReason::ContentMismatch));
    }
    if !cross_field_ok(&fields, outcome, ctx) {
        return Ok(Verdict::Reject(RejectReason::ContentMismatch));
    }
    Ok(Verdict::Accept(outcome))
}

/// Decodes the reply's found/missing claim. Dialects with a prose or
/// numeral outcome field state it directly (the inverse-speaking dialect
/// states the opposite). The rest imply it by the sign of a size field:
/// genuine sizes are non-negative, the missing-file sentinel is negative.
fn detect_outcome(fields: &[(FieldSemantic, &FieldValue)]) -> Option<ResponseOutcome> {
    use FieldSemantic::*;

    for &(semantic, field) in fields {
        match semantic {
            ExistsText => {
                return match field.text.as_str() {
                    "File exists" => Some(ResponseOutcome::FileFound),
                    "File does not exist" => Some(ResponseOutcome::FileMissing),
                    _ => None,
                }
            }
            ExistsTextInverse => {
                return match field.text.as_str() {
                    "File does not exist" => Some(ResponseOutcome::FileFound),
                    "File exists" => Some(ResponseOutcome::FileMissing),
                    _ => None,
                }
            }
            ExistsNumeral => {
                return match field.as_int()? {
                    1 => Some(ResponseOutcome::FileFound),
                    0 => Some(ResponseOutcome::FileMissing),
                    _ => None,
                }
            }
            _ => {}
        }
    }
    for &(semantic, field) in fields {
        if matches!(semantic, FileSize | FileSizeHalf | FileSizeRemainder) {
            let value = field.as_int()?;
            return Some(if value < 0 {
                ResponseOutcome::FileMissing
            } else {
                ResponseOutcome::FileFound
            });
        }
    }
    None
}

fn field_ok(
    semantic: FieldSemantic,
    field: &FieldValue,
    outcome: ResponseOutcome,
    ctx: &RequestContext,
) -> bool {
    use FieldSemantic::*;

    let found = outcome == ResponseOutcome::FileFound;
    match semantic {
        ExistsText => field.text == if found { "File exists" } else { "File does not exist" },
        ExistsTextInverse => {
            field.text == if found { "File does not exist" } else { "File exists" }
        }
        ExistsNumeral => field.as_int() == Some(i128::from(found)),
        FilenameText => field.text == ctx.filename,
        CommandText => field.text == ctx.command,
        FilenameLen => field.as_int() == Some(ctx.filename.len() as i128),
        CommandLen => field.as_int() == Some(ctx.command.len() as i128),
        ClosedNotice => field.text == "Connection Closed",
        FileSize | FileSizeHalf | FileSizeRemainder => {
            let Some(value) = field.as_int() else {
                return false;
            };
            if !found {
                return value == -1;
            }
            match (semantic, ctx.file_size) {
                (FileSize, Some(size)) => value == i128::from(size),
                (FileSizeHalf, Some(size)) => value == i128::from(size / 2),
                (FileSizeRemainder, Some(size)) => value == i128::from(size - size / 2),
                // Size unknown to the verifier: sanity only, plus the
                // cross-field rules below.
                (_, None) => value >= 0,
                _ => unreachable!("match covers all size semantics"),
            }
        }
        FileSizeNegated => {
            let Some(value) = field.as_int() else {
                return false;
            };
            if !found {
                return value == 1;
            }
            match ctx.file_size {
                Some(size) => value == -i128::from(size),
                None => value <= 0,
            }
        }
    }
}

/// Consistency between size fields when the verifier cannot pin the exact
/// size: repeated sizes must agree, and a split size's halves must differ
/// by at most the rounding unit, larger half second.
fn cross_field_ok(
    fields: &[(FieldSemantic, &FieldValue)],
    outcome: ResponseOutcome,
    ctx: &RequestContext,
) -> bool {
    use FieldSemantic::*;

    if outcome == ResponseOutcome::FileMissing || ctx.file_size.is_some() {
        return true; // exact per-field checks already decided
    }
    let ints = |want: FieldSemantic| {
        fields
            .iter()
            .filter(move |(s, _)| *s == want)
            .filter_map(|(_, f)| f.as_int())
    };

    let sizes: Vec<i128> = ints(FileSize).collect();
    if sizes.windows(2).any(|w| w[0] != w[1]) {
        return false;
    }
    let halves: Vec<i128> = ints(FileSizeHalf).collect();
    let remainders: Vec<i128> = ints(FileSizeRemainder).collect();
    if let (Some(&half), Some(&remainder)) = (halves.first(), remainders.first()) {
        let diff = remainder - half;
        if !(0..=1).contains(&diff) {
            return false;
        }
    }
    true
}
