//! Server response verification: classify the *shape* of a reply with a
//! decision tree, then check its field values against what the request
//! actually asked for. A reply only passes when both agree with the
//! dialect the verifier expected.

mod features;
mod gini;
mod io;
mod tree;
mod verify;

pub use features::{extract_features, StructureFeatures, FEATURE_COUNT, MAX_FIELDS, MAX_PACKETS};
pub use gini::gini;
pub use io::TreeIoError;
pub use tree::{accuracy, train_tree, DecisionTree, Node, TrainParams};
pub use verify::{verify_response, RejectReason, ResponseOutcome, Verdict, VerifyError};

/// Errors from feature extraction and tree training.
#[derive(Debug, PartialEq, thiserror::Error)]
pub enum SrvError {
    #[error("response has {0} messages, beyond the encodable envelope")]
    TooManyPackets(usize),
    #[error("message has {0} fields, beyond the encodable envelope")]
    TooManyFields(usize),
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("class counts sum to zero")]
    EmptyCounts,
}
