//! Fair and differentially private synthetic data for one-shot collaborative
//! learning.
//!
//! Each client turns its private training data into a synthetic dataset in
//! two stages, and the server trains one model on the union of what it
//! receives:
//!
//! 1. [`stage1`]: learn synthetic nonsensitive features so that a logistic
//!    model trained on them has small decision-boundary covariance with the
//!    sensitive attribute on the client's real data (bilevel penalty problem,
//!    hypergradients by implicit differentiation, Adam outer loop).
//! 2. [`stage2`]: re-synthesize the stage-1 data under (ε, δ)-differential
//!    privacy through a pluggable generator with an auditable ledger.
//! 3. [`harness`]: run clients concurrently, train and evaluate the server
//!    model, sweep the penalty weight and write report tables.
//!
//! Supporting modules: [`data`] (datasets, CSV I/O, splits), [`model`]
//! (linear classifier and logistic losses), [`optim`] (L-BFGS, Adam) and
//! [`fairness`] (accuracy, covariances, SPD/EOD).

pub mod data;
pub mod error;
pub mod fairness;
pub mod harness;
pub mod model;
pub mod optim;
pub mod rng;
pub mod stage1;
pub mod stage2;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use data::{DataPoint, Dataset, Schema, Stratum, StratumProportions};
pub use error::{Error, Result};
pub use fairness::{Disparity, FairnessReport};
pub use model::ModelParams;
pub use optim::{AdamConfig, InnerSolveConfig};
pub use stage1::{FairnessMode, PenaltyConfig, SyntheticDataset};
pub use stage2::{DpConfig, PrivacyLedger};

/// Short stable digest of a serializable configuration (first 16 hex digits
/// of SHA-256 over its JSON form).
pub fn config_digest<T: Serialize + ?Sized>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("configuration serializes");
    let digest = Sha256::digest(&json);
    hex::encode(&digest[..8])
}
