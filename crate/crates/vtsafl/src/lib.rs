//! Verifiable threshold secure aggregation for federated learning.
//!
//! The crate implements a partial-decryption-verifiable threshold
//! multi-client functional encryption (VTMCFE) scheme for inner products
//! and a desk-scale simulator of the surrounding aggregation protocol:
//!
//! * [`group`] — prime-order group abstraction with hash-to-group and
//!   hash-to-scalar, plus the default MODP backend.
//! * [`hlr_mss`] — multi-secret sharing from a homogeneous linear
//!   recursion with a single root of multiplicity `t`.
//! * [`dleq`] — non-interactive multi-base discrete-log equality proofs.
//! * [`dlog`] — baby-step giant-step recovery of the bounded aggregate.
//! * [`vtmcfe`] — the six-algorithm scheme (setup, key-share generation,
//!   labeled encryption, partial decryption with proof, verification,
//!   threshold combination).
//! * [`fl_sim`] — the federated-learning round simulator with
//!   configurable adversarial aggregators.
//! * [`cli`] — the `simulate` / `bench` / `sizes` command implementations.

pub mod cli;
pub mod dleq;
pub mod dlog;
pub mod field;
pub mod fl_sim;
pub mod group;
pub mod hlr_mss;
pub mod vtmcfe;

use thiserror::Error;

/// Default production group: 2048-bit MODP with a 256-bit prime-order subgroup.
pub type DefaultGroup = group::ModpGroup;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("threshold error: expected {expected} shares, got {got}")]
    Threshold { expected: usize, got: usize },

    #[error("malformed proof: {0}")]
    MalformedProof(String),

    #[error("proof rejected")]
    ProofRejected,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("insufficient accepted shares: needed {needed}, got {got}")]
    InsufficientShares { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
