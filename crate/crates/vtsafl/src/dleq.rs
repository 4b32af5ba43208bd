//! Non-interactive discrete-log equality proofs (Fiat-Shamir).
//!
//! Proves that one secret witness `w` is the common discrete log across
//! a list of (base, statement) pairs: `statements[i] = bases[i]^w`. One
//! shared nonce produces one commitment per base and a single response,
//! so the proof is `k` elements plus two scalars for `k` bases.

use num_bigint::BigUint;
use rand::RngCore;

use crate::field;
use crate::group::Group;
use crate::{Error, Result};

/// The claim being proven, bound to a caller-chosen context string
/// (round label, prover index, parameter digest, ...).
#[derive(Clone, Debug)]
pub struct DleqStatement<G: Group> {
    pub bases: Vec<G::Element>,
    pub statements: Vec<G::Element>,
    pub context: Vec<u8>,
}

impl<G: Group> DleqStatement<G> {
    pub fn new(bases: Vec<G::Element>, statements: Vec<G::Element>, context: Vec<u8>) -> Result<Self> {
        if bases.is_empty() || bases.len() != statements.len() {
            return Err(Error::Parameter(format!(
                "statement needs equal nonzero list lengths, got {} bases and {} statements",
                bases.len(),
                statements.len()
            )));
        }
        Ok(DleqStatement {
            bases,
            statements,
            context,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DleqProof<G: Group> {
    pub commitments: Vec<G::Element>,
    pub challenge: BigUint,
    pub response: BigUint,
}

impl<G: Group> DleqProof<G> {
    /// Canonical wire encoding: commitments, challenge, response.
    /// Size is `k * |G| + 2 * |Z_p|`.
    pub fn wire_bytes(&self, group: &G) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for c in &self.commitments {
            out.extend_from_slice(&group.element_to_bytes(c));
        }
        out.extend_from_slice(&group.scalar_to_bytes(&self.challenge)?);
        out.extend_from_slice(&group.scalar_to_bytes(&self.response)?);
        Ok(out)
    }
}

/// Fiat-Shamir transcript: context, bases, statements, commitments, in
/// canonical serialization with length framing.
fn challenge<G: Group>(
    group: &G,
    stmt: &DleqStatement<G>,
    commitments: &[G::Element],
) -> BigUint {
    let mut transcript = Vec::new();
    transcript.extend_from_slice(&(stmt.context.len() as u64).to_be_bytes());
    transcript.extend_from_slice(&stmt.context);
    transcript.extend_from_slice(&(stmt.bases.len() as u64).to_be_bytes());
    for part in [&stmt.bases, &stmt.statements, &commitments.to_vec()] {
        for e in part.iter() {
            transcript.extend_from_slice(&group.element_to_bytes(e));
        }
    }
    group.hash_to_scalar(&transcript)
}

/// Produces a proof for `statements[i] = bases[i]^witness`.
pub fn prove<G: Group>(
    group: &G,
    witness: &BigUint,
    stmt: &DleqStatement<G>,
    rng: &mut impl RngCore,
) -> DleqProof<G> {
    debug_assert!(stmt
        .bases
        .iter()
        .zip(&stmt.statements)
        .all(|(b, s)| &group.exp(b, witness) == s));
    let p = group.order();
    let nonce = group.random_scalar(rng);
    let commitments: Vec<G::Element> = stmt.bases.iter().map(|b| group.exp(b, &nonce)).collect();
    let c = challenge(group, stmt, &commitments);
    let response = field::add(&nonce, &field::mul(&c, witness, p), p);
    DleqProof {
        commitments,
        challenge: c,
        response,
    }
}

/// Verifies a proof. `Err(Error::MalformedProof)` flags structural
/// problems (length mismatches); `Err(Error::ProofRejected)` is a
/// verification failure.
pub fn verify<G: Group>(group: &G, proof: &DleqProof<G>, stmt: &DleqStatement<G>) -> Result<()> {
    if stmt.bases.is_empty() || stmt.bases.len() != stmt.statements.len() {
        return Err(Error::MalformedProof("statement list length mismatch".into()));
    }
    if proof.commitments.len() != stmt.bases.len() {
        return Err(Error::MalformedProof(format!(
            "{} commitments for {} bases",
            proof.commitments.len(),
            stmt.bases.len()
        )));
    }
    let c = challenge(group, stmt, &proof.commitments);
    if c != proof.challenge {
        return Err(Error::ProofRejected);
    }
    for ((base, statement), commitment) in stmt
        .bases
        .iter()
        .zip(&stmt.statements)
        .zip(&proof.commitments)
    {
        let lhs = group.exp(base, &proof.response);
        let rhs = group.mul(commitment, &group.exp(statement, &c));
        if lhs != rhs {
            return Err(Error::ProofRejected);
        }
    }
    Ok(())
}
