//! Partial-decryption-verifiable threshold multi-client functional
//! encryption for inner products.
//!
//! Six algorithms: [`setup`], [`dkeygen`], [`encrypt`],
//! [`share_decrypt`], [`verify`] and [`combine_recover`]. `n` clients
//! encrypt scalar messages under a shared label; any `t` of `s`
//! aggregators can jointly recover the inner product with the function
//! vector `y`, and each aggregator's partial decryption carries a DLEQ
//! proof that clients check before combining.
//!
//! Index conventions: clients and aggregators are 1-based. The label
//! mask pair is 0-based `(u_{l,0}, u_{l,1})`; `u_{l,0}` pairs with
//! interpolation point 0 (`lambda_{j,1}`, `alpha^0`) and `u_{l,1}` with
//! point 1 (`lambda_{j,2}`, `alpha^1`), so the combined exponents cancel
//! against `u_l . d` with `d = (q(0), q(1) * alpha)`.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::dleq::{self, DleqProof, DleqStatement};
use crate::dlog::DlogTable;
use crate::field;
use crate::group::{hash_to_group_pair, Group};
use crate::hlr_mss::{self, MssParams};
use crate::{Error, Result};

/// Shared public state of the scheme.
#[derive(Clone, Debug)]
pub struct PublicParams<G: Group> {
    pub group: G,
    pub threshold: usize,
    pub aggregators: usize,
    pub clients: usize,
    /// Rounds provisioned at setup.
    pub rounds: usize,
    /// Per-client plaintext magnitude bound.
    pub plaintext_bound: u64,
    /// Single root of the recursion's characteristic polynomial.
    pub alpha: BigUint,
    /// Coefficients `a_1..a_t` of `(x - alpha)^t`.
    pub coeffs: Vec<BigUint>,
    /// `setup_commitments[k-1][i-2] = h^{c_{i-1,k}}` for `i in 2..=t-1`:
    /// the published commitments to the per-round filler terms.
    pub setup_commitments: Vec<Vec<G::Element>>,
}

impl<G: Group> PublicParams<G> {
    pub fn mss_params(&self) -> MssParams {
        MssParams {
            modulus: self.group.order().clone(),
            alpha: self.alpha.clone(),
            threshold: self.threshold,
            participants: self.aggregators,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Digest binding all public parameters; part of every DLEQ context.
    pub fn digest(&self) -> Vec<u8> {
        let mut h = Sha256::new();
        h.update(b"VTMCFE-pp|");
        for v in [
            self.threshold as u64,
            self.aggregators as u64,
            self.clients as u64,
            self.rounds as u64,
            self.plaintext_bound,
        ] {
            h.update(v.to_be_bytes());
        }
        h.update(self.group.order().to_bytes_be());
        h.update(self.group.element_to_bytes(&self.group.generator()));
        h.update(self.group.element_to_bytes(&self.group.alt_generator()));
        h.update(self.alpha.to_bytes_be());
        for c in &self.coeffs {
            h.update(c.to_bytes_be());
        }
        for round in &self.setup_commitments {
            for e in round {
                h.update(self.group.element_to_bytes(e));
            }
        }
        h.finalize().to_vec()
    }

    pub(crate) fn check_round(&self, round: usize) -> Result<()> {
        if round < 1 || round > self.rounds {
            return Err(Error::Parameter(format!(
                "round {round} not provisioned (setup covered 1..={})",
                self.rounds
            )));
        }
        Ok(())
    }
}

/// Master secret: per-client key vectors and per-round filler scalars.
#[derive(Clone, Debug)]
pub struct MasterSecretKey {
    /// `s_i` for clients `i = 1..n`.
    pub client_keys: Vec<[BigUint; 2]>,
    /// `fillers[k-1] = (c_{1,k}, ..., c_{t-2,k})`.
    pub fillers: Vec<Vec<BigUint>>,
}

#[derive(Clone, Debug)]
pub struct EncryptionKey {
    pub index: usize,
    pub key: [BigUint; 2],
}

/// One aggregator's functional key share `dk_j = w_{t+j-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalKeyShare {
    pub index: usize,
    pub round: usize,
    pub share: BigUint,
}

impl FunctionalKeyShare {
    /// Wire payload: exactly one scalar, independent of `n`.
    pub fn wire_bytes<G: Group>(&self, group: &G) -> Result<Vec<u8>> {
        group.scalar_to_bytes(&self.share)
    }
}

/// Published with the key shares of round `k`: `H_{0,k} = h^{d_1}` and
/// `H_{1,k} = h^{d_2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundKeyCommitments<G: Group> {
    pub round: usize,
    pub h_d1: G::Element,
    pub h_d2: G::Element,
}

impl<G: Group> RoundKeyCommitments<G> {
    /// Wire payload: two group elements.
    pub fn wire_bytes(&self, group: &G) -> Vec<u8> {
        let mut out = group.element_to_bytes(&self.h_d1);
        out.extend_from_slice(&group.element_to_bytes(&self.h_d2));
        out
    }
}

/// A client's ciphertext for one label: `ct_i = g^{u_l . s_i + x_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledCiphertext<G: Group> {
    pub index: usize,
    pub label: Vec<u8>,
    pub payload: G::Element,
}

impl<G: Group> LabeledCiphertext<G> {
    /// Wire payload: one group element.
    pub fn wire_bytes(&self, group: &G) -> Vec<u8> {
        group.element_to_bytes(&self.payload)
    }
}

/// An aggregator's partial decryption triple plus proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialDecryption<G: Group> {
    pub index: usize,
    pub round: usize,
    /// The agreed interpolation subset `S'` (aggregator indices, sorted).
    pub subset: Vec<usize>,
    pub ct0: G::Element,
    pub ct1: G::Element,
    pub ct2: G::Element,
    pub proof: DleqProof<G>,
}

impl<G: Group> PartialDecryption<G> {
    /// Wire payload: three group elements plus the proof
    /// (3 commitments, challenge, response) — constant in `n`.
    pub fn wire_bytes(&self, group: &G) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for e in [&self.ct0, &self.ct1, &self.ct2] {
            out.extend_from_slice(&group.element_to_bytes(e));
        }
        out.extend_from_slice(&self.proof.wire_bytes(group)?);
        Ok(out)
    }
}

/// Why a partial decryption was rejected by [`verify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    SubsetMismatch,
    RoundMismatch,
    NotInSubset,
    Ct0Mismatch,
    NoCt0Consensus,
    MalformedProof,
    ProofRejected,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RejectReason::SubsetMismatch => "subset-mismatch",
            RejectReason::RoundMismatch => "round-mismatch",
            RejectReason::NotInSubset => "not-in-subset",
            RejectReason::Ct0Mismatch => "ct0-mismatch",
            RejectReason::NoCt0Consensus => "no-ct0-consensus",
            RejectReason::MalformedProof => "malformed-proof",
            RejectReason::ProofRejected => "proof-rejected",
        };
        f.write_str(s)
    }
}

/// Outcome of [`verify`]: accepted aggregator indices plus per-rejection
/// diagnostics.
#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub accepted: Vec<usize>,
    pub rejected: Vec<(usize, RejectReason)>,
}

/// Generates public parameters, the master secret and the client
/// encryption keys, provisioning filler terms for `rounds` rounds.
pub fn setup<G: Group>(
    group: G,
    threshold: usize,
    aggregators: usize,
    clients: usize,
    rounds: usize,
    plaintext_bound: u64,
    rng: &mut impl RngCore,
) -> Result<(PublicParams<G>, MasterSecretKey, Vec<EncryptionKey>)> {
    if threshold < 2 || threshold > aggregators {
        return Err(Error::Parameter(format!(
            "need 2 <= t <= s, got t={threshold}, s={aggregators}"
        )));
    }
    if clients < 1 || rounds < 1 {
        return Err(Error::Parameter("need n >= 1 and rounds >= 1".into()));
    }
    let p = group.order().clone();
    let alpha = loop {
        let a = field::random(&p, rng);
        if !a.is_zero() {
            break a;
        }
    };
    let coeffs = hlr_mss::expand_char_poly(&alpha, threshold, &p);
    let client_keys: Vec<[BigUint; 2]> = (0..clients)
        .map(|_| [field::random(&p, rng), field::random(&p, rng)])
        .collect();
    let mut fillers = Vec::with_capacity(rounds);
    let mut setup_commitments = Vec::with_capacity(rounds);
    let h = group.alt_generator();
    for _ in 0..rounds {
        let round_fillers: Vec<BigUint> = (0..threshold.saturating_sub(2))
            .map(|_| field::random(&p, rng))
            .collect();
        setup_commitments.push(round_fillers.iter().map(|c| group.exp(&h, c)).collect());
        fillers.push(round_fillers);
    }
    let encryption_keys = client_keys
        .iter()
        .enumerate()
        .map(|(i, k)| EncryptionKey {
            index: i + 1,
            key: k.clone(),
        })
        .collect();
    let pp = PublicParams {
        group,
        threshold,
        aggregators,
        clients,
        rounds,
        plaintext_bound,
        alpha,
        coeffs,
        setup_commitments,
    };
    let msk = MasterSecretKey {
        client_keys,
        fillers,
    };
    Ok((pp, msk, encryption_keys))
}

/// Derives the per-aggregator functional key shares for `y` in round
/// `round` and the round commitments `(h^{d_1}, h^{d_2})`.
pub fn dkeygen<G: Group>(
    pp: &PublicParams<G>,
    msk: &MasterSecretKey,
    y: &[i64],
    round: usize,
) -> Result<(Vec<FunctionalKeyShare>, RoundKeyCommitments<G>)> {
    if y.len() != pp.clients {
        return Err(Error::Parameter(format!(
            "function vector length {} != client count {}",
            y.len(),
            pp.clients
        )));
    }
    pp.check_round(round)?;
    let p = pp.group.order();
    // d = sum_i y_i * s_i in Z_p^2.
    let mut d = [BigUint::zero(), BigUint::zero()];
    for (s_i, &y_i) in msk.client_keys.iter().zip(y) {
        let y_scalar = field::from_i128(y_i as i128, p);
        for c in 0..2 {
            d[c] = field::add(&d[c], &field::mul(&y_scalar, &s_i[c], p), p);
        }
    }
    let params = pp.mss_params();
    let seq = hlr_mss::share_with_fillers(&params, &d, &msk.fillers[round - 1])?;
    let shares = (1..=pp.aggregators)
        .map(|j| FunctionalKeyShare {
            index: j,
            round,
            share: seq.share(j).clone(),
        })
        .collect();
    let h = pp.group.alt_generator();
    let commitments = RoundKeyCommitments {
        round,
        h_d1: pp.group.exp(&h, &d[0]),
        h_d2: pp.group.exp(&h, &d[1]),
    };
    Ok((shares, commitments))
}

/// Encrypts one scalar under the client's key and a label:
/// `ct_i = g^{u_{l,0} s_{i,0} + u_{l,1} s_{i,1} + x_i}`.
pub fn encrypt<G: Group>(
    pp: &PublicParams<G>,
    ek: &EncryptionKey,
    x: i64,
    label: &[u8],
) -> Result<LabeledCiphertext<G>> {
    if x.unsigned_abs() > pp.plaintext_bound {
        return Err(Error::OutOfRange(format!(
            "|{x}| exceeds plaintext bound {}",
            pp.plaintext_bound
        )));
    }
    let g = &pp.group;
    let (mask0, mask1) = hash_to_group_pair(g, label);
    let x_scalar = field::from_i128(x as i128, g.order());
    let payload = g.mul(
        &g.mul(&g.exp(&mask0, &ek.key[0]), &g.exp(&mask1, &ek.key[1])),
        &g.exp_g(&x_scalar),
    );
    Ok(LabeledCiphertext {
        index: ek.index,
        label: label.to_vec(),
        payload,
    })
}

/// Validates and normalizes an interpolation subset.
fn check_subset(pp: &PublicParams<impl Group>, subset: &[usize]) -> Result<Vec<usize>> {
    if subset.len() != pp.threshold {
        return Err(Error::Threshold {
            expected: pp.threshold,
            got: subset.len(),
        });
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != pp.threshold {
        return Err(Error::Parameter("duplicate subset indices".into()));
    }
    if sorted[0] < 1 || sorted[sorted.len() - 1] > pp.aggregators {
        return Err(Error::Parameter("subset index outside [1, s]".into()));
    }
    Ok(sorted)
}

/// Context string binding a DLEQ proof to the parameters, round, label,
/// prover and subset.
fn dleq_context<G: Group>(
    pp: &PublicParams<G>,
    round: usize,
    label: &[u8],
    prover: usize,
    subset: &[usize],
) -> Vec<u8> {
    let mut ctx = pp.digest();
    ctx.extend_from_slice(&(round as u64).to_be_bytes());
    ctx.extend_from_slice(&(label.len() as u64).to_be_bytes());
    ctx.extend_from_slice(label);
    ctx.extend_from_slice(&(prover as u64).to_be_bytes());
    for &j in subset {
        ctx.extend_from_slice(&(j as u64).to_be_bytes());
    }
    ctx
}

/// The two proof bases derived from public data for aggregator `j`:
/// `h_{j,1} = mask0^{lambda_{j,1} alpha^{-(t+j-1)}}` and
/// `h_{j,2} = mask1^{lambda_{j,2} alpha^{1-(t+j-1)}}`.
fn proof_bases<G: Group>(
    pp: &PublicParams<G>,
    j: usize,
    subset: &[usize],
    label: &[u8],
) -> Result<(G::Element, G::Element)> {
    let g = &pp.group;
    let p = g.order();
    let t = pp.threshold;
    let (mask0, mask1) = hash_to_group_pair(g, label);
    let node = (t + j - 1) as u64;
    let alpha_inv_node = field::inv(&field::pow_u64(&pp.alpha, node, p), p)?;
    let lambda1 = hlr_mss::lagrange_coeff(0, j, subset, t, p)?;
    let lambda2 = hlr_mss::lagrange_coeff(1, j, subset, t, p)?;
    let exp1 = field::mul(&lambda1, &alpha_inv_node, p);
    let exp2 = field::mul(&field::mul(&lambda2, &alpha_inv_node, p), &pp.alpha, p);
    Ok((g.exp(&mask0, &exp1), g.exp(&mask1, &exp2)))
}

/// Computes aggregator `j`'s partial decryption of the labeled
/// ciphertexts together with its correctness proof.
pub fn share_decrypt<G: Group>(
    pp: &PublicParams<G>,
    ciphertexts: &[LabeledCiphertext<G>],
    y: &[i64],
    key_share: &FunctionalKeyShare,
    subset: &[usize],
    round: usize,
    label: &[u8],
    rng: &mut impl RngCore,
) -> Result<PartialDecryption<G>> {
    pp.check_round(round)?;
    if ciphertexts.len() != pp.clients || y.len() != pp.clients {
        return Err(Error::Parameter(format!(
            "expected {} ciphertexts and weights, got {} and {}",
            pp.clients,
            ciphertexts.len(),
            y.len()
        )));
    }
    if let Some(ct) = ciphertexts.iter().find(|ct| ct.label != label) {
        return Err(Error::Protocol(format!(
            "ciphertext from client {} carries a different label",
            ct.index
        )));
    }
    let subset = check_subset(pp, subset)?;
    let j = key_share.index;
    if !subset.contains(&j) {
        return Err(Error::Parameter(format!("aggregator {j} not in subset")));
    }
    if key_share.round != round {
        return Err(Error::Parameter(format!(
            "key share is for round {}, not {round}",
            key_share.round
        )));
    }
    let g = &pp.group;
    let p = g.order();
    // ct'_{j,0} = prod ct_i^{y_i}
    let mut ct0 = g.identity();
    for (ct, &y_i) in ciphertexts.iter().zip(y) {
        let y_scalar = field::from_i128(y_i as i128, p);
        ct0 = g.mul(&ct0, &g.exp(&ct.payload, &y_scalar));
    }
    let (base1, base2) = proof_bases(pp, j, &subset, label)?;
    let w = &key_share.share;
    let ct1 = g.exp(&base1, w);
    let ct2 = g.exp(&base2, w);
    let share_commitment = g.exp(&g.alt_generator(), w);
    let stmt = DleqStatement::new(
        vec![g.alt_generator(), base1, base2],
        vec![share_commitment, ct1.clone(), ct2.clone()],
        dleq_context(pp, round, label, j, &subset),
    )?;
    let proof = dleq::prove(g, w, &stmt, rng);
    Ok(PartialDecryption {
        index: j,
        round,
        subset,
        ct0,
        ct1,
        ct2,
        proof,
    })
}

/// Recomputes the share commitments `H_{t+j-1} = h^{w_{t+j-1}}` for all
/// aggregators from the published round and setup commitments, by
/// running the recursion in the exponent.
pub fn derive_share_commitments<G: Group>(
    pp: &PublicParams<G>,
    round_commitments: &RoundKeyCommitments<G>,
    round: usize,
) -> Result<Vec<G::Element>> {
    pp.check_round(round)?;
    if round_commitments.round != round {
        return Err(Error::Protocol(format!(
            "commitments are for round {}, not {round}",
            round_commitments.round
        )));
    }
    let g = &pp.group;
    let p = g.order();
    let t = pp.threshold;
    let published = &pp.setup_commitments[round - 1];
    if published.len() != t.saturating_sub(2) {
        return Err(Error::Protocol(format!(
            "expected {} setup commitments, found {}",
            t.saturating_sub(2),
            published.len()
        )));
    }
    // chain[i] = h^{w_i}; seeded with H_{0,k}, H_{1,k} and the setup
    // commitments, then extended by H_{i+t} = prod H_{i+t-k}^{-a_k}.
    let mut chain: Vec<G::Element> = Vec::with_capacity(t + pp.aggregators);
    chain.push(round_commitments.h_d1.clone());
    chain.push(round_commitments.h_d2.clone());
    chain.extend(published.iter().cloned());
    for i in 0..pp.aggregators {
        let mut next = g.identity();
        for (k, a) in pp.coeffs.iter().enumerate() {
            let neg_a = field::neg(a, p);
            next = g.mul(&next, &g.exp(&chain[i + t - 1 - k], &neg_a));
        }
        chain.push(next);
    }
    Ok(chain.split_off(t))
}

/// Client-side verification of a batch of partial decryptions for one
/// round and label. An index is accepted iff its claimed subset matches
/// the consensus, its `ct0` matches the consensus value (at least
/// `ceil((t+1)/2)` identical copies), and its DLEQ proof verifies
/// against the derived share commitment and recomputed bases.
pub fn verify<G: Group>(
    pp: &PublicParams<G>,
    partials: &[PartialDecryption<G>],
    round_commitments: &RoundKeyCommitments<G>,
    round: usize,
    label: &[u8],
) -> Result<VerifyOutcome> {
    pp.check_round(round)?;
    if partials.is_empty() {
        return Err(Error::Parameter("no partial decryptions supplied".into()));
    }
    let mut accepted = Vec::new();
    let mut rejected: Vec<(usize, RejectReason)> = Vec::new();

    // Consensus subset: the plurality of the claimed S' values.
    let consensus_subset = plurality(partials.iter().map(|pd| pd.subset.clone()));
    let mut remaining: Vec<&PartialDecryption<G>> = Vec::new();
    for pd in partials {
        if pd.round != round {
            rejected.push((pd.index, RejectReason::RoundMismatch));
        } else if pd.subset != consensus_subset {
            rejected.push((pd.index, RejectReason::SubsetMismatch));
        } else if !pd.subset.contains(&pd.index) {
            rejected.push((pd.index, RejectReason::NotInSubset));
        } else {
            remaining.push(pd);
        }
    }

    if remaining.is_empty() {
        return Ok(VerifyOutcome { accepted, rejected });
    }

    // ct0 consensus: a value matching at least ceil((t+1)/2) copies.
    let quorum = (pp.threshold + 2) / 2; // ceil((t+1)/2)
    let consensus_ct0 = {
        let candidate = plurality(remaining.iter().map(|pd| pd.ct0.clone()));
        let votes = remaining.iter().filter(|pd| pd.ct0 == candidate).count();
        if votes >= quorum {
            Some(candidate)
        } else {
            None
        }
    };
    let Some(consensus_ct0) = consensus_ct0 else {
        for pd in remaining {
            rejected.push((pd.index, RejectReason::NoCt0Consensus));
        }
        return Ok(VerifyOutcome { accepted, rejected });
    };

    let share_commitments = derive_share_commitments(pp, round_commitments, round)?;
    for pd in remaining {
        if pd.ct0 != consensus_ct0 {
            rejected.push((pd.index, RejectReason::Ct0Mismatch));
            continue;
        }
        let j = pd.index;
        let (base1, base2) = proof_bases(pp, j, &pd.subset, label)?;
        let stmt = DleqStatement::new(
            vec![pp.group.alt_generator(), base1, base2],
            vec![share_commitments[j - 1].clone(), pd.ct1.clone(), pd.ct2.clone()],
            dleq_context(pp, round, label, j, &pd.subset),
        )?;
        match dleq::verify(&pp.group, &pd.proof, &stmt) {
            Ok(()) => accepted.push(j),
            Err(Error::MalformedProof(_)) => rejected.push((j, RejectReason::MalformedProof)),
            Err(_) => rejected.push((j, RejectReason::ProofRejected)),
        }
    }
    Ok(VerifyOutcome { accepted, rejected })
}

/// Most frequent value of an iterator; ties resolved by first
/// appearance.
fn plurality<T: Clone + PartialEq>(items: impl Iterator<Item = T>) -> T {
    let items: Vec<T> = items.collect();
    let mut best = 0usize;
    let mut best_count = 0usize;
    for (i, item) in items.iter().enumerate() {
        let count = items.iter().filter(|x| *x == item).count();
        if count > best_count {
            best = i;
            best_count = count;
        }
    }
    items[best].clone()
}

/// Combines exactly `t` accepted partial decryptions into the aggregate
/// and solves the bounded discrete log:
/// `[beta] = ct0 / (prod ct1 * prod ct2)`.
pub fn combine_recover<G: Group>(
    pp: &PublicParams<G>,
    partials: &[PartialDecryption<G>],
    _label: &[u8],
    table: &DlogTable<G>,
) -> Result<i64> {
    if partials.len() != pp.threshold {
        return Err(Error::Threshold {
            expected: pp.threshold,
            got: partials.len(),
        });
    }
    let subset = &partials[0].subset;
    let mut seen: Vec<usize> = partials.iter().map(|pd| pd.index).collect();
    seen.sort_unstable();
    if &seen != subset {
        return Err(Error::Protocol(
            "partial decryptions do not cover the claimed subset exactly".into(),
        ));
    }
    let g = &pp.group;
    let mut denom = g.identity();
    for pd in partials {
        denom = g.mul(&denom, &pd.ct1);
    }
    for pd in partials {
        denom = g.mul(&denom, &pd.ct2);
    }
    let combined = g.div(&partials[0].ct0, &denom);
    table.solve(&combined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ExponentGroup, ModpGroup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn u(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn modp_setup(
        t: usize,
        s: usize,
        n: usize,
        rounds: usize,
        seed: u64,
    ) -> (PublicParams<ModpGroup>, MasterSecretKey, Vec<EncryptionKey>, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (pp, msk, eks) =
            setup(ModpGroup::default_group(), t, s, n, rounds, 1_000_000, &mut rng).unwrap();
        (pp, msk, eks, rng)
    }

    #[test]
    fn setup_commitment_counts() {
        let (pp, _, _, _) = modp_setup(2, 3, 2, 1, 1);
        assert!(pp.setup_commitments[0].is_empty());
        let (pp, _, _, _) = modp_setup(3, 4, 2, 1, 2);
        assert_eq!(pp.setup_commitments[0].len(), 1);
        let g = &pp.group;
        assert_ne!(g.generator(), g.alt_generator());
        assert_ne!(g.generator(), g.identity());
        assert_ne!(g.alt_generator(), g.identity());
    }

    #[test]
    fn setup_parameter_validation() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let g = ModpGroup::default_group();
        assert!(setup(g.clone(), 5, 4, 2, 1, 100, &mut rng).is_err());
        assert!(setup(g.clone(), 1, 4, 2, 1, 100, &mut rng).is_err());
        assert!(setup(g, 2, 4, 0, 1, 100, &mut rng).is_err());
    }

    #[test]
    fn dkeygen_inner_key_and_share_shape() {
        // d = s_1*1 + s_2*2 with s_1=(2,3), s_2=(1,1) -> (4,5).
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let g = ModpGroup::default_group();
        let (pp, mut msk, _) = setup(g.clone(), 2, 3, 2, 1, 100, &mut rng).unwrap();
        msk.client_keys = vec![[u(2), u(3)], [u(1), u(1)]];
        let (shares, commitments) = dkeygen(&pp, &msk, &[1, 2], 1).unwrap();
        assert_eq!(shares.len(), 3);
        for share in &shares {
            assert_eq!(
                share.wire_bytes(&pp.group).unwrap().len(),
                pp.group.scalar_len()
            );
        }
        let h = pp.group.alt_generator();
        assert_eq!(commitments.h_d1, pp.group.exp(&h, &u(4)));
        assert_eq!(commitments.h_d2, pp.group.exp(&h, &u(5)));
    }

    #[test]
    fn dkeygen_zero_function_vector() {
        let (pp, mut msk, _, _) = modp_setup(2, 3, 2, 1, 5);
        // Zero fillers only exist for t > 2; t=2 has none.
        let (shares, commitments) = {
            msk.client_keys = vec![[u(7), u(9)], [u(3), u(4)]];
            dkeygen(&pp, &msk, &[0, 0], 1).unwrap()
        };
        assert!(shares.iter().all(|sh| sh.share.is_zero()));
        assert_eq!(commitments.h_d1, pp.group.exp(&pp.group.alt_generator(), &u(0)));
    }

    #[test]
    fn dkeygen_validation() {
        let (pp, msk, _, _) = modp_setup(2, 3, 2, 1, 6);
        assert!(dkeygen(&pp, &msk, &[1], 1).is_err());
        assert!(dkeygen(&pp, &msk, &[1, 1], 2).is_err());
    }

    #[test]
    fn encrypt_deterministic_and_homomorphic_shift() {
        let (pp, _, eks, _) = modp_setup(2, 3, 2, 1, 7);
        let label = b"round-1|coord-0";
        let a = encrypt(&pp, &eks[0], 5, label).unwrap();
        let b = encrypt(&pp, &eks[0], 5, label).unwrap();
        assert_eq!(a, b);
        // ct(x) * g^{-x} = ct(0)
        let zero = encrypt(&pp, &eks[0], 0, label).unwrap();
        let g = &pp.group;
        let minus_five = field::from_i128(-5, g.order());
        assert_eq!(g.mul(&a.payload, &g.exp_g(&minus_five)), zero.payload);
    }

    #[test]
    fn encrypt_bound_enforced() {
        let (pp, _, eks, _) = modp_setup(2, 3, 2, 1, 8);
        assert!(encrypt(&pp, &eks[0], 1_000_001, b"l").is_err());
        assert!(encrypt(&pp, &eks[0], -1_000_001, b"l").is_err());
    }

    fn run_pipeline<G: Group>(
        group: G,
        t: usize,
        s: usize,
        x: &[i64],
        y: &[i64],
        subset: &[usize],
        seed: u64,
    ) -> i64 {
        let n = x.len();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (pp, msk, eks) = setup(group.clone(), t, s, n, 1, 10_000, &mut rng).unwrap();
        let label = b"round-1|coord-0";
        let cts: Vec<_> = eks
            .iter()
            .zip(x)
            .map(|(ek, &xi)| encrypt(&pp, ek, xi, label).unwrap())
            .collect();
        let (shares, commitments) = dkeygen(&pp, &msk, y, 1).unwrap();
        let partials: Vec<_> = subset
            .iter()
            .map(|&j| {
                share_decrypt(&pp, &cts, y, &shares[j - 1], subset, 1, label, &mut rng).unwrap()
            })
            .collect();
        let outcome = verify(&pp, &partials, &commitments, 1, label).unwrap();
        assert_eq!(outcome.accepted.len(), t, "rejected: {:?}", outcome.rejected);
        let table = DlogTable::new(group, pp.group.generator(), 500_000);
        combine_recover(&pp, &partials, label, &table).unwrap()
    }

    #[test]
    fn end_to_end_inner_product() {
        // Brute-force oracle: x=(1,2,3), y=(1,1,1) -> 6.
        let g = ModpGroup::default_group();
        assert_eq!(run_pipeline(g.clone(), 2, 3, &[1, 2, 3], &[1, 1, 1], &[1, 3], 10), 6);
        assert_eq!(run_pipeline(g.clone(), 3, 4, &[1, 2, 3], &[1, 1, 1], &[2, 3, 4], 11), 6);
        // Negative coordinates and general weights.
        assert_eq!(
            run_pipeline(g, 2, 3, &[-5, 7, 2], &[2, 1, 3], &[2, 3], 12),
            -5 * 2 + 7 + 2 * 3
        );
    }

    #[test]
    fn zero_messages_combine_to_identity() {
        let g = ModpGroup::default_group();
        assert_eq!(run_pipeline(g, 2, 3, &[0, 0], &[1, 1], &[1, 2], 13), 0);
    }

    #[test]
    fn single_client_ct0_is_the_ciphertext() {
        let (pp, msk, eks, mut rng) = modp_setup(2, 3, 1, 1, 14);
        let label = b"l";
        let ct = encrypt(&pp, &eks[0], 9, label).unwrap();
        let (shares, _) = dkeygen(&pp, &msk, &[1], 1).unwrap();
        let pd =
            share_decrypt(&pp, &[ct.clone()], &[1], &shares[0], &[1, 2], 1, label, &mut rng)
                .unwrap();
        assert_eq!(pd.ct0, ct.payload);
    }

    #[test]
    fn zero_witness_partials_are_identity_and_verify() {
        let (pp, mut msk, eks, mut rng) = modp_setup(2, 3, 2, 1, 15);
        msk.client_keys = vec![[u(7), u(9)], [u(3), u(4)]];
        let label = b"l";
        let cts: Vec<_> = eks
            .iter()
            .map(|ek| encrypt(&pp, ek, 1, label).unwrap())
            .collect();
        // y = 0 makes d = 0 and every share 0 (t=2, no fillers).
        let (shares, commitments) = dkeygen(&pp, &msk, &[0, 0], 1).unwrap();
        let pd = share_decrypt(&pp, &cts, &[0, 0], &shares[0], &[1, 2], 1, label, &mut rng)
            .unwrap();
        assert_eq!(pd.ct1, pp.group.identity());
        assert_eq!(pd.ct2, pp.group.identity());
        let pd2 = share_decrypt(&pp, &cts, &[0, 0], &shares[1], &[1, 2], 1, label, &mut rng)
            .unwrap();
        let outcome = verify(&pp, &[pd, pd2], &commitments, 1, label).unwrap();
        assert_eq!(outcome.accepted, vec![1, 2]);
    }

    #[test]
    fn label_mismatch_rejected() {
        let (pp, msk, eks, mut rng) = modp_setup(2, 3, 2, 1, 16);
        let ct1 = encrypt(&pp, &eks[0], 1, b"label-a").unwrap();
        let ct2 = encrypt(&pp, &eks[1], 2, b"label-b").unwrap();
        let (shares, _) = dkeygen(&pp, &msk, &[1, 1], 1).unwrap();
        let err = share_decrypt(
            &pp,
            &[ct1, ct2],
            &[1, 1],
            &shares[0],
            &[1, 2],
            1,
            b"label-a",
            &mut rng,
        );
        assert!(matches!(err, Err(Error::Protocol(_))));
    }

    // Exponent-level oracles over the transparent group.

    fn exp_group() -> ExponentGroup {
        ExponentGroup::new(u(1_000_003))
    }

    #[test]
    fn share_decrypt_exponent_oracle() {
        // log(ct'_{j,1}) = u_{l,0} * lambda_{j,1} * q(t+j-1) where
        // q(node) = w_node / alpha^node.
        let group = exp_group();
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let (pp, msk, eks) = setup(group.clone(), 3, 4, 2, 1, 1000, &mut rng).unwrap();
        let label = b"oracle";
        let y = [1i64, 2];
        let cts: Vec<_> = eks
            .iter()
            .map(|ek| encrypt(&pp, ek, 3, label).unwrap())
            .collect();
        let (shares, _) = dkeygen(&pp, &msk, &y, 1).unwrap();
        let subset = vec![1usize, 2, 4];
        let p = group.order();
        let (mask0, _) = hash_to_group_pair(&group, label);
        let u_l0 = group.dlog(&mask0); // generator is 1
        for &j in &subset {
            let pd = share_decrypt(&pp, &cts, &y, &shares[j - 1], &subset, 1, label, &mut rng)
                .unwrap();
            let node = (pp.threshold + j - 1) as u64;
            let w = &shares[j - 1].share;
            let q_node = field::mul(
                w,
                &field::inv(&field::pow_u64(&pp.alpha, node, p), p).unwrap(),
                p,
            );
            let lambda1 = hlr_mss::lagrange_coeff(0, j, &subset, pp.threshold, p).unwrap();
            let expected = field::mul(&u_l0, &field::mul(&lambda1, &q_node, p), p);
            assert_eq!(group.dlog(&pd.ct1), expected);
        }
    }

    #[test]
    fn derive_share_commitments_worked_example() {
        // t=2, d=(5,7), alpha=2: w_2 = 4*7 - 4*5 = 8, so H_2 = h^8.
        let group = ExponentGroup::new(u(101));
        let mut rng = ChaCha20Rng::seed_from_u64(18);
        let (mut pp, _, _) = setup(group.clone(), 2, 3, 1, 1, 100, &mut rng).unwrap();
        pp.alpha = u(2);
        pp.coeffs = hlr_mss::expand_char_poly(&pp.alpha, 2, group.order());
        let h = group.alt_generator();
        let commitments = RoundKeyCommitments {
            round: 1,
            h_d1: group.exp(&h, &u(5)),
            h_d2: group.exp(&h, &u(7)),
        };
        let derived = derive_share_commitments(&pp, &commitments, 1).unwrap();
        assert_eq!(derived[0], group.exp(&h, &u(8)));
    }

    #[test]
    fn derive_share_commitments_zero_key() {
        let group = exp_group();
        let mut rng = ChaCha20Rng::seed_from_u64(19);
        let (pp, _, _) = setup(group.clone(), 2, 4, 1, 1, 100, &mut rng).unwrap();
        let commitments = RoundKeyCommitments {
            round: 1,
            h_d1: group.identity(),
            h_d2: group.identity(),
        };
        for derived in derive_share_commitments(&pp, &commitments, 1).unwrap() {
            assert_eq!(derived, group.identity());
        }
    }

    #[test]
    fn derive_share_commitments_match_shares() {
        // H_{t+j-1} = h^{dk_j} for every aggregator.
        let group = exp_group();
        let mut rng = ChaCha20Rng::seed_from_u64(20);
        let (pp, msk, _) = setup(group.clone(), 4, 6, 3, 2, 100, &mut rng).unwrap();
        for round in 1..=2 {
            let (shares, commitments) = dkeygen(&pp, &msk, &[1, -2, 3], round).unwrap();
            let derived = derive_share_commitments(&pp, &commitments, round).unwrap();
            let h = group.alt_generator();
            for (j, share) in shares.iter().enumerate() {
                assert_eq!(derived[j], group.exp(&h, &share.share));
            }
        }
    }

    #[test]
    fn verify_rejects_tampered_partial() {
        let group = ModpGroup::default_group();
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let (pp, msk, eks) = setup(group.clone(), 3, 4, 2, 1, 100, &mut rng).unwrap();
        let label = b"l";
        let y = [1i64, 1];
        let cts: Vec<_> = eks
            .iter()
            .map(|ek| encrypt(&pp, ek, 2, label).unwrap())
            .collect();
        let (shares, commitments) = dkeygen(&pp, &msk, &y, 1).unwrap();
        let subset = vec![1usize, 2, 3];
        let mut partials: Vec<_> = subset
            .iter()
            .map(|&j| {
                share_decrypt(&pp, &cts, &y, &shares[j - 1], &subset, 1, label, &mut rng).unwrap()
            })
            .collect();
        partials[1].ct1 = pp.group.mul(&partials[1].ct1, &pp.group.generator());
        let outcome = verify(&pp, &partials, &commitments, 1, label).unwrap();
        assert_eq!(outcome.accepted, vec![1, 3]);
        assert_eq!(outcome.rejected, vec![(2, RejectReason::ProofRejected)]);
    }

    #[test]
    fn verify_rejects_stale_ct0() {
        let group = ModpGroup::default_group();
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let (pp, msk, eks) = setup(group.clone(), 3, 4, 2, 2, 100, &mut rng).unwrap();
        let y = [1i64, 1];
        let subset = vec![1usize, 2, 3];
        // Round 1 partials, then round 2 with a spliced stale ct0.
        let mut stale_ct0 = None;
        for round in 1..=2usize {
            let label = format!("round-{round}");
            let cts: Vec<_> = eks
                .iter()
                .zip([round as i64, 7])
                .map(|(ek, x)| encrypt(&pp, ek, x, label.as_bytes()).unwrap())
                .collect();
            let (shares, commitments) = dkeygen(&pp, &msk, &y, round).unwrap();
            let mut partials: Vec<_> = subset
                .iter()
                .map(|&j| {
                    share_decrypt(
                        &pp,
                        &cts,
                        &y,
                        &shares[j - 1],
                        &subset,
                        round,
                        label.as_bytes(),
                        &mut rng,
                    )
                    .unwrap()
                })
                .collect();
            if round == 1 {
                stale_ct0 = Some(partials[0].ct0.clone());
            } else {
                partials[1].ct0 = stale_ct0.clone().unwrap();
                let outcome =
                    verify(&pp, &partials, &commitments, round, label.as_bytes()).unwrap();
                assert!(outcome
                    .rejected
                    .iter()
                    .any(|(j, r)| *j == 2 && *r == RejectReason::Ct0Mismatch));
            }
        }
    }

    #[test]
    fn combine_requires_full_subset() {
        let group = ModpGroup::default_group();
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let (pp, msk, eks) = setup(group.clone(), 3, 4, 2, 1, 100, &mut rng).unwrap();
        let label = b"l";
        let y = [1i64, 1];
        let cts: Vec<_> = eks
            .iter()
            .map(|ek| encrypt(&pp, ek, 1, label).unwrap())
            .collect();
        let (shares, _) = dkeygen(&pp, &msk, &y, 1).unwrap();
        let subset = vec![1usize, 2, 3];
        let partials: Vec<_> = subset
            .iter()
            .map(|&j| {
                share_decrypt(&pp, &cts, &y, &shares[j - 1], &subset, 1, label, &mut rng).unwrap()
            })
            .collect();
        let table = DlogTable::new(group, pp.group.generator(), 1000);
        assert!(matches!(
            combine_recover(&pp, &partials[..2], label, &table),
            Err(Error::Threshold { .. })
        ));
        assert_eq!(combine_recover(&pp, &partials, label, &table).unwrap(), 2);
    }

    #[test]
    fn wire_sizes_constant_in_n() {
        let mut lens = Vec::new();
        for (seed, n) in [(30u64, 5usize), (31, 50)] {
            let (pp, msk, eks, mut rng) = modp_setup(3, 4, n, 1, seed);
            let label = b"l";
            let y = vec![1i64; n];
            let cts: Vec<_> = eks
                .iter()
                .map(|ek| encrypt(&pp, ek, 1, label).unwrap())
                .collect();
            let (shares, commitments) = dkeygen(&pp, &msk, &y, 1).unwrap();
            let pd = share_decrypt(
                &pp,
                &cts,
                &y,
                &shares[0],
                &[1, 2, 3],
                1,
                label,
                &mut rng,
            )
            .unwrap();
            assert_eq!(
                shares[0].wire_bytes(&pp.group).unwrap().len(),
                pp.group.scalar_len()
            );
            assert_eq!(
                commitments.wire_bytes(&pp.group).len(),
                2 * pp.group.element_len()
            );
            assert_eq!(cts[0].wire_bytes(&pp.group).len(), pp.group.element_len());
            lens.push(pd.wire_bytes(&pp.group).unwrap().len());
        }
        assert_eq!(lens[0], lens[1]);
        // 3 partial elements + 3 commitments + challenge + response.
        let g = ModpGroup::default_group();
        assert_eq!(lens[0], 6 * g.element_len() + 2 * g.scalar_len());
    }
}
