//! Desk-scale federated-aggregation simulator built on the VTMCFE
//! scheme.
//!
//! Each round, every client quantizes a `dim`-dimensional model update
//! and encrypts one ciphertext per coordinate under the label
//! `round-{k}|coord-{m}`. The coordinator picks `t` aggregators,
//! collects their partial decryptions, verifies the attached proofs,
//! and retries with a fresh subset whenever an aggregator crashes or is
//! caught cheating. The recovered sums are FedAvg means (`y = 1^n`).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dlog::DlogTable;
use crate::group::Group;
use crate::vtmcfe::{
    self, EncryptionKey, FunctionalKeyShare, LabeledCiphertext, MasterSecretKey,
    PartialDecryption, PublicParams,
};
use crate::{Error, Result};

/// Misbehavior modes for aggregators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggBehavior {
    Honest,
    /// Multiplies one component of the partial decryption by `g`.
    TamperPartial,
    /// Replaces the whole partial decryption with random elements.
    RandomOutput,
    /// Resubmits its previous-round partial decryptions verbatim.
    ReplayPrevious,
    /// Never responds.
    Crash,
}

impl std::str::FromStr for AggBehavior {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "honest" => Ok(AggBehavior::Honest),
            "tamper" | "tamper-partial" => Ok(AggBehavior::TamperPartial),
            "random" | "random-output" => Ok(AggBehavior::RandomOutput),
            "replay" | "replay-previous" => Ok(AggBehavior::ReplayPrevious),
            "crash" => Ok(AggBehavior::Crash),
            other => Err(Error::Parameter(format!(
                "unknown behavior '{other}' (expected honest, tamper-partial, \
                 random-output, replay-previous or crash)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    pub clients: usize,
    pub aggregators: usize,
    pub threshold: usize,
    pub rounds: usize,
    /// Model dimension: coordinates per update.
    pub dim: usize,
    /// Fixed-point quantization scale.
    pub scale: u64,
    /// Discrete-log search bound; defaults to `clients * scale`, the
    /// largest possible aggregate.
    #[serde(default)]
    pub bound: Option<u64>,
    /// Aggregator index (1-based) -> behavior; unlisted ones are honest.
    #[serde(default)]
    pub malicious: Vec<(usize, AggBehavior)>,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threshold < 2 || self.threshold > self.aggregators {
            return Err(Error::Parameter(format!(
                "need 2 <= t <= s, got t={}, s={}",
                self.threshold, self.aggregators
            )));
        }
        if self.clients == 0 || self.rounds == 0 || self.dim == 0 || self.scale == 0 {
            return Err(Error::Parameter(
                "clients, rounds, dim and scale must be positive".into(),
            ));
        }
        if let Some(b) = self.bound {
            if b < self.clients as u64 * self.scale {
                return Err(Error::Parameter(format!(
                    "bound {b} below n*scale = {}; aggregates could overflow the \
                     recovery window",
                    self.clients as u64 * self.scale
                )));
            }
        }
        for &(j, _) in &self.malicious {
            if j < 1 || j > self.aggregators {
                return Err(Error::Parameter(format!(
                    "malicious index {j} outside [1, {}]",
                    self.aggregators
                )));
            }
        }
        Ok(())
    }

    pub fn behavior(&self, j: usize) -> AggBehavior {
        self.malicious
            .iter()
            .rev()
            .find(|(idx, _)| *idx == j)
            .map(|(_, b)| *b)
            .unwrap_or(AggBehavior::Honest)
    }
}

/// Round-to-nearest fixed-point quantization, ties away from zero.
pub fn quantize(v: f64, scale: u64) -> i64 {
    (v * scale as f64).round() as i64
}

/// Inverse map back to a real value.
pub fn dequantize(q: i64, scale: u64) -> f64 {
    q as f64 / scale as f64
}

/// Deterministic synthetic update for `(seed, round, client)`: `dim`
/// coordinates uniform in `[-1, 1]`.
pub fn synth_client_update(seed: u64, round: usize, client: usize, dim: usize) -> Vec<f64> {
    let mut h = Sha256::new();
    h.update(b"VTSAFL-sim-update|");
    h.update(seed.to_be_bytes());
    h.update((round as u64).to_be_bytes());
    h.update((client as u64).to_be_bytes());
    let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
    (0..dim)
        .map(|_| {
            // 53 random bits -> [0, 1) -> [-1, 1)
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            2.0 * u - 1.0
        })
        .collect()
}

/// Plaintext-side FedAvg reference: the coordinate-wise mean of the
/// quantized updates, dequantized.
pub fn fedavg_oracle(updates: &[Vec<f64>], scale: u64) -> Vec<f64> {
    let n = updates.len();
    let dim = updates[0].len();
    (0..dim)
        .map(|m| {
            let sum: i64 = updates.iter().map(|u| quantize(u[m], scale)).sum();
            dequantize(sum, scale) / n as f64
        })
        .collect()
}

pub fn round_label(round: usize, coord: usize) -> Vec<u8> {
    format!("round-{round}|coord-{coord}").into_bytes()
}

/// Per-round traffic totals, in bytes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteCounts {
    pub ciphertexts: usize,
    pub key_shares: usize,
    pub key_commitments: usize,
    pub partial_decryptions: usize,
}

/// Wall-clock phase timings, milliseconds. Excluded from determinism
/// comparisons.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timings {
    pub encrypt_ms: f64,
    pub share_decrypt_ms: f64,
    pub verify_ms: f64,
    pub combine_ms: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub success: bool,
    /// Subset that produced the accepted result.
    pub subset: Vec<usize>,
    /// Coordinator attempts (1 = no retry needed).
    pub attempts: usize,
    /// Aggregators rejected or unresponsive this round, with reasons.
    pub rejected: Vec<(usize, String)>,
    /// Recovered FedAvg mean per coordinate.
    pub aggregate: Vec<f64>,
    /// Raw recovered sums before dividing by `n * scale`.
    pub quantized_sums: Vec<i64>,
    pub bytes: ByteCounts,
    pub timings: Timings,
}

impl RoundReport {
    /// Copy with timings zeroed, for determinism comparisons.
    pub fn deterministic_view(&self) -> RoundReport {
        let mut r = self.clone();
        r.timings = Timings::default();
        r
    }
}

pub struct Simulator<G: Group> {
    pub config: SimConfig,
    pub pp: PublicParams<G>,
    msk: MasterSecretKey,
    encryption_keys: Vec<EncryptionKey>,
    table: DlogTable<G>,
    rng: ChaCha20Rng,
    /// Stored previous-round partials for replaying aggregators:
    /// aggregator -> per-coordinate partial decryptions.
    replay_store: BTreeMap<usize, Vec<PartialDecryption<G>>>,
    next_round: usize,
}

impl<G: Group> Simulator<G> {
    pub fn new(group: G, config: SimConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        // |quantized coordinate| <= scale, so the sum over n clients
        // fits in [-n*scale, n*scale].
        let bound = config
            .bound
            .unwrap_or(config.clients as u64 * config.scale);
        let (pp, msk, encryption_keys) = vtmcfe::setup(
            group.clone(),
            config.threshold,
            config.aggregators,
            config.clients,
            config.rounds,
            config.scale,
            &mut rng,
        )?;
        let table = DlogTable::new(group, pp.group.generator(), bound);
        Ok(Simulator {
            config,
            pp,
            msk,
            encryption_keys,
            table,
            rng,
            replay_store: BTreeMap::new(),
            next_round: 1,
        })
    }

    /// Runs the next round end to end. `Err` means the coordinator ran
    /// out of usable aggregators.
    pub fn run_round(&mut self) -> Result<RoundReport> {
        let round = self.next_round;
        self.pp.check_round(round)?;
        let cfg = self.config.clone();
        let n = cfg.clients;
        let y = vec![1i64; n];
        let mut bytes = ByteCounts::default();
        let mut timings = Timings::default();

        let updates: Vec<Vec<f64>> = (1..=n)
            .map(|i| synth_client_update(cfg.seed, round, i, cfg.dim))
            .collect();

        let t0 = Instant::now();
        // ciphertexts[m][i-1]: coordinate-major.
        let mut ciphertexts: Vec<Vec<LabeledCiphertext<G>>> = Vec::with_capacity(cfg.dim);
        for m in 0..cfg.dim {
            let label = round_label(round, m);
            let mut per_coord = Vec::with_capacity(n);
            for (i, ek) in self.encryption_keys.iter().enumerate() {
                let q = quantize(updates[i][m], cfg.scale);
                let ct = vtmcfe::encrypt(&self.pp, ek, q, &label)?;
                bytes.ciphertexts += ct.wire_bytes(&self.pp.group).len();
                per_coord.push(ct);
            }
            ciphertexts.push(per_coord);
        }
        timings.encrypt_ms = t0.elapsed().as_secs_f64() * 1e3;

        let (key_shares, commitments) = vtmcfe::dkeygen(&self.pp, &self.msk, &y, round)?;
        for sh in &key_shares {
            bytes.key_shares += sh.wire_bytes(&self.pp.group)?.len();
        }
        bytes.key_commitments += commitments.wire_bytes(&self.pp.group).len();

        let mut excluded: BTreeSet<usize> = BTreeSet::new();
        let mut rejected_log: Vec<(usize, String)> = Vec::new();
        let mut attempts = 0usize;
        let mut honest_cache: BTreeMap<usize, Vec<PartialDecryption<G>>> = BTreeMap::new();

        loop {
            let subset: Vec<usize> = (1..=cfg.aggregators)
                .filter(|j| !excluded.contains(j))
                .take(cfg.threshold)
                .collect();
            if subset.len() < cfg.threshold {
                return Err(Error::Protocol(format!(
                    "round {round}: only {} usable aggregators, need {}",
                    subset.len(),
                    cfg.threshold
                )));
            }
            attempts += 1;
            honest_cache.clear();

            // Collect responses. None = crash.
            let t1 = Instant::now();
            let mut responses: BTreeMap<usize, Vec<PartialDecryption<G>>> = BTreeMap::new();
            let mut crashed: Vec<usize> = Vec::new();
            for &j in &subset {
                match self.aggregator_response(
                    j,
                    round,
                    &subset,
                    &ciphertexts,
                    &y,
                    &key_shares[j - 1],
                    &mut honest_cache,
                )? {
                    Some(partials) => {
                        for pd in &partials {
                            bytes.partial_decryptions +=
                                pd.wire_bytes(&self.pp.group)?.len();
                        }
                        responses.insert(j, partials);
                    }
                    None => crashed.push(j),
                }
            }
            timings.share_decrypt_ms += t1.elapsed().as_secs_f64() * 1e3;
            if !crashed.is_empty() {
                for j in crashed {
                    excluded.insert(j);
                    rejected_log.push((j, "no-response".into()));
                }
                continue;
            }

            // Verify per coordinate; any rejection anywhere excludes
            // the aggregator and forces a re-selection.
            let t2 = Instant::now();
            let mut newly_bad: BTreeMap<usize, String> = BTreeMap::new();
            for m in 0..cfg.dim {
                let label = round_label(round, m);
                let batch: Vec<PartialDecryption<G>> =
                    subset.iter().map(|j| responses[j][m].clone()).collect();
                let outcome =
                    vtmcfe::verify(&self.pp, &batch, &commitments, round, &label)?;
                for (j, reason) in outcome.rejected {
                    newly_bad.entry(j).or_insert_with(|| reason.to_string());
                }
            }
            timings.verify_ms += t2.elapsed().as_secs_f64() * 1e3;
            if !newly_bad.is_empty() {
                for (j, reason) in newly_bad {
                    excluded.insert(j);
                    rejected_log.push((j, reason));
                }
                continue;
            }

            // All proofs check out: combine every coordinate.
            let t3 = Instant::now();
            let mut quantized_sums = Vec::with_capacity(cfg.dim);
            for m in 0..cfg.dim {
                let label = round_label(round, m);
                let batch: Vec<PartialDecryption<G>> =
                    subset.iter().map(|j| responses[j][m].clone()).collect();
                quantized_sums.push(vtmcfe::combine_recover(
                    &self.pp, &batch, &label, &self.table,
                )?);
            }
            timings.combine_ms = t3.elapsed().as_secs_f64() * 1e3;

            // Honest aggregators (in-subset or not) remember this
            // round's honest partials for potential replay next round.
            for j in 1..=cfg.aggregators {
                if cfg.behavior(j) == AggBehavior::ReplayPrevious {
                    if let Some(honest) = honest_cache.get(&j) {
                        self.replay_store.insert(j, honest.clone());
                    }
                }
            }

            let aggregate = quantized_sums
                .iter()
                .map(|&q| dequantize(q, cfg.scale) / n as f64)
                .collect();
            self.next_round += 1;
            return Ok(RoundReport {
                round,
                success: true,
                subset,
                attempts,
                rejected: rejected_log,
                aggregate,
                quantized_sums,
                bytes,
                timings,
            });
        }
    }

    /// What aggregator `j` sends back for all coordinates, shaped by
    /// its configured behavior. `None` models a crash.
    #[allow(clippy::too_many_arguments)]
    fn aggregator_response(
        &mut self,
        j: usize,
        round: usize,
        subset: &[usize],
        ciphertexts: &[Vec<LabeledCiphertext<G>>],
        y: &[i64],
        key_share: &FunctionalKeyShare,
        honest_cache: &mut BTreeMap<usize, Vec<PartialDecryption<G>>>,
    ) -> Result<Option<Vec<PartialDecryption<G>>>> {
        let behavior = self.config.behavior(j);
        if behavior == AggBehavior::Crash {
            return Ok(None);
        }
        let mut honest = Vec::with_capacity(ciphertexts.len());
        for (m, per_coord) in ciphertexts.iter().enumerate() {
            let label = round_label(round, m);
            honest.push(vtmcfe::share_decrypt(
                &self.pp, per_coord, y, key_share, subset, round, &label, &mut self.rng,
            )?);
        }
        honest_cache.insert(j, honest.clone());
        let g = &self.pp.group;
        let partials = match behavior {
            AggBehavior::Honest | AggBehavior::Crash => honest,
            AggBehavior::TamperPartial => honest
                .into_iter()
                .map(|mut pd| {
                    pd.ct1 = g.mul(&pd.ct1, &g.generator());
                    pd
                })
                .collect(),
            AggBehavior::RandomOutput => {
                let mut out = Vec::with_capacity(honest.len());
                for mut pd in honest {
                    pd.ct0 = g.exp_g(&g.random_scalar(&mut self.rng));
                    pd.ct1 = g.exp_g(&g.random_scalar(&mut self.rng));
                    pd.ct2 = g.exp_g(&g.random_scalar(&mut self.rng));
                    out.push(pd);
                }
                out
            }
            AggBehavior::ReplayPrevious => match self.replay_store.get(&j) {
                Some(prev) if prev.len() == ciphertexts.len() => prev.clone(),
                // Nothing to replay yet: present this round's values
                // stamped as the (nonexistent) previous round.
                _ => honest
                    .into_iter()
                    .map(|mut pd| {
                        pd.round = round - 1;
                        pd
                    })
                    .collect(),
            },
        };
        Ok(Some(partials))
    }

    /// Runs all configured rounds, collecting reports; stops at the
    /// first failed round and returns the error alongside the reports
    /// gathered so far.
    pub fn run_all(&mut self) -> (Vec<RoundReport>, Option<Error>) {
        let mut reports = Vec::new();
        for _ in self.next_round..=self.config.rounds {
            match self.run_round() {
                Ok(r) => reports.push(r),
                Err(e) => return (reports, Some(e)),
            }
        }
        (reports, None)
    }
}
