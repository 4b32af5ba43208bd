//! Multi-secret sharing over Z_p from a homogeneous linear recursion.
//!
//! The recursion `w_{i+t} + a_1 w_{i+t-1} + ... + a_t w_i = 0 (mod p)`
//! has characteristic polynomial `(x - alpha)^t`, a single root of
//! multiplicity `t`. Every solution then has the closed form
//! `w_i = q(i) * alpha^i` for a polynomial `q` of degree < t, which is
//! what reconstruction interpolates.
//!
//! Participant `j` (1-based) holds the term `w_{t+j-1}`, i.e. the
//! evaluation of `q` at the node `t+j-1` scaled by `alpha^{t+j-1}`.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::RngCore;

use crate::{field, Error, Result};

/// Public parameters of the sharing scheme.
#[derive(Clone, Debug)]
pub struct MssParams {
    pub modulus: BigUint,
    pub alpha: BigUint,
    pub threshold: usize,
    pub participants: usize,
    /// Coefficients `a_1..a_t` of `(x - alpha)^t`.
    pub coeffs: Vec<BigUint>,
}

impl MssParams {
    pub fn new(modulus: BigUint, alpha: BigUint, threshold: usize, participants: usize) -> Result<Self> {
        if threshold < 2 {
            return Err(Error::Parameter("threshold must be at least 2".into()));
        }
        if participants < threshold {
            return Err(Error::Parameter(format!(
                "participants ({participants}) below threshold ({threshold})"
            )));
        }
        let alpha = alpha % &modulus;
        if alpha.is_zero() {
            return Err(Error::Parameter("alpha must be nonzero".into()));
        }
        let coeffs = expand_char_poly(&alpha, threshold, &modulus);
        Ok(MssParams {
            modulus,
            alpha,
            threshold,
            participants,
            coeffs,
        })
    }
}

/// The shared recursion state: initial terms `w_0..w_{t-1}` and the
/// generated shares `w_t..w_{t+s-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HlrSequence {
    pub initial: Vec<BigUint>,
    pub shares: Vec<BigUint>,
}

impl HlrSequence {
    /// Share of participant `j` (1-based), i.e. `w_{t+j-1}`.
    pub fn share(&self, j: usize) -> &BigUint {
        &self.shares[j - 1]
    }
}

/// Expands `(x - alpha)^t mod p` and returns `a_1..a_t` such that the
/// polynomial equals `x^t + sum a_i x^{t-i}`.
pub fn expand_char_poly(alpha: &BigUint, t: usize, p: &BigUint) -> Vec<BigUint> {
    // Iterated multiplication by (x - alpha); coeff[i] is the
    // coefficient of x^{deg - i}.
    let neg_alpha = field::neg(alpha, p);
    let mut coeffs: Vec<BigUint> = vec![field::one()];
    for _ in 0..t {
        let mut next = vec![BigUint::zero(); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] = field::add(&next[i], c, p);
            next[i + 1] = field::mul(c, &neg_alpha, p);
        }
        coeffs = next;
    }
    coeffs.remove(0);
    coeffs
}

/// Computes `w_{i+t} = -(a_1 w_{i+t-1} + ... + a_t w_i)` for the next term.
fn next_term(window: &[BigUint], coeffs: &[BigUint], p: &BigUint) -> BigUint {
    let t = coeffs.len();
    let mut acc = BigUint::zero();
    for (k, a) in coeffs.iter().enumerate() {
        // a_{k+1} multiplies w at offset t-1-k within the window.
        acc = field::add(&acc, &field::mul(a, &window[t - 1 - k], p), p);
    }
    field::neg(&acc, p)
}

/// Shares `m <= t` secrets; the remaining initial terms are drawn at random.
pub fn share(params: &MssParams, secrets: &[BigUint], rng: &mut impl RngCore) -> Result<HlrSequence> {
    let fillers: Vec<BigUint> = (secrets.len()..params.threshold)
        .map(|_| field::random(&params.modulus, rng))
        .collect();
    share_with_fillers(params, secrets, &fillers)
}

/// Shares `m <= t` secrets with caller-supplied values for the remaining
/// initial terms `w_m..w_{t-1}`.
pub fn share_with_fillers(
    params: &MssParams,
    secrets: &[BigUint],
    fillers: &[BigUint],
) -> Result<HlrSequence> {
    let t = params.threshold;
    let m = secrets.len();
    if m == 0 || m > t {
        return Err(Error::Parameter(format!(
            "secret count {m} outside [1, {t}]"
        )));
    }
    if fillers.len() != t - m {
        return Err(Error::Parameter(format!(
            "expected {} filler terms, got {}",
            t - m,
            fillers.len()
        )));
    }
    let p = &params.modulus;
    let mut seq: Vec<BigUint> = secrets.iter().map(|s| s % p).collect();
    seq.extend(fillers.iter().map(|f| f % p));
    for i in 0..params.participants {
        let window = &seq[i..i + t];
        let next = next_term(window, &params.coeffs, p);
        seq.push(next);
    }
    let shares = seq.split_off(t);
    Ok(HlrSequence {
        initial: seq,
        shares,
    })
}

/// Lagrange coefficient moving the node evaluations `{t+j'-1 : j' in S'}`
/// to the evaluation point `e`:
/// `lambda_{j,e} = prod_{j' != j} (e - (t+j'-1)) / (j - j')  mod p`.
pub fn lagrange_coeff(
    eval_point: i64,
    member: usize,
    subset: &[usize],
    t: usize,
    p: &BigUint,
) -> Result<BigUint> {
    if !subset.contains(&member) {
        return Err(Error::Parameter(format!(
            "member {member} not in the interpolation subset"
        )));
    }
    let mut num = field::one();
    let mut den = field::one();
    for &other in subset {
        if other == member {
            continue;
        }
        let node = (t + other - 1) as i64;
        num = field::mul(&num, &field::from_i128((eval_point - node) as i128, p), p);
        den = field::mul(
            &den,
            &field::from_i128(member as i128 - other as i128, p),
            p,
        );
    }
    Ok(field::mul(&num, &field::inv(&den, p)?, p))
}

/// Reconstructs the first `m` secrets from exactly `t` shares given as
/// `(participant index, share)` pairs.
pub fn reconstruct(
    params: &MssParams,
    subset: &[(usize, BigUint)],
    m: usize,
) -> Result<Vec<BigUint>> {
    let t = params.threshold;
    if subset.len() != t {
        return Err(Error::Threshold {
            expected: t,
            got: subset.len(),
        });
    }
    let indices: Vec<usize> = subset.iter().map(|(j, _)| *j).collect();
    for (pos, &j) in indices.iter().enumerate() {
        if j < 1 || j > params.participants {
            return Err(Error::Parameter(format!("index {j} outside [1, s]")));
        }
        if indices[..pos].contains(&j) {
            return Err(Error::Parameter(format!("duplicate index {j}")));
        }
    }
    if m == 0 || m > t {
        return Err(Error::Parameter(format!(
            "secret count {m} outside [1, {t}]"
        )));
    }
    let p = &params.modulus;
    // q(t+j-1) = sh_j / alpha^{t+j-1}
    let q_values: Vec<BigUint> = subset
        .iter()
        .map(|(j, sh)| {
            let node = (t + j - 1) as u64;
            let alpha_pow = field::pow_u64(&params.alpha, node, p);
            Ok(field::mul(sh, &field::inv(&alpha_pow, p)?, p))
        })
        .collect::<Result<_>>()?;
    // sigma_{i+1} = q(i) * alpha^i
    (0..m)
        .map(|i| {
            let mut q_at_i = BigUint::zero();
            for ((j, _), qv) in subset.iter().zip(&q_values) {
                let lambda = lagrange_coeff(i as i64, *j, &indices, t, p)?;
                q_at_i = field::add(&q_at_i, &field::mul(&lambda, qv, p), p);
            }
            Ok(field::mul(&q_at_i, &field::pow_u64(&params.alpha, i as u64, p), p))
        })
        .collect()
}

/// Residual of the defining recursion at window `i`; zero for any valid
/// sequence. Test and assertion helper.
pub fn recursion_residual(params: &MssParams, seq: &HlrSequence, i: usize) -> BigUint {
    let p = &params.modulus;
    let t = params.threshold;
    let full: Vec<&BigUint> = seq.initial.iter().chain(seq.shares.iter()).collect();
    let mut acc = full[i + t].clone();
    for (k, a) in params.coeffs.iter().enumerate() {
        acc = field::add(&acc, &field::mul(a, full[i + t - 1 - k], p), p);
    }
    acc
}
