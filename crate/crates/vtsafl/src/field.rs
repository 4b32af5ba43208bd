//! Arithmetic over the scalar field Z_p.
//!
//! Scalars are `BigUint` values kept in canonical form `[0, p)`. Every
//! helper takes the modulus explicitly so the same code serves the
//! production group order and the small-prime instances used in tests.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;

use crate::{Error, Result};

pub fn add(a: &BigUint, b: &BigUint, p: &BigUint) -> BigUint {
    (a + b) % p
}

pub fn sub(a: &BigUint, b: &BigUint, p: &BigUint) -> BigUint {
    ((a + p) - (b % p)) % p
}

pub fn mul(a: &BigUint, b: &BigUint, p: &BigUint) -> BigUint {
    (a * b) % p
}

pub fn neg(a: &BigUint, p: &BigUint) -> BigUint {
    if a.is_zero() {
        BigUint::zero()
    } else {
        p - (a % p)
    }
}

pub fn pow(a: &BigUint, e: &BigUint, p: &BigUint) -> BigUint {
    a.modpow(e, p)
}

/// Inverse via Fermat: `p` must be prime and `a` nonzero mod `p`.
pub fn inv(a: &BigUint, p: &BigUint) -> Result<BigUint> {
    let a = a % p;
    if a.is_zero() {
        return Err(Error::Parameter("inverse of zero".into()));
    }
    let two = BigUint::from(2u8);
    Ok(a.modpow(&(p - &two), p))
}

/// `a^i` for a machine-word exponent.
pub fn pow_u64(a: &BigUint, i: u64, p: &BigUint) -> BigUint {
    a.modpow(&BigUint::from(i), p)
}

/// Canonical embedding of a signed integer.
pub fn from_i128(x: i128, p: &BigUint) -> BigUint {
    if x >= 0 {
        BigUint::from(x as u128) % p
    } else {
        neg(&(BigUint::from(x.unsigned_abs()) % p), p)
    }
}

/// Uniform scalar in `[0, p)` by rejection sampling.
pub fn random(p: &BigUint, rng: &mut impl RngCore) -> BigUint {
    let bits = p.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess_bits = (bytes as u64) * 8 - bits;
    loop {
        let mut buf = vec![0u8; bytes];
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xffu8 >> excess_bits;
        let v = BigUint::from_bytes_be(&buf);
        if &v < p {
            return v;
        }
    }
}

/// Fixed-length big-endian encoding.
pub fn to_fixed_bytes(x: &BigUint, len: usize) -> Result<Vec<u8>> {
    let raw = x.to_bytes_be();
    if raw.len() > len {
        return Err(Error::Encoding(format!(
            "value needs {} bytes, field width is {}",
            raw.len(),
            len
        )));
    }
    let mut out = vec![0u8; len - raw.len()];
    out.extend_from_slice(&raw);
    Ok(out)
}

/// Parse a canonical fixed-length scalar; rejects wrong lengths and
/// non-canonical (>= p) values.
pub fn from_fixed_bytes(bytes: &[u8], len: usize, p: &BigUint) -> Result<BigUint> {
    if bytes.len() != len {
        return Err(Error::Encoding(format!(
            "expected {} bytes, got {}",
            len,
            bytes.len()
        )));
    }
    let v = BigUint::from_bytes_be(bytes);
    if &v >= p {
        return Err(Error::Encoding("non-canonical scalar".into()));
    }
    Ok(v)
}

pub fn one() -> BigUint {
    BigUint::one()
}
