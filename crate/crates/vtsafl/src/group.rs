//! Prime-order cyclic group abstraction.
//!
//! The scheme is written against the [`Group`] trait so backends can be
//! swapped. Two backends are provided:
//!
//! * [`ModpGroup`] — the default: a 2048-bit MODP group with a 256-bit
//!   prime-order subgroup (RFC 5114 parameter set 2). Elements are
//!   subgroup members encoded as fixed-length big-endian residues.
//! * [`ExponentGroup`] — a transparent group where an element *is* its
//!   discrete log. Used by tests that need to check exponent-level
//!   identities; offers no hiding whatsoever.
//!
//! Scalars are canonical `BigUint` values in `[0, order)`; see
//! [`crate::field`].

use num_bigint::BigUint;
use num_traits::{Num, One, Zero};
use rand::RngCore;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::{Arc, Mutex};

use crate::{field, Error, Result};

/// Domain-separation prefix for the label hash H1 (hash-to-group pairs).
pub const DOMAIN_H1: &[u8] = b"VTMCFE-H1|";
/// Domain-separation prefix for the transcript hash H2 (hash-to-scalar).
pub const DOMAIN_H2: &[u8] = b"VTMCFE-H2|";
/// Domain-separation prefix for generic hash-to-group.
pub const DOMAIN_HG: &[u8] = b"VTMCFE-HG|";
/// Label from which the second generator `h` is derived, so that no
/// party knows log_g(h).
pub const H_GENERATOR_LABEL: &[u8] = b"VTMCFE-h-generator";

pub trait Group: Clone + Send + Sync {
    type Element: Clone + PartialEq + Eq + Debug + Send + Sync;

    /// Order `p` of the group (the scalar modulus).
    fn order(&self) -> &BigUint;

    /// Generator `g`.
    fn generator(&self) -> Self::Element;

    /// Independent generator `h`, derived via hash-to-group from
    /// [`H_GENERATOR_LABEL`].
    fn alt_generator(&self) -> Self::Element;

    fn identity(&self) -> Self::Element;

    fn mul(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;

    fn invert(&self, a: &Self::Element) -> Self::Element;

    /// `base^e`; the exponent must be canonical mod `order()`.
    fn exp(&self, base: &Self::Element, e: &BigUint) -> Self::Element;

    /// Deterministic hash onto the group (excluding the identity).
    fn hash_to_group(&self, label: &[u8]) -> Self::Element;

    fn element_len(&self) -> usize;

    fn scalar_len(&self) -> usize;

    fn element_to_bytes(&self, e: &Self::Element) -> Vec<u8>;

    /// Parses a canonical encoding; rejects wrong lengths, non-canonical
    /// encodings and non-members.
    fn element_from_bytes(&self, bytes: &[u8]) -> Result<Self::Element>;

    fn div(&self, a: &Self::Element, b: &Self::Element) -> Self::Element {
        self.mul(a, &self.invert(b))
    }

    fn exp_g(&self, e: &BigUint) -> Self::Element {
        self.exp(&self.generator(), e)
    }

    /// H2: deterministic hash of an arbitrary transcript to a scalar.
    fn hash_to_scalar(&self, transcript: &[u8]) -> BigUint {
        // Expand to order-length + 16 bytes before reducing, keeping the
        // bias below 2^-128.
        let want = self.scalar_len() + 16;
        let wide = expand_message(DOMAIN_H2, transcript, want);
        BigUint::from_bytes_be(&wide) % self.order()
    }

    fn random_scalar(&self, rng: &mut impl RngCore) -> BigUint {
        field::random(self.order(), rng)
    }

    fn scalar_to_bytes(&self, s: &BigUint) -> Result<Vec<u8>> {
        field::to_fixed_bytes(s, self.scalar_len())
    }

    fn scalar_from_bytes(&self, bytes: &[u8]) -> Result<BigUint> {
        field::from_fixed_bytes(bytes, self.scalar_len(), self.order())
    }
}

/// H1: the per-label mask pair `(g^{u_{l,0}}, g^{u_{l,1}})`. The two
/// components are produced with distinct suffixes under the H1 domain.
pub fn hash_to_group_pair<G: Group>(group: &G, label: &[u8]) -> (G::Element, G::Element) {
    let mut first = DOMAIN_H1.to_vec();
    first.extend_from_slice(label);
    first.extend_from_slice(b"|0");
    let mut second = DOMAIN_H1.to_vec();
    second.extend_from_slice(label);
    second.extend_from_slice(b"|1");
    (group.hash_to_group(&first), group.hash_to_group(&second))
}

/// Counter-mode expansion of SHA-256 to an arbitrary output length.
fn expand_message(domain: &[u8], msg: &[u8], out_len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(out_len + 32);
    let mut ctr: u32 = 0;
    while out.len() < out_len {
        let mut h = Sha256::new();
        h.update(domain);
        h.update((msg.len() as u64).to_be_bytes());
        h.update(msg);
        h.update(ctr.to_be_bytes());
        out.extend_from_slice(&h.finalize());
        ctr += 1;
    }
    out.truncate(out_len);
    out
}

/// 2048-bit MODP group with 256-bit prime-order subgroup.
///
/// `modulus` is the 2048-bit prime `q`; the group is the subgroup of
/// order `p | q-1` generated by `g`. Elements are residues mod `q`.
#[derive(Clone, Debug)]
pub struct ModpGroup {
    modulus: BigUint,
    order: BigUint,
    cofactor: BigUint,
    g: BigUint,
    h: BigUint,
    /// Memoized hash-to-group results, shared across clones. Every
    /// client hashes the same label each round, and the cofactor
    /// exponentiation dominates the cost of a hash.
    hash_cache: Arc<Mutex<HashMap<Vec<u8>, BigUint>>>,
}

impl PartialEq for ModpGroup {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
            && self.order == other.order
            && self.g == other.g
            && self.h == other.h
    }
}

impl Eq for ModpGroup {}

// RFC 5114, section 2.3 (2048-bit MODP group with 256-bit prime order subgroup).
const RFC5114_P: &str = "87A8E61DB4B6663CFFBBD19C651959998CEEF608660DD0F25D2CEED4435E3B00E00DF8F1D61957D4FAF7DF4561B2AA3016C3D91134096FAA3BF4296D830E9A7C209E0C6497517ABD5A8A9D306BCF67ED91F9E6725B4758C022E0B1EF4275BF7B6C5BFC11D45F9088B941F54EB1E59BB8BC39A0BF12307F5C4FDB70C581B23F76B63ACAE1CAA6B7902D52526735488A0EF13C6D9A51BFA4AB3AD8347796524D8EF6A167B5A41825D967E144E5140564251CCACB83E6B486F6B3CA3F7971506026C0B857F689962856DED4010ABD0BE621C3A3960A54E710C375F26375D7014103A4B54330C198AF126116D2276E11715F693877FAD7EF09CADB094AE91E1A1597";
const RFC5114_Q: &str = "8CF83642A709A097B447997640129DA299B1A47D1EB3750BA308B0FE64F5FBD3";
const RFC5114_G: &str = "3FB32C9B73134D0B2E77506660EDBD484CA7B18F21EF205407F4793A1A0BA12510DBC15077BE463FFF4FED4AAC0BB555BE3A6C1B0C6B47B1BC3773BF7E8C6F62901228F8C28CBB18A55AE31341000A650196F931C77A57F2DDF463E5E9EC144B777DE62AAAB8A8628AC376D282D6ED3864E67982428EBC831D14348F6F2F9193B5045AF2767164E1DFC967C1FB3F2E55A4BD1BFFE83B9C80D052B985D182EA0ADB2A3B7313D3FE14C8484B1E052588B9B7D2BBD2DF016199ECD06E1557CD0915B3353BBB64E0EC377FD028370DF92B52C7891428CDC67EB6184B523D1DB246C32F63078490F00EF8D647D148D47954515E2327CFEF98C582664B4C0F6CC41659";

impl ModpGroup {
    pub fn default_group() -> Self {
        let modulus = BigUint::from_str_radix(RFC5114_P, 16).expect("modulus constant");
        let order = BigUint::from_str_radix(RFC5114_Q, 16).expect("order constant");
        let g = BigUint::from_str_radix(RFC5114_G, 16).expect("generator constant");
        let cofactor = (&modulus - BigUint::one()) / &order;
        let mut group = ModpGroup {
            modulus,
            order,
            cofactor,
            g,
            h: BigUint::zero(),
            hash_cache: Arc::new(Mutex::new(HashMap::new())),
        };
        let mut label = DOMAIN_HG.to_vec();
        label.extend_from_slice(H_GENERATOR_LABEL);
        group.h = group.hash_raw(&label);
        group
    }

    fn hash_raw(&self, data: &[u8]) -> BigUint {
        if let Some(cached) = self.hash_cache.lock().unwrap().get(data) {
            return cached.clone();
        }
        let y = self.hash_raw_uncached(data);
        self.hash_cache
            .lock()
            .unwrap()
            .insert(data.to_vec(), y.clone());
        y
    }

    fn hash_raw_uncached(&self, data: &[u8]) -> BigUint {
        let mod_len = self.element_len();
        let mut attempt: u32 = 0;
        loop {
            let mut msg = data.to_vec();
            msg.extend_from_slice(&attempt.to_be_bytes());
            let wide = expand_message(DOMAIN_HG, &msg, mod_len + 16);
            let u = BigUint::from_bytes_be(&wide) % &self.modulus;
            // Project into the prime-order subgroup via the cofactor.
            let y = u.modpow(&self.cofactor, &self.modulus);
            if !y.is_one() && !y.is_zero() {
                return y;
            }
            attempt += 1;
        }
    }
}

impl Group for ModpGroup {
    type Element = BigUint;

    fn order(&self) -> &BigUint {
        &self.order
    }

    fn generator(&self) -> BigUint {
        self.g.clone()
    }

    fn alt_generator(&self) -> BigUint {
        self.h.clone()
    }

    fn identity(&self) -> BigUint {
        BigUint::one()
    }

    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.modulus
    }

    fn invert(&self, a: &BigUint) -> BigUint {
        // Subgroup has prime order p, so a^{p-1} is the inverse.
        a.modpow(&(&self.order - BigUint::one()), &self.modulus)
    }

    fn exp(&self, base: &BigUint, e: &BigUint) -> BigUint {
        base.modpow(e, &self.modulus)
    }

    fn hash_to_group(&self, label: &[u8]) -> BigUint {
        self.hash_raw(label)
    }

    fn element_len(&self) -> usize {
        (self.modulus.bits() as usize).div_ceil(8)
    }

    fn scalar_len(&self) -> usize {
        (self.order.bits() as usize).div_ceil(8)
    }

    fn element_to_bytes(&self, e: &BigUint) -> Vec<u8> {
        field::to_fixed_bytes(e, self.element_len()).expect("element within modulus width")
    }

    fn element_from_bytes(&self, bytes: &[u8]) -> Result<BigUint> {
        if bytes.len() != self.element_len() {
            return Err(Error::Encoding(format!(
                "expected {} bytes, got {}",
                self.element_len(),
                bytes.len()
            )));
        }
        let v = BigUint::from_bytes_be(bytes);
        if v.is_zero() || v >= self.modulus {
            return Err(Error::Encoding("non-canonical group element".into()));
        }
        if !v.modpow(&self.order, &self.modulus).is_one() {
            return Err(Error::Encoding("not a subgroup member".into()));
        }
        Ok(v)
    }
}

/// Transparent test group: the additive group of Z_p, written
/// multiplicatively. An element equals the exponent of the implicit
/// generator `1`, so discrete logs are free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentGroup {
    order: BigUint,
}

impl ExponentGroup {
    pub fn new(order: BigUint) -> Self {
        ExponentGroup { order }
    }

    /// log_g of an element: trivial here since g = 1.
    pub fn dlog(&self, e: &BigUint) -> BigUint {
        e.clone()
    }
}

impl Group for ExponentGroup {
    type Element = BigUint;

    fn order(&self) -> &BigUint {
        &self.order
    }

    fn generator(&self) -> BigUint {
        BigUint::one()
    }

    fn alt_generator(&self) -> BigUint {
        let mut label = DOMAIN_HG.to_vec();
        label.extend_from_slice(H_GENERATOR_LABEL);
        self.hash_to_group(&label)
    }

    fn identity(&self) -> BigUint {
        BigUint::zero()
    }

    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        field::add(a, b, &self.order)
    }

    fn invert(&self, a: &BigUint) -> BigUint {
        field::neg(a, &self.order)
    }

    fn exp(&self, base: &BigUint, e: &BigUint) -> BigUint {
        field::mul(base, e, &self.order)
    }

    fn hash_to_group(&self, label: &[u8]) -> BigUint {
        let want = self.scalar_len() + 16;
        let wide = expand_message(DOMAIN_HG, label, want);
        let v = BigUint::from_bytes_be(&wide) % &self.order;
        if v.is_zero() {
            BigUint::one()
        } else {
            v
        }
    }

    fn element_len(&self) -> usize {
        (self.order.bits() as usize).div_ceil(8)
    }

    fn scalar_len(&self) -> usize {
        self.element_len()
    }

    fn element_to_bytes(&self, e: &BigUint) -> Vec<u8> {
        field::to_fixed_bytes(e, self.element_len()).expect("element within order width")
    }

    fn element_from_bytes(&self, bytes: &[u8]) -> Result<BigUint> {
        field::from_fixed_bytes(bytes, self.element_len(), &self.order)
    }
}
