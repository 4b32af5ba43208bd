//! Bounded discrete-logarithm recovery via baby-step giant-step.
//!
//! The final combination step leaves `base^beta` with `beta` the signed
//! aggregate inner product. The table covers `beta in [-B, B]` by
//! solving for the shifted exponent `beta + B in [0, 2B]`, in
//! `O(sqrt(B))` time and space after a one-time table build.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::group::Group;
use crate::{Error, Result};

pub struct DlogTable<G: Group> {
    group: G,
    base: G::Element,
    bound: u64,
    /// Baby-step map: encoding of `base^j` -> j, for j < stride.
    baby: HashMap<Vec<u8>, u64>,
    /// `base^{-stride}`.
    giant: G::Element,
    stride: u64,
}

impl<G: Group> DlogTable<G> {
    /// Builds the table for exponents in `[-bound, bound]`.
    pub fn new(group: G, base: G::Element, bound: u64) -> Self {
        let window = 2 * bound + 1;
        let stride = (window as f64).sqrt().ceil() as u64;
        let mut baby = HashMap::with_capacity(stride as usize);
        let mut cur = group.identity();
        for j in 0..stride {
            baby.entry(group.element_to_bytes(&cur)).or_insert(j);
            cur = group.mul(&cur, &base);
        }
        let giant = group.invert(&cur); // cur = base^stride here
        DlogTable {
            group,
            base,
            bound,
            baby,
            giant,
            stride,
        }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn base(&self) -> &G::Element {
        &self.base
    }

    /// Returns `beta in [-B, B]` with `target = base^beta`, or an
    /// out-of-range error (aggregate overflow or a corrupted
    /// combination that slipped past verification).
    pub fn solve(&self, target: &G::Element) -> Result<i64> {
        let g = &self.group;
        // Shift by +B so the search window is [0, 2B].
        let mut cur = g.mul(target, &g.exp(&self.base, &BigUint::from(self.bound)));
        let giant_steps = (2 * self.bound) / self.stride + 1;
        for gi in 0..=giant_steps {
            if let Some(&bj) = self.baby.get(&g.element_to_bytes(&cur)) {
                let shifted = gi * self.stride + bj;
                if shifted <= 2 * self.bound {
                    return Ok(shifted as i64 - self.bound as i64);
                }
            }
            cur = g.mul(&cur, &self.giant);
        }
        Err(Error::OutOfRange(format!(
            "no exponent in [-{}, {}] matches the target",
            self.bound, self.bound
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field;
    use crate::group::ModpGroup;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn table(bound: u64) -> DlogTable<ModpGroup> {
        let group = ModpGroup::default_group();
        let base = group.generator();
        DlogTable::new(group, base, bound)
    }

    fn power(t: &DlogTable<ModpGroup>, e: i64) -> <ModpGroup as Group>::Element {
        let g = &t.group;
        let exp = field::from_i128(e as i128, g.order());
        g.exp(t.base(), &exp)
    }

    #[test]
    fn identity_is_zero() {
        let t = table(100);
        assert_eq!(t.solve(&t.group.identity()).unwrap(), 0);
    }

    #[test]
    fn small_exponent() {
        let t = table(1000);
        assert_eq!(t.solve(&power(&t, 42)).unwrap(), 42);
        assert_eq!(t.solve(&power(&t, -42)).unwrap(), -42);
        assert_eq!(t.solve(&power(&t, 1000)).unwrap(), 1000);
        assert_eq!(t.solve(&power(&t, -1000)).unwrap(), -1000);
    }

    #[test]
    fn out_of_range_detected() {
        let t = table(1000);
        assert!(matches!(
            t.solve(&power(&t, 1001)),
            Err(Error::OutOfRange(_))
        ));
        assert!(t.solve(&power(&t, -1001)).is_err());
    }

    #[test]
    fn random_round_trip_and_sign_symmetry() {
        let t = table(50_000);
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let beta: i64 = rng.random_range(-50_000..=50_000);
            assert_eq!(t.solve(&power(&t, beta)).unwrap(), beta);
            assert_eq!(t.solve(&power(&t, -beta)).unwrap(), -beta);
        }
    }
}
