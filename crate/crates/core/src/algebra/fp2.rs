use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use super::field::{FieldElement, FieldOps, PrimeField};
use super::AlgebraError;

/// An element `c0 + c1·β` of GF(p²) = GF(p)[β]/(β² − d).
#[derive(Clone, PartialEq, Eq)]
pub struct Fp2Element {
    c0: FieldElement,
    c1: FieldElement,
}

impl fmt::Debug for Fp2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}β)", self.c0, self.c1)
    }
}

impl fmt::Display for Fp2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Fp2Element {
    pub fn new(c0: FieldElement, c1: FieldElement) -> Result<Self, AlgebraError> {
        if !PrimeField::same(c0.field(), c1.field()) {
            return Err(AlgebraError::ModulusMismatch);
        }
        Ok(Fp2Element { c0, c1 })
    }

    /// Embeds a base-field element as `a + 0·β`.
    pub fn from_base(a: FieldElement) -> Self {
        let c1 = a.zero_like();
        Fp2Element { c0: a, c1 }
    }

    pub fn c0(&self) -> &FieldElement {
        &self.c0
    }

    pub fn c1(&self) -> &FieldElement {
        &self.c1
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        self.c0.field()
    }

    pub fn is_base(&self) -> bool {
        self.c1.is_zero()
    }

    fn nonresidue(&self) -> FieldElement {
        self.c0.field().element(self.c0.field().nonresidue().clone())
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        if !PrimeField::same(self.field(), rhs.field()) {
            return Err(AlgebraError::ModulusMismatch);
        }
        // base-field operands need two products instead of five
        if rhs.c1.is_zero() {
            return Ok(Fp2Element { c0: &self.c0 * &rhs.c0, c1: &self.c1 * &rhs.c0 });
        }
        if self.c1.is_zero() {
            return Ok(Fp2Element { c0: &self.c0 * &rhs.c0, c1: &self.c0 * &rhs.c1 });
        }
        let d = self.nonresidue();
        let a0b0 = &self.c0 * &rhs.c0;
        let a1b1 = &self.c1 * &rhs.c1;
        let cross = &(&self.c0 * &rhs.c1) + &(&self.c1 * &rhs.c0);
        Ok(Fp2Element { c0: &a0b0 + &(&d * &a1b1), c1: cross })
    }

    /// The Galois conjugate `c0 − c1·β` (equal to the p-th power map).
    pub fn conjugate(&self) -> Self {
        Fp2Element { c0: self.c0.clone(), c1: -&self.c1 }
    }

    /// Norm to GF(p): `c0² − d·c1²`.
    pub fn norm(&self) -> FieldElement {
        &self.c0.square() - &(&self.nonresidue() * &self.c1.square())
    }

    /// The lexicographically smallest primitive cube root of unity.
    ///
    /// Since p ≡ 2 (mod 3), −3 is a non-residue mod p, so −3 = d·t² for some
    /// t in GF(p) and the roots of z² + z + 1 are (−1 ± t·β)/2.
    pub fn primitive_cube_root(field: &Arc<PrimeField>) -> Self {
        let d = field.element(field.nonresidue().clone());
        let minus_three = -&field.element(3u32);
        let ratio = &minus_three * &d.inverse().expect("d is nonzero");
        let t = ratio.sqrt().expect("-3/d is a square when -3 and d are non-residues");
        let half = field.element(2u32).inverse().expect("p is odd");
        let c0 = -&half;
        let c1 = &t * &half;
        let alt = -&c1;
        let c1 = if c1.value() <= alt.value() { c1 } else { alt };
        Fp2Element { c0, c1 }
    }

    pub fn decode(field: &Arc<PrimeField>, bytes: &[u8]) -> Result<Self, AlgebraError> {
        let w = field.byte_len();
        if bytes.len() != 2 * w {
            return Err(AlgebraError::Encoding("fp2 element length"));
        }
        Ok(Fp2Element { c0: field.decode(&bytes[..w])?, c1: field.decode(&bytes[w..])? })
    }
}

impl PartialOrd for Fp2Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on (c0, c1) canonical representatives.
impl Ord for Fp2Element {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.c0.value(), self.c1.value()).cmp(&(other.c0.value(), other.c1.value()))
    }
}

impl FieldOps for Fp2Element {
    fn add(&self, rhs: &Self) -> Self {
        Fp2Element { c0: &self.c0 + &rhs.c0, c1: &self.c1 + &rhs.c1 }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Fp2Element { c0: &self.c0 - &rhs.c0, c1: &self.c1 - &rhs.c1 }
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.try_mul(rhs).expect("field modulus mismatch")
    }

    fn neg(&self) -> Self {
        Fp2Element { c0: -&self.c0, c1: -&self.c1 }
    }

    fn inverse(&self) -> Option<Self> {
        let n_inv = self.norm().inverse()?;
        Some(Fp2Element { c0: &self.c0 * &n_inv, c1: &(-&self.c1) * &n_inv })
    }

    fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero()
    }

    fn zero_like(&self) -> Self {
        Fp2Element { c0: self.c0.zero_like(), c1: self.c0.zero_like() }
    }

    fn one_like(&self) -> Self {
        Fp2Element { c0: self.c0.one_like(), c1: self.c0.zero_like() }
    }

    fn small_like(&self, v: u64) -> Self {
        Fp2Element { c0: self.c0.small_like(v), c1: self.c0.zero_like() }
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.c0.to_bytes();
        out.extend(self.c1.to_bytes());
        out
    }

    fn square(&self) -> Self {
        // (a + bβ)² = a² + d·b² + 2ab·β
        let d = self.nonresidue();
        let ab = &self.c0 * &self.c1;
        Fp2Element { c0: &self.c0.square() + &(&d * &self.c1.square()), c1: ab.double() }
    }
}

/// `a^k` by square-and-multiply; `a^0 = 1`.
pub fn fp2_pow(a: &Fp2Element, k: &BigUint) -> Fp2Element {
    a.pow(k)
}

/// Product in GF(p²), failing on operands from different fields.
pub fn fp2_mul(a: &Fp2Element, b: &Fp2Element) -> Result<Fp2Element, AlgebraError> {
    a.try_mul(b)
}
