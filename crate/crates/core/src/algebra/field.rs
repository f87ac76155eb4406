use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::numtheory::{is_probable_prime, is_quadratic_residue, sqrt_mod};
use super::AlgebraError;

/// Arithmetic shared by GF(p) and GF(p²) so the curve law can be written once.
///
/// Binary operations panic if the operands live in different fields; use the
/// `try_*` methods on the concrete types when the moduli are not known to match.
pub trait FieldOps: Clone + Eq + fmt::Debug {
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inverse(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    /// Canonical big-endian encoding.
    fn to_bytes(&self) -> Vec<u8>;

    fn square(&self) -> Self {
        self.mul(self)
    }

    fn double(&self) -> Self {
        self.add(self)
    }

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }

    fn small_like(&self, v: u64) -> Self;

    fn pow(&self, exp: &BigUint) -> Self {
        let mut acc = self.one_like();
        for i in (0..exp.bits()).rev() {
            acc = acc.square();
            if exp.bit(i) {
                acc = acc.mul(self);
            }
        }
        acc
    }
}

/// The prime field GF(p) together with the non-residue `d` that fixes the
/// GF(p²) basis `β² = d`.
#[derive(PartialEq, Eq)]
pub struct PrimeField {
    modulus: BigUint,
    nonresidue: BigUint,
    byte_len: usize,
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.modulus)
    }
}

impl PrimeField {
    /// Builds GF(p) for an odd prime p ≡ 2 (mod 3).
    pub fn new(p: BigUint) -> Result<Arc<Self>, AlgebraError> {
        if p <= BigUint::from(3u32) || !is_probable_prime(&p) {
            return Err(AlgebraError::NotPrime(p));
        }
        if (&p % 3u32) != BigUint::from(2u32) {
            return Err(AlgebraError::WrongResidueClass(p));
        }
        // smallest quadratic non-residue, ascending from 2
        let mut d = BigUint::from(2u32);
        while is_quadratic_residue(&d, &p) {
            d += 1u32;
        }
        let byte_len = p.bits().div_ceil(8) as usize;
        Ok(Arc::new(PrimeField { modulus: p, nonresidue: d, byte_len }))
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// The `d` with β² = d in GF(p²).
    pub fn nonresidue(&self) -> &BigUint {
        &self.nonresidue
    }

    /// Fixed serialization width ⌈k/8⌉ of one element.
    pub fn byte_len(&self) -> usize {
        self.byte_len
    }

    pub fn element(self: &Arc<Self>, value: impl Into<BigUint>) -> FieldElement {
        FieldElement { value: value.into() % &self.modulus, field: Arc::clone(self) }
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        FieldElement { value: BigUint::zero(), field: Arc::clone(self) }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        FieldElement { value: BigUint::one(), field: Arc::clone(self) }
    }

    /// Reduces an arbitrary big-endian byte string modulo p.
    pub fn from_be_bytes_reduced(self: &Arc<Self>, bytes: &[u8]) -> FieldElement {
        self.element(BigUint::from_bytes_be(bytes))
    }

    /// Parses a canonical fixed-width encoding; rejects values ≥ p.
    pub fn decode(self: &Arc<Self>, bytes: &[u8]) -> Result<FieldElement, AlgebraError> {
        if bytes.len() != self.byte_len {
            return Err(AlgebraError::Encoding("field element length"));
        }
        let value = BigUint::from_bytes_be(bytes);
        if value >= self.modulus {
            return Err(AlgebraError::Encoding("field element not reduced"));
        }
        Ok(FieldElement { value, field: Arc::clone(self) })
    }

    pub(crate) fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || a.modulus == b.modulus
    }
}

/// An element of GF(p), always held in canonical form `0 ≤ value < p`.
#[derive(Clone)]
pub struct FieldElement {
    value: BigUint,
    field: Arc<PrimeField>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && PrimeField::same(&self.field, &other.field)
    }
}

impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElement {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        &self.field
    }

    fn check(&self, rhs: &Self) -> Result<(), AlgebraError> {
        if PrimeField::same(&self.field, &rhs.field) {
            Ok(())
        } else {
            Err(AlgebraError::ModulusMismatch)
        }
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.check(rhs)?;
        let sum = &self.value + &rhs.value;
        let p = self.field.modulus();
        Ok(self.with(if &sum >= p { sum - p } else { sum }))
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.check(rhs)?;
        Ok(self.with((&self.value * &rhs.value) % self.field.modulus()))
    }

    fn with(&self, value: BigUint) -> Self {
        FieldElement { value, field: Arc::clone(&self.field) }
    }

    pub fn is_square(&self) -> bool {
        self.value.is_zero() || is_quadratic_residue(&self.value, self.field.modulus())
    }

    /// Some square root, or `None` for a non-residue.
    pub fn sqrt(&self) -> Option<Self> {
        sqrt_mod(&self.value, self.field.modulus()).map(|r| self.with(r))
    }

    /// Parity of the canonical representative, used to pick a root's sign.
    pub fn is_odd(&self) -> bool {
        self.value.bit(0)
    }
}

impl FieldOps for FieldElement {
    fn add(&self, rhs: &Self) -> Self {
        self.try_add(rhs).expect("field modulus mismatch")
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.check(rhs).expect("field modulus mismatch");
        let p = self.field.modulus();
        if self.value >= rhs.value {
            self.with(&self.value - &rhs.value)
        } else {
            self.with(p - &rhs.value + &self.value)
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.try_mul(rhs).expect("field modulus mismatch")
    }

    fn neg(&self) -> Self {
        if self.value.is_zero() {
            self.clone()
        } else {
            self.with(self.field.modulus() - &self.value)
        }
    }

    fn inverse(&self) -> Option<Self> {
        if self.value.is_zero() {
            return None;
        }
        self.value.modinv(self.field.modulus()).map(|v| self.with(v))
    }

    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn zero_like(&self) -> Self {
        self.with(BigUint::zero())
    }

    fn one_like(&self) -> Self {
        self.with(BigUint::one())
    }

    fn small_like(&self, v: u64) -> Self {
        self.with(BigUint::from(v) % self.field.modulus())
    }

    fn to_bytes(&self) -> Vec<u8> {
        let raw = if self.value.is_zero() { Vec::new() } else { self.value.to_bytes_be() };
        let mut out = vec![0u8; self.field.byte_len() - raw.len()];
        out.extend_from_slice(&raw);
        out
    }

    fn pow(&self, exp: &BigUint) -> Self {
        self.with(self.value.modpow(exp, self.field.modulus()))
    }
}

macro_rules! forward_ops {
    ($t:ty) => {
        impl<'a> Add<&'a $t> for &'a $t {
            type Output = $t;
            fn add(self, rhs: &'a $t) -> $t {
                FieldOps::add(self, rhs)
            }
        }
        impl<'a> Sub<&'a $t> for &'a $t {
            type Output = $t;
            fn sub(self, rhs: &'a $t) -> $t {
                FieldOps::sub(self, rhs)
            }
        }
        impl<'a> Mul<&'a $t> for &'a $t {
            type Output = $t;
            fn mul(self, rhs: &'a $t) -> $t {
                FieldOps::mul(self, rhs)
            }
        }
        impl<'a> Neg for &'a $t {
            type Output = $t;
            fn neg(self) -> $t {
                FieldOps::neg(self)
            }
        }
    };
}

forward_ops!(FieldElement);
forward_ops!(super::Fp2Element);
