use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use super::field::{FieldElement, FieldOps, PrimeField};
use super::fp2::Fp2Element;
use super::numtheory::is_probable_prime;
use super::AlgebraError;
use crate::hash;

const SETUP_CANDIDATES: u32 = 1024;

/// A point on E: y² = x³ + 1, or the point at infinity.
///
/// Coordinates are either in GF(p) (`CurvePoint<FieldElement>`, the group G)
/// or GF(p²) (`CurvePoint<Fp2Element>`, where the pairing is evaluated).
#[derive(Clone, PartialEq, Eq)]
pub enum CurvePoint<F = FieldElement> {
    Infinity,
    Affine { x: F, y: F },
}

pub type Fp2Point = CurvePoint<Fp2Element>;

impl<F: FieldOps> fmt::Debug for CurvePoint<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Infinity => write!(f, "O"),
            CurvePoint::Affine { x, y } => write!(f, "({x:?}, {y:?})"),
        }
    }
}

fn rhs<F: FieldOps>(x: &F) -> F {
    x.square().mul(x).add(&x.one_like())
}

impl<F: FieldOps> CurvePoint<F> {
    /// Affine point, rejected unless it satisfies the curve equation.
    pub fn new(x: F, y: F) -> Result<Self, AlgebraError> {
        if y.square() != rhs(&x) {
            return Err(AlgebraError::NotOnCurve);
        }
        Ok(CurvePoint::Affine { x, y })
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    pub fn is_on_curve(&self) -> bool {
        match self {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => y.square() == rhs(x),
        }
    }

    pub fn x(&self) -> Option<&F> {
        match self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&F> {
        match self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine { y, .. } => Some(y),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine { x: x.clone(), y: y.neg() },
        }
    }

    /// Chord-and-tangent group law.
    pub fn add(&self, other: &Self) -> Self {
        let (x1, y1, x2, y2) = match (self, other) {
            (CurvePoint::Infinity, _) => return other.clone(),
            (_, CurvePoint::Infinity) => return self.clone(),
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        if x1 == x2 {
            if y1.add(y2).is_zero() {
                return CurvePoint::Infinity;
            }
            return self.double();
        }
        let lambda = y2.sub(y1).mul(&x2.sub(x1).inverse().expect("x1 != x2"));
        Self::from_slope(&lambda, x1, y1, x2)
    }

    pub fn double(&self) -> Self {
        match self {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => {
                if y.is_zero() {
                    return CurvePoint::Infinity;
                }
                let three_x2 = x.square().mul(&x.small_like(3));
                let lambda = three_x2.mul(&y.double().inverse().expect("y != 0"));
                Self::from_slope(&lambda, x, y, x)
            }
        }
    }

    fn from_slope(lambda: &F, x1: &F, y1: &F, x2: &F) -> Self {
        let x3 = lambda.square().sub(x1).sub(x2);
        let y3 = lambda.mul(&x1.sub(&x3)).sub(y1);
        CurvePoint::Affine { x: x3, y: y3 }
    }

    /// `k·P` by double-and-add, most significant bit first.
    pub fn mul(&self, k: &BigUint) -> Self {
        let mut acc = CurvePoint::Infinity;
        for i in (0..k.bits()).rev() {
            acc = acc.double();
            if k.bit(i) {
                acc = acc.add(self);
            }
        }
        acc
    }

    /// Tag byte (0 = infinity, 1 = affine) followed by `x ∥ y`.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            CurvePoint::Infinity => vec![0],
            CurvePoint::Affine { x, y } => {
                let mut out = vec![1];
                out.extend(x.to_bytes());
                out.extend(y.to_bytes());
                out
            }
        }
    }
}

impl CurvePoint<FieldElement> {
    /// The same point viewed over GF(p²).
    pub fn lift(&self) -> Fp2Point {
        match self {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine {
                x: Fp2Element::from_base(x.clone()),
                y: Fp2Element::from_base(y.clone()),
            },
        }
    }

    /// Decodes a GF(p) point; returns the point and the number of bytes read.
    pub fn decode_prefix(field: &Arc<PrimeField>, bytes: &[u8]) -> Result<(Self, usize), AlgebraError> {
        decode_with(bytes, field.byte_len(), |b| field.decode(b))
    }
}

impl Fp2Point {
    pub fn decode_prefix(field: &Arc<PrimeField>, bytes: &[u8]) -> Result<(Self, usize), AlgebraError> {
        decode_with(bytes, 2 * field.byte_len(), |b| Fp2Element::decode(field, b))
    }
}

fn decode_with<F: FieldOps>(
    bytes: &[u8],
    width: usize,
    parse: impl Fn(&[u8]) -> Result<F, AlgebraError>,
) -> Result<(CurvePoint<F>, usize), AlgebraError> {
    match bytes.first() {
        Some(0) => Ok((CurvePoint::Infinity, 1)),
        Some(1) => {
            if bytes.len() < 1 + 2 * width {
                return Err(AlgebraError::Encoding("truncated point"));
            }
            let x = parse(&bytes[1..1 + width])?;
            let y = parse(&bytes[1 + width..1 + 2 * width])?;
            Ok((CurvePoint::new(x, y)?, 1 + 2 * width))
        }
        Some(_) => Err(AlgebraError::Encoding("bad point tag")),
        None => Err(AlgebraError::Encoding("empty point")),
    }
}

/// Scalar multiplication `k·P`; `0·P` is the point at infinity.
pub fn scalar_mul<F: FieldOps>(k: &BigUint, point: &CurvePoint<F>) -> CurvePoint<F> {
    point.mul(k)
}

/// Group sum of two points.
pub fn point_add<F: FieldOps>(a: &CurvePoint<F>, b: &CurvePoint<F>) -> CurvePoint<F> {
    a.add(b)
}

/// Curve parameters: the field, the prime subgroup order `q`, a generator
/// `P` of that subgroup, and the cofactor `h = (p + 1)/q`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CurveContext {
    field: Arc<PrimeField>,
    q: BigUint,
    generator: CurvePoint,
    cofactor: BigUint,
}

impl CurveContext {
    pub fn field(&self) -> &Arc<PrimeField> {
        &self.field
    }

    pub fn p(&self) -> &BigUint {
        self.field.modulus()
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn generator(&self) -> &CurvePoint {
        &self.generator
    }

    pub fn cofactor(&self) -> &BigUint {
        &self.cofactor
    }

    /// Point with GF(p) coordinates in the order-q subgroup.
    pub fn in_subgroup(&self, point: &CurvePoint) -> bool {
        point.is_on_curve() && point.mul(&self.q).is_infinity()
    }

    /// Rebuilds a context from serialized parts, checking every invariant.
    pub fn from_parts(p: BigUint, q: BigUint, generator_bytes: &[u8]) -> Result<Self, AlgebraError> {
        let field = PrimeField::new(p)?;
        let cofactor = check_order(&field, &q)?;
        let (generator, used) = <CurvePoint>::decode_prefix(&field, generator_bytes)?;
        if used != generator_bytes.len() {
            return Err(AlgebraError::Encoding("trailing bytes after generator"));
        }
        if generator.is_infinity() || !generator.mul(&q).is_infinity() {
            return Err(AlgebraError::NoGenerator);
        }
        Ok(CurveContext { field, q, generator, cofactor })
    }

    /// Deterministic try-and-increment map: hashes `parts ∥ counter` to an x
    /// coordinate, keeps it if x³ + 1 is a square, and picks the root whose
    /// parity matches one extra hash bit. No cofactor clearing.
    pub(crate) fn hash_to_curve_point(&self, tag: u8, parts: &[&[u8]], counter: u32) -> Option<CurvePoint> {
        let w = self.field.byte_len();
        let counter_bytes = counter.to_be_bytes();
        let mut all: Vec<&[u8]> = parts.to_vec();
        all.push(&counter_bytes);
        let bytes = hash::expand(tag, &all, w + 17);
        let x = self.field.from_be_bytes_reduced(&bytes[..w + 16]);
        let want_odd = bytes[w + 16] & 1 == 1;
        let y = rhs(&x).sqrt()?;
        let y = if y.is_odd() == want_odd { y } else { -&y };
        Some(CurvePoint::Affine { x, y })
    }
}

fn check_order(field: &Arc<PrimeField>, q: &BigUint) -> Result<BigUint, AlgebraError> {
    if !is_probable_prime(q) {
        return Err(AlgebraError::SubgroupOrderNotPrime(q.clone()));
    }
    let (cofactor, rem) = (field.modulus() + 1u32).div_rem(q);
    if !rem.is_zero() {
        return Err(AlgebraError::OrderDoesNotDivide);
    }
    Ok(cofactor)
}

/// Builds the curve context for (p, q), choosing the generator
/// deterministically from `seed`.
pub fn setup_curve(p: &BigUint, q: &BigUint, seed: u64) -> Result<CurveContext, AlgebraError> {
    let field = PrimeField::new(p.clone())?;
    let cofactor = check_order(&field, q)?;
    let mut ctx = CurveContext { field, q: q.clone(), generator: CurvePoint::Infinity, cofactor };
    let seed_bytes = seed.to_be_bytes();
    for counter in 0..SETUP_CANDIDATES {
        let Some(candidate) = ctx.hash_to_curve_point(hash::TAG_SETUP, &[&seed_bytes], counter) else {
            continue;
        };
        let g = candidate.mul(&ctx.cofactor);
        if !g.is_infinity() {
            debug_assert!(g.mul(q).is_infinity());
            ctx.generator = g;
            return Ok(ctx);
        }
    }
    Err(AlgebraError::NoGenerator)
}
