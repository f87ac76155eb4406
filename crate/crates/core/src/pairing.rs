//! The order-q Weil pairing via Miller's algorithm, and the distorted pairing
//! ê(P1, P2) = e_q(P1, φ(P2)) on the GF(p)-rational subgroup.
//!
//! The Weil pairing is computed from its divisor definition,
//! e_q(P, Q) = (f_P(Q + S) / f_P(S)) / (f_Q(P − S) / f_Q(−S)),
//! where f_T has divisor q(T) − q(O) and S is an auxiliary support point.

use num_bigint::BigUint;
use thiserror::Error;

use crate::algebra::{CurveContext, CurvePoint, FieldOps, Fp2Element, Fp2Point};
use crate::hash;

/// How many auxiliary support points are tried before giving up.
pub const SUPPORT_RETRIES: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("pairing input is not {0}-torsion")]
    NotTorsion(BigUint),
    #[error("pairing input is not in the order-q subgroup over GF(p)")]
    NotInSubgroup,
    #[error("every auxiliary support point hit a zero or pole")]
    Degenerate,
}

/// The distortion map φ(x, y) = (ζx, y), ζ a primitive cube root of unity in GF(p²).
pub fn distortion(point: &CurvePoint, ctx: &CurveContext) -> Fp2Point {
    match point {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine { x, y } => {
            let zeta = Fp2Element::primitive_cube_root(ctx.field());
            CurvePoint::Affine { x: &zeta * &Fp2Element::from_base(x.clone()), y: Fp2Element::from_base(y.clone()) }
        }
    }
}

fn fp2_one(ctx: &CurveContext) -> Fp2Element {
    Fp2Element::from_base(ctx.field().one())
}

/// The Weil pairing of order q on E[q], both inputs over GF(p²).
///
/// The auxiliary point S is derived deterministically from the inputs; if
/// an evaluation meets a zero or pole a fresh S is drawn, up to
/// [`SUPPORT_RETRIES`] times.
pub fn weil_pairing(p: &Fp2Point, q: &Fp2Point, ctx: &CurveContext) -> Result<Fp2Element, PairingError> {
    for pt in [p, q] {
        if !pt.is_on_curve() || !pt.mul(ctx.q()).is_infinity() {
            return Err(PairingError::NotTorsion(ctx.q().clone()));
        }
    }
    weil_unchecked(p, q, ctx)
}

fn weil_unchecked(p: &Fp2Point, q: &Fp2Point, ctx: &CurveContext) -> Result<Fp2Element, PairingError> {
    if p.is_infinity() || q.is_infinity() {
        return Ok(fp2_one(ctx));
    }
    let p_bytes = p.to_bytes();
    let q_bytes = q.to_bytes();
    for attempt in 0..SUPPORT_RETRIES {
        let support = support_point(ctx, &p_bytes, &q_bytes, attempt);
        if let Some(value) = weil_pairing_with_support(p, q, &support, ctx) {
            return Ok(value);
        }
    }
    Err(PairingError::Degenerate)
}

// S = S1 + φ(S2) with S1, S2 hashed onto E(GF(p)); this reaches points with
// genuinely GF(p²) coordinates without needing square roots in GF(p²).
fn support_point(ctx: &CurveContext, p_bytes: &[u8], q_bytes: &[u8], attempt: u32) -> Fp2Point {
    let attempt = attempt.to_be_bytes();
    let pick = |half: u8| {
        let parts: [&[u8]; 4] = [p_bytes, q_bytes, &attempt, &[half]];
        (0u32..)
            .find_map(|ctr| ctx.hash_to_curve_point(hash::TAG_PAIRING_AUX, &parts, ctr))
            .expect("half of all x give a curve point")
    };
    pick(0).lift().add(&distortion(&pick(1), ctx))
}

/// One evaluation of the Weil pairing with an explicit support point S;
/// `None` when S makes some Miller step hit a zero or pole.
pub fn weil_pairing_with_support(p: &Fp2Point, q: &Fp2Point, s: &Fp2Point, ctx: &CurveContext) -> Option<Fp2Element> {
    let q_plus_s = q.add(s);
    let p_minus_s = p.add(&s.neg());
    let minus_s = s.neg();
    let [(n1, d1), (n2, d2)] = miller(p, ctx.q(), [&q_plus_s, s])?;
    let [(n3, d3), (n4, d4)] = miller(q, ctx.q(), [&p_minus_s, &minus_s])?;
    let num = n1.mul(&d2).mul(&d3).mul(&n4);
    let den = d1.mul(&n2).mul(&n3).mul(&d4);
    Some(num.mul(&den.inverse()?))
}

type Fraction = (Fp2Element, Fp2Element);

/// Evaluates f_base (divisor m(base) − m(O)) at two points, as
/// numerator/denominator pairs. Returns `None` on any zero or pole.
fn miller(base: &Fp2Point, m: &BigUint, at: [&Fp2Point; 2]) -> Option<[Fraction; 2]> {
    let CurvePoint::Affine { x: bx, .. } = base else {
        return None;
    };
    let mut evals = Vec::with_capacity(2);
    for pt in at {
        let CurvePoint::Affine { x, y } = pt else {
            return None;
        };
        evals.push((x.clone(), y.clone()));
    }
    let one = bx.one_like();
    let mut f = [(one.clone(), one.clone()), (one.clone(), one)];
    let mut t = base.clone();
    for i in (0..m.bits().saturating_sub(1)).rev() {
        let (line, next) = line_through(&t, &t)?;
        for (acc, (x, y)) in f.iter_mut().zip(&evals) {
            let (ln, ld) = line.eval(x, y)?;
            acc.0 = acc.0.square().mul(&ln);
            acc.1 = acc.1.square().mul(&ld);
        }
        t = next;
        if m.bit(i) {
            let (line, next) = line_through(&t, base)?;
            for (acc, (x, y)) in f.iter_mut().zip(&evals) {
                let (ln, ld) = line.eval(x, y)?;
                acc.0 = acc.0.mul(&ln);
                acc.1 = acc.1.mul(&ld);
            }
            t = next;
        }
    }
    if !t.is_infinity() {
        return None;
    }
    let [a, b] = f;
    Some([a, b])
}

/// g_{A,B} = (line through A and B) / (vertical line through A + B).
enum Line {
    /// `y − y_A − λ(x − x_A)` over `x + x_A + x_B − λ²`.
    Slope { lambda: Fp2Element, xa: Fp2Element, ya: Fp2Element, xsum: Fp2Element },
    /// `x − x_A` (A + B = O).
    Vertical { xa: Fp2Element },
}

impl Line {
    fn eval(&self, x: &Fp2Element, y: &Fp2Element) -> Option<Fraction> {
        let (num, den) = match self {
            Line::Slope { lambda, xa, ya, xsum } => {
                let num = y.sub(ya).sub(&lambda.mul(&x.sub(xa)));
                let den = x.add(xsum).sub(&lambda.square());
                (num, den)
            }
            Line::Vertical { xa } => (x.sub(xa), x.one_like()),
        };
        if num.is_zero() || den.is_zero() {
            None
        } else {
            Some((num, den))
        }
    }
}

fn line_through(a: &Fp2Point, b: &Fp2Point) -> Option<(Line, Fp2Point)> {
    let (CurvePoint::Affine { x: xa, y: ya }, CurvePoint::Affine { x: xb, y: yb }) = (a, b) else {
        // only reachable for degenerate multiples; never on a prime-order base
        return None;
    };
    if xa == xb && ya.add(yb).is_zero() {
        return Some((Line::Vertical { xa: xa.clone() }, CurvePoint::Infinity));
    }
    let lambda = if xa == xb {
        xa.square().mul(&xa.small_like(3)).mul(&ya.double().inverse()?)
    } else {
        yb.sub(ya).mul(&xb.sub(xa).inverse()?)
    };
    let sum = a.add(b);
    let line = Line::Slope { lambda, xa: xa.clone(), ya: ya.clone(), xsum: xa.add(xb) };
    Some((line, sum))
}

/// ê(P1, P2) = e_q(P1, φ(P2)) for P1, P2 in the order-q subgroup of E(GF(p)).
pub fn modified_pairing(p1: &CurvePoint, p2: &CurvePoint, ctx: &CurveContext) -> Result<Fp2Element, PairingError> {
    if !ctx.in_subgroup(p1) || !ctx.in_subgroup(p2) {
        return Err(PairingError::NotInSubgroup);
    }
    weil_unchecked(&p1.lift(), &distortion(p2, ctx), ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{setup_curve, PrimeField};
    use num_traits::Zero;
    use std::sync::Arc;

    fn ctx(p: u32, q: u32) -> CurveContext {
        setup_curve(&BigUint::from(p), &BigUint::from(q), 0).unwrap()
    }

    fn b(v: u64) -> BigUint {
        BigUint::from(v)
    }

    // Independent arithmetic in GF(11²) = GF(11)[β]/(β² − 2) on (u64, u64).
    mod gf121 {
        pub const P: u64 = 11;
        pub const D: u64 = 2;
        pub type E = (u64, u64);
        pub fn add(a: E, b: E) -> E {
            ((a.0 + b.0) % P, (a.1 + b.1) % P)
        }
        pub fn neg(a: E) -> E {
            ((P - a.0) % P, (P - a.1) % P)
        }
        pub fn mul(a: E, b: E) -> E {
            ((a.0 * b.0 + D * a.1 * b.1) % P, (a.0 * b.1 + a.1 * b.0) % P)
        }
        pub fn all() -> impl Iterator<Item = E> {
            (0..P).flat_map(|a| (0..P).map(move |b| (a, b)))
        }
        pub fn inv(a: E) -> E {
            all().find(|&b| mul(a, b) == (1, 0)).unwrap()
        }
        pub type Pt = Option<(E, E)>;
        pub fn padd(a: Pt, b: Pt) -> Pt {
            let ((x1, y1), (x2, y2)) = match (a, b) {
                (None, _) => return b,
                (_, None) => return a,
                (Some(a), Some(b)) => (a, b),
            };
            let lambda = if x1 == x2 {
                if add(y1, y2) == (0, 0) {
                    return None;
                }
                mul(mul((3, 0), mul(x1, x1)), inv(mul((2, 0), y1)))
            } else {
                mul(add(y2, neg(y1)), inv(add(x2, neg(x1))))
            };
            let x3 = add(mul(lambda, lambda), neg(add(x1, x2)));
            let y3 = add(mul(lambda, add(x1, neg(x3))), neg(y1));
            Some((x3, y3))
        }
        pub fn smul(k: u64, a: Pt) -> Pt {
            (0..k).fold(None, |acc, _| padd(acc, a))
        }
        /// All points T with 3T = O, by brute-force enumeration of the curve.
        pub fn three_torsion() -> Vec<Pt> {
            let mut v = vec![None];
            for x in all() {
                for y in all() {
                    if mul(y, y) == add(mul(mul(x, x), x), (1, 0)) {
                        let pt = Some((x, y));
                        if smul(3, pt).is_none() {
                            v.push(pt);
                        }
                    }
                }
            }
            v
        }
    }

    fn lift121(f: &Arc<PrimeField>, pt: gf121::Pt) -> Fp2Point {
        let e = |v: (u64, u64)| Fp2Element::new(f.element(v.0), f.element(v.1)).unwrap();
        match pt {
            None => CurvePoint::Infinity,
            Some((x, y)) => CurvePoint::new(e(x), e(y)).unwrap(),
        }
    }

    #[test]
    fn exhaustive_three_torsion_table_p11() {
        let c = ctx(11, 3);
        let f = c.field().clone();
        let torsion = gf121::three_torsion();
        assert_eq!(torsion.len(), 9);
        // basis: any two points not in each other's span
        let p = torsion[1];
        let q = *torsion
            .iter()
            .find(|t| t.is_some() && **t != p && **t != gf121::smul(2, p))
            .unwrap();
        let cube_roots: Vec<(u64, u64)> = gf121::all()
            .filter(|&z| z != (1, 0) && gf121::mul(gf121::mul(z, z), z) == (1, 0))
            .collect();
        assert_eq!(cube_roots.len(), 2);

        let pp = lift121(&f, p);
        let qq = lift121(&f, q);
        let w = weil_pairing(&pp, &qq, &c).unwrap();
        let w_oracle = (w.c0().value().clone(), w.c1().value().clone());
        assert!(cube_roots.iter().any(|&(a, b2)| (b(a), b(b2)) == w_oracle), "e(P,Q) must be a primitive cube root");

        for a in 0..3u64 {
            for bb in 0..3u64 {
                let left = gf121::padd(gf121::smul(a, p), gf121::smul(bb, q));
                for cc in 0..3u64 {
                    for d in 0..3u64 {
                        let right = gf121::padd(gf121::smul(cc, p), gf121::smul(d, q));
                        let got = weil_pairing(&lift121(&f, left), &lift121(&f, right), &c).unwrap();
                        let exp = (a * d + 3 * 3 - (bb * cc) % 3) % 3;
                        assert_eq!(got, w.pow(&b(exp)), "({a},{bb}) x ({cc},{d})");
                    }
                }
            }
        }
        // alternating on every torsion point
        for t in &torsion {
            let tt = lift121(&f, *t);
            assert!(weil_pairing(&tt, &tt, &c).unwrap().is_one());
        }
        let two_p = lift121(&f, gf121::smul(2, p));
        assert_eq!(weil_pairing(&two_p, &qq, &c).unwrap(), w.square());
    }

    #[test]
    fn infinity_and_self_pairing_are_trivial() {
        let c = ctx(1019, 17);
        let g = c.generator().lift();
        assert!(weil_pairing(&g, &CurvePoint::Infinity, &c).unwrap().is_one());
        assert!(weil_pairing(&g, &g, &c).unwrap().is_one());
        assert!(modified_pairing(&CurvePoint::Infinity, c.generator(), &c).unwrap().is_one());
    }

    #[test]
    fn rejects_non_torsion_inputs() {
        let c = ctx(1019, 17);
        let off = c.hash_to_curve_point(hash::TAG_SETUP, &[b"x"], 0).or_else(|| c.hash_to_curve_point(hash::TAG_SETUP, &[b"x"], 1)).unwrap();
        if !off.mul(c.q()).is_infinity() {
            assert_eq!(weil_pairing(&off.lift(), &c.generator().lift(), &c), Err(PairingError::NotTorsion(b(17))));
            assert_eq!(modified_pairing(&off, c.generator(), &c), Err(PairingError::NotInSubgroup));
        }
    }

    #[test]
    fn distortion_stays_on_curve_and_leaves_subgroup() {
        let c = ctx(1019, 17);
        assert!(distortion(&CurvePoint::Infinity, &c).is_infinity());
        let g = c.generator();
        for k in 1..17u64 {
            let pt = g.mul(&b(k));
            let d = distortion(&pt, &c);
            assert!(d.is_on_curve());
            assert!(d.mul(c.q()).is_infinity());
            let span: Vec<Fp2Point> = (0..17u64).map(|j| g.lift().mul(&b(j))).collect();
            assert!(!span.contains(&d));
        }
        assert!(!weil_pairing(&g.lift(), &distortion(g, &c), &c).unwrap().is_one());
    }

    #[test]
    fn distortion_fixes_the_order_three_subgroup_at_p11() {
        // The F_11-rational 3-torsion is {O, (0, ±1)}, and φ fixes x = 0,
        // so the distorted pairing is trivial for q = 3.
        let c = ctx(11, 3);
        let g = c.generator();
        assert_eq!(g.x().unwrap().value(), &BigUint::zero());
        assert_eq!(distortion(g, &c), g.lift());
        assert!(modified_pairing(g, g, &c).unwrap().is_one());
    }

    #[test]
    fn modified_pairing_is_bilinear_and_nondegenerate() {
        let c = ctx(1019, 17);
        let g = c.generator();
        let base = modified_pairing(g, g, &c).unwrap();
        assert!(!base.is_one());
        assert!(base.pow(c.q()).is_one());
        for a in 0..17u64 {
            for bb in [1u64, 5, 16] {
                let got = modified_pairing(&g.mul(&b(a)), &g.mul(&b(bb)), &c).unwrap();
                assert_eq!(got, base.pow(&b(a * bb % 17)));
            }
        }
    }

    #[test]
    fn support_point_does_not_change_the_value() {
        let c = ctx(1019, 17);
        let g = c.generator();
        let pp = g.lift();
        let qq = distortion(&g.mul(&b(3)), &c);
        let mut values = Vec::new();
        for attempt in 0..6 {
            let s = support_point(&c, &pp.to_bytes(), &qq.to_bytes(), attempt);
            if let Some(v) = weil_pairing_with_support(&pp, &qq, &s, &c) {
                values.push(v);
            }
        }
        assert!(values.len() >= 2);
        assert!(values.windows(2).all(|w| w[0] == w[1]));
    }
}
