//! The modified Weil pairing on y² = x³ + 1: bilinearity, non-degeneracy,
//! and the degenerate order-3 case.

use num_bigint::BigUint;
use wsn_keymgmt::algebra::setup_curve;
use wsn_keymgmt::pairing::{distortion, modified_pairing, weil_pairing};
use wsn_keymgmt::algebra::fp2_pow;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = setup_curve(&BigUint::from(1019u32), &BigUint::from(17u32), 3)?;
    let p = ctx.generator();
    let g = modified_pairing(p, p, &ctx)?;
    println!("p = 1019, q = 17, P = {p:?}");
    println!("ê(P, P) = {g:?}");
    println!("ê(P, P)^17 = {:?}", fp2_pow(&g, ctx.q()));

    for (a, b) in [(2u32, 3u32), (5, 11), (16, 16)] {
        let lhs = modified_pairing(&p.mul(&a.into()), &p.mul(&b.into()), &ctx)?;
        let rhs = fp2_pow(&g, &BigUint::from(a * b));
        println!("ê({a}P, {b}P) == ê(P, P)^{} : {}", a * b, lhs == rhs);
    }

    // the raw Weil pairing is alternating; the distortion map is what
    // makes ê(P, P) non-trivial
    let lifted = p.lift();
    println!("e(P, P) = {:?}", weil_pairing(&lifted, &lifted, &ctx)?);
    println!("e(P, φ(P)) = {:?}", weil_pairing(&lifted, &distortion(p, &ctx), &ctx)?);

    // with q = 3 the subgroup is {O, (0, ±1)} and φ fixes x = 0
    let tiny = setup_curve(&BigUint::from(11u32), &BigUint::from(3u32), 0)?;
    let t = tiny.generator();
    println!("p = 11, q = 3: P = {t:?}, ê(P, P) = {:?}", modified_pairing(t, t, &tiny)?);
    Ok(())
}
