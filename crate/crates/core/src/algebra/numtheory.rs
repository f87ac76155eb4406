//! Integer helpers: primality, factoring, modular square roots.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Miller-Rabin with the first 25 primes as fixed bases.
///
/// Deterministic below 3.3·10²⁴; beyond that the error probability is at
/// most 4⁻²⁵ for adversarially chosen inputs and far smaller for random ones.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &sp in SMALL_PRIMES.iter() {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let trailing = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> trailing;
    'witness: for &base in SMALL_PRIMES.iter() {
        let mut x = BigUint::from(base).modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..trailing {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn distinct_prime_factors(n: &BigUint) -> Vec<BigUint> {
    let mut out = Vec::new();
    let mut rest = n.clone();
    for &sp in SMALL_PRIMES.iter() {
        let sp = BigUint::from(sp);
        if (&rest % &sp).is_zero() {
            out.push(sp.clone());
            while (&rest % &sp).is_zero() {
                rest /= &sp;
            }
        }
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m) {
            if !out.contains(&m) {
                out.push(m);
            }
            continue;
        }
        let d = pollard_brent(&m);
        stack.push(m.clone() / &d);
        stack.push(d);
    }
    out.sort();
    out
}

// Brent's variant of Pollard rho; `n` must be composite with no factor < 100.
fn pollard_brent(n: &BigUint) -> BigUint {
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r: u64 = 1;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..(r - k).min(128) {
                    y = f(&y);
                    q = (q * abs_diff(&x, &y)) % n;
                }
                g = q.gcd(n);
                k += 128;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = abs_diff(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1u32;
    }
}

fn abs_diff(a: &BigUint, b: &BigUint) -> BigUint {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

/// Legendre symbol test: is `a` a nonzero square modulo the odd prime `p`?
pub fn is_quadratic_residue(a: &BigUint, p: &BigUint) -> bool {
    let a = a % p;
    if a.is_zero() {
        return false;
    }
    let exp = (p - 1u32) >> 1;
    a.modpow(&exp, p).is_one()
}

/// Square root modulo an odd prime, or `None` when `a` is a non-residue.
///
/// Uses the single exponentiation `a^((p+1)/4)` when p ≡ 3 (mod 4) and
/// Tonelli–Shanks otherwise. Returns the root as computed; callers pick a sign.
pub fn sqrt_mod(a: &BigUint, p: &BigUint) -> Option<BigUint> {
    let a = a % p;
    if a.is_zero() {
        return Some(BigUint::zero());
    }
    if !is_quadratic_residue(&a, p) {
        return None;
    }
    if (p % 4u32) == BigUint::from(3u32) {
        let exp = (p + 1u32) >> 2;
        return Some(a.modpow(&exp, p));
    }
    let p_minus_one = p - 1u32;
    let s = p_minus_one.trailing_zeros().unwrap_or(0);
    let q = &p_minus_one >> s;
    let mut z = BigUint::from(2u32);
    while is_quadratic_residue(&z, p) {
        z += 1u32;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + 1u32) >> 1), p);
    while !t.is_one() {
        let mut i = 0u64;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2) % p;
            i += 1;
        }
        let b = c.modpow(&(BigUint::one() << (m - i - 1)), p);
        m = i;
        c = (&b * &b) % p;
        t = (t * &c) % p;
        r = (r * b) % p;
    }
    Some(r)
}
