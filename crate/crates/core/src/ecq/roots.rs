//! Complete rational-root extraction for polynomials over Q.
//!
//! The polynomial is cleared to integer coefficients and monicized by the
//! substitution z = (leading) x, turning rational roots into integer roots
//! of a monic integer polynomial. Integer roots are then found through the
//! squarefree part: modulo a prime where that part stays squarefree every
//! integer root reduces to a simple root, lifts uniquely by Newton
//! iteration past twice the Cauchy bound, and is confirmed by exact
//! evaluation. This finds every rational root without factoring the
//! constant term, whose prime factorization can be astronomically large
//! for division-polynomial coefficients.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

fn trim<T: Zero>(mut v: Vec<T>) -> Vec<T> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

pub(crate) fn eval_q(poly: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in poly.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn eval_z(poly: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in poly.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn eval_z_mod(poly: &[BigInt], x: &BigInt, md: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in poly.iter().rev() {
        acc = (acc * x + c).mod_floor(md);
    }
    acc
}

fn derivative_z(poly: &[BigInt]) -> Vec<BigInt> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect()
}

fn derivative_q(poly: &[BigRational]) -> Vec<BigRational> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from(BigInt::from(i)))
        .collect()
}

/// Remainder of a by b over Q, with b nonzero.
fn rem_q(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r: Vec<BigRational> = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    while r.len() > db {
        let k = r.len() - 1;
        let q = &r[k] / lead;
        if !q.is_zero() {
            for i in 0..=db {
                let t = &q * &b[i];
                r[k - db + i] = &r[k - db + i] - t;
            }
        }
        r.pop();
        r = trim(r);
        if r.is_empty() {
            break;
        }
    }
    r
}

/// Monic gcd over Q.
fn gcd_q(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem_q(&x, &y);
        x = y;
        y = r;
    }
    if x.is_empty() {
        return x;
    }
    let lead = x.last().cloned().expect("nonempty");
    x.iter().map(|c| c / &lead).collect()
}

/// Exact quotient a / b over Q; remainder must vanish.
fn div_exact_q(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r: Vec<BigRational> = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    let mut q = vec![BigRational::zero(); a.len() - db];
    while r.len() > db {
        let k = r.len() - 1;
        let c = &r[k] / lead;
        q[k - db] = c.clone();
        for i in 0..=db {
            let t = &c * &b[i];
            r[k - db + i] = &r[k - db + i] - t;
        }
        r.pop();
        r = trim(r);
    }
    assert!(r.is_empty(), "division was supposed to be exact");
    q
}

fn small_primes() -> impl Iterator<Item = u64> {
    (3u64..1_000_000).filter(|&n| {
        if n % 2 == 0 {
            return false;
        }
        let mut d = 3;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 2;
        }
        true
    })
}

fn poly_mod_p(poly: &[BigInt], p: u64) -> Vec<u64> {
    let bp = BigInt::from(p);
    trim(
        poly.iter()
            .map(|c| {
                let r = c.mod_floor(&bp);
                let (_, digits) = r.to_u64_digits();
                digits.first().copied().unwrap_or(0)
            })
            .collect(),
    )
}

fn fp_poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let inv_lead = fp_inv(b[db], p);
    while r.len() > db {
        let k = r.len() - 1;
        let c = (u128::from(r[k]) * u128::from(inv_lead) % u128::from(p)) as u64;
        for i in 0..=db {
            let t = u128::from(c) * u128::from(b[i]) % u128::from(p);
            let idx = k - db + i;
            r[idx] = ((u128::from(r[idx]) + u128::from(p) - t) % u128::from(p)) as u64;
        }
        r.pop();
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    r
}

fn fp_inv(a: u64, p: u64) -> u64 {
    let mut e = p - 2;
    let mut base = a % p;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = (u128::from(acc) * u128::from(base) % u128::from(p)) as u64;
        }
        base = (u128::from(base) * u128::from(base) % u128::from(p)) as u64;
        e >>= 1;
    }
    acc
}

fn fp_poly_gcd_is_one(a: &[u64], b: &[u64], p: u64) -> bool {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    while !y.is_empty() {
        let r = fp_poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x.len() == 1
}

/// All integer roots of a monic integer polynomial of degree >= 1.
fn integer_roots_monic(h: &[BigInt]) -> Vec<BigInt> {
    debug_assert!(h.last().is_some_and(|c| c.is_one()));
    if h.len() == 2 {
        return vec![-h[0].clone()];
    }
    // Squarefree part: monic over Q dividing a monic integer polynomial,
    // hence integer by Gauss.
    let hq: Vec<BigRational> = h.iter().map(|c| BigRational::from(c.clone())).collect();
    let g = gcd_q(&hq, &derivative_q(&hq));
    let sq = if g.len() == 1 {
        h.to_vec()
    } else {
        div_exact_q(&hq, &g)
            .into_iter()
            .map(|c| {
                assert!(c.denom().is_one(), "squarefree part must be integral");
                c.numer().clone()
            })
            .collect()
    };
    let bound: BigInt = BigInt::one()
        + sq.iter()
            .map(|c| c.abs())
            .max()
            .expect("nonempty polynomial");
    let ds = derivative_z(&sq);
    let mut roots = Vec::new();
    for p in small_primes() {
        let sp = poly_mod_p(&sq, p);
        if sp.len() != sq.len() {
            continue;
        }
        let dp = poly_mod_p(&ds, p);
        if dp.is_empty() || !fp_poly_gcd_is_one(&sp, &dp, p) {
            continue;
        }
        let mut residues = Vec::new();
        for x in 0..p {
            let mut acc = 0u64;
            for &c in sp.iter().rev() {
                acc = ((u128::from(acc) * u128::from(x) + u128::from(c)) % u128::from(p)) as u64;
            }
            if acc == 0 {
                residues.push(x);
            }
        }
        // Newton-lift each simple root until the modulus passes twice the
        // root bound, then compare in the symmetric range.
        let two_bound = BigInt::from(2) * &bound;
        for r0 in residues {
            let mut md = BigInt::from(p);
            let mut z = BigInt::from(r0);
            while md <= two_bound {
                md = &md * &md;
                let fz = eval_z_mod(&sq, &z, &md);
                let dz = eval_z_mod(&ds, &z, &md);
                let e = dz.extended_gcd(&md);
                let dinv = e.x.mod_floor(&md);
                z = (&z - fz * dinv).mod_floor(&md);
            }
            let half = &md / BigInt::from(2);
            let cand = if z > half { &z - &md } else { z };
            if eval_z(h, &cand).is_zero() {
                roots.push(cand);
            }
        }
        return roots;
    }
    unreachable!("no squarefree prime found below the search bound");
}

/// All rational roots of a nonzero polynomial over Q, ascending-coefficient
/// order, together verified by exact evaluation.
pub(crate) fn rational_roots(poly: &[BigRational]) -> Vec<BigRational> {
    let mut p = trim(poly.to_vec());
    assert!(!p.is_empty(), "zero polynomial has no root list");
    let mut out = Vec::new();
    let mut shift = 0usize;
    while p[0].is_zero() {
        p.remove(0);
        shift += 1;
    }
    if shift > 0 {
        out.push(BigRational::zero());
    }
    if p.len() < 2 {
        return out;
    }
    // Clear denominators to integers.
    let mut den = BigInt::one();
    for c in &p {
        den = den.lcm(c.denom());
    }
    let zp: Vec<BigInt> = p
        .iter()
        .map(|c| c.numer() * (&den / c.denom()))
        .collect();
    // Monicize: z = lead * x turns sum c_i x^i into a monic polynomial in z
    // with coefficients c_i lead^(n-1-i).
    let n = zp.len() - 1;
    let lead = zp[n].clone();
    let mut h = Vec::with_capacity(n + 1);
    for (i, c) in zp.iter().enumerate() {
        let mut t = c.clone();
        for _ in 0..(n - 1).saturating_sub(i) {
            t *= &lead;
        }
        h.push(t);
    }
    h[n] = BigInt::one();
    for z in integer_roots_monic(&h) {
        let x = BigRational::new(z, lead.clone());
        debug_assert!(eval_q(&p, &x).is_zero());
        out.push(x);
    }
    out.sort();
    out.dedup();
    out
}
