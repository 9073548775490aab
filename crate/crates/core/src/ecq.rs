//! Elliptic curves in long Weierstrass form, over Q and over prime fields.
//!
//! Supports the arithmetic side of the bound: exact group law over Q,
//! reduction mod p, point counting (direct for small p, baby-step
//! giant-step with a quadratic-twist tiebreak for large p), division of
//! rational points by a prime `ell`, the divisibility depth `d`, and
//! density scans of the coprime-order criterion over primes of good
//! reduction.

mod roots;

use crate::modring::is_prime;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use hashbrown::HashMap;
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn fa(p: u64, a: u64, b: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn fs(p: u64, a: u64, b: u64) -> u64 {
    ((a as u128 + p as u128 - b as u128 % p as u128) % p as u128) as u64
}

fn fm(p: u64, a: u64, b: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

fn fpow(p: u64, mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = fm(p, acc, b);
        }
        b = fm(p, b, b);
        e >>= 1;
    }
    acc
}

fn finv(p: u64, a: u64) -> u64 {
    debug_assert!(a % p != 0);
    fpow(p, a, p - 2)
}

/// Euler-criterion quadratic character of `a` mod an odd prime `p`.
fn fchi(p: u64, a: u64) -> i32 {
    debug_assert!(p % 2 == 1);
    let t = fpow(p, a, (p - 1) / 2);
    if t == 0 {
        0
    } else if t == 1 {
        1
    } else {
        -1
    }
}

/// Tonelli-Shanks square root mod an odd prime, `None` for nonresidues.
fn fsqrt(p: u64, a: u64) -> Option<u64> {
    debug_assert!(p % 2 == 1);
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    match fchi(p, a) {
        1 => {}
        _ => return None,
    }
    if p % 4 == 3 {
        let r = fpow(p, a, (p + 1) / 4);
        debug_assert_eq!(fm(p, r, r), a);
        return Some(r);
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while fchi(p, z) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = fpow(p, z, q);
    let mut t = fpow(p, a, q);
    let mut r = fpow(p, a, (q + 1) / 2);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = fm(p, tt, tt);
            i += 1;
        }
        let b = fpow(p, c, 1u64 << (m - i - 1));
        r = fm(p, r, b);
        c = fm(p, b, b);
        t = fm(p, t, c);
        m = i;
    }
    debug_assert_eq!(fm(p, r, r), a);
    Some(r)
}

fn big_to_u64(b: &BigInt) -> u64 {
    debug_assert!(!b.is_negative());
    let (_, digits) = b.to_u64_digits();
    debug_assert!(digits.len() <= 1);
    digits.first().copied().unwrap_or(0)
}

/// Residue of a rational mod `p`, `None` when the denominator is divisible.
fn rat_mod_p(x: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let d = x.denom().mod_floor(&pb);
    if d.is_zero() {
        return None;
    }
    let n = x.numer().mod_floor(&pb);
    Some(fm(p, big_to_u64(&n), finv(p, big_to_u64(&d))))
}

fn rat_i(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational square root, `None` when no rational root exists.
fn sqrt_q(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let sn = r.numer().sqrt();
    let sd = r.denom().sqrt();
    if &(&sn * &sn) == r.numer() && &(&sd * &sd) == r.denom() {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// A point on a curve over a prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointFp {
    Infinity,
    Affine(u64, u64),
}

/// A point on a curve over Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointQ {
    Infinity,
    Affine(BigRational, BigRational),
}

/// Long Weierstrass curve over the prime field F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveFp {
    p: u64,
    a: [u64; 5],
    b: [u64; 4],
    disc: u64,
}

impl CurveFp {
    /// Builds the curve `[a1, a2, a3, a4, a6]` mod p, rejecting singular ones.
    pub fn new(p: u64, a_raw: [u64; 5]) -> Result<CurveFp> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let a: [u64; 5] = core::array::from_fn(|i| a_raw[i] % p);
        let [a1, a2, a3, a4, a6] = a;
        let b2 = fa(p, fm(p, a1, a1), fm(p, 4 % p, a2));
        let b4 = fa(p, fm(p, 2 % p, a4), fm(p, a1, a3));
        let b6 = fa(p, fm(p, a3, a3), fm(p, 4 % p, a6));
        let b8 = {
            let t1 = fm(p, fm(p, a1, a1), a6);
            let t2 = fm(p, fm(p, 4 % p, a2), a6);
            let t3 = fm(p, fm(p, a1, a3), a4);
            let t4 = fm(p, a2, fm(p, a3, a3));
            let t5 = fm(p, a4, a4);
            fs(p, fa(p, fa(p, t1, t2), t4), fa(p, t3, t5))
        };
        let disc = {
            let t1 = fm(p, fm(p, b2, b2), b8);
            let t2 = fm(p, 8 % p, fm(p, fm(p, b4, b4), b4));
            let t3 = fm(p, 27 % p, fm(p, b6, b6));
            let t4 = fm(p, 9 % p, fm(p, b2, fm(p, b4, b6)));
            fs(p, t4, fa(p, fa(p, t1, t2), t3))
        };
        debug_assert_eq!(
            fm(p, 4 % p, b8),
            fs(p, fm(p, b2, b6), fm(p, b4, b4))
        );
        if disc == 0 {
            return Err(Error::SingularCurve);
        }
        Ok(CurveFp {
            p,
            a,
            b: [b2, b4, b6, b8],
            disc,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> &[u64; 5] {
        &self.a
    }

    pub fn discriminant(&self) -> u64 {
        self.disc
    }

    pub fn contains(&self, pt: &PointFp) -> bool {
        let &PointFp::Affine(x, y) = pt else {
            return true;
        };
        let p = self.p;
        let [a1, a2, a3, a4, a6] = self.a;
        let lhs = fa(p, fm(p, y, y), fa(p, fm(p, fm(p, a1, x), y), fm(p, a3, y)));
        let x2 = fm(p, x, x);
        let rhs = fa(
            p,
            fa(p, fm(p, x2, x), fm(p, a2, x2)),
            fa(p, fm(p, a4, x), a6),
        );
        lhs == rhs
    }

    pub fn neg(&self, pt: &PointFp) -> PointFp {
        let &PointFp::Affine(x, y) = pt else {
            return PointFp::Infinity;
        };
        let p = self.p;
        let [a1, _, a3, _, _] = self.a;
        PointFp::Affine(x, fs(p, 0, fa(p, y, fa(p, fm(p, a1, x), a3))))
    }

    pub fn add(&self, lhs: &PointFp, rhs: &PointFp) -> PointFp {
        let p = self.p;
        let [a1, a2, a3, a4, a6] = self.a;
        let &PointFp::Affine(x1, y1) = lhs else {
            return *rhs;
        };
        let &PointFp::Affine(x2, y2) = rhs else {
            return *lhs;
        };
        if *rhs == self.neg(lhs) {
            return PointFp::Infinity;
        }
        let (lam, nu) = if x1 == x2 {
            let den = fa(p, fm(p, 2 % p, y1), fa(p, fm(p, a1, x1), a3));
            let dinv = finv(p, den);
            let x1s = fm(p, x1, x1);
            let lam_num = fs(
                p,
                fa(p, fm(p, 3 % p, x1s), fa(p, fm(p, fm(p, 2 % p, a2), x1), a4)),
                fm(p, a1, y1),
            );
            let nu_num = fs(
                p,
                fa(p, fm(p, a4, x1), fm(p, 2 % p, a6)),
                fa(p, fm(p, x1s, x1), fm(p, a3, y1)),
            );
            (fm(p, lam_num, dinv), fm(p, nu_num, dinv))
        } else {
            let dinv = finv(p, fs(p, x2, x1));
            let lam = fm(p, fs(p, y2, y1), dinv);
            let nu = fm(p, fs(p, fm(p, y1, x2), fm(p, y2, x1)), dinv);
            (lam, nu)
        };
        let x3 = fs(
            p,
            fa(p, fm(p, lam, lam), fm(p, a1, lam)),
            fa(p, a2, fa(p, x1, x2)),
        );
        let y3 = fs(p, 0, fa(p, fm(p, fa(p, lam, a1), x3), fa(p, nu, a3)));
        let out = PointFp::Affine(x3, y3);
        debug_assert!(self.contains(&out));
        out
    }

    pub fn mul(&self, k: u64, pt: &PointFp) -> PointFp {
        let mut acc = PointFp::Infinity;
        let mut base = *pt;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// All points of the curve; only for p below 1000.
    pub fn points(&self) -> Vec<PointFp> {
        assert!(self.p < 1000, "full enumeration is restricted to small p");
        let p = self.p;
        let mut out = vec![PointFp::Infinity];
        if p == 2 {
            for x in 0..2 {
                for y in 0..2 {
                    let pt = PointFp::Affine(x, y);
                    if self.contains(&pt) {
                        out.push(pt);
                    }
                }
            }
            return out;
        }
        let [a1, _, a3, _, _] = self.a;
        let [b2, b4, b6, _] = self.b;
        let half = finv(p, 2 % p);
        for x in 0..p {
            let x2 = fm(p, x, x);
            let d = fa(
                p,
                fa(p, fm(p, 4 % p, fm(p, x2, x)), fm(p, b2, x2)),
                fa(p, fm(p, fm(p, 2 % p, b4), x), b6),
            );
            let base = fs(p, 0, fa(p, fm(p, a1, x), a3));
            match fchi(p, d) {
                0 => out.push(PointFp::Affine(x, fm(p, base, half))),
                1 => {
                    let s = fsqrt(p, d).expect("residue has a square root");
                    out.push(PointFp::Affine(x, fm(p, fa(p, base, s), half)));
                    out.push(PointFp::Affine(x, fm(p, fs(p, base, s), half)));
                }
                _ => {}
            }
        }
        debug_assert!(out.iter().all(|pt| self.contains(pt)));
        out
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> PointFp {
        let p = self.p;
        let [a1, _, a3, _, _] = self.a;
        let [b2, b4, b6, _] = self.b;
        let half = finv(p, 2 % p);
        loop {
            let x = rng.next_u64() % p;
            let x2 = fm(p, x, x);
            let d = fa(
                p,
                fa(p, fm(p, 4 % p, fm(p, x2, x)), fm(p, b2, x2)),
                fa(p, fm(p, fm(p, 2 % p, b4), x), b6),
            );
            let Some(s) = fsqrt(p, d) else {
                continue;
            };
            let y = fm(p, fa(p, fs(p, 0, fa(p, fm(p, a1, x), a3)), s), half);
            let pt = PointFp::Affine(x, y);
            debug_assert!(self.contains(&pt));
            return pt;
        }
    }

    /// All t in [lo, hi] with t*pt = infinity, by baby-step giant-step.
    fn kill_multiples(&self, lo: u64, hi: u64, pt: &PointFp) -> Vec<u64> {
        let width = hi - lo + 1;
        let m = width.sqrt() + 1;
        let mut baby: HashMap<PointFp, Vec<u64>> = HashMap::new();
        let mut acc = PointFp::Infinity;
        for r in 0..m {
            baby.entry(self.neg(&acc)).or_default().push(r);
            acc = self.add(&acc, pt);
        }
        let step = acc;
        let mut giant = self.mul(lo, pt);
        let mut out = Vec::new();
        for k in 0..=(width - 1) / m {
            if let Some(rs) = baby.get(&giant) {
                for &r in rs {
                    let t = lo + k * m + r;
                    if t <= hi {
                        out.push(t);
                    }
                }
            }
            giant = self.add(&giant, &step);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Short-model quadratic twist coefficients `[0,0,0,a4,a6]`; needs p > 3.
    fn twist_coeffs(&self) -> [u64; 5] {
        let p = self.p;
        debug_assert!(p > 3);
        let [b2, b4, b6, _] = self.b;
        let c4 = fs(p, fm(p, b2, b2), fm(p, 24 % p, b4));
        let c6 = fs(
            p,
            fm(p, 36 % p, fm(p, b2, b4)),
            fa(p, fm(p, fm(p, b2, b2), b2), fm(p, 216 % p, b6)),
        );
        let mut d = 2;
        while fchi(p, d) != -1 {
            d += 1;
        }
        let a4 = fm(p, fs(p, 0, fm(p, 27 % p, c4)), fm(p, d, d));
        let a6 = fm(p, fs(p, 0, fm(p, 54 % p, c6)), fm(p, fm(p, d, d), d));
        [0, 0, 0, a4, a6]
    }

    fn bsgs_candidates(&self, rng: &mut ChaCha8Rng, samples: u32) -> Vec<u64> {
        let p = self.p;
        let t = (4 * p).sqrt() + 1;
        let lo = p + 1 - t;
        let hi = p + 1 + t;
        let mut candidates: Vec<u64> = Vec::new();
        for round in 0..samples {
            let pt = self.random_point(rng);
            let zeros = self.kill_multiples(lo, hi, &pt);
            if round == 0 {
                candidates = zeros;
            } else {
                candidates.retain(|t| zeros.binary_search(t).is_ok());
            }
            assert!(
                !candidates.is_empty(),
                "group order must survive every sample"
            );
            if candidates.len() == 1 {
                break;
            }
        }
        candidates
    }

    /// Number of points, including infinity.
    pub fn group_order(&self) -> u64 {
        let p = self.p;
        let n = if p < 1000 {
            self.points().len() as u64
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(p);
            let candidates = self.bsgs_candidates(&mut rng, 24);
            if candidates.len() == 1 {
                candidates[0]
            } else {
                let twist = CurveFp::new(p, self.twist_coeffs())
                    .expect("quadratic twist stays nonsingular");
                let tw = twist.bsgs_candidates(&mut rng, 24);
                let target = 2 * p + 2;
                let joint: Vec<u64> = candidates
                    .iter()
                    .copied()
                    .filter(|n| tw.binary_search(&(target - n)).is_ok())
                    .collect();
                assert!(
                    joint.len() == 1,
                    "twist tiebreak must settle the order for p = {p}"
                );
                joint[0]
            }
        };
        let slack = (4 * p).sqrt() + 1;
        debug_assert!(p + 1 + slack >= n && n + slack >= p + 1);
        n
    }
}

/// Long Weierstrass curve over Q with cached b-invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveQ {
    a: [BigRational; 5],
    b: [BigRational; 4],
    disc: BigRational,
}

impl CurveQ {
    /// Builds the curve from `[a1, a2, a3, a4, a6]`, rejecting singular ones.
    pub fn new(a: [BigRational; 5]) -> Result<CurveQ> {
        let [a1, a2, a3, a4, a6] = &a;
        let b2 = a1 * a1 + rat_i(4) * a2;
        let b4 = rat_i(2) * a4 + a1 * a3;
        let b6 = a3 * a3 + rat_i(4) * a6;
        let b8 = a1 * a1 * a6 + rat_i(4) * a2 * a6 - a1 * a3 * a4 + a2 * (a3 * a3)
            - a4 * a4;
        let disc = -(&b2 * &b2 * &b8) - rat_i(8) * (&b4 * &b4 * &b4)
            - rat_i(27) * (&b6 * &b6)
            + rat_i(9) * (&b2 * &b4 * &b6);
        debug_assert_eq!(rat_i(4) * &b8, &b2 * &b6 - &b4 * &b4);
        if disc.is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(CurveQ {
            a,
            b: [b2, b4, b6, b8],
            disc,
        })
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_integers(a: [i64; 5]) -> Result<CurveQ> {
        CurveQ::new(core::array::from_fn(|i| rat_i(a[i])))
    }

    pub fn a(&self) -> &[BigRational; 5] {
        &self.a
    }

    pub fn b_invariants(&self) -> &[BigRational; 4] {
        &self.b
    }

    pub fn discriminant(&self) -> &BigRational {
        &self.disc
    }

    pub fn contains(&self, pt: &PointQ) -> bool {
        let PointQ::Affine(x, y) = pt else {
            return true;
        };
        let [a1, a2, a3, a4, a6] = &self.a;
        let lhs = y * y + a1 * x * y + a3 * y;
        let rhs = x * x * x + a2 * (x * x) + a4 * x + a6;
        lhs == rhs
    }

    /// Checked point constructor.
    pub fn point(&self, x: BigRational, y: BigRational) -> Result<PointQ> {
        let pt = PointQ::Affine(x, y);
        if self.contains(&pt) {
            Ok(pt)
        } else {
            Err(Error::PointNotOnCurve)
        }
    }

    pub fn neg(&self, pt: &PointQ) -> PointQ {
        let PointQ::Affine(x, y) = pt else {
            return PointQ::Infinity;
        };
        let [a1, _, a3, _, _] = &self.a;
        PointQ::Affine(x.clone(), -(y + a1 * x + a3))
    }

    pub fn add(&self, lhs: &PointQ, rhs: &PointQ) -> PointQ {
        let PointQ::Affine(x1, y1) = lhs else {
            return rhs.clone();
        };
        let PointQ::Affine(x2, y2) = rhs else {
            return lhs.clone();
        };
        if *rhs == self.neg(lhs) {
            return PointQ::Infinity;
        }
        let [a1, a2, a3, a4, a6] = &self.a;
        let (lam, nu) = if x1 == x2 {
            let den = rat_i(2) * y1 + a1 * x1 + a3;
            let lam = (rat_i(3) * x1 * x1 + rat_i(2) * a2 * x1 + a4 - a1 * y1) / &den;
            let nu = (-(x1 * x1 * x1) + a4 * x1 + rat_i(2) * a6 - a3 * y1) / &den;
            (lam, nu)
        } else {
            let den = x2 - x1;
            ((y2 - y1) / &den, (y1 * x2 - y2 * x1) / &den)
        };
        let x3 = &lam * &lam + a1 * &lam - a2 - x1 - x2;
        let y3 = -((&lam + a1) * &x3) - nu - a3;
        let out = PointQ::Affine(x3, y3);
        debug_assert!(self.contains(&out));
        out
    }

    pub fn mul(&self, k: u64, pt: &PointQ) -> PointQ {
        let mut acc = PointQ::Infinity;
        let mut base = pt.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Reduction mod p; errors on composite p, denominators at p, and bad
    /// reduction.
    pub fn reduce(&self, p: u64) -> Result<CurveFp> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let mut a = [0u64; 5];
        for (i, ai) in self.a.iter().enumerate() {
            a[i] = rat_mod_p(ai, p).ok_or(Error::DenominatorDivisible { p })?;
        }
        CurveFp::new(p, a).map_err(|e| match e {
            Error::SingularCurve => Error::BadReduction { p },
            other => other,
        })
    }

    /// Reduction of a point mod p; the denominators must avoid p.
    pub fn reduce_point(&self, pt: &PointQ, p: u64) -> Result<PointFp> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let PointQ::Affine(x, y) = pt else {
            return Ok(PointFp::Infinity);
        };
        let xr = rat_mod_p(x, p).ok_or(Error::DenominatorDivisible { p })?;
        let yr = rat_mod_p(y, p).ok_or(Error::DenominatorDivisible { p })?;
        Ok(PointFp::Affine(xr, yr))
    }

    /// Coefficients of psi_2 squared: 4x^3 + b2 x^2 + 2 b4 x + b6.
    pub fn psi2_squared(&self) -> Vec<BigRational> {
        let [b2, b4, b6, _] = &self.b;
        vec![b6.clone(), rat_i(2) * b4, b2.clone(), rat_i(4)]
    }

    /// Coefficients of phi_2 = x^4 - b4 x^2 - 2 b6 x - b8.
    pub fn phi2(&self) -> Vec<BigRational> {
        let [_, b4, b6, b8] = &self.b;
        vec![
            -b8.clone(),
            rat_i(-2) * b6,
            -b4.clone(),
            BigRational::zero(),
            BigRational::one(),
        ]
    }

    /// Coefficients of psi_3 = 3x^4 + b2 x^3 + 3 b4 x^2 + 3 b6 x + b8.
    pub fn psi3(&self) -> Vec<BigRational> {
        let [b2, b4, b6, b8] = &self.b;
        vec![
            b8.clone(),
            rat_i(3) * b6,
            rat_i(3) * b4,
            b2.clone(),
            rat_i(3),
        ]
    }

    fn g4(&self) -> Vec<BigRational> {
        let [b2, b4, b6, b8] = &self.b;
        vec![
            b4 * b8 - b6 * b6,
            b2 * b8 - b4 * b6,
            rat_i(10) * b8,
            rat_i(10) * b6,
            rat_i(5) * b4,
            b2.clone(),
            rat_i(2),
        ]
    }

    /// Coefficients of phi_3 = x psi_3^2 - psi_2^2 (psi_4 / psi_2).
    pub fn phi3(&self) -> Vec<BigRational> {
        let psi3 = self.psi3();
        let mut shifted = vec![BigRational::zero()];
        shifted.extend(poly_mul(&psi3, &psi3));
        let prod = poly_mul(&self.psi2_squared(), &self.g4());
        let out: Vec<BigRational> = shifted
            .iter()
            .zip(prod.iter())
            .map(|(a, b)| a - b)
            .collect();
        debug_assert_eq!(out.len(), 10);
        debug_assert!(out[9].is_one());
        out
    }
}

/// Reduces a curve and a point on it mod p in one step.
pub fn reduce_mod_p(curve: &CurveQ, pt: &PointQ, p: u64) -> Result<(CurveFp, PointFp)> {
    let cf = curve.reduce(p)?;
    let pf = curve.reduce_point(pt, p)?;
    debug_assert!(cf.contains(&pf));
    Ok((cf, pf))
}

/// Whether the reduced point is killed by the prime-to-ell part of the
/// group order.
pub fn order_coprime_to_ell(curve: &CurveFp, pt: &PointFp, ell: u64) -> bool {
    let mut m = curve.group_order();
    while m % ell == 0 {
        m /= ell;
    }
    curve.mul(m, pt) == PointFp::Infinity
}

/// Compares the order criterion against ell-divisibility by enumeration;
/// only for p below 1000.
pub fn divisibility_cross_check(curve: &CurveFp, pt: &PointFp, ell: u64) -> bool {
    let n = curve.group_order();
    let mut cof = n;
    let mut power = 1u64;
    while cof % ell == 0 {
        cof /= ell;
        power *= ell;
    }
    let fast = curve.mul(cof, pt) == PointFp::Infinity;
    let brute = curve
        .points()
        .iter()
        .any(|cand| curve.mul(power, cand) == *pt);
    fast == brute
}

/// Whether a rational point has finite order.
pub fn is_torsion(curve: &CurveQ, pt: &PointQ) -> bool {
    let mut acc = PointQ::Infinity;
    for _ in 0..12 {
        acc = curve.add(&acc, pt);
        if acc == PointQ::Infinity {
            return true;
        }
    }
    // Rational torsion has order at most 12, so twelve multiples decide.
    false
}

fn check_ell(ell: u64) -> Result<()> {
    if ell == 2 || ell == 3 {
        Ok(())
    } else {
        Err(Error::EllUnsupported { ell })
    }
}

fn y_candidates(curve: &CurveQ, x0: &BigRational) -> Vec<BigRational> {
    let disc = roots::eval_q(&curve.psi2_squared(), x0);
    let Some(s) = sqrt_q(&disc) else {
        return Vec::new();
    };
    let [a1, _, a3, _, _] = curve.a();
    let base = -(a1 * x0 + a3);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut out = vec![(&base + &s) * &half];
    if !s.is_zero() {
        out.push((&base - &s) * &half);
    }
    out
}

/// All rational points beta with ell * beta = alpha.
pub fn divide_point(curve: &CurveQ, alpha: &PointQ, ell: u64) -> Result<Vec<PointQ>> {
    check_ell(ell)?;
    if !curve.contains(alpha) {
        return Err(Error::PointNotOnCurve);
    }
    let xpoly = match alpha {
        PointQ::Infinity => match ell {
            2 => curve.psi2_squared(),
            _ => curve.psi3(),
        },
        PointQ::Affine(xa, _) => {
            let (phi, mut psi_sq) = match ell {
                2 => (curve.phi2(), curve.psi2_squared()),
                _ => {
                    let psi3 = curve.psi3();
                    (curve.phi3(), poly_mul(&psi3, &psi3))
                }
            };
            psi_sq.resize(phi.len(), BigRational::zero());
            phi.iter()
                .zip(psi_sq.iter())
                .map(|(a, b)| a - xa * b)
                .collect()
        }
    };
    let mut out = Vec::new();
    if *alpha == PointQ::Infinity {
        out.push(PointQ::Infinity);
    }
    for x0 in roots::rational_roots(&xpoly) {
        for y0 in y_candidates(curve, &x0) {
            let beta = PointQ::Affine(x0.clone(), y0);
            debug_assert!(curve.contains(&beta));
            if curve.mul(ell, &beta) == *alpha && !out.contains(&beta) {
                out.push(beta);
            }
        }
    }
    Ok(out)
}

/// All rational points of ell-power order.
pub fn rational_ell_power_torsion(curve: &CurveQ, ell: u64) -> Result<Vec<PointQ>> {
    check_ell(ell)?;
    // Rational ell-power torsion has order at most 16 for ell = 2 and at
    // most 9 for ell = 3, so the division tree below stops this deep.
    let cap = if ell == 2 { 4 } else { 2 };
    let mut all = vec![PointQ::Infinity];
    let mut frontier = vec![PointQ::Infinity];
    for _ in 0..cap {
        let mut next = Vec::new();
        for pt in &frontier {
            for beta in divide_point(curve, pt, ell)? {
                if !all.contains(&beta) {
                    all.push(beta.clone());
                    next.push(beta);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(all)
}

fn division_depth(curve: &CurveQ, pt: &PointQ, ell: u64, level: u32) -> u32 {
    assert!(level <= 64, "division chain ran past any rational height");
    let pre = divide_point(curve, pt, ell).expect("chain stays on the curve");
    pre.iter()
        .map(|beta| 1 + division_depth(curve, beta, ell, level + 1))
        .max()
        .unwrap_or(0)
}

/// Largest d such that alpha differs from an ell^d-divisible point by
/// rational ell-power torsion; errors on torsion alpha.
pub fn compute_d(curve: &CurveQ, alpha: &PointQ, ell: u64) -> Result<u32> {
    check_ell(ell)?;
    if !curve.contains(alpha) {
        return Err(Error::PointNotOnCurve);
    }
    if is_torsion(curve, alpha) {
        return Err(Error::TorsionPoint);
    }
    let mut best = 0;
    for t in rational_ell_power_torsion(curve, ell)? {
        let shifted = curve.add(alpha, &curve.neg(&t));
        best = best.max(division_depth(curve, &shifted, ell, 0));
    }
    Ok(best)
}

/// Per-prime outcome of a density scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeOutcome {
    BadReduction,
    DenominatorHit,
    Good { coprime: bool },
}

/// Aggregated scan of the order criterion over primes up to a bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub ell: u64,
    pub x_bound: u64,
    pub good: u64,
    pub coprime: u64,
    pub skipped: u64,
    pub fraction: BigRational,
}

/// Primes up to and including x.
pub fn sieve_primes(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let n = x as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        out.push(p as u64);
        let mut q = p * p;
        while q <= n {
            composite[q] = true;
            q += p;
        }
    }
    out
}

/// Classifies one prime; p must be prime and alpha must lie on the curve.
pub fn scan_prime(curve: &CurveQ, alpha: &PointQ, ell: u64, p: u64) -> PrimeOutcome {
    match reduce_mod_p(curve, alpha, p) {
        Ok((cf, pf)) => {
            let n = cf.group_order();
            if p < 1000 {
                for pt in cf.points() {
                    assert!(
                        cf.mul(n, &pt) == PointFp::Infinity,
                        "group order must annihilate every point at p = {p}"
                    );
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(p ^ 0x5ca1ab1e);
                for _ in 0..20 {
                    let pt = cf.random_point(&mut rng);
                    assert!(
                        cf.mul(n, &pt) == PointFp::Infinity,
                        "group order must annihilate sampled points at p = {p}"
                    );
                }
            }
            PrimeOutcome::Good {
                coprime: order_coprime_to_ell(&cf, &pf, ell),
            }
        }
        Err(Error::BadReduction { .. }) => PrimeOutcome::BadReduction,
        Err(Error::DenominatorDivisible { .. }) => PrimeOutcome::DenominatorHit,
        Err(e) => panic!("unexpected reduction failure: {e}"),
    }
}

/// Scans all primes up to x and tallies the coprime-order fraction.
pub fn density_scan(curve: &CurveQ, alpha: &PointQ, ell: u64, x: u64) -> Result<ScanResult> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    if !curve.contains(alpha) {
        return Err(Error::PointNotOnCurve);
    }
    if is_torsion(curve, alpha) {
        return Err(Error::TorsionPoint);
    }
    let mut good = 0u64;
    let mut coprime = 0u64;
    let mut skipped = 0u64;
    for p in sieve_primes(x) {
        match scan_prime(curve, alpha, ell, p) {
            PrimeOutcome::Good { coprime: c } => {
                good += 1;
                if c {
                    coprime += 1;
                }
            }
            _ => skipped += 1,
        }
    }
    if good == 0 {
        return Err(Error::EmptyScan);
    }
    Ok(ScanResult {
        ell,
        x_bound: x,
        good,
        coprime,
        skipped,
        fraction: BigRational::new(BigInt::from(coprime), BigInt::from(good)),
    })
}
