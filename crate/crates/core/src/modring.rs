//! 2x2 linear algebra over Z/l^m for a prime l.
//!
//! Residues are kept in [0, l^m) as u64, with the level capped so that any
//! product of two residues fits in 64 bits. Every routine is exact; the only
//! "approximation" anywhere is the truncation of the valuation of 0 to m.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Largest level allowed for the prime `ell`: l^(2m) must stay below 2^63,
/// and levels never exceed 16.
pub fn max_level(ell: u64) -> u32 {
    let mut m = 0u32;
    let mut pow = 1u128;
    let e = ell as u128;
    while m < 16 {
        let next = pow.checked_mul(e).and_then(|p| p.checked_mul(e));
        match next {
            Some(p) if p < (1u128 << 63) => {
                pow = p;
                m += 1;
            }
            _ => break,
        }
    }
    m
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Modulus context: the prime l, the level m, and the modulus l^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModCtx {
    ell: u64,
    level: u32,
    modulus: u64,
}

impl ModCtx {
    pub fn new(ell: u64, level: u32) -> Result<ModCtx> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        let max = max_level(ell);
        if level == 0 || level > max {
            return Err(Error::LevelOutOfRange { ell, level, max });
        }
        let mut modulus = 1u64;
        for _ in 0..level {
            modulus *= ell;
        }
        Ok(ModCtx { ell, level, modulus })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Reduce an arbitrary signed integer into [0, l^m).
    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    /// Product of two residues. Safe because l^(2m) < 2^63.
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.modulus
    }

    /// l-adic valuation of x, truncated to m for x = 0.
    pub fn val(&self, x: u64) -> u32 {
        if x == 0 {
            return self.level;
        }
        let mut v = 0;
        let mut x = x;
        while x % self.ell == 0 {
            x /= self.ell;
            v += 1;
        }
        v
    }

    /// l^e for e <= m.
    pub fn pow_ell(&self, e: u32) -> u64 {
        let mut p = 1u64;
        for _ in 0..e {
            p *= self.ell;
        }
        p
    }

    /// Inverse of a unit (extended Euclid). Panics if u is divisible by l.
    pub fn inv_unit(&self, u: u64) -> u64 {
        assert!(u % self.ell != 0, "inverse of a non-unit");
        let (mut r0, mut r1) = (self.modulus as i128, u as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        t0.rem_euclid(self.modulus as i128) as u64
    }

    /// Reduce a residue into a lower-level context over the same prime.
    pub fn reduce_to(&self, target: &ModCtx, x: u64) -> u64 {
        debug_assert_eq!(self.ell, target.ell);
        debug_assert!(target.level <= self.level);
        x % target.modulus
    }
}

/// Row vector in (Z/l^m)^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModVec {
    pub ctx: ModCtx,
    pub e: [u64; 2],
}

impl ModVec {
    pub fn new(ctx: ModCtx, e: [u64; 2]) -> ModVec {
        ModVec {
            ctx,
            e: [e[0] % ctx.modulus, e[1] % ctx.modulus],
        }
    }

    pub fn zero(ctx: ModCtx) -> ModVec {
        ModVec { ctx, e: [0, 0] }
    }

    pub fn is_zero(&self) -> bool {
        self.e == [0, 0]
    }

    pub fn add(&self, other: &ModVec) -> ModVec {
        assert_eq!(self.ctx, other.ctx, "ctx mismatch");
        ModVec {
            ctx: self.ctx,
            e: [
                self.ctx.add(self.e[0], other.e[0]),
                self.ctx.add(self.e[1], other.e[1]),
            ],
        }
    }

    pub fn sub(&self, other: &ModVec) -> ModVec {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ModVec {
        ModVec {
            ctx: self.ctx,
            e: [self.ctx.neg(self.e[0]), self.ctx.neg(self.e[1])],
        }
    }

    pub fn scale(&self, c: u64) -> ModVec {
        ModVec {
            ctx: self.ctx,
            e: [self.ctx.mul(c, self.e[0]), self.ctx.mul(c, self.e[1])],
        }
    }

    /// Row vector times matrix: (v M)_j = v_0 M_0j + v_1 M_1j.
    pub fn apply(&self, m: &ModMat) -> ModVec {
        assert_eq!(self.ctx, m.ctx, "ctx mismatch");
        let c = &self.ctx;
        ModVec {
            ctx: self.ctx,
            e: [
                c.add(c.mul(self.e[0], m.e[0][0]), c.mul(self.e[1], m.e[1][0])),
                c.add(c.mul(self.e[0], m.e[0][1]), c.mul(self.e[1], m.e[1][1])),
            ],
        }
    }

    /// Smallest coordinate valuation, so 0 for primitive vectors.
    pub fn min_val(&self) -> u32 {
        self.ctx.val(self.e[0]).min(self.ctx.val(self.e[1]))
    }

    pub fn is_primitive(&self) -> bool {
        self.min_val() == 0
    }

    pub fn reduce_to(&self, target: ModCtx) -> ModVec {
        ModVec {
            ctx: target,
            e: [
                self.ctx.reduce_to(&target, self.e[0]),
                self.ctx.reduce_to(&target, self.e[1]),
            ],
        }
    }
}

/// 2x2 matrix over Z/l^m, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModMat {
    pub ctx: ModCtx,
    pub e: [[u64; 2]; 2],
}

impl ModMat {
    pub fn new(ctx: ModCtx, e: [[u64; 2]; 2]) -> ModMat {
        ModMat {
            ctx,
            e: [
                [e[0][0] % ctx.modulus, e[0][1] % ctx.modulus],
                [e[1][0] % ctx.modulus, e[1][1] % ctx.modulus],
            ],
        }
    }

    pub fn identity(ctx: ModCtx) -> ModMat {
        ModMat {
            ctx,
            e: [[1, 0], [0, 1]],
        }
    }

    pub fn zero(ctx: ModCtx) -> ModMat {
        ModMat {
            ctx,
            e: [[0, 0], [0, 0]],
        }
    }

    pub fn scalar(ctx: ModCtx, x: u64) -> ModMat {
        let x = x % ctx.modulus;
        ModMat {
            ctx,
            e: [[x, 0], [0, x]],
        }
    }

    pub fn is_scalar(&self) -> Option<u64> {
        if self.e[0][1] == 0 && self.e[1][0] == 0 && self.e[0][0] == self.e[1][1] {
            Some(self.e[0][0])
        } else {
            None
        }
    }

    pub fn mul(&self, other: &ModMat) -> ModMat {
        assert_eq!(self.ctx, other.ctx, "ctx mismatch");
        let c = &self.ctx;
        let mut r = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = c.add(
                    c.mul(self.e[i][0], other.e[0][j]),
                    c.mul(self.e[i][1], other.e[1][j]),
                );
            }
        }
        ModMat { ctx: self.ctx, e: r }
    }

    pub fn add(&self, other: &ModMat) -> ModMat {
        assert_eq!(self.ctx, other.ctx, "ctx mismatch");
        let c = &self.ctx;
        let mut r = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = c.add(self.e[i][j], other.e[i][j]);
            }
        }
        ModMat { ctx: self.ctx, e: r }
    }

    pub fn sub(&self, other: &ModMat) -> ModMat {
        assert_eq!(self.ctx, other.ctx, "ctx mismatch");
        let c = &self.ctx;
        let mut r = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = c.sub(self.e[i][j], other.e[i][j]);
            }
        }
        ModMat { ctx: self.ctx, e: r }
    }

    pub fn det(&self) -> u64 {
        let c = &self.ctx;
        c.sub(
            c.mul(self.e[0][0], self.e[1][1]),
            c.mul(self.e[0][1], self.e[1][0]),
        )
    }

    /// Invertible over Z/l^m exactly when the determinant is a unit mod l.
    pub fn is_invertible(&self) -> bool {
        self.det() % self.ctx.ell != 0
    }

    pub fn inverse(&self) -> Result<ModMat> {
        if !self.is_invertible() {
            return Err(Error::NotInvertible);
        }
        let c = &self.ctx;
        let di = c.inv_unit(self.det());
        Ok(ModMat {
            ctx: self.ctx,
            e: [
                [c.mul(di, self.e[1][1]), c.mul(di, c.neg(self.e[0][1]))],
                [c.mul(di, c.neg(self.e[1][0])), c.mul(di, self.e[0][0])],
            ],
        })
    }

    pub fn reduce_to(&self, target: ModCtx) -> ModMat {
        let mut r = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = self.ctx.reduce_to(&target, self.e[i][j]);
            }
        }
        ModMat { ctx: target, e: r }
    }
}

/// Diagonalization u * a * v = diag(l^exps[0], l^exps[1]) with unit row and
/// column transforms, exps[0] <= exps[1], and the convention that exponent m
/// stands for a zero diagonal entry.
#[derive(Debug, Clone, Copy)]
pub struct Diag2 {
    pub u: ModMat,
    pub v: ModMat,
    pub exps: [u32; 2],
}

/// Exact division of a residue by l^a; requires val(x) >= a.
pub(crate) fn div_pow(ctx: &ModCtx, x: u64, a: u32) -> u64 {
    debug_assert!(ctx.val(x) >= a);
    x / ctx.pow_ell(a)
}

/// Smith-style diagonalization of a 2x2 matrix over Z/l^m, pivoting on the
/// entry of smallest valuation.
pub fn diagonalize(a: &ModMat) -> Diag2 {
    let ctx = a.ctx;
    let m = ctx.level();
    let mut w = *a;
    let mut u = ModMat::identity(ctx);
    let mut v = ModMat::identity(ctx);

    // Locate the pivot.
    let mut best = (0usize, 0usize);
    let mut best_val = ctx.level() + 1;
    for i in 0..2 {
        for j in 0..2 {
            let vv = ctx.val(w.e[i][j]);
            if vv < best_val {
                best_val = vv;
                best = (i, j);
            }
        }
    }
    if best_val >= m {
        return Diag2 { u, v, exps: [m, m] };
    }
    if best.0 == 1 {
        w.e.swap(0, 1);
        u.e.swap(0, 1);
    }
    if best.1 == 1 {
        for r in 0..2 {
            w.e[r].swap(0, 1);
            v.e[r].swap(0, 1);
        }
    }

    let pa = best_val;
    let unit = div_pow(&ctx, w.e[0][0], pa);
    let unit_inv = ctx.inv_unit(unit);

    // Clear below: row1 -= q * row0 with q chosen so q * pivot = w[1][0].
    let q = ctx.mul(div_pow(&ctx, w.e[1][0], pa), unit_inv);
    for j in 0..2 {
        w.e[1][j] = ctx.sub(w.e[1][j], ctx.mul(q, w.e[0][j]));
        u.e[1][j] = ctx.sub(u.e[1][j], ctx.mul(q, u.e[0][j]));
    }
    debug_assert_eq!(w.e[1][0], 0);

    // Clear to the right: col1 -= q * col0.
    let q = ctx.mul(div_pow(&ctx, w.e[0][1], pa), unit_inv);
    for r in 0..2 {
        w.e[r][1] = ctx.sub(w.e[r][1], ctx.mul(q, w.e[r][0]));
        v.e[r][1] = ctx.sub(v.e[r][1], ctx.mul(q, v.e[r][0]));
    }
    debug_assert_eq!(w.e[0][1], 0);

    // Normalize both diagonal entries to plain powers of l.
    for j in 0..2 {
        u.e[0][j] = ctx.mul(unit_inv, u.e[0][j]);
    }
    w.e[0][0] = ctx.pow_ell(pa);
    let pb = ctx.val(w.e[1][1]);
    if pb < m {
        let u2_inv = ctx.inv_unit(div_pow(&ctx, w.e[1][1], pb));
        for j in 0..2 {
            u.e[1][j] = ctx.mul(u2_inv, u.e[1][j]);
        }
        w.e[1][1] = ctx.pow_ell(pb);
    } else {
        w.e[1][1] = 0;
    }
    debug_assert!(pa <= pb);
    debug_assert_eq!(u.mul(a).mul(&v).e, w.e);
    Diag2 { u, v, exps: [pa, pb] }
}

/// Canonical submodule of (Z/l^m)^2 in Howell form: at most one row
/// (l^a, c) with a leading first coordinate and at most one row (0, l^b),
/// with c reduced mod l^b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Submodule {
    ctx: ModCtx,
    rows: [[u64; 2]; 2],
}

impl Submodule {
    pub fn zero(ctx: ModCtx) -> Submodule {
        Submodule {
            ctx,
            rows: [[0, 0], [0, 0]],
        }
    }

    pub fn full(ctx: ModCtx) -> Submodule {
        Submodule {
            ctx,
            rows: [[1, 0], [0, 1]],
        }
    }

    pub fn from_gens(ctx: ModCtx, gens: &[[u64; 2]]) -> Submodule {
        let mut rows: Vec<[u64; 2]> = Vec::new();
        for g in gens {
            let r = [g[0] % ctx.modulus(), g[1] % ctx.modulus()];
            if r != [0, 0] {
                rows.push(r);
            }
        }
        Submodule::canonicalize(ctx, rows)
    }

    pub fn cyclic(v: &ModVec) -> Submodule {
        Submodule::from_gens(v.ctx, &[v.e])
    }

    fn canonicalize(ctx: ModCtx, mut rows: Vec<[u64; 2]>) -> Submodule {
        let m = ctx.level();
        let mut out = [[0u64; 2]; 2];

        // First pivot: smallest valuation in coordinate 0. The minimum over
        // generators equals the minimum over the module they span.
        let mut a = m;
        let mut pivot_at = None;
        for (i, r) in rows.iter().enumerate() {
            let v = ctx.val(r[0]);
            if v < a {
                a = v;
                pivot_at = Some(i);
            }
        }
        if let Some(i) = pivot_at {
            let p = rows.swap_remove(i);
            let inv = ctx.inv_unit(div_pow(&ctx, p[0], a));
            let p = [ctx.pow_ell(a), ctx.mul(inv, p[1])];
            for r in rows.iter_mut() {
                let t = div_pow(&ctx, r[0], a);
                r[0] = 0;
                r[1] = ctx.sub(r[1], ctx.mul(t, p[1]));
            }
            // Multiples of the pivot with vanishing first coordinate stay in
            // the module; they seed the second pivot.
            rows.push([0, ctx.mul(ctx.pow_ell(m - a), p[1])]);
            out[0] = p;
        }

        let mut b = m;
        for r in rows.iter() {
            debug_assert_eq!(r[0], 0);
            b = b.min(ctx.val(r[1]));
        }
        if b < m {
            out[1] = [0, ctx.pow_ell(b)];
            out[0][1] %= ctx.pow_ell(b);
        }
        Submodule { ctx, rows: out }
    }

    pub fn ctx(&self) -> ModCtx {
        self.ctx
    }

    pub fn add_gen(&self, v: &ModVec) -> Submodule {
        assert_eq!(self.ctx, v.ctx, "ctx mismatch");
        let mut rows: Vec<[u64; 2]> = Vec::new();
        for r in self.rows.iter() {
            if *r != [0, 0] {
                rows.push(*r);
            }
        }
        rows.push(v.e);
        Submodule::canonicalize(self.ctx, rows)
    }

    pub fn contains(&self, v: &ModVec) -> bool {
        assert_eq!(self.ctx, v.ctx, "ctx mismatch");
        let ctx = &self.ctx;
        let m = ctx.level();
        let a = if self.rows[0] == [0, 0] {
            m
        } else {
            ctx.val(self.rows[0][0])
        };
        let b = if self.rows[1] == [0, 0] {
            m
        } else {
            ctx.val(self.rows[1][1])
        };
        if ctx.val(v.e[0]) < a {
            return false;
        }
        let rest = if a == m {
            v.e[1]
        } else {
            let t = div_pow(ctx, v.e[0], a);
            ctx.sub(v.e[1], ctx.mul(t, self.rows[0][1]))
        };
        ctx.val(rest) >= b
    }

    /// Exponents (a, b) with the module of order l^((m-a)+(m-b)).
    fn pivot_exps(&self) -> (u32, u32) {
        let m = self.ctx.level();
        let a = if self.rows[0] == [0, 0] {
            m
        } else {
            self.ctx.val(self.rows[0][0])
        };
        let b = if self.rows[1] == [0, 0] {
            m
        } else {
            self.ctx.val(self.rows[1][1])
        };
        (a, b)
    }

    pub fn order(&self) -> u64 {
        let m = self.ctx.level();
        let (a, b) = self.pivot_exps();
        let mut o = 1u64;
        for _ in 0..(m - a) + (m - b) {
            o *= self.ctx.ell();
        }
        o
    }

    /// log_l of the index in the full module (Z/l^m)^2.
    pub fn index_exponent(&self) -> u32 {
        let (a, b) = self.pivot_exps();
        a + b
    }

    /// Orders of the cyclic invariant factors, largest first.
    pub fn invariant_factors(&self) -> [u64; 2] {
        let m = self.ctx.level();
        let mat = ModMat::new(self.ctx, self.rows);
        let d = diagonalize(&mat);
        [
            self.ctx.pow_ell(m - d.exps[0]),
            self.ctx.pow_ell(m - d.exps[1]),
        ]
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariant_factors()[1] == 1
    }

    pub fn generators(&self) -> Vec<ModVec> {
        self.rows
            .iter()
            .filter(|r| **r != [0, 0])
            .map(|r| ModVec::new(self.ctx, *r))
            .collect()
    }
}

/// Image and kernel of v -> v * mat as canonical submodules of (Z/l^m)^2.
/// Their orders always multiply to l^(2m).
pub fn image_kernel(mat: &ModMat) -> (Submodule, Submodule) {
    let ctx = mat.ctx;
    let m = ctx.level();
    let d = diagonalize(mat);
    let vinv = d.v.inverse().expect("column transform is invertible");
    let image = Submodule::from_gens(
        ctx,
        &[
            ModVec::new(ctx, vinv.e[0]).scale(ctx.pow_ell(d.exps[0])).e,
            ModVec::new(ctx, vinv.e[1]).scale(ctx.pow_ell(d.exps[1])).e,
        ],
    );
    let kernel = Submodule::from_gens(
        ctx,
        &[
            ModVec::new(ctx, d.u.e[0]).scale(ctx.pow_ell(m - d.exps[0])).e,
            ModVec::new(ctx, d.u.e[1]).scale(ctx.pow_ell(m - d.exps[1])).e,
        ],
    );
    let total = (image.order() as u128) * (kernel.order() as u128);
    assert_eq!(total, (ctx.modulus() as u128) * (ctx.modulus() as u128));
    (image, kernel)
}

/// A solution w of w * mat = -v, if one exists. The returned vector is
/// checked against the equation before being handed back.
pub fn solve_affine(v: &ModVec, mat: &ModMat) -> Option<ModVec> {
    assert_eq!(v.ctx, mat.ctx, "ctx mismatch");
    let ctx = mat.ctx;
    let d = diagonalize(mat);
    let target = v.neg().apply(&d.v);
    let mut w = [0u64; 2];
    for i in 0..2 {
        if ctx.val(target.e[i]) < d.exps[i] {
            return None;
        }
        w[i] = div_pow(&ctx, target.e[i], d.exps[i]);
    }
    let w = ModVec::new(ctx, w).apply(&d.u);
    assert_eq!(w.apply(mat), v.neg());
    Some(w)
}

/// Split a nonzero vector as l^t * p with p primitive.
pub fn primitive_decompose(v: &ModVec) -> Result<(u32, ModVec)> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let t = v.min_val();
    let ctx = v.ctx;
    let p = ModVec::new(ctx, [div_pow(&ctx, v.e[0], t), div_pow(&ctx, v.e[1], t)]);
    debug_assert!(p.is_primitive());
    Ok((t, p))
}

/// Visit every invertible 2x2 matrix over Z/l^m in lexicographic order of
/// its entries. Streams rather than materializes, so deep levels stay cheap
/// on memory.
pub fn for_each_gl2<F: FnMut(&ModMat)>(ctx: ModCtx, mut f: F) {
    let n = ctx.modulus();
    let mut e = [[0u64; 2]; 2];
    for a in 0..n {
        e[0][0] = a;
        for b in 0..n {
            e[0][1] = b;
            for c in 0..n {
                e[1][0] = c;
                for d in 0..n {
                    e[1][1] = d;
                    let mat = ModMat { ctx, e };
                    if mat.is_invertible() {
                        f(&mat);
                    }
                }
            }
        }
    }
}

/// |GL_2(Z/l^m)| = l^(4(m-1)) * (l^2 - 1) * (l^2 - l).
pub fn gl2_order(ctx: &ModCtx) -> u128 {
    let l = ctx.ell() as u128;
    let mut o = (l * l - 1) * (l * l - l);
    for _ in 0..4 * (ctx.level() - 1) {
        o *= l;
    }
    o
}
