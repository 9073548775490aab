//! H1 of a finite matrix group acting on (Z/l^n)^2 by right multiplication.
//!
//! Cocycles are pinned down by their values on a generating set: values
//! propagate along a breadth-first spanning tree of the Cayley graph, and
//! every non-tree edge contributes one linear relation over Z/l^n. The
//! relation span is accumulated in echelon form with valuation pivoting
//! (Z/l^n is not a field, so the pivot of least l-valuation must win), the
//! cocycle group Z1 falls out as a kernel, and H1 is the cokernel of the
//! coboundary map into Z1's coordinates.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::modring::{div_pow, ModCtx, ModMat, ModVec};
use crate::sdgroup::{AffineElement, ClosedSubgroup, GroupKind, SubgroupSpec};
use crate::{Error, Result, H1_BUDGET};

/// l^e reduced into the ring, so the exponent n maps to 0.
fn pow_red(ctx: ModCtx, e: u32) -> u64 {
    ctx.pow_ell(e) % ctx.modulus()
}

/// Dense row-major matrix over Z/l^n, any shape.
#[derive(Clone)]
struct Mat {
    ctx: ModCtx,
    rows: usize,
    cols: usize,
    e: Vec<u64>,
}

impl Mat {
    fn zero(ctx: ModCtx, rows: usize, cols: usize) -> Mat {
        Mat {
            ctx,
            rows,
            cols,
            e: vec![0; rows * cols],
        }
    }

    fn identity(ctx: ModCtx, dim: usize) -> Mat {
        let mut m = Mat::zero(ctx, dim, dim);
        for i in 0..dim {
            m.e[i * dim + i] = 1;
        }
        m
    }

    fn at(&self, r: usize, c: usize) -> u64 {
        self.e[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize, x: u64) {
        self.e[r * self.cols + c] = x;
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.e.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in 0..self.rows {
            self.e.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    fn scale_row(&mut self, i: usize, c: u64) {
        for j in 0..self.cols {
            let x = self.ctx.mul(self.at(i, j), c);
            self.set(i, j, x);
        }
    }

    fn scale_col(&mut self, j: usize, c: u64) {
        for i in 0..self.rows {
            let x = self.ctx.mul(self.at(i, j), c);
            self.set(i, j, x);
        }
    }

    /// row dst += c * row src.
    fn row_axpy(&mut self, dst: usize, src: usize, c: u64) {
        for j in 0..self.cols {
            let x = self.ctx.add(self.at(dst, j), self.ctx.mul(c, self.at(src, j)));
            self.set(dst, j, x);
        }
    }

    /// col dst += c * col src.
    fn col_axpy(&mut self, dst: usize, src: usize, c: u64) {
        for i in 0..self.rows {
            let x = self.ctx.add(self.at(i, dst), self.ctx.mul(c, self.at(i, src)));
            self.set(i, dst, x);
        }
    }

    /// v * self for a row vector v of length rows.
    fn apply_left(&self, v: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = self.ctx.add(*o, self.ctx.mul(vi, self.at(i, j)));
            }
        }
        out
    }
}

/// U A V = diag(l^exps) with U invertible and tracked alongside its inverse;
/// V is discarded because no caller needs column coordinates.
struct Snf {
    exps: Vec<u32>,
    u: Mat,
    uinv: Mat,
}

fn snf(a: &Mat) -> Snf {
    let ctx = a.ctx;
    let n = ctx.level();
    let (rows, cols) = (a.rows, a.cols);
    let mut w = a.clone();
    let mut u = Mat::identity(ctx, rows);
    let mut uinv = Mat::identity(ctx, rows);
    let steps = rows.min(cols);
    let mut exps = vec![n; steps];
    for t in 0..steps {
        let mut best = (n, t, t);
        for i in t..rows {
            for j in t..cols {
                let v = ctx.val(w.at(i, j));
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        if best.0 >= n {
            break;
        }
        let (a_t, pi, pj) = best;
        if pi != t {
            w.swap_rows(t, pi);
            u.swap_rows(t, pi);
            uinv.swap_cols(t, pi);
        }
        if pj != t {
            w.swap_cols(t, pj);
        }
        let unit = div_pow(&ctx, w.at(t, t), a_t);
        let inv = ctx.inv_unit(unit);
        w.scale_row(t, inv);
        u.scale_row(t, inv);
        uinv.scale_col(t, unit);
        for i in (t + 1)..rows {
            let x = w.at(i, t);
            if x != 0 {
                let q = div_pow(&ctx, x, a_t);
                w.row_axpy(i, t, ctx.neg(q));
                u.row_axpy(i, t, ctx.neg(q));
                uinv.col_axpy(t, i, q);
            }
        }
        for j in (t + 1)..cols {
            let x = w.at(t, j);
            if x != 0 {
                let q = div_pow(&ctx, x, a_t);
                w.col_axpy(j, t, ctx.neg(q));
            }
        }
        exps[t] = a_t;
    }
    #[cfg(debug_assertions)]
    {
        let dim = rows;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = 0u64;
                for t in 0..dim {
                    acc = ctx.add(acc, ctx.mul(u.at(i, t), uinv.at(t, j)));
                }
                debug_assert_eq!(acc, u64::from(i == j));
            }
        }
    }
    Snf { exps, u, uinv }
}

/// Solutions of v B = 0 as a coordinatized direct sum: gens[t] has order
/// l^orders[t], and every solution is a unique combination of the gens.
struct LeftKernel {
    ctx: ModCtx,
    orders: Vec<u32>,
    gens: Vec<Vec<u64>>,
    uinv: Mat,
}

fn left_kernel(b: &Mat) -> LeftKernel {
    let s = snf(b);
    let ctx = b.ctx;
    let n = ctx.level();
    let mut orders = vec![n; b.rows];
    orders[..s.exps.len()].copy_from_slice(&s.exps);
    let gens: Vec<Vec<u64>> = orders
        .iter()
        .enumerate()
        .map(|(t, &a)| {
            let scale = pow_red(ctx, n - a);
            (0..b.rows).map(|j| ctx.mul(scale, s.u.at(t, j))).collect()
        })
        .collect();
    for g in &gens {
        debug_assert!(b.apply_left(g).iter().all(|&x| x == 0));
    }
    LeftKernel {
        ctx,
        orders,
        gens,
        uinv: s.uinv,
    }
}

impl LeftKernel {
    fn size_exp(&self) -> u64 {
        self.orders.iter().map(|&a| u64::from(a)).sum()
    }

    /// Coordinates of a kernel member with respect to gens. Fails loudly on
    /// a vector outside the kernel, which would mean the relation system is
    /// inconsistent.
    fn coords(&self, v: &[u64]) -> Vec<u64> {
        let n = self.ctx.level();
        let w = self.uinv.apply_left(v);
        w.iter()
            .zip(&self.orders)
            .map(|(&wt, &a)| {
                assert!(
                    self.ctx.val(wt) >= n - a,
                    "coboundary outside the cocycle kernel: relation system inconsistent"
                );
                div_pow(&self.ctx, wt, n - a)
            })
            .collect()
    }
}

/// Span of relation vectors in (Z/l^n)^dim, kept in echelon form with one
/// pivot per column and valuation-minimal pivots. The resulting row set
/// generates the same span regardless of insertion order.
struct RelSpan {
    ctx: ModCtx,
    pivots: Vec<Option<Vec<u64>>>,
}

impl RelSpan {
    fn new(ctx: ModCtx, dim: usize) -> RelSpan {
        RelSpan {
            ctx,
            pivots: vec![None; dim],
        }
    }

    fn normalize(&self, v: &mut [u64], j: usize, a: u32) {
        let unit = div_pow(&self.ctx, v[j], a);
        let inv = self.ctx.inv_unit(unit);
        for x in v.iter_mut() {
            *x = self.ctx.mul(*x, inv);
        }
    }

    fn insert(&mut self, mut v: Vec<u64>) {
        loop {
            let j = match v.iter().position(|&x| x != 0) {
                Some(j) => j,
                None => return,
            };
            let a_v = self.ctx.val(v[j]);
            if self.pivots[j].is_none() {
                self.normalize(&mut v, j, a_v);
                self.pivots[j] = Some(v);
                return;
            }
            let a_p = self.ctx.val(self.pivots[j].as_ref().expect("pivot present")[j]);
            if a_p > a_v {
                self.normalize(&mut v, j, a_v);
                core::mem::swap(
                    self.pivots[j].as_mut().expect("pivot present"),
                    &mut v,
                );
            }
            let p = self.pivots[j].as_ref().expect("pivot present");
            let q = div_pow(&self.ctx, v[j], self.ctx.val(p[j]));
            for (x, &y) in v.iter_mut().zip(p.iter()) {
                *x = self.ctx.sub(*x, self.ctx.mul(q, y));
            }
        }
    }

    fn rows(&self) -> Vec<Vec<u64>> {
        self.pivots.iter().flatten().cloned().collect()
    }
}

/// One cocycle: generator values plus the derived value at every element of
/// the acting group, indexed by closure position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle {
    ctx: ModCtx,
    gen_values: Vec<ModVec>,
    values: Vec<ModVec>,
}

impl Cocycle {
    pub fn module_ctx(&self) -> ModCtx {
        self.ctx
    }

    /// Values on the defining generating set.
    pub fn gen_values(&self) -> &[ModVec] {
        &self.gen_values
    }

    /// Value at the element in the given closure position.
    pub fn value(&self, pos: usize) -> ModVec {
        self.values[pos]
    }

    /// Checks xi(xy) = xi(x) rho(y) + xi(y) for one pair of positions.
    pub fn check_pair(&self, group: &ClosedSubgroup, x: usize, y: usize) -> bool {
        let ex = &group.elements()[x];
        let ey = &group.elements()[y];
        let xy = ex.compose_unchecked(ey);
        let pos = group.position(&xy).expect("group closed under composition");
        let rhs = self.values[x].apply(&ey.g.reduce_to(self.ctx)).add(&self.values[y]);
        self.values[pos] == rhs
    }
}

/// Invariant-factor structure of H1 with the scalar exponent bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct H1Result {
    /// Cyclic factor orders, ascending, each dividing the next; empty when
    /// the group is trivial.
    pub factors: Vec<u64>,
    /// Largest factor order, 1 if trivial.
    pub exponent: u64,
    /// l^r for the group's scalar depth r; the exponent divides this.
    pub sah_bound: u64,
}

struct CocycleSystem {
    mctx: ModCtx,
    k: usize,
    rho: Vec<ModMat>,
    coeffs: Vec<Vec<ModMat>>,
    kernel: LeftKernel,
}

/// BFS over the Cayley graph: per-element coefficient matrices express each
/// xi(x) in the generator unknowns, and non-tree edges feed the relation
/// span. Finishes with Z1 as the kernel of the accumulated relations.
fn build_system(group: &ClosedSubgroup, n: u32) -> Result<CocycleSystem> {
    assert_eq!(group.kind(), GroupKind::Linear);
    if n == 0 {
        return Err(Error::ModuleLevelZero);
    }
    let m = group.ctx().level();
    if n > m {
        return Err(Error::ModuleLevelTooDeep {
            module_level: n,
            group_level: m,
        });
    }
    if group.order() > H1_BUDGET {
        return Err(Error::GroupTooLarge {
            order: group.order(),
            budget: H1_BUDGET,
        });
    }
    let mctx = ModCtx::new(group.ctx().ell(), n)?;
    let gens = group.spec().generators();
    let k = gens.len();
    let rho: Vec<ModMat> = gens.iter().map(|e| e.g.reduce_to(mctx)).collect();
    let size = group.order() as usize;
    let mut coeffs: Vec<Option<Vec<ModMat>>> = vec![None; size];
    let mut span = RelSpan::new(mctx, 2 * k);
    let root = group
        .position(&AffineElement::identity(group.ctx()))
        .expect("identity is in every closure");
    coeffs[root] = Some(vec![ModMat::zero(mctx); k]);
    let mut queue = VecDeque::new();
    queue.push_back(root);
    while let Some(x) = queue.pop_front() {
        let cx = coeffs[x].clone().expect("dequeued nodes are labeled");
        for (j, gen) in gens.iter().enumerate() {
            let y_elem = group.elements()[x].compose_unchecked(gen);
            let y = group
                .position(&y_elem)
                .expect("closure is closed under generators");
            let mut cy: Vec<ModMat> = cx.iter().map(|c| c.mul(&rho[j])).collect();
            cy[j] = cy[j].add(&ModMat::identity(mctx));
            match &coeffs[y] {
                None => {
                    coeffs[y] = Some(cy);
                    queue.push_back(y);
                }
                Some(old) => {
                    let diffs: Vec<ModMat> =
                        cy.iter().zip(old.iter()).map(|(a, b)| a.sub(b)).collect();
                    for col in 0..2 {
                        let mut rel = vec![0u64; 2 * k];
                        for (i, d) in diffs.iter().enumerate() {
                            rel[2 * i] = d.e[0][col];
                            rel[2 * i + 1] = d.e[1][col];
                        }
                        span.insert(rel);
                    }
                }
            }
        }
    }
    let pivot_rows = span.rows();
    let mut b = Mat::zero(mctx, 2 * k, pivot_rows.len());
    for (c, row) in pivot_rows.iter().enumerate() {
        for (r, &x) in row.iter().enumerate() {
            b.set(r, c, x);
        }
    }
    let kernel = left_kernel(&b);
    Ok(CocycleSystem {
        mctx,
        k,
        rho,
        coeffs: coeffs
            .into_iter()
            .map(|c| c.expect("Cayley graph is connected from the identity"))
            .collect(),
        kernel,
    })
}

/// Size exponent of the fixed submodule of (Z/l^n)^2 under the generators.
fn fixed_size_exp(mctx: ModCtx, rho: &[ModMat]) -> u64 {
    let mut b = Mat::zero(mctx, 2, 2 * rho.len());
    for (i, g) in rho.iter().enumerate() {
        let d = g.sub(&ModMat::identity(mctx));
        for r in 0..2 {
            for c in 0..2 {
                b.set(r, 2 * i + c, d.e[r][c]);
            }
        }
    }
    left_kernel(&b).size_exp()
}

/// l^r for the group's scalar depth r: multiplying a cocycle class by any
/// scalar x I in the group acts as multiplication by x, so x - 1 kills H1.
pub fn sah_exponent_bound(group: &ClosedSubgroup) -> u64 {
    let r = crate::arboreal::compute_r(group);
    group.ctx().ell().pow(r)
}

/// Invariant factors of H1(G, (Z/l^n)^2) for a linear group at level m >= n.
pub fn h1(group: &ClosedSubgroup, n: u32) -> Result<H1Result> {
    let sys = build_system(group, n)?;
    let mctx = sys.mctx;
    let dim = 2 * sys.k;
    let mut pres = Mat::zero(mctx, dim + 2, dim);
    for (t, &a) in sys.kernel.orders.iter().enumerate() {
        pres.set(t, t, pow_red(mctx, a));
    }
    for (bi, w) in [[1u64, 0], [0, 1]].iter().enumerate() {
        let wv = ModVec::new(mctx, *w);
        let mut bvec = vec![0u64; dim];
        for (i, r) in sys.rho.iter().enumerate() {
            let moved = wv.apply(r).sub(&wv);
            bvec[2 * i] = moved.e[0];
            bvec[2 * i + 1] = moved.e[1];
        }
        let lam = sys.kernel.coords(&bvec);
        for (t, &l) in lam.iter().enumerate() {
            pres.set(dim + bi, t, l);
        }
    }
    let q = snf(&pres);
    let factors: Vec<u64> = q
        .exps
        .iter()
        .filter(|&&a| a > 0)
        .map(|&a| mctx.ell().pow(a))
        .collect();
    let exponent = factors.last().copied().unwrap_or(1);
    let z1_exp = sys.kernel.size_exp();
    let h1_exp: u64 = q.exps.iter().map(|&a| u64::from(a)).sum();
    let mg_exp = fixed_size_exp(mctx, &sys.rho);
    assert_eq!(
        z1_exp + mg_exp,
        h1_exp + 2 * u64::from(n),
        "coboundary count disagrees with the fixed-submodule identity: bug"
    );
    Ok(H1Result {
        factors,
        exponent,
        sah_bound: sah_exponent_bound(group),
    })
}

/// Materialized basis of Z1: one cocycle per nontrivial kernel coordinate,
/// each spot-verified on 1000 random pairs before being returned.
pub fn z1_basis(group: &ClosedSubgroup, n: u32) -> Result<Vec<Cocycle>> {
    let sys = build_system(group, n)?;
    let size = group.order();
    let mut out = Vec::new();
    for (t, &a) in sys.kernel.orders.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let z = &sys.kernel.gens[t];
        let gen_values: Vec<ModVec> = (0..sys.k)
            .map(|i| ModVec::new(sys.mctx, [z[2 * i], z[2 * i + 1]]))
            .collect();
        let values: Vec<ModVec> = sys
            .coeffs
            .iter()
            .map(|cs| {
                let mut acc = ModVec::zero(sys.mctx);
                for (u, c) in gen_values.iter().zip(cs.iter()) {
                    acc = acc.add(&u.apply(c));
                }
                acc
            })
            .collect();
        let cocycle = Cocycle {
            ctx: sys.mctx,
            gen_values,
            values,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x0c0c711e + t as u64);
        for _ in 0..1000 {
            let x = (rng.next_u64() % size) as usize;
            let y = (rng.next_u64() % size) as usize;
            assert!(
                cocycle.check_pair(group, x, y),
                "cocycle identity failed on a basis element: bug in the relation system"
            );
        }
        out.push(cocycle);
    }
    Ok(out)
}

/// H1 structures of the full preimages of a group across a range of levels,
/// all acting on the same module (Z/l^n)^2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerReport {
    pub levels: Vec<(u32, H1Result)>,
    /// Whether the factor sequence is constant over the tested range.
    pub constant: bool,
}

pub fn h1_tower(
    spec: &SubgroupSpec,
    n: u32,
    m_range: core::ops::RangeInclusive<u32>,
) -> Result<TowerReport> {
    assert_eq!(spec.kind(), GroupKind::Linear);
    if n == 0 {
        return Err(Error::ModuleLevelZero);
    }
    let base = ClosedSubgroup::close(spec)?;
    let base_order = base.order();
    let m0 = spec.ctx().level();
    let ell = spec.ctx().ell();
    let mut levels = Vec::new();
    for m in m_range {
        let lifted = spec.at_level(m)?;
        let group = ClosedSubgroup::close(&lifted)?;
        if m > m0 {
            let expected = u128::from(base_order) * u128::from(ell).pow(4 * (m - m0));
            assert_eq!(
                u128::from(group.order()),
                expected,
                "preimage closure order mismatch: lift generators are wrong"
            );
        }
        levels.push((m, h1(&group, n)?));
    }
    let constant = levels.windows(2).all(|w| w[0].1.factors == w[1].1.factors);
    Ok(TowerReport { levels, constant })
}
