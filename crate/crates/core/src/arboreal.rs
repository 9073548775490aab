//! Invariants of a linear image that control the index of the corresponding
//! affine image: the scalar depth r, the stable cyclic level s, the smallest
//! congruence level n_l, and the bound l^(2d+2r+s) * [full : G].
//!
//! All three invariants are certified at the group's own level m under the
//! full-preimage convention. The divisibility depth d of the base point is an
//! arithmetic input computed by [`crate::ecq::compute_d`], never guessed from
//! the group.

use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::modring::{ModCtx, ModVec, Submodule};
use crate::sdgroup::{ClosedSubgroup, GroupKind, SubgroupSpec};
use crate::{Error, Result};

/// Inputs of the index bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundParams {
    pub ell: u64,
    pub d: u32,
    pub r: u32,
    pub s: u32,
    pub index: u64,
}

/// l^(2d+2r+s) * index, exact at any size.
pub fn theorem1_bound(p: &BoundParams) -> BigUint {
    BigUint::from(p.ell).pow(2 * p.d + 2 * p.r + p.s) * BigUint::from(p.index)
}

/// Visit one representative of every cyclic subgroup of order l^m generated
/// by a primitive vector: (1, y) for all y, and (x, 1) for x divisible by l.
fn for_each_line<F: FnMut(&ModVec)>(ctx: ModCtx, mut f: F) {
    for y in 0..ctx.modulus() {
        f(&ModVec::new(ctx, [1, y]));
    }
    let ell = ctx.ell();
    for t in 0..ctx.modulus() / ell {
        f(&ModVec::new(ctx, [t * ell, 1]));
    }
}

/// Smallest positive r such that the group contains a scalar matrix x I with
/// val(x - 1) = r. The full preimage always contains (1 + l^m) I, so r = m
/// counts as attained and the result is min(m, best scalar witness).
pub fn compute_r(group: &ClosedSubgroup) -> u32 {
    assert_eq!(group.kind(), GroupKind::Linear);
    let ctx = group.ctx();
    let mut r = ctx.level();
    for g in group.matrices() {
        if let Some(x) = g.is_scalar() {
            let v = ctx.val(ctx.sub(x, 1));
            if v >= 1 && v < r {
                r = v;
            }
        }
    }
    r
}

/// Largest s <= m such that some cyclic subgroup of order l^s generated by a
/// primitive vector is stable under the group reduced mod l^s; 0 if already
/// no stable line exists mod l.
pub fn compute_s(group: &ClosedSubgroup) -> u32 {
    assert_eq!(group.kind(), GroupKind::Linear);
    let full_ctx = group.ctx();
    for s in (1..=full_ctx.level()).rev() {
        let ctx = ModCtx::new(full_ctx.ell(), s).expect("lower level is valid");
        let gens: Vec<_> = group
            .spec()
            .generators()
            .iter()
            .map(|e| e.g.reduce_to(ctx))
            .collect();
        let mut found = false;
        for_each_line(ctx, |p| {
            if found {
                return;
            }
            let line = Submodule::cyclic(p);
            if gens.iter().all(|g| line.contains(&p.apply(g))) {
                found = true;
            }
        });
        if found {
            return s;
        }
    }
    0
}

/// Smallest n with every matrix congruent to I mod l^n inside the group;
/// n = m always qualifies under the full-preimage convention.
pub fn compute_n_ell(group: &ClosedSubgroup) -> u32 {
    assert_eq!(group.kind(), GroupKind::Linear);
    for n in 1..group.ctx().level() {
        if group.contains_congruence_level(n) {
            return n;
        }
    }
    group.ctx().level()
}

/// The smallest subgroup of (Z/l^m)^2 containing the orbit p G, together
/// with the exponent of its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitSubgroup {
    pub submodule: Submodule,
    pub k_prime: u32,
}

/// Orbit subgroup of a primitive vector under a linear group. Closed by a
/// fixpoint on the canonical submodule form: a subgroup is orbit-stable as
/// soon as each canonical generator stays inside it under each group
/// generator, so no element enumeration is needed.
pub fn kummer_orbit(p: &ModVec, group: &ClosedSubgroup) -> Result<OrbitSubgroup> {
    assert_eq!(group.kind(), GroupKind::Linear);
    if !p.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let mut s = Submodule::cyclic(p);
    loop {
        let mut grew = false;
        for gen in group.spec().generators() {
            for v in s.generators() {
                let moved = v.apply(&gen.g);
                if !s.contains(&moved) {
                    s = s.add_gen(&moved);
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let k_prime = s.index_exponent();
    Ok(OrbitSubgroup {
        submodule: s,
        k_prime,
    })
}

/// Everything the bound needs about one group, plus the bound itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub ell: u64,
    pub level: u32,
    pub d: u32,
    pub r: u32,
    pub s: u32,
    pub n_ell: u32,
    pub index: u64,
    pub bound: BigUint,
    /// r equals the level, so deeper closures could still lower it.
    pub r_saturated: bool,
    /// s equals the level, so deeper closures could still raise the bound's
    /// certified part.
    pub s_saturated: bool,
}

/// Close the group, compute (r, s, n_l, index), and assemble the bound for
/// the given divisibility depth d.
pub fn analyze(spec: &SubgroupSpec, d: u32) -> Result<BoundReport> {
    assert_eq!(spec.kind(), GroupKind::Linear);
    let group = ClosedSubgroup::close(spec)?;
    let level = group.ctx().level();
    let r = compute_r(&group);
    let s = compute_s(&group);
    let n_ell = compute_n_ell(&group);
    debug_assert!(r <= n_ell && s <= n_ell);
    let index = group.index_in_full();
    let bound = theorem1_bound(&BoundParams {
        ell: group.ctx().ell(),
        d,
        r,
        s,
        index,
    });
    Ok(BoundReport {
        ell: group.ctx().ell(),
        level,
        d,
        r,
        s,
        n_ell,
        index,
        bound,
        r_saturated: r == level,
        s_saturated: s == level,
    })
}
