//! Fraction of elements of an affine image fixing an l^n-division point,
//! computed exactly. An element (v, g) fixes some point at level n exactly
//! when w (g - I) = -v has a solution, so for the full image the count per
//! matrix is |im(g - I)| and the matrix loop is streamed, never
//! materialized. Everything here is an exact rational; no floating point.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::modring::{diagonalize, for_each_gl2, gl2_order, solve_affine, ModCtx, ModMat};
use crate::sdgroup::{ClosedSubgroup, GroupKind};
use crate::{Error, Result, AMBIENT_BUDGET};

/// Known odd-order density for the index-4 2-adic image studied alongside
/// the surjective case. Reproducing it here requires that image's explicit
/// generators, supplied as a user group file; the constant is recorded for
/// comparison output only.
pub const INDEX_FOUR_ODD_ORDER_DENSITY: (u64, u64) = (179, 336);

/// The image whose fixing fraction is being measured.
pub enum Image<'a> {
    /// The full group (Z/l^n)^2 acting under all of GL2(Z/l^n).
    Full { ell: u64 },
    /// An explicit affine subgroup; levels up to its own level are allowed.
    Affine(&'a ClosedSubgroup),
}

/// Exact fixing fractions over a range of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FixFractionReport {
    pub ell: u64,
    pub levels: Vec<u32>,
    pub fractions: Vec<BigRational>,
    pub image: ImageDesc,
    pub monotone: bool,
    /// f_n minus the closed-form limit, present only for the full image.
    pub closed_form_gap: Option<Vec<BigRational>>,
}

/// What the report was computed over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageDesc {
    Full,
    Affine { level: u32, order: u64 },
}

fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// |{(v, g) in H : -v in im(g - I)}| / |H| at level n, exactly.
pub fn fix_fraction(n: u32, image: &Image) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::ModuleLevelZero);
    }
    match image {
        Image::Full { ell } => {
            let ctx = ModCtx::new(*ell, n)?;
            let count = gl2_order(&ctx);
            if count > AMBIENT_BUDGET {
                return Err(Error::BudgetExceeded {
                    ambient: count,
                    budget: AMBIENT_BUDGET,
                });
            }
            let ident = ModMat::identity(ctx);
            let mut sum: u128 = 0;
            for_each_gl2(ctx, |g| {
                let exps = diagonalize(&g.sub(&ident)).exps;
                sum += u128::from(ctx.pow_ell(n - exps[0]) * ctx.pow_ell(n - exps[1]));
            });
            let module = u128::from(ctx.modulus()) * u128::from(ctx.modulus());
            Ok(ratio(sum, count * module))
        }
        Image::Affine(group) => {
            assert_eq!(group.kind(), GroupKind::Affine);
            let m = group.ctx().level();
            if n > m {
                return Err(Error::ModuleLevelTooDeep {
                    module_level: n,
                    group_level: m,
                });
            }
            let ctx = ModCtx::new(group.ctx().ell(), n)?;
            let ident = ModMat::identity(ctx);
            let count = group
                .elements()
                .iter()
                .filter(|e| {
                    let v = e.v.reduce_to(ctx);
                    let g = e.g.reduce_to(ctx);
                    solve_affine(&v, &g.sub(&ident)).is_some()
                })
                .count();
            Ok(ratio(count as u128, u128::from(group.order())))
        }
    }
}

/// (l^5 - l^4 - l^3 + l + 1) / (l^5 - l^3 - l^2 + 1), the limit fraction
/// when the image is all of (Z/l^n)^2 semidirect GL2 at every level.
pub fn surjective_density(ell: u64) -> Result<BigRational> {
    ModCtx::new(ell, 1)?;
    let l = BigInt::from(ell);
    let l2 = &l * &l;
    let l3 = &l2 * &l;
    let l4 = &l3 * &l;
    let l5 = &l4 * &l;
    let num = &l5 - &l4 - &l3 + &l + BigInt::from(1);
    let den = &l5 - &l3 - &l2 + BigInt::from(1);
    Ok(BigRational::new(num, den))
}

/// Tabulates f_1 .. f_{n_max}, checks monotonicity, and measures the gap to
/// the closed form when the image is full.
pub fn density_report(image: &Image, n_max: u32) -> Result<FixFractionReport> {
    if n_max == 0 {
        return Err(Error::ModuleLevelZero);
    }
    let (ell, desc) = match image {
        Image::Full { ell } => (*ell, ImageDesc::Full),
        Image::Affine(g) => (
            g.ctx().ell(),
            ImageDesc::Affine {
                level: g.ctx().level(),
                order: g.order(),
            },
        ),
    };
    let levels: Vec<u32> = (1..=n_max).collect();
    let mut fractions = Vec::with_capacity(levels.len());
    for &n in &levels {
        fractions.push(fix_fraction(n, image)?);
    }
    for w in fractions.windows(2) {
        assert!(w[0] >= w[1], "fixing events are nested; f_n must not grow");
    }
    let closed_form_gap = match image {
        Image::Full { .. } => {
            let limit = surjective_density(ell)?;
            let gaps: Vec<BigRational> = fractions.iter().map(|f| f - &limit).collect();
            for g in &gaps {
                assert!(!g.is_negative(), "finite level must over-approximate the limit");
            }
            Some(gaps)
        }
        Image::Affine(_) => None,
    };
    Ok(FixFractionReport {
        ell,
        levels,
        fractions,
        image: desc,
        monotone: true,
        closed_form_gap,
    })
}

impl FixFractionReport {
    /// Convenience: the last (deepest) fraction.
    pub fn deepest(&self) -> &BigRational {
        self.fractions.last().expect("reports hold at least one level")
    }
}
