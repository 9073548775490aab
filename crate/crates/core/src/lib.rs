//! Exact arithmetic for Galois images acting on prime-power division points.
//!
//! Everything here works at a finite level m over Z/l^m for a prime l. A
//! subgroup given at level m stands for the full preimage of its closure in
//! the l-adic group, which makes the invariants computed by [`arboreal`]
//! decidable: the scalar depth r, the stable cyclic level s, the smallest
//! congruence level n_l, and the index bound l^(2d+2r+s) * index. Supporting
//! modules provide 2x2 linear algebra over Z/l^m ([`modring`]), semidirect
//! product groups and their closures ([`sdgroup`]), first cohomology
//! ([`cohomology`]), fixed-point densities ([`density`]), and elliptic curve
//! arithmetic over Q and F_p ([`ecq`]).
//!
//! No floating point is used anywhere; fractions are exact rationals.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arboreal;
pub mod cohomology;
pub mod density;
pub mod ecq;
pub mod modring;
pub mod sdgroup;

use core::fmt;

/// Number of group elements a closure may materialize.
pub const AMBIENT_BUDGET: u128 = 1 << 30;

/// Largest group order the cohomology solver accepts.
pub const H1_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// The modulus base is not prime.
    NotPrime(u64),
    /// Requested level is zero or exceeds the overflow-safe cap for this prime.
    LevelOutOfRange { ell: u64, level: u32, max: u32 },
    /// Two operands live over different moduli.
    CtxMismatch,
    /// The zero vector has no primitive part.
    ZeroVector,
    /// A primitive vector was required.
    NotPrimitive,
    /// reduce_level can only lower the level.
    LevelIncrease { from: u32, to: u32 },
    /// The ambient group is too large to enumerate.
    BudgetExceeded { ambient: u128, budget: u128 },
    /// The closed group is too large for the cohomology solver.
    GroupTooLarge { order: u64, budget: u64 },
    /// Cohomology module level must be positive.
    ModuleLevelZero,
    /// Module level exceeds the group level, so the action is undefined.
    ModuleLevelTooDeep { module_level: u32, group_level: u32 },
    /// A generator list was empty; identity-only groups use the identity generator.
    EmptyGenerators,
    /// A generator matrix is not invertible mod l.
    NotInvertible,
    /// The curve equation is singular (discriminant zero).
    SingularCurve,
    /// The curve has bad reduction at this prime.
    BadReduction { p: u64 },
    /// A coefficient or coordinate denominator vanishes mod p.
    DenominatorDivisible { p: u64 },
    /// The point does not satisfy the curve equation.
    PointNotOnCurve,
    /// The base point is torsion where an infinite-order point is required.
    TorsionPoint,
    /// No primes survived the scan filters.
    EmptyScan,
    /// Point division is implemented for l in {2, 3} only.
    EllUnsupported { ell: u64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPrime(n) => write!(f, "{n} is not prime"),
            Error::LevelOutOfRange { ell, level, max } => {
                write!(f, "level {level} out of range for l={ell} (1..={max})")
            }
            Error::CtxMismatch => write!(f, "operands live over different moduli"),
            Error::ZeroVector => write!(f, "zero vector has no primitive part"),
            Error::NotPrimitive => write!(f, "vector is not primitive"),
            Error::LevelIncrease { from, to } => {
                write!(f, "cannot reduce level {from} to higher level {to}")
            }
            Error::BudgetExceeded { ambient, budget } => {
                write!(f, "ambient order {ambient} exceeds budget {budget}")
            }
            Error::GroupTooLarge { order, budget } => {
                write!(f, "group order {order} exceeds solver budget {budget}")
            }
            Error::ModuleLevelZero => write!(f, "module level must be positive"),
            Error::ModuleLevelTooDeep {
                module_level,
                group_level,
            } => write!(
                f,
                "module level {module_level} exceeds group level {group_level}"
            ),
            Error::EmptyGenerators => write!(
                f,
                "generator list is empty; use the identity generator for the trivial group"
            ),
            Error::NotInvertible => write!(f, "matrix is not invertible mod l"),
            Error::SingularCurve => write!(f, "curve is singular"),
            Error::BadReduction { p } => write!(f, "bad reduction at {p}"),
            Error::DenominatorDivisible { p } => {
                write!(f, "denominator divisible by {p}")
            }
            Error::PointNotOnCurve => write!(f, "point is not on the curve"),
            Error::TorsionPoint => write!(f, "point is torsion"),
            Error::EmptyScan => write!(f, "no primes survived the scan filters"),
            Error::EllUnsupported { ell } => {
                write!(f, "division by l={ell} not supported (only 2 and 3)")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
