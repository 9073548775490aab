//! Integration properties tying the rational and reduced group structures.

use arboreal_core::ecq::{
    density_scan, divide_point, reduce_mod_p, CurveQ, PointFp, PointQ,
};
use arboreal_core::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn e37() -> CurveQ {
    CurveQ::from_integers([0, 0, 1, -1, 0]).unwrap()
}

fn gen37() -> PointQ {
    PointQ::Affine(
        BigRational::from_integer(BigInt::from(0)),
        BigRational::from_integer(BigInt::from(0)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prop_reduction_is_homomorphic(
        k1 in 1u64..=10,
        k2 in 1u64..=10,
        pidx in 0usize..6,
    ) {
        let p = [3u64, 5, 7, 11, 13, 41][pidx];
        let e = e37();
        let g = gen37();
        let a = e.mul(k1, &g);
        let b = e.mul(k2, &g);
        let sum = e.add(&a, &b);
        let (cf, _) = reduce_mod_p(&e, &g, p).unwrap();
        let ra = e.reduce_point(&a, p);
        let rb = e.reduce_point(&b, p);
        let rs = e.reduce_point(&sum, p);
        if let (Ok(ra), Ok(rb), Ok(rs)) = (ra, rb, rs) {
            prop_assert_eq!(cf.add(&ra, &rb), rs);
        }
    }

    #[test]
    fn prop_divide_preimages_multiply_back(
        k in 1u64..=6,
        ell_idx in 0usize..2,
    ) {
        let ell = [2u64, 3][ell_idx];
        let e = e37();
        let alpha = e.mul(k, &gen37());
        for beta in divide_point(&e, &alpha, ell).unwrap() {
            prop_assert_eq!(e.mul(ell, &beta), alpha.clone());
            prop_assert!(e.contains(&beta));
        }
    }
}

#[test]
fn test_scan_is_deterministic() {
    let e = e37();
    let g = gen37();
    let a = density_scan(&e, &g, 2, 300).unwrap();
    let b = density_scan(&e, &g, 2, 300).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.good + a.skipped, 62);
}

#[test]
fn test_infinity_reduces_everywhere_good() {
    let e = e37();
    for p in [2u64, 3, 5, 41, 1009] {
        let (cf, pf) = reduce_mod_p(&e, &PointQ::Infinity, p).unwrap();
        assert_eq!(pf, PointFp::Infinity);
        assert!(cf.contains(&pf));
    }
    assert_eq!(
        reduce_mod_p(&e, &PointQ::Infinity, 37).unwrap_err(),
        Error::BadReduction { p: 37 }
    );
}
