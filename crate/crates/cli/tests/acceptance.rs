//! Nine go/no-go checks over the whole workspace, printed one line each;
//! the test fails at the end if any check failed.

use arboreal_core::arboreal::{
    compute_n_ell, compute_r, compute_s, kummer_orbit, theorem1_bound, BoundParams,
};
use arboreal_core::cohomology::h1;
use arboreal_core::density::{fix_fraction, surjective_density, Image};
use arboreal_core::ecq::{
    compute_d, density_scan, divide_point, divisibility_cross_check, reduce_mod_p, sieve_primes,
    CurveQ,
};
use arboreal_core::modring::{for_each_gl2, ModCtx, ModMat, ModVec};
use arboreal_core::sdgroup::{AffineElement, ClosedSubgroup, SubgroupSpec};
use arboreal_cli::commands::cmd_scan;
use arboreal_cli::reports::ScanOut;
use arboreal_cli::OutputFormat;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Signed;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

const BOUND_TIME_LIMIT: Duration = Duration::from_millis(1);
const DENSITY_TIME_LIMIT: Duration = Duration::from_secs(10);
const SCAN_TIME_LIMIT: Duration = Duration::from_secs(60);
/// f_4 at l = 2 must sit this close above the closed-form limit.
const DENSITY_GAP: (i64, i64) = (1, 50);
/// Allowed distance between the scanned fraction and the limit.
const SCAN_TOLERANCE: (i64, i64) = (3, 100);
const CORPUS_PER_CELL: usize = 50;
const DISPLAY_SAMPLES: usize = 10_000;
const SMALL_GROUP_CAP: u64 = 8;
/// Literal function enumeration runs when l^(2|G|) stays under this.
const LITERAL_CAP: u128 = 1 << 16;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rand_mat(rng: &mut ChaCha8Rng, ctx: ModCtx) -> ModMat {
    let m = ctx.modulus();
    loop {
        let g = ModMat::new(
            ctx,
            [
                [rng.next_u64() % m, rng.next_u64() % m],
                [rng.next_u64() % m, rng.next_u64() % m],
            ],
        );
        if g.is_invertible() {
            return g;
        }
    }
}

fn rand_subgroup(rng: &mut ChaCha8Rng, ctx: ModCtx) -> SubgroupSpec {
    let count = 1 + rng.next_u32() as usize % 3;
    let gens = (0..count).map(|_| rand_mat(rng, ctx)).collect();
    SubgroupSpec::linear(ctx, gens).expect("invertible generators")
}

fn criterion_1() -> Result<String, String> {
    let cases = [
        (0u32, 1u32, 0u32, 1u64, 4u64),
        (0, 2, 0, 4, 64),
        (0, 4, 1, 96, 49152),
        (0, 3, 4, 96, 98304),
    ];
    for (d, r, s, index, expect) in cases {
        let start = Instant::now();
        let got = theorem1_bound(&BoundParams {
            ell: 2,
            d,
            r,
            s,
            index,
        });
        let used = start.elapsed();
        if got != BigUint::from(expect) {
            return Err(format!(
                "bound for d={d} r={r} s={s} index={index}: got {got}, want {expect}"
            ));
        }
        if used > BOUND_TIME_LIMIT {
            return Err(format!("bound {expect} took {used:?}, limit {BOUND_TIME_LIMIT:?}"));
        }
    }
    Ok("index bounds 4, 64, 49152, 98304 exact, each under 1 ms".into())
}

fn criterion_2() -> Result<String, String> {
    let pinned = [(2u64, 11, 21), (3, 139, 208), (5, 2381, 2976)];
    for (ell, num, den) in pinned {
        let got = surjective_density(ell).map_err(|e| e.to_string())?;
        if got != rat(num, den) {
            return Err(format!("density limit at l={ell}: got {got}, want {num}/{den}"));
        }
        let l = i64::try_from(ell).unwrap();
        let (l2, l3) = (l * l, l * l * l);
        let (l4, l5) = (l3 * l, l3 * l2);
        let direct = rat(l5 - l4 - l3 + l + 1, l5 - l3 - l2 + 1);
        if got != direct {
            return Err(format!("density limit at l={ell} disagrees with the direct formula"));
        }
    }
    Ok("closed-form limits 11/21, 139/208, 2381/2976 exact for l = 2, 3, 5".into())
}

/// f_1 by raw triple enumeration: every (v, g) pair is solvable iff some w
/// satisfies w(g - I) = -v, tested by trying every w.
fn brute_affine_f1(ell: u64) -> BigRational {
    let ctx = ModCtx::new(ell, 1).unwrap();
    let ident = ModMat::identity(ctx);
    let m = ctx.modulus();
    let mut hits = 0u64;
    let mut total = 0u64;
    for_each_gl2(ctx, |g| {
        let shifted = g.sub(&ident);
        for v0 in 0..m {
            for v1 in 0..m {
                let target = ModVec::new(ctx, [v0, v1]).neg();
                total += 1;
                let found = (0..m).any(|w0| {
                    (0..m).any(|w1| ModVec::new(ctx, [w0, w1]).apply(&shifted) == target)
                });
                if found {
                    hits += 1;
                }
            }
        }
    });
    rat(hits as i64, total as i64)
}

fn criterion_3() -> Result<String, String> {
    let start = Instant::now();
    for (ell, num, den) in [(2u64, 5, 8), (3, 19, 27)] {
        let f1 = fix_fraction(1, &Image::Full { ell }).map_err(|e| e.to_string())?;
        if f1 != rat(num, den) {
            return Err(format!("f_1 at l={ell}: got {f1}, want {num}/{den}"));
        }
        if brute_affine_f1(ell) != f1 {
            return Err(format!("f_1 at l={ell} disagrees with brute-force enumeration"));
        }
    }
    let mut fs = Vec::new();
    for n in 1..=4 {
        fs.push(fix_fraction(n, &Image::Full { ell: 2 }).map_err(|e| e.to_string())?);
    }
    if !fs.windows(2).all(|w| w[0] >= w[1]) {
        return Err("f_1..f_4 at l=2 not nonincreasing".into());
    }
    let gap = &fs[3] - rat(11, 21);
    if gap.is_negative() || gap >= rat(DENSITY_GAP.0, DENSITY_GAP.1) {
        return Err(format!("f_4 - 11/21 = {gap}, outside [0, 1/50)"));
    }
    let used = start.elapsed();
    if used > DENSITY_TIME_LIMIT {
        return Err(format!("densities took {used:?}, limit {DENSITY_TIME_LIMIT:?}"));
    }
    Ok(format!(
        "f_1 = 5/8 and 19/27 confirmed by enumeration; f_4 - 11/21 = {gap}; {used:?}"
    ))
}

fn field_inv(a: u64, ell: u64) -> u64 {
    let mut acc = 1u64;
    for _ in 0..ell - 2 {
        acc = acc * a % ell;
    }
    acc
}

fn rank_mod_ell(mut rows: Vec<Vec<u64>>, ell: u64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][col] % ell != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = field_inv(rows[rank][col] % ell, ell);
        for c in col..cols {
            rows[rank][c] = rows[rank][c] * inv % ell;
        }
        for i in 0..rows.len() {
            if i != rank && rows[i][col] % ell != 0 {
                let f = rows[i][col] % ell;
                for c in col..cols {
                    rows[i][c] = (rows[i][c] + (ell - f) * rows[rank][c]) % ell;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// |H1| by solving the cocycle identity for the value at every element:
/// 2|G| unknowns over F_l, one pair of equations per element pair, then
/// divided by the number of distinct coboundaries.
fn oracle_h1_order(group: &ClosedSubgroup) -> Result<u64, String> {
    let ctx = group.ctx();
    let ell = ctx.ell();
    assert_eq!(ctx.level(), 1, "oracle works over the residue field");
    let els: Vec<ModMat> = group.elements().iter().map(|e| e.g).collect();
    let k = els.len();
    let pos: HashMap<ModMat, usize> = els.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let unknowns = 2 * k;
    let mut rows = Vec::with_capacity(2 * k * k);
    for i in 0..k {
        for j in 0..k {
            let t = pos[&els[i].mul(&els[j])];
            for c in 0..2 {
                let mut row = vec![0u64; unknowns];
                row[2 * t + c] = (row[2 * t + c] + 1) % ell;
                for d in 0..2 {
                    let coef = (ell - els[j].e[d][c] % ell) % ell;
                    row[2 * i + d] = (row[2 * i + d] + coef) % ell;
                }
                row[2 * j + c] = (row[2 * j + c] + ell - 1) % ell;
                rows.push(row);
            }
        }
    }
    let nullity = unknowns - rank_mod_ell(rows, ell);
    let z1 = ell.pow(nullity as u32);
    let mut coboundaries: HashSet<Vec<u64>> = HashSet::new();
    for v0 in 0..ell {
        for v1 in 0..ell {
            let v = ModVec::new(ctx, [v0, v1]);
            let cob: Vec<u64> = els
                .iter()
                .flat_map(|g| {
                    let w = v.apply(g).sub(&v);
                    [w.e[0], w.e[1]]
                })
                .collect();
            coboundaries.insert(cob);
        }
    }
    let b1 = coboundaries.len() as u64;
    if z1 % b1 != 0 {
        return Err(format!("|Z1| = {z1} not divisible by |B1| = {b1}"));
    }
    Ok(z1 / b1)
}

/// |Z1| again, by checking the cocycle identity on every function G -> M.
fn literal_cocycle_count(group: &ClosedSubgroup) -> u64 {
    let ctx = group.ctx();
    let ell = ctx.ell();
    let els: Vec<ModMat> = group.elements().iter().map(|e| e.g).collect();
    let k = els.len();
    let pos: HashMap<ModMat, usize> = els.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let total = (ell as u128).pow(2 * k as u32);
    let mut digits = vec![0u64; 2 * k];
    let mut count = 0u64;
    for step in 0..total {
        let value = |i: usize| ModVec::new(ctx, [digits[2 * i], digits[2 * i + 1]]);
        let ok = (0..k).all(|i| {
            (0..k).all(|j| {
                let t = pos[&els[i].mul(&els[j])];
                value(i).apply(&els[j]).add(&value(j)) == value(t)
            })
        });
        if ok {
            count += 1;
        }
        if step + 1 < total {
            for d in digits.iter_mut() {
                *d += 1;
                if *d < ell {
                    break;
                }
                *d = 0;
            }
        }
    }
    count
}

/// Every subgroup of GL2(F_l) of order at most cap, as generating sets,
/// found by closing single elements and extending until stable.
fn all_small_subgroups(ell: u64, cap: u64) -> Vec<Vec<ModMat>> {
    let ctx = ModCtx::new(ell, 1).unwrap();
    let mut ambient = Vec::new();
    for_each_gl2(ctx, |g| ambient.push(*g));
    let close_key = |gens: &Vec<ModMat>| -> Option<Vec<u128>> {
        let spec = SubgroupSpec::linear(ctx, gens.clone()).unwrap();
        let group = ClosedSubgroup::close(&spec).unwrap();
        if group.order() > cap {
            return None;
        }
        let mut key: Vec<u128> = group.elements().iter().map(AffineElement::pack).collect();
        key.sort_unstable();
        Some(key)
    };
    let mut seen: HashMap<Vec<u128>, Vec<ModMat>> = HashMap::new();
    let mut work: Vec<Vec<ModMat>> = ambient.iter().map(|g| vec![*g]).collect();
    while let Some(gens) = work.pop() {
        let Some(key) = close_key(&gens) else { continue };
        if seen.contains_key(&key) {
            continue;
        }
        for h in &ambient {
            let mut bigger = gens.clone();
            bigger.push(*h);
            work.push(bigger);
        }
        seen.insert(key, gens);
    }
    seen.into_values().collect()
}

fn criterion_4() -> Result<String, String> {
    let mut random_checked = 0usize;
    for (ell, m) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2)] {
        let ctx = ModCtx::new(ell, m).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(0xace0 + ell * 100 + u64::from(m));
        for _ in 0..CORPUS_PER_CELL {
            let spec = rand_subgroup(&mut rng, ctx);
            let group = ClosedSubgroup::close(&spec).map_err(|e| e.to_string())?;
            let r = compute_r(&group);
            let res = h1(&group, m).map_err(|e| e.to_string())?;
            if res.sah_bound != ell.pow(r) {
                return Err(format!("sah bound {} is not l^r = {}", res.sah_bound, ell.pow(r)));
            }
            if res.sah_bound % res.exponent != 0 {
                return Err(format!(
                    "exponent {} does not divide l^r = {} (l={ell}, m={m})",
                    res.exponent, res.sah_bound
                ));
            }
            random_checked += 1;
        }
    }
    if random_checked < 200 {
        return Err(format!("only {random_checked} random subgroups checked"));
    }
    let mut surveyed = 0usize;
    let mut enumerated = 0usize;
    for ell in [2u64, 3] {
        for gens in all_small_subgroups(ell, SMALL_GROUP_CAP) {
            let ctx = ModCtx::new(ell, 1).unwrap();
            let spec = SubgroupSpec::linear(ctx, gens).unwrap();
            let group = ClosedSubgroup::close(&spec).unwrap();
            let res = h1(&group, 1).map_err(|e| e.to_string())?;
            let solver: u64 = res.factors.iter().product();
            let oracle = oracle_h1_order(&group)?;
            if solver != oracle {
                return Err(format!(
                    "|H1| mismatch on order-{} subgroup of GL2(F_{ell}): solver {solver}, oracle {oracle}",
                    group.order()
                ));
            }
            let states = (ell as u128).pow(2 * group.order() as u32);
            if states <= LITERAL_CAP {
                let literal_z1 = literal_cocycle_count(&group);
                let mut set: HashSet<Vec<u64>> = HashSet::new();
                for v0 in 0..ell {
                    for v1 in 0..ell {
                        let v = ModVec::new(ctx, [v0, v1]);
                        let cob: Vec<u64> = group
                            .elements()
                            .iter()
                            .flat_map(|e| {
                                let w = v.apply(&e.g).sub(&v);
                                [w.e[0], w.e[1]]
                            })
                            .collect();
                        set.insert(cob);
                    }
                }
                let b1 = set.len() as u64;
                if literal_z1 != oracle * b1 {
                    return Err(format!(
                        "literal |Z1| = {literal_z1}, but |H1| * |B1| = {}",
                        oracle * b1
                    ));
                }
                enumerated += 1;
            }
            surveyed += 1;
        }
    }
    Ok(format!(
        "{random_checked} random subgroups obey the Sah bound; solver matched the cocycle oracle on {surveyed} small subgroups ({enumerated} re-checked by full enumeration)"
    ))
}

fn criterion_5() -> Result<String, String> {
    let mut groups = 0usize;
    let mut vectors = 0u64;
    for (ell, m, count) in [
        (2u64, 1u32, 40usize),
        (2, 2, 40),
        (2, 3, 30),
        (3, 1, 40),
        (3, 2, 40),
        (3, 3, 12),
    ] {
        let ctx = ModCtx::new(ell, m).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + ell * 1000 + u64::from(m));
        for _ in 0..count {
            let spec = rand_subgroup(&mut rng, ctx);
            let group = ClosedSubgroup::close(&spec).map_err(|e| e.to_string())?;
            let r = compute_r(&group);
            let s = compute_s(&group);
            let n = compute_n_ell(&group);
            if r > n || s > n {
                return Err(format!("r={r}, s={s} exceed n_l={n} at l={ell}, m={m}"));
            }
            let modulus = ctx.modulus();
            for a in 0..modulus {
                for b in 0..modulus {
                    if a % ell == 0 && b % ell == 0 {
                        continue;
                    }
                    let p = ModVec::new(ctx, [a, b]);
                    let orbit = kummer_orbit(&p, &group).map_err(|e| e.to_string())?;
                    if orbit.k_prime > s {
                        return Err(format!(
                            "k' = {} exceeds s = {s} at l={ell}, m={m}, vector ({a}, {b})",
                            orbit.k_prime
                        ));
                    }
                    vectors += 1;
                }
            }
            groups += 1;
        }
    }
    if groups < 200 {
        return Err(format!("only {groups} corpus subgroups checked"));
    }
    Ok(format!(
        "{groups} subgroups, {vectors} primitive vectors: k' <= s and r, s <= n_l throughout"
    ))
}

fn criterion_6() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd15b);
    for sample in 0..DISPLAY_SAMPLES {
        let m = 1 + rng.next_u32() % 3;
        let ctx = ModCtx::new(2, m).map_err(|e| e.to_string())?;
        let modulus = ctx.modulus();
        let y = ModVec::new(ctx, [rng.next_u64() % modulus, rng.next_u64() % modulus]);
        let g1 = rand_mat(&mut rng, ctx);
        let g2 = rand_mat(&mut rng, ctx);
        let g12 = g1.inverse().map_err(|e| e.to_string())?.mul(&g2);
        let x = y.apply(&g12).sub(&y);
        let lhs = AffineElement::new(y, g1)
            .inverse()
            .and_then(|inv| inv.compose(&AffineElement::new(y, g2)))
            .and_then(|acc| acc.compose(&AffineElement::new(x, ModMat::identity(ctx))))
            .map_err(|e| e.to_string())?;
        let rhs = AffineElement::new(ModVec::zero(ctx), g12);
        if lhs != rhs {
            return Err(format!("display identity failed on sample {sample} at level {m}"));
        }
    }
    Ok(format!(
        "display identity held for {DISPLAY_SAMPLES} random triples at l = 2, levels 1..3"
    ))
}

fn criterion_7() -> Result<String, String> {
    let curve = CurveQ::from_integers([0, 0, 1, -1, 0]).map_err(|e| e.to_string())?;
    let alpha = curve.point(rat(0, 1), rat(0, 1)).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let res = density_scan(&curve, &alpha, 2, 100_000).map_err(|e| e.to_string())?;
    let used = start.elapsed();
    if used > SCAN_TIME_LIMIT {
        return Err(format!("scan took {used:?}, limit {SCAN_TIME_LIMIT:?}"));
    }
    let gap = (&res.fraction - rat(11, 21)).abs();
    if gap >= rat(SCAN_TOLERANCE.0, SCAN_TOLERANCE.1) {
        return Err(format!(
            "fraction {} is {gap} from 11/21, tolerance 3/100",
            res.fraction
        ));
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("curve.json");
    std::fs::write(&path, r#"{ "a": [0, 0, 1, -1, 0], "point": [0, 0] }"#)
        .map_err(|e| e.to_string())?;
    let mut one = Vec::new();
    cmd_scan(&path, 2, 100_000, 1, None, OutputFormat::Json, &mut one)
        .map_err(|e| e.to_string())?;
    let mut eight = Vec::new();
    cmd_scan(&path, 2, 100_000, 8, None, OutputFormat::Json, &mut eight)
        .map_err(|e| e.to_string())?;
    if one != eight {
        return Err("scan output differs between 1 and 8 threads".into());
    }
    let parsed: ScanOut =
        serde_json::from_slice(&one).map_err(|e| format!("scan json: {e}"))?;
    if parsed.good != res.good || parsed.coprime != res.coprime {
        return Err("threaded scan tallies disagree with the serial scan".into());
    }
    Ok(format!(
        "fraction {} within {}/{} of 11/21 over {} primes in {used:?}; 8-thread run byte-identical",
        res.fraction, SCAN_TOLERANCE.0, SCAN_TOLERANCE.1, res.good
    ))
}

fn criterion_8() -> Result<String, String> {
    let x2a = CurveQ::from_integers([0, 0, 0, -343, 2401]).map_err(|e| e.to_string())?;
    let alpha = x2a.point(rat(0, 1), rat(-49, 1)).map_err(|e| e.to_string())?;
    let preimages = divide_point(&x2a, &alpha, 2).map_err(|e| e.to_string())?;
    if !preimages.is_empty() {
        return Err(format!("(0, -49) unexpectedly halves into {} points", preimages.len()));
    }
    if compute_d(&x2a, &alpha, 2).map_err(|e| e.to_string())? != 0 {
        return Err("d at (0, -49) is not 0".into());
    }
    let e37 = CurveQ::from_integers([0, 0, 1, -1, 0]).map_err(|e| e.to_string())?;
    let p = e37.point(rat(0, 1), rat(0, 1)).map_err(|e| e.to_string())?;
    let mut cases: Vec<(u64, u64, u32)> = Vec::new();
    for j in [1u64, 3, 5] {
        for k in 1..=3u32 {
            cases.push((2, j, k));
        }
    }
    cases.push((3, 1, 1));
    for (ell, j, k) in &cases {
        let gamma = e37.mul(*j, &p);
        let alpha = e37.mul(ell.pow(*k), &gamma);
        let d = compute_d(&e37, &alpha, *ell).map_err(|e| e.to_string())?;
        if d != *k {
            return Err(format!("d({ell}^{k} * {j}P) = {d}, want {k}"));
        }
    }
    Ok(format!(
        "empty division tree and d = 0 at (0, -49); d(l^k g) = k on {} built instances",
        cases.len()
    ))
}

fn criterion_9() -> Result<String, String> {
    let curves = [
        (CurveQ::from_integers([0, 0, 1, -1, 0]).unwrap(), rat(0, 1), rat(0, 1)),
        (
            CurveQ::from_integers([0, 0, 0, -343, 2401]).unwrap(),
            rat(0, 1),
            rat(-49, 1),
        ),
    ];
    let mut checked = 0usize;
    for (curve, x, y) in &curves {
        let alpha = curve.point(x.clone(), y.clone()).map_err(|e| e.to_string())?;
        for p in sieve_primes(999) {
            let Ok((cf, pf)) = reduce_mod_p(curve, &alpha, p) else {
                continue;
            };
            for ell in [2u64, 3] {
                if !divisibility_cross_check(&cf, &pf, ell) {
                    return Err(format!("order criterion disagrees at p = {p}, l = {ell}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!(
        "order criterion equals the enumeration check at {checked} (prime, l) pairs below 1000"
    ))
}

#[test]
fn acceptance() {
    let checks: [(u32, fn() -> Result<String, String>); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failures = Vec::new();
    for (id, run) in checks {
        match run() {
            Ok(detail) => println!("criterion {id}: PASS - {detail}"),
            Err(reason) => {
                println!("criterion {id}: FAIL - {reason}");
                failures.push(id);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

#[test]
fn test_oracle_self_check() {
    // Full GL2(F_2) acting on (F_2)^2 has trivial H1; the scalar group mod 4
    // checked elsewhere is out of the oracle's level-1 scope.
    let ctx = ModCtx::new(2, 1).unwrap();
    let gens = vec![
        ModMat::new(ctx, [[1, 1], [0, 1]]),
        ModMat::new(ctx, [[0, 1], [1, 0]]),
    ];
    let group = ClosedSubgroup::close(&SubgroupSpec::linear(ctx, gens).unwrap()).unwrap();
    assert_eq!(group.order(), 6);
    assert_eq!(oracle_h1_order(&group).unwrap(), 1); // H1(GL2(F_2), M) = 0
    assert_eq!(literal_cocycle_count(&group), 4); // coboundaries only
}
