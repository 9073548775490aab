//! The five subcommands: load inputs, run the core computations, render.

use crate::files::{load_curve, load_group};
use crate::reports::{
    fraction, point_out, render_bound, render_density, render_divide, render_h1, render_scan,
    render_tower, BoundOut, DensityOut, DensityRow, DivideOut, H1Out, ScanOut, TowerOut,
};
use crate::{CliError, OutputFormat};
use arboreal_core::arboreal::analyze;
use arboreal_core::cohomology::{h1, h1_tower};
use arboreal_core::density::{fix_fraction, surjective_density, Image};
use arboreal_core::ecq::{
    compute_d, divide_point, is_torsion, scan_prime, sieve_primes, PointQ, PrimeOutcome,
};
use arboreal_core::sdgroup::{ClosedSubgroup, GroupKind};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

fn emit<T: Serialize>(
    out: &mut dyn Write,
    format: OutputFormat,
    record: &T,
    table: String,
) -> Result<(), CliError> {
    let text = match format {
        OutputFormat::Json => {
            let mut t = serde_json::to_string_pretty(record)
                .map_err(|e| CliError::Input(format!("serialization failed: {e}")))?;
            t.push('\n');
            t
        }
        OutputFormat::Table => table,
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(format!("write failed: {e}")))
}

/// Applies f to every item on a fixed number of worker threads, splitting
/// the slice into contiguous chunks so the merged order never depends on
/// the schedule.
fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let threads = threads.max(1).min(items.len().max(1));
    if threads <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let mut parts: Vec<Vec<R>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for slice in items.chunks(chunk) {
            let f = &f;
            handles.push(scope.spawn(move || slice.iter().map(f).collect::<Vec<R>>()));
        }
        for h in handles {
            parts.push(h.join().expect("worker thread panicked"));
        }
    });
    parts.into_iter().flatten().collect()
}

pub fn cmd_bound(
    group: &Path,
    d: u32,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let spec = load_group(group)?.to_spec()?;
    if spec.kind() != GroupKind::Linear {
        return Err(CliError::Input("bound requires a linear group file".into()));
    }
    let report = analyze(&spec, d)?;
    let rec = BoundOut::from(&report);
    emit(out, format, &rec, render_bound(&rec))
}

pub fn cmd_density(
    ell: u64,
    level: u32,
    image: Option<&Path>,
    threads: usize,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if level == 0 {
        return Err(CliError::Input("level must be at least 1".into()));
    }
    let closed;
    let (img, name, limit) = match image {
        None => (
            Image::Full { ell },
            "full",
            Some(surjective_density(ell)?),
        ),
        Some(path) => {
            let spec = load_group(path)?.to_spec()?;
            if spec.ctx().ell() != ell {
                return Err(CliError::Input(format!(
                    "group file is mod powers of {}, not {ell}",
                    spec.ctx().ell()
                )));
            }
            if spec.kind() != GroupKind::Affine {
                return Err(CliError::Input(
                    "density image must be an affine group file".into(),
                ));
            }
            closed = ClosedSubgroup::close(&spec)?;
            (Image::Affine(&closed), "affine", None)
        }
    };
    let levels: Vec<u32> = (1..=level).collect();
    let results = parallel_map(&levels, threads, |&n| fix_fraction(n, &img));
    let mut fractions = Vec::with_capacity(results.len());
    for res in results {
        fractions.push(res?);
    }
    for w in fractions.windows(2) {
        assert!(w[0] >= w[1], "fixing fractions must be nonincreasing");
    }
    let rec = DensityOut {
        ell,
        max_level: level,
        image: name.into(),
        rows: levels
            .iter()
            .zip(&fractions)
            .map(|(&n, f)| DensityRow {
                level: n,
                fraction: fraction(f),
            })
            .collect(),
        limit: limit.as_ref().map(fraction),
    };
    emit(out, format, &rec, render_density(&rec))
}

fn parse_tower(text: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Input(format!("tower must look like M1..M2, got '{text}'"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let m1: u32 = a.trim().parse().map_err(|_| bad())?;
    let m2: u32 = b.trim().parse().map_err(|_| bad())?;
    if m1 == 0 || m1 > m2 {
        return Err(bad());
    }
    Ok((m1, m2))
}

pub fn cmd_h1(
    group: &Path,
    module_level: u32,
    tower: Option<&str>,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let spec = load_group(group)?.to_spec()?;
    if spec.kind() != GroupKind::Linear {
        return Err(CliError::Input("h1 requires a linear group file".into()));
    }
    match tower {
        Some(text) => {
            let (m1, m2) = parse_tower(text)?;
            let rep = h1_tower(&spec, module_level, m1..=m2)?;
            let mut rec = TowerOut::from(&rep);
            rec.module_level = module_level;
            emit(out, format, &rec, render_tower(&rec))
        }
        None => {
            let closed = ClosedSubgroup::close(&spec)?;
            let res = h1(&closed, module_level)?;
            let rec = H1Out::from(&res);
            emit(out, format, &rec, render_h1(&rec))
        }
    }
}

pub fn cmd_scan(
    curve_path: &Path,
    ell: u64,
    limit: u64,
    threads: usize,
    csv: Option<&Path>,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (curve, alpha) = load_curve(curve_path)?.to_curve()?;
    let target = surjective_density(ell)?;
    if is_torsion(&curve, &alpha) {
        return Err(CliError::Input("point must be non-torsion".into()));
    }
    let primes = sieve_primes(limit);
    let outcomes = parallel_map(&primes, threads, |&p| scan_prime(&curve, &alpha, ell, p));
    let mut good = 0u64;
    let mut coprime = 0u64;
    let mut skipped = 0u64;
    for oc in &outcomes {
        match oc {
            PrimeOutcome::Good { coprime: c } => {
                good += 1;
                if *c {
                    coprime += 1;
                }
            }
            _ => skipped += 1,
        }
    }
    if good == 0 {
        return Err(CliError::Empty("no primes survived the scan filters".into()));
    }
    if let Some(path) = csv {
        let mut text = String::from("prime,good,coprime_order\n");
        for (p, oc) in primes.iter().zip(&outcomes) {
            let (g, c) = match oc {
                PrimeOutcome::Good { coprime } => (1, u8::from(*coprime)),
                _ => (0, 0),
            };
            text.push_str(&format!("{p},{g},{c}\n"));
        }
        std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let frac = BigRational::new(BigInt::from(coprime), BigInt::from(good));
    let rec = ScanOut {
        ell,
        limit,
        good,
        coprime,
        skipped,
        fraction: fraction(&frac),
        target: fraction(&target),
    };
    emit(out, format, &rec, render_scan(&rec))
}

pub fn cmd_divide(
    curve_path: &Path,
    ell: u64,
    depth: Option<u32>,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (curve, alpha) = load_curve(curve_path)?.to_curve()?;
    if is_torsion(&curve, &alpha) {
        return Err(CliError::Input("point must be non-torsion".into()));
    }
    let d = compute_d(&curve, &alpha, ell)?;
    let cap = depth.unwrap_or(u32::MAX);
    let mut levels: Vec<Vec<PointQ>> = vec![vec![alpha]];
    while (levels.len() as u32) <= cap {
        let mut next = Vec::new();
        for pt in levels.last().expect("levels starts nonempty") {
            next.extend(divide_point(&curve, pt, ell)?);
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    let rec = DivideOut {
        ell,
        d,
        strongly_indivisible: d == 0,
        levels: levels
            .iter()
            .map(|lv| lv.iter().map(point_out).collect())
            .collect(),
    };
    emit(out, format, &rec, render_divide(&rec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_parse_tower() {
        assert_eq!(parse_tower("1..3").unwrap(), (1, 3));
        assert_eq!(parse_tower("2..2").unwrap(), (2, 2));
        assert!(parse_tower("3..1").is_err()); // backwards
        assert!(parse_tower("0..2").is_err()); // level zero
        assert!(parse_tower("2").is_err());
        assert!(parse_tower("a..b").is_err());
    }

    #[test]
    fn test_parallel_map_matches_serial() {
        let items: Vec<u64> = (0..103).collect();
        let serial = parallel_map(&items, 1, |&x| x * x);
        for threads in [2, 3, 8, 200] {
            assert_eq!(parallel_map(&items, threads, |&x| x * x), serial);
        }
        assert!(parallel_map(&Vec::<u64>::new(), 4, |&x| x).is_empty());
    }
}
