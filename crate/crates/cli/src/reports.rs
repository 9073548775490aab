//! Output records for every subcommand, their table renderings, and the
//! JSON encodings that re-parse to identical records.

use arboreal_core::arboreal::BoundReport;
use arboreal_core::cohomology::{H1Result, TowerReport};
use arboreal_core::ecq::PointQ;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Exact rational with a decimal approximation alongside; the exact field
/// is the one consumers should read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub exact: String,
    pub approx: f64,
}

pub fn fraction(r: &BigRational) -> Fraction {
    Fraction {
        exact: format!("{}/{}", r.numer(), r.denom()),
        approx: r.to_f64().unwrap_or(f64::NAN),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundOut {
    pub ell: u64,
    pub level: u32,
    pub d: u32,
    pub r: u32,
    pub s: u32,
    pub n_ell: u32,
    pub index: u64,
    pub bound: String,
    pub r_saturated: bool,
    pub s_saturated: bool,
}

impl From<&BoundReport> for BoundOut {
    fn from(rep: &BoundReport) -> BoundOut {
        BoundOut {
            ell: rep.ell,
            level: rep.level,
            d: rep.d,
            r: rep.r,
            s: rep.s,
            n_ell: rep.n_ell,
            index: rep.index,
            bound: rep.bound.to_string(),
            r_saturated: rep.r_saturated,
            s_saturated: rep.s_saturated,
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn render_bound(o: &BoundOut) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "ell:          {}", o.ell);
    let _ = writeln!(s, "level:        {}", o.level);
    let _ = writeln!(s, "d:            {}", o.d);
    let _ = writeln!(s, "r:            {}", o.r);
    let _ = writeln!(s, "s:            {}", o.s);
    let _ = writeln!(s, "n_ell:        {}", o.n_ell);
    let _ = writeln!(s, "index:        {}", o.index);
    let _ = writeln!(s, "bound:        {}", o.bound);
    let _ = writeln!(s, "r saturated:  {}", yes_no(o.r_saturated));
    let _ = writeln!(s, "s saturated:  {}", yes_no(o.s_saturated));
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub level: u32,
    pub fraction: Fraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOut {
    pub ell: u64,
    pub max_level: u32,
    /// "full" or "affine"; affine images come from a group file.
    pub image: String,
    pub rows: Vec<DensityRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Fraction>,
}

pub fn render_density(o: &DensityOut) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "ell:    {}", o.ell);
    let _ = writeln!(s, "image:  {}", o.image);
    for row in &o.rows {
        let _ = writeln!(
            s,
            "level {}: {} ~ {:.6}",
            row.level, row.fraction.exact, row.fraction.approx
        );
    }
    if let Some(limit) = &o.limit {
        let _ = writeln!(s, "limit:  {} ~ {:.6}", limit.exact, limit.approx);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct H1Out {
    pub factors: Vec<u64>,
    pub exponent: u64,
    pub sah_bound: u64,
    pub structure: String,
}

pub fn h1_structure(factors: &[u64]) -> String {
    if factors.is_empty() {
        return "trivial".into();
    }
    factors
        .iter()
        .map(|f| format!("Z/{f}"))
        .collect::<Vec<_>>()
        .join(" x ")
}

impl From<&H1Result> for H1Out {
    fn from(res: &H1Result) -> H1Out {
        H1Out {
            factors: res.factors.clone(),
            exponent: res.exponent,
            sah_bound: res.sah_bound,
            structure: h1_structure(&res.factors),
        }
    }
}

pub fn render_h1(o: &H1Out) -> String {
    format!(
        "H1: {}, exponent {}, Sah bound {}\n",
        o.structure, o.exponent, o.sah_bound
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerRow {
    pub level: u32,
    pub h1: H1Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerOut {
    pub module_level: u32,
    pub levels: Vec<TowerRow>,
    pub constant: bool,
}

impl From<&TowerReport> for TowerOut {
    fn from(rep: &TowerReport) -> TowerOut {
        TowerOut {
            module_level: 0,
            levels: rep
                .levels
                .iter()
                .map(|(m, res)| TowerRow {
                    level: *m,
                    h1: H1Out::from(res),
                })
                .collect(),
            constant: rep.constant,
        }
    }
}

pub fn render_tower(o: &TowerOut) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "module level: {}", o.module_level);
    for row in &o.levels {
        let _ = writeln!(
            s,
            "level {}: {}, exponent {}, Sah bound {}",
            row.level, row.h1.structure, row.h1.exponent, row.h1.sah_bound
        );
    }
    let _ = writeln!(s, "constant across levels: {}", yes_no(o.constant));
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOut {
    pub ell: u64,
    pub limit: u64,
    pub good: u64,
    pub coprime: u64,
    pub skipped: u64,
    pub fraction: Fraction,
    pub target: Fraction,
}

pub fn render_scan(o: &ScanOut) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "ell:            {}", o.ell);
    let _ = writeln!(s, "primes up to:   {}", o.limit);
    let _ = writeln!(s, "good:           {}", o.good);
    let _ = writeln!(s, "skipped:        {}", o.skipped);
    let _ = writeln!(s, "coprime order:  {}", o.coprime);
    let _ = writeln!(s, "fraction:       {} ~ {:.6}", o.fraction.exact, o.fraction.approx);
    let _ = writeln!(s, "target:         {} ~ {:.6}", o.target.exact, o.target.approx);
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointOut {
    pub x: Fraction,
    pub y: Fraction,
}

pub fn point_out(pt: &PointQ) -> PointOut {
    let PointQ::Affine(x, y) = pt else {
        panic!("division trees list affine points only");
    };
    PointOut {
        x: fraction(x),
        y: fraction(y),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivideOut {
    pub ell: u64,
    pub d: u32,
    pub strongly_indivisible: bool,
    /// levels[0] is the point itself; levels[k] its k-fold preimages.
    pub levels: Vec<Vec<PointOut>>,
}

pub fn render_divide(o: &DivideOut) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "ell: {}", o.ell);
    let _ = writeln!(s, "d = {}", o.d);
    if o.strongly_indivisible {
        let _ = writeln!(s, "strongly {}-indivisible", o.ell);
    }
    for (k, level) in o.levels.iter().enumerate() {
        if level.is_empty() {
            let _ = writeln!(s, "level {k}: none");
            continue;
        }
        let pts = level
            .iter()
            .map(|p| format!("({} ~ {:.4}, {} ~ {:.4})", p.x.exact, p.x.approx, p.y.exact, p.y.approx))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(s, "level {k}: {pts}");
    }
    s
}
