//! JSON input files: subgroup generators and curve/point pairs.

use crate::CliError;
use arboreal_core::ecq::{CurveQ, PointQ};
use arboreal_core::modring::{ModCtx, ModMat, ModVec};
use arboreal_core::sdgroup::{AffineElement, SubgroupSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileKind {
    Linear,
    Affine,
}

/// Subgroup input: matrices are row-major, translations only for affine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupFile {
    pub ell: u64,
    pub level: u32,
    pub kind: FileKind,
    pub generators: Vec<GeneratorEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub matrix: [[i64; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<[i64; 2]>,
}

/// Curve input: coefficients and point coordinates, integers or "p/q".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub a: [RatLit; 5],
    pub point: [RatLit; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatLit {
    Int(i64),
    Str(String),
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_group(path: &Path) -> Result<GroupFile, CliError> {
    read_json(path)
}

pub fn load_curve(path: &Path) -> Result<CurveFile, CliError> {
    read_json(path)
}

impl GroupFile {
    pub fn to_spec(&self) -> Result<SubgroupSpec, CliError> {
        let ctx = ModCtx::new(self.ell, self.level)
            .map_err(|e| CliError::Input(format!("group file: {e}")))?;
        let mut gens = Vec::new();
        for (i, gen) in self.generators.iter().enumerate() {
            let m = ModMat::new(
                ctx,
                [
                    [ctx.reduce_i64(gen.matrix[0][0]), ctx.reduce_i64(gen.matrix[0][1])],
                    [ctx.reduce_i64(gen.matrix[1][0]), ctx.reduce_i64(gen.matrix[1][1])],
                ],
            );
            if !m.is_invertible() {
                return Err(CliError::Input(format!(
                    "generator {i}: matrix not invertible mod {}",
                    self.ell
                )));
            }
            match (self.kind, gen.translation) {
                (FileKind::Linear, Some(_)) => {
                    return Err(CliError::Input(format!(
                        "generator {i}: translation requires affine kind"
                    )));
                }
                (FileKind::Linear, None) => gens.push(AffineElement::linear(m)),
                (FileKind::Affine, t) => {
                    let t = t.unwrap_or([0, 0]);
                    let v = ModVec::new(ctx, [ctx.reduce_i64(t[0]), ctx.reduce_i64(t[1])]);
                    gens.push(AffineElement::new(v, m));
                }
            }
        }
        let spec = match self.kind {
            FileKind::Linear => {
                SubgroupSpec::linear(ctx, gens.into_iter().map(|e| e.g).collect())
            }
            FileKind::Affine => SubgroupSpec::affine(ctx, gens),
        };
        spec.map_err(|e| CliError::Input(format!("group file: {e}")))
    }
}

fn rat_from(lit: &RatLit, what: &str) -> Result<BigRational, CliError> {
    match lit {
        RatLit::Int(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
        RatLit::Str(s) => BigRational::from_str(s.trim())
            .map_err(|_| CliError::Input(format!("{what}: invalid rational '{s}'"))),
    }
}

impl CurveFile {
    pub fn to_curve(&self) -> Result<(CurveQ, PointQ), CliError> {
        let mut a = Vec::with_capacity(5);
        for (i, lit) in self.a.iter().enumerate() {
            a.push(rat_from(lit, &format!("a[{i}]"))?);
        }
        let a: [BigRational; 5] = a.try_into().expect("five coefficients");
        let curve = CurveQ::new(a).map_err(|e| CliError::Input(format!("curve file: {e}")))?;
        let x = rat_from(&self.point[0], "point x")?;
        let y = rat_from(&self.point[1], "point y")?;
        let pt = curve
            .point(x, y)
            .map_err(|e| CliError::Input(format!("curve file: {e}")))?;
        Ok((curve, pt))
    }
}
