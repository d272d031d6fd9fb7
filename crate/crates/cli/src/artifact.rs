//! JSON artifacts: charges and lifted observables as canonical term lists.

use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use serde::{Deserialize, Serialize};
use sp2brst_core::koszul::Omega1Params;
use sp2brst_core::sp2tensor::Sp2Tensor;
use sp2brst_core::superalgebra::{Catalog, Coeff, GradedPoly, Monomial};

pub const FORMAT: &str = "sp2brst-artifact/1";

/// `(coefficient, [(variable, exponent)])`, factors in catalog order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term(pub String, pub Vec<(String, u32)>);

pub type PolyRecord = Vec<Term>;
/// Components `(r, t)` for `r = 0..=rank`.
pub type TensorRecord = Vec<PolyRecord>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableRecord {
    pub name: String,
    pub kind: String,
    pub stage: u32,
    pub index: u32,
    pub sp2: (u32, u32),
    pub odd: bool,
    pub ngh: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Options {
    pub cutoff: u32,
    pub seed: u64,
    pub samples: usize,
    pub free_term_y: Option<TensorRecord>,
    pub free_term_upsilon: Option<TensorRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsRecord {
    /// `[stage][alpha]`.
    pub m: Vec<Vec<TensorRecord>>,
    pub n: Vec<Vec<TensorRecord>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub lowest_rounds: usize,
    pub neumann_terms: usize,
    pub gauge_fixed: Vec<usize>,
    pub higher_iterations: usize,
    pub max_degree: u32,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub source: String,
    pub phi0: PolyRecord,
    pub k: PolyRecord,
    pub phi_prime: PolyRecord,
    pub residual_terms: usize,
    pub leftover_terms: usize,
    pub iterations: usize,
    pub checks: Vec<CheckRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub format: String,
    /// Text of the model file.
    pub model: String,
    pub options: Options,
    pub catalog: Vec<VariableRecord>,
    pub params: ParamsRecord,
    pub omega: TensorRecord,
    pub pi: TensorRecord,
    pub residual_terms: usize,
    pub leftover_terms: usize,
    pub solver: SolverRecord,
    pub checks: Vec<CheckRecord>,
    pub observables: Vec<ObservableRecord>,
}

impl Artifact {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Artifact = serde_json::from_str(text).map_err(|e| anyhow!("artifact: {e}"))?;
        if a.format != FORMAT {
            bail!("artifact format `{}`, expected `{FORMAT}`", a.format);
        }
        Ok(a)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow!("reading {}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| anyhow!("writing {}: {e}", path.display()))
    }
}

pub fn catalog_record(cat: &Catalog) -> Vec<VariableRecord> {
    cat.vars()
        .map(|v| {
            let d = cat.descriptor(v);
            VariableRecord {
                name: d.name.clone(),
                kind: format!("{:?}", d.kind),
                stage: d.stage,
                index: d.base + 1,
                sp2: d.sp2,
                odd: d.odd,
                ngh: cat.ngh(v),
            }
        })
        .collect()
}

pub fn encode_poly(cat: &Catalog, x: &GradedPoly) -> PolyRecord {
    x.terms()
        .map(|(m, c)| Term(c.to_string(), m.factors().iter().map(|&(v, e)| (cat.name(v).to_string(), e)).collect()))
        .collect()
}

pub fn encode_tensor(cat: &Catalog, x: &Sp2Tensor) -> TensorRecord {
    x.components().iter().map(|c| encode_poly(cat, c)).collect()
}

pub fn decode_poly(cat: &Catalog, rec: &PolyRecord) -> Result<GradedPoly> {
    let mut out = GradedPoly::zero();
    for Term(c, factors) in rec {
        let mut coeff = Coeff::from_str(c).map_err(|e| anyhow!("coefficient `{c}`: {e}"))?;
        let mut vars = Vec::with_capacity(factors.len());
        for (name, e) in factors {
            let v = cat.by_name(name).ok_or_else(|| anyhow!("unknown variable `{name}`"))?;
            vars.push((v, *e));
        }
        let (m, neg) = Monomial::from_factors(&vars).ok_or_else(|| anyhow!("vanishing monomial in artifact"))?;
        if neg {
            coeff = -coeff;
        }
        out.add_term(m, coeff);
    }
    Ok(out)
}

pub fn decode_tensor(cat: &Catalog, rec: &TensorRecord) -> Result<Sp2Tensor> {
    if rec.is_empty() {
        bail!("tensor with no components");
    }
    Ok(Sp2Tensor::from_components(rec.iter().map(|p| decode_poly(cat, p)).collect::<Result<_>>()?))
}

pub fn encode_params(cat: &Catalog, p: &Omega1Params) -> ParamsRecord {
    let enc = |xs: &Vec<Vec<Sp2Tensor>>| xs.iter().map(|s| s.iter().map(|t| encode_tensor(cat, t)).collect()).collect();
    ParamsRecord { m: enc(&p.m), n: enc(&p.n) }
}

pub fn decode_params(cat: &Catalog, p: &ParamsRecord) -> Result<Omega1Params> {
    let dec = |xs: &Vec<Vec<TensorRecord>>| {
        xs.iter()
            .map(|s| s.iter().map(|t| decode_tensor(cat, t)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
    };
    Ok(Omega1Params { m: dec(&p.m)?, n: dec(&p.n)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sp2brst_core::fixtures;
    use sp2brst_core::superalgebra::parse_poly;

    #[test]
    fn polynomials_round_trip() {
        let m = fixtures::model_b();
        let cat = m.catalog();
        let x = parse_poly(cat, "-3/4*q1^2*P0_1_10*c0_2_01 + P0_1_01*P0_1_10 + 5").unwrap();
        let rec = encode_poly(cat, &x);
        assert_eq!(decode_poly(cat, &rec).unwrap(), x);
        let bad = vec![Term("1".into(), vec![("nope".into(), 1)])];
        assert!(decode_poly(cat, &bad).is_err());
    }
}
