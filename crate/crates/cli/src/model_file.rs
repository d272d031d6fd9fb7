//! TOML model files.
//!
//! ```toml
//! [phase_space]
//! pairs = [{ p = "p1", q = "q1" }, { p = "p2", q = "q2", odd = false }]
//!
//! [[constraints]]
//! name = "T1"
//! value = "p1"
//!
//! [[stages]]                 # stage k = 1, 2, ... in order
//! size = 1
//! odd = [false]              # optional, defaults to all even
//! z = [["1"], ["1"], ["-1"]] # rows: previous stage, columns: this stage
//! a = [{ beta = 1, alpha = 2, gamma = 1, value = "1" }]  # from stage 2 on
//!
//! [[structure]]              # {T_alpha, T_beta} = T_gamma U^gamma_{alpha beta}
//! alpha = 1
//! beta = 2
//! gamma = 3
//! value = "-1"
//!
//! [regularity]
//! functions = ["q1", "q2"]
//! inverse = ["T'1", "F'1"]   # optional; original variables in primed names
//!
//! [splitting]
//! pivots = [[1, 2]]          # rows of Z at each stage paired with the kept columns
//! ```
//!
//! All indices are 1-based. Polynomials use the syntax of
//! [`parse_poly`]: `*`, `^`, rational literals `a/b`, parentheses.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use sp2brst_core::model::{xi_prime_names, Matrix, Model, ModelData, Regularity};
use sp2brst_core::resolve::IndexSplit;
use sp2brst_core::superalgebra::{parse_poly, Catalog, GradedPoly, PhaseSpaceLayout};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    phase_space: PhaseSpace,
    constraints: Vec<Constraint>,
    #[serde(default)]
    stages: Vec<Stage>,
    structure: Option<Vec<StructureEntry>>,
    regularity: Option<RegularitySection>,
    splitting: Option<Splitting>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseSpace {
    pairs: Vec<Pair>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Pair {
    p: String,
    q: String,
    #[serde(default)]
    odd: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Constraint {
    name: Option<String>,
    value: String,
    #[serde(default)]
    odd: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Stage {
    size: usize,
    odd: Option<Vec<bool>>,
    z: Vec<Vec<String>>,
    #[serde(default)]
    a: Vec<AEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AEntry {
    beta: usize,
    alpha: usize,
    gamma: usize,
    value: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureEntry {
    alpha: usize,
    beta: usize,
    gamma: usize,
    value: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegularitySection {
    functions: Vec<String>,
    inverse: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Splitting {
    pivots: Vec<Vec<usize>>,
    inverse: Option<Vec<Vec<Vec<String>>>>,
}

/// A validated model with its index split and the text it was read from.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub model: Model,
    pub split: IndexSplit,
    pub source: String,
}

fn poly(cat: &Catalog, text: &str, what: impl FnOnce() -> String) -> Result<GradedPoly> {
    parse_poly(cat, text).with_context(|| format!("{}: `{text}`", what()))
}

fn index(i: usize, len: usize, what: &str) -> Result<usize> {
    if i == 0 || i > len {
        bail!("{what} index {i} out of range 1..={len}");
    }
    Ok(i - 1)
}

fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![GradedPoly::zero(); cols]; rows]
}

pub fn load(path: &std::path::Path) -> Result<LoadedModel> {
    let source = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_model(&source).with_context(|| format!("model file {}", path.display()))
}

pub fn parse_model(source: &str) -> Result<LoadedModel> {
    let file: ModelFile = toml::from_str(source).map_err(|e| anyhow!("syntax error: {e}"))?;
    let sizes: Vec<usize> = std::iter::once(file.constraints.len()).chain(file.stages.iter().map(|s| s.size)).collect();
    let mut stage_parities = vec![file.constraints.iter().map(|c| c.odd).collect::<Vec<_>>()];
    for (k, st) in file.stages.iter().enumerate() {
        let odd = st.odd.clone().unwrap_or_else(|| vec![false; st.size]);
        if odd.len() != st.size {
            bail!("stages[{}]: {} parities for size {}", k + 1, odd.len(), st.size);
        }
        stage_parities.push(odd);
    }
    let layout = PhaseSpaceLayout {
        pairs: file.phase_space.pairs.iter().map(|p| (p.p.clone(), p.q.clone(), p.odd)).collect(),
        stage_parities,
    };
    let cat = layout.catalog();
    let constraints = file
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let label = c.name.clone().unwrap_or_else(|| format!("constraints[{}]", i + 1));
            poly(&cat, &c.value, || label)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut z = Vec::new();
    let mut a = Vec::new();
    for (j, st) in file.stages.iter().enumerate() {
        let k = j + 1;
        if st.z.len() != sizes[k - 1] || st.z.iter().any(|r| r.len() != st.size) {
            bail!("stages[{k}]: Z must be {} x {}", sizes[k - 1], st.size);
        }
        let mut m = Vec::new();
        for (r, row) in st.z.iter().enumerate() {
            let entries = row
                .iter()
                .enumerate()
                .map(|(c, x)| poly(&cat, x, || format!("stages[{k}].z[{}][{}]", r + 1, c + 1)))
                .collect::<Result<Vec<_>>>()?;
            m.push(entries);
        }
        z.push(m);
        if k >= 2 {
            let mut ak = vec![zeros(sizes[k - 2], st.size); sizes[0]];
            for e in &st.a {
                let what = format!("stages[{k}].a");
                let b = index(e.beta, sizes[0], &format!("{what} beta"))?;
                let al = index(e.alpha, sizes[k - 2], &format!("{what} alpha"))?;
                let g = index(e.gamma, st.size, &format!("{what} gamma"))?;
                ak[b][al][g] = poly(&cat, &e.value, || what)?;
            }
            a.push(ak);
        } else if !st.a.is_empty() {
            bail!("stages[1]: A-functions start at stage 2");
        }
    }
    let structure = match &file.structure {
        None => None,
        Some(entries) => {
            let m0 = sizes[0];
            let mut u = vec![zeros(m0, m0); m0];
            for e in entries {
                let al = index(e.alpha, m0, "structure alpha")?;
                let b = index(e.beta, m0, "structure beta")?;
                let g = index(e.gamma, m0, "structure gamma")?;
                u[al][b][g] = poly(&cat, &e.value, || "structure".into())?;
            }
            Some(u)
        }
    };
    let functions = match &file.regularity {
        None => None,
        Some(reg) => Some(
            reg.functions
                .iter()
                .enumerate()
                .map(|(j, f)| poly(&cat, f, || format!("regularity.functions[{}]", j + 1)))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let data = ModelData {
        layout: layout.clone(),
        constraints,
        z,
        a,
        structure,
        regularity: functions.clone().map(|functions| Regularity { functions, inverse: None }),
    };
    let model = data.clone().build()?;
    let split = match &file.splitting {
        None => IndexSplit::compute(&model)?,
        Some(sp) => {
            let f = sp
                .pivots
                .iter()
                .enumerate()
                .map(|(k, rows)| {
                    rows.iter()
                        .map(|&r| index(r, model.stage_size(k), &format!("splitting.pivots[{}]", k + 1)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let inv = match &sp.inverse {
                None => None,
                Some(blocks) => Some(
                    blocks
                        .iter()
                        .enumerate()
                        .map(|(k, b)| {
                            b.iter()
                                .map(|row| {
                                    row.iter()
                                        .map(|x| poly(&cat, x, || format!("splitting.inverse[{}]", k + 1)))
                                        .collect::<Result<Vec<_>>>()
                                })
                                .collect::<Result<Matrix>>()
                        })
                        .collect::<Result<Vec<_>>>()?,
                ),
            };
            IndexSplit::from_pivots(&model, f, inv)?
        }
    };
    let inverse_src = file.regularity.as_ref().and_then(|r| r.inverse.clone());
    let model = match (inverse_src, functions) {
        (Some(src), Some(functions)) => {
            let f_odd: Vec<bool> = functions.iter().map(|f| f.parity().unwrap_or(false)).collect();
            let eps0: Vec<bool> = (0..model.stage_size(0)).map(|a| model.parity(0, a)).collect();
            let primed = layout.primed_catalog(&xi_prime_names(&f_odd, split.kept(0), &eps0));
            let inverse = src
                .iter()
                .enumerate()
                .map(|(j, x)| poly(&primed, x, || format!("regularity.inverse[{}]", j + 1)))
                .collect::<Result<Vec<_>>>()?;
            ModelData { regularity: Some(Regularity { functions, inverse: Some(inverse) }), ..data }.build()?
        }
        (Some(_), None) => unreachable!("inverse is read from the regularity section"),
        (None, _) => model,
    };
    Ok(LoadedModel { model, split, source: source.to_string() })
}
