//! Primed coordinates `(xi', P', lambda')` in which `delta` becomes linear.
//!
//! Primed variables live in the extended catalog of
//! [`PhaseSpaceLayout::primed_catalog`]; `P'_{s|alpha}` and
//! `lambda'_{s|alpha}` carry the index `alpha ∈ alpha_s`, which is either
//! `f(A)` for `A ∈ A_{s+1}` or an element of `A_s`.
//!
//! [`PhaseSpaceLayout::primed_catalog`]: crate::superalgebra::PhaseSpaceLayout::primed_catalog

use std::collections::HashMap;

use super::split::{invert_unimodular, IndexRole, IndexSplit};
use crate::koszul::Omega1Params;
use crate::model::{xi_prime_names, Matrix, Model};
use crate::sp2tensor::Sp2Tensor;
use crate::superalgebra::{Catalog, Coeff, GradedPoly, Var, VarKind};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct PrimedCoordinates {
    catalog: Catalog,
    split: IndexSplit,
    /// Number of regularity functions `F`.
    n_f: usize,
    /// Primed variable -> expression in the original variables.
    forward: HashMap<Var, GradedPoly>,
    /// Original `xi`, `P`, `lambda` -> expression in primed variables.
    inverse: HashMap<Var, GradedPoly>,
}

fn ratio(num: i64, den: i64) -> Coeff {
    Coeff::new(num.into(), den.into())
}

/// Linear part of an affine polynomial over `vars`; `None` if not affine
/// with constant coefficients.
fn affine_row(x: &GradedPoly, vars: &[Var]) -> Option<(Vec<GradedPoly>, Coeff)> {
    let mut row = vec![GradedPoly::zero(); vars.len()];
    for (m, c) in x.terms() {
        match m.factors() {
            [] => {}
            [(v, 1)] => {
                let i = vars.iter().position(|w| w == v)?;
                row[i] = GradedPoly::constant(c.clone());
            }
            _ => return None,
        }
    }
    Some((row, x.constant_term()))
}

/// Default regularity functions: original coordinates, in catalog order,
/// that complete the constant Jacobian of `T_{A_0}`.
fn default_regularity(xi: &[Var], t_a0: &[GradedPoly]) -> Result<Vec<GradedPoly>> {
    let mut rows = Vec::new();
    for t in t_a0 {
        let (row, _) = affine_row(t, xi).ok_or_else(|| {
            Error::Split("constraints are not linear; regularity functions must be supplied".into())
        })?;
        rows.push(row);
    }
    let mut chosen = Vec::new();
    for (i, &v) in xi.iter().enumerate() {
        if rows.len() == xi.len() {
            break;
        }
        let mut unit = vec![GradedPoly::zero(); xi.len()];
        unit[i] = GradedPoly::one();
        let mut trial = rows.clone();
        trial.push(unit);
        if matrix_rank(&trial) == trial.len() {
            rows = trial;
            chosen.push(GradedPoly::var(v));
        }
    }
    Ok(chosen)
}

fn matrix_rank(m: &Matrix) -> usize {
    let mut rows: Vec<Vec<Coeff>> = m
        .iter()
        .map(|r| r.iter().map(GradedPoly::constant_term).collect())
        .collect();
    let mut rank = 0;
    let cols = rows.first().map_or(0, Vec::len);
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][col] != Coeff::from_integer(0.into())) else {
            continue;
        };
        rows.swap(rank, p);
        for i in 0..rows.len() {
            if i != rank && rows[i][col] != Coeff::from_integer(0.into()) {
                let f = &rows[i][col] / &rows[rank][col];
                let pivot = rows[rank].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

impl PrimedCoordinates {
    /// Builds and verifies the coordinate change for the given parameters.
    /// Stage-`s` coordinates use the parameters of stages `<= s + 1`.
    pub fn new(model: &Model, split: &IndexSplit, params: &Omega1Params) -> Result<Self> {
        let cat = model.catalog();
        let a0 = split.kept(0).to_vec();
        let t_a0: Vec<GradedPoly> = a0.iter().map(|&a| model.constraint(a).clone()).collect();
        let xi: Vec<Var> = cat.vars().filter(|&v| cat.descriptor(v).kind == VarKind::Xi).collect();
        let (f_funcs, given_inverse) = match model.regularity() {
            Some(reg) => (reg.functions.clone(), reg.inverse.clone()),
            None => (default_regularity(&xi, &t_a0)?, None),
        };
        if f_funcs.len() + a0.len() != xi.len() {
            return Err(Error::Split(format!(
                "{} regularity functions and {} independent constraints do not make {} coordinates",
                f_funcs.len(),
                a0.len(),
                xi.len()
            )));
        }
        let f_par: Vec<bool> = f_funcs.iter().map(|f| f.parity().unwrap_or(false)).collect();
        let eps0: Vec<bool> = (0..model.stage_size(0)).map(|a| model.parity(0, a)).collect();
        let catalog = model.layout().primed_catalog(&xi_prime_names(&f_par, &a0, &eps0));

        let mut forward = HashMap::new();
        for (j, f) in f_funcs.iter().chain(&t_a0).enumerate() {
            forward.insert(catalog.xi_prime(j as u32), f.clone());
        }
        let xi_inverse = match given_inverse {
            Some(inv) => inv,
            None => Self::linear_inverse(&catalog, &xi, &f_funcs, &t_a0)?,
        };
        // catalog order p_1, q^1, p_2, ... matches `xi`
        let mut inverse: HashMap<Var, GradedPoly> = xi.iter().copied().zip(xi_inverse).collect();

        let mut coords = PrimedCoordinates {
            catalog,
            split: split.clone(),
            n_f: f_funcs.len(),
            forward,
            inverse: HashMap::new(),
        };
        for s in 0..=model.order() {
            coords.add_stage(model, params, s, &mut inverse)?;
        }
        coords.inverse = inverse;
        coords.verify(model)?;
        Ok(coords)
    }

    fn linear_inverse(catalog: &Catalog, xi: &[Var], f: &[GradedPoly], t: &[GradedPoly]) -> Result<Vec<GradedPoly>> {
        let mut jac = Vec::new();
        let mut shift = Vec::new();
        for x in f.iter().chain(t) {
            let (row, c) = affine_row(x, xi).ok_or_else(|| {
                Error::Split("non-linear regularity data; the inverse map must be supplied".into())
            })?;
            jac.push(row);
            shift.push(c);
        }
        let inv = invert_unimodular(&jac)?;
        Ok((0..xi.len())
            .map(|i| {
                let mut acc = GradedPoly::zero();
                for (j, c) in shift.iter().enumerate() {
                    let y = &GradedPoly::var(catalog.xi_prime(j as u32)) - &GradedPoly::constant(c.clone());
                    acc += &(&inv[i][j] * &y);
                }
                acc
            })
            .collect())
    }

    fn add_stage(&mut self, model: &Model, params: &Omega1Params, s: usize, inverse: &mut HashMap<Var, GradedPoly>) -> Result<()> {
        let cat = model.catalog();
        let pc = &self.catalog;
        let su = s as u32;
        for &a in self.split.kept(s) {
            for r in 0..=su + 1 {
                let (orig, primed) = (cat.ghost_p(su, a as u32, r), pc.ghost_p_prime(su, a as u32, r));
                self.forward.insert(primed, GradedPoly::var(orig));
                inverse.insert(orig, GradedPoly::var(primed));
            }
            for r in 0..=su {
                let (orig, primed) = (cat.lambda(su, a as u32, r), pc.lambda_prime(su, a as u32, r));
                self.forward.insert(primed, GradedPoly::var(orig));
                inverse.insert(orig, GradedPoly::var(primed));
            }
        }
        if s == model.order() {
            return Ok(());
        }
        let to_primed = |x: &GradedPoly, inverse: &HashMap<Var, GradedPoly>| x.substitute(&|v| inverse.get(&v).cloned());
        let next = self.split.kept(s + 1).to_vec();
        let image = self.split.image(s).to_vec();
        let inv_block = self.split.inverse(s).clone();
        let kept_s = self.split.kept(s).to_vec();
        // forward: P'_{f(A)|(r,t)} = (r+1)(t+1)/(s+2) (P_{s|(r,t)} Z^{.}_A + M_{A|(r,t)})
        for (j, &a) in next.iter().enumerate() {
            let row = image[j] as u32;
            for r in 0..=su + 1 {
                let t = su + 1 - r;
                let mut body = params.m[s + 1][a].comp(r as usize).clone();
                for beta in 0..model.stage_size(s) {
                    body += &(&GradedPoly::var(cat.ghost_p(su, beta as u32, r)) * model.z(s, beta, a));
                }
                let k = ratio(((r + 1) * (t + 1)) as i64, s as i64 + 2);
                self.forward.insert(pc.ghost_p_prime(su, row, r), body.scale(&k));
            }
            for r in 0..=su {
                let t = su - r;
                let mut body = -params.n[s + 1][a].comp(r as usize);
                for beta in 0..model.stage_size(s) {
                    body += &(&GradedPoly::var(cat.lambda(su, beta as u32, r)) * model.z(s, beta, a));
                }
                let k = ratio(-(((r + 1) * (t + 1)) as i64), s as i64 + 2);
                self.forward.insert(pc.lambda_prime(su, row, r), body.scale(&k));
            }
        }
        // inverse: solve the forward relations for P_{alpha'_s}, lambda_{alpha'_s}
        let zp = |beta: usize, a: usize| to_primed(model.z(s, beta, a), inverse);
        let inv_p: Vec<Vec<GradedPoly>> = inv_block.iter().map(|row| row.iter().map(|x| to_primed(x, inverse)).collect()).collect();
        let mut new_entries = Vec::new();
        for r in 0..=su + 1 {
            let t = su + 1 - r;
            let lhs: Vec<GradedPoly> = next
                .iter()
                .enumerate()
                .map(|(j, &a)| {
                    let mut x = GradedPoly::var(pc.ghost_p_prime(su, image[j] as u32, r))
                        .scale(&ratio(s as i64 + 2, ((r + 1) * (t + 1)) as i64));
                    for &b in &kept_s {
                        x -= &(&GradedPoly::var(pc.ghost_p_prime(su, b as u32, r)) * &zp(b, a));
                    }
                    x -= &to_primed(params.m[s + 1][a].comp(r as usize), inverse);
                    x
                })
                .collect();
            for (i, &alpha) in image.iter().enumerate() {
                let mut acc = GradedPoly::zero();
                for (j, x) in lhs.iter().enumerate() {
                    acc += &(x * &inv_p[j][i]);
                }
                new_entries.push((cat.ghost_p(su, alpha as u32, r), acc));
            }
        }
        for r in 0..=su {
            let t = su - r;
            let lhs: Vec<GradedPoly> = next
                .iter()
                .enumerate()
                .map(|(j, &a)| {
                    let mut x = GradedPoly::var(pc.lambda_prime(su, image[j] as u32, r))
                        .scale(&ratio(s as i64 + 2, ((r + 1) * (t + 1)) as i64));
                    for &b in &kept_s {
                        x += &(&GradedPoly::var(pc.lambda_prime(su, b as u32, r)) * &zp(b, a));
                    }
                    x -= &to_primed(params.n[s + 1][a].comp(r as usize), inverse);
                    -x
                })
                .collect();
            for (i, &alpha) in image.iter().enumerate() {
                let mut acc = GradedPoly::zero();
                for (j, x) in lhs.iter().enumerate() {
                    acc += &(x * &inv_p[j][i]);
                }
                new_entries.push((cat.lambda(su, alpha as u32, r), acc));
            }
        }
        inverse.extend(new_entries);
        Ok(())
    }

    fn verify(&self, model: &Model) -> Result<()> {
        let cat = model.catalog();
        for v in cat.vars() {
            if !self.inverse.contains_key(&v) {
                continue;
            }
            let back = self.from_primed(&self.to_primed(&GradedPoly::var(v)));
            if back != GradedPoly::var(v) {
                return Err(Error::Split(format!(
                    "coordinate change does not invert on {}: {}",
                    cat.name(v),
                    back.display(&self.catalog)
                )));
            }
        }
        for v in self.forward.keys() {
            let back = self.to_primed(&self.from_primed(&GradedPoly::var(*v)));
            if back != GradedPoly::var(*v) {
                return Err(Error::Split(format!(
                    "coordinate change does not invert on {}: {}",
                    self.catalog.name(*v),
                    back.display(&self.catalog)
                )));
            }
        }
        Ok(())
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn split(&self) -> &IndexSplit {
        &self.split
    }

    /// Number of regularity functions; `xi'_j` for `j >= n_f` is `T_{A_0[j - n_f]}`.
    pub fn regularity_count(&self) -> usize {
        self.n_f
    }

    /// Index of `xi'_j` in `A_0`, or `None` for a regularity function.
    pub fn xi_constraint(&self, j: usize) -> Option<usize> {
        j.checked_sub(self.n_f).map(|i| self.split.kept(0)[i])
    }

    pub fn role(&self, stage: usize, alpha: usize) -> IndexRole {
        self.split.role(stage, alpha)
    }

    /// Image of a primed variable in the original variables.
    pub fn forward(&self, v: Var) -> Option<&GradedPoly> {
        self.forward.get(&v)
    }

    /// Image of an original variable in the primed ones.
    pub fn inverse(&self, v: Var) -> Option<&GradedPoly> {
        self.inverse.get(&v)
    }

    /// `X -> X'`: rewrites `X(xi, P, lambda, c, pi)` in primed variables.
    pub fn to_primed(&self, x: &GradedPoly) -> GradedPoly {
        x.substitute(&|v| self.inverse.get(&v).cloned())
    }

    /// `X' -> X`: rewrites a function of primed variables in original ones.
    pub fn from_primed(&self, x: &GradedPoly) -> GradedPoly {
        x.substitute(&|v| self.forward.get(&v).cloned())
    }

    pub fn to_primed_tensor(&self, x: &Sp2Tensor) -> Sp2Tensor {
        x.map(|y| self.to_primed(y))
    }

    pub fn from_primed_tensor(&self, x: &Sp2Tensor) -> Sp2Tensor {
        x.map(|y| self.from_primed(y))
    }
}
