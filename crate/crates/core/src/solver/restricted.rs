//! Exact linear solve for one stage of the lowest-order equation, with the
//! unknowns `M_{alpha_s}`, `N_{alpha_s}` spanned by polynomials in `xi`,
//! `P_{alpha_t}` and `lambda_{alpha_t}`, `t <= s - 2`.

use std::collections::{BTreeMap, HashMap};

use crate::koszul::{compute_w, Koszul, Omega1Params};
use crate::sp2tensor::Sp2Tensor;
use crate::superalgebra::{Catalog, Coeff, GradedPoly, Monomial, Var, VarKind};
use crate::{Error, Result};

use num_traits::Zero;

type Key = (usize, Monomial);
type SparseVec = BTreeMap<Key, Coeff>;

/// Unknown `(is_n, alpha, component, monomial)`.
type Unknown = (bool, usize, usize, GradedPoly);

/// Largest stage index of a `c` or `pi` factor, if any.
fn sector(cat: &Catalog, m: &Monomial) -> Option<usize> {
    m.factors()
        .iter()
        .filter_map(|&(v, _)| {
            let d = cat.descriptor(v);
            matches!(d.kind, VarKind::GhostC | VarKind::Pi).then_some(d.stage as usize)
        })
        .max()
}

fn to_sparse(cat: &Catalog, x: &Sp2Tensor, s: usize) -> SparseVec {
    let mut out = SparseVec::new();
    for (r, comp) in x.components().iter().enumerate() {
        for (m, c) in comp.terms() {
            if sector(cat, m).is_some_and(|k| k <= s) {
                out.insert((r, m.clone()), c.clone());
            }
        }
    }
    out
}

fn axpy(y: &mut SparseVec, a: &Coeff, x: &SparseVec) {
    for (k, v) in x {
        let e = y.entry(k.clone()).or_insert_with(Coeff::zero);
        *e += a * v;
        if e.is_zero() {
            y.remove(k);
        }
    }
}

fn axpy_comb(y: &mut HashMap<usize, Coeff>, a: &Coeff, x: &HashMap<usize, Coeff>) {
    for (k, v) in x {
        *y.entry(*k).or_insert_with(Coeff::zero) += a * v;
    }
}

/// Monomials in `vars` of total ghost number `ngh`, each ghost variable
/// carrying a negative ghost number.
fn ghost_monomials(cat: &Catalog, vars: &[Var], ngh: i32) -> Vec<GradedPoly> {
    fn go(cat: &Catalog, vars: &[Var], ngh: i32, acc: GradedPoly, out: &mut Vec<GradedPoly>) {
        if ngh == 0 {
            out.push(acc);
            return;
        }
        let Some((&v, rest)) = vars.split_first() else { return };
        let g = cat.ngh(v);
        let max_e = if v.is_odd() { 1 } else { (ngh / g) as u32 };
        let mut term = acc;
        for e in 0..=max_e {
            if e > 0 {
                term = &term * &GradedPoly::var(v);
                if term.is_zero() {
                    break;
                }
            }
            if ngh - g * e as i32 <= 0 {
                go(cat, rest, ngh - g * e as i32, term.clone(), out);
            }
        }
    }
    let mut out = Vec::new();
    go(cat, vars, ngh, GradedPoly::one(), &mut out);
    out.retain(|m| !m.is_constant());
    out
}

fn xi_monomials(vars: &[Var], degree: u32) -> Vec<GradedPoly> {
    let mut out = vec![GradedPoly::one()];
    let mut layer = vec![(GradedPoly::one(), 0usize)];
    for _ in 0..degree {
        let mut next = Vec::new();
        for (m, from) in &layer {
            for (i, &v) in vars.iter().enumerate().skip(*from) {
                let p = m * &GradedPoly::var(v);
                if !p.is_zero() {
                    next.push((p, i));
                }
            }
        }
        out.extend(next.iter().map(|(m, _)| m.clone()));
        layer = next;
    }
    out
}

fn basis(k: &Koszul, s: usize, degree: u32) -> Vec<Unknown> {
    let model = k.model();
    let cat = k.catalog();
    let ghosts: Vec<Var> = cat
        .vars()
        .filter(|&v| {
            let d = cat.descriptor(v);
            matches!(d.kind, VarKind::MomentumP | VarKind::Lambda) && d.stage as usize + 2 <= s
        })
        .collect();
    let xi: Vec<Var> = cat.vars().filter(|&v| cat.descriptor(v).kind == VarKind::Xi).collect();
    let xi_monos = xi_monomials(&xi, degree);
    let mut out = Vec::new();
    for alpha in 0..model.stage_size(s) {
        let eps = model.parity(s, alpha) ^ (s % 2 == 1);
        for (is_n, parity, ngh, rank) in [(false, eps, -(s as i32), s), (true, !eps, -(s as i32) - 1, s - 1)] {
            let mut monos = Vec::new();
            for g in ghost_monomials(cat, &ghosts, ngh) {
                for x in &xi_monos {
                    let m = x * &g;
                    if m.parity() == Some(parity) {
                        monos.push(m);
                    }
                }
            }
            for r in 0..=rank {
                out.extend(monos.iter().map(|m| (is_n, alpha, r, m.clone())));
            }
        }
    }
    out
}

fn with_unknown(k: &Koszul, s: usize, u: &Unknown) -> Omega1Params {
    let mut p = Omega1Params::zero(k.model());
    let (is_n, alpha, r, m) = u;
    let slot = if *is_n { &mut p.n[s][*alpha] } else { &mut p.m[s][*alpha] };
    *slot.comp_mut(*r) = m.clone();
    p
}

/// Stage-`s` coefficient functions solving the lowest-order equation on
/// every `c`/`pi` sector up to `s`, given those of lower stages in `k`.
/// Free unknowns are set to zero.
pub(super) fn solve_stage(k: &Koszul, s: usize) -> Result<(Vec<Sp2Tensor>, Vec<Sp2Tensor>)> {
    let model = k.model();
    let cat = k.catalog();
    let w = k.compute_w();
    let lhs = &(&k.delta(&w) + &k.compute_q()) + &k.operator_b(&w);
    let mut target = to_sparse(cat, &lhs, s);
    if target.is_empty() {
        return Ok((k.params().m[s].clone(), k.params().n[s].clone()));
    }
    for v in target.values_mut() {
        *v = -v.clone();
    }
    let xi_degree = target
        .keys()
        .map(|(_, m)| m.degree_in(|v| cat.descriptor(v).kind == VarKind::Xi))
        .max()
        .unwrap_or(0);
    for degree in xi_degree..=xi_degree + 2 {
        let unknowns = basis(k, s, degree);
        // echelon of columns, each with its combination of unknowns
        let mut pivots: Vec<(Key, SparseVec, HashMap<usize, Coeff>)> = Vec::new();
        for (i, u) in unknowns.iter().enumerate() {
            let we = compute_w(model, &with_unknown(k, s, u));
            let image = &k.delta(&we) + &k.operator_b(&we);
            let mut v = to_sparse(cat, &image, s);
            let mut comb = HashMap::from([(i, Coeff::from_integer(1.into()))]);
            for (key, pv, pc) in &pivots {
                if let Some(a) = v.get(key).cloned() {
                    axpy(&mut v, &-a.clone(), pv);
                    axpy_comb(&mut comb, &-a, pc);
                }
            }
            if let Some((key, lead)) = v.iter().next().map(|(k, c)| (k.clone(), c.clone())) {
                let inv = Coeff::from_integer(1.into()) / lead;
                v.values_mut().for_each(|x| *x *= &inv);
                comb.values_mut().for_each(|x| *x *= &inv);
                pivots.push((key, v, comb));
            }
        }
        let mut rest = target.clone();
        let mut solution: HashMap<usize, Coeff> = HashMap::new();
        for (key, pv, pc) in &pivots {
            if let Some(a) = rest.get(key).cloned() {
                axpy(&mut rest, &-a.clone(), pv);
                axpy_comb(&mut solution, &a, pc);
            }
        }
        if !rest.is_empty() {
            continue;
        }
        let mut m = k.params().m[s].clone();
        let mut n = k.params().n[s].clone();
        for (i, c) in solution {
            if c.is_zero() {
                continue;
            }
            let (is_n, alpha, r, mono) = &unknowns[i];
            let slot = if *is_n { &mut n[*alpha] } else { &mut m[*alpha] };
            *slot.comp_mut(*r) += &mono.scale(&c);
        }
        return Ok((m, n));
    }
    Err(Error::InvalidModel {
        identity: "lowest-order equation".into(),
        detail: format!("no stage-{s} solution among polynomials in stages up to {}", s as i64 - 2),
    })
}
