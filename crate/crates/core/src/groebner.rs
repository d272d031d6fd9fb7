//! Buchberger's algorithm over the commutative ring of even original-space
//! variables, graded reverse lexicographic order on variable handles.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::superalgebra::{Coeff, GradedPoly, Monomial, Var};
use crate::{Error, Result};

type Exps = Vec<(Var, u32)>;

#[derive(Clone, Debug, PartialEq)]
struct Poly {
    /// Terms in strictly decreasing monomial order.
    terms: Vec<(Exps, Coeff)>,
}

fn degree(m: &Exps) -> u32 {
    m.iter().map(|&(_, e)| e).sum()
}

fn exponent(m: &Exps, v: Var) -> u32 {
    m.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e)
}

fn grevlex(a: &Exps, b: &Exps) -> Ordering {
    let (da, db) = (degree(a), degree(b));
    if da != db {
        return da.cmp(&db);
    }
    let mut vars: Vec<Var> = a.iter().chain(b).map(|&(v, _)| v).collect();
    vars.sort();
    vars.dedup();
    for &v in vars.iter().rev() {
        let (ea, eb) = (exponent(a, v), exponent(b, v));
        if ea != eb {
            return eb.cmp(&ea);
        }
    }
    Ordering::Equal
}

fn mul_exps(a: &Exps, b: &Exps) -> Exps {
    let mut out: Exps = a.clone();
    for &(v, e) in b {
        match out.iter_mut().find(|(w, _)| *w == v) {
            Some(slot) => slot.1 += e,
            None => out.push((v, e)),
        }
    }
    out.sort();
    out
}

fn divides(a: &Exps, b: &Exps) -> bool {
    a.iter().all(|&(v, e)| exponent(b, v) >= e)
}

fn quotient(b: &Exps, a: &Exps) -> Exps {
    b.iter()
        .map(|&(v, e)| (v, e - exponent(a, v)))
        .filter(|&(_, e)| e > 0)
        .collect()
}

fn lcm(a: &Exps, b: &Exps) -> Exps {
    let mut out: Exps = a.clone();
    for &(v, e) in b {
        match out.iter_mut().find(|(w, _)| *w == v) {
            Some(slot) => slot.1 = slot.1.max(e),
            None => out.push((v, e)),
        }
    }
    out.sort();
    out
}

impl Poly {
    fn from_graded(p: &GradedPoly) -> Result<Poly> {
        let mut terms = Vec::with_capacity(p.len());
        for (m, c) in p.terms() {
            if m.parity() || m.factors().iter().any(|(v, _)| v.is_odd()) {
                return Err(Error::NotFirstClass(
                    "ideal membership is only decided for even variables; supply structure functions".into(),
                ));
            }
            terms.push((m.factors().to_vec(), c.clone()));
        }
        terms.sort_by(|a, b| grevlex(&b.0, &a.0));
        Ok(Poly { terms })
    }

    fn to_graded(&self) -> GradedPoly {
        GradedPoly::from_terms(self.terms.iter().map(|(m, c)| {
            let (mono, _) = Monomial::from_factors(m).expect("even monomial");
            (mono, c.clone())
        }))
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lead(&self) -> &(Exps, Coeff) {
        &self.terms[0]
    }

    fn monic(mut self) -> Poly {
        let lc = self.lead().1.clone();
        for t in &mut self.terms {
            t.1 = &t.1 / &lc;
        }
        self
    }

    /// `self - c * m * other`.
    fn sub_scaled(&self, c: &Coeff, m: &Exps, other: &Poly) -> Poly {
        let mut all: Vec<(Exps, Coeff)> = self.terms.clone();
        all.extend(other.terms.iter().map(|(e, k)| (mul_exps(e, m), -(c * k))));
        all.sort_by(|a, b| grevlex(&b.0, &a.0));
        let mut terms: Vec<(Exps, Coeff)> = Vec::with_capacity(all.len());
        for (e, k) in all {
            match terms.last_mut() {
                Some(last) if last.0 == e => last.1 += k,
                _ => terms.push((e, k)),
            }
        }
        terms.retain(|(_, k)| !k.is_zero());
        Poly { terms }
    }

    /// Full reduction modulo `basis`.
    fn reduce(&self, basis: &[Poly]) -> Poly {
        let mut p = self.clone();
        let mut rem: Vec<(Exps, Coeff)> = Vec::new();
        'outer: while !p.is_zero() {
            let (lm, lc) = p.lead().clone();
            for g in basis {
                let (gm, gc) = g.lead();
                if divides(gm, &lm) {
                    p = p.sub_scaled(&(&lc / gc), &quotient(&lm, gm), g);
                    continue 'outer;
                }
            }
            rem.push((lm, lc));
            p.terms.remove(0);
        }
        Poly { terms: rem }
    }
}

fn s_poly(f: &Poly, g: &Poly) -> Poly {
    let (fm, fc) = f.lead();
    let (gm, gc) = g.lead();
    let l = lcm(fm, gm);
    let left = Poly { terms: vec![] }.sub_scaled(&-(Coeff::one() / fc), &quotient(&l, fm), f);
    left.sub_scaled(&(Coeff::one() / gc), &quotient(&l, gm), g)
}

/// Reduced Gröbner basis of the ideal generated by a set of even polynomials.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    basis: Vec<Poly>,
}

impl GroebnerBasis {
    pub fn new(generators: &[GradedPoly]) -> Result<Self> {
        let mut basis: Vec<Poly> = Vec::new();
        for g in generators {
            let p = Poly::from_graded(g)?;
            if !p.is_zero() {
                basis.push(p.monic());
            }
        }
        let mut pairs: Vec<(usize, usize)> =
            (0..basis.len()).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        while let Some((i, j)) = pairs.pop() {
            let (mi, mj) = (&basis[i].lead().0, &basis[j].lead().0);
            // coprime leading monomials give a zero remainder
            if mi.iter().all(|&(v, _)| exponent(mj, v) == 0) {
                continue;
            }
            let r = s_poly(&basis[i], &basis[j]).reduce(&basis);
            if !r.is_zero() {
                let k = basis.len();
                basis.push(r.monic());
                pairs.extend((0..k).map(|i| (i, k)));
            }
        }
        // interreduce
        let mut reduced: Vec<Poly> = Vec::new();
        for (i, g) in basis.iter().enumerate() {
            let lm = &g.lead().0;
            let redundant = basis
                .iter()
                .enumerate()
                .any(|(j, h)| j != i && divides(&h.lead().0, lm) && (h.lead().0 != *lm || j < i));
            if !redundant {
                reduced.push(g.clone());
            }
        }
        let snapshot = reduced.clone();
        for (i, g) in reduced.iter_mut().enumerate() {
            let others: Vec<Poly> = snapshot
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| p.clone())
                .collect();
            *g = g.reduce(&others).monic();
        }
        reduced.sort_by(|a, b| grevlex(&a.lead().0, &b.lead().0));
        Ok(GroebnerBasis { basis: reduced })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn elements(&self) -> Vec<GradedPoly> {
        self.basis.iter().map(Poly::to_graded).collect()
    }

    /// Normal form of `p`; zero iff `p` lies in the ideal.
    pub fn reduce(&self, p: &GradedPoly) -> Result<GradedPoly> {
        Ok(Poly::from_graded(p)?.reduce(&self.basis).to_graded())
    }

    pub fn contains(&self, p: &GradedPoly) -> Result<bool> {
        Ok(self.reduce(p)?.is_zero())
    }
}
