use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::{Catalog, Coeff, Var};
use crate::{Error, Result};

/// Product of variables in canonical order. Odd variables carry exponent 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(SmallVec<[(Var, u32); 6]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(smallvec::smallvec![(v, 1)])
    }

    /// Builds a monomial from factors in arbitrary order, returning the sign
    /// picked up by sorting, or `None` if an odd variable repeats.
    pub fn from_factors(factors: &[(Var, u32)]) -> Option<(Self, bool)> {
        let mut acc = Monomial::one();
        let mut neg = false;
        for &(v, e) in factors {
            if e == 0 {
                continue;
            }
            if v.is_odd() && e > 1 {
                return None;
            }
            let (m, s) = acc.mul(&Monomial(smallvec::smallvec![(v, e)]))?;
            acc = m;
            neg ^= s;
        }
        Some((acc, neg))
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parity(&self) -> bool {
        self.0.iter().filter(|(v, _)| v.is_odd()).count() % 2 == 1
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .binary_search_by_key(&v, |&(w, _)| w)
            .map_or(0, |i| self.0[i].1)
    }

    /// Total degree in the variables selected by `pred`.
    pub fn degree_in(&self, pred: impl Fn(Var) -> bool) -> u32 {
        self.0.iter().filter(|(v, _)| pred(*v)).map(|&(_, e)| e).sum()
    }

    /// Supercommutative product; `Some((m, negate))` or `None` when the
    /// product vanishes.
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        let a = &self.0;
        let b = &other.0;
        // odd_after[i] = number of odd variables in a[i..]
        let mut odd_after = vec![0usize; a.len() + 1];
        for i in (0..a.len()).rev() {
            odd_after[i] = odd_after[i + 1] + a[i].0.is_odd() as usize;
        }
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let mut swaps = 0usize;
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                if b[j].0.is_odd() {
                    swaps += odd_after[i];
                }
                out.push(b[j]);
                j += 1;
            } else {
                let v = a[i].0;
                if v.is_odd() {
                    return None;
                }
                out.push((v, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
        Some((Monomial(out), swaps % 2 == 1))
    }

    fn position(&self, v: Var) -> Option<usize> {
        self.0.binary_search_by_key(&v, |&(w, _)| w).ok()
    }

    fn remove_one(&self, idx: usize) -> Monomial {
        let mut f = self.0.clone();
        if f[idx].1 == 1 {
            f.remove(idx);
        } else {
            f[idx].1 -= 1;
        }
        Monomial(f)
    }

    fn split_at(&self, idx: usize) -> (Monomial, Monomial) {
        (
            Monomial(self.0[..idx].iter().copied().collect()),
            Monomial(self.0[idx + 1..].iter().copied().collect()),
        )
    }
}

/// Exact-rational polynomial in supercommuting variables.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GradedPoly {
    terms: BTreeMap<Monomial, Coeff>,
}

impl GradedPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(Coeff::from_integer(n.into()))
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), Coeff::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Coeff)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Coeff)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Coeff {
        self.coefficient(&Monomial::one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn add_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        GradedPoly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&Coeff::from_integer(n.into()))
    }

    pub fn scale_ratio(&self, num: i64, den: i64) -> Self {
        self.scale(&Coeff::new(num.into(), den.into()))
    }

    /// Parity when homogeneous; `None` for zero or mixed polynomials.
    pub fn parity(&self) -> Option<bool> {
        let mut it = self.terms.keys().map(Monomial::parity);
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.parity().is_some()
    }

    /// Splits into (even, odd) parts.
    pub fn parity_parts(&self) -> (GradedPoly, GradedPoly) {
        let mut even = GradedPoly::zero();
        let mut odd = GradedPoly::zero();
        for (m, c) in &self.terms {
            if m.parity() {
                odd.terms.insert(m.clone(), c.clone());
            } else {
                even.terms.insert(m.clone(), c.clone());
            }
        }
        (even, odd)
    }

    /// Ghost number when homogeneous; `None` for zero or mixed polynomials.
    pub fn ngh(&self, cat: &Catalog) -> Option<i32> {
        let mut it = self.terms.keys().map(|m| {
            m.factors()
                .iter()
                .map(|&(v, e)| cat.ngh(v) * e as i32)
                .sum::<i32>()
        });
        let first = it.next()?;
        it.all(|g| g == first).then_some(first)
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self
            .terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|&(v, _)| v))
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    /// Keeps the terms whose monomial satisfies `pred`.
    pub fn filter(&self, pred: impl Fn(&Monomial) -> bool) -> Self {
        GradedPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| pred(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Applies a coefficient-wise map per monomial (e.g. spectral operators).
    pub fn map_terms(&self, f: impl Fn(&Monomial, &Coeff) -> Coeff) -> Self {
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(m, c));
        }
        out
    }

    fn mul_impl(&self, other: &GradedPoly) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, neg)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> GradedPoly {
        let mut acc = GradedPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Left derivative. For odd `v` the variable is first moved to the front.
    pub fn left_deriv(&self, v: Var) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            let Some(idx) = m.position(v) else { continue };
            let e = m.0[idx].1;
            let mut c = c * Coeff::from_integer(e.into());
            if v.is_odd() {
                let before = m.0[..idx].iter().filter(|(w, _)| w.is_odd()).count();
                if before % 2 == 1 {
                    c = -c;
                }
            }
            out.add_term(m.remove_one(idx), c);
        }
        out
    }

    /// Right derivative. For odd `v` the variable is first moved to the end.
    pub fn right_deriv(&self, v: Var) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            let Some(idx) = m.position(v) else { continue };
            let e = m.0[idx].1;
            let mut c = c * Coeff::from_integer(e.into());
            if v.is_odd() {
                let after = m.0[idx + 1..].iter().filter(|(w, _)| w.is_odd()).count();
                if after % 2 == 1 {
                    c = -c;
                }
            }
            out.add_term(m.remove_one(idx), c);
        }
        out
    }

    /// Algebra homomorphism sending each variable `v` to `sub(v)` (or to
    /// itself when `sub` returns `None`). Images must preserve parity.
    pub fn substitute(&self, sub: &dyn Fn(Var) -> Option<GradedPoly>) -> GradedPoly {
        let mut cache: BTreeMap<Var, Option<GradedPoly>> = BTreeMap::new();
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = GradedPoly::constant(c.clone());
            for &(v, e) in m.factors() {
                let img = cache.entry(v).or_insert_with(|| sub(v));
                let factor = match img {
                    Some(p) => p.pow(e),
                    None => GradedPoly::from_terms([(Monomial(smallvec::smallvec![(v, e)]), Coeff::one())]),
                };
                acc = &acc * &factor;
                if acc.is_zero() {
                    break;
                }
            }
            out += &acc;
        }
        out
    }

    /// Applies the derivation with parity `odd` fixed by its values on
    /// generators. `gen(v)` returns `None` where the derivation vanishes.
    ///
    /// Sign rule: `D(xy) = D(x) y + (-1)^{odd * eps(x)} x D(y)`.
    pub fn apply_derivation(&self, odd: bool, gen: &dyn Fn(Var) -> Option<GradedPoly>) -> GradedPoly {
        let mut cache: BTreeMap<Var, Option<GradedPoly>> = BTreeMap::new();
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            let mut prefix_odd = false;
            for (idx, &(v, e)) in m.factors().iter().enumerate() {
                let img = cache.entry(v).or_insert_with(|| gen(v)).clone();
                if let Some(img) = img {
                    if !img.is_zero() {
                        let (pre, post) = m.split_at(idx);
                        let mut coeff = c * Coeff::from_integer(e.into());
                        if odd && prefix_odd {
                            coeff = -coeff;
                        }
                        let rest = if e > 1 {
                            GradedPoly::from_terms([(Monomial(smallvec::smallvec![(v, e - 1)]), Coeff::one())])
                        } else {
                            GradedPoly::one()
                        };
                        let term = &(&GradedPoly::from_terms([(pre, coeff)]) * &img) * &rest;
                        let term = &term * &GradedPoly::from_terms([(post, Coeff::one())]);
                        out += &term;
                    }
                }
                if v.is_odd() && e % 2 == 1 {
                    prefix_odd = !prefix_odd;
                }
            }
        }
        out
    }

    /// Substitutes rationals for even variables; odd variables stay symbolic.
    pub fn eval_even(&self, point: &dyn Fn(Var) -> Option<Coeff>) -> Result<GradedPoly> {
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = SmallVec::new();
            for &(v, e) in m.factors() {
                if v.is_odd() {
                    rest.push((v, e));
                } else {
                    let x = point(v).ok_or(Error::MissingAssignment(v))?;
                    coeff *= num_traits::pow(x, e as usize);
                }
            }
            out.add_term(Monomial(rest), coeff);
        }
        Ok(out)
    }

    /// Renders with catalog names, e.g. `2*p1^2 - 1/3*q1*c0_1_10`.
    pub fn display<'a>(&'a self, cat: &'a Catalog) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, cat }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a GradedPoly,
    cat: &'a Catalog,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.poly.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut parts = Vec::new();
            if !abs.is_one() || m.is_one() {
                parts.push(abs.to_string());
            }
            for &(v, e) in m.factors() {
                if e == 1 {
                    parts.push(self.cat.name(v).to_string());
                } else {
                    parts.push(format!("{}^{}", self.cat.name(v), e));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(m, c)| (m, c.to_string()))).finish()
    }
}

impl AddAssign<&GradedPoly> for GradedPoly {
    fn add_assign(&mut self, rhs: &GradedPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&GradedPoly> for GradedPoly {
    fn sub_assign(&mut self, rhs: &GradedPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add for &GradedPoly {
    type Output = GradedPoly;
    fn add(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &GradedPoly {
    type Output = GradedPoly;
    fn sub(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for GradedPoly {
    type Output = GradedPoly;
    fn add(mut self, rhs: GradedPoly) -> GradedPoly {
        self += &rhs;
        self
    }
}

impl Sub for GradedPoly {
    type Output = GradedPoly;
    fn sub(mut self, rhs: GradedPoly) -> GradedPoly {
        self -= &rhs;
        self
    }
}

impl Neg for &GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        GradedPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        -&self
    }
}

impl Mul for &GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: &GradedPoly) -> GradedPoly {
        self.mul_impl(rhs)
    }
}

impl Mul for GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: GradedPoly) -> GradedPoly {
        self.mul_impl(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalgebra::PhaseSpaceLayout;

    fn cat() -> Catalog {
        PhaseSpaceLayout {
            pairs: vec![
                ("p1".into(), "q1".into(), false),
                ("a".into(), "b".into(), true),
                ("e".into(), "f".into(), true),
            ],
            stage_parities: vec![],
        }
        .catalog()
    }

    fn v(cat: &Catalog, n: &str) -> GradedPoly {
        GradedPoly::var(cat.by_name(n).unwrap())
    }

    #[test]
    fn identity_and_odd_sign() {
        let c = cat();
        let x = &v(&c, "p1") + &v(&c, "a");
        assert_eq!(&GradedPoly::one() * &x, x);
        let ab = &v(&c, "a") * &v(&c, "b");
        let ba = &v(&c, "b") * &v(&c, "a");
        assert_eq!(ab, -ba);
        assert!((&v(&c, "a") * &v(&c, "a")).is_zero());
    }

    #[test]
    fn distributive_expansion() {
        let c = cat();
        let (p, q) = (v(&c, "p1"), v(&c, "q1"));
        let lhs = &(&p + &q) * &(&p - &q);
        // expand term by term
        let expected = &(&(&(&p * &p) - &(&p * &q)) + &(&q * &p)) - &(&q * &q);
        assert_eq!(lhs, expected);
        assert_eq!(lhs, &(&p * &p) - &(&q * &q));
    }

    #[test]
    fn right_derivative_sign() {
        let c = cat();
        // theta_c = a, theta_q = e ; d_R/de (a e) = a, d_R/de (e a) = -a
        let (a, e) = (v(&c, "a"), v(&c, "e"));
        let ev = c.by_name("e").unwrap();
        assert_eq!((&a * &e).right_deriv(ev), a);
        assert_eq!((&e * &a).right_deriv(ev), -&a);
        assert_eq!((&e * &a).left_deriv(ev), a);
    }

    #[test]
    fn eval_even_examples() {
        let c = cat();
        let (p, q) = (v(&c, "p1"), v(&c, "q1"));
        let pv = c.by_name("p1").unwrap();
        let qv = c.by_name("q1").unwrap();
        let x = &(&p * &p) - &(&q * &q);
        let point = |w: Var| {
            if w == pv {
                Some(Coeff::from_integer(2.into()))
            } else if w == qv {
                Some(Coeff::from_integer(1.into()))
            } else {
                None
            }
        };
        assert_eq!(x.eval_even(&point).unwrap(), GradedPoly::integer(3));
        assert!(GradedPoly::zero().eval_even(&point).unwrap().is_zero());
        let y = &v(&c, "a") * &p;
        let three = |w: Var| (w == pv).then(|| Coeff::from_integer(3.into()));
        assert_eq!(y.eval_even(&three).unwrap(), v(&c, "a").scale_int(3));
        assert!(matches!(q.eval_even(&three), Err(Error::MissingAssignment(_))));
    }

    #[test]
    fn derivation_sign_rule() {
        let c = cat();
        let (a, e, p) = (v(&c, "a"), v(&c, "e"), v(&c, "p1"));
        let av = c.by_name("a").unwrap();
        let ev = c.by_name("e").unwrap();
        // odd derivation D a = p, D e = 1
        let d = |w: Var| {
            if w == av {
                Some(p.clone())
            } else if w == ev {
                Some(GradedPoly::one())
            } else {
                None
            }
        };
        let lhs = (&a * &e).apply_derivation(true, &d);
        let rhs = &(&p * &e) - &a;
        assert_eq!(lhs, rhs);
        let sq = (&p * &p).apply_derivation(false, &|w| (w == c.by_name("p1").unwrap()).then(GradedPoly::one));
        assert_eq!(sq, p.scale_int(2));
    }
}
