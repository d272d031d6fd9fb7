//! Symmetric Sp(2) tensors with polynomial entries.
//!
//! A rank-`n` tensor is stored through its `n + 1` independent components
//! `X_(r,t)`, `r + t = n`, where `r` counts index value 1 and `t` index value
//! 2. Every operation below is written in this component form; the test
//! suite checks each one against the literal sum over index tuples.
//!
//! Sign rule for the bracket: Sp(2) indices carry no parity, so
//! `[X, Y]_(r,t)` is assembled from the scalar right/left derivatives of the
//! components exactly as the scalar bracket is, and the `∘` weights are
//! applied afterwards. With this rule antisymmetry, the Leibniz rule over `∘`
//! and the graded Jacobi identity hold for odd and even arguments alike.

use std::ops::{Add, Neg, Sub};

use num_traits::Zero;

use crate::superalgebra::{binomial, sign, Catalog, Coeff, GradedPoly, Monomial, Sector};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Sp2Tensor {
    comps: Vec<GradedPoly>,
}

impl Sp2Tensor {
    /// Components indexed by `r = 0..=n`.
    pub fn from_components(comps: Vec<GradedPoly>) -> Self {
        assert!(!comps.is_empty(), "a tensor has at least one component");
        Sp2Tensor { comps }
    }

    pub fn zero(rank: usize) -> Self {
        Sp2Tensor {
            comps: vec![GradedPoly::zero(); rank + 1],
        }
    }

    pub fn scalar(x: GradedPoly) -> Self {
        Sp2Tensor { comps: vec![x] }
    }

    /// Rank-1 tensor `(X^1, X^2)`.
    pub fn vector(x1: GradedPoly, x2: GradedPoly) -> Self {
        // component (1,0) is X^1, stored at r = 1
        Sp2Tensor { comps: vec![x2, x1] }
    }

    pub fn rank(&self) -> usize {
        self.comps.len() - 1
    }

    /// Component `X_(r, n - r)`.
    pub fn comp(&self, r: usize) -> &GradedPoly {
        &self.comps[r]
    }

    pub fn comp_mut(&mut self, r: usize) -> &mut GradedPoly {
        &mut self.comps[r]
    }

    /// Component `X_(r,t)`; zero when `(r,t)` is out of range.
    pub fn get(&self, r: i64, t: i64) -> GradedPoly {
        if r < 0 || t < 0 || (r + t) as usize != self.rank() {
            return GradedPoly::zero();
        }
        self.comps[r as usize].clone()
    }

    /// Upper-index component `X^a` of a rank-1 tensor, `a` in `{1, 2}`.
    pub fn upper(&self, a: usize) -> &GradedPoly {
        assert_eq!(self.rank(), 1);
        match a {
            1 => &self.comps[1],
            2 => &self.comps[0],
            _ => panic!("Sp(2) index must be 1 or 2"),
        }
    }

    pub fn components(&self) -> &[GradedPoly] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(GradedPoly::is_zero)
    }

    /// Common parity of the nonzero components.
    pub fn parity(&self) -> Option<bool> {
        let mut out = None;
        for c in self.comps.iter().filter(|c| !c.is_zero()) {
            let p = c.parity()?;
            if out.is_some_and(|q| q != p) {
                return None;
            }
            out = Some(p);
        }
        out
    }

    pub fn parity_parts(&self) -> (Sp2Tensor, Sp2Tensor) {
        let (even, odd): (Vec<_>, Vec<_>) = self.comps.iter().map(GradedPoly::parity_parts).unzip();
        (Sp2Tensor { comps: even }, Sp2Tensor { comps: odd })
    }

    pub fn map(&self, f: impl Fn(&GradedPoly) -> GradedPoly) -> Self {
        Sp2Tensor {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn try_map<E>(&self, f: impl Fn(&GradedPoly) -> Result<GradedPoly, E>) -> Result<Self, E> {
        Ok(Sp2Tensor {
            comps: self.comps.iter().map(f).collect::<Result<_, E>>()?,
        })
    }

    pub fn filter(&self, pred: impl Fn(&Monomial) -> bool) -> Self {
        self.map(|c| c.filter(&pred))
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn scale_ratio(&self, num: i64, den: i64) -> Self {
        self.map(|x| x.scale_ratio(num, den))
    }

    fn check_rank(&self, other: &Sp2Tensor) {
        assert_eq!(self.rank(), other.rank(), "tensor ranks differ");
    }
}

impl Add for &Sp2Tensor {
    type Output = Sp2Tensor;
    fn add(self, rhs: &Sp2Tensor) -> Sp2Tensor {
        self.check_rank(rhs);
        Sp2Tensor {
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Sp2Tensor {
    type Output = Sp2Tensor;
    fn sub(self, rhs: &Sp2Tensor) -> Sp2Tensor {
        self.check_rank(rhs);
        Sp2Tensor {
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Sp2Tensor {
    type Output = Sp2Tensor;
    fn neg(self) -> Sp2Tensor {
        self.map(|c| -c)
    }
}

fn ratio(num: u64, den: u64) -> Coeff {
    Coeff::new(num.into(), den.into())
}

/// Symmetric product `X ∘ Y`.
///
/// `(X∘Y)_(r,t) = Σ C(r,r1) C(t,t1) / C(n,q) · X_(r1,t1) Y_(r-r1,t-t1)` with
/// `q = rank X`, `n = q + rank Y`.
pub fn sym_product(x: &Sp2Tensor, y: &Sp2Tensor) -> Sp2Tensor {
    let q = x.rank() as u32;
    let p = y.rank() as u32;
    let n = p + q;
    let norm = binomial(n, q);
    let mut out = Sp2Tensor::zero(n as usize);
    for r in 0..=n {
        let t = n - r;
        let mut acc = GradedPoly::zero();
        for r1 in r.saturating_sub(p)..=r.min(q) {
            let t1 = q - r1;
            if t1 > t {
                continue;
            }
            let xa = x.comp(r1 as usize);
            let yb = y.comp((r - r1) as usize);
            if xa.is_zero() || yb.is_zero() {
                continue;
            }
            let w = ratio(binomial(r, r1) * binomial(t, t1), norm);
            acc += &(xa * yb).scale(&w);
        }
        out.comps[r as usize] = acc;
    }
    out
}

/// A pair of linear maps `u^1, u^2` on polynomials.
pub trait PairOperator {
    /// Applies `u^a`, `a ∈ {1, 2}`.
    fn apply(&self, a: usize, x: &GradedPoly) -> GradedPoly;
}

impl<F: Fn(usize, &GradedPoly) -> GradedPoly> PairOperator for F {
    fn apply(&self, a: usize, x: &GradedPoly) -> GradedPoly {
        self(a, x)
    }
}

/// `uX`: rank `n` → rank `n + 1`,
/// `(uX)_(r,t) = [r u^1 X_(r-1,t) + t u^2 X_(r,t-1)] / (n + 1)`.
pub fn lift(u: &dyn PairOperator, x: &Sp2Tensor) -> Sp2Tensor {
    let n = x.rank();
    let mut out = Sp2Tensor::zero(n + 1);
    let u1: Vec<GradedPoly> = x.comps.iter().map(|c| u.apply(1, c)).collect();
    let u2: Vec<GradedPoly> = x.comps.iter().map(|c| u.apply(2, c)).collect();
    for r in 0..=n + 1 {
        let t = n + 1 - r;
        let mut acc = GradedPoly::zero();
        if r > 0 {
            // X_(r-1,t) is stored at index r-1
            acc += &u1[r - 1].scale_int(r as i64);
        }
        if t > 0 {
            acc += &u2[r].scale_int(t as i64);
        }
        out.comps[r] = acc.scale_ratio(1, n as i64 + 1);
    }
    out
}

/// `σX`: rank `n` → rank `n - 1`, `(σX)_(r,t) = s_1 X_(r+1,t) + s_2 X_(r,t+1)`;
/// zero on scalars.
pub fn contract(s: &dyn PairOperator, x: &Sp2Tensor) -> Sp2Tensor {
    let n = x.rank();
    if n == 0 {
        return Sp2Tensor::zero(0);
    }
    let mut out = Sp2Tensor::zero(n - 1);
    for r in 0..n {
        let a = s.apply(1, &x.comps[r + 1]);
        let b = s.apply(2, &x.comps[r]);
        out.comps[r] = &a + &b;
    }
    out
}

fn deriv_tensor(x: &Sp2Tensor, f: impl Fn(&GradedPoly) -> GradedPoly) -> Sp2Tensor {
    x.map(f)
}

fn tensor_vars(x: &Sp2Tensor) -> Vec<crate::superalgebra::Var> {
    let mut vs: Vec<_> = x.comps.iter().flat_map(|c| c.variables()).collect();
    vs.sort();
    vs.dedup();
    vs
}

fn half_tensor(cat: &Catalog, x: &Sp2Tensor, y: &Sp2Tensor, sector: Option<Sector>) -> Sp2Tensor {
    let mut out = Sp2Tensor::zero(x.rank() + y.rank());
    if x.is_zero() || y.is_zero() {
        return out;
    }
    let yvars = tensor_vars(y);
    for q in tensor_vars(x) {
        let Some(pair) = cat.pair_with_q(q) else { continue };
        if sector.is_some_and(|s| s != pair.sector) || yvars.binary_search(&pair.p).is_err() {
            continue;
        }
        let dx = deriv_tensor(x, |c| c.right_deriv(q));
        let dy = deriv_tensor(y, |c| c.left_deriv(pair.p));
        out = &out + &sym_product(&dx, &dy).scale(&pair.weight);
    }
    out
}

fn graded_tensor_bracket(cat: &Catalog, x: &Sp2Tensor, y: &Sp2Tensor, sector: Option<Sector>) -> Sp2Tensor {
    let (x0, x1) = x.parity_parts();
    let (y0, y1) = y.parity_parts();
    let mut out = Sp2Tensor::zero(x.rank() + y.rank());
    for (xp, xs) in [(false, &x0), (true, &x1)] {
        for (yp, ys) in [(false, &y0), (true, &y1)] {
            if xs.is_zero() || ys.is_zero() {
                continue;
            }
            out = &out + &half_tensor(cat, xs, ys, sector);
            let back = half_tensor(cat, ys, xs, sector);
            out = &out - &back.scale_ratio(sign(xp, yp), 1);
        }
    }
    out
}

/// `[X, Y] = dX/dQ ∘ dY/dP - (-1)^{ε(X)ε(Y)} dY/dQ ∘ dX/dP`.
pub fn tensor_bracket(cat: &Catalog, x: &Sp2Tensor, y: &Sp2Tensor) -> Sp2Tensor {
    graded_tensor_bracket(cat, x, y, None)
}

/// Original-phase-space part of [`tensor_bracket`].
pub fn xi_tensor_bracket(cat: &Catalog, x: &Sp2Tensor, y: &Sp2Tensor) -> Sp2Tensor {
    graded_tensor_bracket(cat, x, y, Some(Sector::Xi))
}

/// `[X, Y]_⋄ = dX/dQ^{A'} ∘ dY/dP_{A'}` over ghost-sector pairs.
pub fn diamond_tensor_bracket(cat: &Catalog, x: &Sp2Tensor, y: &Sp2Tensor) -> Sp2Tensor {
    half_tensor(cat, x, y, Some(Sector::Ghost))
}

/// Canonical index tuple `(1,…,1,2,…,2)` with `r` ones and `t` twos.
pub fn canonical_indices(r: usize, t: usize) -> Vec<u8> {
    let mut v = vec![1u8; r];
    v.extend(std::iter::repeat_n(2u8, t));
    v
}

/// `X_{{a1…an}} = X_{a1…an} + cyclic permutations`, read off on the
/// canonical tuple of every component. `family` must be defined on all
/// index tuples of length `rank`.
pub fn cyclic_symmetrize(rank: usize, family: &dyn Fn(&[u8]) -> GradedPoly) -> Sp2Tensor {
    let mut out = Sp2Tensor::zero(rank);
    for r in 0..=rank {
        let base = canonical_indices(r, rank - r);
        if rank == 0 {
            out.comps[0] = family(&base);
            continue;
        }
        let mut acc = GradedPoly::zero();
        for k in 0..rank {
            let mut rotated = base.clone();
            rotated.rotate_left(k);
            acc += &family(&rotated);
        }
        out.comps[r] = acc;
    }
    out
}

/// True when the tensor is a single scalar equal to zero, or all zero.
pub fn is_zero_tensor(x: &Sp2Tensor) -> bool {
    x.is_zero()
}

impl Default for Sp2Tensor {
    fn default() -> Self {
        Sp2Tensor::zero(0)
    }
}

/// Number of monomials over all components.
pub fn term_count(x: &Sp2Tensor) -> usize {
    x.comps.iter().map(GradedPoly::len).sum()
}

/// Coefficient-wise equality test that tolerates differing zero padding.
pub fn coefficient_of(x: &Sp2Tensor, r: usize, m: &Monomial) -> Coeff {
    if r > x.rank() {
        return Coeff::zero();
    }
    x.comp(r).coefficient(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalgebra::{poisson_bracket, PhaseSpaceLayout};

    fn cat() -> Catalog {
        PhaseSpaceLayout {
            pairs: vec![("p1".into(), "q1".into(), false), ("a".into(), "b".into(), true)],
            stage_parities: vec![vec![false]],
        }
        .catalog()
    }

    fn v(c: &Catalog, n: &str) -> GradedPoly {
        GradedPoly::var(c.by_name(n).unwrap())
    }

    #[test]
    fn unit_and_rank_one_product() {
        let c = cat();
        let x = Sp2Tensor::vector(v(&c, "p1"), v(&c, "q1"));
        assert_eq!(sym_product(&x, &Sp2Tensor::scalar(GradedPoly::one())), x);
        let (x1, x2, y1, y2) = (v(&c, "p1"), v(&c, "q1"), v(&c, "p1").scale_int(3), v(&c, "q1").scale_int(5));
        let xy = sym_product(&Sp2Tensor::vector(x1.clone(), x2.clone()), &Sp2Tensor::vector(y1.clone(), y2.clone()));
        assert_eq!(xy.get(2, 0), &x1 * &y1);
        assert_eq!(xy.get(1, 1), (&(&x1 * &y2) + &(&x2 * &y1)).scale_ratio(1, 2));
        assert_eq!(xy.get(0, 2), &x2 * &y2);
    }

    #[test]
    fn odd_scalars_anticommute() {
        let c = cat();
        let (a, b) = (Sp2Tensor::scalar(v(&c, "a")), Sp2Tensor::scalar(v(&c, "b")));
        assert_eq!(sym_product(&a, &b), -&sym_product(&b, &a));
    }

    #[test]
    fn scalar_bracket_reduces_to_poisson() {
        let c = cat();
        let x = &v(&c, "q1") * &v(&c, "q1");
        let y = &v(&c, "p1") * &v(&c, "a");
        let t = tensor_bracket(&c, &Sp2Tensor::scalar(x.clone()), &Sp2Tensor::scalar(y.clone()));
        assert_eq!(t.comp(0), &poisson_bracket(&c, &x, &y));
        let one = Sp2Tensor::scalar(GradedPoly::one());
        assert!(diamond_tensor_bracket(&c, &Sp2Tensor::scalar(x), &one).is_zero());
    }

    #[test]
    fn lift_components() {
        let c = cat();
        let u = |a: usize, x: &GradedPoly| if a == 1 { x.scale_int(2) } else { x.scale_int(7) };
        let x0 = Sp2Tensor::scalar(v(&c, "p1"));
        let l0 = lift(&u, &x0);
        assert_eq!(l0.get(1, 0), v(&c, "p1").scale_int(2));
        assert_eq!(l0.get(0, 1), v(&c, "p1").scale_int(7));
        let x1 = Sp2Tensor::vector(v(&c, "p1"), v(&c, "q1"));
        let l1 = lift(&u, &x1);
        let expected = (&v(&c, "q1").scale_int(2) + &v(&c, "p1").scale_int(7)).scale_ratio(1, 2);
        assert_eq!(l1.get(1, 1), expected);
        let zero = |_: usize, _: &GradedPoly| GradedPoly::zero();
        assert!(lift(&zero, &x1).is_zero());
    }

    #[test]
    fn contract_components() {
        let c = cat();
        let s = |a: usize, x: &GradedPoly| if a == 1 { x.scale_int(2) } else { x.scale_int(3) };
        assert!(contract(&s, &Sp2Tensor::scalar(v(&c, "p1"))).is_zero());
        let x = Sp2Tensor::vector(v(&c, "p1"), v(&c, "q1"));
        let out = contract(&s, &x);
        assert_eq!(out.rank(), 0);
        assert_eq!(out.comp(0), &(&v(&c, "p1").scale_int(2) + &v(&c, "q1").scale_int(3)));
    }

    #[test]
    fn cyclic_symmetrization() {
        let c = cat();
        let f = v(&c, "p1");
        let g = v(&c, "q1");
        let one = cyclic_symmetrize(1, &|idx: &[u8]| if idx[0] == 1 { f.clone() } else { g.clone() });
        assert_eq!(one, Sp2Tensor::vector(f.clone(), g.clone()));
        let two = cyclic_symmetrize(2, &|idx: &[u8]| match idx {
            [1, 2] => f.clone(),
            [2, 1] => g.clone(),
            _ => GradedPoly::zero(),
        });
        assert_eq!(two.get(1, 1), &f + &g);
        let count = cyclic_symmetrize(3, &|_: &[u8]| GradedPoly::one());
        assert!(count.components().iter().all(|x| *x == GradedPoly::integer(3)));
    }
}
