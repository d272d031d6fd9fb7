//! The linear part `Omega_1` of the charges and the operators built from it.
//!
//! `Omega_1^a` is assembled from the generator action of `delta^a` on the
//! ghost momenta `P` and `lambda`, so that `delta^a = {Omega_1^a, .}_⋄`
//! reproduces that action exactly. Tensor-valued operators act on `S^n` via
//! [`lift`], which carries a `1/(n+1)` normalization; in particular the
//! rank-2 objects `delta Omega_1`, `Q` and `B W` are half the symmetrized
//! scalar combinations `X^{ab} + X^{ba}`.

use crate::model::Model;
use crate::sp2tensor::{lift, xi_tensor_bracket, Sp2Tensor};
use crate::superalgebra::{
    binomial, diamond_bracket, xi_bracket, Catalog, Coeff, GradedPoly, Var, VarKind,
};
use crate::{Error, Result};

/// Reduced coefficient functions `M_{alpha_s} ∈ S^s`, `N_{alpha_s} ∈ S^{s-1}`.
///
/// Indexed `[s][alpha]` for `s = 0..=L`; stages 0 and 1 are always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Omega1Params {
    pub m: Vec<Vec<Sp2Tensor>>,
    pub n: Vec<Vec<Sp2Tensor>>,
}

fn ratio(num: i64, den: i64) -> Coeff {
    Coeff::new(num.into(), den.into())
}

/// Tensor of the components of `P_{alpha_s}`.
pub fn p_tensor(cat: &Catalog, s: usize, alpha: usize) -> Sp2Tensor {
    Sp2Tensor::from_components(
        (0..=s as u32 + 1).map(|r| GradedPoly::var(cat.ghost_p(s as u32, alpha as u32, r))).collect(),
    )
}

/// Tensor of the components of `lambda_{alpha_s}`.
pub fn lambda_tensor(cat: &Catalog, s: usize, alpha: usize) -> Sp2Tensor {
    Sp2Tensor::from_components(
        (0..=s as u32).map(|r| GradedPoly::var(cat.lambda(s as u32, alpha as u32, r))).collect(),
    )
}

/// `sum_{a_1..a_n} X_{a_1..a_n} Y^{a_1..a_n}` for components `X`, `Y`.
pub fn full_contraction(x: &Sp2Tensor, y: &Sp2Tensor) -> GradedPoly {
    let n = x.rank() as u32;
    let mut out = GradedPoly::zero();
    for r in 0..=n {
        let (a, b) = (x.comp(r as usize), y.comp(r as usize));
        if a.is_zero() || b.is_zero() {
            continue;
        }
        out += &(a * b).scale_int(binomial(n, r) as i64);
    }
    out
}

fn pick(a: usize) -> impl Fn(usize, &GradedPoly) -> GradedPoly {
    move |b, x| if a == b { x.clone() } else { GradedPoly::zero() }
}

impl Omega1Params {
    pub fn zero(model: &Model) -> Self {
        let stages = model.order() + 1;
        Omega1Params {
            m: (0..stages).map(|s| vec![Sp2Tensor::zero(s); model.stage_size(s)]).collect(),
            n: (0..stages)
                .map(|s| vec![Sp2Tensor::zero(s.saturating_sub(1)); model.stage_size(s)])
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().chain(&self.n).flatten().all(Sp2Tensor::is_zero)
    }

    /// `M^a_{alpha_s} ∈ S^{s+1}`: `M^1_(r,t) = r/(s+1) M_(r-1,t)`.
    pub fn expanded_m(&self, a: usize, s: usize, alpha: usize) -> Sp2Tensor {
        lift(&pick(a), &self.m[s][alpha])
    }

    /// `N^a_{alpha_s} ∈ S^s`: `N^1_(r,t) = r/(s+1) N_(r-1,t)`; zero for `s = 0`.
    pub fn expanded_n(&self, a: usize, s: usize, alpha: usize) -> Sp2Tensor {
        if s == 0 {
            return Sp2Tensor::zero(0);
        }
        lift(&pick(a), &self.n[s][alpha]).scale_ratio(s as i64, s as i64 + 1)
    }

    /// Reduced `M` from the pair `(M^1, M^2)`, verifying that the pair has
    /// the reduced shape.
    pub fn reduce_m(s: usize, m1: &Sp2Tensor, m2: &Sp2Tensor) -> Result<Sp2Tensor> {
        let mut red = Sp2Tensor::zero(s);
        for r in 0..=s {
            let x = m1.comp(r + 1) + m2.comp(r);
            *red.comp_mut(r) = x.scale_ratio(s as i64 + 1, s as i64 + 2);
        }
        let ok = lift(&pick(1), &red) == *m1 && lift(&pick(2), &red) == *m2;
        if !ok {
            return Err(Error::Grading(format!("stage-{s} M^a is not of the reduced form")));
        }
        Ok(red)
    }

    /// Reduced `N` from `(N^1, N^2)`, verifying the reduced shape.
    pub fn reduce_n(s: usize, n1: &Sp2Tensor, n2: &Sp2Tensor) -> Result<Sp2Tensor> {
        if s == 0 {
            if !(n1.is_zero() && n2.is_zero()) {
                return Err(Error::Grading("stage-0 N^a must vanish".into()));
            }
            return Ok(Sp2Tensor::zero(0));
        }
        let mut red = Sp2Tensor::zero(s - 1);
        for r in 0..s {
            *red.comp_mut(r) = n1.comp(r + 1) + n2.comp(r);
        }
        let scale = |x: Sp2Tensor| x.scale_ratio(s as i64, s as i64 + 1);
        let ok = scale(lift(&pick(1), &red)) == *n1 && scale(lift(&pick(2), &red)) == *n2;
        if !ok {
            return Err(Error::Grading(format!("stage-{s} N^a is not of the reduced form")));
        }
        Ok(red)
    }

    /// Checks shapes, gradings and the stage dependency restriction.
    pub fn validate(&self, model: &Model) -> Result<()> {
        let cat = model.catalog();
        let l = model.order();
        if self.m.len() != l + 1 || self.n.len() != l + 1 {
            return Err(Error::Grading("parameter stage count differs from the model".into()));
        }
        for s in 0..=l {
            for alpha in 0..model.stage_size(s) {
                let eps = model.parity(s, alpha) ^ (s % 2 == 1);
                let m = &self.m[s][alpha];
                let n = &self.n[s][alpha];
                if m.rank() != s || n.rank() != s.saturating_sub(1) {
                    return Err(Error::Grading(format!("stage-{s} parameter rank")));
                }
                if s < 2 && !(m.is_zero() && n.is_zero()) {
                    return Err(Error::Grading(format!("stage-{s} parameters must vanish")));
                }
                let checks = [(m, eps, -(s as i32)), (n, !eps, -(s as i32) - 1)];
                for (x, parity, ngh) in checks {
                    for comp in x.components() {
                        check_param_poly(cat, comp, parity, ngh, s)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// The closed-form second-stage solution
    /// `M^a = 1/6 (P_{alpha_0|a_1} P_{beta_0|a_2} delta^a_{a_3} + cycl.) A^{beta_0 alpha_0}_{alpha_2} (-1)^{eps_{alpha_0}}`,
    /// `N^a = 1/6 lambda_{alpha_0} P_{beta_0|{a_1} delta^a_{a_2}} A^{beta_0 alpha_0}_{alpha_2} (-1)^{eps_{alpha_0}}`.
    pub fn closed_form_l2(model: &Model) -> Result<Self> {
        if model.order() != 2 {
            return Err(Error::MissingStage("the closed form applies to second-stage models".into()));
        }
        let cat = model.catalog();
        let mut out = Omega1Params::zero(model);
        let p_comp = |alpha: usize, idx: u8| GradedPoly::var(cat.ghost_p(0, alpha as u32, u32::from(idx == 1)));
        let lam = |alpha: usize| GradedPoly::var(cat.lambda(0, alpha as u32, 0));
        let delta = |a: usize, b: u8| a == b as usize;
        for gamma in 0..model.stage_size(2) {
            let mut ms = Vec::new();
            let mut ns = Vec::new();
            for a in 1..=2usize {
                let m_fam = |idx: &[u8]| {
                    let mut acc = GradedPoly::zero();
                    if !delta(a, idx[2]) {
                        return acc;
                    }
                    for alpha in 0..model.stage_size(0) {
                        for beta in 0..model.stage_size(0) {
                            let coef = model.a(0, beta, alpha, gamma);
                            if coef.is_zero() {
                                continue;
                            }
                            let sgn = if model.parity(0, alpha) { -1 } else { 1 };
                            let term = &(&p_comp(alpha, idx[0]) * &p_comp(beta, idx[1])) * coef;
                            acc += &term.scale_int(sgn);
                        }
                    }
                    acc
                };
                let n_fam = |idx: &[u8]| {
                    let mut acc = GradedPoly::zero();
                    for alpha in 0..model.stage_size(0) {
                        for beta in 0..model.stage_size(0) {
                            let coef = model.a(0, beta, alpha, gamma);
                            if coef.is_zero() || !delta(a, idx[1]) {
                                continue;
                            }
                            let sgn = if model.parity(0, alpha) { -1 } else { 1 };
                            let term = &(&lam(alpha) * &p_comp(beta, idx[0])) * coef;
                            acc += &term.scale_int(sgn);
                        }
                    }
                    acc
                };
                let m = crate::sp2tensor::cyclic_symmetrize(3, &m_fam).scale_ratio(1, 6);
                let n = crate::sp2tensor::cyclic_symmetrize(2, &n_fam).scale_ratio(1, 6);
                ms.push(m);
                ns.push(n);
            }
            out.m[2][gamma] = Self::reduce_m(2, &ms[0], &ms[1])?;
            out.n[2][gamma] = Self::reduce_n(2, &ns[0], &ns[1])?;
        }
        Ok(out)
    }
}

fn check_param_poly(cat: &Catalog, x: &GradedPoly, parity: bool, ngh: i32, s: usize) -> Result<()> {
    for (m, _) in x.terms() {
        let mut ghost_free = true;
        let mut total = 0;
        for &(v, e) in m.factors() {
            let d = cat.descriptor(v);
            match d.kind {
                VarKind::MomentumP | VarKind::Lambda => {
                    ghost_free = false;
                    if d.stage as usize + 2 > s {
                        return Err(Error::Grading(format!(
                            "stage-{s} parameter depends on {}",
                            d.name
                        )));
                    }
                }
                VarKind::Xi => {}
                _ => return Err(Error::Grading(format!("stage-{s} parameter depends on {}", d.name))),
            }
            total += d.ngh * e as i32;
        }
        if ghost_free {
            return Err(Error::Grading(format!("stage-{s} parameter does not vanish at P = lambda = 0")));
        }
        if m.parity() != parity || total != ngh {
            return Err(Error::Grading(format!("stage-{s} parameter has wrong parity or ghost number")));
        }
    }
    Ok(())
}

/// `Omega_1`, its parameter-free part, and the operators derived from it.
#[derive(Clone, Debug)]
pub struct Koszul<'m> {
    model: &'m Model,
    params: Omega1Params,
    omega1: Sp2Tensor,
    omega1_zero: Sp2Tensor,
}

impl<'m> Koszul<'m> {
    pub fn new(model: &'m Model, params: Omega1Params) -> Result<Self> {
        params.validate(model)?;
        let zero = Omega1Params::zero(model);
        let omega1 = assemble(model, &params);
        let omega1_zero = assemble(model, &zero);
        Ok(Koszul {
            model,
            params,
            omega1,
            omega1_zero,
        })
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn catalog(&self) -> &'m Catalog {
        self.model.catalog()
    }

    pub fn params(&self) -> &Omega1Params {
        &self.params
    }

    pub fn omega1(&self) -> &Sp2Tensor {
        &self.omega1
    }

    pub fn omega1_zero(&self) -> &Sp2Tensor {
        &self.omega1_zero
    }

    /// `delta^a v` on a generator, from the component table.
    pub fn delta_generator(&self, a: usize, v: Var) -> Option<GradedPoly> {
        generator_delta(self.model, &self.params, a, v)
    }

    /// `delta^a x = {Omega_1^a, x}_⋄`.
    pub fn delta_scalar(&self, a: usize, x: &GradedPoly) -> GradedPoly {
        diamond_bracket(self.catalog(), self.omega1.upper(a), x)
    }

    pub fn delta(&self, x: &Sp2Tensor) -> Sp2Tensor {
        lift(&|a: usize, y: &GradedPoly| self.delta_scalar(a, y), x)
    }

    /// `A^a x = {Omega_1^a, x}_xi - (-1)^{eps(x)} {x, Omega_1^a}_⋄`.
    pub fn operator_a_scalar(&self, a: usize, x: &GradedPoly) -> GradedPoly {
        let cat = self.catalog();
        let om = self.omega1.upper(a);
        let (even, odd) = x.parity_parts();
        let mut out = xi_bracket(cat, om, x);
        out -= &diamond_bracket(cat, &even, om);
        out += &diamond_bracket(cat, &odd, om);
        out
    }

    pub fn operator_a(&self, x: &Sp2Tensor) -> Sp2Tensor {
        lift(&|a: usize, y: &GradedPoly| self.operator_a_scalar(a, y), x)
    }

    /// `B^a x = {x, Omega_1^a|_{M=N=0}}_⋄`.
    pub fn operator_b_scalar(&self, a: usize, x: &GradedPoly) -> GradedPoly {
        diamond_bracket(self.catalog(), x, self.omega1_zero.upper(a))
    }

    pub fn operator_b(&self, x: &Sp2Tensor) -> Sp2Tensor {
        lift(&|a: usize, y: &GradedPoly| self.operator_b_scalar(a, y), x)
    }

    /// `F^{ab} = {Omega_1^a, Omega_1^b}_xi`.
    pub fn compute_f(&self) -> Sp2Tensor {
        xi_tensor_bracket(self.catalog(), &self.omega1, &self.omega1)
    }

    /// `Q`: the parameter-free part of `delta Omega_1`.
    pub fn compute_q(&self) -> Sp2Tensor {
        let cat = self.catalog();
        let om0 = &self.omega1_zero;
        lift(&|a: usize, y: &GradedPoly| diamond_bracket(cat, om0.upper(a), y), om0)
    }

    /// `W^a = sum_s (M^a_{alpha_s} c^{alpha_s} + N^a_{alpha_s} pi^{alpha_s})`.
    pub fn compute_w(&self) -> Sp2Tensor {
        compute_w(self.model, &self.params)
    }

    /// `delta W + Q + B W`.
    pub fn lowest_residual(&self) -> Sp2Tensor {
        let w = self.compute_w();
        &(&self.delta(&w) + &self.compute_q()) + &self.operator_b(&w)
    }
}

/// `W` for the given parameters.
pub fn compute_w(model: &Model, params: &Omega1Params) -> Sp2Tensor {
    let cat = model.catalog();
    let mut comps = [GradedPoly::zero(), GradedPoly::zero()];
    for s in 1..=model.order() {
        for alpha in 0..model.stage_size(s) {
            for (i, a) in [2usize, 1].into_iter().enumerate() {
                let c = ghost_c_tensor(cat, s, alpha);
                let pi = pi_tensor(cat, s, alpha);
                comps[i] += &full_contraction(&params.expanded_m(a, s, alpha), &c);
                comps[i] += &full_contraction(&params.expanded_n(a, s, alpha), &pi);
            }
        }
    }
    let [w2, w1] = comps;
    Sp2Tensor::vector(w1, w2)
}

fn ghost_c_tensor(cat: &Catalog, s: usize, alpha: usize) -> Sp2Tensor {
    Sp2Tensor::from_components(
        (0..=s as u32 + 1).map(|r| GradedPoly::var(cat.ghost_c(s as u32, alpha as u32, r))).collect(),
    )
}

fn pi_tensor(cat: &Catalog, s: usize, alpha: usize) -> Sp2Tensor {
    Sp2Tensor::from_components((0..=s as u32).map(|r| GradedPoly::var(cat.pi(s as u32, alpha as u32, r))).collect())
}

/// Component table of `delta^a` on `P_{alpha_s|(r,t)}` and `lambda_{alpha_s|(r,t)}`;
/// `None` on every other generator.
pub fn generator_delta(model: &Model, params: &Omega1Params, a: usize, v: Var) -> Option<GradedPoly> {
    let cat = model.catalog();
    let d = cat.descriptor(v);
    let (s, alpha) = (d.stage as usize, d.base as usize);
    let (r, t) = (d.sp2.0 as i64, d.sp2.1 as i64);
    let zsum = |prev: &dyn Fn(usize) -> GradedPoly| {
        let mut acc = GradedPoly::zero();
        for beta in 0..model.stage_size(s - 1) {
            let z = model.z(s - 1, beta, alpha);
            if !z.is_zero() {
                acc += &(&prev(beta) * z);
            }
        }
        acc
    };
    match d.kind {
        VarKind::MomentumP if s == 0 => {
            let k = if a == 1 { r } else { t };
            Some(model.constraint(alpha).scale_int(k))
        }
        VarKind::MomentumP => {
            // delta^1: r/(s+1) (P_{s-1|(r-1,t)} Z + M_(r-1,t)); delta^2 likewise in t
            let (k, rr) = if a == 1 { (r, r - 1) } else { (t, r) };
            if k == 0 {
                return Some(GradedPoly::zero());
            }
            let prev = |beta: usize| GradedPoly::var(cat.ghost_p(s as u32 - 1, beta as u32, rr as u32));
            let body = &zsum(&prev) + params.m[s][alpha].comp(rr as usize);
            Some(body.scale(&ratio(k, s as i64 + 1)))
        }
        VarKind::Lambda => {
            let (rp, tp) = (r, t);
            let p_term = if a == 1 {
                GradedPoly::var(cat.ghost_p(s as u32, alpha as u32, rp as u32))
            } else {
                -GradedPoly::var(cat.ghost_p(s as u32, alpha as u32, rp as u32 + 1))
            };
            let (k, rr) = if a == 1 { (rp, rp - 1) } else { (tp, rp) };
            if k == 0 || s == 0 {
                return Some(p_term);
            }
            let prev = |beta: usize| GradedPoly::var(cat.lambda(s as u32 - 1, beta as u32, rr as u32));
            let body = &zsum(&prev) - params.n[s][alpha].comp(rr as usize);
            Some(&p_term - &body.scale(&ratio(k, s as i64 + 1)))
        }
        _ => None,
    }
}

fn assemble(model: &Model, params: &Omega1Params) -> Sp2Tensor {
    let cat = model.catalog();
    let mut comps = Vec::new();
    for a in [2usize, 1] {
        let mut acc = GradedPoly::zero();
        for s in 0..=model.order() {
            for alpha in 0..model.stage_size(s) {
                for r in 0..=s as u32 + 1 {
                    let pv = cat.ghost_p(s as u32, alpha as u32, r);
                    let img = generator_delta(model, params, a, pv).unwrap_or_default();
                    let c = GradedPoly::var(cat.ghost_c(s as u32, alpha as u32, r));
                    acc += &(&img * &c).scale_int(binomial(s as u32 + 1, r) as i64);
                }
                for r in 0..=s as u32 {
                    let lv = cat.lambda(s as u32, alpha as u32, r);
                    let img = generator_delta(model, params, a, lv).unwrap_or_default();
                    let pi = GradedPoly::var(cat.pi(s as u32, alpha as u32, r));
                    acc += &(&img * &pi).scale_int(binomial(s as u32, r) as i64);
                }
            }
        }
        comps.push(acc);
    }
    Sp2Tensor::from_components(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn irreducible_omega1_literal() {
        let m = fixtures::model_a();
        let cat = m.catalog();
        let k = Koszul::new(&m, Omega1Params::zero(&m)).unwrap();
        let t = m.constraint(0);
        let c = |r| GradedPoly::var(cat.ghost_c(0, 0, r));
        let p = |r| GradedPoly::var(cat.ghost_p(0, 0, r));
        let pi = GradedPoly::var(cat.pi(0, 0, 0));
        // Omega^1 = T c^1 + P_2 pi, Omega^2 = T c^2 - P_1 pi
        assert_eq!(k.omega1().upper(1), &(&(t * &c(1)) + &(&p(0) * &pi)));
        assert_eq!(k.omega1().upper(2), &(&(t * &c(0)) - &(&p(1) * &pi)));
        assert_eq!(k.omega1().upper(1).ngh(cat), Some(1));
        assert_eq!(k.omega1().parity(), Some(true));
    }

    #[test]
    fn delta_reproduces_generator_table() {
        for (_, m, _) in fixtures::all() {
            let params = if m.order() == 2 {
                Omega1Params::closed_form_l2(&m).unwrap()
            } else {
                Omega1Params::zero(&m)
            };
            let k = Koszul::new(&m, params).unwrap();
            for v in m.catalog().vars() {
                for a in 1..=2 {
                    let lhs = k.delta_scalar(a, &GradedPoly::var(v));
                    let rhs = k.delta_generator(a, v).unwrap_or_default();
                    assert_eq!(lhs, rhs, "{} a={a}", m.catalog().name(v));
                }
            }
        }
    }

    #[test]
    fn abelian_residuals_vanish() {
        for m in [fixtures::model_a(), fixtures::model_b(), fixtures::model_d()] {
            let k = Koszul::new(&m, Omega1Params::zero(&m)).unwrap();
            assert!(k.compute_q().is_zero());
            assert!(k.compute_w().is_zero());
            assert!(k.lowest_residual().is_zero());
        }
    }

    #[test]
    fn params_grading_enforced() {
        let m = fixtures::model_c();
        let mut params = Omega1Params::zero(&m);
        params.m[2][0] = Sp2Tensor::from_components(vec![GradedPoly::one(); 3]);
        assert!(matches!(Koszul::new(&m, params), Err(Error::Grading(_))));
    }
}
