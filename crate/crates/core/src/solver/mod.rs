//! Order-by-order construction of the charges.
//!
//! The lowest order fixes the coefficient functions `M`, `N` of `Omega_1`
//! from `W = (I + delta^+ B)^{-1}(Y - delta^+ Q)`. The higher orders solve
//! `Pi = Upsilon - delta^+(F/2 + A Pi + [Pi, Pi]/2)` by iteration, truncated
//! at a maximal `(c, pi)`-degree.

use crate::koszul::{Koszul, Omega1Params};
use crate::model::Model;
use crate::resolve::{IndexSplit, PrimedCoordinates, Resolution};
use crate::sp2tensor::{tensor_bracket, term_count, Sp2Tensor};
use crate::superalgebra::{binomial, Catalog, Monomial, Var, VarKind};
use crate::{Error, Result};

mod restricted;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Free term of the lowest-order equation, rank 1, `delta`-closed.
    pub free_term_y: Option<Sp2Tensor>,
    /// Free term of the higher-order equation, rank 1, `delta`-closed.
    pub free_term_upsilon: Option<Sp2Tensor>,
    /// Largest `(c, pi)`-degree kept in `Pi` and checked in the residual.
    pub cutoff: u32,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { free_term_y: None, free_term_upsilon: None, cutoff: 6, max_iterations: 32 }
    }
}

/// Bookkeeping of the lowest-order solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowestReport {
    /// Applications of the lowest-order solution formula.
    pub rounds: usize,
    /// Largest number of nonzero terms `(-delta^+ B)^m w_0` met in a round.
    pub neumann_terms: usize,
    /// Stages solved by the restricted linear solve.
    pub gauge_fixed: Vec<usize>,
}

/// Bookkeeping of the higher-order solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HigherReport {
    pub iterations: usize,
    /// Largest `(c, pi)`-degree present in `Pi`.
    pub max_degree: u32,
    /// Whether terms above the cutoff were discarded.
    pub truncated: bool,
}

#[derive(Clone, Debug)]
pub struct ChargeExpansion {
    pub params: Omega1Params,
    pub omega1: Sp2Tensor,
    pub pi: Sp2Tensor,
    pub omega: Sp2Tensor,
    pub cutoff: u32,
    /// `[Omega, Omega]` restricted to `(c, pi)`-degree `<= cutoff`.
    pub residual: Sp2Tensor,
    /// Monomials of `[Omega, Omega]` above the cutoff.
    pub leftover_terms: usize,
}

impl ChargeExpansion {
    pub fn is_solved(&self) -> bool {
        self.residual.is_zero()
    }
}

/// Number of `c` and `pi` factors in a monomial.
pub fn ghost_degree(cat: &Catalog, m: &Monomial) -> u32 {
    m.degree_in(|v| matches!(cat.descriptor(v).kind, VarKind::GhostC | VarKind::Pi))
}

pub fn max_ghost_degree(cat: &Catalog, x: &Sp2Tensor) -> u32 {
    x.components().iter().flat_map(|c| c.terms().map(|(m, _)| ghost_degree(cat, m))).max().unwrap_or(0)
}

pub fn truncate(cat: &Catalog, x: &Sp2Tensor, cutoff: u32) -> Sp2Tensor {
    x.filter(|m| ghost_degree(cat, m) <= cutoff)
}

fn check_closed(k: &Koszul, x: &Sp2Tensor, what: &str) -> Result<()> {
    if x.rank() != 1 {
        return Err(Error::NotClosed(format!("{what} must have rank 1")));
    }
    let cat = k.catalog();
    let graded = x.components().iter().all(|c| c.is_zero() || (c.parity() == Some(true) && c.ngh(cat) == Some(1)));
    if !graded {
        return Err(Error::Grading(format!("{what} must be odd with ghost number 1")));
    }
    if !k.delta(x).is_zero() {
        return Err(Error::NotClosed(what.to_string()));
    }
    Ok(())
}

/// Stage-`s` coefficient functions read off from the `c`/`pi` derivatives of `W`.
fn extract_stage(model: &Model, w: &Sp2Tensor, s: usize) -> Result<(Vec<Sp2Tensor>, Vec<Sp2Tensor>)> {
    let cat = model.catalog();
    let (mut ms, mut ns) = (Vec::new(), Vec::new());
    for alpha in 0..model.stage_size(s) {
        let coeff = |a: usize, v: &dyn Fn(u32) -> Var, rank: u32| {
            Sp2Tensor::from_components(
                (0..=rank).map(|r| w.upper(a).right_deriv(v(r)).scale_ratio(1, binomial(rank, r) as i64)).collect(),
            )
        };
        let c = |r: u32| cat.ghost_c(s as u32, alpha as u32, r);
        let pi = |r: u32| cat.pi(s as u32, alpha as u32, r);
        ms.push(Omega1Params::reduce_m(s, &coeff(1, &c, s as u32 + 1), &coeff(2, &c, s as u32 + 1))?);
        ns.push(Omega1Params::reduce_n(s, &coeff(1, &pi, s as u32), &coeff(2, &pi, s as u32))?);
    }
    Ok((ms, ns))
}

/// Coefficient functions read off from `W`, checked against the reduced form.
pub fn extract_params(model: &Model, w: &Sp2Tensor) -> Result<Omega1Params> {
    let mut params = Omega1Params::zero(model);
    for s in 1..=model.order() {
        (params.m[s], params.n[s]) = extract_stage(model, w, s)?;
    }
    if crate::koszul::compute_w(model, &params) != *w {
        return Err(Error::Grading("W is not linear in c and pi with the expected coefficients".into()));
    }
    params.validate(model)?;
    Ok(params)
}

/// `(I + delta^+ B)^{-1} w0` as a terminating Neumann series.
fn neumann(res: &Resolution, k: &Koszul, w0: Sp2Tensor, limit: usize) -> Result<(Sp2Tensor, usize)> {
    let mut w = w0.clone();
    let mut term = w0;
    let mut terms = usize::from(!term.is_zero());
    loop {
        if term.is_zero() {
            return Ok((w, terms));
        }
        term = -&res.delta_plus_original(&k.operator_b(&term))?;
        if term.is_zero() {
            return Ok((w, terms));
        }
        terms += 1;
        if terms > limit {
            return Err(Error::NotTerminated(format!("(I + delta^+ B)^-1 needs more than {limit} terms")));
        }
        w = &w + &term;
    }
}

/// One application of `W = (I + delta^+ B)^{-1}(Y - delta^+ Q)` with the
/// primed coordinates of `params`; returns `W` and the Neumann term count.
pub fn lowest_step(
    model: &Model,
    split: &IndexSplit,
    params: &Omega1Params,
    options: &SolveOptions,
) -> Result<(Sp2Tensor, usize)> {
    let k = Koszul::new(model, params.clone())?;
    let coords = PrimedCoordinates::new(model, split, params)?;
    let res = Resolution::new(&coords);
    let mut w0 = -&res.delta_plus_original(&k.compute_q())?;
    if let Some(y) = &options.free_term_y {
        check_closed(&k, y, "free term Y")?;
        w0 = &w0 + y;
    }
    neumann(&res, &k, w0, model.order() + 1)
}

/// Solves the lowest-order equation stage by stage and returns `M`, `N`
/// with `delta W + Q + B W = 0`.
///
/// Stage `s` is read off from `W` computed with the coordinates of stages
/// below `s`. When that `W` makes `M_{alpha_s}` depend on ghost momenta of
/// stage `s - 1` or higher, the stage is solved instead by exact linear
/// algebra among the admissible polynomials (listed in `gauge_fixed`).
pub fn solve_lowest(model: &Model, split: &IndexSplit, options: &SolveOptions) -> Result<(Omega1Params, LowestReport)> {
    let mut params = Omega1Params::zero(model);
    let mut report = LowestReport { rounds: 0, neumann_terms: 0, gauge_fixed: Vec::new() };
    let step = |params: &Omega1Params, report: &mut LowestReport| -> Result<Sp2Tensor> {
        report.rounds += 1;
        let (w, terms) = lowest_step(model, split, params, options)?;
        report.neumann_terms = report.neumann_terms.max(terms);
        Ok(w)
    };
    for s in 2..=model.order() {
        let w = step(&params, &mut report)?;
        let mut next = params.clone();
        let read = extract_stage(model, &w, s).and_then(|(m, n)| {
            (next.m[s], next.n[s]) = (m, n);
            next.validate(model)
        });
        match read {
            Ok(()) => params = next,
            Err(e) if options.free_term_y.is_some() => return Err(e),
            Err(_) => {
                let k = Koszul::new(model, params.clone())?;
                (params.m[s], params.n[s]) = restricted::solve_stage(&k, s)?;
                report.gauge_fixed.push(s);
            }
        }
    }
    let w = step(&params, &mut report)?;
    if report.gauge_fixed.is_empty() && extract_params(model, &w)? != params {
        return Err(Error::NotTerminated("coefficient functions are not a fixed point".into()));
    }
    let k = Koszul::new(model, params.clone())?;
    if !k.lowest_residual().is_zero() {
        return Err(Error::InvalidModel {
            identity: "lowest-order equation".into(),
            detail: "delta W + Q + B W does not vanish".into(),
        });
    }
    Ok((params, report))
}

/// Solves the higher-order equation for `Pi` up to the cutoff degree.
pub fn solve_higher(
    model: &Model,
    split: &IndexSplit,
    params: &Omega1Params,
    options: &SolveOptions,
) -> Result<(Sp2Tensor, HigherReport)> {
    let cat = model.catalog();
    let k = Koszul::new(model, params.clone())?;
    let coords = PrimedCoordinates::new(model, split, params)?;
    let res = Resolution::new(&coords);
    let half_f = k.compute_f().scale_ratio(1, 2);
    let upsilon = match &options.free_term_upsilon {
        Some(u) => {
            check_closed(&k, u, "free term Upsilon")?;
            truncate(cat, u, options.cutoff)
        }
        None => Sp2Tensor::zero(1),
    };
    let mut truncated = false;
    let mut step = |pi: &Sp2Tensor| -> Result<Sp2Tensor> {
        let quad = tensor_bracket(cat, pi, pi).scale_ratio(1, 2);
        let rhs = &(&half_f + &k.operator_a(pi)) + &quad;
        let rhs_cut = truncate(cat, &rhs, options.cutoff);
        truncated |= rhs_cut != rhs;
        Ok(&upsilon - &res.delta_plus_original(&rhs_cut)?)
    };
    let mut pi = Sp2Tensor::zero(1);
    for it in 1..=options.max_iterations {
        let next = step(&pi)?;
        if next == pi {
            let report = HigherReport { iterations: it, max_degree: max_ghost_degree(cat, &pi), truncated };
            return Ok((pi, report));
        }
        pi = next;
    }
    Err(Error::NotTerminated(format!("Pi not stable after {} iterations", options.max_iterations)))
}

/// `Omega = Omega_1 + Pi` with the exact master-equation residual.
pub fn assemble_and_verify(model: &Model, params: &Omega1Params, pi: &Sp2Tensor, cutoff: u32) -> Result<ChargeExpansion> {
    let cat = model.catalog();
    let k = Koszul::new(model, params.clone())?;
    let omega1 = k.omega1().clone();
    let omega = &omega1 + pi;
    let full = tensor_bracket(cat, &omega, &omega);
    let residual = truncate(cat, &full, cutoff);
    let leftover_terms = term_count(&full) - term_count(&residual);
    Ok(ChargeExpansion { params: params.clone(), omega1, pi: pi.clone(), omega, cutoff, residual, leftover_terms })
}

/// Full pipeline with the automatic index split.
pub fn build_charge(model: &Model, options: &SolveOptions) -> Result<(ChargeExpansion, LowestReport, HigherReport)> {
    let split = IndexSplit::compute(model)?;
    let (params, lowest) = solve_lowest(model, &split, options)?;
    let (pi, higher) = solve_higher(model, &split, &params, options)?;
    Ok((assemble_and_verify(model, &params, &pi, options.cutoff)?, lowest, higher))
}

/// `(I + delta^+ A)^{-1} x` summed until the terms vanish below the cutoff.
fn resolvent_a(res: &Resolution, k: &Koszul, x: Sp2Tensor, options: &SolveOptions) -> Result<Sp2Tensor> {
    let cat = k.catalog();
    let mut out = x.clone();
    let mut term = x;
    for _ in 0..options.max_iterations {
        term = truncate(cat, &-&res.delta_plus_original(&k.operator_a(&term))?, options.cutoff);
        if term.is_zero() {
            return Ok(out);
        }
        out = &out + &term;
    }
    Err(Error::NotTerminated("(I + delta^+ A)^-1".into()))
}

/// `Pi_0 = (I + delta^+ A)^{-1}(Upsilon - delta^+ F/2)` and the pairing
/// `<X, Y> = -1/2 (I + delta^+ A)^{-1} delta^+([X, Y] + [Y, X])`, so that
/// `Pi = Pi_0 + <Pi, Pi>/2`.
pub struct QuadraticForm<'a> {
    model: &'a Model,
    params: Omega1Params,
    coords: PrimedCoordinates,
    options: SolveOptions,
}

impl<'a> QuadraticForm<'a> {
    pub fn new(model: &'a Model, split: &IndexSplit, params: &Omega1Params, options: &SolveOptions) -> Result<Self> {
        let coords = PrimedCoordinates::new(model, split, params)?;
        Ok(QuadraticForm { model, params: params.clone(), coords, options: options.clone() })
    }

    pub fn pi_zero(&self) -> Result<Sp2Tensor> {
        let k = Koszul::new(self.model, self.params.clone())?;
        let res = Resolution::new(&self.coords);
        let cat = self.model.catalog();
        let half_f = truncate(cat, &k.compute_f().scale_ratio(1, 2), self.options.cutoff);
        let mut x = -&res.delta_plus_original(&half_f)?;
        if let Some(u) = &self.options.free_term_upsilon {
            x = &x + &truncate(cat, u, self.options.cutoff);
        }
        resolvent_a(&res, &k, x, &self.options)
    }

    pub fn pairing(&self, x: &Sp2Tensor, y: &Sp2Tensor) -> Result<Sp2Tensor> {
        let k = Koszul::new(self.model, self.params.clone())?;
        let res = Resolution::new(&self.coords);
        let cat = self.model.catalog();
        let sym = &tensor_bracket(cat, x, y) + &tensor_bracket(cat, y, x);
        let inner = res.delta_plus_original(&truncate(cat, &sym, self.options.cutoff))?.scale_ratio(-1, 2);
        resolvent_a(&res, &k, inner, &self.options)
    }
}
