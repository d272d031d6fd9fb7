//! BRST observables: lifting first-class functions `Phi_0(xi)` to solutions
//! of `[Omega, Phi] = 0` and restricting them back.

use crate::koszul::Koszul;
use crate::model::Model;
use crate::resolve::{IndexSplit, PrimedCoordinates, Resolution};
use crate::solver::{truncate, ChargeExpansion, SolveOptions};
use crate::sp2tensor::{tensor_bracket, term_count, Sp2Tensor};
use crate::superalgebra::{poisson_bracket, GradedPoly, VarKind};
use crate::{Error, Result};

/// Outcome of the first-class test with the reduced brackets as evidence.
#[derive(Clone, Debug)]
pub struct FirstClassCertificate {
    pub first_class: bool,
    /// Normal form of `{phi_0, T_alpha}` modulo the constraint ideal.
    pub remainders: Vec<GradedPoly>,
}

#[derive(Clone, Debug)]
pub struct ObservableLift {
    pub phi0: GradedPoly,
    /// `Phi' - Phi_0`, of `(c, pi)`-degree `>= 1`.
    pub k: GradedPoly,
    pub phi_prime: GradedPoly,
    pub cutoff: u32,
    /// `[Omega, Phi']` restricted to `(c, pi)`-degree `<= cutoff`.
    pub residual: Sp2Tensor,
    pub leftover_terms: usize,
    pub iterations: usize,
}

impl ObservableLift {
    pub fn is_solved(&self) -> bool {
        self.residual.is_zero()
    }
}

fn check_xi_only(model: &Model, x: &GradedPoly) -> Result<()> {
    let cat = model.catalog();
    match x.variables().into_iter().find(|&v| cat.descriptor(v).kind != VarKind::Xi) {
        Some(v) => Err(Error::Grading(format!("{} is not a phase-space variable", cat.name(v)))),
        None => Ok(()),
    }
}

/// Whether every `{phi_0, T_alpha}` lies in the ideal of the constraints.
pub fn check_first_class(model: &Model, phi0: &GradedPoly) -> Result<FirstClassCertificate> {
    check_xi_only(model, phi0)?;
    let cat = model.catalog();
    let ideal = model.constraint_ideal()?;
    let remainders = model
        .constraints()
        .iter()
        .map(|t| ideal.reduce(&poisson_bracket(cat, phi0, t)))
        .collect::<Result<Vec<_>>>()?;
    let first_class = remainders.iter().all(GradedPoly::is_zero);
    Ok(FirstClassCertificate { first_class, remainders })
}

/// `Phi' = Phi_0 + K` with `K = -delta^+([Omega, Phi_0] + A K + [Pi, K])`,
/// iterated to a fixed point below the cutoff.
pub fn lift_observable(
    model: &Model,
    split: &IndexSplit,
    charge: &ChargeExpansion,
    phi0: &GradedPoly,
    options: &SolveOptions,
) -> Result<ObservableLift> {
    let cert = check_first_class(model, phi0)?;
    if !cert.first_class {
        let cat = model.catalog();
        let rem: Vec<String> = cert.remainders.iter().map(|r| r.display(cat).to_string()).collect();
        return Err(Error::NotFirstClass(format!("{{phi, T}} remainders [{}]", rem.join(", "))));
    }
    let cat = model.catalog();
    let cutoff = options.cutoff;
    let k_op = Koszul::new(model, charge.params.clone())?;
    let coords = PrimedCoordinates::new(model, split, &charge.params)?;
    let res = Resolution::new(&coords);
    let phi = Sp2Tensor::scalar(phi0.clone());
    let source = truncate(cat, &tensor_bracket(cat, &charge.omega, &phi), cutoff);
    let mut k = Sp2Tensor::zero(0);
    for it in 1..=options.max_iterations {
        let rhs = &(&source + &k_op.operator_a(&k)) + &tensor_bracket(cat, &charge.pi, &k);
        let next = -&res.delta_plus_original(&truncate(cat, &rhs, cutoff))?;
        if next == k {
            let k = k.comp(0).clone();
            let phi_prime = phi0 + &k;
            let full = tensor_bracket(cat, &charge.omega, &Sp2Tensor::scalar(phi_prime.clone()));
            let residual = truncate(cat, &full, cutoff);
            let leftover_terms = term_count(&full) - term_count(&residual);
            return Ok(ObservableLift {
                phi0: phi0.clone(),
                k,
                phi_prime,
                cutoff,
                residual,
                leftover_terms,
                iterations: it,
            });
        }
        k = next;
    }
    Err(Error::NotTerminated(format!("observable lift not stable after {} iterations", options.max_iterations)))
}

/// `Phi'|_{P' = c = lambda' = pi = 0}`, written in the original variables.
pub fn restrict(coords: &PrimedCoordinates, phi: &GradedPoly) -> GradedPoly {
    let cat = coords.catalog();
    let primed = coords.to_primed(phi).filter(|m| {
        m.factors().iter().all(|&(v, _)| {
            !matches!(
                cat.descriptor(v).kind,
                VarKind::MomentumPPrime | VarKind::LambdaPrime | VarKind::GhostC | VarKind::Pi
            )
        })
    });
    coords.from_primed(&primed)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomomorphismReport {
    pub bracket: bool,
    pub product: bool,
}

/// Compares restriction of brackets and products with brackets and
/// products of restrictions.
pub fn verify_homomorphism(
    model: &Model,
    coords: &PrimedCoordinates,
    a: &ObservableLift,
    b: &ObservableLift,
) -> HomomorphismReport {
    let cat = model.catalog();
    let (ra, rb) = (restrict(coords, &a.phi_prime), restrict(coords, &b.phi_prime));
    let bracket = restrict(coords, &poisson_bracket(cat, &a.phi_prime, &b.phi_prime)) == poisson_bracket(cat, &ra, &rb);
    let product = restrict(coords, &(&a.phi_prime * &b.phi_prime)) == &ra * &rb;
    HomomorphismReport { bracket, product }
}

/// `sigma_bar = eps^{ab} sigma_a sigma_b` on scalars in primed variables.
pub fn sigma_bar(res: &Resolution, x: &GradedPoly) -> GradedPoly {
    &res.sigma_scalar(1, &res.sigma_scalar(2, x)) - &res.sigma_scalar(2, &res.sigma_scalar(1, x))
}

/// `delta_bar = eps_{ab} delta^a delta^b` on scalars in primed variables.
pub fn delta_bar(res: &Resolution, x: &GradedPoly) -> GradedPoly {
    &res.delta_scalar(2, &res.delta_scalar(1, x)) - &res.delta_scalar(1, &res.delta_scalar(2, x))
}
