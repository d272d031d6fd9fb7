use sp2brst_core::fixtures;
use sp2brst_core::koszul::{Koszul, Omega1Params};
use sp2brst_core::resolve::{IndexSplit, PrimedCoordinates, Resolution};
use sp2brst_core::solver::{
    assemble_and_verify, build_charge, max_ghost_degree, solve_higher, solve_lowest, SolveOptions,
};
use sp2brst_core::sp2tensor::Sp2Tensor;
use sp2brst_core::superalgebra::GradedPoly;
use sp2brst_core::Error;

fn opts(cutoff: u32) -> SolveOptions {
    SolveOptions { cutoff, ..Default::default() }
}

#[test]
fn fixtures_solve_exactly() {
    for (name, m, _) in fixtures::all() {
        let (ch, lo, _) = build_charge(&m, &opts(4)).unwrap_or_else(|e| panic!("model {name}: {e}"));
        assert!(ch.is_solved(), "model {name}");
        assert_eq!(ch.leftover_terms, 0, "model {name}");
        assert!(lo.neumann_terms <= m.order() + 1, "model {name}");
        let cat = m.catalog();
        for c in ch.omega.components() {
            assert_eq!(c.parity(), Some(true), "model {name}");
            assert_eq!(c.ngh(cat), Some(1), "model {name}");
        }
        let k = Koszul::new(&m, ch.params.clone()).unwrap();
        assert!(k.lowest_residual().is_zero(), "model {name}");
    }
}

#[test]
fn low_order_models_have_zero_coefficients() {
    for m in [fixtures::model_a(), fixtures::model_b()] {
        let split = IndexSplit::compute(&m).unwrap();
        let (params, report) = solve_lowest(&m, &split, &opts(4)).unwrap();
        assert!(params.is_zero());
        assert_eq!(report.neumann_terms, 0);
        let (pi, _) = solve_higher(&m, &split, &params, &opts(4)).unwrap();
        assert!(pi.is_zero());
    }
}

#[test]
fn second_stage_coefficients_depend_on_stage_zero_only() {
    let m = fixtures::model_c();
    let split = IndexSplit::compute(&m).unwrap();
    let (params, report) = solve_lowest(&m, &split, &opts(4)).unwrap();
    assert!(!params.is_zero());
    assert_eq!(report.gauge_fixed, vec![2]);
    assert!(report.neumann_terms <= 3);
    params.validate(&m).unwrap();
}

/// `Y = W + delta^+(Q + B W)` for a known solution `W` reproduces it.
#[test]
fn free_term_selects_the_closed_form() {
    let m = fixtures::model_c();
    let split = IndexSplit::compute(&m).unwrap();
    let mut target = Omega1Params::closed_form_l2(&m).unwrap();
    for n in &mut target.n[2] {
        *n = n.scale_ratio(-1, 1);
    }
    let k = Koszul::new(&m, target.clone()).unwrap();
    let coords = PrimedCoordinates::new(&m, &split, &target).unwrap();
    let res = Resolution::new(&coords);
    let w = k.compute_w();
    let y = &w + &res.delta_plus_original(&(&k.compute_q() + &k.operator_b(&w))).unwrap();
    assert!(!y.is_zero());
    let options = SolveOptions { free_term_y: Some(y), ..opts(4) };
    let (params, report) = solve_lowest(&m, &split, &options).unwrap();
    assert_eq!(params, target);
    assert!(report.gauge_fixed.is_empty());
    let (default, _) = solve_lowest(&m, &split, &opts(4)).unwrap();
    assert_ne!(default, params);
}

#[test]
fn free_term_must_be_closed() {
    let m = fixtures::model_c();
    let split = IndexSplit::compute(&m).unwrap();
    let cat = m.catalog();
    let c = GradedPoly::var(cat.ghost_c(2, 0, 1));
    let p = GradedPoly::var(cat.ghost_p(0, 0, 1));
    let y = Sp2Tensor::vector(&(&p * &p) * &c, GradedPoly::zero());
    let bad = Sp2Tensor::vector(&GradedPoly::var(cat.ghost_p(0, 0, 1)) * &GradedPoly::var(cat.lambda(0, 1, 0)), GradedPoly::zero());
    for y in [y, bad] {
        let options = SolveOptions { free_term_y: Some(y), ..opts(4) };
        let err = solve_lowest(&m, &split, &options).unwrap_err();
        assert!(matches!(err, Error::NotClosed(_) | Error::Grading(_)), "{err}");
    }
}

#[test]
fn structure_functions_give_quadratic_pi() {
    let m = fixtures::model_d();
    let split = IndexSplit::compute(&m).unwrap();
    let (params, _) = solve_lowest(&m, &split, &opts(3)).unwrap();
    let (pi, report) = solve_higher(&m, &split, &params, &opts(3)).unwrap();
    assert!(!pi.is_zero());
    assert_eq!(max_ghost_degree(m.catalog(), &pi), 2);
    assert!(!report.truncated);
    let ch = assemble_and_verify(&m, &params, &pi, 3).unwrap();
    assert!(ch.is_solved());
}

#[test]
fn perturbed_pi_is_flagged() {
    let m = fixtures::model_d();
    let (ch, _, _) = build_charge(&m, &opts(3)).unwrap();
    let mut pi = ch.pi.clone();
    let (mono, coeff) = pi.comp(0).terms().next().map(|(a, b)| (a.clone(), b.clone())).unwrap();
    pi.comp_mut(0).add_term(mono, coeff);
    let bad = assemble_and_verify(&m, &ch.params, &pi, 3).unwrap();
    assert!(!bad.is_solved());
}

#[test]
fn output_is_deterministic() {
    let m = fixtures::model_d();
    let (a, _, _) = build_charge(&m, &opts(3)).unwrap();
    let (b, _, _) = build_charge(&m, &opts(3)).unwrap();
    assert_eq!(a.omega, b.omega);
    assert_eq!(a.params, b.params);
}

#[test]
fn first_iterates_of_the_quadratic_form() {
    use sp2brst_core::solver::{truncate, QuadraticForm};
    let m = fixtures::model_d();
    let split = IndexSplit::compute(&m).unwrap();
    let o = opts(3);
    let (params, _) = solve_lowest(&m, &split, &o).unwrap();
    let (pi, _) = solve_higher(&m, &split, &params, &o).unwrap();
    let q = QuadraticForm::new(&m, &split, &params, &o).unwrap();
    let p0 = q.pi_zero().unwrap();
    assert!(!p0.is_zero());
    let two = &p0 + &q.pairing(&p0, &p0).unwrap().scale_ratio(1, 2);
    assert_eq!(truncate(m.catalog(), &two, 3), truncate(m.catalog(), &pi, 3));
}

#[test]
fn solutions_are_delta_plus_coclosed() {
    let m = fixtures::model_d();
    let split = IndexSplit::compute(&m).unwrap();
    let (params, _) = solve_lowest(&m, &split, &opts(3)).unwrap();
    let (pi, _) = solve_higher(&m, &split, &params, &opts(3)).unwrap();
    let coords = PrimedCoordinates::new(&m, &split, &params).unwrap();
    let res = Resolution::new(&coords);
    assert!(res.delta_plus_original(&pi).unwrap().is_zero());
}
