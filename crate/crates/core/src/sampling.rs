//! Seeded random polynomials and tensors for identity checks.

use rand::Rng;

use crate::sp2tensor::Sp2Tensor;
use crate::superalgebra::{Coeff, GradedPoly, Monomial, Var};

#[derive(Clone, Debug)]
pub struct SampleShape {
    pub max_terms: usize,
    pub max_degree: u32,
    pub coeff_range: i64,
}

impl Default for SampleShape {
    fn default() -> Self {
        SampleShape {
            max_terms: 3,
            max_degree: 2,
            coeff_range: 3,
        }
    }
}

fn random_monomial(rng: &mut impl Rng, vars: &[Var], max_degree: u32) -> (Monomial, bool) {
    let degree = rng.gen_range(0..=max_degree);
    let mut factors: Vec<(Var, u32)> = Vec::new();
    for _ in 0..degree {
        if vars.is_empty() {
            break;
        }
        factors.push((vars[rng.gen_range(0..vars.len())], 1));
    }
    Monomial::from_factors(&factors).unwrap_or((Monomial::one(), false))
}

/// Random polynomial in `vars`; with `parity` set every term has that parity.
pub fn random_poly(rng: &mut impl Rng, vars: &[Var], parity: Option<bool>, shape: &SampleShape) -> GradedPoly {
    let mut out = GradedPoly::zero();
    let mut attempts = 0;
    while out.len() < shape.max_terms && attempts < 8 * shape.max_terms {
        attempts += 1;
        let (m, neg) = random_monomial(rng, vars, shape.max_degree);
        if parity.is_some_and(|p| p != m.parity()) {
            continue;
        }
        let mut c = rng.gen_range(-shape.coeff_range..=shape.coeff_range);
        if c == 0 {
            c = 1;
        }
        if neg {
            c = -c;
        }
        out.add_term(m, Coeff::from_integer(c.into()));
    }
    out
}

pub fn random_tensor(rng: &mut impl Rng, rank: usize, vars: &[Var], parity: Option<bool>, shape: &SampleShape) -> Sp2Tensor {
    Sp2Tensor::from_components((0..=rank).map(|_| random_poly(rng, vars, parity, shape)).collect())
}
