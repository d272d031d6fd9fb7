//! Exact supercommutative polynomial algebra of the extended phase space.
//!
//! Polynomials have rational coefficients and are stored in a canonical
//! monomial order, so structural equality is mathematical equality.

mod bracket;
mod parse;
mod poly;
mod var;

pub use bracket::{diamond_bracket, left_deriv_p, poisson_bracket, right_deriv_q, xi_bracket};
pub use parse::parse_poly;
pub use poly::{GradedPoly, Monomial, PolyDisplay};
pub use var::{
    Catalog, CanonicalPair, PhaseSpaceLayout, Role, Sector, Var, VarKey, VarKind,
    VariableDescriptor,
};
pub use var::binomial;

/// Exact rational coefficient.
pub type Coeff = num_rational::BigRational;

/// `(-1)^{ab}` for parities `a`, `b`.
pub fn sign(a: bool, b: bool) -> i64 {
    if a && b {
        -1
    } else {
        1
    }
}
