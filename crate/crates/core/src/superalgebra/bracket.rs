use super::{sign, Catalog, GradedPoly, Role, Sector, Var};
use crate::{Error, Result};

pub fn left_deriv_p(cat: &Catalog, x: &GradedPoly, v: Var) -> Result<GradedPoly> {
    if cat.descriptor(v).role != Role::P {
        return Err(Error::WrongConjugacy {
            expected: "momentum",
            found: cat.name(v).to_string(),
        });
    }
    Ok(x.left_deriv(v))
}

pub fn right_deriv_q(cat: &Catalog, x: &GradedPoly, v: Var) -> Result<GradedPoly> {
    if cat.descriptor(v).role != Role::Q {
        return Err(Error::WrongConjugacy {
            expected: "coordinate",
            found: cat.name(v).to_string(),
        });
    }
    Ok(x.right_deriv(v))
}

/// `sum_A w_A (dX/dQ^A)(dY/dP_A)` over the pairs accepted by `sector`.
pub(crate) fn half_bracket(
    cat: &Catalog,
    x: &GradedPoly,
    y: &GradedPoly,
    sector: Option<Sector>,
) -> GradedPoly {
    let mut out = GradedPoly::zero();
    if x.is_zero() || y.is_zero() {
        return out;
    }
    let yvars = y.variables();
    for q in x.variables() {
        let Some(pair) = cat.pair_with_q(q) else { continue };
        if sector.is_some_and(|s| s != pair.sector) {
            continue;
        }
        if yvars.binary_search(&pair.p).is_err() {
            continue;
        }
        let dx = x.right_deriv(q);
        let dy = y.left_deriv(pair.p);
        out += &(&dx * &dy).scale(&pair.weight);
    }
    out
}

fn graded_bracket(cat: &Catalog, x: &GradedPoly, y: &GradedPoly, sector: Option<Sector>) -> GradedPoly {
    let (x0, x1) = x.parity_parts();
    let (y0, y1) = y.parity_parts();
    let mut out = GradedPoly::zero();
    for (xp, xs) in [(false, &x0), (true, &x1)] {
        for (yp, ys) in [(false, &y0), (true, &y1)] {
            if xs.is_zero() || ys.is_zero() {
                continue;
            }
            out += &half_bracket(cat, xs, ys, sector);
            out -= &half_bracket(cat, ys, xs, sector).scale_int(sign(xp, yp));
        }
    }
    out
}

/// Poisson superbracket over all canonical pairs, extended bilinearly over
/// parity components.
pub fn poisson_bracket(cat: &Catalog, x: &GradedPoly, y: &GradedPoly) -> GradedPoly {
    graded_bracket(cat, x, y, None)
}

/// Bracket restricted to the original phase space.
pub fn xi_bracket(cat: &Catalog, x: &GradedPoly, y: &GradedPoly) -> GradedPoly {
    graded_bracket(cat, x, y, Some(Sector::Xi))
}

/// `(dX/dQ^{A'})(dY/dP_{A'})` over ghost-sector pairs, not antisymmetrized.
pub fn diamond_bracket(cat: &Catalog, x: &GradedPoly, y: &GradedPoly) -> GradedPoly {
    half_bracket(cat, x, y, Some(Sector::Ghost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalgebra::PhaseSpaceLayout;

    fn cat() -> Catalog {
        PhaseSpaceLayout {
            pairs: vec![
                ("p1".into(), "q1".into(), false),
                ("p2".into(), "q2".into(), false),
                ("th".into(), "pth".into(), true),
            ],
            stage_parities: vec![vec![false]],
        }
        .catalog()
    }

    fn v(cat: &Catalog, n: &str) -> GradedPoly {
        GradedPoly::var(cat.by_name(n).unwrap())
    }

    #[test]
    fn canonical_pairs() {
        let c = cat();
        assert_eq!(poisson_bracket(&c, &v(&c, "q1"), &v(&c, "p1")), GradedPoly::one());
        assert_eq!(poisson_bracket(&c, &v(&c, "p1"), &v(&c, "q1")), -GradedPoly::one());
        assert!(poisson_bracket(&c, &v(&c, "p1"), &v(&c, "p2")).is_zero());
    }

    #[test]
    fn odd_pair_is_symmetric() {
        // here the odd pair is declared (P = th, Q = pth)
        let c = cat();
        let a = poisson_bracket(&c, &v(&c, "th"), &v(&c, "pth"));
        let b = poisson_bracket(&c, &v(&c, "pth"), &v(&c, "th"));
        assert_eq!(a, GradedPoly::one());
        assert_eq!(a, b);
    }

    #[test]
    fn diamond_and_xi_parts() {
        let c = cat();
        let c0 = GradedPoly::var(c.ghost_c(0, 0, 1));
        let p0 = GradedPoly::var(c.ghost_p(0, 0, 1));
        assert_eq!(diamond_bracket(&c, &c0, &p0), GradedPoly::one());
        assert!(xi_bracket(&c, &c0, &p0).is_zero());
        assert!(diamond_bracket(&c, &p0, &c0).is_zero());
    }

    #[test]
    fn derivative_conjugacy_checked() {
        let c = cat();
        let x = &v(&c, "p1") * &v(&c, "q1");
        assert_eq!(left_deriv_p(&c, &x, c.p(0)).unwrap(), v(&c, "q1"));
        assert!(left_deriv_p(&c, &v(&c, "q1"), c.p(0)).unwrap().is_zero());
        assert!(left_deriv_p(&c, &x, c.q(0)).is_err());
        assert!(right_deriv_q(&c, &x, c.p(0)).is_err());
    }
}
