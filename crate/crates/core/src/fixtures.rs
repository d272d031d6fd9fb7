//! Small reference constraint systems used by tests, the CLI and examples.
//!
//! * A: `T = (p1)`, spectator pair `(p2, q2)`, irreducible.
//! * B: `T = (p1, p2, p1 + p2)` with one constant reducibility relation.
//! * C: second stage reducible, polynomial `Z_1`, nonzero `A`.
//! * D: non-abelian, `{T_1, T_2} = -T_3`, one constant relation.

use crate::model::{xi_prime_names, Matrix, Model, ModelData, Regularity};
use crate::superalgebra::{parse_poly, Catalog, GradedPoly, PhaseSpaceLayout};

fn layout(pairs: usize, stage_sizes: &[usize]) -> PhaseSpaceLayout {
    PhaseSpaceLayout {
        pairs: (1..=pairs).map(|i| (format!("p{i}"), format!("q{i}"), false)).collect(),
        stage_parities: stage_sizes.iter().map(|&n| vec![false; n]).collect(),
    }
}

fn p(cat: &Catalog, s: &str) -> GradedPoly {
    parse_poly(cat, s).expect("fixture polynomial")
}

fn polys(cat: &Catalog, xs: &[&str]) -> Vec<GradedPoly> {
    xs.iter().map(|s| p(cat, s)).collect()
}

fn matrix(cat: &Catalog, rows: &[&[&str]]) -> Matrix {
    rows.iter().map(|r| polys(cat, r)).collect()
}

fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![GradedPoly::zero(); cols]; rows]
}

pub fn model_a() -> Model {
    let layout = layout(2, &[1]);
    let cat = layout.catalog();
    ModelData {
        constraints: polys(&cat, &["p1"]),
        layout,
        ..Default::default()
    }
    .build()
    .expect("model A")
}

pub fn model_b() -> Model {
    let layout = layout(2, &[3, 1]);
    let cat = layout.catalog();
    ModelData {
        constraints: polys(&cat, &["p1", "p2", "p1 + p2"]),
        z: vec![matrix(&cat, &[&["1"], &["1"], &["-1"]])],
        layout,
        ..Default::default()
    }
    .build()
    .expect("model B")
}

pub fn model_c() -> Model {
    let layout = layout(2, &[4, 3, 1]);
    let cat = layout.catalog();
    let z0 = matrix(
        &cat,
        &[&["1", "1", "0"], &["1", "0", "1"], &["-1", "-1", "0"], &["-1", "0", "-1"]],
    );
    let z1 = matrix(&cat, &[&["1"], &["-1 - p2"], &["-1 + p1"]]);
    // a[beta][alpha][gamma]
    let mut a = vec![zeros(4, 1); 4];
    a[0][1][0] = GradedPoly::integer(1);
    a[1][0][0] = GradedPoly::integer(-1);
    a[2][3][0] = GradedPoly::integer(-1);
    a[3][2][0] = GradedPoly::integer(1);
    ModelData {
        constraints: polys(&cat, &["p1", "p2", "p1", "p2"]),
        z: vec![z0, z1],
        a: vec![a],
        layout,
        ..Default::default()
    }
    .build()
    .expect("model C")
}

pub fn model_d() -> Model {
    let layout = layout(3, &[4, 1]);
    let cat = layout.catalog();
    let mut u = vec![zeros(4, 4); 4];
    u[0][1][2] = GradedPoly::integer(-1);
    u[1][0][2] = GradedPoly::integer(1);
    let primed = layout.primed_catalog(&xi_prime_names(&[false; 3], &[0, 1, 3], &[false; 4]));
    let inverse = polys(&primed, &["T'1", "F'1", "T'2 - F'1*T'4", "F'2", "T'4", "F'3"]);
    ModelData {
        constraints: polys(&cat, &["p1", "p2 + q1*p3", "p3", "p3"]),
        z: vec![matrix(&cat, &[&["0"], &["0"], &["1"], &["-1"]])],
        structure: Some(u),
        regularity: Some(Regularity {
            functions: polys(&cat, &["q1", "q2", "q3"]),
            inverse: Some(inverse),
        }),
        layout,
        ..Default::default()
    }
    .build()
    .expect("model D")
}

/// `(name, model, first-class observables)` for every fixture.
pub fn all() -> Vec<(&'static str, Model, Vec<GradedPoly>)> {
    let obs = |m: &Model, xs: &[&str]| polys(m.catalog(), xs);
    let (a, b, c, d) = (model_a(), model_b(), model_c(), model_d());
    vec![
        ("A", a.clone(), obs(&a, &["q2", "p1", "p2"])),
        ("B", b.clone(), obs(&b, &["p1", "q1*p1", "q2*p2"])),
        ("C", c.clone(), obs(&c, &["p1", "q1*p1"])),
        ("D", d.clone(), obs(&d, &["p2 + q1*p3", "q1*p1"])),
    ]
}
