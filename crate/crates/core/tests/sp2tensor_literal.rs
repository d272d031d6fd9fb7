use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sp2brst_core::sampling::{random_tensor, SampleShape};
use sp2brst_core::sp2tensor::{contract, lift, sym_product, tensor_bracket, Sp2Tensor};
use sp2brst_core::superalgebra::{poisson_bracket, Catalog, GradedPoly, PhaseSpaceLayout, Var};

fn catalog() -> Catalog {
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

fn xi_vars(c: &Catalog) -> Vec<Var> {
    ["p1", "q1", "p2", "q2", "th", "pth"].iter().map(|n| c.by_name(n).unwrap()).collect()
}

fn tuples(n: usize) -> Vec<Vec<u8>> {
    (0..1usize << n)
        .map(|bits| (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { 2 }).collect())
        .collect()
}

fn entry(x: &Sp2Tensor, idx: &[u8]) -> GradedPoly {
    x.comp(idx.iter().filter(|&&a| a == 1).count()).clone()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Product defined by the average over all permutations of the index tuple.
fn literal_product(x: &Sp2Tensor, y: &Sp2Tensor, idx: &[u8]) -> GradedPoly {
    let q = x.rank();
    let perms = permutations(idx.len());
    let mut acc = GradedPoly::zero();
    for p in &perms {
        let a: Vec<u8> = p[..q].iter().map(|&i| idx[i]).collect();
        let b: Vec<u8> = p[q..].iter().map(|&i| idx[i]).collect();
        acc += &(&entry(x, &a) * &entry(y, &b));
    }
    acc.scale_ratio(1, perms.len() as i64)
}

fn assert_matches_literal(t: &Sp2Tensor, lit: impl Fn(&[u8]) -> GradedPoly) {
    for idx in tuples(t.rank()) {
        assert_eq!(entry(t, &idx), lit(&idx), "index {idx:?}");
    }
}

fn sample(seed: u64, ranks: &[usize], parities: &[bool]) -> Vec<Sp2Tensor> {
    let c = catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = SampleShape::default();
    ranks
        .iter()
        .zip(parities)
        .map(|(&r, &p)| random_tensor(&mut rng, r, &xi_vars(&c), Some(p), &shape))
        .collect()
}

fn par(x: &Sp2Tensor) -> bool {
    x.parity().unwrap_or(false)
}

fn sgn(a: bool, b: bool) -> i64 {
    if a && b {
        -1
    } else {
        1
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn product_matches_permutation_average(seed: u64, q in 0usize..3, p in 0usize..3, ex: bool, ey: bool) {
        let v = sample(seed, &[q, p], &[ex, ey]);
        let xy = sym_product(&v[0], &v[1]);
        assert_matches_literal(&xy, |idx| literal_product(&v[0], &v[1], idx));
    }

    #[test]
    fn product_commutes_and_associates(seed: u64, ranks in proptest::collection::vec(0usize..3, 3), pars in proptest::collection::vec(any::<bool>(), 3)) {
        let v = sample(seed, &ranks, &pars);
        let (x, y, z) = (&v[0], &v[1], &v[2]);
        let xy = sym_product(x, y);
        let yx = sym_product(y, x).scale_ratio(sgn(par(x), par(y)), 1);
        prop_assert_eq!(&xy, &yx);
        prop_assert_eq!(sym_product(&xy, z), sym_product(x, &sym_product(y, z)));
    }

    #[test]
    fn bracket_matches_literal_definition(seed: u64, q in 0usize..3, p in 0usize..3, ex: bool, ey: bool) {
        let c = catalog();
        let v = sample(seed, &[q, p], &[ex, ey]);
        let (x, y) = (&v[0], &v[1]);
        let b = tensor_bracket(&c, x, y);
        let s = sgn(par(x), par(y));
        assert_matches_literal(&b, |idx| {
            let mut acc = GradedPoly::zero();
            for pair in c.pairs() {
                let dxq = x.map(|e| e.right_deriv(pair.q));
                let dyp = y.map(|e| e.left_deriv(pair.p));
                let dyq = y.map(|e| e.right_deriv(pair.q));
                let dxp = x.map(|e| e.left_deriv(pair.p));
                acc += &literal_product(&dxq, &dyp, idx);
                acc -= &literal_product(&dyq, &dxp, idx).scale_int(s);
            }
            acc
        });
        if q == 0 && p == 0 {
            prop_assert_eq!(b.comp(0), &poisson_bracket(&c, x.comp(0), y.comp(0)));
        }
    }

    #[test]
    fn bracket_is_graded_poisson(seed: u64, ranks in proptest::collection::vec(0usize..3, 3), pars in proptest::collection::vec(any::<bool>(), 3)) {
        let c = catalog();
        let v = sample(seed, &ranks, &pars);
        let (x, y, z) = (&v[0], &v[1], &v[2]);
        let (ex, ey, ez) = (par(x), par(y), par(z));
        let xy = tensor_bracket(&c, x, y);
        prop_assert_eq!(&xy, &tensor_bracket(&c, y, x).scale_ratio(-sgn(ex, ey), 1));
        let lhs = tensor_bracket(&c, x, &sym_product(y, z));
        let rhs = &sym_product(&xy, z) + &sym_product(y, &tensor_bracket(&c, x, z)).scale_ratio(sgn(ex, ey), 1);
        prop_assert_eq!(lhs, rhs);
        let j1 = tensor_bracket(&c, x, &tensor_bracket(&c, y, z)).scale_ratio(sgn(ex, ez), 1);
        let j2 = tensor_bracket(&c, y, &tensor_bracket(&c, z, x)).scale_ratio(sgn(ey, ex), 1);
        let j3 = tensor_bracket(&c, z, &xy).scale_ratio(sgn(ez, ey), 1);
        prop_assert!((&(&j1 + &j2) + &j3).is_zero());
    }

    #[test]
    fn lift_and_contract_match_index_sums(seed: u64, n in 0usize..4) {
        let c = catalog();
        let v = sample(seed, &[n], &[false]);
        let x = &v[0];
        let p1 = GradedPoly::var(c.by_name("p1").unwrap());
        let q2 = GradedPoly::var(c.by_name("q2").unwrap());
        let u = |a: usize, e: &GradedPoly| if a == 1 { e * &p1 } else { e * &q2 };
        let ux = lift(&u, x);
        assert_matches_literal(&ux, |idx| {
            let mut acc = GradedPoly::zero();
            for i in 0..idx.len() {
                let mut rest = idx.to_vec();
                let a = rest.remove(i);
                acc += &u(a as usize, &entry(x, &rest));
            }
            acc.scale_ratio(1, idx.len() as i64)
        });
        let sx = contract(&u, x);
        if n > 0 {
            assert_matches_literal(&sx, |idx| {
                let mut acc = GradedPoly::zero();
                for b in [1u8, 2] {
                    let mut full = vec![b];
                    full.extend_from_slice(idx);
                    acc += &u(b as usize, &entry(x, &full));
                }
                acc
            });
        } else {
            prop_assert!(sx.is_zero());
        }
    }
}
