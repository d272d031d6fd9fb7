//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Pinned tolerances: every comparison is exact over the rationals; sample
//! counts and time limits are the constants below. A criterion that states
//! a displayed formula the implementation does not reproduce is reported as
//! FAIL together with the form that holds; only those are allowed to fail.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sp2brst::commands::{build, lift, verify, BuildOptions, LiftOptions};
use sp2brst::model_file::{load, LoadedModel};
use sp2brst_core::fixtures;
use sp2brst_core::identities::{resolution_vars, run_suite, sample_v, SuiteOptions, IDENTITY_NAMES};
use sp2brst_core::koszul::{Koszul, Omega1Params};
use sp2brst_core::model::Model;
use sp2brst_core::observables::{delta_bar, lift_observable, restrict, sigma_bar, verify_homomorphism};
use sp2brst_core::resolve::{IndexSplit, PrimedCoordinates, Resolution};
use sp2brst_core::sampling::{random_poly, random_tensor, SampleShape};
use sp2brst_core::solver::{build_charge, solve_lowest, SolveOptions};
use sp2brst_core::sp2tensor::{contract, lift as lift_op, sym_product, tensor_bracket, Sp2Tensor};
use sp2brst_core::superalgebra::{Catalog, GradedPoly, PhaseSpaceLayout, Var};

const ALGEBRA_SAMPLES: usize = 100;
const LITERAL_SAMPLES: usize = 50;
const IDENTITY_SAMPLES: usize = 50;
const SPOT_POINTS: usize = 100;
const SEED: u64 = 20240611;

struct Outcome {
    passed: bool,
    /// Documented divergence from a displayed formula.
    expected_failure: bool,
    detail: String,
}

fn ok(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, expected_failure: false, detail: detail.into() }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > limit {
        o.passed = false;
        o.expected_failure = false;
    }
    o.detail = format!("{}; {} (limit {})", o.detail, secs(took), secs(limit));
    o
}

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn model_file(name: &str) -> LoadedModel {
    load(&models_dir().join(name)).expect("model file")
}

fn small_catalog() -> Catalog {
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

fn sgn(a: bool, b: bool) -> i64 {
    if a && b {
        -1
    } else {
        1
    }
}

fn par(x: &Sp2Tensor) -> bool {
    x.parity().unwrap_or(false)
}

fn criterion_1() -> Outcome {
    let c = small_catalog();
    let vars: Vec<Var> = c.vars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let shape = SampleShape::default();
    let mut failures = Vec::new();
    for i in 0..ALGEBRA_SAMPLES {
        let ranks = [i % 3, (i / 3) % 3, (i / 9) % 3];
        let pars = [i % 2 == 1, (i / 2) % 2 == 1, (i / 4) % 2 == 1];
        let v: Vec<Sp2Tensor> = (0..3).map(|j| random_tensor(&mut rng, ranks[j], &vars, Some(pars[j]), &shape)).collect();
        let (x, y, z) = (&v[0], &v[1], &v[2]);
        let (ex, ey, ez) = (par(x), par(y), par(z));
        let xy = sym_product(x, y);
        if xy != sym_product(y, x).scale_ratio(sgn(ex, ey), 1) {
            failures.push("supercommutativity");
        }
        if sym_product(&xy, z) != sym_product(x, &sym_product(y, z)) {
            failures.push("associativity");
        }
        let bxy = tensor_bracket(&c, x, y);
        if bxy != tensor_bracket(&c, y, x).scale_ratio(-sgn(ex, ey), 1) {
            failures.push("antisymmetry");
        }
        let leibniz = &sym_product(&bxy, z) + &sym_product(y, &tensor_bracket(&c, x, z)).scale_ratio(sgn(ex, ey), 1);
        if tensor_bracket(&c, x, &sym_product(y, z)) != leibniz {
            failures.push("Leibniz");
        }
        let j1 = tensor_bracket(&c, x, &tensor_bracket(&c, y, z)).scale_ratio(sgn(ex, ez), 1);
        let j2 = tensor_bracket(&c, y, &tensor_bracket(&c, z, x)).scale_ratio(sgn(ey, ex), 1);
        let j3 = tensor_bracket(&c, z, &bxy).scale_ratio(sgn(ez, ey), 1);
        if !(&(&j1 + &j2) + &j3).is_zero() {
            failures.push("Jacobi");
        }
    }
    ok(failures.is_empty(), format!("5 laws x {ALGEBRA_SAMPLES} samples, failures {failures:?}"))
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

fn literal_product(x: &Sp2Tensor, y: &Sp2Tensor, idx: &[u8]) -> GradedPoly {
    let perms = permutations(idx.len());
    let mut acc = GradedPoly::zero();
    for p in &perms {
        let a: Vec<u8> = p[..x.rank()].iter().map(|&i| idx[i]).collect();
        let b: Vec<u8> = p[x.rank()..].iter().map(|&i| idx[i]).collect();
        acc += &(&entry(x, &a) * &entry(y, &b));
    }
    acc.scale_ratio(1, perms.len() as i64)
}

fn matches(t: &Sp2Tensor, lit: impl Fn(&[u8]) -> GradedPoly) -> bool {
    tuples(t.rank()).iter().all(|idx| entry(t, idx) == lit(idx))
}

fn criterion_2() -> Outcome {
    let c = small_catalog();
    let vars: Vec<Var> = c.vars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let shape = SampleShape::default();
    let p1 = GradedPoly::var(c.by_name("p1").unwrap());
    let th = GradedPoly::var(c.by_name("th").unwrap());
    let u = |a: usize, e: &GradedPoly| if a == 1 { e * &p1 } else { &th * e };
    let mut bad = 0;
    for i in 0..LITERAL_SAMPLES {
        let (q, p) = (i % 4, (i / 4) % 4);
        let (q, p) = if q + p > 3 { (q % 2, p % 2) } else { (q, p) };
        let x = random_tensor(&mut rng, q, &vars, Some(i % 2 == 1), &shape);
        let y = random_tensor(&mut rng, p, &vars, Some(i % 3 == 1), &shape);
        if !matches(&sym_product(&x, &y), |idx| literal_product(&x, &y, idx)) {
            bad += 1;
        }
        let n = i % 4;
        let z = random_tensor(&mut rng, n, &vars, None, &shape);
        let lifted = lift_op(&u, &z);
        let lift_ok = matches(&lifted, |idx| {
            let mut acc = GradedPoly::zero();
            for k in 0..idx.len() {
                let mut rest = idx.to_vec();
                let a = rest.remove(k);
                acc += &u(a as usize, &entry(&z, &rest));
            }
            acc.scale_ratio(1, idx.len() as i64)
        });
        let contract_ok = n == 0
            || matches(&contract(&u, &z), |idx| {
                let mut acc = GradedPoly::zero();
                for b in [1u8, 2] {
                    let mut full = vec![b];
                    full.extend_from_slice(idx);
                    acc += &u(b as usize, &entry(&z, &full));
                }
                acc
            });
        if !lift_ok || !contract_ok {
            bad += 1;
        }
    }
    ok(bad == 0, format!("ranks <= 3, {LITERAL_SAMPLES} samples, {bad} mismatches"))
}

fn identity_models() -> Vec<(&'static str, Model)> {
    vec![("A", fixtures::model_a()), ("B", fixtures::model_b()), ("C", fixtures::model_c())]
}

/// Runs `f` on the resolution built from the solver's lowest-order parameters.
fn with_resolution<T>(m: &Model, f: impl FnOnce(&Koszul, &Resolution) -> T) -> T {
    let split = IndexSplit::compute(m).unwrap();
    let (params, _) = solve_lowest(m, &split, &SolveOptions::default()).unwrap();
    let coords = PrimedCoordinates::new(m, &split, &params).unwrap();
    let k = Koszul::new(m, params).unwrap();
    f(&k, &Resolution::new(&coords))
}

fn suite_failures(names: &[&str], seed: u64) -> Vec<String> {
    let mut failed = Vec::new();
    for (label, m) in identity_models() {
        with_resolution(&m, |k, res| {
            for c in run_suite(k, res, &SuiteOptions { samples: IDENTITY_SAMPLES, seed }) {
                if names.contains(&c.name.as_str()) && !c.passed {
                    failed.push(format!("{label}: {} on {}", c.name, c.witness.unwrap_or_default()));
                }
            }
        });
    }
    failed
}

fn criterion_3() -> Outcome {
    let failed = suite_failures(&IDENTITY_NAMES[..10], SEED + 3);
    // the decomposition with the displayed Lambda
    let mut displayed_bad = 0;
    let mut tried = 0;
    for (_, m) in identity_models() {
        with_resolution(&m, |_, res| {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + 33);
            let vars = resolution_vars(res);
            for i in 0..IDENTITY_SAMPLES {
                let n = 1 + i % 3;
                let x = sample_v(&mut rng, res, &vars, n);
                if x.is_zero() {
                    continue;
                }
                tried += 1;
                let dp = res.delta_plus(&x).unwrap();
                let lam = res.lambda_op(&dp, n).unwrap();
                if &res.delta_plus(&res.delta(&x)).unwrap() + &res.delta(&lam) != x {
                    displayed_bad += 1;
                }
            }
        });
    }
    let passed = failed.is_empty() && displayed_bad == 0;
    Outcome {
        passed,
        expected_failure: failed.is_empty() && displayed_bad > 0,
        detail: format!(
            "models A, B, C x {IDENTITY_SAMPLES} samples: identities with Lambda = I fail {failed:?}; \
             decomposition with the displayed Lambda fails on {displayed_bad}/{tried} samples"
        ),
    }
}

fn criterion_4() -> Outcome {
    let failed = suite_failures(&IDENTITY_NAMES[10..11], SEED + 4);
    ok(failed.is_empty(), format!("every primed generator of A, B, C, both a; failures {failed:?}"))
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let mut passed = true;
    for name in ["model_a.toml", "model_b.toml"] {
        let start = Instant::now();
        let options = BuildOptions { cutoff: 8, seed: SEED, samples: IDENTITY_SAMPLES, free_terms: None };
        let (art, report) = build(&model_file(name), &options).unwrap();
        let took = start.elapsed();
        let exact = report.passed() && art.residual_terms == 0 && art.leftover_terms == 0;
        passed &= exact && took < Duration::from_secs(60);
        notes.push(format!("{name}: residual {} + {} terms above cutoff, {}", art.residual_terms, art.leftover_terms, secs(took)));
    }
    ok(passed, notes.join("; "))
}

fn criterion_6() -> Outcome {
    let m = fixtures::model_c();
    let displayed = Omega1Params::closed_form_l2(&m).unwrap();
    let displayed_terms = Koszul::new(&m, displayed.clone()).unwrap().lowest_residual();
    let mut reversed = displayed.clone();
    for n in &mut reversed.n[2] {
        *n = n.scale_ratio(-1, 1);
    }
    let reversed_zero = Koszul::new(&m, reversed.clone()).unwrap().lowest_residual().is_zero();
    let split = IndexSplit::compute(&m).unwrap();
    let (solved, _) = solve_lowest(&m, &split, &SolveOptions::default()).unwrap();
    let solver_zero = Koszul::new(&m, solved.clone()).unwrap().lowest_residual().is_zero();
    let a_nonzero = (0..m.stage_size(0)).any(|b| (0..m.stage_size(0)).any(|a| !m.a(0, b, a, 0).is_zero()));
    let count = sp2brst_core::sp2tensor::term_count(&displayed_terms);
    let holds = a_nonzero && reversed_zero && solver_zero;
    Outcome {
        passed: holds && count == 0,
        expected_failure: holds && count > 0,
        detail: format!(
            "model C (nonzero A): displayed closed form leaves {count} residual terms; \
             with N sign reversed residual zero = {reversed_zero}; solver parameters residual zero = {solver_zero} \
             (differ from closed form = {})",
            solved != reversed
        ),
    }
}

fn criterion_7() -> Outcome {
    let m = fixtures::model_d();
    let constant_u = m.structure().is_some_and(|u| {
        u.iter().flatten().flatten().all(GradedPoly::is_constant) && u.iter().flatten().flatten().any(|x| !x.is_zero())
    });
    let (charge, lowest, higher) = build_charge(&m, &SolveOptions { cutoff: 3, ..Default::default() }).unwrap();
    let c = fixtures::model_c();
    let (_, lowest_c) = solve_lowest(&c, &IndexSplit::compute(&c).unwrap(), &SolveOptions::default()).unwrap();
    let neumann_ok = lowest.neumann_terms <= m.order() + 1 && lowest_c.neumann_terms <= c.order() + 1;
    ok(
        constant_u && charge.is_solved() && higher.max_degree >= 2 && neumann_ok,
        format!(
            "model D, cutoff 3: residual zero = {}, Pi of degree {}, Neumann terms {} <= {} (model C: {} <= {})",
            charge.is_solved(),
            higher.max_degree,
            lowest.neumann_terms,
            m.order() + 1,
            lowest_c.neumann_terms,
            c.order() + 1
        ),
    )
}

fn criterion_8() -> Outcome {
    let options = SolveOptions { cutoff: 4, ..Default::default() };
    let mut failures = Vec::new();
    let mut lifted = 0;
    for (name, m, observables) in fixtures::all() {
        let split = IndexSplit::compute(&m).unwrap();
        let (charge, _, _) = build_charge(&m, &options).unwrap();
        let coords = PrimedCoordinates::new(&m, &split, &charge.params).unwrap();
        let lifts: Vec<_> = observables.iter().map(|phi| lift_observable(&m, &split, &charge, phi, &options).unwrap()).collect();
        for l in &lifts {
            lifted += 1;
            if !l.is_solved() {
                failures.push(format!("{name}: [Omega, Phi'] for {}", l.phi0.display(m.catalog())));
            }
            if restrict(&coords, &l.phi_prime) != l.phi0 {
                failures.push(format!("{name}: restriction of {}", l.phi0.display(m.catalog())));
            }
        }
        for a in &lifts {
            for b in &lifts {
                let h = verify_homomorphism(&m, &coords, a, b);
                if !(h.bracket && h.product) {
                    failures.push(format!("{name}: homomorphism {h:?}"));
                }
            }
        }
        if observables.len() < 2 {
            failures.push(format!("{name}: fewer than 2 observables"));
        }
    }
    ok(failures.is_empty(), format!("{lifted} observables on A-D, cutoff 4, failures {failures:?}"))
}

fn criterion_9() -> Outcome {
    let corrected = suite_failures(&IDENTITY_NAMES[11..13], SEED + 9);
    let mut displayed_bad = 0;
    let mut tried = 0;
    let shape = SampleShape { max_terms: 3, max_degree: 3, coeff_range: 4 };
    for (_, m) in identity_models() {
        with_resolution(&m, |_, res| {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + 99);
            let vars = resolution_vars(res);
            for _ in 0..IDENTITY_SAMPLES {
                let x = random_poly(&mut rng, &vars, None, &shape).filter(|mono| res.count(mono) > 0);
                if x.is_zero() {
                    continue;
                }
                tried += 1;
                let n = |y: &GradedPoly, k: i32| res.count_power(y, k).unwrap();
                let comm = |y: &GradedPoly| &delta_bar(res, &sigma_bar(res, y)) - &sigma_bar(res, &delta_bar(res, y));
                let shown = &n(&x, 2).scale_int(4) - &res.operator_m_scalar(&n(&x, 1)).scale_int(2);
                let split = &res.operator_m_scalar(&n(&x, -1)).scale_ratio(1, 2) + &comm(&n(&x, -2)).scale_ratio(1, 4);
                if comm(&x) != shown || split != x {
                    displayed_bad += 1;
                }
            }
        });
    }
    let holds = corrected.is_empty();
    Outcome {
        passed: holds && displayed_bad == 0,
        expected_failure: holds && displayed_bad > 0,
        detail: format!(
            "models A, B, C: displayed 4N^2 - 2MN with coefficient 1/2 fails on {displayed_bad}/{tried} scalars; \
             4N^2 - 4MN with coefficient 1 on MN^-1 fails {corrected:?} ({IDENTITY_SAMPLES} samples per model)"
        ),
    }
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    let mut passed = true;
    for (file, observable) in
        [("model_a.toml", "q2"), ("model_b.toml", "q1*p1"), ("model_c.toml", "q1*p1"), ("model_d.toml", "q1*p1")]
    {
        let options = BuildOptions { cutoff: 3, seed: SEED, samples: 10, free_terms: None };
        let runs: Vec<String> = (0..2)
            .map(|_| {
                let (art, _) = build(&model_file(file), &options).unwrap();
                let (with_obs, _) = lift(&art, observable, &LiftOptions::default()).unwrap();
                with_obs.to_json()
            })
            .collect();
        let identical = runs[0] == runs[1];
        let art = sp2brst::artifact::Artifact::from_json(&runs[0]).unwrap();
        let report = verify(&art, SPOT_POINTS, SEED).unwrap();
        let spots = report.checks.iter().filter(|c| c.name.contains("points, seed")).count();
        passed &= identical && report.passed() && spots == 2;
        notes.push(format!("{file}: identical = {identical}, {spots} residuals x {SPOT_POINTS} points zero = {}", report.passed()));
    }
    ok(passed, notes.join("; "))
}

fn main() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let criteria: Vec<(u32, &str, Duration, fn() -> Outcome)> = vec![
        (1, "algebra laws", min(1), criterion_1),
        (2, "components vs literal definitions", min(1), criterion_2),
        (3, "resolution operator identities", min(2), criterion_3),
        (4, "primed delta is the conjugated delta", min(2), criterion_4),
        (5, "master equation, L = 0 and L = 1", min(2), criterion_5),
        (6, "L = 2 closed form", min(5), criterion_6),
        (7, "higher orders", min(5), criterion_7),
        (8, "observables", min(2), criterion_8),
        (9, "bar-operator identity", min(2), criterion_9),
        (10, "reproducibility", min(5), criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (n, title, limit, f) in criteria {
        let o = timed(limit, f);
        let status = if o.passed { "PASS" } else { "FAIL" };
        let note = if o.expected_failure { " [displayed form does not hold; corrected form passes]" } else { "" };
        println!("{status} {n:>2} {title}: {}{note}", o.detail);
        if !o.passed && !o.expected_failure {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
