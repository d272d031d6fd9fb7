//! The four commands, as functions returning a report and an artifact.

use anyhow::{anyhow, bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sp2brst_core::identities::{run_suite, SuiteOptions};
use sp2brst_core::koszul::{Koszul, Omega1Params};
use sp2brst_core::model::Model;
use sp2brst_core::observables::{check_first_class, lift_observable, restrict, verify_homomorphism, ObservableLift};
use sp2brst_core::resolve::{PrimedCoordinates, Resolution, SigmaPatch};
use sp2brst_core::solver::{assemble_and_verify, solve_higher, solve_lowest, truncate, ChargeExpansion, SolveOptions};
use sp2brst_core::sp2tensor::{tensor_bracket, Sp2Tensor};
use sp2brst_core::superalgebra::{parse_poly, Catalog, Coeff, GradedPoly, Var};

use crate::artifact::{self, Artifact, CheckRecord, ObservableRecord, Options, SolverRecord};
use crate::model_file::{parse_model, LoadedModel};

/// Plain-text report ending in a one-line JSON summary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub command: &'static str,
    pub header: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub seed: u64,
}

impl Report {
    fn new(command: &'static str, seed: u64) -> Self {
        Report { command, header: Vec::new(), checks: Vec::new(), seed }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            out.push_str(h);
            out.push('\n');
        }
        for c in &self.checks {
            match (&c.witness, c.passed) {
                (_, true) => out.push_str(&format!("PASS  {}\n", c.name)),
                (Some(w), false) => out.push_str(&format!("FAIL  {}: {w}\n", c.name)),
                (None, false) => out.push_str(&format!("FAIL  {}\n", c.name)),
            }
        }
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let summary = serde_json::json!({
            "command": self.command,
            "passed": self.checks.len() - failed.len(),
            "failed": failed,
            "seed": self.seed,
        });
        out.push_str(&format!("summary: {summary}\n"));
        out
    }
}

fn check(name: impl Into<String>, passed: bool, witness: impl FnOnce() -> String) -> CheckRecord {
    let witness = (!passed).then(witness);
    CheckRecord { name: name.into(), passed, witness }
}

fn first_term(cat: &Catalog, x: &Sp2Tensor) -> String {
    x.components()
        .iter()
        .enumerate()
        .find(|(_, c)| !c.is_zero())
        .map(|(r, c)| {
            let (m, k) = c.terms().next().expect("nonzero component");
            let t = GradedPoly::from_terms([(m.clone(), k.clone())]);
            format!("component {r} contains {}", t.display(cat))
        })
        .unwrap_or_default()
}

fn grading_check(cat: &Catalog, omega: &Sp2Tensor) -> CheckRecord {
    let bad = omega.components().iter().position(|c| !c.is_zero() && (c.parity() != Some(true) || c.ngh(cat) != Some(1)));
    check("Omega odd with ngh 1", bad.is_none(), || format!("component {}", bad.unwrap_or(0)))
}

fn residual_check(name: &str, cat: &Catalog, residual: &Sp2Tensor) -> CheckRecord {
    check(name, residual.is_zero(), || first_term(cat, residual))
}

/// Seeded rational values for the even variables of `cat`.
pub fn random_point(rng: &mut ChaCha8Rng, cat: &Catalog) -> Vec<(Var, Coeff)> {
    cat.vars()
        .filter(|v| !v.is_odd())
        .map(|v| {
            let num: i64 = rng.gen_range(-9..=9);
            let den: i64 = rng.gen_range(1..=9);
            (v, Coeff::new(num.into(), den.into()))
        })
        .collect()
}

/// Evaluates every component of `x` at `samples` seeded points.
fn spot_check(name: &str, cat: &Catalog, x: &Sp2Tensor, samples: usize, seed: u64) -> CheckRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let point = random_point(&mut rng, cat);
        let lookup = |v: Var| point.iter().find(|(w, _)| *w == v).map(|(_, c)| c.clone());
        for (r, comp) in x.components().iter().enumerate() {
            let value = comp.eval_even(&lookup).expect("every even variable is assigned");
            if !value.is_zero() {
                let shown: Vec<String> = point
                    .iter()
                    .filter(|(v, _)| comp.contains_var(*v))
                    .map(|(v, c)| format!("{}={c}", cat.name(*v)))
                    .collect();
                return check(name, false, || {
                    format!("sample {i}, component {r} at {{{}}} gives {}", shown.join(", "), value.display(cat))
                });
            }
        }
    }
    check(format!("{name} ({samples} points, seed {seed})"), true, String::new)
}

fn suite_checks(model: &Model, loaded: &LoadedModel, params: &Omega1Params, options: &SuiteOptions, patch: Option<SigmaPatch>) -> Result<Vec<CheckRecord>> {
    let coords = PrimedCoordinates::new(model, &loaded.split, params)?;
    let k = Koszul::new(model, params.clone())?;
    let res = match &patch {
        Some(p) => Resolution::with_sigma_patch(&coords, p),
        None => Resolution::new(&coords),
    };
    Ok(run_suite(&k, &res, options)
        .into_iter()
        .map(|c| CheckRecord { name: c.name, passed: c.passed, witness: c.witness })
        .collect())
}

/// Stage-2 parameters in closed form, with the sign of `N` used by the solver.
fn closed_form_check(model: &Model) -> CheckRecord {
    let name = "closed-form stage-2 parameters solve the lowest-order equation";
    let run = || -> sp2brst_core::Result<Sp2Tensor> {
        let mut p = Omega1Params::closed_form_l2(model)?;
        for n in &mut p.n[2] {
            *n = n.scale_ratio(-1, 1);
        }
        Ok(Koszul::new(model, p)?.lowest_residual())
    };
    match run() {
        Ok(r) => residual_check(name, model.catalog(), &r),
        Err(e) => check(name, false, || e.to_string()),
    }
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub cutoff: u32,
    pub seed: u64,
    /// Random elements per identity of the suite.
    pub samples: usize,
    /// Text of a free-term file.
    pub free_terms: Option<String>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { cutoff: 3, seed: 0, samples: 50, free_terms: None }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FreeTermFile {
    y: Option<Vec<String>>,
    upsilon: Option<Vec<String>>,
}

fn parse_tensor(cat: &Catalog, comps: &[String], what: &str) -> Result<Sp2Tensor> {
    if comps.is_empty() {
        bail!("{what}: no components");
    }
    let polys = comps
        .iter()
        .enumerate()
        .map(|(r, s)| parse_poly(cat, s).map_err(|e| anyhow!("{what}[{r}]: {e}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sp2Tensor::from_components(polys))
}

/// `(Y, Upsilon)` from a free-term file: arrays of component strings.
pub fn parse_free_terms(cat: &Catalog, text: &str) -> Result<(Option<Sp2Tensor>, Option<Sp2Tensor>)> {
    let f: FreeTermFile = toml::from_str(text).map_err(|e| anyhow!("free-term file: syntax error: {e}"))?;
    let y = f.y.as_deref().map(|c| parse_tensor(cat, c, "y")).transpose()?;
    let u = f.upsilon.as_deref().map(|c| parse_tensor(cat, c, "upsilon")).transpose()?;
    Ok((y, u))
}

fn solve_options(cat: &Catalog, o: &Options) -> Result<SolveOptions> {
    Ok(SolveOptions {
        free_term_y: o.free_term_y.as_ref().map(|t| artifact::decode_tensor(cat, t)).transpose()?,
        free_term_upsilon: o.free_term_upsilon.as_ref().map(|t| artifact::decode_tensor(cat, t)).transpose()?,
        cutoff: o.cutoff,
        ..Default::default()
    })
}

/// Split, lowest order, higher orders, assembly and the identity suite.
/// The report passes iff the master equation holds to the cutoff.
pub fn build(loaded: &LoadedModel, options: &BuildOptions) -> Result<(Artifact, Report)> {
    let model = &loaded.model;
    let cat = model.catalog();
    let (y, u) = match &options.free_terms {
        Some(text) => parse_free_terms(cat, text)?,
        None => (None, None),
    };
    let recorded = Options {
        cutoff: options.cutoff,
        seed: options.seed,
        samples: options.samples,
        free_term_y: y.as_ref().map(|t| artifact::encode_tensor(cat, t)),
        free_term_upsilon: u.as_ref().map(|t| artifact::encode_tensor(cat, t)),
    };
    let solve = solve_options(cat, &recorded)?;
    let (params, lowest) = solve_lowest(model, &loaded.split, &solve)?;
    let (pi, higher) = solve_higher(model, &loaded.split, &params, &solve)?;
    let charge = assemble_and_verify(model, &params, &pi, options.cutoff)?;
    let mut report = Report::new("build", options.seed);
    report.header.push(format!(
        "build: L = {}, cutoff {}, {} pairs, {} constraints",
        model.order(),
        options.cutoff,
        model.pair_count(),
        model.stage_size(0)
    ));
    report.checks.push(residual_check("master equation to cutoff", cat, &charge.residual));
    let mut extra = vec![grading_check(cat, &charge.omega)];
    let k = Koszul::new(model, params.clone())?;
    extra.push(residual_check("lowest-order equation", cat, &k.lowest_residual()));
    if model.order() == 2 {
        extra.push(closed_form_check(model));
    }
    let suite = SuiteOptions { samples: options.samples, seed: options.seed };
    extra.extend(suite_checks(model, loaded, &params, &suite, None)?);
    let art = Artifact {
        format: artifact::FORMAT.into(),
        model: loaded.source.clone(),
        options: recorded,
        catalog: artifact::catalog_record(cat),
        params: artifact::encode_params(cat, &params),
        omega: artifact::encode_tensor(cat, &charge.omega),
        pi: artifact::encode_tensor(cat, &charge.pi),
        residual_terms: sp2brst_core::sp2tensor::term_count(&charge.residual),
        leftover_terms: charge.leftover_terms,
        solver: SolverRecord {
            lowest_rounds: lowest.rounds,
            neumann_terms: lowest.neumann_terms,
            gauge_fixed: lowest.gauge_fixed,
            higher_iterations: higher.iterations,
            max_degree: higher.max_degree,
            truncated: higher.truncated,
        },
        checks: extra.clone(),
        observables: Vec::new(),
    };
    // informational checks are shown but only the residual decides the status
    report.header.push(format!("terms in Omega: {}", art.omega.iter().map(Vec::len).sum::<usize>()));
    for c in &extra {
        report.header.push(format!("{}  {}", if c.passed { "pass" } else { "FAIL" }, c.name));
    }
    Ok((art, report))
}

/// The model and decoded charge of an artifact, checked against each other.
pub struct Decoded {
    pub loaded: LoadedModel,
    pub params: Omega1Params,
    pub omega: Sp2Tensor,
    pub pi: Sp2Tensor,
}

pub fn decode(art: &Artifact) -> Result<Decoded> {
    let loaded = parse_model(&art.model)?;
    let cat = loaded.model.catalog();
    if artifact::catalog_record(cat) != art.catalog {
        bail!("artifact catalog does not match its model");
    }
    let params = artifact::decode_params(cat, &art.params)?;
    let omega = artifact::decode_tensor(cat, &art.omega)?;
    let pi = artifact::decode_tensor(cat, &art.pi)?;
    Ok(Decoded { loaded, params, omega, pi })
}

fn observable_lift(cat: &Catalog, rec: &ObservableRecord, cutoff: u32) -> Result<ObservableLift> {
    Ok(ObservableLift {
        phi0: artifact::decode_poly(cat, &rec.phi0)?,
        k: artifact::decode_poly(cat, &rec.k)?,
        phi_prime: artifact::decode_poly(cat, &rec.phi_prime)?,
        cutoff,
        residual: Sp2Tensor::zero(1),
        leftover_terms: rec.leftover_terms,
        iterations: rec.iterations,
    })
}

/// Re-checks an artifact exactly, then at `samples` seeded rational points.
pub fn verify(art: &Artifact, samples: usize, seed: u64) -> Result<Report> {
    let mut report = Report::new("verify", seed);
    let d = decode(art)?;
    let model = &d.loaded.model;
    let cat = model.catalog();
    let cutoff = art.options.cutoff;
    report.header.push(format!("verify: L = {}, cutoff {cutoff}, {samples} sample points, seed {seed}", model.order()));
    report.checks.push(grading_check(cat, &d.omega));
    let residual = truncate(cat, &tensor_bracket(cat, &d.omega, &d.omega), cutoff);
    report.checks.push(residual_check("master equation to cutoff", cat, &residual));
    if samples > 0 {
        report.checks.push(spot_check("master equation at sample points", cat, &residual, samples, seed));
    }
    let k = Koszul::new(model, d.params.clone())?;
    let rebuilt = k.omega1() + &d.pi;
    report.checks.push(check("Omega = Omega1 + Pi", rebuilt == d.omega, || first_term(cat, &(&rebuilt - &d.omega))));
    report.checks.push(residual_check("lowest-order equation", cat, &k.lowest_residual()));
    let suite = SuiteOptions { samples: art.options.samples, seed: art.options.seed };
    report.checks.extend(suite_checks(model, &d.loaded, &d.params, &suite, None)?);
    let coords = PrimedCoordinates::new(model, &d.loaded.split, &d.params)?;
    for (j, rec) in art.observables.iter().enumerate() {
        let lift = observable_lift(cat, rec, cutoff)?;
        let tag = format!("observable {} `{}`", j + 1, rec.source);
        let phi = Sp2Tensor::scalar(lift.phi_prime.clone());
        let r = truncate(cat, &tensor_bracket(cat, &d.omega, &phi), cutoff);
        report.checks.push(residual_check(&format!("[Omega, Phi'] = 0 for {tag}"), cat, &r));
        if samples > 0 {
            report.checks.push(spot_check(&format!("[Omega, Phi'] at sample points for {tag}"), cat, &r, samples, seed));
        }
        let back = restrict(&coords, &lift.phi_prime);
        report.checks.push(check(format!("restriction returns Phi0 for {tag}"), back == lift.phi0, || {
            back.display(cat).to_string()
        }));
        report.checks.push(check(format!("Phi' = Phi0 + K for {tag}"), &lift.phi0 + &lift.k == lift.phi_prime, String::new));
    }
    Ok(report)
}

#[derive(Clone, Debug, Default)]
pub struct LiftOptions {
    /// Defaults to the cutoff of the charge.
    pub cutoff: Option<u32>,
    /// Compare brackets and products with every observable already lifted.
    pub homomorphism: bool,
}

/// Lifts `source`, a polynomial in the phase-space variables, and appends it
/// to a copy of the artifact. Rejection of a function that is not first
/// class is an `Err` carrying the reduced brackets.
pub fn lift(art: &Artifact, source: &str, options: &LiftOptions) -> Result<(Artifact, Report)> {
    let d = decode(art)?;
    let model = &d.loaded.model;
    let cat = model.catalog();
    let cutoff = options.cutoff.unwrap_or(art.options.cutoff);
    let source = source.trim();
    let phi0 = parse_poly(cat, source).map_err(|e| anyhow!("observable `{source}`: {e}"))?;
    let cert = check_first_class(model, &phi0)?;
    if !cert.first_class {
        let parts: Vec<String> = cert
            .remainders
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_zero())
            .map(|(a, r)| format!("{{{source}, T_{}}} = {} mod T", a + 1, r.display(cat)))
            .collect();
        bail!("`{source}` is not first class: {}", parts.join(", "));
    }
    let charge: ChargeExpansion = assemble_and_verify(model, &d.params, &d.pi, cutoff)?;
    let solve = SolveOptions { cutoff, ..Default::default() };
    let lifted = lift_observable(model, &d.loaded.split, &charge, &phi0, &solve)?;
    let coords = PrimedCoordinates::new(model, &d.loaded.split, &d.params)?;
    let mut report = Report::new("lift", art.options.seed);
    report.header.push(format!("lift: `{source}`, cutoff {cutoff}, {} iterations", lifted.iterations));
    report.header.push(format!("K = {}", lifted.k.display(cat)));
    let mut checks = vec![residual_check("[Omega, Phi'] = 0 to cutoff", cat, &lifted.residual)];
    let back = restrict(&coords, &lifted.phi_prime);
    checks.push(check("restriction returns Phi0", back == phi0, || back.display(cat).to_string()));
    if options.homomorphism {
        for (j, rec) in art.observables.iter().enumerate() {
            let other = observable_lift(cat, rec, cutoff)?;
            let h = verify_homomorphism(model, &coords, &lifted, &other);
            checks.push(check(format!("bracket homomorphism with observable {}", j + 1), h.bracket, String::new));
            checks.push(check(format!("product homomorphism with observable {}", j + 1), h.product, String::new));
        }
    }
    report.checks = checks.clone();
    let mut out = art.clone();
    out.observables.push(ObservableRecord {
        source: source.to_string(),
        phi0: artifact::encode_poly(cat, &phi0),
        k: artifact::encode_poly(cat, &lifted.k),
        phi_prime: artifact::encode_poly(cat, &lifted.phi_prime),
        residual_terms: sp2brst_core::sp2tensor::term_count(&lifted.residual),
        leftover_terms: lifted.leftover_terms,
        iterations: lifted.iterations,
        checks,
    });
    Ok((out, report))
}

/// Runs the operator identities on the primed coordinates built from the
/// lowest-order solution. `patch` replaces one `sigma` table entry.
pub fn identity_suite(loaded: &LoadedModel, samples: usize, seed: u64, patch: Option<SigmaPatch>) -> Result<Report> {
    let model = &loaded.model;
    let (params, _) = solve_lowest(model, &loaded.split, &SolveOptions::default())?;
    let mut report = Report::new("identity-suite", seed);
    report.header.push(format!("identity-suite: L = {}, {samples} samples per identity, seed {seed}", model.order()));
    report.checks = suite_checks(model, loaded, &params, &SuiteOptions { samples, seed }, patch)?;
    Ok(report)
}

/// Primed coordinates the identity suite runs on, for building a patch.
pub fn suite_coordinates(loaded: &LoadedModel) -> Result<PrimedCoordinates> {
    let (params, _) = solve_lowest(&loaded.model, &loaded.split, &SolveOptions::default())?;
    Ok(PrimedCoordinates::new(&loaded.model, &loaded.split, &params)?)
}
