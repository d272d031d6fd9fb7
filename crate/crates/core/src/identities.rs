//! Seeded operator identity suite on the primed coordinates of a model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::koszul::Koszul;
use crate::observables::{delta_bar, sigma_bar};
use crate::resolve::Resolution;
use crate::sampling::{random_tensor, SampleShape};
use crate::sp2tensor::Sp2Tensor;
use crate::superalgebra::{GradedPoly, Var, VarKind};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    /// First counterexample, rendered with catalog names.
    pub witness: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { samples: 50, seed: 0 }
    }
}

pub const IDENTITY_NAMES: [&str; 13] = [
    "delta^2 = 0",
    "sigma^2 = 0",
    "sigma M = (M - N) sigma",
    "delta M = (M + N) delta",
    "sigma delta + delta sigma = nN + M",
    "M^3 = 3NM^2 - 2N^2M",
    "M^4 = 7N^2M^2 - 6N^3M",
    "delta delta+ delta = delta",
    "(delta+)^2 = 0",
    "delta+ delta + delta delta+ = 1 on V",
    "primed delta = conjugated delta",
    "bar commutator = 4N^2 - 4MN",
    "X = MN^-1 X + 1/4 [bar delta, bar sigma] N^-2 X",
];

fn shape() -> SampleShape {
    SampleShape { max_terms: 3, max_degree: 3, coeff_range: 4 }
}

/// Primed variables an element of `V` is built from.
pub fn resolution_vars(res: &Resolution) -> Vec<Var> {
    let cat = res.coords().catalog();
    cat.vars()
        .filter(|&v| {
            matches!(
                cat.descriptor(v).kind,
                VarKind::XiPrime | VarKind::MomentumPPrime | VarKind::LambdaPrime | VarKind::GhostC
            )
        })
        .collect()
}

/// Random tensor whose monomials all have positive resolution degree.
pub fn sample_v(rng: &mut ChaCha8Rng, res: &Resolution, vars: &[Var], rank: usize) -> Sp2Tensor {
    random_tensor(rng, rank, vars, None, &shape()).map(|x| x.filter(|m| res.count(m) > 0))
}

fn render(res: &Resolution, x: &Sp2Tensor) -> String {
    let cat = res.coords().catalog();
    let comps: Vec<String> = x.components().iter().map(|c| c.display(cat).to_string()).collect();
    format!("rank {}: [{}]", x.rank(), comps.join("; "))
}

/// Whether the identity holds on one sample of rank `n`.
type Check<'a> = dyn Fn(&Sp2Tensor, usize) -> Result<bool> + 'a;

fn run_tensor(
    name: &str,
    res: &Resolution,
    options: &SuiteOptions,
    index: u64,
    ranks: std::ops::RangeInclusive<usize>,
    check: &Check,
) -> IdentityCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_mul(31).wrapping_add(index));
    let vars = resolution_vars(res);
    let ranks: Vec<usize> = ranks.collect();
    let mut witness = None;
    for i in 0..options.samples {
        let n = ranks[i % ranks.len()];
        let x = sample_v(&mut rng, res, &vars, n);
        let ok = check(&x, n).unwrap_or(false);
        if !ok {
            witness = Some(render(res, &x));
            break;
        }
    }
    IdentityCheck { name: name.to_string(), passed: witness.is_none(), samples: options.samples, witness }
}

fn m_power(res: &Resolution, x: &Sp2Tensor, k: usize) -> Sp2Tensor {
    (0..k).fold(x.clone(), |y, _| res.operator_m(&y))
}

/// `M^k = (2^{k-1} - 1) N^{k-2} M^2 - (2^{k-1} - 2) N^{k-1} M`.
fn m_power_identity(res: &Resolution, x: &Sp2Tensor, k: usize) -> Result<bool> {
    let a = (1i64 << (k - 1)) - 1;
    let b = (1i64 << (k - 1)) - 2;
    let lhs = m_power(res, x, k);
    let rhs = &res.count_tensor(&m_power(res, x, 2), k as i32 - 2)?.scale_ratio(a, 1)
        - &res.count_tensor(&m_power(res, x, 1), k as i32 - 1)?.scale_ratio(b, 1);
    Ok(lhs == rhs)
}

fn bar_commutator(res: &Resolution, y: &GradedPoly) -> GradedPoly {
    &delta_bar(res, &sigma_bar(res, y)) - &sigma_bar(res, &delta_bar(res, y))
}

/// Every identity of [`IDENTITY_NAMES`], in order. `k` supplies the
/// unprimed `delta` for the conjugation check and must carry the
/// parameters the coordinates of `res` were built from.
pub fn run_suite(k: &Koszul, res: &Resolution, options: &SuiteOptions) -> Vec<IdentityCheck> {
    let nn = |y: &Sp2Tensor| res.count_tensor(y, 1);
    let scalar = |x: &Sp2Tensor| x.comp(0).clone();
    let names = IDENTITY_NAMES;
    let mut out = vec![
        run_tensor(names[0], res, options, 0, 0..=2, &|x, _| Ok(res.delta(&res.delta(x)).is_zero())),
        run_tensor(names[1], res, options, 1, 2..=3, &|x, _| Ok(res.sigma(&res.sigma(x)).is_zero())),
        run_tensor(names[2], res, options, 2, 1..=3, &|x, _| {
            let s = res.sigma(x);
            Ok(res.sigma(&res.operator_m(x)) == &res.operator_m(&s) - &nn(&s)?)
        }),
        run_tensor(names[3], res, options, 3, 0..=2, &|x, _| {
            let d = res.delta(x);
            Ok(res.delta(&res.operator_m(x)) == &res.operator_m(&d) + &nn(&d)?)
        }),
        run_tensor(names[4], res, options, 4, 0..=3, &|x, n| {
            let mut lhs = res.sigma(&res.delta(x));
            if n > 0 {
                lhs = &lhs + &res.delta(&res.sigma(x));
            }
            Ok(lhs == &nn(x)?.scale_ratio(n as i64, 1) + &res.operator_m(x))
        }),
        run_tensor(names[5], res, options, 5, 0..=2, &|x, _| m_power_identity(res, x, 3)),
        run_tensor(names[6], res, options, 6, 0..=1, &|x, _| m_power_identity(res, x, 4)),
        run_tensor(names[7], res, options, 7, 0..=3, &|x, _| {
            let dx = res.delta(x);
            Ok(res.delta(&res.delta_plus(&dx)?) == dx)
        }),
        run_tensor(names[8], res, options, 8, 1..=3, &|x, _| Ok(res.delta_plus(&res.delta_plus(x)?)?.is_zero())),
        run_tensor(names[9], res, options, 9, 1..=3, &|x, _| {
            let back = &res.delta_plus(&res.delta(x))? + &res.delta(&res.delta_plus(x)?);
            Ok(back == *x)
        }),
    ];
    out.push(conjugation_check(names[10], k, res));
    out.push(run_tensor(names[11], res, options, 11, 0..=0, &|x, _| {
        let y = scalar(x);
        let n = |z: &GradedPoly, p: i32| res.count_power(z, p);
        let rhs = &n(&y, 2)?.scale_int(4) - &res.operator_m_scalar(&n(&y, 1)?).scale_int(4);
        Ok(bar_commutator(res, &y) == rhs)
    }));
    out.push(run_tensor(names[12], res, options, 12, 0..=0, &|x, _| {
        let y = scalar(x);
        let first = res.operator_m_scalar(&res.count_power(&y, -1)?);
        let second = bar_commutator(res, &res.count_power(&y, -2)?).scale_ratio(1, 4);
        Ok(&first + &second == y)
    }));
    out
}

/// `delta'` on each primed generator against `phi o delta o phi^{-1}`.
fn conjugation_check(name: &str, k: &Koszul, res: &Resolution) -> IdentityCheck {
    let coords = res.coords();
    let vars = resolution_vars(res);
    let mut witness = None;
    'outer: for &v in &vars {
        for a in [1, 2] {
            let x = GradedPoly::var(v);
            let conj = coords.to_primed(&k.delta_scalar(a, &coords.from_primed(&x)));
            if res.delta_scalar(a, &x) != conj {
                witness = Some(format!("delta^{a} {}", coords.catalog().name(v)));
                break 'outer;
            }
        }
    }
    IdentityCheck { name: name.to_string(), passed: witness.is_none(), samples: vars.len(), witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::koszul::Omega1Params;
    use crate::resolve::{IndexSplit, PrimedCoordinates};

    #[test]
    fn model_a_suite_passes() {
        let m = fixtures::model_a();
        let split = IndexSplit::compute(&m).unwrap();
        let params = Omega1Params::zero(&m);
        let coords = PrimedCoordinates::new(&m, &split, &params).unwrap();
        let k = Koszul::new(&m, params).unwrap();
        let res = Resolution::new(&coords);
        let report = run_suite(&k, &res, &SuiteOptions { samples: 8, seed: 1 });
        assert_eq!(report.len(), IDENTITY_NAMES.len());
        assert!(report.iter().all(|c| c.passed), "{report:?}");
    }
}
