//! `delta`, `sigma_a`, `N`, `M`, `U`, `delta^+` and `Lambda` in primed
//! coordinates.
//!
//! On tensors `delta` is the plain cyclic sum `u^{{a_1} X^{a_2..a_{n+1}}}`,
//! i.e. `(n+1)` times [`lift`]. This is the normalization under which
//! `(sigma delta + delta sigma) X = (nN + M) X` holds on `S^n`; the
//! averaged lift used by the master equation is handled by
//! [`Resolution::delta_plus_averaged`].

use super::primed::PrimedCoordinates;
use super::split::IndexRole;
use crate::sp2tensor::{contract, lift, Sp2Tensor};
use crate::superalgebra::{Coeff, GradedPoly, Monomial, Var, VarKind};
use crate::{Error, Result};

fn ratio(num: i64, den: i64) -> Coeff {
    Coeff::new(num.into(), den.into())
}

/// Replacement for one entry of the `sigma_a` generator table. Only used
/// to check that the identity suite notices a broken table.
#[derive(Clone, Debug)]
pub struct SigmaPatch {
    pub a: usize,
    pub var: Var,
    pub image: GradedPoly,
}

/// The homotopy data of a [`PrimedCoordinates`] system.
#[derive(Clone, Copy, Debug)]
pub struct Resolution<'c> {
    coords: &'c PrimedCoordinates,
    patch: Option<&'c SigmaPatch>,
}

impl<'c> Resolution<'c> {
    pub fn new(coords: &'c PrimedCoordinates) -> Self {
        Resolution { coords, patch: None }
    }

    pub fn with_sigma_patch(coords: &'c PrimedCoordinates, patch: &'c SigmaPatch) -> Self {
        Resolution { coords, patch: Some(patch) }
    }

    pub fn coords(&self) -> &'c PrimedCoordinates {
        self.coords
    }

    fn p(&self, s: i64, alpha: usize, r: i64, t: i64) -> Option<GradedPoly> {
        if s < 0 || r < 0 || t < 0 || r + t != s + 1 {
            return None;
        }
        Some(GradedPoly::var(self.coords.catalog().ghost_p_prime(s as u32, alpha as u32, r as u32)))
    }

    fn l(&self, s: i64, alpha: usize, r: i64, t: i64) -> Option<GradedPoly> {
        if s < 0 || r < 0 || t < 0 || r + t != s {
            return None;
        }
        Some(GradedPoly::var(self.coords.catalog().lambda_prime(s as u32, alpha as u32, r as u32)))
    }

    /// `xi'_{A}` for `A ∈ A_0`.
    fn xi_of(&self, a: usize) -> GradedPoly {
        let split = self.coords.split();
        let j = split.kept(0).iter().position(|&x| x == a).expect("index of A_0");
        GradedPoly::var(self.coords.catalog().xi_prime((self.coords.regularity_count() + j) as u32))
    }

    /// `P'_{f(A)|(r,t)}` for `A ∈ A_s`; for `s = 0` this is `xi'_A` at `(0,0)`.
    fn p_below(&self, s: usize, a: usize, r: i64, t: i64) -> Option<GradedPoly> {
        if s == 0 {
            return (r == 0 && t == 0).then(|| self.xi_of(a));
        }
        self.p(s as i64 - 1, self.coords.split().f_of(s - 1, a), r, t)
    }

    fn lambda_below(&self, s: usize, a: usize, r: i64, t: i64) -> Option<GradedPoly> {
        if s == 0 {
            return None;
        }
        self.l(s as i64 - 1, self.coords.split().f_of(s - 1, a), r, t)
    }

    /// `(stage, alpha, r, t)` of a primed ghost variable.
    fn unpack(&self, v: Var) -> (usize, usize, i64, i64) {
        let d = self.coords.catalog().descriptor(v);
        (d.stage as usize, d.base as usize, d.sp2.0 as i64, d.sp2.1 as i64)
    }

    /// `A ∈ A_{s+1}` with `f(A) = alpha`.
    fn preimage(&self, s: usize, j: usize) -> usize {
        self.coords.split().kept(s + 1)[j]
    }

    /// Generator table of `delta^a` in primed coordinates.
    pub fn delta_generator(&self, a: usize, v: Var) -> Option<GradedPoly> {
        let d = self.coords.catalog().descriptor(v);
        match d.kind {
            VarKind::MomentumPPrime => {
                let (s, alpha, r, t) = self.unpack(v);
                match self.coords.role(s, alpha) {
                    IndexRole::Image(_) => None,
                    IndexRole::Kept if a == 1 => self.p_below(s, alpha, r - 1, t).map(|x| x.scale(&ratio(1, t + 1))),
                    IndexRole::Kept => self.p_below(s, alpha, r, t - 1).map(|x| x.scale(&ratio(1, r + 1))),
                }
            }
            VarKind::LambdaPrime => {
                let (s, alpha, r, t) = self.unpack(v);
                let s = s as i64;
                match self.coords.role(s as usize, alpha) {
                    IndexRole::Image(_) if a == 1 => self.p(s, alpha, r, t + 1).map(|x| x.scale(&ratio(-(t + 1), t + 2))),
                    IndexRole::Image(_) => self.p(s, alpha, r + 1, t).map(|x| x.scale(&ratio(r + 1, r + 2))),
                    IndexRole::Kept => {
                        let (low, p) = if a == 1 {
                            (
                                self.lambda_below(s as usize, alpha, r - 1, t).map(|x| x.scale(&ratio(1, t + 1))),
                                self.p(s, alpha, r, t + 1).unwrap(),
                            )
                        } else {
                            (
                                self.lambda_below(s as usize, alpha, r, t - 1).map(|x| x.scale(&ratio(1, r + 1))),
                                -self.p(s, alpha, r + 1, t).unwrap(),
                            )
                        };
                        Some(match low {
                            Some(x) => &x + &p,
                            None => p,
                        })
                    }
                }
            }
            _ => None,
        }
    }

    /// Generator table of `sigma_a`.
    pub fn sigma_generator(&self, a: usize, v: Var) -> Option<GradedPoly> {
        if let Some(p) = self.patch.filter(|p| p.a == a && p.var == v) {
            return Some(p.image.clone());
        }
        let d = self.coords.catalog().descriptor(v);
        match d.kind {
            VarKind::XiPrime => {
                let ai = self.coords.xi_constraint(d.base as usize)?;
                let (r, t) = if a == 1 { (1, 0) } else { (0, 1) };
                self.p(0, ai, r, t)
            }
            VarKind::MomentumPPrime => {
                let (s, alpha, r, t) = self.unpack(v);
                let si = s as i64;
                match self.coords.role(s, alpha) {
                    IndexRole::Image(j) => {
                        let up = self.preimage(s, j);
                        let (hi, low, k) = if a == 1 {
                            (
                                self.p(si + 1, up, r + 1, t).map(|x| x.scale_int(r + 1)),
                                self.l(si, alpha, r, t - 1).map(|x| -x),
                                ratio(t + 1, si + 2),
                            )
                        } else {
                            (
                                self.p(si + 1, up, r, t + 1).map(|x| x.scale_int(t + 1)),
                                self.l(si, alpha, r - 1, t),
                                ratio(r + 1, si + 2),
                            )
                        };
                        let body = hi.unwrap_or_default() + low.unwrap_or_default();
                        Some(body.scale(&k))
                    }
                    IndexRole::Kept if a == 1 => self.l(si, alpha, r, t - 1).map(|x| x.scale(&ratio(t, si + 1))),
                    IndexRole::Kept => self.l(si, alpha, r - 1, t).map(|x| x.scale(&ratio(-r, si + 1))),
                }
            }
            VarKind::LambdaPrime => {
                let (s, alpha, r, t) = self.unpack(v);
                let si = s as i64;
                match self.coords.role(s, alpha) {
                    IndexRole::Image(j) => {
                        let up = self.preimage(s, j);
                        let k = ratio((r + 1) * (t + 1), si + 2);
                        let target = if a == 1 { self.l(si + 1, up, r + 1, t) } else { self.l(si + 1, up, r, t + 1) };
                        target.map(|x| x.scale(&k))
                    }
                    IndexRole::Kept => None,
                }
            }
            _ => None,
        }
    }

    pub fn delta_scalar(&self, a: usize, x: &GradedPoly) -> GradedPoly {
        x.apply_derivation(true, &|v| self.delta_generator(a, v))
    }

    pub fn sigma_scalar(&self, a: usize, x: &GradedPoly) -> GradedPoly {
        x.apply_derivation(true, &|v| self.sigma_generator(a, v))
    }

    /// Resolution degree of a monomial: its total degree in `xi'_{A_0}`,
    /// `P'` and `lambda'`.
    pub fn count(&self, m: &Monomial) -> u32 {
        let cat = self.coords.catalog();
        let nf = self.coords.regularity_count() as u32;
        m.degree_in(|v| {
            let d = cat.descriptor(v);
            match d.kind {
                VarKind::XiPrime => d.base >= nf,
                VarKind::MomentumPPrime | VarKind::LambdaPrime => true,
                _ => false,
            }
        })
    }

    /// `N^k x`; negative powers need `x ∈ V`.
    pub fn count_power(&self, x: &GradedPoly, k: i32) -> Result<GradedPoly> {
        if k < 0 {
            if let Some((m, _)) = x.terms().find(|(m, _)| self.count(m) == 0) {
                let mono = GradedPoly::from_terms([(m.clone(), Coeff::from_integer(1.into()))]);
                return Err(Error::OutsideV(mono.display(self.coords.catalog()).to_string()));
            }
        }
        Ok(x.map_terms(|m, c| {
            let n = Coeff::from_integer(self.count(m).into());
            let mut out = c.clone();
            for _ in 0..k.unsigned_abs() {
                out = if k > 0 { out * &n } else { out / &n };
            }
            out
        }))
    }

    /// `M = sigma_a delta^a` on scalars.
    pub fn operator_m_scalar(&self, x: &GradedPoly) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for a in [1, 2] {
            out += &self.sigma_scalar(a, &self.delta_scalar(a, x));
        }
        out
    }

    /// `delta: S^n -> S^{n+1}`, the cyclic sum.
    pub fn delta(&self, x: &Sp2Tensor) -> Sp2Tensor {
        let n = x.rank() as i64;
        lift(&|a: usize, y: &GradedPoly| self.delta_scalar(a, y), x).scale_ratio(n + 1, 1)
    }

    /// `sigma: S^n -> S^{n-1}`.
    pub fn sigma(&self, x: &Sp2Tensor) -> Sp2Tensor {
        contract(&|a: usize, y: &GradedPoly| self.sigma_scalar(a, y), x)
    }

    pub fn count_tensor(&self, x: &Sp2Tensor, k: i32) -> Result<Sp2Tensor> {
        x.try_map(|y| self.count_power(y, k))
    }

    pub fn operator_m(&self, x: &Sp2Tensor) -> Sp2Tensor {
        x.map(|y| self.operator_m_scalar(y))
    }

    /// `U` on `S^n`.
    pub fn operator_u(&self, x: &Sp2Tensor) -> Result<Sp2Tensor> {
        let n = x.rank() as i64;
        let n1 = self.count_tensor(x, -1)?;
        let n2 = self.count_tensor(x, -2)?;
        let n3 = self.count_tensor(x, -3)?;
        let m_n2 = self.operator_m(&n2);
        let mm_n3 = self.operator_m(&self.operator_m(&n3));
        if n == 0 {
            // (11 N^{-1} - 6 M N^{-2} + M^2 N^{-3}) / 6
            let acc = &(&n1.scale_ratio(11, 1) - &m_n2.scale_ratio(6, 1)) + &mm_n3;
            return Ok(acc.scale_ratio(1, 6));
        }
        // N^{-1}/n - ((n+3) M N^{-2} - M^2 N^{-3}) / (n(n+1)(n+2))
        let tail = &m_n2.scale_ratio(n + 3, 1) - &mm_n3;
        Ok(&n1.scale_ratio(1, n) - &tail.scale_ratio(1, n * (n + 1) * (n + 2)))
    }

    /// `delta^+ = U sigma: S^n -> S^{n-1}`, inverse to the cyclic-sum `delta`.
    pub fn delta_plus(&self, x: &Sp2Tensor) -> Result<Sp2Tensor> {
        if x.rank() == 0 {
            return Ok(Sp2Tensor::zero(0));
        }
        self.operator_u(&self.sigma(x))
    }

    /// Generalized inverse of the averaged `delta` of [`lift`]: on `S^n`
    /// that operator is `delta / n`, so its inverse is `n delta^+`.
    pub fn delta_plus_averaged(&self, x: &Sp2Tensor) -> Result<Sp2Tensor> {
        let n = x.rank() as i64;
        Ok(self.delta_plus(x)?.scale_ratio(n, 1))
    }

    /// `Lambda` on `S^n`, `n >= 1`.
    pub fn lambda_op(&self, x: &Sp2Tensor, n: usize) -> Result<Sp2Tensor> {
        let n = n as i64;
        let m_n1 = self.operator_m(&self.count_tensor(x, -1)?);
        let mm_n2 = self.operator_m(&self.operator_m(&self.count_tensor(x, -2)?));
        let acc = &(&x.scale_ratio(n * (n * n + 4 * n + 6), 1) - &m_n1.scale_ratio(n - 4, 1)) - &mm_n2.scale_ratio(2, 1);
        Ok(acc.scale_ratio(1, n * (n + 1) * (n + 2)))
    }

    /// `delta^+` on tensors written in the original variables.
    pub fn delta_plus_original(&self, x: &Sp2Tensor) -> Result<Sp2Tensor> {
        let xp = self.coords.to_primed_tensor(x);
        Ok(self.coords.from_primed_tensor(&self.delta_plus_averaged(&xp)?))
    }
}
