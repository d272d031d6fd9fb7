//! Reducible first-class constraint systems.

use crate::groebner::GroebnerBasis;
use crate::superalgebra::{poisson_bracket, Catalog, GradedPoly, PhaseSpaceLayout, VarKind};
use crate::{Error, Result};

/// `m[row][col]`.
pub type Matrix = Vec<Vec<GradedPoly>>;

/// Regularity data: the functions `F` completing `T_{A_0}` to coordinates,
/// and optionally the inverse map.
#[derive(Clone, Debug, PartialEq)]
pub struct Regularity {
    pub functions: Vec<GradedPoly>,
    /// Original variables, in catalog order `p_1, q^1, p_2, …`, written in
    /// the primed coordinates `xi'`.
    pub inverse: Option<Vec<GradedPoly>>,
}

#[derive(Clone, Debug)]
pub struct Model {
    layout: PhaseSpaceLayout,
    catalog: Catalog,
    constraints: Vec<GradedPoly>,
    z: Vec<Matrix>,
    a: Vec<Vec<Matrix>>,
    structure: Option<Vec<Matrix>>,
    regularity: Option<Regularity>,
}

/// Raw model data; [`ModelData::build`] validates it.
#[derive(Clone, Debug, Default)]
pub struct ModelData {
    pub layout: PhaseSpaceLayout,
    pub constraints: Vec<GradedPoly>,
    /// `z[k][alpha_k][alpha_{k+1}]`, `k = 0..L`.
    pub z: Vec<Matrix>,
    /// `a[k][beta_0][alpha_k][alpha_{k+2}]`, `k = 0..L-1`; missing entries are zero.
    pub a: Vec<Vec<Matrix>>,
    /// `u[alpha_0][beta_0][gamma_0]` with `{T_a, T_b} = T_g U^g_{ab}`.
    pub structure: Option<Vec<Matrix>>,
    pub regularity: Option<Regularity>,
}

impl Default for PhaseSpaceLayout {
    fn default() -> Self {
        PhaseSpaceLayout {
            pairs: Vec::new(),
            stage_parities: Vec::new(),
        }
    }
}

fn invalid(identity: impl Into<String>, detail: impl Into<String>) -> Error {
    Error::InvalidModel {
        identity: identity.into(),
        detail: detail.into(),
    }
}

fn zero_matrix(rows: usize, cols: usize) -> Matrix {
    vec![vec![GradedPoly::zero(); cols]; rows]
}

impl ModelData {
    pub fn build(self) -> Result<Model> {
        let layout = self.layout;
        let catalog = layout.catalog();
        let order = layout.order().ok_or_else(|| invalid("stages", "no constraint stage declared"))? as usize;
        if self.constraints.len() != layout.stage_size(0) {
            return Err(invalid("constraints", "count differs from stage 0 parities"));
        }
        if self.z.len() != order {
            return Err(invalid("stages", format!("expected {order} reducibility matrices, found {}", self.z.len())));
        }
        let mut a = self.a;
        a.resize(order.saturating_sub(1), Vec::new());
        for (k, ak) in a.iter_mut().enumerate() {
            if ak.is_empty() {
                *ak = vec![zero_matrix(layout.stage_size(k), layout.stage_size(k + 2)); layout.stage_size(0)];
            }
        }
        let model = Model {
            layout,
            catalog,
            constraints: self.constraints,
            z: self.z,
            a,
            structure: self.structure,
            regularity: self.regularity,
        };
        model.validate()?;
        Ok(model)
    }
}

impl Model {
    pub fn layout(&self) -> &PhaseSpaceLayout {
        &self.layout
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    /// Reducibility order `L`.
    pub fn order(&self) -> usize {
        self.z.len()
    }

    pub fn stage_size(&self, k: usize) -> usize {
        self.layout.stage_size(k)
    }

    pub fn parity(&self, stage: usize, alpha: usize) -> bool {
        self.layout.stage_parities[stage][alpha]
    }

    pub fn constraints(&self) -> &[GradedPoly] {
        &self.constraints
    }

    pub fn constraint(&self, alpha: usize) -> &GradedPoly {
        &self.constraints[alpha]
    }

    /// `Z^{alpha_k}_{alpha_{k+1}}`.
    pub fn z(&self, k: usize, row: usize, col: usize) -> &GradedPoly {
        &self.z[k][row][col]
    }

    pub fn z_matrix(&self, k: usize) -> &Matrix {
        &self.z[k]
    }

    /// `A^{beta_0 alpha_k}_{alpha_{k+2}}`.
    pub fn a(&self, k: usize, beta: usize, alpha: usize, gamma: usize) -> &GradedPoly {
        &self.a[k][beta][alpha][gamma]
    }

    pub fn structure(&self) -> Option<&Vec<Matrix>> {
        self.structure.as_ref()
    }

    pub fn regularity(&self) -> Option<&Regularity> {
        self.regularity.as_ref()
    }

    /// Number of original canonical pairs.
    pub fn pair_count(&self) -> usize {
        self.layout.pairs.len()
    }

    fn check_xi_only(&self, what: &str, x: &GradedPoly) -> Result<()> {
        for v in x.variables() {
            if self.catalog.descriptor(v).kind != VarKind::Xi {
                return Err(invalid(what, format!("depends on {}", self.catalog.name(v))));
            }
        }
        Ok(())
    }

    fn check_parity(&self, what: &str, x: &GradedPoly, expected: bool) -> Result<()> {
        match x.parity() {
            Some(p) if p != expected => Err(invalid(what, "wrong Grassmann parity")),
            None if !x.is_zero() => Err(invalid(what, "mixed Grassmann parity")),
            _ => Ok(()),
        }
    }

    fn validate(&self) -> Result<()> {
        let l = self.order();
        for (alpha, t) in self.constraints.iter().enumerate() {
            let name = format!("T_{}", alpha + 1);
            self.check_xi_only(&name, t)?;
            self.check_parity(&name, t, self.parity(0, alpha))?;
        }
        for k in 0..l {
            let m = &self.z[k];
            if m.len() != self.stage_size(k) || m.iter().any(|row| row.len() != self.stage_size(k + 1)) {
                return Err(invalid(format!("Z at stage {k}"), "shape mismatch"));
            }
            for (i, row) in m.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    let what = format!("Z^{}_{} at stage {k}", i + 1, j + 1);
                    self.check_xi_only(&what, x)?;
                    self.check_parity(&what, x, self.parity(k, i) ^ self.parity(k + 1, j))?;
                }
            }
        }
        self.check_tz()?;
        self.check_zz()?;
        self.check_a_antisymmetry()?;
        self.check_first_class()?;
        if let Some(reg) = &self.regularity {
            for (j, f) in reg.functions.iter().enumerate() {
                self.check_xi_only(&format!("F_{}", j + 1), f)?;
            }
        }
        Ok(())
    }

    fn check_tz(&self) -> Result<()> {
        if self.order() == 0 {
            return Ok(());
        }
        for col in 0..self.stage_size(1) {
            let mut acc = GradedPoly::zero();
            for (alpha, t) in self.constraints.iter().enumerate() {
                acc += &(t * &self.z[0][alpha][col]);
            }
            if !acc.is_zero() {
                return Err(invalid(
                    format!("TZ = 0 at alpha_1={}", col + 1),
                    format!("T Z = {}", acc.display(&self.catalog)),
                ));
            }
        }
        Ok(())
    }

    fn check_zz(&self) -> Result<()> {
        for k in 0..self.order().saturating_sub(1) {
            for row in 0..self.stage_size(k) {
                for col in 0..self.stage_size(k + 2) {
                    let mut lhs = GradedPoly::zero();
                    for mid in 0..self.stage_size(k + 1) {
                        lhs += &(&self.z[k][row][mid] * &self.z[k + 1][mid][col]);
                    }
                    let mut rhs = GradedPoly::zero();
                    for (beta, t) in self.constraints.iter().enumerate() {
                        rhs += &(t * &self.a[k][beta][row][col]);
                    }
                    if lhs != rhs {
                        return Err(invalid(
                            format!("ZZ = TA at stage {k}, ({}, {})", row + 1, col + 1),
                            format!("difference {}", (&lhs - &rhs).display(&self.catalog)),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_a_antisymmetry(&self) -> Result<()> {
        if self.order() < 2 {
            return Ok(());
        }
        let m0 = self.stage_size(0);
        for a in 0..m0 {
            for b in 0..m0 {
                for g in 0..self.stage_size(2) {
                    let s = crate::superalgebra::sign(self.parity(0, a), self.parity(0, b));
                    if self.a[0][a][b][g] != self.a[0][b][a][g].scale_int(-s) {
                        return Err(invalid(
                            format!("A antisymmetry at ({}, {}, {})", a + 1, b + 1, g + 1),
                            "A^{ab} != -(-1)^{ab} A^{ba}",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Ideal generated by the constraints, for even constraint systems.
    pub fn constraint_ideal(&self) -> Result<GroebnerBasis> {
        GroebnerBasis::new(&self.constraints)
    }

    fn check_first_class(&self) -> Result<()> {
        let m0 = self.stage_size(0);
        if let Some(u) = &self.structure {
            for a in 0..m0 {
                for b in 0..m0 {
                    let lhs = poisson_bracket(&self.catalog, &self.constraints[a], &self.constraints[b]);
                    let mut rhs = GradedPoly::zero();
                    for (g, t) in self.constraints.iter().enumerate() {
                        rhs += &(t * &u[a][b][g]);
                    }
                    if lhs != rhs {
                        return Err(invalid(
                            format!("{{T_{}, T_{}}} = T U", a + 1, b + 1),
                            format!("difference {}", (&lhs - &rhs).display(&self.catalog)),
                        ));
                    }
                }
            }
            return Ok(());
        }
        let ideal = self.constraint_ideal()?;
        for a in 0..m0 {
            for b in a..m0 {
                let br = poisson_bracket(&self.catalog, &self.constraints[a], &self.constraints[b]);
                let rem = ideal.reduce(&br)?;
                if !rem.is_zero() {
                    return Err(invalid(
                        format!("first class {{T_{}, T_{}}}", a + 1, b + 1),
                        format!("remainder {}", rem.display(&self.catalog)),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Names and parities of the primed original coordinates: `F'j` for the
/// regularity functions, then `T'alpha` for the independent constraints.
pub fn xi_prime_names(f_parities: &[bool], a0: &[usize], eps0: &[bool]) -> Vec<(String, bool)> {
    let mut out: Vec<(String, bool)> = f_parities
        .iter()
        .enumerate()
        .map(|(j, &odd)| (format!("F'{}", j + 1), odd))
        .collect();
    out.extend(a0.iter().map(|&alpha| (format!("T'{}", alpha + 1), eps0[alpha])));
    out
}
