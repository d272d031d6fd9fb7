//! Partition of every stage `alpha_k = f(A_{k+1}) ∪ A_k` and the invertible
//! square blocks `Z^{f(A_{k+1})}_{A_{k+1}}`.
//!
//! The embedding `g` is always the identity on `A_k`, so `alpha'_k` is the
//! image of `f`.

use crate::model::{Matrix, Model};
use crate::superalgebra::GradedPoly;
use crate::{Error, Result};

/// What an index of `alpha_k` stands for after the split.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum IndexRole {
    /// `f(A_{k+1}[j])`.
    Image(usize),
    /// Element of `A_k`.
    Kept,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexSplit {
    /// `A_k` for `k = 0..=L`, ascending.
    kept: Vec<Vec<usize>>,
    /// `f[k][j]`: row of `alpha_k` paired with `A_{k+1}[j]`, `k = 0..L`.
    f: Vec<Vec<usize>>,
    /// `inv[k][j][i] = (Z^{-1})^{A_{k+1}[j]}_{f[k][i]}`.
    inv: Vec<Matrix>,
}

fn split_err(msg: impl Into<String>) -> Error {
    Error::Split(msg.into())
}

/// Nonzero constant value of `x`, if `x` is one.
fn unit(x: &GradedPoly) -> Option<crate::superalgebra::Coeff> {
    (x.is_constant() && !x.is_zero()).then(|| x.constant_term())
}

/// Row reduction of `row` against echelon rows with constant pivots.
fn reduce_row(echelon: &[(usize, Vec<GradedPoly>)], row: &[GradedPoly]) -> Vec<GradedPoly> {
    let mut row = row.to_vec();
    for (pc, e) in echelon {
        if row[*pc].is_zero() {
            continue;
        }
        let lead = unit(&e[*pc]).expect("pivot is a unit");
        let factor = row[*pc].scale(&(<crate::superalgebra::Coeff as num_traits::One>::one() / lead));
        for (x, y) in row.iter_mut().zip(e) {
            *x -= &(&factor * y);
        }
    }
    row
}

/// Inverse of a square matrix whose elimination only needs constant pivots.
pub fn invert_unimodular(m: &Matrix) -> Result<Matrix> {
    let n = m.len();
    let mut a: Vec<Vec<GradedPoly>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { GradedPoly::one() } else { GradedPoly::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&i| unit(&a[i][col]).is_some())
            .ok_or_else(|| split_err(format!("no constant pivot in column {}; supply the inverse block", col + 1)))?;
        a.swap(col, piv);
        let lead = unit(&a[col][col]).unwrap();
        let inv_lead = <crate::superalgebra::Coeff as num_traits::One>::one() / lead;
        a[col] = a[col].iter().map(|x| x.scale(&inv_lead)).collect();
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let factor = a[i][col].clone();
            let pivot_row = a[col].clone();
            for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                *x -= &(&factor * y);
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn is_identity_product(a: &Matrix, b: &Matrix) -> bool {
    let n = a.len();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let mut acc = GradedPoly::zero();
            for (k, x) in a[i].iter().enumerate() {
                acc += &(x * &b[k][j]);
            }
            acc == if i == j { GradedPoly::one() } else { GradedPoly::zero() }
        })
    })
}

/// Rational rank of a constant matrix; `None` if an entry is not constant.
fn constant_rank(m: &Matrix) -> Option<usize> {
    if m.iter().flatten().any(|x| !x.is_constant()) {
        return None;
    }
    let mut echelon: Vec<(usize, Vec<GradedPoly>)> = Vec::new();
    for row in m {
        let r = reduce_row(&echelon, row);
        if let Some(pc) = r.iter().position(|x| !x.is_zero()) {
            echelon.push((pc, r));
        }
    }
    Some(echelon.len())
}

impl IndexSplit {
    /// Greedy split: rows of `Z^{alpha_k}_{A_{k+1}}` are taken in index order
    /// whenever they raise the rank, eliminating with constant pivots only.
    pub fn compute(model: &Model) -> Result<Self> {
        let l = model.order();
        let mut f = vec![Vec::new(); l];
        for k in (0..l).rev() {
            let cols: Vec<usize> = if k + 1 == l {
                (0..model.stage_size(l)).collect()
            } else {
                kept_of(model.stage_size(k + 1), &f[k + 1])
            };
            let mut echelon: Vec<(usize, Vec<GradedPoly>)> = Vec::new();
            let mut rows = Vec::new();
            for alpha in 0..model.stage_size(k) {
                if rows.len() == cols.len() {
                    break;
                }
                let row: Vec<GradedPoly> = cols.iter().map(|&c| model.z(k, alpha, c).clone()).collect();
                let r = reduce_row(&echelon, &row);
                if r.iter().all(GradedPoly::is_zero) {
                    continue;
                }
                match r.iter().position(|x| unit(x).is_some()) {
                    Some(pc) => {
                        echelon.push((pc, r));
                        rows.push(alpha);
                    }
                    None => {
                        return Err(split_err(format!(
                            "stage {k}: no constant pivot in row {}; supply the split",
                            alpha + 1
                        )))
                    }
                }
            }
            if rows.len() != cols.len() {
                return Err(split_err(format!(
                    "stage {k}: rank {} of Z restricted to A_{} is below {}",
                    rows.len(),
                    k + 1,
                    cols.len()
                )));
            }
            // pair rows with columns of equal parity, in order
            let mut paired = vec![usize::MAX; cols.len()];
            for odd in [false, true] {
                let mut free = rows.iter().filter(|&&r| model.parity(k, r) == odd);
                for (j, &c) in cols.iter().enumerate() {
                    if model.parity(k + 1, c) == odd {
                        paired[j] = *free.next().ok_or_else(|| split_err(format!("stage {k}: parity mismatch")))?;
                    }
                }
            }
            f[k] = paired;
        }
        Self::from_pivots(model, f, None)
    }

    /// Split from explicit rows `f[k][j]` paired with `A_{k+1}[j]`, with
    /// optional inverse blocks; both are checked exactly.
    pub fn from_pivots(model: &Model, f: Vec<Vec<usize>>, inv: Option<Vec<Matrix>>) -> Result<Self> {
        let l = model.order();
        if f.len() != l {
            return Err(split_err(format!("expected {l} pivot lists, found {}", f.len())));
        }
        let mut kept = vec![Vec::new(); l + 1];
        kept[l] = (0..model.stage_size(l)).collect();
        for k in (0..l).rev() {
            if f[k].len() != kept[k + 1].len() {
                return Err(split_err(format!("stage {k}: |alpha'| differs from |A_{}|", k + 1)));
            }
            let mut seen = f[k].clone();
            seen.sort();
            seen.dedup();
            if seen.len() != f[k].len() || seen.iter().any(|&a| a >= model.stage_size(k)) {
                return Err(split_err(format!("stage {k}: pivot rows must be distinct indices")));
            }
            kept[k] = kept_of(model.stage_size(k), &f[k]);
            for (j, &row) in f[k].iter().enumerate() {
                if model.parity(k, row) != model.parity(k + 1, kept[k + 1][j]) {
                    return Err(split_err(format!("stage {k}: row {} and its column differ in parity", row + 1)));
                }
            }
        }
        let mut inverses = Vec::with_capacity(l);
        for k in 0..l {
            let block: Matrix = f[k]
                .iter()
                .map(|&row| kept[k + 1].iter().map(|&c| model.z(k, row, c).clone()).collect())
                .collect();
            if block.iter().flatten().any(|x| x.parity() == Some(true)) {
                return Err(split_err(format!("stage {k}: odd entries in the square block")));
            }
            let b = match inv.as_ref().and_then(|v| v.get(k)) {
                Some(b) => b.clone(),
                None => invert_unimodular(&block)?,
            };
            if !is_identity_product(&block, &b) || !is_identity_product(&b, &block) {
                return Err(split_err(format!("stage {k}: inverse block does not invert Z")));
            }
            if let Some(rank) = constant_rank(model.z_matrix(k)) {
                if rank != kept[k + 1].len() {
                    return Err(split_err(format!(
                        "stage {k}: rank Z = {rank}, expected |A_{}| = {}",
                        k + 1,
                        kept[k + 1].len()
                    )));
                }
            }
            inverses.push(b);
        }
        Ok(IndexSplit { kept, f, inv: inverses })
    }

    pub fn order(&self) -> usize {
        self.f.len()
    }

    /// `A_k`.
    pub fn kept(&self, k: usize) -> &[usize] {
        &self.kept[k]
    }

    /// `alpha'_k = f(A_{k+1})`, ordered like `A_{k+1}`.
    pub fn image(&self, k: usize) -> &[usize] {
        &self.f[k]
    }

    /// `f(a)` for `a ∈ A_{k+1}`, as an index of `alpha_k`.
    pub fn f_of(&self, k: usize, a: usize) -> usize {
        let j = self.kept[k + 1].iter().position(|&x| x == a).expect("index of A_{k+1}");
        self.f[k][j]
    }

    pub fn role(&self, k: usize, alpha: usize) -> IndexRole {
        match self.f.get(k).and_then(|f| f.iter().position(|&x| x == alpha)) {
            Some(j) => IndexRole::Image(j),
            None => IndexRole::Kept,
        }
    }

    /// `(Z^{-1})^{A_{k+1}[j]}_{f[k][i]}` as `inverse(k)[j][i]`.
    pub fn inverse(&self, k: usize) -> &Matrix {
        &self.inv[k]
    }
}

fn kept_of(size: usize, image: &[usize]) -> Vec<usize> {
    (0..size).filter(|a| !image.contains(a)).collect()
}
