//! Thin helpers over `sprs` compressed matrices and its LDLᵀ factorization.

use sprs::{CsMat, FillInReduction, SymmetryCheck};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::error::{Error, Result};

pub type SpMat = CsMat<f64>;

/// `y = A x` for a CSR matrix.
pub fn matvec(a: &SpMat, x: &[f64]) -> Vec<f64> {
    debug_assert!(a.is_csr());
    a.outer_iterator()
        .map(|row| row.iter().map(|(j, v)| v * x[j]).sum())
        .collect()
}

/// `y = Aᵀ x` for a CSR matrix.
pub fn matvec_t(a: &SpMat, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.cols()];
    for (i, row) in a.outer_iterator().enumerate() {
        let xi = x[i];
        for (j, v) in row.iter() {
            y[j] += v * xi;
        }
    }
    y
}

/// `xᵀ A y`.
pub fn bilinear(a: &SpMat, x: &[f64], y: &[f64]) -> f64 {
    a.outer_iterator()
        .enumerate()
        .map(|(i, row)| x[i] * row.iter().map(|(j, v)| v * y[j]).sum::<f64>())
        .sum()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `αA + βB`.
pub fn lin_comb(alpha: f64, a: &SpMat, beta: f64, b: &SpMat) -> SpMat {
    let sa = a.map(|v| alpha * v);
    let sb = b.map(|v| beta * v);
    &sa + &sb
}

/// Positions of the diagonal entries inside the CSR data array.
pub fn diagonal_positions(a: &SpMat) -> Result<Vec<usize>> {
    let indptr = a.indptr();
    let mut pos = Vec::with_capacity(a.rows());
    for (i, row) in a.outer_iterator().enumerate() {
        let start = indptr.outer_inds_sz(i).start;
        let k = row
            .indices()
            .iter()
            .position(|&j| j == i)
            .ok_or_else(|| Error::Assembly(format!("row {i} has no diagonal entry")))?;
        pos.push(start + k);
    }
    Ok(pos)
}

/// Copy of `a` with `d` added to its (structurally present) diagonal.
pub fn add_diagonal(a: &SpMat, positions: &[usize], d: &[f64]) -> SpMat {
    let mut out = a.clone();
    let data = out.data_mut();
    for (p, v) in positions.iter().zip(d) {
        data[*p] += v;
    }
    out
}

/// Symmetric positive-definite solver. The symbolic analysis is reused by
/// [`SpdSolver::refactor`] for matrices with the same sparsity pattern.
#[derive(Clone, Debug)]
pub struct SpdSolver {
    factor: LdlNumeric<f64, usize>,
}

impl SpdSolver {
    pub fn new(a: &SpMat) -> Result<Self> {
        let factor = Ldl::new()
            .check_symmetry(SymmetryCheck::DontCheckSymmetry)
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .numeric(a.view())
            .map_err(|e| Error::Assembly(format!("factorization failed: {e:?}")))?;
        let s = SpdSolver { factor };
        s.check_definite()?;
        Ok(s)
    }

    pub fn refactor(&mut self, a: &SpMat) -> Result<()> {
        self.factor
            .update(a.view())
            .map_err(|e| Error::Assembly(format!("factorization failed: {e:?}")))?;
        self.check_definite()
    }

    fn check_definite(&self) -> Result<()> {
        if self.factor.d().iter().all(|&d| d > 0.0 && d.is_finite()) {
            Ok(())
        } else {
            Err(Error::Assembly("matrix is not positive definite".into()))
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.factor.solve(&rhs.to_vec())
    }
}
