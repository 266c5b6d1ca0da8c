//! Dense eigen-decomposition of small real matrices.
//!
//! Eigenvalues come from nalgebra's real Schur form; each eigenvector is the
//! right singular vector of `M - mu I` belonging to its smallest singular
//! value. Intended for simple (non-repeated) eigenvalues of the tiny
//! reduced-model matrices, where it serves as the numerical counterpart to
//! the closed-form spectral formulas.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest accepted `||M v - mu v||` for a unit eigenvector.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: DVector<Complex64>,
    pub residual: f64,
}

impl EigenPair {
    pub fn phase(&self) -> f64 {
        self.value.arg()
    }

    /// Rescales by a unit phase so that component `index` is real and
    /// nonnegative.
    pub fn align_to(&mut self, index: usize) {
        let c = self.vector[index];
        if c.norm() > 0.0 {
            let rot = c.conj() / c.norm();
            self.vector.iter_mut().for_each(|x| *x *= rot);
        }
    }
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// All eigenpairs, sorted by eigenphase `arg(mu)` ascending.
pub fn eigenpairs(m: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    if !m.is_square() {
        return Err(Error::Numeric("matrix is not square".into()));
    }
    let mut out = eigenvalues(m)
        .into_iter()
        .map(|mu| eigenvector(m, mu))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.phase().total_cmp(&b.phase()));
    Ok(out)
}

pub fn eigenvector(m: &DMatrix<f64>, mu: Complex64) -> Result<EigenPair> {
    let dim = m.nrows();
    let mc: DMatrix<Complex64> = m.map(|x| Complex64::new(x, 0.0));
    let shifted = &mc - DMatrix::<Complex64>::identity(dim, dim) * mu;
    let svd = shifted.svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numeric("SVD did not return right singular vectors".into()))?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Numeric("empty matrix".into()))?;
    let vector: DVector<Complex64> = v_t.row(idx).adjoint();
    let vector = vector.normalize();
    let residual = (&mc * &vector - &vector * mu).norm();
    if residual > RESIDUAL_LIMIT {
        return Err(Error::Numeric(format!(
            "eigenvector residual {residual:e} for eigenvalue {mu} exceeds {RESIDUAL_LIMIT:e}"
        )));
    }
    Ok(EigenPair {
        value: mu,
        vector,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_block() {
        let th = 0.7f64;
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[th.cos(), -th.sin(), 0.0, th.sin(), th.cos(), 0.0, 0.0, 0.0, 1.0],
        );
        let pairs = eigenpairs(&m).unwrap();
        let phases: Vec<f64> = pairs.iter().map(|p| p.phase()).collect();
        assert!((phases[0] + th).abs() < 1e-12);
        assert!(phases[1].abs() < 1e-12);
        assert!((phases[2] - th).abs() < 1e-12);
        for p in &pairs {
            assert!(p.residual < 1e-12);
            assert!((p.vector.norm() - 1.0).abs() < 1e-12);
        }
        let mut fixed = pairs[1].clone();
        fixed.align_to(2);
        assert!((fixed.vector[2] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
