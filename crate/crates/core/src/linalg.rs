//! Thin wrappers over `faer` for the solves and spectra used by the solvers.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};

use crate::error::{Error, Result};

/// Square sparse matrix assembled from `(row, col, value)` entries.
/// Repeated positions must not occur.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    inner: SparseColMat<usize, f64>,
}

impl SparseMatrix {
    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let triplets: Vec<Triplet<usize, usize, f64>> =
            entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let inner = SparseColMat::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::InvalidInput(format!("sparse assembly failed: {e:?}")))?;
        Ok(SparseMatrix { n, inner })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn lu(&self) -> Result<SparseLu> {
        let lu = self
            .inner
            .sp_lu()
            .map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
        Ok(SparseLu { n: self.n, lu })
    }
}

pub struct SparseLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    /// Solves `A x = b`; a non-finite result is reported as singular.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.n);
        let x = self.lu.solve(ColRef::from_slice(b));
        let out: Vec<f64> = (0..self.n).map(|i| x[i]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::Singular("sparse solve produced non-finite values".into()))
        }
    }
}

/// Dense LU solve of `A x = b` for a row-major `n x n` matrix.
pub fn dense_solve(n: usize, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    let x = m.partial_piv_lu().solve(ColRef::from_slice(b));
    let out: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Singular("dense solve produced non-finite values".into()))
    }
}

/// Eigenpairs of a dense real matrix given row-major. Vectors are columns.
pub fn dense_eigen(n: usize, a: &[f64]) -> Result<(Vec<c64>, Vec<Vec<c64>>)> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    let evd = m
        .eigen()
        .map_err(|e| Error::NonConvergence {
            iterations: 0,
            residual: f64::NAN,
            reason: format!("dense eigendecomposition failed: {e:?}"),
        })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i]).collect();
    let vectors = (0..n).map(|j| (0..n).map(|i| u[(i, j)]).collect()).collect();
    Ok((values, vectors))
}

/// Eigenvalues of a small dense real matrix given row-major.
pub fn dense_eigenvalues(n: usize, a: &[f64]) -> Result<Vec<c64>> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    m.eigenvalues().map_err(|e| Error::NonConvergence {
        iterations: 0,
        residual: f64::NAN,
        reason: format!("dense eigenvalue computation failed: {e:?}"),
    })
}
