use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kinetics::{KineticModel, SteadyState};
use crate::linalg::SparseMatrix;
use crate::stationary::StationaryField;

/// Discretized linearization
///
/// ```text
/// M = [ diag(a)  diag(b)         ]
///     [ diag(c)  gamma L + diag(d) ]
/// ```
///
/// acting on `(phi, psi)` stacked as one vector of length `2 N`.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub grid: Grid,
    pub gamma: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// Jacobian fields of `model` at `(u, v)`, failing on the first singular cell.
pub fn assemble_linearization(model: &KineticModel, field: &StationaryField) -> Result<Linearization> {
    Linearization::from_state(model, &field.grid, field.gamma, &field.u, &field.v)
}

impl Linearization {
    pub fn from_state(model: &KineticModel, grid: &Grid, gamma: f64, u: &[f64], v: &[f64]) -> Result<Self> {
        let jac: Vec<_> = (0..u.len())
            .into_par_iter()
            .map(|k| {
                model
                    .jacobian(u[k], v[k])
                    .map_err(|e| Error::Singular(format!("cell {k}: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(Linearization {
            grid: *grid,
            gamma,
            a: jac.iter().map(|j| j.fu).collect(),
            b: jac.iter().map(|j| j.fv).collect(),
            c: jac.iter().map(|j| j.gu).collect(),
            d: jac.iter().map(|j| j.gv).collect(),
        })
    }

    /// Linearization at a constant state.
    pub fn constant(grid: &Grid, gamma: f64, steady: &SteadyState) -> Self {
        let n = grid.cell_count();
        Linearization {
            grid: *grid,
            gamma,
            a: vec![steady.a0; n],
            b: vec![steady.b0; n],
            c: vec![steady.c0; n],
            d: vec![steady.d0; n],
        }
    }

    pub fn cells(&self) -> usize {
        self.a.len()
    }

    pub fn size(&self) -> usize {
        2 * self.a.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.cells();
        let (phi, psi) = x.split_at(n);
        let lpsi = self.grid.laplacian().apply_vec(psi);
        let mut out = vec![0.0; 2 * n];
        for k in 0..n {
            out[k] = self.a[k] * phi[k] + self.b[k] * psi[k];
            out[n + k] = self.c[k] * phi[k] + self.gamma * lpsi[k] + self.d[k] * psi[k];
        }
        out
    }

    /// Nonzero entries of `M - sigma I`.
    pub fn shifted_entries(&self, sigma: f64) -> Vec<(usize, usize, f64)> {
        let n = self.cells();
        let lap = self.grid.laplacian();
        let mut e = Vec::with_capacity(8 * n);
        for k in 0..n {
            e.push((k, k, self.a[k] - sigma));
            e.push((k, n + k, self.b[k]));
            e.push((n + k, k, self.c[k]));
            for (col, val) in lap.row(k) {
                let extra = if col == k { self.d[k] - sigma } else { 0.0 };
                e.push((n + k, n + col, self.gamma * val + extra));
            }
        }
        e
    }

    pub fn shifted_sparse(&self, sigma: f64) -> Result<SparseMatrix> {
        SparseMatrix::from_entries(self.size(), &self.shifted_entries(sigma))
    }

    /// Row-major dense copy of `M`.
    pub fn dense(&self) -> Vec<f64> {
        let m = self.size();
        let mut out = vec![0.0; m * m];
        for (r, c, v) in self.shifted_entries(0.0) {
            out[r * m + c] = v;
        }
        out
    }

    /// Right edge of the Gershgorin row discs.
    pub fn gershgorin_right(&self) -> f64 {
        let n = self.cells();
        let mut edge = f64::NEG_INFINITY;
        for k in 0..n {
            edge = edge.max(self.a[k] + self.b[k].abs());
            // Diffusion rows have zero sum, so the diffusive part of the disc
            // ends at zero.
            edge = edge.max(self.d[k] + self.c[k].abs());
        }
        edge
    }
}
