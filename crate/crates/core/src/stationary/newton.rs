use rayon::prelude::*;

use super::{slaved_u, sup_norm};
use crate::error::{Error, Result};
use crate::grid::NeumannLaplacian;
use crate::kinetics::BranchSet;
use crate::linalg::SparseMatrix;

pub(crate) const MAX_ITERATIONS: usize = 50;
const MAX_HALVINGS: usize = 20;
const ARMIJO: f64 = 1e-4;

/// `F(V) = diff * L V + shift * (V - v_bar) + g(k_label(V), V)` with
/// `U = k_label(V)` slaved cellwise.
pub(crate) struct ReducedMap<'a> {
    pub lap: NeumannLaplacian,
    pub diff: f64,
    pub shift: f64,
    pub v_bar: f64,
    pub branches: &'a BranchSet,
    pub labels: &'a [usize],
    pub trust: (f64, f64),
}

pub(crate) struct NewtonResult {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
}

impl ReducedMap<'_> {
    pub fn residual(&self, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let u = slaved_u(self.branches, self.labels, v)?;
        let model = self.branches.model();
        let lv = self.lap.apply_vec(v);
        let f: Vec<f64> = (0..v.len())
            .into_par_iter()
            .map(|k| self.diff * lv[k] + self.shift * (v[k] - self.v_bar) + model.g_unchecked(u[k], v[k]))
            .collect();
        Ok((u, f))
    }

    /// Diagonal of the Jacobian beyond `diff * L`: `shift + g_u k' + g_v`.
    pub fn jacobian_diagonal(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let model = self.branches.model();
        (0..v.len())
            .into_par_iter()
            .map(|k| {
                let j = model.jacobian(u[k], v[k])?;
                if j.fu.abs() < 1e-12 {
                    return Err(Error::Fold {
                        location: v[k],
                        detail: format!("f_u = {:.3e} vanishes at cell {k} on branch k{}", j.fu, self.labels[k]),
                    });
                }
                Ok(self.shift + j.gu * (-j.fv / j.fu) + j.gv)
            })
            .collect()
    }

    pub fn jacobian(&self, u: &[f64], v: &[f64]) -> Result<SparseMatrix> {
        let diag = self.jacobian_diagonal(u, v)?;
        let n = v.len();
        let mut entries = Vec::with_capacity(5 * n);
        for (k, &dk) in diag.iter().enumerate() {
            for (c, val) in self.lap.row(k) {
                let extra = if c == k { dk } else { 0.0 };
                entries.push((k, c, self.diff * val + extra));
            }
        }
        SparseMatrix::from_entries(n, &entries)
    }

    fn outside(&self, v: &[f64]) -> Option<(usize, f64)> {
        v.iter()
            .enumerate()
            .find(|(_, &x)| !(x > self.trust.0 && x < self.trust.1))
            .map(|(k, &x)| (k, x))
    }

    /// Damped Newton from `v0` with Armijo backtracking on `||F||_2`.
    pub fn solve(&self, v0: Vec<f64>, tol: f64) -> Result<NewtonResult> {
        if let Some((cell, value)) = self.outside(&v0) {
            return Err(self.violation(cell, value));
        }
        let mut v = v0;
        let (mut u, mut f) = self.residual(&v)?;
        for it in 0..=MAX_ITERATIONS {
            let res = sup_norm(&f);
            if res <= tol {
                return Ok(NewtonResult { u, v, residual_inf: res, iterations: it });
            }
            if it == MAX_ITERATIONS {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: res,
                    reason: "iteration limit reached".into(),
                });
            }
            let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
            let step = self.jacobian(&u, &v)?.lu()?.solve(&rhs)?;
            let norm0 = l2(&f);
            let mut t = 1.0;
            let mut accepted = None;
            let mut last_violation = None;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> = v.iter().zip(&step).map(|(a, d)| a + t * d).collect();
                if let Some(bad) = self.outside(&trial) {
                    last_violation = Some(bad);
                } else if let Ok((ut, ft)) = self.residual(&trial) {
                    let n1 = l2(&ft);
                    if n1.is_finite() && n1 <= (1.0 - ARMIJO * t) * norm0 {
                        accepted = Some((trial, ut, ft));
                        break;
                    }
                    last_violation = None;
                }
                t *= 0.5;
            }
            match accepted {
                Some((vn, un, fnew)) => {
                    v = vn;
                    u = un;
                    f = fnew;
                }
                None => {
                    if let Some((cell, value)) = last_violation {
                        return Err(self.violation(cell, value));
                    }
                    return Err(Error::NonConvergence {
                        iterations: it,
                        residual: res,
                        reason: "line search failed after 20 halvings".into(),
                    });
                }
            }
        }
        unreachable!()
    }

    fn violation(&self, cell: usize, value: f64) -> Error {
        Error::WindowViolation {
            cell,
            value,
            lo: self.trust.0,
            hi: self.trust.1,
        }
    }
}

pub(crate) fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
