use std::f64::consts::PI;

use serde::Serialize;

use super::newton::{ReducedMap, MAX_ITERATIONS};
use super::{sup_norm, DeviationReport, StationaryField};
use crate::error::{Error, Result};
use crate::grid::{laplacian_eigenvalues, DomainPartition, EigenKind, Grid};
use crate::kinetics::{BranchSet, SteadyState};
use crate::linalg::dense_solve;

/// `gamma_k = det / (a0 mu_k)` for every listed `mu_k > 0`, indexed by the
/// position of `mu_k` in `eigenvalues`. Empty when `det / a0 <= 0`.
pub fn bifurcation_gammas(steady: &SteadyState, eigenvalues: &[(f64, usize)]) -> Result<Vec<(usize, f64)>> {
    let ratio = steady.det_over_a0()?;
    if ratio <= 0.0 {
        return Ok(Vec::new());
    }
    Ok(eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &(mu, _))| mu > 0.0)
        .map(|(k, &(mu, _))| (k, ratio / mu))
        .collect())
}

/// Perturbed regular problem on a 1D grid,
///
/// ```text
/// d pivot L V + (1 - d)(V - V_bar) + g(k(V), V) = 0,
/// ```
///
/// where `pivot` is the bifurcation value of `mode` for the discrete
/// Laplacian, so that the constant solution loses invertibility at `d = 1`.
#[derive(Debug, Clone)]
pub struct PerturbedProblem {
    pub branches: BranchSet,
    pub label: usize,
    pub steady: SteadyState,
    pub grid: Grid,
    pub mode: usize,
    pub pivot: f64,
}

/// One point `(A, d(A))` on the traced solution branch, `A` the coefficient
/// of `cos(k pi x)` in `V - V_bar`.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuationPoint {
    pub amplitude: f64,
    pub d_ell: f64,
    pub residual_inf: f64,
    #[serde(skip)]
    pub v: Vec<f64>,
}

impl PerturbedProblem {
    pub fn new(branches: BranchSet, label: usize, steady: SteadyState, grid: Grid, mode: usize) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::InvalidInput("the perturbed problem is solved on 1D grids only".into()));
        }
        if mode == 0 || mode >= grid.cell_count() {
            return Err(Error::InvalidInput(format!("mode {mode} out of range 1..{}", grid.cell_count())));
        }
        let u0 = branches.eval(label, steady.v_bar)?;
        if (u0 - steady.u_bar).abs() > 1e-9 * (1.0 + steady.u_bar.abs()) {
            return Err(Error::InvalidInput(format!(
                "branch k{label} does not pass through steady state {}",
                steady.label
            )));
        }
        let mu = laplacian_eigenvalues(&grid, mode + 1, EigenKind::Discrete)[mode].0;
        let ratio = steady.det_over_a0()?;
        if ratio <= 0.0 {
            return Err(Error::Assumption(format!(
                "det/a0 = {ratio:.6e} is not positive, no bifurcation from the constant state"
            )));
        }
        Ok(PerturbedProblem {
            branches,
            label,
            steady,
            grid,
            mode,
            pivot: ratio / mu,
        })
    }

    fn trust(&self) -> (f64, f64) {
        self.branches.trust_interval(self.steady.v_bar, &[self.label])
    }

    fn labels(&self) -> Vec<usize> {
        vec![self.label; self.grid.cell_count()]
    }

    fn map<'a>(&'a self, labels: &'a [usize], d: f64) -> ReducedMap<'a> {
        ReducedMap {
            lap: self.grid.laplacian(),
            diff: d * self.pivot,
            shift: 1.0 - d,
            v_bar: self.steady.v_bar,
            branches: &self.branches,
            labels,
            trust: self.trust(),
        }
    }

    fn mode_shape(&self) -> Vec<f64> {
        self.grid.sample(|x, _| (self.mode as f64 * PI * x).cos())
    }

    /// Augmented Newton for `(V, d)` at fixed amplitude `a`.
    fn solve_at_amplitude(&self, a: f64, mut v: Vec<f64>, mut d: f64, tol: f64) -> Result<ContinuationPoint> {
        let n = self.grid.cell_count();
        let phi = self.mode_shape();
        let norm: f64 = phi.iter().map(|p| p * p).sum();
        let labels = self.labels();
        let lap = self.grid.laplacian();
        let trust = self.trust();
        for _ in 0..=MAX_ITERATIONS {
            if let Some((cell, &value)) = v.iter().enumerate().find(|(_, &x)| !(x > trust.0 && x < trust.1)) {
                return Err(Error::WindowViolation {
                    cell,
                    value,
                    lo: trust.0,
                    hi: trust.1,
                });
            }
            let map = self.map(&labels, d);
            let (u, f) = map.residual(&v)?;
            let amp = mode_amplitude(&self.grid, &v, self.steady.v_bar, self.mode);
            let res = sup_norm(&f).max((amp - a).abs());
            if res <= tol {
                return Ok(ContinuationPoint {
                    amplitude: a,
                    d_ell: d,
                    residual_inf: sup_norm(&f),
                    v,
                });
            }
            let diag = map.jacobian_diagonal(&u, &v)?;
            let lv = lap.apply_vec(&v);
            let m = n + 1;
            let mut jac = vec![0.0; m * m];
            for k in 0..n {
                for (c, val) in lap.row(k) {
                    jac[k * m + c] += map.diff * val;
                }
                jac[k * m + k] += diag[k];
                jac[k * m + n] = self.pivot * lv[k] - (v[k] - self.steady.v_bar);
                jac[n * m + k] = phi[k] / norm;
            }
            let mut rhs: Vec<f64> = f.iter().map(|x| -x).collect();
            rhs.push(a - amp);
            let step = dense_solve(m, &jac, &rhs)?;
            for k in 0..n {
                v[k] += step[k];
            }
            d += step[n];
        }
        Err(Error::NonConvergence {
            iterations: MAX_ITERATIONS,
            residual: f64::NAN,
            reason: format!("augmented newton at amplitude {a} did not converge"),
        })
    }

    fn trace(&self, amplitudes: &[f64], tol: f64, stop_on_error: bool) -> Result<Vec<ContinuationPoint>> {
        let phi = self.mode_shape();
        let vb = self.steady.v_bar;
        let mut out: Vec<ContinuationPoint> = Vec::new();
        for &a in amplitudes {
            let (guess, d0) = match out.len() {
                0 => (phi.iter().map(|p| vb + a * p).collect(), 1.0),
                1 => {
                    let p = &out[0];
                    let s = a / p.amplitude;
                    (p.v.iter().map(|x| vb + s * (x - vb)).collect(), p.d_ell)
                }
                len => {
                    let (p, q) = (&out[len - 2], &out[len - 1]);
                    let s = (a - q.amplitude) / (q.amplitude - p.amplitude);
                    let v = q.v.iter().zip(&p.v).map(|(x, y)| x + s * (x - y)).collect();
                    (v, q.d_ell + s * (q.d_ell - p.d_ell))
                }
            };
            match self.solve_at_amplitude(a, guess, d0, tol) {
                Ok(pt) => out.push(pt),
                Err(e) if stop_on_error => {
                    if out.is_empty() {
                        return Err(e);
                    }
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

/// Traces `d(A)` through the given increasing positive amplitudes.
pub fn continuation_sweep(p: &PerturbedProblem, amplitudes: &[f64], tol: f64) -> Result<Vec<ContinuationPoint>> {
    if amplitudes.is_empty() || amplitudes.windows(2).any(|w| !(w[1] > w[0])) || amplitudes[0] <= 0.0 {
        return Err(Error::InvalidInput("amplitudes must be positive and increasing".into()));
    }
    p.trace(amplitudes, tol, false)
}

/// Solves the perturbed problem at `d_ell`, starting from the traced branch
/// when `d_ell` lies on it and from `V_bar + 1e-2 cos(k pi x)` otherwise.
pub fn solve_perturbed_regular(p: &PerturbedProblem, d_ell: f64, tol: f64) -> Result<StationaryField> {
    if !(d_ell > 0.0 && d_ell.is_finite()) {
        return Err(Error::InvalidInput(format!("d_ell must be positive, got {d_ell}")));
    }
    let vb = p.steady.v_bar;
    let (lo, hi) = p.trust();
    let a_max = 0.5 * (vb - lo).min(hi - vb);
    let mut amps = Vec::new();
    let mut a = 1e-3;
    while a <= a_max {
        amps.push(a);
        a *= 1.25;
    }
    let traced = if amps.is_empty() {
        Vec::new()
    } else {
        p.trace(&amps, 1e-11, true).unwrap_or_default()
    };
    let phi = p.mode_shape();
    let mut guess: Vec<f64> = phi.iter().map(|c| vb + 1e-2 * c).collect();
    let mut prev_d = 1.0;
    let mut prev_v: Option<&Vec<f64>> = None;
    for pt in &traced {
        let (d0, d1) = (prev_d, pt.d_ell);
        if (d_ell - d0) * (d_ell - d1) <= 0.0 && d0 != d1 {
            let s = (d_ell - d0) / (d1 - d0);
            guess = match prev_v {
                Some(pv) => pv.iter().zip(&pt.v).map(|(x, y)| x + s * (y - x)).collect(),
                None => pt.v.iter().map(|y| vb + s * (y - vb)).collect(),
            };
            break;
        }
        prev_d = d1;
        prev_v = Some(&pt.v);
    }

    let labels = p.labels();
    let sol = p.map(&labels, d_ell).solve(guess, tol)?;
    let amplitude = sol.v.iter().fold(0.0_f64, |m, x| m.max((x - vb).abs()));
    if amplitude < 1e-6 {
        return Err(Error::Collapse { d_ell, amplitude });
    }
    let u_dev = sol.u.iter().fold(0.0_f64, |m, x| m.max((x - p.steady.u_bar).abs()));
    Ok(StationaryField {
        grid: p.grid,
        gamma: d_ell * p.pivot,
        partition: DomainPartition::uniform(p.grid, 1)?,
        branch_labels: labels,
        residual_inf: sol.residual_inf,
        iterations: sol.iterations,
        deviation: DeviationReport {
            v_dev: amplitude,
            u_dev_1: u_dev,
            u_dev_2: 0.0,
            omega2_measure: 0.0,
        },
        u: sol.u,
        v: sol.v,
    })
}

/// Coefficient `A` of `cos(k pi x)` in the discrete expansion of `v - v_bar`.
pub fn mode_amplitude(grid: &Grid, v: &[f64], v_bar: f64, k: usize) -> f64 {
    let phi = grid.sample(|x, _| (k as f64 * PI * x).cos());
    let num: f64 = v.iter().zip(&phi).map(|(x, p)| (x - v_bar) * p).sum();
    let den: f64 = phi.iter().map(|p| p * p).sum();
    num / den
}

/// Share of the discrete energy of `v - v_bar` carried by `cos(k pi x)`.
pub fn mode_energy_fraction(grid: &Grid, v: &[f64], v_bar: f64, k: usize) -> f64 {
    let phi = grid.sample(|x, _| (k as f64 * PI * x).cos());
    let num: f64 = v.iter().zip(&phi).map(|(x, p)| (x - v_bar) * p).sum();
    let pp: f64 = phi.iter().map(|p| p * p).sum();
    let ee: f64 = v.iter().map(|x| (x - v_bar) * (x - v_bar)).sum();
    if ee == 0.0 {
        return 0.0;
    }
    num * num / (pp * ee)
}
