//! Stationary solutions: jump-discontinuous fields assembled from several
//! nullcline branches, bifurcation diffusion values, and regular solutions of
//! the perturbed problem in 1D.

mod discontinuous;
mod newton;
mod regular;
mod scan;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

pub use discontinuous::{deviation_sweep, solve_discontinuous, Construction};
pub use regular::{
    bifurcation_gammas, continuation_sweep, mode_amplitude, mode_energy_fraction, solve_perturbed_regular,
    ContinuationPoint, PerturbedProblem,
};
pub use scan::{
    find_admissible_oregonator_alpha, oregonator_certificate, scan_predator_prey, OregonatorCertificate, PredatorPreyCandidate,
    ORE_ALPHA_SCAN, PP_ALPHA_SCAN, PP_BETA_SCAN,
};

use crate::error::Result;
use crate::grid::{DomainPartition, Grid};
use crate::kinetics::BranchSet;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Sup-norm distances of a stationary field from the constant state it was
/// built around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationReport {
    /// `max |V - V_bar|` over the domain.
    pub v_dev: f64,
    /// `max |U - U_bar|` over region 1.
    pub u_dev_1: f64,
    /// `max |U - k_i(V_bar)|` over the other regions, `k_i` the region's branch.
    pub u_dev_2: f64,
    /// Measure of the complement of region 1.
    pub omega2_measure: f64,
}

/// A pair of grid functions `(U, V)` solving the stationary problem, with
/// `U = k_label(V)` cellwise.
#[derive(Debug, Clone)]
pub struct StationaryField {
    pub grid: Grid,
    pub gamma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub partition: DomainPartition,
    pub branch_labels: Vec<usize>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub deviation: DeviationReport,
}

/// JSON summary of a solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual_inf: f64,
    pub deviation_report: DeviationReport,
    pub gamma: f64,
    pub branch_labels_histogram: BTreeMap<usize, usize>,
}

impl StationaryField {
    pub fn report(&self) -> SolverReport {
        let mut hist = BTreeMap::new();
        for &l in &self.branch_labels {
            *hist.entry(l).or_insert(0) += 1;
        }
        SolverReport {
            converged: true,
            iterations: self.iterations,
            residual_inf: self.residual_inf,
            deviation_report: self.deviation,
            gamma: self.gamma,
            branch_labels_histogram: hist,
        }
    }
}

/// `U = k_{label(x)}(V(x))` cellwise.
pub fn slaved_u(branches: &BranchSet, labels: &[usize], v: &[f64]) -> Result<Vec<f64>> {
    labels
        .par_iter()
        .zip(v.par_iter())
        .map(|(&l, &vx)| branches.eval(l, vx))
        .collect()
}

pub(crate) fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}
