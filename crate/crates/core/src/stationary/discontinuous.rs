use super::newton::ReducedMap;
use super::{DeviationReport, StationaryField};
use crate::error::{Error, Result};
use crate::grid::{discrete_spectrum_all, generate_ey_mask, DomainPartition, Grid};
use crate::kinetics::{BranchSet, SteadyState};

/// Inputs of the discontinuous construction: region `r` of the partition
/// carries branch `region_branches[r - 1]`.
#[derive(Debug, Clone)]
pub struct Construction {
    pub branches: BranchSet,
    pub steady: SteadyState,
    pub partition: DomainPartition,
    pub region_branches: Vec<usize>,
    pub gamma: f64,
}

impl Construction {
    pub fn new(
        branches: BranchSet,
        steady: SteadyState,
        partition: DomainPartition,
        region_branches: Vec<usize>,
        gamma: f64,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
        }
        if region_branches.len() != partition.region_count() {
            return Err(Error::InvalidInput(format!(
                "{} branch labels for {} regions",
                region_branches.len(),
                partition.region_count()
            )));
        }
        if let Some(&bad) = region_branches.iter().find(|&&l| l == 0 || l > branches.count()) {
            return Err(Error::InvalidInput(format!(
                "branch label {bad} out of range 1..={}",
                branches.count()
            )));
        }
        Ok(Construction {
            branches,
            steady,
            partition,
            region_branches,
            gamma,
        })
    }

    /// Branch label of every cell.
    pub fn cell_labels(&self) -> Vec<usize> {
        self.partition
            .regions()
            .iter()
            .map(|&r| self.region_branches[r - 1])
            .collect()
    }

    /// Labels of branches used on regions of positive measure.
    pub fn used_labels(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (1..=self.partition.region_count())
            .filter(|&r| self.partition.counts()[r - 1] > 0)
            .map(|r| self.region_branches[r - 1])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Interval in which `V` iterates must stay.
    pub fn trust_interval(&self) -> (f64, f64) {
        self.branches.trust_interval(self.steady.v_bar, &self.used_labels())
    }

    /// Refuses `gamma` within `1e-8 mu_k` of `det/a0 = gamma mu_k` for a
    /// discrete Laplacian eigenvalue `mu_k`.
    pub fn check_resonance(&self) -> Result<()> {
        let ratio = self.steady.det_over_a0()?;
        for (k, &(mu, _)) in discrete_spectrum_all(self.partition.grid()).iter().enumerate() {
            let gm = self.gamma * mu;
            let margin = 1e-8 * mu;
            if (gm - ratio).abs() <= margin {
                return Err(Error::Resonance {
                    mode: k,
                    gamma_mu: gm,
                    ratio,
                    margin,
                });
            }
        }
        Ok(())
    }
}

/// Newton solve of `gamma L V + g(k_sigma(V), V) = 0` from `V = V_bar`, with
/// `U = k_sigma(V)` rebuilt per cell.
pub fn solve_discontinuous(c: &Construction, tol: f64) -> Result<StationaryField> {
    c.check_resonance()?;
    let grid = *c.partition.grid();
    let labels = c.cell_labels();
    let map = ReducedMap {
        lap: grid.laplacian(),
        diff: c.gamma,
        shift: 0.0,
        v_bar: c.steady.v_bar,
        branches: &c.branches,
        labels: &labels,
        trust: c.trust_interval(),
    };
    let sol = map.solve(vec![c.steady.v_bar; grid.cell_count()], tol)?;
    let deviation = deviation_report(c, &sol.u, &sol.v)?;
    Ok(StationaryField {
        grid,
        gamma: c.gamma,
        u: sol.u,
        v: sol.v,
        partition: c.partition.clone(),
        branch_labels: labels,
        residual_inf: sol.residual_inf,
        iterations: sol.iterations,
        deviation,
    })
}

fn deviation_report(c: &Construction, u: &[f64], v: &[f64]) -> Result<DeviationReport> {
    let s = &c.steady;
    let mut base = Vec::with_capacity(c.partition.region_count());
    for &l in &c.region_branches {
        base.push(c.branches.eval(l, s.v_bar)?);
    }
    let mut rep = DeviationReport {
        v_dev: 0.0,
        u_dev_1: 0.0,
        u_dev_2: 0.0,
        omega2_measure: 1.0 - c.partition.measure(1),
    };
    for k in 0..v.len() {
        rep.v_dev = rep.v_dev.max((v[k] - s.v_bar).abs());
        let r = c.partition.region(k);
        if r == 1 {
            rep.u_dev_1 = rep.u_dev_1.max((u[k] - s.u_bar).abs());
        } else {
            rep.u_dev_2 = rep.u_dev_2.max((u[k] - base[r - 1]).abs());
        }
    }
    Ok(rep)
}

/// Solves the construction for each `|Omega_2|` in `fractions`. 1D grids use a
/// centered stripe, 2D grids the EY mask.
pub fn deviation_sweep(template: &Construction, fractions: &[f64], tol: f64) -> Result<Vec<DeviationReport>> {
    let grid: Grid = *template.partition.grid();
    if template.region_branches.len() != 2 {
        return Err(Error::InvalidInput("deviation sweeps use two regions".into()));
    }
    let mut out = Vec::with_capacity(fractions.len());
    for &fr in fractions {
        if !(0.0..1.0).contains(&fr) {
            return Err(Error::InvalidInput(format!("fraction {fr} outside [0, 1)")));
        }
        let partition = if grid.dim() == 1 {
            DomainPartition::centered_stripe(grid, fr)?
        } else {
            generate_ey_mask(&grid, fr)?
        };
        let c = Construction {
            partition,
            ..template.clone()
        };
        out.push(solve_discontinuous(&c, tol)?.deviation);
    }
    Ok(out)
}
