use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{distance, stable_dt, NormSample, Reaction, SimulationConfig, Simulator, State, Stepper, Trajectory};
use crate::error::{Error, Result};
use crate::grid::DomainPartition;
use crate::kinetics::{predator_prey_hump_u, BranchSet, Family, KineticModel, SteadyState};
use crate::stationary::{slaved_u, StationaryField};

pub const DEFAULT_SEED: u64 = 0x00c0_ffee;
/// Safety factor for automatically chosen steps; leaves headroom for the
/// reaction bound to tighten as the state moves.
const AUTO_SAFETY: f64 = 0.5;
/// Growth by this factor over the initial deviation counts as escape.
const ESCAPE_FACTOR: f64 = 10.0;
/// Cells this close to an interface are left out of region statistics.
pub const INTERFACE_BAND: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayVerdict {
    Decayed,
    Bounded,
    Escaped,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub seed: u64,
    pub amplitude: f64,
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    /// Least-squares slope of `ln dev` over the second half of the run.
    pub rate: f64,
    pub initial_dev: f64,
    pub final_dev: f64,
    pub verdict: DecayVerdict,
    /// Why a run stopped early, if it did.
    pub stopped: Option<String>,
    /// Per-step distances to the unperturbed field.
    pub norms: Vec<NormSample>,
}

/// Perturbs `V` by `amplitude` times a seeded random sign per cell, sets `U`
/// from the field's branches at the perturbed `V`, and evolves the full
/// system with explicit Euler. Escape (growth past ten times the initial
/// deviation, blow-up, or a step-size bound failing mid-run) is a verdict,
/// not an error.
pub fn perturbation_decay(
    model: &KineticModel,
    field: &StationaryField,
    branches: &BranchSet,
    amplitude: f64,
    t_end: f64,
    dt: Option<f64>,
    seed: u64,
) -> Result<DecayReport> {
    if !(amplitude >= 0.0 && t_end > 0.0) {
        return Err(Error::InvalidInput("amplitude must be nonnegative and t_end positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = field
        .v
        .iter()
        .map(|&x| x + if rng.random_bool(0.5) { amplitude } else { -amplitude })
        .collect();
    let u = slaved_u(branches, &field.branch_labels, &v)?;
    let start = State { u, v };
    let reference = State {
        u: field.u.clone(),
        v: field.v.clone(),
    };
    let dt = match dt {
        Some(d) => d,
        None => stable_dt(model, &field.grid, field.gamma, &start, AUTO_SAFETY)?,
    };
    let steps = ((t_end / dt).ceil() as usize).max(1);
    let mut sim = Simulator::new(SimulationConfig {
        model: *model,
        grid: field.grid,
        gamma: field.gamma,
        dt,
        t_end: steps as f64 * dt,
        snapshot_stride: steps,
        cfl_safety: 1.0,
        stepper: Stepper::ExplicitEuler,
        reaction: Reaction::Kinetics,
    })?;

    let dev = |n: &NormSample| n.du_inf.max(n.dv_inf);
    let mut state = start;
    let mut norms = vec![distance(0.0, &state, &reference)];
    let initial_dev = dev(&norms[0]);
    let mut stopped = None;
    for s in 1..=steps {
        match sim.advance(&mut state) {
            Ok(()) => {}
            Err(e @ (Error::BlowUp { .. } | Error::Cfl { .. })) if s > 1 => {
                stopped = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
        let n = distance(s as f64 * dt, &state, &reference);
        let escaped = dev(&n) > ESCAPE_FACTOR * initial_dev && initial_dev > 0.0;
        norms.push(n);
        if escaped {
            stopped = Some(format!("deviation exceeded {ESCAPE_FACTOR} times its initial value"));
            break;
        }
    }
    let last = *norms.last().expect("initial sample");
    let final_dev = dev(&last);
    let rate = if amplitude == 0.0 { 0.0 } else { fit_rate(&norms, dev) };
    let verdict = if stopped.is_some() {
        DecayVerdict::Escaped
    } else if rate < 0.0 && final_dev < initial_dev {
        DecayVerdict::Decayed
    } else {
        DecayVerdict::Bounded
    };
    Ok(DecayReport {
        seed,
        amplitude,
        dt,
        steps: norms.len() - 1,
        t_final: last.t,
        rate,
        initial_dev,
        final_dev,
        verdict,
        stopped,
        norms,
    })
}

/// Slope of `ln dev(t)` by least squares over samples in the second half of
/// the recorded time span. Zero deviations are skipped.
fn fit_rate(norms: &[NormSample], dev: impl Fn(&NormSample) -> f64) -> f64 {
    let t_half = norms.last().map_or(0.0, |n| n.t) / 2.0;
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .filter(|n| n.t >= t_half && dev(n) > 0.0)
        .map(|n| (n.t, dev(n).ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Final-state statistics, interface band excluded from the region terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EyStats {
    /// `max |u|` over interior cells of regions 2 and up.
    pub u_sup_omega2: f64,
    /// `max |u - U_bar_1|` over interior cells of region 1.
    pub u_dev_omega1: f64,
    /// `max |v - V_bar_1|` over the whole domain.
    pub v_dev: f64,
    pub interior_cells_omega1: usize,
    pub interior_cells_omega2: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EyReport {
    pub dt: f64,
    pub steps: usize,
    pub t_end: f64,
    pub stats: EyStats,
    pub trajectory: Trajectory,
}

/// Predator-prey run from `(U_bar_1, V_bar_1)` on region 1 and `(0, V_bar_1)`
/// elsewhere.
pub fn run_ey_experiment(
    model: &KineticModel,
    partition: &DomainPartition,
    gamma: f64,
    steady1: &SteadyState,
    t_end: f64,
    dt: Option<f64>,
    snapshot_stride: usize,
) -> Result<EyReport> {
    if model.family() != Family::PredatorPrey {
        return Err(Error::InvalidInput("the EY experiment needs predator-prey kinetics".into()));
    }
    let um = predator_prey_hump_u();
    if !(steady1.u_bar > um) {
        return Err(Error::Assumption(format!(
            "U_bar_1 = {} must exceed U_m = {um}",
            steady1.u_bar
        )));
    }
    let grid = *partition.grid();
    let n = grid.cell_count();
    let u = (0..n)
        .map(|k| if partition.region(k) == 1 { steady1.u_bar } else { 0.0 })
        .collect();
    let start = State {
        u,
        v: vec![steady1.v_bar; n],
    };
    let dt = match dt {
        Some(d) => d,
        None => stable_dt(model, &grid, gamma, &start, AUTO_SAFETY)?,
    };
    let steps = ((t_end / dt).ceil() as usize).max(1);
    let mut sim = Simulator::new(SimulationConfig {
        model: *model,
        grid,
        gamma,
        dt,
        t_end: steps as f64 * dt,
        snapshot_stride: snapshot_stride.max(1),
        cfl_safety: 1.0,
        stepper: Stepper::ExplicitEuler,
        reaction: Reaction::Kinetics,
    })?;
    let trajectory = sim.run(start, None)?;
    let last = &trajectory.final_state;
    let band = partition.interface_band(INTERFACE_BAND);
    let mut stats = EyStats {
        u_sup_omega2: 0.0,
        u_dev_omega1: 0.0,
        v_dev: 0.0,
        interior_cells_omega1: 0,
        interior_cells_omega2: 0,
    };
    for (k, &in_band) in band.iter().enumerate().take(n) {
        stats.v_dev = stats.v_dev.max((last.v[k] - steady1.v_bar).abs());
        if in_band {
            continue;
        }
        if partition.region(k) == 1 {
            stats.u_dev_omega1 = stats.u_dev_omega1.max((last.u[k] - steady1.u_bar).abs());
            stats.interior_cells_omega1 += 1;
        } else {
            stats.u_sup_omega2 = stats.u_sup_omega2.max(last.u[k].abs());
            stats.interior_cells_omega2 += 1;
        }
    }
    Ok(EyReport {
        dt,
        steps,
        t_end: steps as f64 * dt,
        stats,
        trajectory,
    })
}
