//! Time integration of the full system by explicit Euler (optionally IMEX),
//! with perturbation-decay and EY-mask experiments.

mod experiments;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use experiments::{
    perturbation_decay, run_ey_experiment, DecayReport, DecayVerdict, EyReport, EyStats, DEFAULT_SEED,
};

use crate::error::{Error, Result};
use crate::grid::{Grid, NeumannLaplacian};
use crate::kinetics::{BranchSet, KineticModel};
use crate::linalg::{SparseLu, SparseMatrix};

/// Steps between refreshes of the reaction Lipschitz estimate.
pub const REACTION_REFRESH: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    ExplicitEuler,
    /// Implicit diffusion, explicit reaction.
    Imex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reaction {
    Kinetics,
    /// `f = g = 0`, for conservation checks.
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub model: KineticModel,
    pub grid: Grid,
    pub gamma: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub cfl_safety: f64,
    pub stepper: Stepper,
    pub reaction: Reaction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct State {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSample {
    pub t: f64,
    pub du_inf: f64,
    pub dv_inf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<State>,
    /// Per-step distances to the reference state, empty without one.
    pub norms: Vec<NormSample>,
    pub steps: usize,
    /// State after the last step, whether or not it landed on a snapshot.
    #[serde(skip)]
    pub final_state: State,
}

/// `safety h^2 / (2 dim gamma)`.
pub fn diffusive_bound(grid: &Grid, gamma: f64, safety: f64) -> f64 {
    let h = grid.hx().min(grid.hy());
    safety * h * h / (2.0 * grid.dim() as f64 * gamma)
}

/// `safety / max_x (|f_u| + |f_v| + |g_u| + |g_v|)`.
pub fn reaction_bound(model: &KineticModel, state: &State, safety: f64) -> Result<f64> {
    let lip = state
        .u
        .par_iter()
        .zip(state.v.par_iter())
        .map(|(&u, &v)| model.jacobian(u, v).map(|j| j.abs_sum()))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    Ok(if lip > 0.0 { safety / lip } else { f64::INFINITY })
}

/// Largest step satisfying both bounds for `state`.
pub fn stable_dt(model: &KineticModel, grid: &Grid, gamma: f64, state: &State, safety: f64) -> Result<f64> {
    Ok(diffusive_bound(grid, gamma, safety).min(reaction_bound(model, state, safety)?))
}

/// One synchronized explicit Euler step: every cell reads the old state.
pub fn step(model: &KineticModel, lap: &NeumannLaplacian, gamma: f64, state: &State, dt: f64) -> State {
    let mut next = State {
        u: vec![0.0; state.u.len()],
        v: vec![0.0; state.v.len()],
    };
    explicit_into(model, lap, gamma, state, dt, Reaction::Kinetics, &mut next);
    next
}

fn explicit_into(
    model: &KineticModel,
    lap: &NeumannLaplacian,
    gamma: f64,
    state: &State,
    dt: f64,
    reaction: Reaction,
    next: &mut State,
) {
    let nx = lap.grid().nx();
    next.u
        .par_chunks_mut(nx)
        .zip(next.v.par_chunks_mut(nx))
        .enumerate()
        .for_each(|(j, (ur, vr))| {
            for i in 0..nx {
                let k = i + nx * j;
                let (u, v) = (state.u[k], state.v[k]);
                let (f, g) = match reaction {
                    Reaction::Kinetics => (model.f_unchecked(u, v), model.g_unchecked(u, v)),
                    Reaction::Zero => (0.0, 0.0),
                };
                ur[i] = u + dt * f;
                vr[i] = v + dt * (gamma * lap.apply_at(&state.v, k) + g);
            }
        });
}

fn all_finite(s: &State) -> bool {
    s.u.par_iter().chain(s.v.par_iter()).all(|x| x.is_finite())
}

/// Advances states under a fixed configuration, reusing buffers.
pub struct Simulator {
    config: SimulationConfig,
    lap: NeumannLaplacian,
    imex: Option<SparseLu>,
    scratch: State,
    steps_taken: usize,
}

impl Simulator {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        let c = &config;
        if !(c.gamma > 0.0 && c.dt > 0.0 && c.t_end >= 0.0) {
            return Err(Error::InvalidInput("gamma and dt must be positive, t_end nonnegative".into()));
        }
        if !(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0) {
            return Err(Error::InvalidInput(format!("cfl_safety {} outside (0, 1]", c.cfl_safety)));
        }
        if c.snapshot_stride == 0 {
            return Err(Error::InvalidInput("snapshot_stride must be at least 1".into()));
        }
        let lap = c.grid.laplacian();
        let imex = match c.stepper {
            Stepper::ExplicitEuler => {
                let bound = diffusive_bound(&c.grid, c.gamma, c.cfl_safety);
                if c.dt > bound {
                    return Err(Error::Cfl {
                        dt: c.dt,
                        bound,
                        kind: "diffusive",
                    });
                }
                None
            }
            Stepper::Imex => {
                let n = c.grid.cell_count();
                let mut e = Vec::with_capacity(5 * n);
                for k in 0..n {
                    for (col, val) in lap.row(k) {
                        let id = if col == k { 1.0 } else { 0.0 };
                        e.push((k, col, id - c.dt * c.gamma * val));
                    }
                }
                Some(SparseMatrix::from_entries(n, &e)?.lu()?)
            }
        };
        let n = c.grid.cell_count();
        Ok(Simulator {
            scratch: State {
                u: vec![0.0; n],
                v: vec![0.0; n],
            },
            config,
            lap,
            imex,
            steps_taken: 0,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn total_steps(&self) -> usize {
        (self.config.t_end / self.config.dt).round() as usize
    }

    fn check_reaction_cfl(&self, state: &State) -> Result<()> {
        if self.config.reaction == Reaction::Zero {
            return Ok(());
        }
        let bound = reaction_bound(&self.config.model, state, self.config.cfl_safety)?;
        if self.config.dt > bound {
            return Err(Error::Cfl {
                dt: self.config.dt,
                bound,
                kind: "reaction",
            });
        }
        Ok(())
    }

    /// One step in place.
    pub fn advance(&mut self, state: &mut State) -> Result<()> {
        let c = &self.config;
        if self.steps_taken.is_multiple_of(REACTION_REFRESH) {
            self.check_reaction_cfl(state)?;
        }
        match &self.imex {
            None => explicit_into(&c.model, &self.lap, c.gamma, state, c.dt, c.reaction, &mut self.scratch),
            Some(lu) => {
                let (model, dt, reaction) = (c.model, c.dt, c.reaction);
                let rhs: Vec<f64> = state
                    .u
                    .par_iter()
                    .zip(state.v.par_iter())
                    .zip(self.scratch.u.par_iter_mut())
                    .map(|((&u, &v), un)| {
                        let (f, g) = match reaction {
                            Reaction::Kinetics => (model.f_unchecked(u, v), model.g_unchecked(u, v)),
                            Reaction::Zero => (0.0, 0.0),
                        };
                        *un = u + dt * f;
                        v + dt * g
                    })
                    .collect();
                self.scratch.v = lu.solve(&rhs).map_err(|_| Error::BlowUp {
                    step: self.steps_taken + 1,
                    time: (self.steps_taken + 1) as f64 * dt,
                })?;
            }
        }
        std::mem::swap(state, &mut self.scratch);
        self.steps_taken += 1;
        if !all_finite(state) {
            return Err(Error::BlowUp {
                step: self.steps_taken,
                time: self.steps_taken as f64 * self.config.dt,
            });
        }
        Ok(())
    }

    /// Runs to `t_end`, keeping every `snapshot_stride`-th state and, with a
    /// reference, the per-step sup-norm distances to it.
    pub fn run(&mut self, initial: State, reference: Option<&State>) -> Result<Trajectory> {
        let n = self.config.grid.cell_count();
        if initial.u.len() != n || initial.v.len() != n {
            return Err(Error::InvalidInput("initial state does not match the grid".into()));
        }
        let steps = self.total_steps();
        let stride = self.config.snapshot_stride;
        let dt = self.config.dt;
        let mut state = initial;
        let mut traj = Trajectory {
            times: vec![0.0],
            snapshots: vec![state.clone()],
            norms: Vec::new(),
            steps,
            final_state: State {
                u: Vec::new(),
                v: Vec::new(),
            },
        };
        if let Some(r) = reference {
            traj.norms.push(distance(0.0, &state, r));
        }
        for s in 1..=steps {
            self.advance(&mut state)?;
            let t = s as f64 * dt;
            if let Some(r) = reference {
                traj.norms.push(distance(t, &state, r));
            }
            if s % stride == 0 {
                traj.times.push(t);
                traj.snapshots.push(state.clone());
            }
        }
        traj.final_state = state;
        Ok(traj)
    }
}

pub(crate) fn distance(t: f64, s: &State, r: &State) -> NormSample {
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    NormSample {
        t,
        du_inf: sup(&s.u, &r.u),
        dv_inf: sup(&s.v, &r.v),
    }
}

/// Explicit march of the slaved equation `v_t = gamma L v + g(k(v), v)` with
/// `u = k_label(v)` per cell.
pub fn march_slaved(
    branches: &BranchSet,
    labels: &[usize],
    grid: &Grid,
    gamma: f64,
    v0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    let bound = diffusive_bound(grid, gamma, 1.0);
    if dt > bound {
        return Err(Error::Cfl {
            dt,
            bound,
            kind: "diffusive",
        });
    }
    let lap = grid.laplacian();
    let model = *branches.model();
    let mut v = v0.to_vec();
    for s in 1..=steps {
        let u = crate::stationary::slaved_u(branches, labels, &v)?;
        let lv = lap.apply_vec(&v);
        v = (0..v.len())
            .into_par_iter()
            .map(|k| v[k] + dt * (gamma * lv[k] + model.g_unchecked(u[k], v[k])))
            .collect();
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::BlowUp {
                step: s,
                time: s as f64 * dt,
            });
        }
    }
    Ok(v)
}
