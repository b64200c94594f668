//! One function per subcommand. Each computes everything first and writes
//! artifacts only after the computation succeeded, so failed runs leave no
//! partial output behind.

use std::path::Path;

use discstat::grid::{laplacian_eigenvalues, pnm};
use discstat::io::{write_bytes, write_csv, write_field_csv, write_json, write_norms_csv, write_snapshot};
use discstat::kinetics::{predator_prey_hump_u, predator_prey_hump_v};
use discstat::simulate::{
    perturbation_decay, run_ey_experiment, stable_dt, Reaction, Simulator, Stepper,
};
use discstat::stability::{
    assemble_linearization, audit_assumptions, autocatalysis_check, classify_regular, rightmost_spectrum,
    AuditRequest, Linearization,
};
use discstat::stationary::{
    bifurcation_gammas, continuation_sweep, solve_discontinuous, Construction, PerturbedProblem,
};
use discstat::{DomainPartition, EigenKind, Family, Grid, SimulationConfig, State, SteadyState, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Safety factor for automatically chosen time steps.
const AUTO_DT_SAFETY: f64 = 0.5;
/// Relative slack on the constructor-measured bounds in the EY checks.
const EY_BOUND_SLACK: f64 = 1e-6;
/// Sup bound on `u` over the interior of region 2 in the EY checks.
const EY_U_OMEGA2_BOUND: f64 = 1e-3;

pub type Summary = serde_json::Map<String, Value>;

fn summary(pairs: Value) -> Summary {
    match pairs {
        Value::Object(m) => m,
        _ => unreachable!("summaries are objects"),
    }
}

#[derive(Serialize)]
struct SteadyRow {
    #[serde(flatten)]
    state: SteadyState,
    det: f64,
    trace: f64,
    f_residual: f64,
    g_residual: f64,
}

pub fn steady(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    let model = cfg.model()?;
    let rows: Vec<SteadyRow> = model
        .constant_steady_states()
        .into_iter()
        .map(|s| SteadyRow {
            det: s.det(),
            trace: s.trace(),
            f_residual: model.f_unchecked(s.u_bar, s.v_bar),
            g_residual: model.g_unchecked(s.u_bar, s.v_bar),
            state: s,
        })
        .collect();
    write_json(&out.join("steady.json"), &json!({ "model": model, "states": rows }))?;
    Ok(summary(json!({ "states": rows.len() })))
}

pub fn branches(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    let model = cfg.model()?;
    let steady = cfg.steady(&model)?;
    let set = cfg.branch_set(&model, &steady)?;
    if cfg.samples == 0 {
        return Err(CliError::Config("`samples` must be positive".into()));
    }
    let (lo, hi) = set.window();
    let mut header = vec!["v".to_string()];
    header.extend(set.labels().iter().map(|l| format!("k{l}")));
    let rows: Vec<Vec<f64>> = (0..cfg.samples)
        .map(|i| {
            let v = lo + (i as f64 + 0.5) / cfg.samples as f64 * (hi - lo);
            let mut row = vec![v];
            // Missing values (a branch cut by a break) are written as NaN.
            row.extend(set.labels().iter().map(|&l| set.eval(l, v).unwrap_or(f64::NAN)));
            row
        })
        .collect();
    let inside: Vec<SteadyState> = model
        .constant_steady_states()
        .into_iter()
        .filter(|s| s.v_bar > lo && s.v_bar < hi)
        .collect();
    let hump = (model.family() == Family::PredatorPrey)
        .then(|| json!({ "u_m": predator_prey_hump_u(), "v_m": predator_prey_hump_v() }));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&out.join("branches.csv"), &header_refs, rows)?;
    write_json(
        &out.join("branches.json"),
        &json!({
            "model": model,
            "window": [lo, hi],
            "labels": set.labels(),
            "min_gap": set.min_gap(),
            "max_residual": set.max_residual(),
            "breaks": set.breaks(),
            "states": inside,
            "hump": hump,
        }),
    )?;
    Ok(summary(json!({ "labels": set.labels(), "max_residual": set.max_residual() })))
}

fn gamma_rows(steady: &SteadyState, mu: &[(f64, usize)]) -> Result<Vec<Value>, CliError> {
    Ok(bifurcation_gammas(steady, mu)?
        .into_iter()
        .map(|(i, g)| json!({ "index": i, "mu": mu[i].0, "multiplicity": mu[i].1, "gamma": g }))
        .collect())
}

pub fn bifurcate(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    let model = cfg.model()?;
    let steady = cfg.steady(&model)?;
    let grid = cfg.grid()?;
    let count = cfg.eigen_count + 1;
    let analytic = gamma_rows(&steady, &laplacian_eigenvalues(&grid, count, EigenKind::Analytic))?;
    let discrete = gamma_rows(&steady, &laplacian_eigenvalues(&grid, count, EigenKind::Discrete))?;
    let mut continuation = None;
    if let Some(amps) = &cfg.amplitudes {
        let set = cfg.branch_set(&model, &steady)?;
        let label = set.label_through(&steady)?;
        let p = PerturbedProblem::new(set, label, steady, grid, cfg.mode)?;
        let pts = continuation_sweep(&p, amps, cfg.tol)?;
        continuation = Some((p.pivot, pts));
    }
    let mut report = json!({
        "model": model,
        "steady": steady,
        "det_over_a0": steady.det_over_a0()?,
        "analytic": analytic,
        "discrete": discrete,
    });
    if let Some((pivot, pts)) = &continuation {
        report["continuation"] = json!({ "mode": cfg.mode, "pivot": pivot, "points": pts });
        write_csv(
            &out.join("continuation.csv"),
            &["amplitude", "d_ell", "residual_inf"],
            pts.iter().map(|p| vec![p.amplitude, p.d_ell, p.residual_inf]),
        )?;
    }
    write_json(&out.join("bifurcation.json"), &report)?;
    let first = analytic.first().map(|r| r["gamma"].clone()).unwrap_or(Value::Null);
    Ok(summary(json!({ "first_gamma": first, "count": analytic.len() })))
}

fn write_partition(out: &Path, p: &DomainPartition) -> Result<(), CliError> {
    if p.region_count() == 2 {
        write_bytes(&out.join("partition.pbm"), pnm::encode_pbm(p)?.as_bytes())?;
    } else {
        write_bytes(&out.join("partition.pgm"), pnm::encode_region_pgm(p).as_bytes())?;
    }
    Ok(())
}

pub fn construct(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    let model = cfg.model()?;
    let steady = cfg.steady(&model)?;
    let c = cfg.construction(&model, &steady)?;
    let field = solve_discontinuous(&c, cfg.tol)?;
    let report = field.report();
    write_field_csv(&out.join("field.csv"), &field.grid, &field.u, &field.v)?;
    write_partition(out, &field.partition)?;
    write_json(
        &out.join("report.json"),
        &json!({
            "solver": report,
            "region_branches": c.region_branches,
            "trust_interval": c.trust_interval(),
            "measures": field.partition.measures(),
        }),
    )?;
    Ok(summary(json!({
        "iterations": field.iterations,
        "residual_inf": field.residual_inf,
        "v_dev": field.deviation.v_dev,
    })))
}

pub fn audit(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    let model = cfg.model()?;
    let steady = cfg.steady(&model)?;
    let grid = cfg.grid()?;
    let set = match cfg.resolve_window(&model, &steady) {
        Some(_) => Some(cfg.branch_set(&model, &steady)?),
        None => None,
    };
    let secondary = match &set {
        Some(s) => cfg.secondary_labels(s, &steady)?,
        None => cfg.secondary_labels.clone().unwrap_or_default(),
    };
    let field = if cfg.has_partition() {
        let c = cfg.construction(&model, &steady)?;
        Some(solve_discontinuous(&c, cfg.tol)?)
    } else {
        None
    };
    let a = audit_assumptions(&AuditRequest {
        model: &model,
        steady: &steady,
        branches: set.as_ref(),
        gamma: cfg.gamma,
        grid: &grid,
        eigen_count: cfg.eigen_count,
        secondary_labels: &secondary,
        field: field.as_ref(),
    })?;
    let checks = a.checks();
    write_json(&out.join("audit.json"), &json!({ "audit": a, "checks": checks }))?;
    let flags: serde_json::Map<String, Value> = checks.iter().map(|(k, c)| (k.clone(), json!(c.pass))).collect();
    Ok(summary(json!({ "checks": flags })))
}

pub fn spectrum(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    let model = cfg.model()?;
    let steady = cfg.steady(&model)?;
    let (lin, extra) = if cfg.has_partition() {
        let c = cfg.construction(&model, &steady)?;
        let field = solve_discontinuous(&c, cfg.tol)?;
        let lin = assemble_linearization(&model, &field)?;
        let extra = json!({
            "autocatalysis": autocatalysis_check(&model, &field)?,
            "regular_class": classify_regular(&model, &field)?,
        });
        (lin, extra)
    } else {
        (Linearization::constant(&cfg.grid()?, cfg.gamma, &steady), Value::Null)
    };
    let rep = rightmost_spectrum(&lin, cfg.eigen_count)?;
    write_csv(
        &out.join("eigenvalues.csv"),
        &["re", "im", "residual"],
        rep.eigenvalues.iter().zip(&rep.residuals).map(|(e, r)| vec![e[0], e[1], *r]),
    )?;
    write_json(&out.join("spectrum.json"), &json!({ "spectrum": rep, "field": extra }))?;
    Ok(summary(json!({ "rightmost_re": rep.rightmost_re(), "verdict": rep.verdict })))
}

fn write_trajectory(out: &Path, grid: &Grid, traj: &Trajectory) -> Result<(), CliError> {
    let dir = out.join("snapshots");
    for (t, s) in traj.times.iter().zip(&traj.snapshots) {
        write_snapshot(&dir, grid, *t, s)?;
    }
    if !traj.norms.is_empty() {
        write_norms_csv(&out.join("norms.csv"), &traj.norms)?;
    }
    write_field_csv(&out.join("final.csv"), grid, &traj.final_state.u, &traj.final_state.v)?;
    Ok(())
}

pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    let model = cfg.model()?;
    let steady = cfg.steady(&model)?;
    let grid = cfg.grid()?;
    let reference = if cfg.has_partition() {
        let field = solve_discontinuous(&cfg.construction(&model, &steady)?, cfg.tol)?;
        State { u: field.u, v: field.v }
    } else {
        let n = grid.cell_count();
        State {
            u: vec![steady.u_bar; n],
            v: vec![steady.v_bar; n],
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let initial = State {
        u: reference.u.clone(),
        v: reference
            .v
            .iter()
            .map(|&x| x + if rng.random_bool(0.5) { cfg.amplitude } else { -cfg.amplitude })
            .collect(),
    };
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => stable_dt(&model, &grid, cfg.gamma, &initial, AUTO_DT_SAFETY)?,
    };
    let sim_cfg = SimulationConfig {
        model,
        grid,
        gamma: cfg.gamma,
        dt,
        t_end: cfg.t_end,
        snapshot_stride: cfg.snapshot_stride,
        cfl_safety: cfg.cfl_safety,
        stepper: cfg.stepper,
        reaction: Reaction::Kinetics,
    };
    let mut sim = Simulator::new(sim_cfg.clone())?;
    let traj = sim.run(initial, Some(&reference))?;
    let last = traj.norms.last().copied();
    write_trajectory(out, &grid, &traj)?;
    write_json(
        &out.join("report.json"),
        &json!({ "simulation": sim_cfg, "seed": cfg.seed, "steps": traj.steps, "final": last }),
    )?;
    Ok(summary(json!({ "steps": traj.steps, "dt": dt, "final": last })))
}

pub fn ey(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    let model = cfg.model()?;
    let steady = cfg.steady(&model)?;
    let c: Construction = cfg.construction(&model, &steady)?;
    let reference = solve_discontinuous(&c, cfg.tol)?.deviation;
    if cfg.stepper != Stepper::ExplicitEuler {
        return Err(CliError::Config("the EY experiment steps with explicit Euler".into()));
    }
    let rep = run_ey_experiment(&model, &c.partition, cfg.gamma, &steady, cfg.t_end, cfg.dt, cfg.snapshot_stride)?;
    let s = rep.stats;
    let checks = json!({
        "u_omega2_small": s.u_sup_omega2 <= EY_U_OMEGA2_BOUND,
        "u_omega1_within_constructor": s.u_dev_omega1 <= reference.u_dev_1 * (1.0 + EY_BOUND_SLACK),
        "v_within_constructor": s.v_dev <= reference.v_dev * (1.0 + EY_BOUND_SLACK),
    });
    write_partition(out, &c.partition)?;
    write_trajectory(out, c.partition.grid(), &rep.trajectory)?;
    write_json(
        &out.join("report.json"),
        &json!({
            "seed": cfg.seed,
            "dt": rep.dt,
            "steps": rep.steps,
            "t_end": rep.t_end,
            "stats": s,
            "constructor": reference,
            "checks": checks,
        }),
    )?;
    Ok(summary(json!({ "steps": rep.steps, "stats": s, "checks": checks })))
}

pub fn decay(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    let model = cfg.model()?;
    let steady = cfg.steady(&model)?;
    let c = cfg.construction(&model, &steady)?;
    let field = solve_discontinuous(&c, cfg.tol)?;
    let rep = perturbation_decay(&model, &field, &c.branches, cfg.amplitude, cfg.t_end, cfg.dt, cfg.seed)?;
    write_field_csv(&out.join("field.csv"), &field.grid, &field.u, &field.v)?;
    write_norms_csv(&out.join("norms.csv"), &rep.norms)?;
    write_json(
        &out.join("report.json"),
        &json!({
            "config": cfg,
            "seed": rep.seed,
            "verdict": rep.verdict,
            "rate": rep.rate,
            "final_dev": rep.final_dev,
            "initial_dev": rep.initial_dev,
            "dt": rep.dt,
            "steps": rep.steps,
            "t_final": rep.t_final,
            "stopped": rep.stopped,
        }),
    )?;
    Ok(summary(json!({
        "verdict": rep.verdict,
        "rate": rep.rate,
        "final_dev": rep.final_dev,
    })))
}
