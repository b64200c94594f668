use std::collections::BTreeMap;

use serde::Serialize;

use super::Linearization;
use crate::error::Result;
use crate::grid::{laplacian_eigenvalues, EigenKind, Grid};
use crate::kinetics::{BranchSet, KineticModel, SteadyState};
use crate::stationary::{bifurcation_gammas, StationaryField};

/// Threshold for every sign test in the audit.
pub const SIGN_TOL: f64 = 1e-12;
/// A regular field is degenerate when `max a` is this close to zero.
pub const DEGENERATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegDetCheck {
    pub pass: bool,
    /// `det / a0`; bifurcations need it positive.
    pub margin: f64,
    /// `(k, gamma_k)` over the audited analytic eigenvalues.
    pub gammas: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecBranchCheck {
    pub label: usize,
    pub u: f64,
    pub f_u: f64,
    pub g_v: f64,
    pub pass: bool,
    /// `max(f_u, g_v)` at `(k(V_bar), V_bar)`.
    pub margin: f64,
}

/// Signed margins for every hypothesis checked around a constant state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionAudit {
    /// Margin `a0`.
    pub assumption_1: Check,
    /// Margin `min_k |det/a0 - gamma mu_k|`.
    pub assumption_3: Check,
    pub assumption_3_mode: Option<usize>,
    /// Margin: smallest separation between branches on the window.
    pub assumption_4: Option<Check>,
    /// Margin `max(a0, d0, trace, -det)`; passes when negative.
    pub assumption_5: Check,
    pub reg_det: RegDetCheck,
    pub sec_branch: Vec<SecBranchCheck>,
    /// Fraction of cells with `f_u > 0` on the audited field.
    pub autocatalysis: Option<f64>,
}

/// Everything the audit looks at.
#[derive(Debug, Clone, Copy)]
pub struct AuditRequest<'a> {
    pub model: &'a KineticModel,
    pub steady: &'a SteadyState,
    pub branches: Option<&'a BranchSet>,
    pub gamma: f64,
    pub grid: &'a Grid,
    pub eigen_count: usize,
    pub secondary_labels: &'a [usize],
    pub field: Option<&'a StationaryField>,
}

fn pos(margin: f64) -> Check {
    Check {
        pass: margin > SIGN_TOL,
        margin,
    }
}

fn neg(margin: f64) -> Check {
    Check {
        pass: margin < -SIGN_TOL,
        margin,
    }
}

/// Analytic `mu_k`, at least `count` of them and past `2 ratio / gamma` by one.
fn audit_eigenvalues(grid: &Grid, count: usize, ratio: f64, gamma: f64) -> Vec<(f64, usize)> {
    let cutoff = 2.0 * ratio / gamma;
    let mut n = count.max(1);
    loop {
        let mu = laplacian_eigenvalues(grid, n, EigenKind::Analytic);
        if mu.last().is_some_and(|&(m, _)| m > cutoff) || !cutoff.is_finite() {
            return mu;
        }
        n *= 2;
    }
}

/// Runs every check. Audits always complete; failures show up as `pass: false`.
pub fn audit_assumptions(req: &AuditRequest) -> Result<AssumptionAudit> {
    let s = req.steady;
    let a0 = s.a0;
    let det = s.det();
    let assumption_1 = Check {
        pass: a0.abs() > SIGN_TOL,
        margin: a0,
    };
    let (assumption_3, assumption_3_mode, reg_det) = if assumption_1.pass {
        let ratio = det / a0;
        let mu = audit_eigenvalues(req.grid, req.eigen_count, ratio, req.gamma);
        let (mode, margin) = mu
            .iter()
            .enumerate()
            .map(|(k, &(m, _))| (k, (ratio - req.gamma * m).abs()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("at least one eigenvalue");
        let gammas = bifurcation_gammas(s, &mu)?;
        (
            pos(margin),
            Some(mode),
            RegDetCheck {
                pass: ratio > SIGN_TOL,
                margin: ratio,
                gammas,
            },
        )
    } else {
        (
            Check { pass: false, margin: 0.0 },
            None,
            RegDetCheck {
                pass: false,
                margin: f64::NAN,
                gammas: Vec::new(),
            },
        )
    };
    let assumption_4 = req.branches.map(|b| Check {
        pass: b.count() >= 2 && b.min_gap() > SIGN_TOL,
        margin: b.min_gap(),
    });
    let assumption_5 = neg(a0.max(s.d0).max(s.trace()).max(-det));

    let mut sec_branch = Vec::new();
    if let Some(b) = req.branches {
        for &label in req.secondary_labels {
            let u = b.eval(label, s.v_bar)?;
            let j = req.model.jacobian(u, s.v_bar)?;
            let c = neg(j.fu.max(j.gv));
            sec_branch.push(SecBranchCheck {
                label,
                u,
                f_u: j.fu,
                g_v: j.gv,
                pass: c.pass,
                margin: c.margin,
            });
        }
    }
    let autocatalysis = match req.field {
        Some(f) => Some(autocatalysis_check(req.model, f)?.fraction),
        None => None,
    };
    Ok(AssumptionAudit {
        assumption_1,
        assumption_3,
        assumption_3_mode,
        assumption_4,
        assumption_5,
        reg_det,
        sec_branch,
        autocatalysis,
    })
}

impl AssumptionAudit {
    /// `{name: {pass, margin}}` view.
    pub fn checks(&self) -> BTreeMap<String, Check> {
        let mut m = BTreeMap::new();
        m.insert("assumption_1".into(), self.assumption_1);
        m.insert("assumption_3".into(), self.assumption_3);
        if let Some(c) = self.assumption_4 {
            m.insert("assumption_4".into(), c);
        }
        m.insert("assumption_5".into(), self.assumption_5);
        m.insert(
            "reg_det".into(),
            Check {
                pass: self.reg_det.pass,
                margin: self.reg_det.margin,
            },
        );
        for s in &self.sec_branch {
            m.insert(
                format!("sec_branch_k{}", s.label),
                Check {
                    pass: s.pass,
                    margin: s.margin,
                },
            );
        }
        if let Some(f) = self.autocatalysis {
            m.insert("autocatalysis".into(), Check { pass: f > 0.0, margin: f });
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularClass {
    /// `f_u > 0` somewhere.
    UnstableAutocatalytic,
    /// `f_u < 0` everywhere on a convex domain.
    UnstableConvex,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularVerdict {
    pub class: RegularClass,
    pub max_f_u: f64,
}

/// Instability class of a regular field from the sign of `max f_u`. Both
/// supported domains are convex.
pub fn classify_regular(model: &KineticModel, field: &StationaryField) -> Result<RegularVerdict> {
    let lin = Linearization::from_state(model, &field.grid, field.gamma, &field.u, &field.v)?;
    Ok(classify_coefficients(&lin.a))
}

pub fn classify_coefficients(a: &[f64]) -> RegularVerdict {
    let max_f_u = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let class = if max_f_u.abs() <= DEGENERATE_TOL {
        RegularClass::Degenerate
    } else if max_f_u > 0.0 {
        RegularClass::UnstableAutocatalytic
    } else {
        RegularClass::UnstableConvex
    };
    RegularVerdict { class, max_f_u }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Autocatalysis {
    /// Share of cells with `f_u > 1e-12`.
    pub fraction: f64,
    pub unstable: bool,
}

pub fn autocatalysis_check(model: &KineticModel, field: &StationaryField) -> Result<Autocatalysis> {
    let lin = Linearization::from_state(model, &field.grid, field.gamma, &field.u, &field.v)?;
    let hits = lin.a.iter().filter(|&&a| a > SIGN_TOL).count();
    let fraction = hits as f64 / lin.a.len() as f64;
    Ok(Autocatalysis {
        fraction,
        unstable: fraction > 0.0,
    })
}
