use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinetics::{branches, predator_prey_hump_u, predator_prey_hump_v, KineticModel, SteadyState};

/// Candidate Oregonator rates, tried largest first.
pub const ORE_ALPHA_SCAN: [f64; 5] = [0.2, 0.1, 0.05, 0.02, 0.01];

/// Predator-prey scan grid; the best-ranked pair is the shipped default.
pub const PP_ALPHA_SCAN: [f64; 3] = [0.5, 1.0, 2.0];
pub const PP_BETA_SCAN: [f64; 8] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];

/// Evidence that three Oregonator branches coexist on a window holding all
/// three constant states.
#[derive(Debug, Clone, Serialize)]
pub struct OregonatorCertificate {
    pub alpha: f64,
    pub beta: f64,
    pub window: (f64, f64),
    pub min_gap: f64,
    pub max_residual: f64,
    pub states: Vec<SteadyState>,
    /// Branch through each state, in state order.
    pub state_branches: Vec<usize>,
}

/// Three-branch certificate at one `(alpha, beta)`, if the topology holds.
pub fn oregonator_certificate(alpha: f64, beta: f64) -> Option<OregonatorCertificate> {
    let model = KineticModel::oregonator(alpha, beta).ok()?;
    let states = model.constant_steady_states();
    if states.len() != 3 {
        return None;
    }
    let lo = states.iter().map(|s| s.v_bar).fold(f64::INFINITY, f64::min);
    let hi = states.iter().map(|s| s.v_bar).fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo);
    let window = (lo - pad, hi + pad);
    let set = branches(&model, &states[1], window).ok()?;
    if set.count() != 3 || !(set.min_gap() > 0.0) || set.max_residual() > 1e-10 {
        return None;
    }
    let state_branches = states
        .iter()
        .map(|s| set.label_through(s))
        .collect::<Result<Vec<_>>>()
        .ok()?;
    Some(OregonatorCertificate {
        alpha,
        beta,
        window,
        min_gap: set.min_gap(),
        max_residual: set.max_residual(),
        states,
        state_branches,
    })
}

/// Largest `alpha` from [`ORE_ALPHA_SCAN`] (extended downward by decades)
/// for which three branches coexist across all constant states.
pub fn find_admissible_oregonator_alpha(beta: f64) -> Result<OregonatorCertificate> {
    if !(beta > 1.0) {
        return Err(Error::InvalidInput(format!("oregonator scan needs beta > 1, got {beta}")));
    }
    let mut candidates: Vec<f64> = ORE_ALPHA_SCAN.to_vec();
    // Decades below the scan set: 0.005, 0.002, 0.001, ...
    let mut base = 0.01;
    for _ in 0..4 {
        candidates.extend([0.5 * base, 0.2 * base, 0.1 * base]);
        base *= 0.1;
    }
    candidates
        .into_iter()
        .find_map(|a| oregonator_certificate(a, beta))
        .ok_or_else(|| Error::Assumption(format!("no admissible oregonator alpha found for beta = {beta}")))
}

/// A predator-prey parameter pair whose nonzero state sits on the descending
/// side of the hump.
#[derive(Debug, Clone, Serialize)]
pub struct PredatorPreyCandidate {
    pub alpha: f64,
    pub beta: f64,
    pub u_bar: f64,
    pub v_bar: f64,
    /// `U1 - U_m`.
    pub hump_margin: f64,
    /// Half the distance from `V1` to the nearest fold, `V = 0` or `V = V_m`.
    pub trust_half_width: f64,
}

/// Pairs `(alpha, beta)` with a unique positive state `U1 > U_m`, best trust
/// margin first; ties keep scan order.
pub fn scan_predator_prey(alphas: &[f64], betas: &[f64]) -> Vec<PredatorPreyCandidate> {
    let (um, vm) = (predator_prey_hump_u(), predator_prey_hump_v());
    let mut out = Vec::new();
    for &alpha in alphas {
        for &beta in betas {
            let Ok(model) = KineticModel::predator_prey(alpha, beta) else {
                continue;
            };
            let positive: Vec<SteadyState> = model
                .constant_steady_states()
                .into_iter()
                .filter(|s| s.u_bar > 0.0)
                .collect();
            if positive.len() != 1 {
                continue;
            }
            let s = positive[0];
            if !(s.u_bar > um && s.v_bar > 0.0 && s.v_bar < vm) {
                continue;
            }
            out.push(PredatorPreyCandidate {
                alpha,
                beta,
                u_bar: s.u_bar,
                v_bar: s.v_bar,
                hump_margin: s.u_bar - um,
                trust_half_width: 0.5 * s.v_bar.min(vm - s.v_bar),
            });
        }
    }
    out.sort_by(|a, b| b.trust_half_width.total_cmp(&a.trust_half_width));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_beta() {
        assert!(find_admissible_oregonator_alpha(1.0).is_err());
        assert!(find_admissible_oregonator_alpha(0.5).is_err());
    }

    #[test]
    fn predator_prey_scan_respects_hump() {
        let c = scan_predator_prey(&[1.0], &[1.0, 2.0, 3.0, 4.0]);
        assert!(!c.is_empty());
        for w in c.windows(2) {
            assert!(w[0].trust_half_width >= w[1].trust_half_width);
        }
        assert!(c.iter().all(|x| x.u_bar > predator_prey_hump_u()));
    }
}
