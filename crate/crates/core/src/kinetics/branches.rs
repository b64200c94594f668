use serde::Serialize;

use super::roots::monotone_cubic_roots;
use super::{Family, KineticModel, SteadyState};
use crate::error::{Error, Result};

/// How a branch degenerates at a [`Break`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakKind {
    /// Two branches merge (`f_u = 0`).
    Fold,
    /// A branch is unbounded.
    Pole,
    /// A branch has a finite limit but sits on an excluded point of `f`.
    Puncture,
}

/// A value of `V` at which some branches stop being smooth solutions of `f = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Break {
    pub v: f64,
    pub kind: BreakKind,
    pub labels: Vec<usize>,
}

/// Number of branches a family carries away from its breaks.
fn branch_count(family: Family) -> usize {
    match family {
        Family::GrayScott | Family::Brusselator => 2,
        Family::Oregonator => 3,
        Family::PredatorPrey => 4,
    }
}

/// Maps descending value rank to branch label for the root families.
///
/// Oregonator: the largest root continues through `(U2, V2)` and the smallest
/// one is the branch approaching the excluded point `(-beta, 0)`.
/// Predator-prey: `k1` is the descending side of the hump, `k2` the ascending
/// side, `k3 = 0`, and `k4` the root in `(-1, 0)`.
fn rank_to_label(family: Family) -> &'static [usize] {
    match family {
        Family::Oregonator => &[2, 1, 3],
        Family::PredatorPrey => &[1, 2, 3, 4],
        _ => &[1, 2],
    }
}

/// Values of every branch at `v`, indexed by `label - 1`. A punctured branch
/// reports `Err(Singular)` in its slot; structural failures (folds, poles)
/// fail the whole evaluation.
fn branch_values(model: &KineticModel, v: f64) -> Result<Vec<Result<f64>>> {
    let (a, b) = (model.alpha, model.beta);
    match model.family {
        Family::GrayScott => {
            if v == 0.0 {
                return Err(Error::Singular("gray-scott branch k2 = alpha/V has a pole at V = 0".into()));
            }
            Ok(vec![Ok(0.0), Ok(a / v)])
        }
        Family::Brusselator => {
            let disc = (b + 1.0) * (b + 1.0) - 4.0 * a * v;
            if disc < 0.0 {
                return Err(Error::Fold {
                    location: (b + 1.0) * (b + 1.0) / (4.0 * a),
                    detail: format!("brusselator branches are complex at V = {v}"),
                });
            }
            if v == 0.0 {
                return Err(Error::Singular("brusselator branch k1 has a pole at V = 0".into()));
            }
            let s = disc.sqrt();
            let k1 = (b + 1.0 + s) / (2.0 * v);
            // (b + 1 - s) / (2v), rationalized to avoid cancellation
            let k2 = 2.0 * a / (b + 1.0 + s);
            Ok(vec![Ok(k1), Ok(k2)])
        }
        Family::Oregonator => {
            // (U - U^2)(beta + U) + alpha V (beta - U) = 0
            let roots = monotone_cubic_roots(-1.0, 1.0 - b, b - a * v, a * v * b);
            if roots.len() != 3 {
                return Err(Error::Fold {
                    location: v,
                    detail: format!("oregonator nullcline has {} real branch(es) at V = {v}", roots.len()),
                });
            }
            let mut out: Vec<Result<f64>> = vec![Ok(0.0); 3];
            for (rank, &r) in roots.iter().rev().enumerate() {
                let label = rank_to_label(Family::Oregonator)[rank];
                out[label - 1] = if (r + b).abs() <= 1e-12 * b.max(1.0) {
                    Err(Error::Singular(format!(
                        "oregonator branch k3 meets the excluded point U = -beta at V = {v}"
                    )))
                } else {
                    Ok(polish(model, r, v))
                };
            }
            Ok(out)
        }
        Family::PredatorPrey => {
            if v <= 0.0 {
                return Err(Error::Fold {
                    location: 0.0,
                    detail: format!("predator-prey branches merge at V = 0 (requested V = {v})"),
                });
            }
            // V U^3 - U^2 + V = 0 for the nonzero branches
            let roots = monotone_cubic_roots(v, -1.0, 0.0, v);
            if roots.len() != 3 {
                return Err(Error::Fold {
                    location: super::predator_prey_hump_v(),
                    detail: format!("predator-prey hump branches do not exist at V = {v}"),
                });
            }
            let neg = roots[0];
            let small = roots[1];
            let big = roots[2];
            Ok(vec![
                Ok(polish(model, big, v)),
                Ok(polish(model, small, v)),
                Ok(0.0),
                Ok(polish(model, neg, v)),
            ])
        }
    }
}

/// A few Newton steps on `f` itself, kept only while they reduce `|f|`.
fn polish(model: &KineticModel, mut u: f64, v: f64) -> f64 {
    let mut res = model.f_unchecked(u, v).abs();
    for _ in 0..4 {
        if res == 0.0 {
            break;
        }
        let fu = model.jacobian_unchecked(u, v).fu;
        if fu == 0.0 || !fu.is_finite() {
            break;
        }
        let cand = u - model.f_unchecked(u, v) / fu;
        let r = model.f_unchecked(cand, v).abs();
        if r.is_finite() && r < res {
            u = cand;
            res = r;
        } else {
            break;
        }
    }
    u
}

/// Values of `V` where the family's branch structure changes.
pub fn family_breaks(model: &KineticModel) -> Vec<Break> {
    let (a, b) = (model.alpha, model.beta);
    match model.family {
        Family::GrayScott => vec![Break {
            v: 0.0,
            kind: BreakKind::Pole,
            labels: vec![2],
        }],
        Family::Brusselator => vec![
            Break {
                v: 0.0,
                kind: BreakKind::Pole,
                labels: vec![1],
            },
            Break {
                v: (b + 1.0) * (b + 1.0) / (4.0 * a),
                kind: BreakKind::Fold,
                labels: vec![1, 2],
            },
        ],
        Family::Oregonator => {
            let mut out = vec![Break {
                v: 0.0,
                kind: BreakKind::Puncture,
                labels: vec![3],
            }];
            // Discriminant of the cleared cubic as a cubic polynomial in V.
            let bb = 1.0 - b;
            let c3 = -4.0 * a * a * a;
            let c2 = 18.0 * a * a * b * bb + bb * bb * a * a + 12.0 * b * a * a - 27.0 * a * a * b * b;
            let c1 = -18.0 * a * b * b * bb - 4.0 * bb * bb * bb * a * b - 2.0 * bb * bb * a * b - 12.0 * b * b * a;
            let c0 = bb * bb * b * b + 4.0 * b * b * b;
            for vf in monotone_cubic_roots(c3, c2, c1, c0) {
                out.push(Break {
                    v: vf,
                    kind: BreakKind::Fold,
                    labels: oregonator_fold_labels(model, vf),
                });
            }
            out
        }
        Family::PredatorPrey => vec![
            Break {
                v: 0.0,
                kind: BreakKind::Fold,
                labels: vec![1, 2, 3, 4],
            },
            Break {
                v: super::predator_prey_hump_v(),
                kind: BreakKind::Fold,
                labels: vec![1, 2],
            },
        ],
    }
}

/// Which pair of Oregonator branches merges at the fold `vf`.
fn oregonator_fold_labels(model: &KineticModel, vf: f64) -> Vec<usize> {
    let eta = 1e-6 * (1.0 + vf.abs());
    for side in [vf - eta, vf + eta] {
        let b = model.beta;
        let a = model.alpha;
        let roots = monotone_cubic_roots(-1.0, 1.0 - b, b - a * side, a * side * b);
        if roots.len() == 3 {
            let desc: Vec<f64> = roots.iter().rev().copied().collect();
            let pair = if desc[0] - desc[1] < desc[1] - desc[2] { 0 } else { 1 };
            let map = rank_to_label(Family::Oregonator);
            let mut l = vec![map[pair], map[pair + 1]];
            l.sort_unstable();
            return l;
        }
    }
    vec![1, 2, 3]
}

/// Labelled nullcline branches `k_i` of `f(U, V) = 0` on a common open
/// interval of `V` that contains no fold or pole.
#[derive(Debug, Clone, Serialize)]
pub struct BranchSet {
    #[serde(skip)]
    model: KineticModel,
    v_lo: f64,
    v_hi: f64,
    labels: Vec<usize>,
    /// Smallest separation between any two branches over the sampled window.
    min_gap: f64,
    /// Largest `|f(k_i(V), V)|` over the sampled window.
    max_residual: f64,
    breaks: Vec<Break>,
}

const WINDOW_SAMPLES: usize = 400;

/// Builds the branch set of `model` on the open window `(v_lo, v_hi)`.
pub fn branches(model: &KineticModel, steady: &SteadyState, v_window: (f64, f64)) -> Result<BranchSet> {
    let (v_lo, v_hi) = v_window;
    if !(v_lo.is_finite() && v_hi.is_finite() && v_lo < v_hi) {
        return Err(Error::InvalidInput(format!("invalid V window ({v_lo}, {v_hi})")));
    }
    if !(steady.v_bar > v_lo && steady.v_bar < v_hi) {
        return Err(Error::InvalidInput(format!(
            "window ({v_lo}, {v_hi}) does not contain V = {}",
            steady.v_bar
        )));
    }
    let breaks = family_breaks(model);
    for br in &breaks {
        if br.kind != BreakKind::Puncture && br.v > v_lo && br.v < v_hi {
            return Err(Error::Fold {
                location: br.v,
                detail: format!("{:?} of branches {:?} inside window ({v_lo}, {v_hi})", br.kind, br.labels),
            });
        }
    }

    let count = branch_count(model.family);
    let mut min_gap = f64::INFINITY;
    let mut max_residual: f64 = 0.0;
    let mut last_ok = None;
    for i in 0..WINDOW_SAMPLES {
        let v = v_lo + (i as f64 + 0.5) * (v_hi - v_lo) / WINDOW_SAMPLES as f64;
        let vals = match branch_values(model, v) {
            Ok(vals) => vals,
            Err(e) => {
                let location = match last_ok {
                    Some(good) => locate_failure(model, good, v),
                    None => v,
                };
                return Err(Error::Fold {
                    location,
                    detail: format!("branch structure changes inside window: {e}"),
                });
            }
        };
        last_ok = Some(v);
        let defined: Vec<f64> = vals.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
        for &u in &defined {
            max_residual = max_residual.max(model.f_unchecked(u, v).abs());
        }
        let mut sorted = defined.clone();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            min_gap = min_gap.min(w[1] - w[0]);
        }
    }
    if min_gap <= 0.0 {
        return Err(Error::Fold {
            location: v_lo,
            detail: "branches coincide inside the window".into(),
        });
    }
    Ok(BranchSet {
        model: *model,
        v_lo,
        v_hi,
        labels: (1..=count).collect(),
        min_gap,
        max_residual,
        breaks,
    })
}

fn locate_failure(model: &KineticModel, mut good: f64, mut bad: f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if branch_values(model, mid).is_ok() {
            good = mid;
        } else {
            bad = mid;
        }
    }
    0.5 * (good + bad)
}

impl BranchSet {
    pub fn model(&self) -> &KineticModel {
        &self.model
    }

    pub fn window(&self) -> (f64, f64) {
        (self.v_lo, self.v_hi)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    pub fn breaks(&self) -> &[Break] {
        &self.breaks
    }

    fn check_label(&self, label: usize) -> Result<()> {
        if label == 0 || label > self.labels.len() {
            return Err(Error::InvalidInput(format!(
                "branch label {label} out of range 1..={}",
                self.labels.len()
            )));
        }
        Ok(())
    }

    /// `k_label(v)`.
    pub fn eval(&self, label: usize, v: f64) -> Result<f64> {
        self.check_label(label)?;
        let mut vals = branch_values(&self.model, v)?;
        vals.swap_remove(label - 1)
    }

    /// All branch values at `v`, indexed by `label - 1`.
    pub fn eval_all(&self, v: f64) -> Result<Vec<Result<f64>>> {
        branch_values(&self.model, v)
    }

    pub fn derivative(&self, label: usize, v: f64) -> Result<f64> {
        branch_derivative(self, label, v)
    }

    /// The branch passing through `(U, V)` of the steady state.
    pub fn label_through(&self, steady: &SteadyState) -> Result<usize> {
        let vals = self.eval_all(steady.v_bar)?;
        let tol = 1e-8 * (1.0 + steady.u_bar.abs());
        vals.iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().ok().map(|u| (i + 1, (u - steady.u_bar).abs())))
            .filter(|&(_, d)| d <= tol)
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(l, _)| l)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no branch passes through steady state {} at ({}, {})",
                    steady.label, steady.u_bar, steady.v_bar
                ))
            })
    }

    /// Distance from `v` to the nearest break affecting any of `labels`.
    pub fn break_distance(&self, v: f64, labels: &[usize]) -> f64 {
        self.breaks
            .iter()
            .filter(|b| b.labels.iter().any(|l| labels.contains(l)))
            .map(|b| (b.v - v).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Interval in which Newton iterates for `V` are trusted: half the
    /// distance from `v_bar` to the nearest break of a used branch, clipped to
    /// the window.
    pub fn trust_interval(&self, v_bar: f64, labels: &[usize]) -> (f64, f64) {
        let w = 0.5 * self.break_distance(v_bar, labels);
        ((v_bar - w).max(self.v_lo), (v_bar + w).min(self.v_hi))
    }
}

/// `k'(V) = -f_v / f_u` at `(k(V), V)`.
pub fn branch_derivative(set: &BranchSet, label: usize, v: f64) -> Result<f64> {
    let u = set.eval(label, v)?;
    let j = set.model.jacobian(u, v)?;
    if j.fu.abs() < 1e-12 {
        return Err(Error::Fold {
            location: v,
            detail: format!("f_u = {:.3e} vanishes on branch k{label}", j.fu),
        });
    }
    Ok(-j.fv / j.fu)
}
