//! Kinetics families, their analytic partial derivatives, constant steady
//! states and the nullcline branches `U = k(V)` of `f(U, V) = 0`.
//!
//! Each family is an ODE/PDE pair
//!
//! ```text
//! u_t = f(u, v)
//! v_t = gamma * Lap(v) + g(u, v)
//! ```
//!
//! with two positive rate constants `alpha` and `beta`.

mod branches;
mod roots;

pub use branches::{branch_derivative, branches, Break, BreakKind, BranchSet};
pub use roots::{bisect, monotone_cubic_roots};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Location of the maximum of `U^2 / (U^3 + 1)` on `U > 0`, i.e. `2^(1/3)`.
pub fn predator_prey_hump_u() -> f64 {
    2f64.cbrt()
}

/// Height of the hump, `U_m^2 / (U_m^3 + 1) = 2^(2/3) / 3`.
pub fn predator_prey_hump_v() -> f64 {
    let um = predator_prey_hump_u();
    um * um / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GrayScott,
    Brusselator,
    Oregonator,
    PredatorPrey,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::GrayScott => "gray_scott",
            Family::Brusselator => "brusselator",
            Family::Oregonator => "oregonator",
            Family::PredatorPrey => "predator_prey",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gray_scott" => Ok(Family::GrayScott),
            "brusselator" => Ok(Family::Brusselator),
            "oregonator" => Ok(Family::Oregonator),
            "predator_prey" => Ok(Family::PredatorPrey),
            other => Err(Error::InvalidInput(format!("unknown kinetics family `{other}`"))),
        }
    }
}

/// A kinetics pair `(f, g)` with its two rate constants.
///
/// Serializes as the flat record `{family, alpha, beta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct KineticModel {
    family: Family,
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    family: Family,
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawModel> for KineticModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        KineticModel::new(raw.family, raw.alpha, raw.beta)
    }
}

impl From<KineticModel> for RawModel {
    fn from(m: KineticModel) -> Self {
        RawModel {
            family: m.family,
            alpha: m.alpha,
            beta: m.beta,
        }
    }
}

/// The four partial derivatives of `(f, g)` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian {
    pub fu: f64,
    pub fv: f64,
    pub gu: f64,
    pub gv: f64,
}

impl Jacobian {
    pub fn det(&self) -> f64 {
        self.fu * self.gv - self.fv * self.gu
    }

    pub fn trace(&self) -> f64 {
        self.fu + self.gv
    }

    /// Sum of absolute entries, used as a local Lipschitz estimate.
    pub fn abs_sum(&self) -> f64 {
        self.fu.abs() + self.fv.abs() + self.gu.abs() + self.gv.abs()
    }
}

impl KineticModel {
    pub fn new(family: Family, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "rates must be positive and finite (alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(KineticModel { family, alpha, beta })
    }

    pub fn gray_scott(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::GrayScott, alpha, beta)
    }

    pub fn brusselator(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Brusselator, alpha, beta)
    }

    pub fn oregonator(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Oregonator, alpha, beta)
    }

    pub fn predator_prey(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::PredatorPrey, alpha, beta)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn check_domain(&self, u: f64) -> Result<()> {
        match self.family {
            Family::Oregonator if self.beta + u == 0.0 => Err(Error::Singular(format!(
                "oregonator kinetics undefined at u = -beta = {}",
                -self.beta
            ))),
            Family::PredatorPrey if u * u * u + 1.0 == 0.0 => Err(Error::Singular(
                "predator-prey kinetics undefined at u^3 = -1".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn f(&self, u: f64, v: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(self.f_unchecked(u, v))
    }

    pub fn g(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.g_unchecked(u, v))
    }

    /// `f` without the singular-point check. Returns a non-finite value at
    /// the excluded point.
    #[inline]
    pub fn f_unchecked(&self, u: f64, v: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        match self.family {
            Family::GrayScott => u * u * v - a * u,
            Family::Brusselator => a + u * u * v - (b + 1.0) * u,
            Family::Oregonator => u - u * u + a * v * (b - u) / (b + u),
            Family::PredatorPrey => u * (u * u / (u * u * u + 1.0) - v),
        }
    }

    #[inline]
    pub fn g_unchecked(&self, u: f64, v: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        match self.family {
            Family::GrayScott => -u * u * v + b * (1.0 - v),
            Family::Brusselator => b * u - u * u * v,
            Family::Oregonator => u - v,
            Family::PredatorPrey => v * (a * u - v - b),
        }
    }

    pub fn jacobian(&self, u: f64, v: f64) -> Result<Jacobian> {
        self.check_domain(u)?;
        Ok(self.jacobian_unchecked(u, v))
    }

    #[inline]
    pub fn jacobian_unchecked(&self, u: f64, v: f64) -> Jacobian {
        let (a, b) = (self.alpha, self.beta);
        match self.family {
            Family::GrayScott => Jacobian {
                fu: 2.0 * u * v - a,
                fv: u * u,
                gu: -2.0 * u * v,
                gv: -u * u - b,
            },
            Family::Brusselator => Jacobian {
                fu: 2.0 * u * v - (b + 1.0),
                fv: u * u,
                gu: b - 2.0 * u * v,
                gv: -u * u,
            },
            Family::Oregonator => {
                let s = b + u;
                Jacobian {
                    fu: 1.0 - 2.0 * u - 2.0 * a * b * v / (s * s),
                    fv: a * (b - u) / s,
                    gu: 1.0,
                    gv: -1.0,
                }
            }
            Family::PredatorPrey => {
                let q = u * u * u + 1.0;
                let hump = u * u / q;
                let dhump = (2.0 * u - u * u * u * u) / (q * q);
                Jacobian {
                    fu: hump - v + u * dhump,
                    fv: -u,
                    gu: a * v,
                    gv: a * u - 2.0 * v - b,
                }
            }
        }
    }

    /// Sets the Jacobian entries of a steady state from the analytic partials.
    pub fn steady_state(&self, label: usize, u_bar: f64, v_bar: f64) -> Result<SteadyState> {
        let j = self.jacobian(u_bar, v_bar)?;
        Ok(SteadyState {
            label,
            u_bar,
            v_bar,
            a0: j.fu,
            b0: j.fv,
            c0: j.gu,
            d0: j.gv,
        })
    }

    /// All constant solutions of `f = g = 0`, in the conventional labelling.
    pub fn constant_steady_states(&self) -> Vec<SteadyState> {
        let (a, b) = (self.alpha, self.beta);
        let mut states = Vec::new();
        let mut push = |label: usize, u: f64, v: f64| {
            if let Ok(s) = self.steady_state(label, u, v) {
                states.push(s);
            }
        };
        match self.family {
            Family::GrayScott => {
                push(1, 0.0, 1.0);
                let disc = 1.0 - 4.0 * a * a / b;
                if disc > 0.0 {
                    let r = disc.sqrt();
                    let v2 = 0.5 * (1.0 + r);
                    // Product of the roots is alpha^2/beta.
                    let v3 = a * a / (b * v2);
                    push(2, a / v2, v2);
                    push(3, a / v3, v3);
                }
            }
            Family::Brusselator => push(1, a, b / a),
            Family::Oregonator => {
                push(1, 0.0, 0.0);
                // U^2 + U (beta + alpha - 1) - beta (alpha + 1) = 0, real since c < 0.
                let p = b + a - 1.0;
                let c = -b * (a + 1.0);
                let r = (p * p - 4.0 * c).sqrt();
                let (u2, u3) = if p >= 0.0 {
                    let u3 = -0.5 * (p + r);
                    (c / u3, u3)
                } else {
                    let u2 = 0.5 * (-p + r);
                    (u2, c / u2)
                };
                push(2, u2, u2);
                push(3, u3, u3);
            }
            Family::PredatorPrey => {
                let mut positive = predator_prey_positive_states(a, b);
                // Largest root first; it is the one on the descending side of the hump.
                positive.sort_by(|x, y| y.total_cmp(x));
                if let Some(&u1) = positive.first() {
                    push(1, u1, a * u1 - b);
                }
                push(2, 0.0, 0.0);
                push(3, 0.0, -b);
                for (i, &u) in positive.iter().enumerate().skip(1) {
                    push(3 + i, u, a * u - b);
                }
            }
        }
        states
    }
}

/// Positive roots of `alpha U - beta - U^2/(U^3+1) = 0`.
fn predator_prey_positive_states(alpha: f64, beta: f64) -> Vec<f64> {
    let h = |u: f64| alpha * u - beta - u * u / (u * u * u + 1.0);
    // The hump is bounded by 2^(2/3)/3 < 1, so h > 0 beyond this point.
    let u_max = (beta + 1.0) / alpha + 1.0;
    let samples = 4000;
    let mut roots = Vec::new();
    let mut lo = 0.0;
    let mut h_lo = h(lo);
    for i in 1..=samples {
        let hi = u_max * i as f64 / samples as f64;
        let h_hi = h(hi);
        if h_hi == 0.0 {
            roots.push(hi);
        } else if h_lo != 0.0 && h_lo.signum() != h_hi.signum() {
            roots.push(bisect(h, lo, hi));
        }
        lo = hi;
        h_lo = h_hi;
    }
    roots
}

/// A constant solution of `f = g = 0` together with the Jacobian entries there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub label: usize,
    pub u_bar: f64,
    pub v_bar: f64,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub d0: f64,
}

impl SteadyState {
    pub fn det(&self) -> f64 {
        self.a0 * self.d0 - self.b0 * self.c0
    }

    pub fn trace(&self) -> f64 {
        self.a0 + self.d0
    }

    /// `det / a0`, the quantity compared against `gamma * mu_k`.
    pub fn det_over_a0(&self) -> Result<f64> {
        if self.a0.abs() <= 1e-12 {
            return Err(Error::Assumption(format!(
                "a0 = f_u(U, V) = {:.3e} vanishes at steady state {}",
                self.a0, self.label
            )));
        }
        Ok(self.det() / self.a0)
    }

    pub fn jacobian(&self) -> Jacobian {
        Jacobian {
            fu: self.a0,
            fv: self.b0,
            gu: self.c0,
            gv: self.d0,
        }
    }
}

pub fn find_steady(model: &KineticModel, label: usize) -> Result<SteadyState> {
    model
        .constant_steady_states()
        .into_iter()
        .find(|s| s.label == label)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "{} has no constant steady state with label {label}",
                model.family.name()
            ))
        })
}
