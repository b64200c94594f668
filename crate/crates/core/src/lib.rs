//! Stationary solutions of reaction-diffusion-ODE systems
//!
//! ```text
//! u_t = f(u, v)                 in the closed domain
//! v_t = gamma Lap(v) + g(u, v)  with no-flux boundary
//! ```
//!
//! on the unit interval and the unit square, for the Gray-Scott,
//! Brusselator, Oregonator and predator-prey kinetics.

// `!(x > 0.0)` style guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod io;
pub mod kinetics;
pub mod linalg;
pub mod simulate;
pub mod stability;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::{DomainPartition, EigenKind, Grid, NeumannLaplacian};
pub use kinetics::{BranchSet, Family, Jacobian, KineticModel, SteadyState};
pub use simulate::{SimulationConfig, State, Trajectory};
pub use stationary::StationaryField;
