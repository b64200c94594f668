use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("fold at V = {location:.12e}: {detail}")]
    Fold { location: f64, detail: String },

    #[error("branch window violation: V = {value:.12e} at cell {cell} left the trust interval [{lo:.12e}, {hi:.12e}]")]
    WindowViolation {
        cell: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("resonance: gamma*mu_{mode} = {gamma_mu:.12e} is within {margin:.3e} of det/a0 = {ratio:.12e}")]
    Resonance {
        mode: usize,
        gamma_mu: f64,
        ratio: f64,
        margin: f64,
    },

    #[error("newton did not converge after {iterations} iterations (last residual {residual:.6e}): {reason}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        reason: String,
    },

    #[error("no nonconstant solution found at this d_ell = {d_ell} (amplitude {amplitude:.3e})")]
    Collapse { d_ell: f64, amplitude: f64 },

    #[error("arnoldi did not certify {requested} eigenpairs; worst residual {worst_residual:.3e}")]
    Arnoldi {
        requested: usize,
        worst_residual: f64,
    },

    #[error("blow-up at step {step} (t = {time:.6e})")]
    BlowUp { step: usize, time: f64 },

    #[error("CFL violation: dt = {dt:.6e} exceeds bound {bound:.6e} ({kind})")]
    Cfl {
        dt: f64,
        bound: f64,
        kind: &'static str,
    },

    #[error("mask: {0}")]
    Mask(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
