//! Linearized operators around stationary fields, their rightmost spectra,
//! and signed audits of the stability hypotheses.

mod audit;
mod linearization;
mod spectrum;

pub use audit::{
    audit_assumptions, autocatalysis_check, classify_coefficients, classify_regular, AssumptionAudit, AuditRequest,
    Autocatalysis, Check, RegDetCheck, RegularClass, RegularVerdict, SecBranchCheck, DEGENERATE_TOL, SIGN_TOL,
};
pub use linearization::{assemble_linearization, Linearization};
pub use spectrum::{
    full_spectrum, rightmost_spectrum, rightmost_spectrum_with, SpectrumMethod, SpectrumReport, Verdict,
    CERTIFY_TOL, DENSE_LIMIT, VERDICT_MARGIN,
};
