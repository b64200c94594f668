//! Flat JSON experiment configuration.
//!
//! Every key except `family`, `alpha` and `beta` has a default. Unknown keys
//! are rejected so that typos fail loudly instead of running defaults.

use std::path::{Path, PathBuf};

use discstat::grid::{generate_ey_mask, pnm};
use discstat::kinetics::{branches, find_steady};
use discstat::simulate::{Stepper, DEFAULT_SEED};
use discstat::stationary::{oregonator_certificate, Construction, DEFAULT_TOL};
use discstat::{BranchSet, DomainPartition, Family, Grid, KineticModel, SteadyState};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Half-width of the default predator-prey window around `V_bar`.
const PP_WINDOW_HALF: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionSource {
    /// No partition: commands work on the constant state.
    #[default]
    None,
    /// Region 2 is `[lo, hi)` in `x`; key `stripe`.
    Stripe,
    /// Region 2 is a centered stripe of measure `fraction`.
    CenteredStripe,
    /// Region 2 is the letters "EY" with measure `fraction`.
    Ey,
    /// Regions read from a PBM/PGM file; key `mask`.
    Mask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "one")]
    pub steady_label: usize,
    /// `[lo, hi]` window in `V` for the branches. Defaults exist for the
    /// Oregonator (scan window) and predator-prey (`V_bar +- 0.2`).
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub ny: Option<usize>,
    #[serde(default = "unit")]
    pub gamma: f64,
    #[serde(default)]
    pub partition: PartitionSource,
    #[serde(default)]
    pub stripe: Option<[f64; 2]>,
    #[serde(default)]
    pub fraction: Option<f64>,
    #[serde(default)]
    pub mask: Option<PathBuf>,
    /// Branch label per region; defaults to the branch through the steady
    /// state followed by the next label.
    #[serde(default)]
    pub region_branches: Option<Vec<usize>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_eigen_count")]
    pub eigen_count: usize,
    #[serde(default)]
    pub secondary_labels: Option<Vec<usize>>,
    /// Sample count per branch for `branches`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "one")]
    pub mode: usize,
    #[serde(default)]
    pub amplitudes: Option<Vec<f64>>,
    /// Time step; chosen from the stability bounds when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_stepper")]
    pub stepper: Stepper,
    /// Perturbation size for `simulate` and `decay`.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn default_n() -> usize {
    200
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_eigen_count() -> usize {
    5
}
fn default_samples() -> usize {
    200
}
fn default_t_end() -> f64 {
    10.0
}
fn default_stride() -> usize {
    1000
}
fn default_safety() -> f64 {
    0.9
}
fn default_stepper() -> Stepper {
    Stepper::ExplicitEuler
}
fn default_amplitude() -> f64 {
    1e-2
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn model(&self) -> Result<KineticModel, CliError> {
        Ok(KineticModel::new(self.family, self.alpha, self.beta)?)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        if self.dim == 1 && self.ny.is_some() {
            return Err(bad("ny is only meaningful for dim = 2"));
        }
        Ok(Grid::new(self.dim, self.n, self.ny)?)
    }

    pub fn steady(&self, model: &KineticModel) -> Result<SteadyState, CliError> {
        Ok(find_steady(model, self.steady_label)?)
    }

    /// Explicit window, else the family default, else `None`.
    pub fn resolve_window(&self, model: &KineticModel, steady: &SteadyState) -> Option<(f64, f64)> {
        if let Some([lo, hi]) = self.window {
            return Some((lo, hi));
        }
        match model.family() {
            Family::PredatorPrey => Some((steady.v_bar - PP_WINDOW_HALF, steady.v_bar + PP_WINDOW_HALF)),
            Family::Oregonator => oregonator_certificate(model.alpha(), model.beta()).map(|c| c.window),
            _ => None,
        }
    }

    pub fn branch_set(&self, model: &KineticModel, steady: &SteadyState) -> Result<BranchSet, CliError> {
        let window = self
            .resolve_window(model, steady)
            .ok_or_else(|| bad(format!("`window` is required for {}", model.family().name())))?;
        Ok(branches(model, steady, window)?)
    }

    pub fn has_partition(&self) -> bool {
        self.partition != PartitionSource::None
    }

    fn fraction(&self) -> Result<f64, CliError> {
        self.fraction
            .ok_or_else(|| bad("`fraction` is required for this partition"))
    }

    /// Builds the partition; a missing mask file is a config error.
    pub fn partition(&self, grid: Grid) -> Result<DomainPartition, CliError> {
        match self.partition {
            PartitionSource::None => Err(bad("this command needs a `partition`")),
            PartitionSource::Stripe => {
                let [lo, hi] = self.stripe.ok_or_else(|| bad("`stripe` = [lo, hi] is required"))?;
                Ok(DomainPartition::stripe(grid, lo, hi)?)
            }
            PartitionSource::CenteredStripe => Ok(DomainPartition::centered_stripe(grid, self.fraction()?)?),
            PartitionSource::Ey => Ok(generate_ey_mask(&grid, self.fraction()?)?),
            PartitionSource::Mask => {
                let path = self.mask.as_ref().ok_or_else(|| bad("`mask` path is required"))?;
                if !path.is_file() {
                    return Err(bad(format!("mask file {} not found", path.display())));
                }
                Ok(pnm::load_mask(&grid, path, None)?)
            }
        }
    }

    pub fn region_branches(&self, set: &BranchSet, steady: &SteadyState, regions: usize) -> Result<Vec<usize>, CliError> {
        if let Some(r) = &self.region_branches {
            return Ok(r.clone());
        }
        let home = set.label_through(steady)?;
        let others: Vec<usize> = set.labels().iter().copied().filter(|&l| l != home).collect();
        if regions > 1 && others.is_empty() {
            return Err(bad("no second branch on the window; set `region_branches`"));
        }
        Ok(std::iter::once(home).chain(others.into_iter().cycle().take(regions - 1)).collect())
    }

    /// Partition, branches and labels assembled into a solvable problem.
    pub fn construction(&self, model: &KineticModel, steady: &SteadyState) -> Result<Construction, CliError> {
        let grid = self.grid()?;
        let partition = self.partition(grid)?;
        let set = self.branch_set(model, steady)?;
        let labels = self.region_branches(&set, steady, partition.region_count())?;
        Ok(Construction::new(set, *steady, partition, labels, self.gamma)?)
    }

    /// Labels audited as secondary branches: every region branch but the first.
    pub fn secondary_labels(&self, set: &BranchSet, steady: &SteadyState) -> Result<Vec<usize>, CliError> {
        if let Some(s) = &self.secondary_labels {
            return Ok(s.clone());
        }
        let home = set.label_through(steady)?;
        let r = self.region_branches(set, steady, 2)?;
        Ok(r.into_iter().filter(|&l| l != home).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults_and_round_trips() {
        let c = ExperimentConfig::from_json(r#"{"family": "brusselator", "alpha": 1, "beta": 2}"#).unwrap();
        assert_eq!((c.n, c.dim, c.gamma, c.seed), (200, 1, 1.0, DEFAULT_SEED));
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn awkward_decimals_survive() {
        let text = r#"{"family": "gray_scott", "alpha": 0.1, "beta": 0.30000000000000004, "gamma": 0.10132118364233778}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back.beta.to_bits(), 0.30000000000000004f64.to_bits());
        assert_eq!(back.gamma.to_bits(), c.gamma.to_bits());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"family": "brusselator", "alpha": 1, "beta": 2, "gama": 1}"#).is_err());
    }
}
