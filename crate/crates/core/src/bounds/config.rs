use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::fixtures::PANTS_VARIANTS;
use crate::moebius::OptimizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Campaign settings. Read from a flat `key = value` TOML file; missing
/// keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Random conformal annuli for the topological and supercritical checks.
    pub random_annuli: usize,
    /// Cells around each random annulus; cells along `t` follow from the
    /// modulus so that cells are roughly square.
    pub annulus_n_theta: usize,
    /// Pair-of-pants fixtures (at most five).
    pub pants_fixtures: usize,
    pub torus_fixture: bool,
    /// Radial ring counts of the unit-disk refinement sequence.
    pub disk_levels: Vec<usize>,
    pub disk_n_theta: usize,
    pub catenoid: bool,
    pub catenoid_n_t: usize,
    pub catenoid_n_theta: usize,
    /// Random star-shaped annuli in the ball for the conformal volume chain.
    pub embedded_annuli: usize,
    pub embedded_n_t: usize,
    pub embedded_n_theta: usize,
    /// Slack for comparisons between closed forms.
    pub closed_form_tol: f64,
    /// Relative slack for finite-element quantities at the configured
    /// resolution.
    pub fem_tol: f64,
    /// Relative slack for the exact discrete steps of the volume chain.
    pub chain_tol: f64,
    /// Threshold on each free boundary residual before the free boundary
    /// identities are checked.
    pub free_boundary_tol: f64,
    pub optimizer_starts: usize,
    pub optimizer_cap_eps: f64,
    pub optimizer_max_iterations: usize,
    pub optimizer_tolerance: f64,
    pub optimizer_random_restarts: usize,
    pub output: OutputFormat,
    pub out: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        Self {
            seed: 1,
            random_annuli: 200,
            annulus_n_theta: 48,
            pants_fixtures: PANTS_VARIANTS,
            torus_fixture: true,
            disk_levels: vec![6, 12, 24],
            disk_n_theta: 8,
            catenoid: true,
            catenoid_n_t: 16,
            catenoid_n_theta: 64,
            embedded_annuli: 3,
            embedded_n_t: 8,
            embedded_n_theta: 32,
            closed_form_tol: 1e-9,
            fem_tol: 2e-2,
            chain_tol: 1e-9,
            free_boundary_tol: 2e-2,
            optimizer_starts: opt.starts,
            optimizer_cap_eps: opt.cap_eps,
            optimizer_max_iterations: opt.max_iterations,
            optimizer_tolerance: opt.tolerance,
            optimizer_random_restarts: opt.random_restarts,
            output: OutputFormat::Json,
            out: None,
        }
    }
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.annulus_n_theta < 8 || self.disk_n_theta < 8 || self.catenoid_n_theta < 8 || self.embedded_n_theta < 8 {
            return bad("every n_theta must be at least 8".into());
        }
        if self.catenoid_n_t < 2 || self.embedded_n_t < 2 {
            return bad("every n_t must be at least 2".into());
        }
        if self.disk_levels.iter().any(|&n| n < 2) {
            return bad("disk levels must be at least 2".into());
        }
        if self.pants_fixtures > PANTS_VARIANTS {
            return bad(format!("at most {PANTS_VARIANTS} pants fixtures exist"));
        }
        for (name, v) in [
            ("closed_form_tol", self.closed_form_tol),
            ("fem_tol", self.fem_tol),
            ("chain_tol", self.chain_tol),
            ("free_boundary_tol", self.free_boundary_tol),
            ("optimizer_tolerance", self.optimizer_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.optimizer_cap_eps > 0.0 && self.optimizer_cap_eps < 1.0) {
            return bad(format!("optimizer_cap_eps must lie in (0, 1), got {}", self.optimizer_cap_eps));
        }
        if self.optimizer_starts == 0 {
            return bad("optimizer_starts must be at least 1".into());
        }
        Ok(())
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.optimizer_starts,
            cap_eps: self.optimizer_cap_eps,
            max_iterations: self.optimizer_max_iterations,
            tolerance: self.optimizer_tolerance,
            seed: self.seed,
            random_restarts: self.optimizer_random_restarts,
        }
    }
}
