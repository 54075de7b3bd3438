//! Run configuration shared by the library pipeline and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the two ends of the neighbor path are closed off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    /// One strip joins the two boundary caps, producing a single closed band.
    #[default]
    Loop,
    /// Two strips run outward along a common direction and are truncated at a
    /// fixed multiple of the cloud's bounding radius.
    Infinity,
}

impl std::str::FromStr for Closure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "loop" => Ok(Closure::Loop),
            "infinity" => Ok(Closure::Infinity),
            other => Err(Error::InvalidConfig {
                detail: format!("unknown closure mode `{other}` (expected `loop` or `infinity`)"),
            }),
        }
    }
}

/// Parameters controlling fitting, surgery, assembly, and verification.
///
/// `delta` is clamped to `epsilon` during validation: a cap cannot extend
/// past the contracted neighborhood that produced its sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Contraction factor applied to neighbor offsets before fitting.
    pub epsilon: f64,
    /// Chord radius of the cap kept around each apex after surgery.
    pub delta: f64,
    /// End-closure mode for assembly.
    pub closure: Closure,
    /// Samples along a full cap arc; cylinder rings use half this, floored at 8.
    pub mesh_resolution: usize,
    /// Cap on accepted path-improvement moves; `None` means `10 * n^2`.
    pub path_move_budget: Option<usize>,
    /// Strip legs in infinity closure extend this multiple of the bounding
    /// radius beyond the cloud before truncation.
    pub strip_truncation_factor: f64,
    /// Seed for tie-breaking perturbations and the injectivity retry.
    pub seed: u64,
    /// Structure scores at or below this are reported as noise-dominated.
    pub noise_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            delta: 1e-4,
            closure: Closure::Loop,
            mesh_resolution: 32,
            path_move_budget: None,
            strip_truncation_factor: 10.0,
            seed: 0,
            noise_threshold: 0.5,
        }
    }
}

impl RunConfig {
    /// Check ranges and clamp `delta` into `(0, epsilon]`.
    pub fn validated(mut self) -> Result<Self> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 || self.epsilon >= 1.0 {
            return Err(Error::EpsilonOutOfRange(self.epsilon));
        }
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(Error::InvalidConfig {
                detail: format!("delta must be positive and finite, got {}", self.delta),
            });
        }
        if self.delta > self.epsilon {
            self.delta = self.epsilon;
        }
        if self.mesh_resolution < 8 {
            return Err(Error::InvalidConfig {
                detail: format!("mesh_resolution must be at least 8, got {}", self.mesh_resolution),
            });
        }
        if !self.strip_truncation_factor.is_finite() || self.strip_truncation_factor < 1.0 {
            return Err(Error::InvalidConfig {
                detail: format!(
                    "strip_truncation_factor must be >= 1, got {}",
                    self.strip_truncation_factor
                ),
            });
        }
        if !(0.0..=1.0).contains(&self.noise_threshold) {
            return Err(Error::InvalidConfig {
                detail: format!("noise_threshold must lie in [0, 1], got {}", self.noise_threshold),
            });
        }
        Ok(self)
    }

    /// Effective move budget for a cloud of `n` points.
    pub fn move_budget(&self, n: usize) -> usize {
        self.path_move_budget.unwrap_or(10 * n * n)
    }
}
