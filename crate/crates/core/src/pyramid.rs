//! Inductive descent: build a surface, chart it, re-express the cloud one
//! dimension down, repeat.
//!
//! Each level keeps the cloud it was handed plus the surface and chart built
//! on it; the final level is the re-expressed cloud itself and carries
//! neither.  Because a chart row is `(station, transverse offsets)` the
//! represented cloud of a training set is exactly collinear, so deeper levels
//! run on hyperplane-degenerate data by design and the fits stay flat.

use crate::chart::{build_chart, represent, Chart};
use crate::cloud::PointCloud;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::pipeline::build_surface;
use crate::surgery::Hypersurface;

#[derive(Debug, Clone)]
pub struct PyramidLevel {
    /// Ambient dimension of `cloud`.
    pub dim: usize,
    pub cloud: PointCloud,
    /// Surface built on `cloud`; `None` on the final level.
    pub surface: Option<Hypersurface>,
    /// Chart used to descend from this level; `None` on the final level.
    pub chart: Option<Chart>,
}

/// Levels ordered from the original dimension down to the target, inclusive.
#[derive(Debug, Clone)]
pub struct Pyramid {
    pub levels: Vec<PyramidLevel>,
}

impl Pyramid {
    pub fn base_dim(&self) -> usize {
        self.levels.first().map(|l| l.dim).unwrap_or(0)
    }

    pub fn target_dim(&self) -> usize {
        self.levels.last().map(|l| l.dim).unwrap_or(0)
    }
}

/// Descend from `cloud.dim()` to `target_dim`, one dimension per level.
///
/// Requires `1 <= target_dim < cloud.dim()`.  Every level that still has to
/// descend needs strictly more points than its dimension; otherwise the
/// induction stops with [`Error::LevelInfeasible`] naming the deepest
/// dimension that was reached.
pub fn induct(cloud: &PointCloud, target_dim: usize, cfg: &RunConfig) -> Result<Pyramid> {
    let d = cloud.dim();
    if target_dim < 1 || target_dim >= d {
        return Err(Error::InvalidConfig {
            detail: format!(
                "target dimension must satisfy 1 <= target < {d}, got {target_dim}"
            ),
        });
    }
    let mut levels: Vec<PyramidLevel> = Vec::with_capacity(d - target_dim + 1);
    let mut current = cloud.clone();
    for dim in (target_dim..=d).rev() {
        if dim == target_dim {
            levels.push(PyramidLevel { dim, cloud: current, surface: None, chart: None });
            break;
        }
        if current.len() <= dim {
            return Err(Error::LevelInfeasible { dim, n: current.len(), achieved: dim });
        }
        let build = build_surface(&current, cfg)?;
        let chart = build_chart(&build.surface, &build.plan)?;
        let next = represent(&current, &build.surface, &chart)?;
        levels.push(PyramidLevel {
            dim,
            cloud: current,
            surface: Some(build.surface),
            chart: Some(chart),
        });
        current = next;
    }
    Ok(Pyramid { levels })
}
