//! Curvature profiles and the structure / linearity diagnostics built on them.
//!
//! The profile records, for every point that admits a fit, the normalized
//! osculating radius `radius(eps) / eps` together with the local neighbor
//! scale.  Both downstream diagnostics reduce that table: `structure_score`
//! compares radii against neighbor spacing to separate coherent samples from
//! noise, and `linearity_detect` looks for the degenerate regime where almost
//! every fit is a hyperplane.

use nalgebra::DVector;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::knn::{knn, knn_seq, KnnGraph};
use crate::linalg::{least_variance_direction, project_out};
use crate::parallel;
use crate::sphere::{osculating_sphere, GeneralizedSphere, SphereFit};

/// One row of a radius profile.
#[derive(Debug, Clone)]
pub struct ProfileEntry {
    /// Index of the apex in the original cloud.
    pub index: usize,
    /// `radius(eps) / eps`; `f64::INFINITY` when the fit degenerated to a
    /// hyperplane.
    pub normalized_radius: f64,
    /// Reciprocal of `normalized_radius`; zero for hyperplane fits.
    pub curvature: f64,
    /// Mean distance from the apex to its `d` nearest neighbors, before
    /// contraction.
    pub neighbor_scale: f64,
}

impl ProfileEntry {
    pub fn is_flat(&self) -> bool {
        self.normalized_radius.is_infinite()
    }
}

/// Radius profile of a cloud: successful fits plus the points that failed.
///
/// A failed fit (coincident neighbors, for instance) removes that point from
/// `entries` but never aborts the whole profile.
#[derive(Debug, Clone)]
pub struct RadiusProfile {
    pub entries: Vec<ProfileEntry>,
    /// `(point index, reason)` for every fit that could not be produced.
    pub failures: Vec<(usize, String)>,
}

impl RadiusProfile {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn profile_rows(
    cloud: &PointCloud,
    graph: &KnnGraph,
    epsilon: f64,
    i: usize,
) -> std::result::Result<ProfileEntry, (usize, String)> {
    let apex = cloud.point(i);
    let row = graph.neighbors(i);
    let neighbors: Vec<DVector<f64>> = row.iter().map(|&j| cloud.point(j).clone()).collect();
    let neighbor_scale =
        row.iter().map(|&j| (cloud.point(j) - apex).norm()).sum::<f64>() / row.len() as f64;
    match osculating_sphere(apex, &neighbors, epsilon) {
        Ok(fit) => Ok(entry_from_fit(i, &fit, neighbor_scale)),
        Err(e) => Err((i, e.to_string())),
    }
}

fn entry_from_fit(index: usize, fit: &SphereFit, neighbor_scale: f64) -> ProfileEntry {
    let normalized_radius = fit.normalized_radius().unwrap_or(f64::INFINITY);
    let curvature = if normalized_radius.is_finite() {
        1.0 / normalized_radius
    } else {
        0.0
    };
    ProfileEntry {
        index,
        normalized_radius,
        curvature,
        neighbor_scale,
    }
}

fn collect_profile(
    rows: Vec<std::result::Result<ProfileEntry, (usize, String)>>,
) -> RadiusProfile {
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for row in rows {
        match row {
            Ok(entry) => entries.push(entry),
            Err(failure) => failures.push(failure),
        }
    }
    RadiusProfile { entries, failures }
}

/// Fit an osculating sphere at every point and tabulate the radii.
///
/// Requires `n > d` so that every point has `d` neighbors to fit against.
pub fn radius_profile(cloud: &PointCloud, epsilon: f64) -> Result<RadiusProfile> {
    let graph = knn(cloud)?;
    let rows = parallel::map_indexed(cloud.len(), |i| profile_rows(cloud, &graph, epsilon, i));
    Ok(collect_profile(rows))
}

/// Sequential twin of [`radius_profile`]; used by the benchmarks.
pub fn radius_profile_seq(cloud: &PointCloud, epsilon: f64) -> Result<RadiusProfile> {
    let graph = knn_seq(cloud)?;
    let rows = parallel::map_indexed_seq(cloud.len(), |i| profile_rows(cloud, &graph, epsilon, i));
    Ok(collect_profile(rows))
}

/// Verdict of [`structure_score`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureLabel {
    Structured,
    NoiseLike,
}

impl StructureLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StructureLabel::Structured => "structured",
            StructureLabel::NoiseLike => "noise-like",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StructureAssessment {
    /// Median of `min(1, normalized_radius / neighbor_scale)` over the profile.
    pub score: f64,
    pub label: StructureLabel,
}

/// Score how coherent the cloud looks at its own sampling scale.
///
/// Osculating radii comparable to (or larger than) the neighbor spacing mean
/// the local geometry is resolved; radii much smaller than the spacing are
/// the signature of noise.  Each entry contributes
/// `min(1, normalized_radius / neighbor_scale)` — hyperplane fits count as 1 —
/// and the score is the median.  The label is `NoiseLike` iff
/// `score < noise_threshold`.
pub fn structure_score(
    profile: &RadiusProfile,
    noise_threshold: f64,
) -> Result<StructureAssessment> {
    if profile.entries.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let mut ratios: Vec<f64> = profile
        .entries
        .iter()
        .map(|e| (e.normalized_radius / e.neighbor_scale).min(1.0))
        .collect();
    ratios.sort_by(f64::total_cmp);
    let m = ratios.len();
    let score = if m % 2 == 1 {
        ratios[m / 2]
    } else {
        0.5 * (ratios[m / 2 - 1] + ratios[m / 2])
    };
    let label = if score < noise_threshold {
        StructureLabel::NoiseLike
    } else {
        StructureLabel::Structured
    };
    Ok(StructureAssessment { score, label })
}

/// Result of [`linearity_detect`].
#[derive(Debug, Clone)]
pub struct LinearityReport {
    pub is_linear: bool,
    /// Fraction of profile entries that are flat or nearly so.
    pub flat_fraction: f64,
    /// Fitted hyperplane, present when `is_linear`.
    pub hyperplane: Option<GeneralizedSphere>,
    /// Largest distance from any cloud point to the fitted hyperplane.
    pub residual: Option<f64>,
}

fn nearly_flat(entry: &ProfileEntry) -> bool {
    entry.is_flat() || entry.normalized_radius > 1e6 * entry.neighbor_scale
}

/// Decide whether the cloud is a hyperplane sample in disguise.
///
/// An entry counts as flat when its fit degenerated outright or its radius
/// exceeds `1e6 *` the local neighbor scale; `is_linear` iff the flat
/// fraction reaches `flat_fraction_threshold`.  When it does, a handful of
/// flat apexes is enough to pin the hyperplane: a greedy affinely independent
/// subset of `d` of them fixes the normal, and every cloud point then
/// validates the fit, reporting the worst distance as `residual`.
pub fn linearity_detect(
    cloud: &PointCloud,
    profile: &RadiusProfile,
    flat_fraction_threshold: f64,
) -> Result<LinearityReport> {
    if profile.entries.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let flat: Vec<usize> = profile
        .entries
        .iter()
        .filter(|e| nearly_flat(e))
        .map(|e| e.index)
        .collect();
    let flat_fraction = flat.len() as f64 / profile.entries.len() as f64;
    if flat_fraction < flat_fraction_threshold || flat.is_empty() {
        return Ok(LinearityReport {
            is_linear: false,
            flat_fraction,
            hyperplane: None,
            residual: None,
        });
    }

    let d = cloud.dim();
    let scale = spread_scale(cloud).max(1.0);
    let base = cloud.point(flat[0]);
    let mut subset = vec![flat[0]];
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for &i in &flat[1..] {
        if subset.len() == d {
            break;
        }
        let mut v = cloud.point(i) - base;
        project_out(&mut v, &ortho);
        if v.norm() > 1e-9 * scale {
            ortho.push(v.normalize());
            subset.push(i);
        }
    }
    let support: Vec<DVector<f64>> = if subset.len() == d {
        subset.iter().map(|&i| cloud.point(i).clone()).collect()
    } else {
        // Not enough independent flat apexes for a minimal subset (the flat
        // set itself is degenerate); fall back to all of them.
        flat.iter().map(|&i| cloud.point(i).clone()).collect()
    };
    let normal = least_variance_direction(&support);
    let centroid = support.iter().sum::<DVector<f64>>() / support.len() as f64;
    let offset = normal.dot(&centroid);
    let residual = (0..cloud.len())
        .map(|i| (normal.dot(cloud.point(i)) - offset).abs())
        .fold(0.0_f64, f64::max);
    Ok(LinearityReport {
        is_linear: true,
        flat_fraction,
        hyperplane: Some(GeneralizedSphere::Flat {
            normal,
            offset,
            apex: base.clone(),
        }),
        residual: Some(residual),
    })
}

fn spread_scale(cloud: &PointCloud) -> f64 {
    let centroid = (0..cloud.len()).map(|i| cloud.point(i)).sum::<DVector<f64>>() / cloud.len() as f64;
    (0..cloud.len())
        .map(|i| (cloud.point(i) - &centroid).norm())
        .fold(0.0_f64, f64::max)
}
