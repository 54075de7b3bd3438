//! End-to-end construction: fits, surgery, path, strips, assembly, checks.

use crate::cloud::PointCloud;
use crate::config::RunConfig;
use crate::error::Result;
use crate::knn::knn;
use crate::parallel;
use crate::path::{select_path_seeded, ConnectionPlan};
use crate::sphere::{osculating_sphere, SphereFit};
use crate::surgery::{assemble, closing_strip, connect_cylinder, cut_cap, HyperCap, Hypersurface};
use crate::verify::{verify_surface, PropertyReport};

/// A fully assembled surface together with the plan that produced it and the
/// verification verdict.
#[derive(Debug, Clone)]
pub struct SurfaceBuild {
    pub surface: Hypersurface,
    pub plan: ConnectionPlan,
    pub report: PropertyReport,
    /// True when the first assembly failed injectivity and a reseeded path
    /// was built instead.
    pub retried: bool,
}

fn fit_all(cloud: &PointCloud, epsilon: f64) -> Result<Vec<SphereFit>> {
    let graph = knn(cloud)?;
    parallel::map_indexed(cloud.len(), |i| {
        let neighbors: Vec<_> =
            graph.neighbors(i).iter().map(|&j| cloud.point(j).clone()).collect();
        osculating_sphere(cloud.point(i), &neighbors, epsilon)
    })
    .into_iter()
    .collect()
}

fn attempt(
    cloud: &PointCloud,
    cfg: &RunConfig,
    seed: u64,
) -> Result<(Hypersurface, ConnectionPlan, PropertyReport)> {
    let fits = fit_all(cloud, cfg.epsilon)?;
    let caps: Vec<HyperCap> = fits
        .iter()
        .enumerate()
        .map(|(i, fit)| cut_cap(fit, cfg.delta, i))
        .collect::<Result<_>>()?;
    let plan = select_path_seeded(cloud, cfg.closure, seed, cfg.path_move_budget)?;
    let cylinders = plan
        .edges()
        .map(|(i, j)| connect_cylinder(&caps[i], &caps[j]))
        .collect::<Result<Vec<_>>>()?;
    let strips = closing_strip(&plan, &caps, cfg)?;
    let surface = assemble(caps, cylinders, strips, &plan, cfg)?;
    let report = verify_surface(&surface)?;
    Ok((surface, plan, report))
}

/// Build, verify, and — if the mesh self-intersects — rebuild once with a
/// reseeded path before giving up.
///
/// The retry keeps every parameter except the path seed; a different visit
/// order is usually enough to untangle a crossing.  If the retry itself
/// errors out, the original (non-injective) build is returned so the caller
/// still gets a full report.
pub fn build_surface(cloud: &PointCloud, cfg: &RunConfig) -> Result<SurfaceBuild> {
    let (surface, plan, report) = attempt(cloud, cfg, cfg.seed)?;
    if report.injective == Some(false) {
        if let Ok((surface, plan, report)) = attempt(cloud, cfg, cfg.seed.wrapping_add(1)) {
            return Ok(SurfaceBuild { surface, plan, report, retried: true });
        }
    }
    Ok(SurfaceBuild { surface, plan, report, retried: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Closure;
    use crate::error::Error;
    use crate::surgery::StripKind;

    fn cfg(closure: Closure) -> RunConfig {
        RunConfig {
            epsilon: 1e-2,
            delta: 1e-3,
            closure,
            mesh_resolution: 16,
            ..RunConfig::default()
        }
    }

    fn octagon() -> PointCloud {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 8.0;
                vec![2.0 * t.cos(), 2.0 * t.sin()]
            })
            .collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    fn sphere_cloud(n: usize) -> PointCloud {
        let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let t = std::f64::consts::TAU * (i as f64 / golden).fract();
                vec![r * t.cos(), r * t.sin(), z]
            })
            .collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    #[test]
    fn octagon_loop_build_is_clean() {
        let cloud = octagon();
        let build = build_surface(&cloud, &cfg(Closure::Loop)).unwrap();
        assert!(!build.retried);
        assert_eq!(build.plan.order.len(), 8);
        assert_eq!(build.surface.caps.len(), 8);
        assert_eq!(build.surface.cylinders.len(), 7);
        assert_eq!(build.surface.strips.len(), 1);
        assert_eq!(build.surface.strips[0].kind, StripKind::ClosingLoop);
        let report = &build.report;
        assert_eq!(report.local_dimension, 1);
        assert_eq!(report.injective, Some(true));
        assert_eq!(report.has_boundary, Some(true));
        assert!(report.bounded);
        assert_eq!(report.compact, Some(false));
    }

    #[test]
    fn arc_infinity_build_has_two_strips() {
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let t = 0.25 * i as f64;
                vec![t, 0.1 * t * t]
            })
            .collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let build = build_surface(&cloud, &cfg(Closure::Infinity)).unwrap();
        assert_eq!(build.surface.strips.len(), 2);
        assert!(build.surface.strips.iter().all(|s| s.kind == StripKind::ToInfinity));
        assert!(build.plan.infinity_direction.is_some());
        assert!(!build.report.bounded);
        assert_eq!(build.report.compact, Some(false));
    }

    #[test]
    fn spatial_loop_build_produces_triangles() {
        let cloud = sphere_cloud(8);
        let build = build_surface(&cloud, &cfg(Closure::Loop)).unwrap();
        assert_eq!(build.report.local_dimension, 2);
        assert!(build.surface.mesh.is_present());
        assert_eq!(build.report.injective, Some(true));
        assert_eq!(build.report.orientable, Some(true));
    }

    #[test]
    fn tetrahedron_loop_build_is_orientable() {
        // Four caps close a cycle of odd gluing parity, which the strip
        // builder must compensate; a regression here reports a one-sided mesh.
        let cloud = PointCloud::from_rows(&[
            vec![1.0, 1.0, 1.0],
            vec![1.0, -1.0, -1.0],
            vec![-1.0, 1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ])
        .unwrap();
        let build = build_surface(&cloud, &cfg(Closure::Loop)).unwrap();
        assert_eq!(build.surface.caps.len(), 4);
        assert_eq!(build.report.orientable, Some(true));
        assert_eq!(build.report.injective, Some(true));
        assert!(build.report.violations.is_empty());
    }

    #[test]
    fn too_small_cloud_is_rejected() {
        let cloud = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let err = build_surface(&cloud, &cfg(Closure::Loop)).unwrap_err();
        assert!(matches!(err, Error::TooFewPoints { n: 2, dim: 2 }));
    }

    #[test]
    fn coincident_points_fail_the_fit_stage() {
        let cloud = PointCloud::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let err = build_surface(&cloud, &cfg(Closure::Loop)).unwrap_err();
        assert!(matches!(err, Error::CoincidentPoints { .. }));
    }
}
