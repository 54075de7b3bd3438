//! Strip chart on an assembled hypersurface: per-apex orthonormal tangent
//! frames aligned along the path by minimal-rotation transport, plus the
//! cumulative arc-length of each apex along the surface. Together they give
//! the coordinates (arc-length, transverse offsets) used to re-embed a
//! d-dimensional cloud in d−1 dimensions.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::{ComponentRole, PolylineMesh, SurfaceMesh};
use crate::parallel;
use crate::path::ConnectionPlan;
use crate::sphere::GeneralizedSphere;
use crate::surgery::{HyperCap, Hypersurface};

/// Tangent frames and arc-length stations along the assembled path.
#[derive(Debug, Clone)]
pub struct Chart {
    pub dim: usize,
    /// Cloud indices in path order.
    pub order: Vec<usize>,
    /// Apex per path position.
    pub apexes: Vec<DVector<f64>>,
    /// Per path position: d−1 orthonormal tangent vectors at the apex.
    /// Entry 0 points along the path; the rest are transported from the
    /// previous cap by the minimal rotation between tangent hyperplanes.
    pub frames: Vec<Vec<DVector<f64>>>,
    /// Cumulative arc length of each apex along the surface.
    pub stations: Vec<f64>,
}

/// Geodesic length from the apex to an attachment point across one cap.
/// Exact arc in space, chord in higher dimensions (where the chord equals
/// the cap's cut depth), straight run on flat caps.
fn cap_leg(cap: &HyperCap, attach: &DVector<f64>) -> f64 {
    match &cap.sphere {
        GeneralizedSphere::Round { center, radius, .. } if cap.apex.len() == 3 => {
            let u = cap.axis();
            let v = attach - center;
            let vn = v.norm();
            if vn == 0.0 {
                return 0.0;
            }
            let polar = (u.dot(&v) / vn).clamp(-1.0, 1.0).acos();
            radius * polar
        }
        _ => (attach - &cap.apex).norm(),
    }
}

fn polyline_stations(
    mesh: &PolylineMesh,
    caps: &[HyperCap],
    order: &[usize],
) -> Result<Vec<f64>> {
    let n = order.len();
    let mut cap_comp: HashMap<usize, usize> = HashMap::new();
    let mut cyl_comp: HashMap<(usize, usize), usize> = HashMap::new();
    for (c, comp) in mesh.components.iter().enumerate() {
        match comp.role {
            ComponentRole::Cap { index } => {
                cap_comp.insert(index, c);
            }
            ComponentRole::Cylinder { i, j } => {
                cyl_comp.insert((i, j), c);
            }
            ComponentRole::Strip { .. } => {}
        }
    }
    // Walk each cap polyline split at its apex vertex.
    let half_lengths = |cloud: usize| -> Result<(f64, f64)> {
        let comp = &mesh.components[*cap_comp.get(&cloud).ok_or_else(|| {
            Error::ChartMismatch {
                detail: format!("mesh lacks the cap component for point {cloud}"),
            }
        })?];
        let apex = &caps[cloud].apex;
        let (ax, ay) = (apex[0], apex[1]);
        let mid = comp
            .points
            .iter()
            .position(|p| p.x == ax && p.y == ay)
            .ok_or_else(|| Error::ChartMismatch {
                detail: format!("cap {cloud} polyline does not pass through its apex"),
            })?;
        let mut first = 0.0;
        let mut second = 0.0;
        for (i, w) in comp.points.windows(2).enumerate() {
            let len = (w[1] - w[0]).norm();
            if i < mid {
                first += len;
            } else {
                second += len;
            }
        }
        Ok((first, second))
    };
    let mut stations = Vec::with_capacity(n);
    stations.push(0.0);
    for p in 0..n - 1 {
        let (i, j) = (order[p], order[p + 1]);
        let cyl = &mesh.components[*cyl_comp.get(&(i, j)).ok_or_else(|| {
            Error::ChartMismatch {
                detail: format!("mesh lacks the cylinder component {i}-{j}"),
            }
        })?];
        let (_, out_half) = half_lengths(i)?;
        let (in_half, _) = half_lengths(j)?;
        let leg = out_half + cyl.length() + in_half;
        stations.push(stations[p] + leg);
    }
    Ok(stations)
}

/// Build the chart for an assembled surface and the plan it came from.
pub fn build_chart(surface: &Hypersurface, plan: &ConnectionPlan) -> Result<Chart> {
    if surface.order != plan.order {
        return Err(Error::ChartMismatch {
            detail: "surface and plan disagree on the traversal order".into(),
        });
    }
    let order = plan.order.clone();
    let n = order.len();
    let dim = surface.dim();
    let caps = &surface.caps;
    let apexes: Vec<DVector<f64>> = order.iter().map(|&c| caps[c].apex.clone()).collect();

    let scale = apexes
        .iter()
        .map(|a| a.norm())
        .fold(1.0_f64, f64::max);
    for p in 0..n - 1 {
        if (&apexes[p + 1] - &apexes[p]).norm() <= 1e-14 * scale {
            return Err(Error::DegeneratePath {
                i: order[p],
                j: order[p + 1],
            });
        }
    }

    let mut frames: Vec<Vec<DVector<f64>>> = Vec::with_capacity(n);
    let mut prev_normal: Option<DVector<f64>> = None;
    for p in 0..n {
        let cap = &caps[order[p]];
        let mut nu = cap.axis();
        if let Some(pn) = &prev_normal {
            // Keep consecutive normals in the same half-space so the
            // aligning rotation is the small one.
            if nu.dot(pn) < 0.0 {
                nu = -nu;
            }
        }
        let dir_raw = if p + 1 < n {
            &apexes[p + 1] - &apexes[p]
        } else {
            &apexes[p] - &apexes[p - 1]
        };
        let mut axis0 = dir_raw.clone();
        linalg::project_out(&mut axis0, std::slice::from_ref(&nu));
        let n0 = axis0.norm();
        let axis0 = if n0 > 1e-12 * dir_raw.norm() {
            axis0 / n0
        } else {
            // Path direction is normal to the cap; any tangent direction
            // serves, chosen deterministically.
            linalg::complete_basis(std::slice::from_ref(&nu), dim)[1].clone()
        };

        let mut frame = vec![axis0];
        if let Some(pn) = &prev_normal {
            let prev = frames.last().unwrap();
            for axis in prev.iter().skip(1) {
                let mut t = linalg::rotate_align(pn, &nu, axis);
                let mut fixed = vec![nu.clone()];
                fixed.extend(frame.iter().cloned());
                linalg::project_out(&mut t, &fixed);
                let tn = t.norm();
                if tn > 1e-8 {
                    frame.push(t / tn);
                }
            }
        }
        if frame.len() < dim - 1 {
            let mut fixed = vec![nu.clone()];
            fixed.extend(frame.iter().cloned());
            let full = linalg::complete_basis(&fixed, dim);
            frame.extend(full[fixed.len()..].iter().cloned());
        }
        debug_assert_eq!(frame.len(), dim - 1);
        frames.push(frame);
        prev_normal = Some(nu);
    }

    let stations = match &surface.mesh {
        SurfaceMesh::Polyline(m) => polyline_stations(m, caps, &order)?,
        _ => {
            let mut stations = Vec::with_capacity(n);
            stations.push(0.0);
            for p in 0..n - 1 {
                let cyl = &surface.cylinders[p];
                let leg = cap_leg(&caps[order[p]], &cyl.rim_point_i)
                    + (&cyl.rim_point_j - &cyl.rim_point_i).norm()
                    + cap_leg(&caps[order[p + 1]], &cyl.rim_point_j);
                stations.push(stations[p] + leg);
            }
            stations
        }
    };

    Ok(Chart {
        dim,
        order,
        apexes,
        frames,
        stations,
    })
}

/// Re-embed a cloud through the chart: each point becomes (s, t) where s is
/// the arc-length station of the nearest apex and t holds the transported
/// transverse frame coordinates of the offset from that apex. Training
/// points are apexes and land exactly at (s, 0, …, 0).
pub fn represent(
    cloud: &PointCloud,
    surface: &Hypersurface,
    chart: &Chart,
) -> Result<PointCloud> {
    if cloud.dim() != chart.dim {
        return Err(Error::ChartMismatch {
            detail: format!(
                "chart built for dimension {}, cloud has dimension {}",
                chart.dim,
                cloud.dim()
            ),
        });
    }
    if chart.order.len() != surface.caps.len() {
        return Err(Error::ChartMismatch {
            detail: format!(
                "chart covers {} caps, surface has {}",
                chart.order.len(),
                surface.caps.len()
            ),
        });
    }
    let out_dim = chart.dim - 1;
    let rows: Vec<DVector<f64>> = parallel::map_indexed(cloud.len(), |i| {
        let x = cloud.point(i);
        let mut best = 0;
        let mut best_d2 = f64::INFINITY;
        for (p, apex) in chart.apexes.iter().enumerate() {
            let d2 = (x - apex).norm_squared();
            if d2 < best_d2 {
                best_d2 = d2;
                best = p;
            }
        }
        let offset = x - &chart.apexes[best];
        let mut row = DVector::zeros(out_dim);
        row[0] = chart.stations[best];
        for k in 1..out_dim {
            row[k] = offset.dot(&chart.frames[best][k]);
        }
        row
    });
    PointCloud::new(rows)
}
