//! Surgery and assembly: cut each fitted sphere down to a small cap around
//! its apex, connect consecutive caps with partial cylinders, close the two
//! ends with strips, and discretize the result.
//!
//! Caps are cut by ambient chord distance: the rim is the locus on the
//! sphere at distance `delta` from the apex, a (d-2)-sphere (two points in
//! the plane). Cylinders attach at the rim locus nearest the neighboring
//! apex and span only the rim windows facing each other, not the full tube.
//! Strips detour outside the cloud's bounding ball so they cannot graze the
//! interior components; infinity strips are truncated at a configurable
//! multiple of the bounding radius and their free ends are genuine boundary.

use std::collections::HashMap;

use nalgebra::{DVector, Vector2, Vector3};

use crate::config::{Closure, RunConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::{
    ComponentRole, PolylineComponent, PolylineMesh, SurfaceMesh, TriangleComponent, TriangleMesh,
};
use crate::path::ConnectionPlan;
use crate::sphere::{GeneralizedSphere, SphereFit};
use crate::tol;

/// The rim of a cap: a (d-2)-sphere of radius `radius` centered at `center`,
/// inside the hyperplane spanned by `basis` (d-1 orthonormal vectors).
#[derive(Debug, Clone)]
pub struct CapRim {
    pub center: DVector<f64>,
    pub radius: f64,
    pub basis: Vec<DVector<f64>>,
}

impl CapRim {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// The two rim points in the plane (d = 2 only).
    pub fn pair(&self) -> [DVector<f64>; 2] {
        let offset = &self.basis[0] * self.radius;
        [&self.center - &offset, &self.center + &offset]
    }

    /// Rim point at azimuth `phi` measured in the (basis[0], basis[1])
    /// frame (d = 3).
    pub fn azimuth_point(&self, phi: f64) -> DVector<f64> {
        &self.center + (&self.basis[0] * phi.cos() + &self.basis[1] * phi.sin()) * self.radius
    }

    /// Azimuth of an ambient point's projection onto the rim plane (d = 3).
    pub fn azimuth_of(&self, p: &DVector<f64>) -> f64 {
        let v = p - &self.center;
        v.dot(&self.basis[1]).atan2(v.dot(&self.basis[0]))
    }

    /// Rim point nearest (Euclidean) to `target`; deterministic fallback
    /// along basis[0] when the target projects onto the rim center.
    pub fn nearest_to(&self, target: &DVector<f64>) -> DVector<f64> {
        let v = target - &self.center;
        let mut w = DVector::zeros(self.dim());
        for b in &self.basis {
            w.axpy(v.dot(b), b, 1.0);
        }
        let n = w.norm();
        if n <= 1e-14 * self.radius.max(1.0) {
            w = self.basis[0].clone();
        } else {
            w /= n;
        }
        &self.center + w * self.radius
    }

    /// The rim point diametrically opposite `p`.
    pub fn antipode(&self, p: &DVector<f64>) -> DVector<f64> {
        &self.center * 2.0 - p
    }
}

/// A sphere cut down to the locus within chord distance `delta` of the apex.
#[derive(Debug, Clone)]
pub struct HyperCap {
    /// Cloud index of the apex.
    pub index: usize,
    pub sphere: GeneralizedSphere,
    pub apex: DVector<f64>,
    pub delta: f64,
    pub rim: CapRim,
}

impl HyperCap {
    /// Unit vector from the sphere center toward the apex (Flat: the plane
    /// normal). The cap bulges along this axis.
    pub fn axis(&self) -> DVector<f64> {
        match &self.sphere {
            GeneralizedSphere::Round { center, .. } => {
                let v = &self.apex - center;
                let n = v.norm();
                v / n
            }
            GeneralizedSphere::Flat { normal, .. } => normal.clone(),
        }
    }
}

/// Cut the fitted sphere to the cap of chord radius `delta` around its apex.
/// `index` is the apex's cloud index, carried for component bookkeeping.
pub fn cut_cap(fit: &SphereFit, delta: f64, index: usize) -> Result<HyperCap> {
    let sphere = &fit.sphere;
    let apex = sphere.apex().clone();
    let dim = sphere.dim();
    let eps_limit = fit.diagnostics.epsilon_used;
    if !(delta > 0.0) || delta > eps_limit {
        return Err(Error::DeltaTooLarge {
            delta,
            limit: eps_limit,
        });
    }

    let rim = match sphere {
        GeneralizedSphere::Round { center, radius, .. } => {
            let axis_v = &apex - center;
            let dist = axis_v.norm();
            let residual = dist - radius;
            let apex_tol = tol::APEX_ON_SURFACE_REL * radius;
            if residual.abs() > apex_tol {
                return Err(Error::ApexNotOnSphere {
                    residual,
                    tol: apex_tol,
                });
            }
            if delta >= 2.0 * radius {
                return Err(Error::DeltaTooLarge {
                    delta,
                    limit: 2.0 * radius,
                });
            }
            let u = axis_v / dist;
            // Chord delta subtends the polar angle alpha: delta = 2 r sin(alpha/2).
            let alpha = 2.0 * (delta / (2.0 * radius)).asin();
            let rim_center = center + &u * (radius * alpha.cos());
            let rho = radius * alpha.sin();
            let full = linalg::complete_basis(std::slice::from_ref(&u), dim);
            CapRim {
                center: rim_center,
                radius: rho,
                basis: full[1..].to_vec(),
            }
        }
        GeneralizedSphere::Flat { normal, offset, .. } => {
            let residual = normal.dot(&apex) - offset;
            let apex_tol = tol::APEX_ON_SURFACE_REL * apex.norm().max(1.0);
            if residual.abs() > apex_tol {
                return Err(Error::ApexNotOnSphere {
                    residual,
                    tol: apex_tol,
                });
            }
            let full = linalg::complete_basis(std::slice::from_ref(normal), dim);
            CapRim {
                center: apex.clone(),
                radius: delta,
                basis: full[1..].to_vec(),
            }
        }
    };

    Ok(HyperCap {
        index,
        sphere: sphere.clone(),
        apex,
        delta,
        rim,
    })
}

/// Intersect a plane circle with the axis-aligned line `x[axis] = level`.
/// Returns both intersection points, the one with the smaller free
/// coordinate first (coincident when tangent).
pub fn hyperplane_cut_point(
    sphere: &GeneralizedSphere,
    axis: usize,
    level: f64,
) -> Result<Vec<DVector<f64>>> {
    let dim = sphere.dim();
    if dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: dim });
    }
    let (center, radius) = match sphere {
        GeneralizedSphere::Round { center, radius, .. } => (center, *radius),
        GeneralizedSphere::Flat { .. } => {
            return Err(Error::InvalidConfig {
                detail: "hyperplane cut requires a round circle, not a flat fit".into(),
            })
        }
    };
    if axis > 1 {
        return Err(Error::InvalidConfig {
            detail: format!("axis must be 0 or 1 in the plane, got {axis}"),
        });
    }
    let other = 1 - axis;
    let off = level - center[axis];
    let disc = radius * radius - off * off;
    let tol_disc = 1e-12 * radius * radius;
    if disc < -tol_disc {
        return Err(Error::NoIntersection { level });
    }
    let root = disc.max(0.0).sqrt();
    let mut lo = DVector::zeros(2);
    lo[axis] = level;
    lo[other] = center[other] - root;
    let mut hi = DVector::zeros(2);
    hi[axis] = level;
    hi[other] = center[other] + root;
    Ok(vec![lo, hi])
}

/// Straight connector between two caps, attached at the rim points facing
/// the other cap's apex.
#[derive(Debug, Clone)]
pub struct CylinderSegment {
    pub cap_i: usize,
    pub cap_j: usize,
    pub rim_point_i: DVector<f64>,
    pub rim_point_j: DVector<f64>,
    /// Plane case only: coefficients (a1, a2) of the connector line
    /// x2 = a1*x1 + a2; `None` when vertical or when d > 2.
    pub line: Option<(f64, f64)>,
}

/// Coefficients of the non-vertical line through two plane points.
fn line_coefficients(p: &DVector<f64>, q: &DVector<f64>) -> Option<(f64, f64)> {
    if p.len() != 2 {
        return None;
    }
    let dx = q[0] - p[0];
    let scale = dx.abs().max((q[1] - p[1]).abs()).max(1e-300);
    if dx.abs() <= 1e-12 * scale {
        return None;
    }
    let a1 = (q[1] - p[1]) / dx;
    let a2 = p[1] - a1 * p[0];
    Some((a1, a2))
}

/// Connect two caps with a straight ruling between the rim loci nearest to
/// each other's apex.
pub fn connect_cylinder(cap_i: &HyperCap, cap_j: &HyperCap) -> Result<CylinderSegment> {
    let dist = (&cap_i.apex - &cap_j.apex).norm();
    let limit = 2.0 * cap_i.delta.max(cap_j.delta);
    if dist <= limit {
        return Err(Error::CapsOverlap {
            i: cap_i.index,
            j: cap_j.index,
            dist,
            limit,
        });
    }
    let rim_point_i = cap_i.rim.nearest_to(&cap_j.apex);
    let rim_point_j = cap_j.rim.nearest_to(&cap_i.apex);
    let line = line_coefficients(&rim_point_i, &rim_point_j);
    Ok(CylinderSegment {
        cap_i: cap_i.index,
        cap_j: cap_j.index,
        rim_point_i,
        rim_point_j,
        line,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StripKind {
    /// Joins the free rims of the two boundary caps.
    ClosingLoop,
    /// Runs outward from one boundary cap and is truncated.
    ToInfinity,
}

/// End-closure component. The `route` polyline is the strip's spine: it
/// starts at the free rim locus of `cap_a`, detours outside the cloud's
/// bounding ball, and either returns to `cap_b`'s free rim (loop) or ends at
/// the truncation point (infinity).
#[derive(Debug, Clone)]
pub struct HyperStrip {
    pub kind: StripKind,
    pub cap_a: usize,
    pub cap_b: Option<usize>,
    pub route: Vec<DVector<f64>>,
}

/// Minimum distance from `p` to the segment `ab` in any dimension.
fn seg_dist_nd(p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Points on the arc from direction `u_from` to `u_to` about `origin` at
/// `radius`, endpoints excluded. Antipodal directions route through a
/// deterministic perpendicular so the arc stays well-defined.
fn slerp_arc(
    origin: &DVector<f64>,
    u_from: &DVector<f64>,
    u_to: &DVector<f64>,
    radius: f64,
    samples: usize,
) -> Vec<DVector<f64>> {
    let c = u_from.dot(u_to).clamp(-1.0, 1.0);
    let omega = c.acos();
    if omega < 1e-9 {
        return Vec::new();
    }
    if omega > std::f64::consts::PI - 1e-6 {
        // Nearly antipodal: insert a perpendicular waypoint and take two
        // quarter arcs.
        let helper = linalg::complete_basis(std::slice::from_ref(u_from), u_from.len())[1].clone();
        let mut out = slerp_arc(origin, u_from, &helper, radius, samples / 2);
        out.push(origin + &helper * radius);
        out.extend(slerp_arc(origin, &helper, u_to, radius, samples / 2));
        return out;
    }
    let s = omega.sin();
    // Keep the angular spacing near pi/samples regardless of sweep: a short
    // sweep must not bunch `samples` stations closer than the ribbon width.
    let steps = ((omega * samples as f64 / std::f64::consts::PI).ceil() as usize).clamp(1, samples);
    (1..steps)
        .map(|k| {
            let t = k as f64 / steps as f64;
            let dir = (u_from * ((1.0 - t) * omega).sin() + u_to * (t * omega).sin()) / s;
            origin + dir * radius
        })
        .collect()
}

/// Centroid and enclosing radius of the apexes.
fn apex_ball(caps: &[HyperCap]) -> (DVector<f64>, f64) {
    let dim = caps[0].apex.len();
    let mut center = DVector::zeros(dim);
    for cap in caps {
        center += &cap.apex;
    }
    center /= caps.len() as f64;
    let radius = caps
        .iter()
        .map(|c| (&c.apex - &center).norm())
        .fold(0.0_f64, f64::max);
    (center, radius)
}

/// Preliminary free rim locus of a boundary cap: the antipode of the rim
/// point facing the neighboring apex.
fn free_rim(cap: &HyperCap, neighbor_apex: &DVector<f64>) -> DVector<f64> {
    let used = cap.rim.nearest_to(neighbor_apex);
    cap.rim.antipode(&used)
}

/// Build the closing strip(s) for the planned traversal: one loop strip, or
/// two truncated infinity strips on distinct detour radii so they cannot
/// meet each other.
pub fn closing_strip(
    plan: &ConnectionPlan,
    caps: &[HyperCap],
    cfg: &RunConfig,
) -> Result<Vec<HyperStrip>> {
    let n = plan.order.len();
    if caps.len() != n || n < 2 {
        return Err(Error::ComponentMismatch {
            detail: format!("plan visits {n} points but {} caps were provided", caps.len()),
        });
    }
    let cap_of = |cloud: usize| -> &HyperCap { &caps[cloud] };
    let (origin, raw_radius) = apex_ball(caps);
    let max_delta = caps.iter().map(|c| c.delta).fold(0.0_f64, f64::max);
    let ball = (raw_radius + max_delta).max(1e-6);
    let arc_samples = (cfg.mesh_resolution / 2).max(8);

    let first = plan.order[0];
    let last = *plan.order.last().unwrap();
    let free_a = free_rim(cap_of(first), &cap_of(plan.order[1]).apex);
    let free_b = free_rim(cap_of(last), &cap_of(plan.order[n - 2]).apex);

    let radial = |p: &DVector<f64>, rho: f64| -> Result<(DVector<f64>, DVector<f64>)> {
        let v = p - &origin;
        let norm = v.norm();
        if norm <= 1e-12 * ball {
            return Err(Error::RoutingFailed {
                component: "rim locus coincides with the cloud centroid".into(),
            });
        }
        let u = v / norm;
        Ok((&origin + &u * rho, u))
    };

    let strips = match plan.closure {
        Closure::Loop => {
            let rho = 1.5 * ball;
            let (pa, ua) = radial(&free_a, rho)?;
            let (pb, ub) = radial(&free_b, rho)?;
            let mut route = vec![free_a, pa];
            route.extend(slerp_arc(&origin, &ua, &ub, rho, arc_samples));
            route.push(pb);
            route.push(free_b);
            vec![HyperStrip {
                kind: StripKind::ClosingLoop,
                cap_a: first,
                cap_b: Some(last),
                route,
            }]
        }
        Closure::Infinity => {
            let dir = plan.infinity_direction.as_ref().ok_or_else(|| {
                Error::ComponentMismatch {
                    detail: "infinity closure requires a direction in the plan".into(),
                }
            })?;
            let d_first = (&cap_of(first).apex - &origin).norm();
            let d_last = (&cap_of(last).apex - &origin).norm();
            let far_is_last = d_last > d_first;
            let leg = cfg.strip_truncation_factor * ball;
            let mut strips = Vec::with_capacity(2);
            for (cloud, free) in [(first, free_a), (last, free_b)] {
                let is_far = (cloud == last) == far_is_last;
                let sign = if is_far { 1.0 } else { -1.0 };
                // Distinct detour radii keep the two strips disjoint even
                // when their arcs sweep overlapping angular ranges.
                let rho = if is_far { 1.45 * ball } else { 1.7 * ball };
                let (pe, ue) = radial(&free, rho)?;
                let target = dir * sign;
                let q = &origin + &target * rho;
                let mut route = vec![free, pe];
                route.extend(slerp_arc(&origin, &ue, &target, rho, arc_samples));
                route.push(q);
                route.push(&origin + &target * leg);
                strips.push(HyperStrip {
                    kind: StripKind::ToInfinity,
                    cap_a: cloud,
                    cap_b: None,
                    route,
                });
            }
            strips
        }
    };

    // Degenerate arcs can leave (nearly) coincident consecutive stations;
    // drop them before they produce zero-width bands.
    let mut strips = strips;
    for strip in strips.iter_mut() {
        strip
            .route
            .dedup_by(|a, b| (&*a - &*b).norm() <= 1e-6 * ball);
    }

    // The detour must clear every cap it is not attached to.
    for (k, strip) in strips.iter().enumerate() {
        for cap in caps.iter() {
            if cap.index == strip.cap_a || Some(cap.index) == strip.cap_b {
                continue;
            }
            for w in strip.route.windows(2) {
                if seg_dist_nd(&cap.apex, &w[0], &w[1]) <= 2.0 * cap.delta {
                    return Err(Error::RoutingFailed {
                        component: format!("strip {k} passes cap {}", cap.index),
                    });
                }
            }
        }
    }

    Ok(strips)
}

/// The assembled hypersurface: all components plus the traversal order they
/// are threaded along and the discretized mesh (absent above dimension 3).
#[derive(Debug, Clone)]
pub struct Hypersurface {
    pub caps: Vec<HyperCap>,
    pub cylinders: Vec<CylinderSegment>,
    pub strips: Vec<HyperStrip>,
    pub order: Vec<usize>,
    pub closure: Closure,
    pub mesh: SurfaceMesh,
}

impl Hypersurface {
    pub fn dim(&self) -> usize {
        self.caps[0].apex.len()
    }

    pub fn component_count(&self) -> usize {
        self.caps.len() + self.cylinders.len() + self.strips.len()
    }
}

/// Final rim usage of one cap: the attachment loci actually meshed.
#[derive(Debug, Clone, Default)]
struct RimPlan {
    toward_prev: Option<DVector<f64>>,
    toward_next: Option<DVector<f64>>,
    strip_end: Option<DVector<f64>>,
}

/// Decide the final attachment locus per cap. In the plane each cap has
/// exactly two rim points and exactly two customers (neighbor cylinders
/// and/or a strip), so the assignment is the cheaper of the two pairings —
/// the pairwise nearest rule alone can hand both customers the same point at
/// a sharp turn. In higher dimensions attachments keep the nearest-locus
/// rule and merely get pushed apart along the rim when their azimuths nearly
/// coincide.
fn plan_rims(
    caps: &[HyperCap],
    order: &[usize],
    strips: &[HyperStrip],
    res: usize,
) -> Vec<RimPlan> {
    let n = order.len();
    let dim = caps[0].apex.len();
    let strip_target = |cloud: usize| -> Option<DVector<f64>> {
        for s in strips {
            if s.cap_a == cloud {
                return Some(s.route[1].clone());
            }
            if s.cap_b == Some(cloud) {
                return Some(s.route[s.route.len() - 2].clone());
            }
        }
        None
    };

    (0..n)
        .map(|p| {
            let cloud = order[p];
            let cap = &caps[cloud];
            let prev_apex = (p > 0).then(|| caps[order[p - 1]].apex.clone());
            let next_apex = (p + 1 < n).then(|| caps[order[p + 1]].apex.clone());
            let strip_pt = strip_target(cloud);

            let mut plan = RimPlan::default();
            if dim == 2 {
                // Slot A is the earlier customer along the path, slot B the
                // later one; boundary caps swap a neighbor for their strip.
                let (ta, tb, a_is_prev) = match (&prev_apex, &next_apex) {
                    (Some(pa), Some(na)) => (pa.clone(), na.clone(), true),
                    (None, Some(na)) => (strip_pt.clone().unwrap(), na.clone(), false),
                    (Some(pa), None) => (pa.clone(), strip_pt.clone().unwrap(), true),
                    (None, None) => unreachable!("paths have at least two caps"),
                };
                let [q0, q1] = cap.rim.pair();
                let straight = (&q0 - &ta).norm() + (&q1 - &tb).norm();
                let swapped = (&q1 - &ta).norm() + (&q0 - &tb).norm();
                let (pa_pt, pb_pt) = if straight <= swapped { (q0, q1) } else { (q1, q0) };
                match (a_is_prev, prev_apex.is_some(), next_apex.is_some()) {
                    (true, true, true) => {
                        plan.toward_prev = Some(pa_pt);
                        plan.toward_next = Some(pb_pt);
                    }
                    (false, false, true) => {
                        plan.strip_end = Some(pa_pt);
                        plan.toward_next = Some(pb_pt);
                    }
                    (true, true, false) => {
                        plan.toward_prev = Some(pa_pt);
                        plan.strip_end = Some(pb_pt);
                    }
                    _ => unreachable!(),
                }
            } else {
                let mut targets: Vec<(usize, DVector<f64>)> = Vec::new();
                if let Some(t) = &prev_apex {
                    targets.push((0, cap.rim.nearest_to(t)));
                }
                if let Some(t) = &next_apex {
                    targets.push((1, cap.rim.nearest_to(t)));
                }
                if let Some(t) = &strip_pt {
                    targets.push((2, cap.rim.nearest_to(t)));
                }
                if dim == 3 && targets.len() == 2 {
                    let spacing = tau() / res as f64;
                    let phi0 = cap.rim.azimuth_of(&targets[0].1);
                    let phi1 = cap.rim.azimuth_of(&targets[1].1);
                    let forward = circ_gap(phi0, phi1);
                    let short = forward.min(tau() - forward);
                    if short < 2.0 * spacing {
                        // Push the pair apart symmetrically about the
                        // midpoint of their short arc.
                        let (m0, m1) = if forward <= std::f64::consts::PI {
                            let mid = phi0 + forward / 2.0;
                            (mid - spacing, mid + spacing)
                        } else {
                            let mid = phi1 + (tau() - forward) / 2.0;
                            (mid + spacing, mid - spacing)
                        };
                        targets[0].1 = cap.rim.azimuth_point(m0);
                        targets[1].1 = cap.rim.azimuth_point(m1);
                    }
                }
                for (slot, pt) in targets {
                    match slot {
                        0 => plan.toward_prev = Some(pt),
                        1 => plan.toward_next = Some(pt),
                        _ => plan.strip_end = Some(pt),
                    }
                }
            }
            plan
        })
        .collect()
}

/// Assemble the hypersurface from its parts, refining attachment loci and
/// building the mesh for d <= 3.
pub fn assemble(
    caps: Vec<HyperCap>,
    mut cylinders: Vec<CylinderSegment>,
    mut strips: Vec<HyperStrip>,
    plan: &ConnectionPlan,
    cfg: &RunConfig,
) -> Result<Hypersurface> {
    let n = plan.order.len();
    if caps.len() != n {
        return Err(Error::ComponentMismatch {
            detail: format!("expected {n} caps for the plan, got {}", caps.len()),
        });
    }
    for (i, cap) in caps.iter().enumerate() {
        if cap.index != i {
            return Err(Error::ComponentMismatch {
                detail: format!("cap at position {i} carries index {}", cap.index),
            });
        }
    }
    if cylinders.len() + 1 != n {
        return Err(Error::ComponentMismatch {
            detail: format!("expected {} cylinders, got {}", n - 1, cylinders.len()),
        });
    }
    for (p, cyl) in cylinders.iter().enumerate() {
        if cyl.cap_i != plan.order[p] || cyl.cap_j != plan.order[p + 1] {
            return Err(Error::ComponentMismatch {
                detail: format!(
                    "cylinder {p} connects caps {} and {}, plan expects {} and {}",
                    cyl.cap_i,
                    cyl.cap_j,
                    plan.order[p],
                    plan.order[p + 1]
                ),
            });
        }
    }
    let expected_strips = match plan.closure {
        Closure::Loop => 1,
        Closure::Infinity => 2,
    };
    if strips.len() != expected_strips {
        return Err(Error::ComponentMismatch {
            detail: format!("expected {expected_strips} strip(s), got {}", strips.len()),
        });
    }
    let dim = caps[0].apex.len();

    let rim_plans = plan_rims(&caps, &plan.order, &strips, cfg.mesh_resolution);

    // Snap the abstract components to the refined loci.
    for (p, cyl) in cylinders.iter_mut().enumerate() {
        if let Some(pt) = &rim_plans[p].toward_next {
            cyl.rim_point_i = pt.clone();
        }
        if let Some(pt) = &rim_plans[p + 1].toward_prev {
            cyl.rim_point_j = pt.clone();
        }
        cyl.line = line_coefficients(&cyl.rim_point_i, &cyl.rim_point_j);
    }
    let pos_of: HashMap<usize, usize> =
        plan.order.iter().enumerate().map(|(p, &c)| (c, p)).collect();
    for strip in strips.iter_mut() {
        if let Some(pt) = &rim_plans[pos_of[&strip.cap_a]].strip_end {
            strip.route[0] = pt.clone();
        }
        if let Some(cb) = strip.cap_b {
            if let Some(pt) = &rim_plans[pos_of[&cb]].strip_end {
                let last = strip.route.len() - 1;
                strip.route[last] = pt.clone();
            }
        }
    }

    let mesh = match dim {
        2 => SurfaceMesh::Polyline(build_polyline_mesh(
            &caps, &cylinders, &strips, &rim_plans, plan, cfg,
        )),
        3 => SurfaceMesh::Triangles(build_triangle_mesh(
            &caps, &strips, &rim_plans, plan, cfg,
        )?),
        d => SurfaceMesh::Absent { dim: d },
    };

    Ok(Hypersurface {
        caps,
        cylinders,
        strips,
        order: plan.order.clone(),
        closure: plan.closure,
        mesh,
    })
}

// ---------------------------------------------------------------------------
// Plane mesh
// ---------------------------------------------------------------------------

/// Sampled cap arc from one refined rim point through the apex to the other,
/// with junction vertices bit-identical to the values used by the adjacent
/// components.
fn cap_polyline(
    cap: &HyperCap,
    end_a: &DVector<f64>,
    end_b: &DVector<f64>,
    res: usize,
) -> Vec<Vector2<f64>> {
    let res = res.max(4) & !1; // even, so the middle sample is the apex
    let to2 = |v: &DVector<f64>| Vector2::new(v[0], v[1]);
    let mut pts = Vec::with_capacity(res + 1);
    match &cap.sphere {
        GeneralizedSphere::Round { center, radius, .. } => {
            let theta_of = |p: &DVector<f64>| (p[1] - center[1]).atan2(p[0] - center[0]);
            let t_apex = theta_of(&cap.apex);
            // Signed angular offsets of the two ends relative to the apex,
            // each within (-pi, pi]: the cap spans the short way around.
            let wrap = |t: f64| {
                let mut x = (t - t_apex).rem_euclid(std::f64::consts::TAU);
                if x > std::f64::consts::PI {
                    x -= std::f64::consts::TAU;
                }
                x
            };
            let off_a = wrap(theta_of(end_a));
            let off_b = wrap(theta_of(end_b));
            for k in 0..=res {
                let t = k as f64 / res as f64;
                let off = off_a + (off_b - off_a) * t;
                let ang = t_apex + off;
                pts.push(Vector2::new(
                    center[0] + radius * ang.cos(),
                    center[1] + radius * ang.sin(),
                ));
            }
        }
        GeneralizedSphere::Flat { .. } => {
            let (a2, b2) = (to2(end_a), to2(end_b));
            for k in 0..=res {
                let t = k as f64 / res as f64;
                pts.push(a2 + (b2 - a2) * t);
            }
        }
    }
    pts[0] = to2(end_a);
    let last = pts.len() - 1;
    pts[last] = to2(end_b);
    let mid = pts.len() / 2;
    pts[mid] = to2(&cap.apex);
    pts
}

fn build_polyline_mesh(
    caps: &[HyperCap],
    cylinders: &[CylinderSegment],
    strips: &[HyperStrip],
    rim_plans: &[RimPlan],
    plan: &ConnectionPlan,
    cfg: &RunConfig,
) -> PolylineMesh {
    let to2 = |v: &DVector<f64>| Vector2::new(v[0], v[1]);
    let mut components = Vec::new();

    for (p, &cloud) in plan.order.iter().enumerate() {
        let rp = &rim_plans[p];
        // Every cap serves exactly two customers; its polyline runs from the
        // earlier-side locus to the later-side one.
        let end_a = rp.toward_prev.as_ref().or(rp.strip_end.as_ref()).unwrap();
        let end_b = rp.toward_next.as_ref().or(rp.strip_end.as_ref()).unwrap();
        components.push(PolylineComponent {
            role: ComponentRole::Cap { index: cloud },
            points: cap_polyline(&caps[cloud], end_a, end_b, cfg.mesh_resolution),
        });
    }

    for cyl in cylinders {
        components.push(PolylineComponent {
            role: ComponentRole::Cylinder {
                i: cyl.cap_i,
                j: cyl.cap_j,
            },
            points: vec![to2(&cyl.rim_point_i), to2(&cyl.rim_point_j)],
        });
    }

    for (k, strip) in strips.iter().enumerate() {
        components.push(PolylineComponent {
            role: ComponentRole::Strip { k },
            points: strip.route.iter().map(to2).collect(),
        });
    }

    PolylineMesh { components }
}

// ---------------------------------------------------------------------------
// Space mesh
// ---------------------------------------------------------------------------

/// Rim-circle sampling bookkeeping for one cap.
struct CapGrid {
    /// Vertex indices of the rim ring, azimuth-sorted.
    rim_ring: Vec<usize>,
    /// For each attachment slot (0 prev, 1 next, 2 strip): positions into
    /// `rim_ring` forming the window, in increasing window parameter.
    windows: [Option<Vec<usize>>; 3],
}

fn tau() -> f64 {
    std::f64::consts::TAU
}

fn circ_gap(from: f64, to: f64) -> f64 {
    (to - from).rem_euclid(tau())
}

/// Position of a cap surface point at polar fraction `f` (0 apex, 1 rim)
/// and azimuth `phi`.
fn cap_surface_point(cap: &HyperCap, f: f64, phi: f64) -> DVector<f64> {
    match &cap.sphere {
        GeneralizedSphere::Round { center, radius, .. } => {
            let u = cap.axis();
            let alpha = 2.0 * (cap.delta / (2.0 * radius)).asin();
            let polar = alpha * f;
            let lateral =
                &cap.rim.basis[0] * phi.cos() + &cap.rim.basis[1] * phi.sin();
            center + (u * polar.cos() + lateral * polar.sin()) * *radius
        }
        GeneralizedSphere::Flat { .. } => {
            let lateral =
                &cap.rim.basis[0] * phi.cos() + &cap.rim.basis[1] * phi.sin();
            &cap.apex + lateral * (cap.delta * f)
        }
    }
}

/// Build one cap's triangulated surface, returning its rim bookkeeping.
fn build_cap_grid(
    cap: &HyperCap,
    rp: &RimPlan,
    res: usize,
    vertices: &mut Vec<Vector3<f64>>,
    components: &mut Vec<TriangleComponent>,
) -> CapGrid {
    let to3 = |v: &DVector<f64>| Vector3::new(v[0], v[1], v[2]);
    let window_segments = (res / 4).max(4);
    let rings = (res / 8).max(2);

    // Window centers and clamped half-widths.
    let mut attachments: Vec<(usize, f64)> = Vec::new(); // (slot, azimuth)
    for (slot, pt) in [
        (0usize, rp.toward_prev.as_ref()),
        (1, rp.toward_next.as_ref()),
        (2, rp.strip_end.as_ref()),
    ] {
        if let Some(pt) = pt {
            attachments.push((slot, cap.rim.azimuth_of(pt).rem_euclid(tau())));
        }
    }
    let base_half = std::f64::consts::FRAC_PI_4;
    let half_width = |phi: f64| -> f64 {
        let mut w = base_half;
        for &(_, other) in &attachments {
            let g = circ_gap(phi, other).min(circ_gap(other, phi));
            if g > 1e-12 {
                w = w.min(0.45 * g);
            }
        }
        w
    };

    // Tagged azimuth samples: windows first, then fillers.
    let mut samples: Vec<(f64, Option<(usize, usize)>)> = Vec::new();
    for &(slot, phi) in &attachments {
        let w = half_width(phi);
        for s in 0..=window_segments {
            let a = phi - w + 2.0 * w * s as f64 / window_segments as f64;
            samples.push((a.rem_euclid(tau()), Some((slot, s))));
        }
    }
    if samples.is_empty() {
        samples.push((0.0, None));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Fillers keep the ring spacing near the nominal resolution.
    let spacing = tau() / res as f64;
    let mut filled: Vec<(f64, Option<(usize, usize)>)> = Vec::new();
    for i in 0..samples.len() {
        let (cur, tag) = samples[i];
        filled.push((cur, tag));
        let next = if i + 1 < samples.len() {
            samples[i + 1].0
        } else {
            samples[0].0 + tau()
        };
        let gap = next - cur;
        if gap > 1.5 * spacing {
            let extra = (gap / spacing).floor() as usize;
            for m in 1..=extra {
                let a = cur + gap * m as f64 / (extra + 1) as f64;
                filled.push((a.rem_euclid(tau()), None));
            }
        }
    }
    filled.sort_by(|a, b| a.0.total_cmp(&b.0));
    filled.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);

    let azimuths: Vec<f64> = filled.iter().map(|s| s.0).collect();
    let cols = azimuths.len();

    // Vertices: apex, then rings from inside out.
    let apex_idx = vertices.len();
    vertices.push(to3(&cap.apex));
    let mut ring_indices: Vec<Vec<usize>> = Vec::with_capacity(rings);
    for ring in 1..=rings {
        let f = ring as f64 / rings as f64;
        let mut row = Vec::with_capacity(cols);
        for &phi in &azimuths {
            row.push(vertices.len());
            vertices.push(to3(&cap_surface_point(cap, f, phi)));
        }
        ring_indices.push(row);
    }

    let mut triangles = Vec::new();
    for a in 0..cols {
        let b = (a + 1) % cols;
        triangles.push([apex_idx, ring_indices[0][a], ring_indices[0][b]]);
    }
    for ring in 0..rings - 1 {
        for a in 0..cols {
            let b = (a + 1) % cols;
            let (i0, i1) = (ring_indices[ring][a], ring_indices[ring][b]);
            let (j0, j1) = (ring_indices[ring + 1][a], ring_indices[ring + 1][b]);
            triangles.push([i0, j0, i1]);
            triangles.push([i1, j0, j1]);
        }
    }
    components.push(TriangleComponent {
        role: ComponentRole::Cap { index: cap.index },
        triangles,
    });

    let rim_ring = ring_indices.last().unwrap().clone();
    let mut windows: [Option<Vec<usize>>; 3] = [None, None, None];
    for (slot_w, window) in windows.iter_mut().enumerate() {
        let mut entries: Vec<(usize, usize)> = filled
            .iter()
            .enumerate()
            .filter_map(|(pos, (_, tag))| {
                tag.and_then(|(slot, s)| (slot == slot_w).then_some((s, pos)))
            })
            .collect();
        if entries.is_empty() {
            continue;
        }
        entries.sort_unstable();
        *window = Some(entries.into_iter().map(|(_, pos)| pos).collect());
    }

    CapGrid { rim_ring, windows }
}

/// Ruled band between two vertex rows; rows keep their indices, interior
/// rows are freshly created. The second row is traversed reversed when that
/// shortens the total ruling.
fn ruled_band(
    row_a: &[usize],
    row_b: &[usize],
    rows: usize,
    vertices: &mut Vec<Vector3<f64>>,
    triangles: &mut Vec<[usize; 3]>,
) {
    let k = row_a.len();
    let b_oriented: Vec<usize> = {
        let straight: f64 = (0..k)
            .map(|s| (vertices[row_a[s]] - vertices[row_b[s]]).norm())
            .sum();
        let reversed: f64 = (0..k)
            .map(|s| (vertices[row_a[s]] - vertices[row_b[k - 1 - s]]).norm())
            .sum();
        if reversed < straight {
            row_b.iter().rev().copied().collect()
        } else {
            row_b.to_vec()
        }
    };
    let mut grid: Vec<Vec<usize>> = Vec::with_capacity(rows + 1);
    grid.push(row_a.to_vec());
    for t in 1..rows {
        let f = t as f64 / rows as f64;
        let mut row = Vec::with_capacity(k);
        for s in 0..k {
            let p = vertices[row_a[s]] * (1.0 - f) + vertices[b_oriented[s]] * f;
            row.push(vertices.len());
            vertices.push(p);
        }
        grid.push(row);
    }
    grid.push(b_oriented);
    for t in 0..rows {
        for s in 0..k - 1 {
            let (i0, i1) = (grid[t][s], grid[t][s + 1]);
            let (j0, j1) = (grid[t + 1][s], grid[t + 1][s + 1]);
            triangles.push([i0, j0, i1]);
            triangles.push([i1, j0, j1]);
        }
    }
}

/// Sequence of cross-section vertex rows for a strip: the attached rim
/// window, straight sections transported along the route, and (loop only)
/// the far rim window.
fn strip_sections(
    strip: &HyperStrip,
    grids: &HashMap<usize, CapGrid>,
    vertices: &mut Vec<Vector3<f64>>,
    twist: f64,
) -> Vec<Vec<usize>> {
    let win_a = grids[&strip.cap_a].windows[2]
        .as_ref()
        .expect("strip cap must expose a strip window")
        .iter()
        .map(|&pos| grids[&strip.cap_a].rim_ring[pos])
        .collect::<Vec<usize>>();
    let k = win_a.len();
    let chord = (vertices[win_a[k - 1]] - vertices[win_a[0]]).norm().max(1e-12);

    let route: Vec<Vector3<f64>> = strip
        .route
        .iter()
        .map(|p| Vector3::new(p[0], p[1], p[2]))
        .collect();
    let m = route.len();

    // Transported width direction along the route.
    let mut tangents: Vec<Vector3<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let (a, b) = if i == 0 {
            (route[0], route[1])
        } else if i == m - 1 {
            (route[m - 2], route[m - 1])
        } else {
            (route[i - 1], route[i + 1])
        };
        let d = b - a;
        let n = d.norm();
        tangents.push(if n > 1e-300 { d / n } else { Vector3::x() });
    }
    let mut width = {
        let w0 = vertices[win_a[k - 1]] - vertices[win_a[0]];
        let mut w = w0 - tangents[0] * w0.dot(&tangents[0]);
        let n = w.norm();
        if n > 1e-12 {
            w /= n;
        } else {
            w = tangents[0].cross(&Vector3::z());
            let n = w.norm();
            w = if n > 1e-6 { w / n } else { Vector3::y() };
        }
        w
    };

    let mut sections: Vec<Vec<usize>> = vec![win_a];
    let last_straight = if strip.cap_b.is_some() { m - 1 } else { m };
    for i in 1..last_straight {
        // Rotate the width frame with the tangent turn, then re-square it.
        let prev_t = tangents[i - 1];
        let cur_t = tangents[i];
        let c = prev_t.dot(&cur_t).clamp(-1.0, 1.0);
        if c < 1.0 - 1e-15 {
            let axis_p = cur_t - prev_t * c;
            let n = axis_p.norm();
            if n > 1e-12 {
                let p = axis_p / n;
                let s = n;
                let wa = width.dot(&prev_t);
                let wp = width.dot(&p);
                width = width + prev_t * ((c - 1.0) * wa - s * wp)
                    + p * ((c - 1.0) * wp + s * wa);
            }
        }
        width -= cur_t * width.dot(&cur_t);
        let n = width.norm();
        if n > 1e-12 {
            width /= n;
        }
        // Optional progressive twist about the tangent (0 at the near rim,
        // `twist` at the far end), used to correct the gluing parity of a
        // loop-closing strip.  Applied to the emitted row only, so the
        // transported frame stays twist-free.
        let theta = twist * i as f64 / (last_straight - 1).max(1) as f64;
        let emit = if theta.abs() > 1e-12 {
            width * theta.cos() + cur_t.cross(&width) * theta.sin()
        } else {
            width
        };
        let mut row = Vec::with_capacity(k);
        for s in 0..k {
            let f = s as f64 / (k - 1) as f64 - 0.5;
            row.push(vertices.len());
            vertices.push(route[i] + emit * (chord * f));
        }
        sections.push(row);
    }
    if let Some(cap_b) = strip.cap_b {
        let win_b: Vec<usize> = grids[&cap_b].windows[2]
            .as_ref()
            .expect("loop strip far cap must expose a strip window")
            .iter()
            .map(|&pos| grids[&cap_b].rim_ring[pos])
            .collect();
        sections.push(win_b);
    }
    sections
}

fn build_triangle_mesh(
    caps: &[HyperCap],
    strips: &[HyperStrip],
    rim_plans: &[RimPlan],
    plan: &ConnectionPlan,
    cfg: &RunConfig,
) -> Result<TriangleMesh> {
    let mut mesh = build_triangle_mesh_with_twist(caps, strips, rim_plans, plan, cfg, 0.0)?;
    if !orient_consistently(&mut mesh) {
        // The cap–cylinder chain is a tree, so the only cycle runs through
        // the closing strip; odd total twist around it makes the gluing
        // one-sided no matter how triangles are flipped.  A half-turn
        // distributed along the strip flips the cycle's parity.
        mesh =
            build_triangle_mesh_with_twist(caps, strips, rim_plans, plan, cfg, std::f64::consts::PI)?;
        orient_consistently(&mut mesh);
    }
    Ok(mesh)
}

fn build_triangle_mesh_with_twist(
    caps: &[HyperCap],
    strips: &[HyperStrip],
    rim_plans: &[RimPlan],
    plan: &ConnectionPlan,
    cfg: &RunConfig,
    twist: f64,
) -> Result<TriangleMesh> {
    let res = cfg.mesh_resolution;
    let band_rows = (res / 8).max(2);
    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    let mut components: Vec<TriangleComponent> = Vec::new();

    let mut grids: HashMap<usize, CapGrid> = HashMap::new();
    for (p, &cloud) in plan.order.iter().enumerate() {
        let grid = build_cap_grid(&caps[cloud], &rim_plans[p], res, &mut vertices, &mut components);
        grids.insert(cloud, grid);
    }

    for p in 0..plan.order.len() - 1 {
        let (ci, cj) = (plan.order[p], plan.order[p + 1]);
        let row_a: Vec<usize> = grids[&ci].windows[1]
            .as_ref()
            .ok_or_else(|| Error::ComponentMismatch {
                detail: format!("cap {ci} lacks a forward attachment window"),
            })?
            .iter()
            .map(|&pos| grids[&ci].rim_ring[pos])
            .collect();
        let row_b: Vec<usize> = grids[&cj].windows[0]
            .as_ref()
            .ok_or_else(|| Error::ComponentMismatch {
                detail: format!("cap {cj} lacks a backward attachment window"),
            })?
            .iter()
            .map(|&pos| grids[&cj].rim_ring[pos])
            .collect();
        if row_a.len() != row_b.len() {
            return Err(Error::ComponentMismatch {
                detail: format!(
                    "attachment windows disagree in size: {} vs {}",
                    row_a.len(),
                    row_b.len()
                ),
            });
        }
        let mut triangles = Vec::new();
        ruled_band(&row_a, &row_b, band_rows, &mut vertices, &mut triangles);
        components.push(TriangleComponent {
            role: ComponentRole::Cylinder { i: ci, j: cj },
            triangles,
        });
    }

    for (kk, strip) in strips.iter().enumerate() {
        let sections = strip_sections(strip, &grids, &mut vertices, twist);
        let mut triangles = Vec::new();
        for w in sections.windows(2) {
            if w[0].len() != w[1].len() {
                return Err(Error::ComponentMismatch {
                    detail: "strip sections disagree in size".into(),
                });
            }
            ruled_band(&w[0], &w[1], 1, &mut vertices, &mut triangles);
        }
        components.push(TriangleComponent {
            role: ComponentRole::Strip { k: kk },
            triangles,
        });
    }

    Ok(TriangleMesh { vertices, components })
}

/// Flip triangles until every interior edge is traversed in opposite
/// directions by its two faces; `false` if a conflict had to be left behind.
///
/// Components are wound consistently on their own, but the relative winding
/// across an attachment is an accident of construction.  A breadth-first
/// sweep over the edge-adjacency graph repairs every removable mismatch; an
/// odd cycle (a one-sided gluing) or a non-manifold edge cannot be repaired
/// by flipping and is reported to the caller.
fn orient_consistently(mesh: &mut TriangleMesh) -> bool {
    let mut ids: Vec<(usize, usize)> = Vec::new();
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for (ci, comp) in mesh.components.iter().enumerate() {
        for (ti, t) in comp.triangles.iter().enumerate() {
            ids.push((ci, ti));
            tris.push(*t);
        }
    }
    let mut edges: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    for (g, t) in tris.iter().enumerate() {
        for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            edges.entry((u.min(v), u.max(v))).or_default().push((g, u < v));
        }
    }
    let mut flip = vec![false; tris.len()];
    let mut seen = vec![false; tris.len()];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..tris.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        while let Some(g) = queue.pop_front() {
            let t = tris[g];
            for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let incident = &edges[&(u.min(v), u.max(v))];
                if incident.len() != 2 {
                    continue;
                }
                let g_dir = (u < v) ^ flip[g];
                for &(h, h_dir) in incident {
                    if h == g || seen[h] {
                        continue;
                    }
                    flip[h] = h_dir == g_dir;
                    seen[h] = true;
                    queue.push_back(h);
                }
            }
        }
    }
    let mut consistent = true;
    for incident in edges.values() {
        match incident[..] {
            [_] => {}
            [(g, gd), (h, hd)] => {
                if (gd ^ flip[g]) == (hd ^ flip[h]) {
                    consistent = false;
                }
            }
            _ => consistent = false,
        }
    }
    for (g, &(ci, ti)) in ids.iter().enumerate() {
        if flip[g] {
            mesh.components[ci].triangles[ti].swap(1, 2);
        }
    }
    consistent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::knn::knn;
    use crate::path::select_path;
    use crate::sphere::{osculating_sphere, sphere_residual, FitDiagnostics};
    use crate::PointCloud;
    use approx::assert_relative_eq;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn unit_circle_fit(apex: &[f64]) -> SphereFit {
        SphereFit {
            sphere: GeneralizedSphere::Round {
                center: dv(&[0.0, 0.0]),
                radius: 1.0,
                apex: dv(apex),
            },
            diagnostics: FitDiagnostics {
                condition_estimate: 1.0,
                residual_max: 0.0,
                epsilon_used: 1.0,
            },
        }
    }

    fn flat_fit(apex: &[f64], normal: &[f64]) -> SphereFit {
        let normal = dv(normal);
        let apex = dv(apex);
        let offset = normal.dot(&apex);
        SphereFit {
            sphere: GeneralizedSphere::Flat {
                normal,
                offset,
                apex,
            },
            diagnostics: FitDiagnostics {
                condition_estimate: f64::INFINITY,
                residual_max: 0.0,
                epsilon_used: 1.0,
            },
        }
    }

    #[test]
    fn unit_circle_cap_rim() {
        let fit = unit_circle_fit(&[1.0, 0.0]);
        let cap = cut_cap(&fit, 0.1, 0).unwrap();
        let pair = cap.rim.pair();
        for p in &pair {
            // Oracle: the rim point must solve the circle-circle
            // intersection |x| = 1, |x - apex| = 0.1 simultaneously.
            assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-12);
            assert_relative_eq!((p - dv(&[1.0, 0.0])).norm(), 0.1, epsilon = 1e-12);
            let res = sphere_residual(&cap.sphere, p).unwrap();
            assert!(res.abs() < 1e-12);
        }
        // The two rim points are distinct and symmetric about the x-axis.
        assert!((&pair[0] - &pair[1]).norm() > 0.19);
        assert_relative_eq!(pair[0][1], -pair[1][1], epsilon = 1e-12);
    }

    #[test]
    fn flat_cap_rim_is_symmetric_segment() {
        let fit = flat_fit(&[0.0, 0.0], &[0.0, 1.0]);
        let cap = cut_cap(&fit, 0.5, 0).unwrap();
        let pair = cap.rim.pair();
        let mut xs: Vec<f64> = pair.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_relative_eq!(xs[0], -0.5, epsilon = 1e-15);
        assert_relative_eq!(xs[1], 0.5, epsilon = 1e-15);
        assert!(pair.iter().all(|p| p[1] == 0.0));
    }

    #[test]
    fn delta_limits_enforced() {
        let fit = unit_circle_fit(&[1.0, 0.0]);
        // Over the fit's epsilon budget.
        let over_eps = cut_cap(&fit, 1.5, 0).unwrap_err();
        assert!(matches!(over_eps, Error::DeltaTooLarge { .. }));

        // Over the sphere diameter: shrink the circle so 2r < delta <= eps.
        let small = SphereFit {
            sphere: GeneralizedSphere::Round {
                center: dv(&[0.0, 0.0]),
                radius: 0.1,
                apex: dv(&[0.1, 0.0]),
            },
            diagnostics: FitDiagnostics {
                condition_estimate: 1.0,
                residual_max: 0.0,
                epsilon_used: 1.0,
            },
        };
        let over_diam = cut_cap(&small, 0.5, 0).unwrap_err();
        match over_diam {
            Error::DeltaTooLarge { limit, .. } => assert_relative_eq!(limit, 0.2),
            other => panic!("expected DeltaTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn apex_must_lie_on_sphere() {
        let fit = unit_circle_fit(&[1.5, 0.0]);
        let err = cut_cap(&fit, 0.1, 0).unwrap_err();
        assert!(matches!(err, Error::ApexNotOnSphere { .. }));
    }

    #[test]
    fn rim_chord_distance_matches_delta_in_3d() {
        let fit = SphereFit {
            sphere: GeneralizedSphere::Round {
                center: dv(&[0.0, 0.0, 0.0]),
                radius: 2.0,
                apex: dv(&[0.0, 0.0, 2.0]),
            },
            diagnostics: FitDiagnostics {
                condition_estimate: 1.0,
                residual_max: 0.0,
                epsilon_used: 1.0,
            },
        };
        let cap = cut_cap(&fit, 0.3, 0).unwrap();
        for phi in [0.0, 1.0, 2.5, 4.0] {
            let p = cap.rim.azimuth_point(phi);
            assert_relative_eq!((&p - &cap.apex).norm(), 0.3, epsilon = 1e-12);
            assert!(sphere_residual(&cap.sphere, &p).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn horizontal_cut_of_unit_circle() {
        let fit = unit_circle_fit(&[1.0, 0.0]);
        let pts = hyperplane_cut_point(&fit.sphere, 1, 0.0).unwrap();
        assert_relative_eq!(pts[0][0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(pts[1][0], 1.0, epsilon = 1e-15);
        assert!(hyperplane_cut_point(&fit.sphere, 1, 2.0).is_err());
    }

    /// The first fit of the worked three-point example: apex at the origin
    /// with neighbors (1,0) and (0,1), contraction 1e-2, cut at height 1e-3.
    /// The smaller root has the closed form (eps - sqrt(eps^2 - 4 delta^2 +
    /// 4 eps delta)) / 2.
    #[test]
    fn first_fit_cut_matches_closed_form() {
        let eps = 1e-2;
        let delta = 1e-3;
        let fit = osculating_sphere(
            &dv(&[0.0, 0.0]),
            &[dv(&[1.0, 0.0]), dv(&[0.0, 1.0])],
            eps,
        )
        .unwrap();
        let pts = hyperplane_cut_point(&fit.sphere, 1, delta).unwrap();
        let expected = (eps - (eps * eps - 4.0 * delta * delta + 4.0 * eps * delta).sqrt()) / 2.0;
        assert_relative_eq!(pts[0][0], expected, epsilon = 1e-15);
        assert_relative_eq!(pts[0][1], delta);
        // Sanity on the magnitude.
        assert_relative_eq!(expected, -8.309518948453007e-4, epsilon = 1e-12);
    }

    #[test]
    fn flat_caps_connect_along_axis() {
        let cap_a = cut_cap(&flat_fit(&[0.0, 0.0], &[0.0, 1.0]), 0.1, 0).unwrap();
        let cap_b = cut_cap(&flat_fit(&[1.0, 0.0], &[0.0, 1.0]), 0.1, 1).unwrap();
        let cyl = connect_cylinder(&cap_a, &cap_b).unwrap();
        assert_relative_eq!(cyl.rim_point_i[0], 0.1, epsilon = 1e-15);
        assert_relative_eq!(cyl.rim_point_j[0], 0.9, epsilon = 1e-15);
        assert_eq!(cyl.rim_point_i[1], 0.0);
        let (a1, a2) = cyl.line.unwrap();
        assert_relative_eq!(a1, 0.0);
        assert_relative_eq!(a2, 0.0);
    }

    #[test]
    fn overlapping_caps_rejected() {
        let cap_a = cut_cap(&flat_fit(&[0.0, 0.0], &[0.0, 1.0]), 0.1, 0).unwrap();
        let cap_b = cut_cap(&flat_fit(&[0.15, 0.0], &[0.0, 1.0]), 0.1, 1).unwrap();
        let err = connect_cylinder(&cap_a, &cap_b).unwrap_err();
        assert!(matches!(err, Error::CapsOverlap { .. }));
    }

    /// Two unit circles placed generically: the connector must land on both
    /// rims and, by the analytic segment-circle intersection count, stay out
    /// of both cap interiors.
    #[test]
    fn random_circle_connector_avoids_cap_interiors() {
        let mk = |center: [f64; 2], apex: [f64; 2]| SphereFit {
            sphere: GeneralizedSphere::Round {
                center: dv(&center),
                radius: 1.0,
                apex: dv(&apex),
            },
            diagnostics: FitDiagnostics {
                condition_estimate: 1.0,
                residual_max: 0.0,
                epsilon_used: 1.0,
            },
        };
        let delta = 0.2;
        let cap_a = cut_cap(&mk([0.0, 0.0], [1.0, 0.0]), delta, 0).unwrap();
        let cap_b = cut_cap(&mk([4.0, 1.0], [3.0, 1.0]), delta, 1).unwrap();
        let cyl = connect_cylinder(&cap_a, &cap_b).unwrap();

        for (cap, pt) in [(&cap_a, &cyl.rim_point_i), (&cap_b, &cyl.rim_point_j)] {
            assert!(sphere_residual(&cap.sphere, pt).unwrap().abs() < 1e-9);
            assert_relative_eq!((pt - &cap.apex).norm(), delta, epsilon = 1e-9);
        }

        // Analytic line-circle intersection, counting interior hits within
        // the cap (distance < delta to the apex), excluding the endpoints.
        let mut hits = 0;
        for cap in [&cap_a, &cap_b] {
            let (c, r) = match &cap.sphere {
                GeneralizedSphere::Round { center, radius, .. } => (center.clone(), *radius),
                _ => unreachable!(),
            };
            let a = &cyl.rim_point_i;
            let b = &cyl.rim_point_j;
            let d = b - a;
            let f = a - &c;
            let qa = d.norm_squared();
            let qb = 2.0 * f.dot(&d);
            let qc = f.norm_squared() - r * r;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                continue;
            }
            for sgn in [-1.0, 1.0] {
                let t = (-qb + sgn * disc.sqrt()) / (2.0 * qa);
                if t > 1e-6 && t < 1.0 - 1e-6 {
                    let x = a + &d * t;
                    if (&x - &cap.apex).norm() < cap.delta {
                        hits += 1;
                    }
                }
            }
        }
        assert_eq!(hits, 0);
    }

    fn fits_for(cloud: &PointCloud, eps: f64) -> Vec<SphereFit> {
        let graph = knn(cloud).unwrap();
        (0..cloud.len())
            .map(|i| {
                let neighbors: Vec<DVector<f64>> = graph.neighbors(i).iter().map(|&j| cloud.point(j).clone()).collect();
                osculating_sphere(cloud.point(i), &neighbors, eps).unwrap()
            })
            .collect()
    }

    fn build(cloud: &PointCloud, cfg: &RunConfig) -> Hypersurface {
        let fits = fits_for(cloud, cfg.epsilon);
        let caps: Vec<HyperCap> = fits
            .iter()
            .enumerate()
            .map(|(i, f)| cut_cap(f, cfg.delta, i).unwrap())
            .collect();
        let plan = select_path(cloud, cfg.closure).unwrap();
        let cylinders: Vec<CylinderSegment> = plan
            .order
            .windows(2)
            .map(|w| connect_cylinder(&caps[w[0]], &caps[w[1]]).unwrap())
            .collect();
        let strips = closing_strip(&plan, &caps, cfg).unwrap();
        assemble(caps, cylinders, strips, &plan, cfg).unwrap()
    }

    fn right_triangle_cloud() -> PointCloud {
        PointCloud::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn three_point_loop_counts() {
        let cfg = RunConfig {
            epsilon: 1e-2,
            delta: 1e-3,
            ..RunConfig::default()
        }
        .validated()
        .unwrap();
        let surface = build(&right_triangle_cloud(), &cfg);
        assert_eq!(surface.caps.len(), 3);
        assert_eq!(surface.cylinders.len(), 2);
        assert_eq!(surface.strips.len(), 1);
        assert_eq!(surface.component_count(), 6);

        // The polyline passes through every data point exactly, and each
        // apex sits on its own fitted circle.
        let mesh = match &surface.mesh {
            SurfaceMesh::Polyline(m) => m,
            _ => panic!("plane assembly must carry a polyline mesh"),
        };
        for cap in &surface.caps {
            assert_eq!(
                mesh.distance_to_point(Vector2::new(cap.apex[0], cap.apex[1])),
                0.0
            );
            assert!(sphere_residual(&cap.sphere, &cap.apex).unwrap().abs() < 1e-9);
        }
        assert_eq!(mesh.connected_components(), 1);
    }

    #[test]
    fn three_point_infinity_counts() {
        let cfg = RunConfig {
            epsilon: 1e-2,
            delta: 1e-3,
            closure: Closure::Infinity,
            ..RunConfig::default()
        }
        .validated()
        .unwrap();
        let surface = build(&right_triangle_cloud(), &cfg);
        assert_eq!(surface.component_count(), 7);
        assert_eq!(surface.strips.len(), 2);
        assert!(surface
            .strips
            .iter()
            .all(|s| s.kind == StripKind::ToInfinity && s.cap_b.is_none()));
    }

    #[test]
    fn two_point_infinity_chain() {
        // Two points cannot support a neighbor fit in the plane, so the
        // caps come from flat fits directly.
        let cloud = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let cfg = RunConfig {
            epsilon: 1e-2,
            delta: 1e-3,
            closure: Closure::Infinity,
            ..RunConfig::default()
        }
        .validated()
        .unwrap();
        let cap_a = cut_cap(&flat_fit(&[0.0, 0.0], &[0.0, 1.0]), cfg.delta, 0).unwrap();
        let cap_b = cut_cap(&flat_fit(&[1.0, 0.0], &[0.0, 1.0]), cfg.delta, 1).unwrap();
        let plan = select_path(&cloud, Closure::Infinity).unwrap();
        let cyl = connect_cylinder(&cap_a, &cap_b).unwrap();
        let strips = closing_strip(&plan, &[cap_a.clone(), cap_b.clone()], &cfg).unwrap();
        let surface = assemble(vec![cap_a, cap_b], vec![cyl], strips, &plan, &cfg).unwrap();
        assert_eq!(surface.caps.len(), 2);
        assert_eq!(surface.cylinders.len(), 1);
        assert_eq!(surface.strips.len(), 2);
        let mesh = match &surface.mesh {
            SurfaceMesh::Polyline(m) => m,
            _ => panic!("expected polyline"),
        };
        // Chain is connected and its only free ends are the two truncated
        // strip tips.
        assert_eq!(mesh.connected_components(), 1);
        assert_eq!(mesh.free_endpoints().len(), 2);
    }

    #[test]
    fn circle_loop_membership() {
        let n = 10;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                vec![5.0 * t.cos(), 5.0 * t.sin()]
            })
            .collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let cfg = RunConfig::default().validated().unwrap();
        let surface = build(&cloud, &cfg);
        let (_, ball) = cloud.bounding_ball();
        for p in cloud.points() {
            let d = surface.mesh.distance_to(p).unwrap();
            assert!(d <= 1e-9 * ball, "point off the mesh by {d:.3e}");
        }
        // On-circle data fits the generating circle exactly.
        for cap in &surface.caps {
            match &cap.sphere {
                GeneralizedSphere::Round { radius, .. } => {
                    // Radius of the contracted fit scales with epsilon.
                    assert_relative_eq!(radius / cfg.epsilon, 5.0, epsilon = 1e-6);
                }
                _ => panic!("on-circle fit must be round"),
            }
        }
    }

    #[test]
    fn loop_strip_detours_outside_ball() {
        let cfg = RunConfig {
            epsilon: 1e-2,
            delta: 1e-3,
            ..RunConfig::default()
        }
        .validated()
        .unwrap();
        let cloud = right_triangle_cloud();
        let surface = build(&cloud, &cfg);
        let (center, ball) = cloud.bounding_ball();
        let strip = &surface.strips[0];
        // Interior route stations (not the rim attachments) stay outside.
        for p in &strip.route[1..strip.route.len() - 1] {
            assert!((p - &center).norm() > ball);
        }
    }

    #[test]
    fn assembly_count_mismatch_detected() {
        let cfg = RunConfig {
            epsilon: 1e-2,
            delta: 1e-3,
            ..RunConfig::default()
        }
        .validated()
        .unwrap();
        let cloud = right_triangle_cloud();
        let fits = fits_for(&cloud, cfg.epsilon);
        let caps: Vec<HyperCap> = fits
            .iter()
            .enumerate()
            .map(|(i, f)| cut_cap(f, cfg.delta, i).unwrap())
            .collect();
        let plan = select_path(&cloud, Closure::Loop).unwrap();
        let cylinders: Vec<CylinderSegment> = plan
            .order
            .windows(2)
            .map(|w| connect_cylinder(&caps[w[0]], &caps[w[1]]).unwrap())
            .collect();
        // Drop the strip entirely.
        let err = assemble(caps, cylinders, vec![], &plan, &cfg).unwrap_err();
        assert!(matches!(err, Error::ComponentMismatch { .. }));
    }

    fn sphere_cloud(n: usize) -> PointCloud {
        // Deterministic well-separated points on the unit sphere.
        let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                vec![r * t.cos(), r * t.sin(), z]
            })
            .collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    #[test]
    fn spatial_assembly_band_structure() {
        let cloud = sphere_cloud(8);
        let cfg = RunConfig {
            epsilon: 1e-2,
            delta: 1e-3,
            ..RunConfig::default()
        }
        .validated()
        .unwrap();
        let surface = build(&cloud, &cfg);
        let mesh = match &surface.mesh {
            SurfaceMesh::Triangles(m) => m,
            _ => panic!("spatial assembly must carry a triangle mesh"),
        };
        // One connected band; the chain of caps, cylinders, and the loop
        // strip closes into an annulus-like complex.
        assert_eq!(mesh.connected_components(), 1);
        assert_eq!(mesh.euler_characteristic(), 0);
        assert!(!mesh.free_edges().is_empty());
        // Every apex is a mesh vertex.
        for p in cloud.points() {
            assert_eq!(surface.mesh.distance_to(p).unwrap(), 0.0);
        }
        assert_eq!(surface.component_count(), 8 + 7 + 1);
    }

    #[test]
    fn spatial_infinity_has_free_strip_ends() {
        let cloud = sphere_cloud(8);
        let cfg = RunConfig {
            epsilon: 1e-2,
            delta: 1e-3,
            closure: Closure::Infinity,
            ..RunConfig::default()
        }
        .validated()
        .unwrap();
        let surface = build(&cloud, &cfg);
        assert_eq!(surface.strips.len(), 2);
        let mesh = match &surface.mesh {
            SurfaceMesh::Triangles(m) => m,
            _ => panic!("expected triangles"),
        };
        assert_eq!(mesh.connected_components(), 1);
        // A truncated band chain deformation-retracts to a segment.
        assert_eq!(mesh.euler_characteristic(), 1);
    }

    #[test]
    fn four_dim_assembly_is_abstract() {
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let t = i as f64;
                vec![t, (t * 0.7).sin(), (t * 0.3).cos(), 0.1 * t * t]
            })
            .collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let cfg = RunConfig {
            epsilon: 1e-2,
            delta: 1e-3,
            ..RunConfig::default()
        }
        .validated()
        .unwrap();
        let surface = build(&cloud, &cfg);
        assert!(!surface.mesh.is_present());
        assert_eq!(surface.mesh.dim(), 4);
        assert_eq!(surface.component_count(), 6 + 5 + 1);
        // Rim data still lives in full dimension.
        assert_eq!(surface.caps[0].rim.basis.len(), 3);
    }
}
