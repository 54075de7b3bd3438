//! Low-level 2D/3D predicates shared by path selection, assembly, and
//! verification: segment intersection classification, point-element
//! distances, triangle-triangle intersection, and axis-aligned boxes.

use nalgebra::{Vector2, Vector3};

/// Twice the signed area of triangle (a, b, c); > 0 for counterclockwise.
pub fn orient2d(a: Vector2<f64>, b: Vector2<f64>, c: Vector2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// How two 2D segments meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegContact {
    /// Disjoint.
    None,
    /// Contact at a single point that is an endpoint of at least one segment.
    Touch,
    /// Interiors cross transversally.
    Cross,
    /// Collinear with an overlap of positive length.
    Overlap,
}

/// Classify the contact of segments `p1q1` and `p2q2`. Orientation signs are
/// deadened below `eps_rel` times the local scale, so shallow grazes classify
/// as touches rather than crossings.
pub fn seg2_contact(
    p1: Vector2<f64>,
    q1: Vector2<f64>,
    p2: Vector2<f64>,
    q2: Vector2<f64>,
    eps_rel: f64,
) -> SegContact {
    let scale = (q1 - p1).norm().max((q2 - p2).norm()).max(1e-300);
    let eps = eps_rel * scale * scale; // orient2d is quadratic in length
    let d1 = orient2d(p2, q2, p1);
    let d2 = orient2d(p2, q2, q1);
    let d3 = orient2d(p1, q1, p2);
    let d4 = orient2d(p1, q1, q2);
    let s1 = sign_with_eps(d1, eps);
    let s2 = sign_with_eps(d2, eps);
    let s3 = sign_with_eps(d3, eps);
    let s4 = sign_with_eps(d4, eps);

    if s1 != 0 && s2 != 0 && s3 != 0 && s4 != 0 {
        if s1 != s2 && s3 != s4 {
            return SegContact::Cross;
        }
        return SegContact::None;
    }

    // Some orientation vanished: collinear or endpoint contact.
    if s1 == 0 && s2 == 0 {
        // Fully collinear: measure the parameter overlap along the longer axis.
        let dir = q1 - p1;
        let axis = if dir.x.abs() >= dir.y.abs() { 0 } else { 1 };
        let (mut a0, mut a1) = (p1[axis], q1[axis]);
        let (mut b0, mut b1) = (p2[axis], q2[axis]);
        if a0 > a1 {
            std::mem::swap(&mut a0, &mut a1);
        }
        if b0 > b1 {
            std::mem::swap(&mut b0, &mut b1);
        }
        let lo = a0.max(b0);
        let hi = a1.min(b1);
        let touch_eps = eps_rel * scale;
        if hi - lo > touch_eps {
            return SegContact::Overlap;
        }
        if hi - lo >= -touch_eps {
            return SegContact::Touch;
        }
        return SegContact::None;
    }

    // One endpoint sits on the other segment (or just off its end).
    let on1 = s1 == 0 && within_span(p2, q2, p1, eps_rel * scale);
    let on2 = s2 == 0 && within_span(p2, q2, q1, eps_rel * scale);
    let on3 = s3 == 0 && within_span(p1, q1, p2, eps_rel * scale);
    let on4 = s4 == 0 && within_span(p1, q1, q2, eps_rel * scale);
    if on1 || on2 || on3 || on4 {
        return SegContact::Touch;
    }
    SegContact::None
}

fn sign_with_eps(v: f64, eps: f64) -> i8 {
    if v > eps {
        1
    } else if v < -eps {
        -1
    } else {
        0
    }
}

fn within_span(a: Vector2<f64>, b: Vector2<f64>, p: Vector2<f64>, eps: f64) -> bool {
    let min_x = a.x.min(b.x) - eps;
    let max_x = a.x.max(b.x) + eps;
    let min_y = a.y.min(b.y) - eps;
    let max_y = a.y.max(b.y) + eps;
    p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y
}

pub fn dist_point_seg2(p: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Distance from a point to a (filled) 3D triangle.
pub fn dist_point_tri3(p: Vector3<f64>, a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>) -> f64 {
    // Region classification via barycentric projection; falls back to edge
    // distances outside the face region.
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return (p - (a + ab * t)).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return (p - (a + ac * t)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * t)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + ab * v + ac * w)).norm()
}

/// Separating-axis triangle-triangle intersection test. Candidate axes are
/// both face normals, the nine edge-pair cross directions, and each
/// triangle's in-plane edge normals (which decide coplanar pairs). Built
/// from projections only — no constructed crossing points — so it stays
/// stable on the long near-coplanar slivers that ruled bands produce.
/// Contact shallower than `eps_rel` relative to the triangle scale does not
/// count, so meshes that share vertices numerically do not self-report: an
/// axis whose projections merely graze certifies separation as long as one
/// interval has real extent, while flush coplanar stacks collapse every
/// projection on the normal axis and are left to the in-plane axes, which
/// report genuine overlap.
pub fn tri_tri_intersect(t1: [Vector3<f64>; 3], t2: [Vector3<f64>; 3], eps_rel: f64) -> bool {
    let scale = tri_scale(&t1).max(tri_scale(&t2)).max(1e-300);
    let eps = eps_rel * scale;

    let e1: [Vector3<f64>; 3] = std::array::from_fn(|i| t1[(i + 1) % 3] - t1[i]);
    let e2: [Vector3<f64>; 3] = std::array::from_fn(|i| t2[(i + 1) % 3] - t2[i]);
    let n1 = e1[0].cross(&e1[1]);
    let n2 = e2[0].cross(&e2[1]);

    // Each axis carries the norm product of its generators; an axis much
    // shorter than that is a near-parallel cross with no directional signal.
    let mut axes: Vec<(Vector3<f64>, f64)> = Vec::with_capacity(17);
    axes.push((n1, e1[0].norm() * e1[1].norm()));
    axes.push((n2, e2[0].norm() * e2[1].norm()));
    for u in &e1 {
        for v in &e2 {
            axes.push((u.cross(v), u.norm() * v.norm()));
        }
    }
    for u in &e1 {
        axes.push((n1.cross(u), n1.norm() * u.norm()));
    }
    for v in &e2 {
        axes.push((n2.cross(v), n2.norm() * v.norm()));
    }

    let separated = axes.iter().any(|(a, generators)| {
        let len = a.norm();
        if len <= 1e-9 * generators {
            return false;
        }
        let (lo1, hi1) = project(&t1, a);
        let (lo2, hi2) = project(&t2, a);
        let gap = (lo2 - hi1).max(lo1 - hi2);
        let band = eps * len;
        // A definite gap separates outright; a graze counts only when an
        // interval has real extent, so flush coplanar stacks never pass.
        gap > band || (gap > -band && (hi1 - lo1 > band || hi2 - lo2 > band))
    });
    !separated
}

fn project(t: &[Vector3<f64>; 3], a: &Vector3<f64>) -> (f64, f64) {
    let d0 = a.dot(&t[0]);
    let d1 = a.dot(&t[1]);
    let d2 = a.dot(&t[2]);
    (d0.min(d1).min(d2), d0.max(d1).max(d2))
}

fn tri_scale(t: &[Vector3<f64>; 3]) -> f64 {
    (t[1] - t[0])
        .norm()
        .max((t[2] - t[0]).norm())
        .max((t[2] - t[1]).norm())
}

/// Axis-aligned box in 3D, used to pre-filter the pairwise intersection scan.
#[derive(Debug, Clone, Copy)]
pub struct Aabb3 {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb3 {
    pub fn of_tri(t: &[Vector3<f64>; 3]) -> Self {
        let mut min = t[0];
        let mut max = t[0];
        for p in &t[1..] {
            min = min.inf(p);
            max = max.sup(p);
        }
        Self { min, max }
    }

    pub fn overlaps(&self, other: &Aabb3, margin: f64) -> bool {
        self.min.x <= other.max.x + margin
            && other.min.x <= self.max.x + margin
            && self.min.y <= other.max.y + margin
            && other.min.y <= self.max.y + margin
            && self.min.z <= other.max.z + margin
            && other.min.z <= self.max.z + margin
    }
}
