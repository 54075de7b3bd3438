//! Geometric property checks for an assembled hypersurface: boundary,
//! orientability, injectivity (absence of self-intersections), boundedness,
//! and compactness, summarized in a [`PropertyReport`].
//!
//! Checks that interrogate the discretized mesh are only available through
//! dimension 3; above that they fail with [`Error::NoMesh`], and the
//! aggregate report leaves the corresponding fields empty.

use std::collections::HashMap;

use serde::Serialize;

use crate::config::Closure;
use crate::error::{Error, Result};
use crate::mesh::{PolylineMesh, SurfaceMesh, TriangleMesh};
use crate::parallel;
use crate::primitives::{seg2_contact, tri_tri_intersect, Aabb3, SegContact};
use crate::surgery::Hypersurface;
use crate::tol;

/// Aggregate verification outcome. Mesh-dependent checks are `None` when no
/// mesh exists for the ambient dimension.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    /// Intrinsic dimension of the surface: one below ambient.
    pub local_dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub has_boundary: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orientable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub injective: Option<bool>,
    pub bounded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compact: Option<bool>,
    pub violations: Vec<String>,
}

/// Whether the discretized surface has boundary. In the plane the boundary
/// consists of free polyline endpoints and the side edges of any strip (a
/// strip is a ribbon collapsed to its spine, so its sides are always free);
/// in space it consists of mesh edges with a single incident triangle.
pub fn check_boundary(surface: &Hypersurface) -> Result<bool> {
    match &surface.mesh {
        SurfaceMesh::Polyline(m) => Ok(polyline_has_boundary(m)),
        SurfaceMesh::Triangles(m) => Ok(triangle_has_boundary(m)),
        SurfaceMesh::Absent { dim } => Err(Error::NoMesh {
            dim: *dim,
            check: "boundary",
        }),
    }
}

pub fn polyline_has_boundary(mesh: &PolylineMesh) -> bool {
    !mesh.free_endpoints().is_empty() || mesh.components.iter().any(|c| c.role.is_strip())
}

pub fn triangle_has_boundary(mesh: &TriangleMesh) -> bool {
    !mesh.free_edges().is_empty()
}

/// Whether the surface is orientable. Curves always are; a triangle mesh is
/// checked by propagating a consistent winding across shared edges.
pub fn check_orientability(surface: &Hypersurface) -> Result<bool> {
    match &surface.mesh {
        SurfaceMesh::Polyline(_) => Ok(true),
        SurfaceMesh::Triangles(m) => Ok(orientable_mesh(m)),
        SurfaceMesh::Absent { dim } => Err(Error::NoMesh {
            dim: *dim,
            check: "orientability",
        }),
    }
}

/// Orientability of a triangle mesh via winding propagation. Each interior
/// edge must be traversed in opposite directions by its two triangles once
/// per-triangle flips are chosen; an edge shared by more than two triangles
/// defeats orientation outright.
pub fn orientable_mesh(mesh: &TriangleMesh) -> bool {
    let tris = mesh.all_triangles();
    // Undirected edge -> (triangle, traversed low->high).
    let mut edges: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    for (t, tri) in tris.iter().enumerate() {
        let [a, b, c] = tri.indices;
        for (u, v) in [(a, b), (b, c), (c, a)] {
            let key = (u.min(v), u.max(v));
            edges.entry(key).or_default().push((t, u < v));
        }
    }
    if edges.values().any(|inc| inc.len() > 2) {
        return false;
    }
    // flip[t] in {0,1}; for an interior edge with equal traversal direction
    // the two triangles must disagree in flip, otherwise agree.
    let mut flip: Vec<Option<bool>> = vec![None; tris.len()];
    let mut adjacency: Vec<Vec<(usize, bool)>> = vec![Vec::new(); tris.len()];
    for inc in edges.values() {
        if let [(t1, f1), (t2, f2)] = inc[..] {
            let must_differ = f1 == f2;
            adjacency[t1].push((t2, must_differ));
            adjacency[t2].push((t1, must_differ));
        }
    }
    let mut queue = std::collections::VecDeque::new();
    for start in 0..tris.len() {
        if flip[start].is_some() {
            continue;
        }
        flip[start] = Some(false);
        queue.push_back(start);
        while let Some(t) = queue.pop_front() {
            let ft = flip[t].unwrap();
            for &(u, must_differ) in &adjacency[t] {
                let want = ft ^ must_differ;
                match flip[u] {
                    None => {
                        flip[u] = Some(want);
                        queue.push_back(u);
                    }
                    Some(fu) if fu != want => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

/// Whether the surface is injective: no two non-adjacent mesh elements meet.
/// Adjacency is one ring — elements sharing a junction vertex are allowed to
/// touch there and nowhere else.
pub fn check_injectivity(surface: &Hypersurface) -> Result<bool> {
    Ok(injectivity_collisions(surface)?.is_empty())
}

/// Descriptions of every non-adjacent element contact in the mesh.
pub fn injectivity_collisions(surface: &Hypersurface) -> Result<Vec<String>> {
    match &surface.mesh {
        SurfaceMesh::Polyline(m) => Ok(polyline_collisions(m)),
        SurfaceMesh::Triangles(m) => Ok(triangle_collisions(m)),
        SurfaceMesh::Absent { dim } => Err(Error::NoMesh {
            dim: *dim,
            check: "injectivity",
        }),
    }
}

fn bits2(v: nalgebra::Vector2<f64>) -> (u64, u64) {
    (v.x.to_bits(), v.y.to_bits())
}

/// Pairwise scan of polyline segments. Segments sharing a junction value
/// (bit-identical endpoint) are adjacent; any other contact is a violation.
pub fn polyline_collisions(mesh: &PolylineMesh) -> Vec<String> {
    let segs = mesh.all_segments();
    let n = segs.len();
    let mut found: Vec<Vec<String>> = parallel::filter_map_indexed(n, |i| {
        let si = &segs[i];
        let (ia, ib) = (bits2(si.a), bits2(si.b));
        let mut local = Vec::new();
        for sj in segs.iter().skip(i + 1) {
            let (ja, jb) = (bits2(sj.a), bits2(sj.b));
            if ia == ja || ia == jb || ib == ja || ib == jb {
                continue;
            }
            if seg2_contact(si.a, si.b, sj.a, sj.b, tol::SEGMENT_CROSS_REL) != SegContact::None {
                local.push(format!(
                    "{} segment meets {} segment",
                    mesh.components[si.component].role.describe(),
                    mesh.components[sj.component].role.describe(),
                ));
            }
        }
        (!local.is_empty()).then_some(local)
    });
    let mut out: Vec<String> = found.drain(..).flatten().collect();
    out.sort();
    out.dedup();
    out
}

/// Pairwise scan of mesh triangles with a bounding-box prefilter. Triangles
/// sharing a vertex index are adjacent and exempt.
pub fn triangle_collisions(mesh: &TriangleMesh) -> Vec<String> {
    let tris = mesh.all_triangles();
    let n = tris.len();
    let corners: Vec<[nalgebra::Vector3<f64>; 3]> =
        tris.iter().map(|t| mesh.corners(t)).collect();
    let boxes: Vec<Aabb3> = corners.iter().map(Aabb3::of_tri).collect();
    let scale = mesh
        .vertices
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.norm()))
        .max(1.0);
    let margin = 1e-9 * scale;
    let mut found: Vec<Vec<String>> = parallel::filter_map_indexed(n, |i| {
        let ti = &tris[i];
        let mut local = Vec::new();
        for j in i + 1..n {
            if !boxes[i].overlaps(&boxes[j], margin) {
                continue;
            }
            let tj = &tris[j];
            if ti
                .indices
                .iter()
                .any(|a| tj.indices.contains(a))
            {
                continue;
            }
            if tri_tri_intersect(corners[i], corners[j], tol::SEGMENT_CROSS_REL) {
                local.push(format!(
                    "{} triangle meets {} triangle",
                    mesh.components[ti.component].role.describe(),
                    mesh.components[tj.component].role.describe(),
                ));
            }
        }
        (!local.is_empty()).then_some(local)
    });
    let mut out: Vec<String> = found.drain(..).flatten().collect();
    out.sort();
    out.dedup();
    out
}

/// Whether the represented surface is bounded. The loop closure produces a
/// bounded set; infinity strips stand for unbounded ends, so the surface
/// they close is unbounded even though its truncated mesh is finite.
pub fn check_boundedness(surface: &Hypersurface) -> Result<bool> {
    Ok(surface.closure == Closure::Loop)
}

/// Compactness: bounded with empty boundary. Assembled surfaces always keep
/// free rim arcs or strip sides, so they are never compact; the check exists
/// to certify that, and to classify synthetic closed inputs correctly.
pub fn check_compactness(surface: &Hypersurface) -> Result<bool> {
    let boundary = check_boundary(surface).map_err(|e| match e {
        Error::NoMesh { dim, .. } => Error::NoMesh {
            dim,
            check: "compactness",
        },
        other => other,
    })?;
    Ok(check_boundedness(surface)? && !boundary)
}

/// Run every check and collect the outcome. Mesh-dependent checks degrade
/// to `None` above dimension 3 instead of failing the whole report.
pub fn verify_surface(surface: &Hypersurface) -> Result<PropertyReport> {
    let soften = |r: Result<bool>| -> Result<Option<bool>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::NoMesh { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let has_boundary = soften(check_boundary(surface))?;
    let orientable = soften(check_orientability(surface))?;
    let bounded = check_boundedness(surface)?;
    let compact = soften(check_compactness(surface))?;
    let (injective, mut violations) = match injectivity_collisions(surface) {
        Ok(hits) => {
            let ok = hits.is_empty();
            (Some(ok), hits)
        }
        Err(Error::NoMesh { .. }) => (None, Vec::new()),
        Err(e) => return Err(e),
    };
    if violations.len() > 8 {
        let extra = violations.len() - 8;
        violations.truncate(8);
        violations.push(format!("and {extra} further contacts"));
    }
    if orientable == Some(false) {
        violations.push("mesh admits no consistent orientation".into());
    }
    Ok(PropertyReport {
        local_dimension: surface.dim() - 1,
        has_boundary,
        orientable,
        injective,
        bounded,
        compact,
        violations,
    })
}
