//! Discretized hypersurface geometry.
//!
//! Dimension 2 meshes are per-component open polylines whose junction
//! vertices coincide bitwise, so adjacency is decidable by exact coordinate
//! equality. Dimension 3 meshes share one vertex buffer; components
//! reference it by index and junctions share indices, so adjacency is index
//! overlap. Dimensions four and up carry no mesh at all.

use nalgebra::{DVector, Vector2, Vector3};
use std::collections::HashMap;

use crate::primitives::{dist_point_seg2, dist_point_tri3};

/// Which assembled component a mesh piece belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentRole {
    /// Cap around the data point with this cloud index.
    Cap { index: usize },
    /// Cylinder between the caps at cloud indices `i` and `j`.
    Cylinder { i: usize, j: usize },
    /// Closing strip number `k` (0 for loop closure; 0 and 1 for infinity).
    Strip { k: usize },
}

impl ComponentRole {
    pub fn is_strip(&self) -> bool {
        matches!(self, ComponentRole::Strip { .. })
    }

    pub fn describe(&self) -> String {
        match self {
            ComponentRole::Cap { index } => format!("cap {index}"),
            ComponentRole::Cylinder { i, j } => format!("cylinder {i}-{j}"),
            ComponentRole::Strip { k } => format!("strip {k}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PolylineComponent {
    pub role: ComponentRole,
    /// Open chain of vertices; consecutive pairs are the segments.
    pub points: Vec<Vector2<f64>>,
}

impl PolylineComponent {
    pub fn segments(&self) -> impl Iterator<Item = (Vector2<f64>, Vector2<f64>)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct PolylineMesh {
    pub components: Vec<PolylineComponent>,
}

/// A segment with its provenance, used by intersection scans.
#[derive(Debug, Clone, Copy)]
pub struct MeshSegment {
    pub component: usize,
    pub a: Vector2<f64>,
    pub b: Vector2<f64>,
}

impl PolylineMesh {
    pub fn all_segments(&self) -> Vec<MeshSegment> {
        let mut out = Vec::new();
        for (ci, comp) in self.components.iter().enumerate() {
            for (a, b) in comp.segments() {
                out.push(MeshSegment { component: ci, a, b });
            }
        }
        out
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(|c| c.length()).sum()
    }

    /// Count of chain endpoints not shared (bitwise) with any other chain
    /// endpoint or interior vertex — the free ends of the curve.
    pub fn free_endpoints(&self) -> Vec<Vector2<f64>> {
        let mut degree: HashMap<(u64, u64), usize> = HashMap::new();
        let key = |p: Vector2<f64>| (p.x.to_bits(), p.y.to_bits());
        for comp in &self.components {
            for (a, b) in comp.segments() {
                *degree.entry(key(a)).or_insert(0) += 1;
                *degree.entry(key(b)).or_insert(0) += 1;
            }
        }
        let mut out = Vec::new();
        for comp in &self.components {
            if comp.points.len() < 2 {
                continue;
            }
            for p in [comp.points[0], *comp.points.last().unwrap()] {
                if degree.get(&key(p)) == Some(&1) {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn distance_to_point(&self, p: Vector2<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for comp in &self.components {
            for (a, b) in comp.segments() {
                best = best.min(dist_point_seg2(p, a, b));
            }
        }
        best
    }

    /// Number of connected pieces under shared-vertex (bitwise) adjacency.
    pub fn connected_components(&self) -> usize {
        let n = self.components.len();
        if n == 0 {
            return 0;
        }
        let key = |p: Vector2<f64>| (p.x.to_bits(), p.y.to_bits());
        let mut owner: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
        for (ci, comp) in self.components.iter().enumerate() {
            for &p in &comp.points {
                owner.entry(key(p)).or_default().push(ci);
            }
        }
        let mut dsu: Vec<usize> = (0..n).collect();
        fn find(dsu: &mut Vec<usize>, i: usize) -> usize {
            if dsu[i] != i {
                let r = find(dsu, dsu[i]);
                dsu[i] = r;
            }
            dsu[i]
        }
        for members in owner.values() {
            for w in members.windows(2) {
                let (a, b) = (find(&mut dsu, w[0]), find(&mut dsu, w[1]));
                if a != b {
                    dsu[a] = b;
                }
            }
        }
        (0..n).map(|i| find(&mut dsu, i)).collect::<std::collections::HashSet<_>>().len()
    }
}

#[derive(Debug, Clone)]
pub struct TriangleComponent {
    pub role: ComponentRole,
    /// Vertex-index triples into the shared buffer, consistently wound
    /// within the component.
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub components: Vec<TriangleComponent>,
}

/// A triangle with its provenance, used by intersection scans.
#[derive(Debug, Clone, Copy)]
pub struct MeshTriangle {
    pub component: usize,
    pub indices: [usize; 3],
}

impl TriangleMesh {
    pub fn all_triangles(&self) -> Vec<MeshTriangle> {
        let mut out = Vec::new();
        for (ci, comp) in self.components.iter().enumerate() {
            for &t in &comp.triangles {
                out.push(MeshTriangle { component: ci, indices: t });
            }
        }
        out
    }

    pub fn corners(&self, t: &MeshTriangle) -> [Vector3<f64>; 3] {
        [
            self.vertices[t.indices[0]],
            self.vertices[t.indices[1]],
            self.vertices[t.indices[2]],
        ]
    }

    /// Incidence count per undirected edge.
    pub fn edge_incidence(&self) -> HashMap<(usize, usize), usize> {
        let mut inc: HashMap<(usize, usize), usize> = HashMap::new();
        for comp in &self.components {
            for t in &comp.triangles {
                for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                    let e = (a.min(b), a.max(b));
                    *inc.entry(e).or_insert(0) += 1;
                }
            }
        }
        inc
    }

    /// Edges bounding exactly one triangle.
    pub fn free_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .edge_incidence()
            .into_iter()
            .filter_map(|(e, c)| (c == 1).then_some(e))
            .collect();
        out.sort_unstable();
        out
    }

    /// Euler characteristic V - E + F over vertices actually referenced.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = std::collections::HashSet::new();
        let mut faces = 0i64;
        for comp in &self.components {
            for t in &comp.triangles {
                used.extend(t.iter().copied());
                faces += 1;
            }
        }
        let edges = self.edge_incidence().len() as i64;
        used.len() as i64 - edges + faces
    }

    pub fn distance_to_point(&self, p: Vector3<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for comp in &self.components {
            for t in &comp.triangles {
                let d = dist_point_tri3(
                    p,
                    self.vertices[t[0]],
                    self.vertices[t[1]],
                    self.vertices[t[2]],
                );
                best = best.min(d);
            }
        }
        best
    }

    /// Number of connected pieces under shared-vertex adjacency.
    pub fn connected_components(&self) -> usize {
        let n = self.components.len();
        if n == 0 {
            return 0;
        }
        let mut owner: HashMap<usize, Vec<usize>> = HashMap::new();
        for (ci, comp) in self.components.iter().enumerate() {
            for t in &comp.triangles {
                for &v in t {
                    owner.entry(v).or_default().push(ci);
                }
            }
        }
        let mut dsu: Vec<usize> = (0..n).collect();
        fn find(dsu: &mut Vec<usize>, i: usize) -> usize {
            if dsu[i] != i {
                let r = find(dsu, dsu[i]);
                dsu[i] = r;
            }
            dsu[i]
        }
        for members in owner.values() {
            for w in members.windows(2) {
                let (a, b) = (find(&mut dsu, w[0]), find(&mut dsu, w[1]));
                if a != b {
                    dsu[a] = b;
                }
            }
        }
        (0..n).map(|i| find(&mut dsu, i)).collect::<std::collections::HashSet<_>>().len()
    }
}

/// Discretization of an assembled hypersurface.
#[derive(Debug, Clone)]
pub enum SurfaceMesh {
    Polyline(PolylineMesh),
    Triangles(TriangleMesh),
    /// No mesh is constructed above dimension 3; checks that need one
    /// report "not verified" instead.
    Absent { dim: usize },
}

impl SurfaceMesh {
    pub fn dim(&self) -> usize {
        match self {
            SurfaceMesh::Polyline(_) => 2,
            SurfaceMesh::Triangles(_) => 3,
            SurfaceMesh::Absent { dim } => *dim,
        }
    }

    pub fn is_present(&self) -> bool {
        !matches!(self, SurfaceMesh::Absent { .. })
    }

    /// Distance from an ambient point to the mesh; `None` when absent.
    pub fn distance_to(&self, p: &DVector<f64>) -> Option<f64> {
        match self {
            SurfaceMesh::Polyline(m) => Some(m.distance_to_point(Vector2::new(p[0], p[1]))),
            SurfaceMesh::Triangles(m) => {
                Some(m.distance_to_point(Vector3::new(p[0], p[1], p[2])))
            }
            SurfaceMesh::Absent { .. } => None,
        }
    }
}
