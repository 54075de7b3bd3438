//! Mesh export: SVG for planar assemblies, OBJ for spatial ones.

use std::fmt::Write as _;
use std::path::Path;

use oscul_core::mesh::ComponentRole;
use oscul_core::surgery::Hypersurface;
use oscul_core::{PointCloud, SurfaceMesh};

use crate::CliError;

fn object_name(role: &ComponentRole) -> String {
    match role {
        ComponentRole::Cap { index } => format!("cap_{index}"),
        ComponentRole::Cylinder { i, j } => format!("cyl_{i}_{j}"),
        ComponentRole::Strip { k } => format!("strip_{k}"),
    }
}

/// Render the polyline mesh plus data-point markers.
///
/// One `<path>` per mesh component, one `<circle>` per data point; the
/// viewBox is the bounding ball of everything drawn, padded 10%.  SVG's y
/// axis points down, so y coordinates are negated on output.
pub fn render_svg(surface: &Hypersurface, cloud: &PointCloud) -> Result<String, CliError> {
    let mesh = match &surface.mesh {
        SurfaceMesh::Polyline(mesh) => mesh,
        _ => {
            return Err(CliError::UnsupportedDimension {
                format: "svg",
                supported: 2,
                got: surface.dim(),
            });
        }
    };
    let mut xs: Vec<(f64, f64)> = Vec::new();
    for comp in &mesh.components {
        xs.extend(comp.points.iter().map(|p| (p.x, p.y)));
    }
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        xs.push((p[0], p[1]));
    }
    let (min_x, max_x) = bounds(xs.iter().map(|p| p.0));
    let (min_y, max_y) = bounds(xs.iter().map(|p| p.1));
    let cx = 0.5 * (min_x + max_x);
    let cy = 0.5 * (min_y + max_y);
    let radius = xs
        .iter()
        .map(|&(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt())
        .fold(0.0_f64, f64::max)
        .max(1e-9);
    let r = 1.1 * radius;
    let stroke = r / 150.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        fmt(cx - r),
        fmt(-cy - r),
        fmt(2.0 * r),
        fmt(2.0 * r)
    );
    for comp in &mesh.components {
        let mut d = String::new();
        for (k, p) in comp.points.iter().enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{}{},{} ", cmd, fmt(p.x), fmt(-p.y));
        }
        let _ = writeln!(
            svg,
            "  <path id=\"{}\" d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\"/>",
            object_name(&comp.role),
            d.trim_end(),
            fmt(stroke)
        );
    }
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        let _ = writeln!(
            svg,
            "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"crimson\"/>",
            fmt(p[0]),
            fmt(-p[1]),
            fmt(r / 100.0)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render the triangle mesh as OBJ: a shared vertex table, then one `o`
/// object per component.
pub fn render_obj(surface: &Hypersurface) -> Result<String, CliError> {
    let mesh = match &surface.mesh {
        SurfaceMesh::Triangles(mesh) => mesh,
        _ => {
            return Err(CliError::UnsupportedDimension {
                format: "obj",
                supported: 3,
                got: surface.dim(),
            });
        }
    };
    let mut obj = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(obj, "v {} {} {}", fmt(v.x), fmt(v.y), fmt(v.z));
    }
    for comp in &mesh.components {
        let _ = writeln!(obj, "o {}", object_name(&comp.role));
        for t in &comp.triangles {
            let _ = writeln!(obj, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
    }
    Ok(obj)
}

/// Export to the format implied by the file extension.
pub fn export_mesh(
    surface: &Hypersurface,
    cloud: &PointCloud,
    path: &Path,
) -> Result<(), CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let content = match ext.as_deref() {
        Some("svg") => render_svg(surface, cloud)?,
        Some("obj") => render_obj(surface)?,
        _ => return Err(CliError::UnknownFormat { path: path.to_path_buf() }),
    };
    std::fs::write(path, content)
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn fmt(x: f64) -> String {
    // Trim float noise for readability; exported geometry is for inspection,
    // not round-tripping.
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn object_names_follow_roles() {
        assert_eq!(object_name(&ComponentRole::Cap { index: 3 }), "cap_3");
        assert_eq!(object_name(&ComponentRole::Cylinder { i: 0, j: 2 }), "cyl_0_2");
        assert_eq!(object_name(&ComponentRole::Strip { k: 1 }), "strip_1");
    }

    #[test]
    fn fmt_trims_trailing_zeros() {
        assert_eq!(fmt(1.5), "1.5");
        assert_eq!(fmt(2.0), "2");
        assert_eq!(fmt(-0.000000), "0");
        assert_eq!(fmt(0.1234567), "0.123457");
    }
}
