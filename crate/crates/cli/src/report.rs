//! JSON report assembly.
//!
//! Key order is insertion order (`serde_json` with `preserve_order`), floats
//! print in shortest round-trip form so a parse-back is bit-exact, and an
//! infinite normalized radius becomes the string `"inf"` — JSON has no float
//! infinity, and `null` would be indistinguishable from an absent value.

use std::path::Path;

use oscul_core::analysis::{LinearityReport, RadiusProfile, StructureAssessment};
use oscul_core::pyramid::Pyramid;
use oscul_core::sphere::GeneralizedSphere;
use oscul_core::surgery::Hypersurface;
use oscul_core::verify::PropertyReport;
use oscul_core::{Closure, ConnectionPlan, RunConfig};
use serde_json::{json, Map, Value};

use crate::CliError;

fn finite_or_inf(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("inf")
    }
}

pub fn config_section(cfg: &RunConfig) -> Value {
    let mut m = Map::new();
    m.insert("epsilon".into(), json!(cfg.epsilon));
    m.insert("delta".into(), json!(cfg.delta));
    let closure = match cfg.closure {
        Closure::Loop => "loop",
        Closure::Infinity => "infinity",
    };
    m.insert("closure".into(), json!(closure));
    m.insert("mesh_resolution".into(), json!(cfg.mesh_resolution));
    if let Some(budget) = cfg.path_move_budget {
        m.insert("path_move_budget".into(), json!(budget));
    }
    m.insert("strip_truncation_factor".into(), json!(cfg.strip_truncation_factor));
    m.insert("seed".into(), json!(cfg.seed));
    m.insert("noise_threshold".into(), json!(cfg.noise_threshold));
    Value::Object(m)
}

pub fn profile_section(profile: &RadiusProfile) -> Value {
    let entries: Vec<Value> = profile
        .entries
        .iter()
        .map(|e| {
            let mut m = Map::new();
            m.insert("index".into(), json!(e.index));
            m.insert("normalized_radius".into(), finite_or_inf(e.normalized_radius));
            m.insert("curvature".into(), json!(e.curvature));
            m.insert("neighbor_scale".into(), json!(e.neighbor_scale));
            Value::Object(m)
        })
        .collect();
    Value::Array(entries)
}

pub fn structure_section(
    assessment: &StructureAssessment,
    profile: &RadiusProfile,
) -> Value {
    let mut m = Map::new();
    m.insert("score".into(), json!(assessment.score));
    m.insert("label".into(), json!(assessment.label.as_str()));
    if !profile.failures.is_empty() {
        let failed: Vec<Value> = profile
            .failures
            .iter()
            .map(|(i, reason)| json!({ "index": i, "reason": reason }))
            .collect();
        m.insert("failed_points".into(), Value::Array(failed));
    }
    Value::Object(m)
}

pub fn linearity_section(report: &LinearityReport) -> Value {
    let mut m = Map::new();
    m.insert("is_linear".into(), json!(report.is_linear));
    m.insert("flat_fraction".into(), json!(report.flat_fraction));
    if let Some(GeneralizedSphere::Flat { normal, offset, .. }) = &report.hyperplane {
        let coords: Vec<f64> = normal.iter().copied().collect();
        m.insert("hyperplane".into(), json!({ "normal": coords, "offset": offset }));
    }
    if let Some(residual) = report.residual {
        m.insert("residual".into(), json!(residual));
    }
    Value::Object(m)
}

pub fn properties_section(report: &PropertyReport, retried: bool) -> Value {
    let mut m = Map::new();
    m.insert("local_dimension".into(), json!(report.local_dimension));
    if let Some(b) = report.has_boundary {
        m.insert("has_boundary".into(), json!(b));
    }
    if let Some(b) = report.orientable {
        m.insert("orientable".into(), json!(b));
    }
    if let Some(b) = report.injective {
        m.insert("injective".into(), json!(b));
    }
    m.insert("bounded".into(), json!(report.bounded));
    if let Some(b) = report.compact {
        m.insert("compact".into(), json!(b));
    }
    if retried {
        m.insert("path_reselected".into(), json!(true));
    }
    if !report.violations.is_empty() {
        m.insert("violations".into(), json!(report.violations));
    }
    Value::Object(m)
}

pub fn components_section(surface: &Hypersurface, plan: &ConnectionPlan) -> Value {
    let mut m = Map::new();
    m.insert("caps".into(), json!(surface.caps.len()));
    m.insert("cylinders".into(), json!(surface.cylinders.len()));
    m.insert("strips".into(), json!(surface.strips.len()));
    m.insert("order".into(), json!(plan.order));
    m.insert("path_moves_used".into(), json!(plan.moves_used));
    Value::Object(m)
}

pub fn pyramid_section(pyramid: &Pyramid) -> Value {
    let levels: Vec<Value> = pyramid
        .levels
        .iter()
        .map(|level| {
            let mut m = Map::new();
            m.insert("dim".into(), json!(level.dim));
            m.insert("points".into(), json!(level.cloud.len()));
            if let Some(surface) = &level.surface {
                m.insert(
                    "components".into(),
                    json!({
                        "caps": surface.caps.len(),
                        "cylinders": surface.cylinders.len(),
                        "strips": surface.strips.len(),
                    }),
                );
            }
            Value::Object(m)
        })
        .collect();
    json!({ "levels": levels })
}

/// Assemble the report document in its fixed key order, skipping absent
/// sections.
pub fn build_document(sections: Vec<(&'static str, Option<Value>)>) -> Value {
    let mut m = Map::new();
    for (key, value) in sections {
        if let Some(v) = value {
            m.insert(key.into(), v);
        }
    }
    Value::Object(m)
}

/// Serialize with a trailing newline; `None` path writes to stdout.
pub fn write_report(doc: &Value, path: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).expect("report serialization cannot fail");
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::io(format!("writing {}", p.display()), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
