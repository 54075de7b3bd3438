//! Numerical geometry for point clouds: per-point osculating hypersphere fits,
//! surgery into δ-caps, assembly of caps + partial hyper-cylinders + closing
//! strips into a hypersurface through the data, geometric verification, an
//! inductive dimension-reduction pyramid, and structure/linearity diagnostics.
//!
//! The crate is data-parallel by default (`parallel` feature, rayon); building
//! with `--no-default-features` yields a fully sequential implementation with
//! the same API and results.

pub mod analysis;
pub mod chart;
pub mod cloud;
pub mod config;
pub mod error;
pub mod knn;
pub mod mesh;
pub mod path;
pub mod pipeline;
pub mod pyramid;
pub mod sphere;
pub mod surgery;
pub mod verify;

mod linalg;
pub mod parallel;
pub(crate) mod primitives;
pub mod tol;

pub use analysis::{linearity_detect, radius_profile, structure_score, LinearityReport, ProfileEntry, RadiusProfile};
pub use chart::{build_chart, represent, Chart};
pub use cloud::PointCloud;
pub use config::{Closure, RunConfig};
pub use error::Error;
pub use knn::{knn, KnnGraph};
pub use mesh::SurfaceMesh;
pub use path::{select_path, select_path_seeded, ConnectionPlan};
pub use pipeline::{build_surface, SurfaceBuild};
pub use pyramid::{induct, Pyramid, PyramidLevel};
pub use sphere::{
    circumsphere, contract_neighbors, osculating_sphere, sphere_residual, FitDiagnostics,
    GeneralizedSphere, SphereFit,
};
pub use surgery::{
    assemble, closing_strip, connect_cylinder, cut_cap, hyperplane_cut_point, CapRim,
    CylinderSegment, HyperCap, HyperStrip, Hypersurface, StripKind,
};
pub use verify::{
    check_boundary, check_boundedness, check_compactness, check_injectivity, check_orientability,
    verify_surface, PropertyReport,
};

/// Cap the rayon worker count from the `OSCUL_THREADS` environment variable.
///
/// `0` or an unset/unparsable value means "auto" (library default). Safe to
/// call more than once; only the first global-pool initialization wins, which
/// is also rayon's own behavior. A no-op without the `parallel` feature.
pub fn init_threads_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("OSCUL_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n > 0 {
                    // Ignore AlreadyInitialized: a second call keeps the first pool.
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    }
}
