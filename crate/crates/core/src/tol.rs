//! Centralized numeric tolerances. Each constant documents what it bounds and
//! the scale it is relative to, so the individual checks stay comparable.

/// Two input points closer than this, relative to the simplex diameter, are
/// treated as coincident and rejected before fitting.
pub const COINCIDENT_REL: f64 = 1e-12;

/// A fit switches to the Flat branch when the smallest elimination pivot
/// falls below this fraction of the matrix scale (the quadratic term of the
/// sphere equation has effectively vanished).
pub const FLATNESS_PIVOT_REL: f64 = 1e-10;

/// A fit also switches to the Flat branch when the solved radius exceeds
/// this multiple of the simplex diameter: the sphere is indistinguishable
/// from its tangent hyperplane at working precision.
pub const RADIUS_FLAT_FACTOR: f64 = 1e8;

/// Maximum |signed residual| at the apex, relative to the fit scale, for a
/// sphere to be considered to pass through its apex.
pub const APEX_ON_SURFACE_REL: f64 = 1e-9;

/// Rim points of a cap must lie on the parent sphere and at the prescribed
/// chord distance from the apex within this absolute slack.
pub const RIM_ABS: f64 = 1e-9;

/// Membership slack for data points on the assembled mesh, relative to the
/// bounding-ball radius.
pub const MEMBERSHIP_REL: f64 = 1e-9;

/// Orthonormality slack for chart frames (dot products and norms).
pub const FRAME_ORTHONORMAL_ABS: f64 = 1e-10;

/// Proper-intersection slack for the d=2 segment predicates, relative to the
/// segment scale: crossings shallower than this are treated as touching.
pub const SEGMENT_CROSS_REL: f64 = 1e-12;
