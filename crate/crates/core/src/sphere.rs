//! Circumsphere and osculating-hypersphere fitting.
//!
//! A hypersphere through `d+1` points in `R^d` is recovered from the linear
//! system obtained by subtracting the first point's sphere equation from the
//! others, which eliminates the quadratic term:
//!
//! ```text
//! 2 (p_i - p_0) . c = |p_i|^2 - |p_0|^2        i = 1..d
//! ```
//!
//! The solve runs in coordinates relative to the first point, so the system
//! is `2 q_i . c' = |q_i|^2` with `q_i = p_i - p_0` and `c = p_0 + c'`. That
//! keeps the fit exactly covariant under scaling about the first point, which
//! is what makes the contraction identity below hold to machine precision.
//!
//! The osculating fit at an apex contracts each neighbor toward the apex by a
//! factor `epsilon` before fitting. Contraction is a homothety about the
//! apex, so `radius(eps) = eps * radius(1)` and `center(eps) = apex +
//! eps * (center(1) - apex)`; the epsilon-free quantity `radius(eps)/eps` is
//! the normalized osculating radius used by the diagnostics layer.
//!
//! Nearly affinely dependent inputs produce a `Flat` fit (a hyperplane, the
//! infinite-radius limit) instead of an ill-conditioned sphere.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::tol;

/// A hypersphere or its infinite-radius limit, remembering the data point
/// (apex) it was fitted at.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneralizedSphere {
    Round {
        center: DVector<f64>,
        radius: f64,
        apex: DVector<f64>,
    },
    /// Hyperplane `{ x : <normal, x> = offset }` with unit `normal`.
    Flat {
        normal: DVector<f64>,
        offset: f64,
        apex: DVector<f64>,
    },
}

impl GeneralizedSphere {
    pub fn dim(&self) -> usize {
        match self {
            GeneralizedSphere::Round { center, .. } => center.len(),
            GeneralizedSphere::Flat { normal, .. } => normal.len(),
        }
    }

    pub fn apex(&self) -> &DVector<f64> {
        match self {
            GeneralizedSphere::Round { apex, .. } => apex,
            GeneralizedSphere::Flat { apex, .. } => apex,
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, GeneralizedSphere::Flat { .. })
    }

    /// `1/radius` for a round sphere, `0` for a flat one.
    pub fn curvature(&self) -> f64 {
        match self {
            GeneralizedSphere::Round { radius, .. } => 1.0 / radius,
            GeneralizedSphere::Flat { .. } => 0.0,
        }
    }

    /// Radius as an option; `None` for the flat (infinite) case.
    pub fn radius(&self) -> Option<f64> {
        match self {
            GeneralizedSphere::Round { radius, .. } => Some(*radius),
            GeneralizedSphere::Flat { .. } => None,
        }
    }
}

/// Fit quality bookkeeping attached to every fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    /// Ratio of largest to smallest elimination pivot; `INFINITY` for flat
    /// fits. Always >= 1.
    pub condition_estimate: f64,
    /// Largest |signed residual| of the fit over its own input points.
    pub residual_max: f64,
    /// Contraction factor the fit was performed at; 1 for a plain
    /// circumsphere.
    pub epsilon_used: f64,
}

/// A fitted sphere together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereFit {
    pub sphere: GeneralizedSphere,
    pub diagnostics: FitDiagnostics,
}

impl SphereFit {
    /// `radius / epsilon_used` — the epsilon-free curvature scale.
    /// `None` for flat fits.
    pub fn normalized_radius(&self) -> Option<f64> {
        self.sphere.radius().map(|r| r / self.diagnostics.epsilon_used)
    }
}

/// Contract every neighbor toward the apex: `x' = apex + eps * (x - apex)`.
///
/// `eps = 1` is the identity; `eps` must lie in `(0, 1]`.
pub fn contract_neighbors(
    apex: &DVector<f64>,
    neighbors: &[DVector<f64>],
    epsilon: f64,
) -> Result<Vec<DVector<f64>>> {
    check_epsilon(epsilon)?;
    let mut out = Vec::with_capacity(neighbors.len());
    for n in neighbors {
        if n.len() != apex.len() {
            return Err(Error::DimensionMismatch { expected: apex.len(), got: n.len() });
        }
        out.push(apex + (n - apex) * epsilon);
    }
    Ok(out)
}

/// Circumsphere of a full-dimensional simplex: exactly `d+1` points in `R^d`.
/// The first point is recorded as the apex.
pub fn circumsphere(simplex: &[DVector<f64>]) -> Result<SphereFit> {
    let (apex, rest) = match simplex.split_first() {
        Some(s) => s,
        None => return Err(Error::TooFewPoints { n: 0, dim: 0 }),
    };
    let dim = apex.len();
    if simplex.len() != dim + 1 {
        return Err(Error::DimensionMismatch { expected: dim + 1, got: simplex.len() });
    }
    for p in rest {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
    }
    check_coincident(simplex)?;
    let local: Vec<DVector<f64>> = rest.iter().map(|p| p - apex).collect();
    fit_local(apex, &local, 1.0, simplex)
}

/// Osculating hypersphere at `apex`: circumsphere of the apex and its
/// `d` neighbors contracted toward it by `epsilon`.
pub fn osculating_sphere(
    apex: &DVector<f64>,
    neighbors: &[DVector<f64>],
    epsilon: f64,
) -> Result<SphereFit> {
    check_epsilon(epsilon)?;
    let dim = apex.len();
    if neighbors.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: neighbors.len() });
    }
    for n in neighbors {
        if n.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: n.len() });
        }
    }
    let mut all: Vec<DVector<f64>> = Vec::with_capacity(dim + 1);
    all.push(apex.clone());
    all.extend(neighbors.iter().cloned());
    check_coincident(&all)?;
    // q_i = eps * (n_i - apex): the contracted neighbor in apex coordinates,
    // computed without forming apex + eps*(..) and subtracting it back.
    let local: Vec<DVector<f64>> = neighbors.iter().map(|n| (n - apex) * epsilon).collect();
    let fit_points: Vec<DVector<f64>> = std::iter::once(apex.clone())
        .chain(local.iter().map(|q| apex + q))
        .collect();
    fit_local(apex, &local, epsilon, &fit_points)
}

/// Signed residual of a point against the surface: `|p - c| - r` for a round
/// sphere, `<n, p> - offset` for a flat one. Zero iff on the surface.
pub fn sphere_residual(sphere: &GeneralizedSphere, point: &DVector<f64>) -> Result<f64> {
    if point.len() != sphere.dim() {
        return Err(Error::DimensionMismatch { expected: sphere.dim(), got: point.len() });
    }
    Ok(match sphere {
        GeneralizedSphere::Round { center, radius, .. } => (point - center).norm() - radius,
        GeneralizedSphere::Flat { normal, offset, .. } => normal.dot(point) - offset,
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) || !epsilon.is_finite() {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

fn check_coincident(points: &[DVector<f64>]) -> Result<()> {
    let mut diameter = 0.0_f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            diameter = diameter.max((&points[i] - &points[j]).norm());
        }
    }
    let floor = tol::COINCIDENT_REL * diameter.max(1.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dist = (&points[i] - &points[j]).norm();
            if dist < floor {
                return Err(Error::CoincidentPoints { i, j, dist });
            }
        }
    }
    Ok(())
}

/// Shared fitting core in apex-local coordinates. `local` holds the nonzero
/// offsets `q_i`; `fit_points` are the ambient input points diagnostics are
/// measured against (apex first).
fn fit_local(
    apex: &DVector<f64>,
    local: &[DVector<f64>],
    epsilon_used: f64,
    fit_points: &[DVector<f64>],
) -> Result<SphereFit> {
    let dim = apex.len();
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DVector::zeros(dim);
    for (i, q) in local.iter().enumerate() {
        for j in 0..dim {
            a[(i, j)] = 2.0 * q[j];
        }
        b[i] = q.norm_squared();
    }
    let scale = linalg::max_abs(&a);
    let diameter = simplex_diameter(fit_points);

    let round = match linalg::solve_with_pivots(a, b) {
        Some(sol) if sol.min_pivot >= tol::FLATNESS_PIVOT_REL * scale => Some(sol),
        _ => None,
    };

    if let Some(sol) = round {
        let radius = sol.x.norm();
        if radius <= tol::RADIUS_FLAT_FACTOR * diameter {
            let center = apex + &sol.x;
            let sphere = GeneralizedSphere::Round { center, radius, apex: apex.clone() };
            let residual_max = max_abs_residual(&sphere, fit_points);
            return Ok(SphereFit {
                sphere,
                diagnostics: FitDiagnostics {
                    condition_estimate: sol.max_pivot / sol.min_pivot,
                    residual_max,
                    epsilon_used,
                },
            });
        }
    }

    // Flat limit: best-fit hyperplane of the (nearly affinely dependent)
    // input, anchored to pass exactly through the apex.
    let normal = linalg::least_variance_direction(fit_points);
    let offset = normal.dot(apex);
    let sphere = GeneralizedSphere::Flat { normal, offset, apex: apex.clone() };
    let residual_max = max_abs_residual(&sphere, fit_points);
    Ok(SphereFit {
        sphere,
        diagnostics: FitDiagnostics {
            condition_estimate: f64::INFINITY,
            residual_max,
            epsilon_used,
        },
    })
}

fn simplex_diameter(points: &[DVector<f64>]) -> f64 {
    let mut diameter = 0.0_f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            diameter = diameter.max((&points[i] - &points[j]).norm());
        }
    }
    diameter
}

fn max_abs_residual(sphere: &GeneralizedSphere, points: &[DVector<f64>]) -> f64 {
    points
        .iter()
        .map(|p| sphere_residual(sphere, p).expect("dims checked").abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(coords: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(coords)
    }

    /// Independent oracle: every input point is equidistant from the center.
    fn assert_equidistant(fit: &SphereFit, points: &[DVector<f64>], rel: f64) {
        let (center, radius) = match &fit.sphere {
            GeneralizedSphere::Round { center, radius, .. } => (center, *radius),
            GeneralizedSphere::Flat { .. } => panic!("expected a round fit"),
        };
        for p in points {
            let d = (p - center).norm();
            assert!(
                (d - radius).abs() <= rel * radius.max(1e-300),
                "distance {d} vs radius {radius}"
            );
        }
    }

    fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
        DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_on_sphere(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> DVector<f64> {
        loop {
            let mut p = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0_f64..1.0));
            let n = p.norm();
            if n > 1e-3 {
                p *= radius / n;
                return p;
            }
        }
    }

    #[test]
    fn three_point_circle_fixture() {
        // (0,0), (0,eps), (eps,0) -> center (eps/2, eps/2), radius eps/sqrt(2).
        let eps = 0.01;
        let fit = circumsphere(&[v(&[0.0, 0.0]), v(&[0.0, eps]), v(&[eps, 0.0])]).unwrap();
        match &fit.sphere {
            GeneralizedSphere::Round { center, radius, apex } => {
                assert_relative_eq!(center[0], eps / 2.0, epsilon = 1e-15);
                assert_relative_eq!(center[1], eps / 2.0, epsilon = 1e-15);
                assert_relative_eq!(*radius, eps / 2.0_f64.sqrt(), epsilon = 1e-15);
                assert_eq!(apex, &v(&[0.0, 0.0]));
            }
            _ => panic!("expected round"),
        }
        assert_eq!(fit.diagnostics.epsilon_used, 1.0);
        assert!(fit.diagnostics.condition_estimate >= 1.0);
    }

    #[test]
    fn unit_circle_through_cardinal_points() {
        let fit = circumsphere(&[v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[-1.0, 0.0])]).unwrap();
        match &fit.sphere {
            GeneralizedSphere::Round { center, radius, .. } => {
                assert!(center.norm() < 1e-14);
                assert_relative_eq!(*radius, 1.0, epsilon = 1e-14);
            }
            _ => panic!("expected round"),
        }
    }

    #[test]
    fn collinear_triple_goes_flat() {
        let fit = circumsphere(&[v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[2.0, 0.0])]).unwrap();
        match &fit.sphere {
            GeneralizedSphere::Flat { normal, offset, apex } => {
                assert_relative_eq!(normal[0], 0.0, epsilon = 1e-12);
                assert_relative_eq!(normal[1], 1.0, epsilon = 1e-12);
                assert_relative_eq!(*offset, 0.0, epsilon = 1e-12);
                assert_eq!(apex, &v(&[0.0, 0.0]));
            }
            _ => panic!("expected flat"),
        }
        assert!(fit.diagnostics.condition_estimate.is_infinite());
        assert!(fit.diagnostics.residual_max <= 1e-12);
    }

    #[test]
    fn random_tetrahedra_are_equidistant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut tested = 0;
        while tested < 50 {
            let pts: Vec<_> = (0..4).map(|_| random_point(&mut rng, 3)).collect();
            match circumsphere(&pts) {
                Ok(fit) if !fit.sphere.is_flat() => {
                    if fit.diagnostics.condition_estimate < 1e6 {
                        assert_equidistant(&fit, &pts, 1e-9);
                        tested += 1;
                    }
                }
                _ => {}
            }
        }
    }

    #[test]
    fn contract_identity_and_midpoint() {
        let apex = v(&[0.0, 0.0]);
        let nbrs = vec![v(&[0.0, 1.0])];
        let c = contract_neighbors(&apex, &nbrs, 0.01).unwrap();
        assert_relative_eq!(c[0][1], 0.01, epsilon = 1e-18);
        let id = contract_neighbors(&apex, &nbrs, 1.0).unwrap();
        assert_eq!(id[0], nbrs[0]);
        let mid = contract_neighbors(&v(&[2.0, 2.0]), &[v(&[4.0, 0.0])], 0.5).unwrap();
        assert_eq!(mid[0], v(&[3.0, 1.0]));
    }

    #[test]
    fn contract_rejects_bad_epsilon() {
        let apex = v(&[0.0]);
        let nbrs = vec![v(&[1.0])];
        assert!(matches!(
            contract_neighbors(&apex, &nbrs, 0.0),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            contract_neighbors(&apex, &nbrs, 1.5),
            Err(Error::EpsilonOutOfRange(_))
        ));
    }

    #[test]
    fn first_point_circle_small_epsilon() {
        // Apex (0,0) with neighbors (0,1), (1,0) at eps = 1e-3:
        // center (eps/2, eps/2), radius eps/sqrt(2).
        let eps = 1e-3;
        let fit = osculating_sphere(&v(&[0.0, 0.0]), &[v(&[0.0, 1.0]), v(&[1.0, 0.0])], eps).unwrap();
        match &fit.sphere {
            GeneralizedSphere::Round { center, radius, .. } => {
                assert_relative_eq!(center[0], eps / 2.0, epsilon = 1e-16);
                assert_relative_eq!(center[1], eps / 2.0, epsilon = 1e-16);
                assert_relative_eq!(*radius, eps / 2.0_f64.sqrt(), epsilon = 1e-16);
            }
            _ => panic!("expected round"),
        }
        assert_relative_eq!(fit.normalized_radius().unwrap(), 1.0 / 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    /// Construction-verified regression for the second apex of the standard
    /// right-triangle example: apex (0,1), neighbors (0,0) and (1,0). The
    /// contracted points are (0,1-eps) and (eps,1-eps); the circle through
    /// apex and both is centered at (eps/2, 1-eps/2) with radius eps/sqrt(2)
    /// (monic equation x^2+y^2 - eps*x - (2-eps)*y + (1-eps) = 0), which is
    /// also what scaling the uncontracted circumcircle (center (1/2,1/2),
    /// radius 1/sqrt(2)) about the apex by eps forces.
    #[test]
    fn second_point_circle() {
        let eps = 0.01;
        let apex = v(&[0.0, 1.0]);
        let fit = osculating_sphere(&apex, &[v(&[0.0, 0.0]), v(&[1.0, 0.0])], eps).unwrap();
        match &fit.sphere {
            GeneralizedSphere::Round { center, radius, .. } => {
                assert_relative_eq!(center[0], eps / 2.0, epsilon = 1e-14);
                assert_relative_eq!(center[1], 1.0 - eps / 2.0, epsilon = 1e-14);
                assert_relative_eq!(*radius, eps / 2.0_f64.sqrt(), epsilon = 1e-14);
            }
            _ => panic!("expected round"),
        }
        // The fitted circle passes through its own inputs.
        let contracted = contract_neighbors(&apex, &[v(&[0.0, 0.0]), v(&[1.0, 0.0])], eps).unwrap();
        for p in std::iter::once(&apex).chain(contracted.iter()) {
            assert!(sphere_residual(&fit.sphere, p).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn osculating_equals_circumsphere_of_contracted_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let apex = random_point(&mut rng, 3);
            let nbrs: Vec<_> = (0..3).map(|_| random_point(&mut rng, 3)).collect();
            for &eps in &[1.0, 0.3, 1e-3] {
                let a = match osculating_sphere(&apex, &nbrs, eps) {
                    Ok(f) if !f.sphere.is_flat() => f,
                    _ => continue,
                };
                let mut pts = vec![apex.clone()];
                pts.extend(contract_neighbors(&apex, &nbrs, eps).unwrap());
                let b = match circumsphere(&pts) {
                    Ok(f) if !f.sphere.is_flat() => f,
                    _ => continue,
                };
                let (ca, ra) = match &a.sphere {
                    GeneralizedSphere::Round { center, radius, .. } => (center, *radius),
                    _ => unreachable!(),
                };
                let (cb, rb) = match &b.sphere {
                    GeneralizedSphere::Round { center, radius, .. } => (center, *radius),
                    _ => unreachable!(),
                };
                assert!((ca - cb).norm() <= 1e-10 * ra.max(1.0), "centers differ");
                assert!((ra - rb).abs() <= 1e-10 * ra, "radii differ");
            }
        }
    }

    #[test]
    fn homothety_radius_ratio() {
        // radius(0.6) = 2 * radius(0.3) on the same data.
        let apex = v(&[0.3, -0.2, 0.9]);
        let nbrs = vec![v(&[1.0, 0.2, 0.4]), v(&[-0.5, 0.8, 0.1]), v(&[0.2, -0.9, -0.3])];
        let a = osculating_sphere(&apex, &nbrs, 0.3).unwrap();
        let b = osculating_sphere(&apex, &nbrs, 0.6).unwrap();
        let ra = a.sphere.radius().unwrap();
        let rb = b.sphere.radius().unwrap();
        assert_relative_eq!(rb / ra, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn homothety_center_and_radius_across_epsilons() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for dim in [2usize, 3, 5] {
            for _ in 0..10 {
                let apex = random_point(&mut rng, dim);
                let nbrs: Vec<_> = (0..dim).map(|_| random_point(&mut rng, dim)).collect();
                let base = match osculating_sphere(&apex, &nbrs, 1.0) {
                    Ok(f) if !f.sphere.is_flat() && f.diagnostics.condition_estimate < 1e6 => f,
                    _ => continue,
                };
                let (c1, r1) = match &base.sphere {
                    GeneralizedSphere::Round { center, radius, .. } => (center.clone(), *radius),
                    _ => unreachable!(),
                };
                for &eps in &[0.5, 0.1, 1e-3, 1e-6] {
                    let f = osculating_sphere(&apex, &nbrs, eps).unwrap();
                    let (ce, re) = match &f.sphere {
                        GeneralizedSphere::Round { center, radius, .. } => (center.clone(), *radius),
                        _ => panic!("unexpected flat at eps {eps}"),
                    };
                    assert!((re / eps - r1).abs() <= 1e-10 * r1, "normalized radius drifted");
                    let expect = &apex + (&c1 - &apex) * eps;
                    assert!((ce - expect).norm() <= 1e-10 * (r1 * eps).max(1e-12));
                }
            }
        }
    }

    #[test]
    fn exact_recovery_on_spheres() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for dim in [2usize, 3, 4] {
            for &radius in &[0.5, 1.0, 7.0] {
                for _ in 0..10 {
                    let apex = random_on_sphere(&mut rng, dim, radius);
                    let nbrs: Vec<_> =
                        (0..dim).map(|_| random_on_sphere(&mut rng, dim, radius)).collect();
                    let fit = match osculating_sphere(&apex, &nbrs, 1e-3) {
                        Ok(f) if !f.sphere.is_flat() && f.diagnostics.condition_estimate < 1e6 => f,
                        _ => continue,
                    };
                    assert!(
                        (fit.normalized_radius().unwrap() - radius).abs() <= 1e-9 * radius,
                        "on-sphere recovery failed in dim {dim}"
                    );
                }
            }
        }
    }

    #[test]
    fn perturbed_collinear_is_flat_or_huge() {
        // Bending the middle of a collinear triple by eta < 1e-10 must give
        // either a flat fit or a radius beyond the blow-up threshold.
        for &eta in &[1e-11, 1e-13] {
            let fit = circumsphere(&[v(&[0.0, 0.0]), v(&[1.0, eta]), v(&[2.0, 0.0])]).unwrap();
            match &fit.sphere {
                GeneralizedSphere::Flat { .. } => {}
                GeneralizedSphere::Round { radius, .. } => {
                    assert!(*radius > 1e8, "radius {radius} too small for eta {eta}")
                }
            }
        }
    }

    #[test]
    fn curvature_values() {
        let round = GeneralizedSphere::Round { center: v(&[0.0, 0.0]), radius: 2.0, apex: v(&[2.0, 0.0]) };
        assert_relative_eq!(round.curvature(), 0.5);
        let flat = GeneralizedSphere::Flat { normal: v(&[0.0, 1.0]), offset: 0.0, apex: v(&[0.0, 0.0]) };
        assert_relative_eq!(flat.curvature(), 0.0);
        // eps/sqrt(2) radius -> curvature sqrt(2)/eps ~ 141.42 at eps = 0.01.
        let eps = 0.01;
        let small = GeneralizedSphere::Round {
            center: v(&[eps / 2.0, eps / 2.0]),
            radius: eps / 2.0_f64.sqrt(),
            apex: v(&[0.0, 0.0]),
        };
        assert_relative_eq!(small.curvature(), 2.0_f64.sqrt() / eps, epsilon = 1e-9);
    }

    #[test]
    fn residual_signs_and_zero() {
        let unit = GeneralizedSphere::Round { center: v(&[0.0, 0.0]), radius: 1.0, apex: v(&[1.0, 0.0]) };
        assert_relative_eq!(sphere_residual(&unit, &v(&[2.0, 0.0])).unwrap(), 1.0);
        assert_relative_eq!(sphere_residual(&unit, &v(&[0.0, 1.0])).unwrap(), 0.0);
        assert_relative_eq!(sphere_residual(&unit, &v(&[0.5, 0.0])).unwrap(), -0.5);
        // (eps, 0) lies on the first-point circle of the triangle fixture.
        let eps = 0.01;
        let fit = osculating_sphere(&v(&[0.0, 0.0]), &[v(&[0.0, 1.0]), v(&[1.0, 0.0])], eps).unwrap();
        assert!(sphere_residual(&fit.sphere, &v(&[eps, 0.0])).unwrap().abs() < 1e-12);
    }

    #[test]
    fn residual_dimension_mismatch() {
        let unit = GeneralizedSphere::Round { center: v(&[0.0, 0.0]), radius: 1.0, apex: v(&[1.0, 0.0]) };
        assert!(matches!(
            sphere_residual(&unit, &v(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn coincident_points_rejected() {
        let p = v(&[0.5, 0.5]);
        let err = circumsphere(&[p.clone(), p.clone(), v(&[1.0, 0.0])]).unwrap_err();
        assert!(matches!(err, Error::CoincidentPoints { i: 0, j: 1, .. }));
    }

    #[test]
    fn wrong_cardinality_rejected() {
        let err = circumsphere(&[v(&[0.0, 0.0]), v(&[1.0, 0.0])]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn apex_on_surface_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..30 {
            let apex = random_point(&mut rng, 3);
            let nbrs: Vec<_> = (0..3).map(|_| random_point(&mut rng, 3)).collect();
            if let Ok(fit) = osculating_sphere(&apex, &nbrs, 0.5) {
                let r = sphere_residual(&fit.sphere, &apex).unwrap().abs();
                let scale = fit.sphere.radius().unwrap_or(1.0).max(1.0);
                assert!(r <= 1e-9 * scale);
            }
        }
    }
}
