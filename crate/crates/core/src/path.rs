//! Visit-order selection: a simple open path through the cloud that the
//! assembly stage threads cylinders along.
//!
//! Construction is greedy nearest-neighbor from a deterministic start,
//! followed by 2-opt refinement: in the plane the refinement removes edge
//! crossings (each uncrossing shortens the path, so it terminates); in higher
//! dimensions it minimizes length, which is the only meaningful proxy since
//! generic segments there never intersect. Accepted reversals are capped by a
//! move budget; a path still self-intersecting afterwards is an error, not a
//! silent degradation.

use nalgebra::{DVector, Vector2};

use crate::cloud::PointCloud;
use crate::config::Closure;
use crate::error::{Error, Result};
use crate::primitives::{seg2_contact, SegContact};

/// Planned traversal of the cloud plus end-closure data.
#[derive(Debug, Clone)]
pub struct ConnectionPlan {
    /// Point indices in visit order; every index appears exactly once.
    pub order: Vec<usize>,
    pub closure: Closure,
    /// Unit vector from the centroid through the farther endpoint; present
    /// only for infinity closure.
    pub infinity_direction: Option<DVector<f64>>,
    /// Accepted 2-opt reversals during refinement.
    pub moves_used: usize,
}

impl ConnectionPlan {
    /// Consecutive index pairs along the path.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.order.windows(2).map(|w| (w[0], w[1]))
    }

    /// First and last visited point index.
    pub fn endpoints(&self) -> (usize, usize) {
        (self.order[0], *self.order.last().unwrap())
    }
}

/// Plan a traversal with the canonical start and the default move budget.
pub fn select_path(cloud: &PointCloud, closure: Closure) -> Result<ConnectionPlan> {
    select_path_seeded(cloud, closure, 0, None)
}

/// Plan a traversal. `seed` rotates the greedy start along the lexicographic
/// ranking of the points (0 starts at the smallest), which is how a caller
/// retries after a downstream rejection. `move_budget` defaults to `10 * n^2`.
pub fn select_path_seeded(
    cloud: &PointCloud,
    closure: Closure,
    seed: u64,
    move_budget: Option<usize>,
) -> Result<ConnectionPlan> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::TooFewPoints { n, dim: cloud.dim() });
    }
    let budget = move_budget.unwrap_or(10 * n * n);

    let start = seeded_start(cloud, seed);
    let mut order = greedy_order(cloud, start);

    let moves_used = if cloud.dim() == 2 {
        let pts: Vec<Vector2<f64>> = cloud
            .points()
            .iter()
            .map(|p| Vector2::new(p[0], p[1]))
            .collect();
        let moves = two_opt_uncross(&pts, &mut order, budget);
        let crossings = count_crossings(&pts, &order);
        if crossings > 0 {
            return Err(Error::PathNotSimple { budget, crossings });
        }
        moves
    } else {
        two_opt_shorten(cloud, &mut order, budget)
    };

    let infinity_direction = match closure {
        Closure::Loop => None,
        Closure::Infinity => Some(infinity_direction(cloud, &order)?),
    };

    Ok(ConnectionPlan {
        order,
        closure,
        infinity_direction,
        moves_used,
    })
}

/// Start index for the greedy walk: the `seed`-th point in lexicographic
/// ranking, modulo n.
fn seeded_start(cloud: &PointCloud, seed: u64) -> usize {
    let n = cloud.len();
    let offset = (seed % n as u64) as usize;
    if offset == 0 {
        return cloud.lexicographic_min();
    }
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| {
        let pa = &cloud.points()[a];
        let pb = &cloud.points()[b];
        for c in 0..cloud.dim() {
            match pa[c].total_cmp(&pb[c]) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        a.cmp(&b)
    });
    ranked[offset]
}

fn greedy_order(cloud: &PointCloud, start: usize) -> Vec<usize> {
    let n = cloud.len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut current = start;
    order.push(current);
    visited[current] = true;
    for _ in 1..n {
        let here = &cloud.points()[current];
        let mut best: Option<(f64, usize)> = None;
        for (j, visited_j) in visited.iter().enumerate() {
            if *visited_j {
                continue;
            }
            let d2 = (&cloud.points()[j] - here).norm_squared();
            let candidate = (d2, j);
            best = match best {
                None => Some(candidate),
                Some(b) => {
                    if candidate.0.total_cmp(&b.0).then(candidate.1.cmp(&b.1))
                        == std::cmp::Ordering::Less
                    {
                        Some(candidate)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        current = best.unwrap().1;
        order.push(current);
        visited[current] = true;
    }
    order
}

/// Count path self-intersections. Non-adjacent edge pairs count on any
/// contact (a grazing touch already breaks downstream surgery); consecutive
/// edges count only when they double back along a shared line.
fn count_crossings(pts: &[Vector2<f64>], order: &[usize]) -> usize {
    find_crossings(pts, order, usize::MAX).len()
}

fn find_crossings(pts: &[Vector2<f64>], order: &[usize], limit: usize) -> Vec<(usize, usize)> {
    let m = order.len().saturating_sub(1);
    let mut found = Vec::new();
    for a in 0..m {
        for b in (a + 1)..m {
            let (p1, q1) = (pts[order[a]], pts[order[a + 1]]);
            let (p2, q2) = (pts[order[b]], pts[order[b + 1]]);
            let contact = seg2_contact(p1, q1, p2, q2, 1e-12);
            let bad = if b == a + 1 {
                contact == SegContact::Overlap
            } else {
                contact != SegContact::None
            };
            if bad {
                found.push((a, b));
                if found.len() >= limit {
                    return found;
                }
            }
        }
    }
    found
}

/// Remove crossings by reversing the sub-path between the offending edges.
/// Returns the number of accepted reversals.
fn two_opt_uncross(pts: &[Vector2<f64>], order: &mut [usize], budget: usize) -> usize {
    let mut moves = 0;
    while moves < budget {
        let found = find_crossings(pts, order, usize::MAX);
        // Reversal is a no-op for consecutive edges, so only transversal
        // crossings are actionable.
        let Some(&(a, b)) = found.iter().find(|&&(a, b)| b > a + 1) else {
            break;
        };
        order[a + 1..=b].reverse();
        moves += 1;
    }
    moves
}

/// Plain 2-opt length descent for dimensions above two.
fn two_opt_shorten(cloud: &PointCloud, order: &mut [usize], budget: usize) -> usize {
    let n = order.len();
    let pts = cloud.points();
    let scale = cloud.bounding_ball().1.max(1e-300);
    let tol = 1e-12 * scale;
    let dist = |i: usize, j: usize| (&pts[i] - &pts[j]).norm();

    let mut moves = 0;
    'outer: while moves < budget {
        for a in 0..n - 1 {
            for b in (a + 1)..n {
                // Reversing order[a+1..=b] replaces edges (a,a+1) and
                // (b,b+1); the second term drops out for a tail reversal.
                let mut gain = dist(order[a], order[a + 1]) - dist(order[a], order[b]);
                if b + 1 < n {
                    gain += dist(order[b], order[b + 1]) - dist(order[a + 1], order[b + 1]);
                }
                if gain > tol {
                    order[a + 1..=b].reverse();
                    moves += 1;
                    continue 'outer;
                }
            }
        }
        break;
    }
    moves
}

/// Direction for infinity closure: from the centroid through the farther
/// path endpoint, normalized.
fn infinity_direction(cloud: &PointCloud, order: &[usize]) -> Result<DVector<f64>> {
    let (first, last) = (order[0], *order.last().unwrap());
    let centroid = cloud.centroid();
    let d_first = (&cloud.points()[first] - &centroid).norm();
    let d_last = (&cloud.points()[last] - &centroid).norm();
    let pick = if d_last > d_first { last } else { first };
    let dir = &cloud.points()[pick] - &centroid;
    let norm = dir.norm();
    if norm <= 1e-300 {
        return Err(Error::DegeneratePath { i: first, j: last });
    }
    Ok(dir / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud2(rows: &[[f64; 2]]) -> PointCloud {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    /// Chain along the x-axis with a hooked end and one stranded point below:
    /// greedy visits the chain first and the closing edge to the stranded
    /// point crosses the chain, so exactly one uncrossing move is needed.
    fn greedy_crossing_fixture() -> PointCloud {
        cloud2(&[
            [0.0, 0.0],
            [1.0, 0.0],
            [2.0, 0.0],
            [3.0, 0.0],
            [3.5, 1.5],
            [0.5, -1.1],
        ])
    }

    #[test]
    fn two_points_single_edge() {
        let cloud = cloud2(&[[1.0, 0.0], [0.0, 0.0]]);
        let plan = select_path(&cloud, Closure::Loop).unwrap();
        assert_eq!(plan.order, vec![1, 0]);
        assert_eq!(plan.edges().count(), 1);
        assert_eq!(plan.endpoints(), (1, 0));
    }

    #[test]
    fn convex_polygon_walks_the_hull() {
        let n = 12;
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        // Shuffle the input order to decouple indices from angles.
        let shuffled: Vec<[f64; 2]> = (0..n).map(|i| rows[(5 * i + 3) % n]).collect();
        let cloud = cloud2(&shuffled);
        let plan = select_path(&cloud, Closure::Loop).unwrap();

        let pts: Vec<Vector2<f64>> = cloud
            .points()
            .iter()
            .map(|p| Vector2::new(p[0], p[1]))
            .collect();
        assert_eq!(count_crossings(&pts, &plan.order), 0);

        // Evenly spaced points admit exactly one simple shape: consecutive
        // hull positions. Check angular ranks step by +-1 around the circle.
        let rank: Vec<i64> = plan
            .order
            .iter()
            .map(|&i| {
                let p = &cloud.points()[i];
                let ang = p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU);
                (ang / (std::f64::consts::TAU / n as f64)).round() as i64 % n as i64
            })
            .collect();
        let step = (rank[1] - rank[0]).rem_euclid(n as i64);
        assert!(step == 1 || step == n as i64 - 1);
        for w in rank.windows(2) {
            assert_eq!((w[1] - w[0]).rem_euclid(n as i64), step);
        }
    }

    #[test]
    fn greedy_crossing_is_repaired() {
        let cloud = greedy_crossing_fixture();
        // Greedy alone produces the crossing this fixture is built around.
        let greedy = greedy_order(&cloud, cloud.lexicographic_min());
        let pts: Vec<Vector2<f64>> = cloud
            .points()
            .iter()
            .map(|p| Vector2::new(p[0], p[1]))
            .collect();
        assert_eq!(greedy, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(count_crossings(&pts, &greedy), 1);

        let plan = select_path(&cloud, Closure::Loop).unwrap();
        assert_eq!(count_crossings(&pts, &plan.order), 0);
        assert_eq!(plan.moves_used, 1);
        // Uncrossing must shorten the path.
        let len = |order: &[usize]| -> f64 {
            order
                .windows(2)
                .map(|w| (&cloud.points()[w[0]] - &cloud.points()[w[1]]).norm())
                .sum()
        };
        assert!(len(&plan.order) < len(&greedy));
    }

    #[test]
    fn zero_budget_reports_not_simple() {
        let cloud = greedy_crossing_fixture();
        let err = select_path_seeded(&cloud, Closure::Loop, 0, Some(0)).unwrap_err();
        match err {
            Error::PathNotSimple { budget, crossings } => {
                assert_eq!(budget, 0);
                assert_eq!(crossings, 1);
            }
            other => panic!("expected PathNotSimple, got {other:?}"),
        }
    }

    #[test]
    fn collinear_double_back_is_rejected() {
        // Starting mid-line forces the walk to retrace a covered span, which
        // no reversal can repair.
        let cloud = cloud2(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]);
        let ok = select_path_seeded(&cloud, Closure::Loop, 0, None).unwrap();
        assert_eq!(ok.order, vec![0, 1, 2, 3]);
        let err = select_path_seeded(&cloud, Closure::Loop, 1, None).unwrap_err();
        assert!(matches!(err, Error::PathNotSimple { crossings: 1, .. }));
    }

    #[test]
    fn deterministic_for_same_input() {
        let cloud = greedy_crossing_fixture();
        let a = select_path(&cloud, Closure::Loop).unwrap();
        let b = select_path(&cloud, Closure::Loop).unwrap();
        assert_eq!(a.order, b.order);
        assert_eq!(a.moves_used, b.moves_used);
    }

    #[test]
    fn higher_dim_descent_never_lengthens() {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                vec![
                    (i & 1) as f64,
                    ((i >> 1) & 1) as f64,
                    ((i >> 2) & 1) as f64,
                ]
            })
            .collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let greedy = greedy_order(&cloud, cloud.lexicographic_min());
        let plan = select_path(&cloud, Closure::Loop).unwrap();
        let len = |order: &[usize]| -> f64 {
            order
                .windows(2)
                .map(|w| (&cloud.points()[w[0]] - &cloud.points()[w[1]]).norm())
                .sum()
        };
        assert!(plan.len_check_visits_all(8));
        assert!(len(&plan.order) <= len(&greedy) + 1e-12);
    }

    #[test]
    fn infinity_direction_points_at_far_endpoint() {
        let cloud = cloud2(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [10.0, 0.0]]);
        let plan = select_path(&cloud, Closure::Infinity).unwrap();
        let dir = plan.infinity_direction.as_ref().unwrap();
        assert!((dir[0] - 1.0).abs() < 1e-12);
        assert!(dir[1].abs() < 1e-12);
    }

    impl ConnectionPlan {
        fn len_check_visits_all(&self, n: usize) -> bool {
            let mut seen = vec![false; n];
            for &i in &self.order {
                if seen[i] {
                    return false;
                }
                seen[i] = true;
            }
            seen.iter().all(|&s| s)
        }
    }
}
