//! Exact k-nearest-neighbor graph with k fixed to the ambient dimension.
//!
//! Brute force by design: distances are exact, rows are independent (and
//! computed in parallel under the `parallel` feature), and ties are broken by
//! the smaller index so the graph is reproducible bit-for-bit.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::parallel;

/// Neighbor table: row `i` lists the indices of the `k = d` nearest other
/// points of point `i`, ascending by distance (ties by index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnGraph {
    rows: Vec<Vec<usize>>,
    k: usize,
}

impl KnnGraph {
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Build the exact k=d neighbor graph. Requires the oversampling condition
/// `n > d` so every point has d distinct others to connect to.
pub fn knn(cloud: &PointCloud) -> Result<KnnGraph> {
    let n = cloud.len();
    let d = cloud.dim();
    if n <= d {
        return Err(Error::TooFewPoints { n, dim: d });
    }
    let rows = parallel::map_indexed(n, |i| knn_row(cloud, i, d));
    Ok(KnnGraph { rows, k: d })
}

/// Sequential twin of [`knn`], exposed for the benchmark suite.
pub fn knn_seq(cloud: &PointCloud) -> Result<KnnGraph> {
    let n = cloud.len();
    let d = cloud.dim();
    if n <= d {
        return Err(Error::TooFewPoints { n, dim: d });
    }
    let rows = parallel::map_indexed_seq(n, |i| knn_row(cloud, i, d));
    Ok(KnnGraph { rows, k: d })
}

fn knn_row(cloud: &PointCloud, i: usize, k: usize) -> Vec<usize> {
    let pi = cloud.point(i);
    let mut dists: Vec<(f64, usize)> = (0..cloud.len())
        .filter(|&j| j != i)
        .map(|j| ((cloud.point(j) - pi).norm_squared(), j))
        .collect();
    // total_cmp is fine: coordinates are validated finite.
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dists.truncate(k);
    dists.into_iter().map(|(_, j)| j).collect()
}
