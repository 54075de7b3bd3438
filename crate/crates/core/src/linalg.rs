//! Small shared numerical kernels: pivoted elimination, orthonormal
//! completions, principal directions, minimal rotations.

use nalgebra::{DMatrix, DVector};

/// Solution of `A x = b` by Gaussian elimination with partial pivoting,
/// together with the smallest and largest pivot magnitudes encountered.
pub struct PivotSolve {
    pub x: DVector<f64>,
    pub min_pivot: f64,
    pub max_pivot: f64,
}

/// Eliminate with partial pivoting. Returns `None` when a pivot is exactly
/// zero (consistent with a singular system); near-singular systems are the
/// caller's business via `min_pivot`.
pub fn solve_with_pivots(mut a: DMatrix<f64>, mut b: DVector<f64>) -> Option<PivotSolve> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    debug_assert_eq!(n, b.len());
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0_f64;
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[(row, col)].abs() > a[(piv, col)].abs() {
                piv = row;
            }
        }
        let p = a[(piv, col)].abs();
        if p == 0.0 {
            return None;
        }
        if piv != col {
            a.swap_rows(piv, col);
            b.swap_rows(piv, col);
        }
        min_pivot = min_pivot.min(p);
        max_pivot = max_pivot.max(p);
        for row in col + 1..n {
            let f = a[(row, col)] / a[(col, col)];
            if f != 0.0 {
                for k in col..n {
                    let v = a[(col, k)];
                    a[(row, k)] -= f * v;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = DVector::zeros(n);
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[(row, k)] * x[k];
        }
        x[row] = s / a[(row, row)];
    }
    Some(PivotSolve { x, min_pivot, max_pivot })
}

/// Largest absolute entry of the matrix; 0 for an empty matrix.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Remove from `v` its components along each (orthonormal) basis vector.
pub fn project_out(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for b in basis {
        let c = v.dot(b);
        v.axpy(-c, b, 1.0);
    }
}

/// Extend `fixed` (orthonormal) to a full orthonormal basis of `R^dim` by
/// Gram-Schmidt over standard basis vectors in index order. Deterministic.
pub fn complete_basis(fixed: &[DVector<f64>], dim: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = fixed.to_vec();
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = DVector::zeros(dim);
        e[i] = 1.0;
        project_out(&mut e, &basis);
        let n = e.norm();
        if n > 1e-8 {
            basis.push(e / n);
        }
    }
    debug_assert_eq!(basis.len(), dim);
    basis
}

/// Unit direction of least variance of the given points (the best-fit
/// hyperplane normal), via SVD of the centered data matrix. Sign is fixed
/// deterministically: the largest-magnitude component is made positive.
pub fn least_variance_direction(points: &[DVector<f64>]) -> DVector<f64> {
    let dim = points[0].len();
    let n = points.len();
    let mut centroid = DVector::zeros(dim);
    for p in points {
        centroid += p;
    }
    centroid /= n as f64;
    let mut m = DMatrix::zeros(n, dim);
    for (i, p) in points.iter().enumerate() {
        let r = p - &centroid;
        for j in 0..dim {
            m[(i, j)] = r[j];
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    // Pick the right-singular vector of the smallest singular value without
    // relying on sort order.
    let mut row = 0;
    for i in 1..svd.singular_values.len() {
        if svd.singular_values[i] < svd.singular_values[row] {
            row = i;
        }
    }
    let mut normal = DVector::zeros(dim);
    for j in 0..dim {
        normal[j] = vt[(row, j)];
    }
    fix_sign(&mut normal);
    normal
}

/// Flip so the largest-magnitude component is positive (ties: first wins).
pub fn fix_sign(v: &mut DVector<f64>) {
    let mut idx = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[idx].abs() {
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        *v = -&*v;
    }
}

/// Apply to `v` the minimal rotation carrying unit vector `a` onto unit
/// vector `b` (identity outside the span of `a`,`b`). Falls back to the
/// identity when `a` and `b` are (anti)parallel within tolerance; callers
/// orient their normals consistently first, so the antiparallel case does
/// not occur on well-formed input.
pub fn rotate_align(a: &DVector<f64>, b: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let c = a.dot(b).clamp(-1.0, 1.0);
    let mut p = b - a * c;
    let pn = p.norm();
    if pn < 1e-14 {
        return v.clone();
    }
    p /= pn;
    let s = pn; // sin of the rotation angle, since |a|=|b|=1
    let va = v.dot(a);
    let vp = v.dot(&p);
    v + &(((c - 1.0) * va - s * vp) * a) + ((c - 1.0) * vp + s * va) * p
}
