//! Small dense linear-algebra helpers shared across modules: residual norms,
//! 2x2 eigenvalues, real null spaces, and row-echelon canonicalization.
//!
//! Everything here operates on the tiny matrices this crate produces (rank of
//! the modular data, dimension of an invariant subspace), so plain dense
//! algorithms are always adequate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Largest entry modulus of a complex matrix; the crate's standard residual norm.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of a real matrix.
pub fn max_abs_real(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `max_abs(a - b)` without materializing the difference.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in residual");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Distance of `m` from the identity in the max-entry norm.
pub fn max_abs_vs_identity(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..m.ncols() {
            let target = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            r = r.max((m[(i, j)] - target).norm());
        }
    }
    r
}

/// Eigenvalues of a 2x2 complex matrix by the quadratic formula.
///
/// Returned in a deterministic order: sorted by argument of the eigenvalue in
/// `(-pi, pi]`, ties broken by modulus.
pub fn eig2(m: &DMatrix<Complex64>) -> [Complex64; 2] {
    assert_eq!(m.shape(), (2, 2), "eig2 expects a 2x2 matrix");
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - det.scale(4.0)).sqrt();
    let l1 = (tr + disc).scale(0.5);
    let l2 = (tr - disc).scale(0.5);
    let mut v = [l1, l2];
    v.sort_by(|a, b| {
        a.arg()
            .partial_cmp(&b.arg())
            .unwrap()
            .then(a.norm().partial_cmp(&b.norm()).unwrap())
    });
    v
}

/// Orthonormal basis of the null space of a real matrix, via SVD.
///
/// A right-singular vector belongs to the null space when its singular value
/// is below `rel_tol` times the largest singular value (or below `rel_tol`
/// outright for a zero matrix). The input is padded with zero rows when it is
/// wider than tall so the decomposition exposes the full right-singular basis.
pub fn real_nullspace(a: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let n = a.ncols();
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("SVD with v_t requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let thresh = if sigma_max > 0.0 {
        rel_tol * sigma_max
    } else {
        rel_tol
    };
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= thresh {
            basis.push(v_t.row(i).transpose());
        }
    }
    basis
}

/// In-place reduced row-echelon form with partial pivoting.
///
/// Entries smaller than `zero_tol` are flushed to exact zero after the
/// elimination so downstream consumers see clean sparsity. Returns the pivot
/// column of each nonzero row.
pub fn rref(m: &mut DMatrix<f64>, zero_tol: f64) -> Vec<usize> {
    let (rows, cols) = m.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Partial pivot: largest entry in column c at or below row r.
        let (best_row, best_val) = (r..rows)
            .map(|i| (i, m[(i, c)].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if best_val <= zero_tol {
            continue;
        }
        m.swap_rows(r, best_row);
        let pivot = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= pivot;
        }
        for i in 0..rows {
            if i != r {
                let factor = m[(i, c)];
                if factor != 0.0 {
                    for j in 0..cols {
                        let delta = factor * m[(r, j)];
                        m[(i, j)] -= delta;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    for x in m.iter_mut() {
        if x.abs() <= zero_tol {
            *x = 0.0;
        }
    }
    pivots
}

/// Best rational approximation `p/q` to `x` with `|q| <= max_den`, if it lies
/// within `tol`; computed by the continued-fraction convergent walk.
pub fn snap_to_rational(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        if (x - p1 as f64 / q1 as f64).abs() <= tol {
            return Some((p1, q1));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let recip = 1.0 / frac;
        let a = recip.floor();
        frac = recip - a;
        let p2 = a as i64 * p1 + p0;
        let q2 = a as i64 * q1 + q0;
        if q2 > max_den || q2 <= 0 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    if (x - p1 as f64 / q1 as f64).abs() <= tol && q1 <= max_den {
        Some((p1, q1))
    } else {
        None
    }
}

/// Apply a permutation to rows and columns of a matrix: `out[i][j] = m[p[i]][p[j]]`.
pub fn permute_symmetric(m: &DMatrix<Complex64>, p: &[usize]) -> DMatrix<Complex64> {
    let n = p.len();
    assert_eq!(m.nrows(), n);
    DMatrix::from_fn(n, n, |i, j| m[(p[i], p[j])])
}
