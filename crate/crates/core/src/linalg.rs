//! Small dense linear algebra used internally.

use alloc::vec::Vec;

pub(crate) type Vec3 = [f64; 3];
pub(crate) type Mat3 = [[f64; 3]; 3];

pub(crate) fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting. `a` is
/// row-major `n × n`. Returns `None` for a numerically singular system.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            let pivot_row = a[col].clone();
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= factor * src;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

pub(crate) fn solve3(a: &Mat3, b: &Vec3) -> Option<Vec3> {
    let rows = a.iter().map(|r| r.to_vec()).collect();
    let x = solve(rows, b.to_vec())?;
    Some([x[0], x[1], x[2]])
}

/// Singular values of the `n × 3` matrix whose rows are `rows`, in
/// descending order, by one-sided Jacobi rotations on its three columns.
pub(crate) fn singular_values_3(rows: &[Vec3]) -> Vec3 {
    let mut cols: [Vec<f64>; 3] = [
        rows.iter().map(|r| r[0]).collect(),
        rows.iter().map(|r| r[1]).collect(),
        rows.iter().map(|r| r[2]).collect(),
    ];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _sweep in 0..60 {
        let mut rotated = false;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let alpha = dot(&cols[i], &cols[i]);
            let beta = dot(&cols[j], &cols[j]);
            let gamma = dot(&cols[i], &cols[j]);
            if gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) || gamma == 0.0 {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
            let t = if zeta == 0.0 { 1.0 } else { t };
            let c = 1.0 / libm::sqrt(1.0 + t * t);
            let s = c * t;
            let (lo, hi) = cols.split_at_mut(j);
            let (ci, cj) = (&mut lo[i], &mut hi[0]);
            for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
                let (xi, yj) = (*x, *y);
                *x = c * xi - s * yj;
                *y = s * xi + c * yj;
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = [0.0; 3];
    for (s, c) in sv.iter_mut().zip(&cols) {
        *s = libm::sqrt(dot(c, c));
    }
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
