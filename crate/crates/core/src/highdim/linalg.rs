//! Small dense row-major matrix routines.

use crate::error::{RecoveryError, Result};

/// Pivots smaller than this in magnitude are treated as singular.
pub const PIVOT_TOL: f64 = 1e-12;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;

/// `a · x` for a `rows × cols` matrix.
pub fn mat_vec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    a.chunks_exact(cols)
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// `aᵀ · y` for a `rows × cols` matrix.
pub fn mat_t_vec(a: &[f64], rows: usize, cols: usize, y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(y.len(), rows);
    let mut out = vec![0.0; cols];
    for (row, &yi) in a.chunks_exact(cols).zip(y) {
        for (o, r) in out.iter_mut().zip(row) {
            *o += r * yi;
        }
    }
    out
}

/// Product of two square `d × d` matrices.
pub fn mat_mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest singular value, by power iteration on `aᵀa`.
///
/// Iterates until successive unit vectors agree to `1e-10` or `10⁴` rounds
/// have run.
pub fn spectral_norm(a: &[f64], rows: usize, cols: usize) -> Result<f64> {
    if a.len() != rows * cols || cols == 0 {
        return Err(RecoveryError::InvalidArgument(format!(
            "matrix buffer of length {} does not match {rows}x{cols}",
            a.len()
        )));
    }
    // A slightly tilted start avoids being orthogonal to a coordinate-aligned
    // top singular vector.
    let mut x: Vec<f64> = (0..cols).map(|i| 1.0 + i as f64 / cols as f64).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let y = mat_t_vec(a, rows, cols, &mat_vec(a, rows, cols, &x));
        lambda = x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>();
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        let next: Vec<f64> = y.iter().map(|v| v / ny).collect();
        let change = norm(&next.iter().zip(&x).map(|(p, q)| p - q).collect::<Vec<_>>());
        x = next;
        if change <= POWER_TOL {
            let ax = mat_vec(a, rows, cols, &x);
            return Ok(norm(&ax));
        }
    }
    Ok(lambda.max(0.0).sqrt())
}

/// Inverse of a square matrix by Gauss-Jordan elimination with partial
/// pivoting. Fails with a numerical error on a pivot below `1e-12`.
pub fn invert(a: &[f64], d: usize) -> Result<Vec<f64>> {
    if a.len() != d * d {
        return Err(RecoveryError::InvalidArgument(format!(
            "matrix buffer of length {} is not {d}x{d}",
            a.len()
        )));
    }
    let width = 2 * d;
    let mut aug = vec![0.0; d * width];
    for i in 0..d {
        aug[i * width..i * width + d].copy_from_slice(&a[i * d..(i + 1) * d]);
        aug[i * width + d + i] = 1.0;
    }

    for col in 0..d {
        let pivot_row = (col..d)
            .max_by(|&p, &q| aug[p * width + col].abs().total_cmp(&aug[q * width + col].abs()))
            .expect("non-empty pivot range");
        let pivot = aug[pivot_row * width + col];
        if pivot.abs() < PIVOT_TOL {
            return Err(RecoveryError::Numerical(format!(
                "matrix is numerically singular (pivot {pivot:e} in column {col})"
            )));
        }
        if pivot_row != col {
            for j in 0..width {
                aug.swap(pivot_row * width + j, col * width + j);
            }
        }
        for j in 0..width {
            aug[col * width + j] /= pivot;
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let factor = aug[row * width + col];
            if factor != 0.0 {
                for j in 0..width {
                    aug[row * width + j] -= factor * aug[col * width + j];
                }
            }
        }
    }

    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d..(i + 1) * d].copy_from_slice(&aug[i * width + d..(i + 1) * width]);
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_known_matrix() {
        let a = [4.0, 7.0, 2.0, 6.0];
        let inv = invert(&a, 2).unwrap();
        let expected = [0.6, -0.7, -0.2, 0.4];
        for (x, y) in inv.iter().zip(expected) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        assert!(matches!(invert(&[1.0, 2.0, 2.0, 4.0], 2), Err(RecoveryError::Numerical(_))));
    }

    #[test]
    fn spectral_norm_of_diagonal_and_rank_one() {
        let diag = [3.0, 0.0, 0.0, 0.0, -5.0, 0.0, 0.0, 0.0, 1.0];
        assert!((spectral_norm(&diag, 3, 3).unwrap() - 5.0).abs() < 1e-9);
        let rank_one = [1.0, 2.0, 2.0, 4.0];
        assert!((spectral_norm(&rank_one, 2, 2).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(spectral_norm(&[0.0; 4], 2, 2).unwrap(), 0.0);
    }
}
