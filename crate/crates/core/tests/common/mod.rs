//! Reference computations shared by the test targets.

use nalgebra::{DMatrix, Schur};

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `(XᵀX ± γ²I)⁻¹ XᵀY` with plain loops.
pub fn brute_force_ridge(x: &DMatrix<f64>, y: &DMatrix<f64>, gamma: f64, sign: f64) -> Vec<Vec<f64>> {
    let (rows, cols) = x.shape();
    let mut gram = vec![vec![0.0; cols]; cols];
    for i in 0..cols {
        for j in 0..cols {
            gram[i][j] = (0..rows).map(|r| x[(r, i)] * x[(r, j)]).sum();
        }
        gram[i][i] += sign * gamma * gamma;
    }
    let inv = gauss_jordan_inverse(&gram);
    let mut xty = vec![vec![0.0; y.ncols()]; cols];
    for i in 0..cols {
        for o in 0..y.ncols() {
            xty[i][o] = (0..rows).map(|r| x[(r, i)] * y[(r, o)]).sum();
        }
    }
    (0..cols)
        .map(|i| {
            (0..y.ncols())
                .map(|o| (0..cols).map(|k| inv[i][k] * xty[k][o]).sum())
                .collect()
        })
        .collect()
}

/// Largest eigenvalue modulus from a full real Schur decomposition.
pub fn schur_radius(m: &DMatrix<f64>) -> f64 {
    Schur::new(m.clone())
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
