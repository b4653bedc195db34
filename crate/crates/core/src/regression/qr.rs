//! Householder QR least squares on a column-major design.

/// Outcome of a least-squares solve.
#[derive(Debug, Clone)]
pub(crate) struct QrSolution {
    pub coefficients: Vec<f64>,
    /// Upper-triangular factor, row-major `p x p`.
    pub r: Vec<f64>,
}

/// Rank failure at the given column index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RankDeficient(pub usize);

/// Solves `min ||X b - y||` for a column-major `n x p` matrix.
///
/// A column is rejected when the magnitude of its diagonal entry in `R`
/// falls to `rank_tol` times its original norm or below.
pub(crate) fn solve(
    columns: &[Vec<f64>],
    y: &[f64],
    rank_tol: f64,
) -> Result<QrSolution, RankDeficient> {
    let p = columns.len();
    let n = y.len();
    debug_assert!(columns.iter().all(|c| c.len() == n));
    debug_assert!(n >= p);

    let norms: Vec<f64> = columns.iter().map(|c| norm(c)).collect();
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut qty = y.to_vec();
    let mut r = vec![0.0; p * p];

    for k in 0..p {
        let col_norm = norm(&a[k][k..]);
        if col_norm <= rank_tol * norms[k] {
            return Err(RankDeficient(k));
        }
        let alpha = if a[k][k] > 0.0 { -col_norm } else { col_norm };

        // v = x - alpha e1, stored in place of the column below the diagonal.
        let mut v = a[k][k..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();

        r[k * p + k] = alpha;
        for j in (k + 1)..p {
            let s = 2.0 * dot(&v, &a[j][k..]) / vtv;
            for (aij, vi) in a[j][k..].iter_mut().zip(&v) {
                *aij -= s * vi;
            }
            r[k * p + j] = a[j][k];
        }
        let s = 2.0 * dot(&v, &qty[k..]) / vtv;
        for (qi, vi) in qty[k..].iter_mut().zip(&v) {
            *qi -= s * vi;
        }
    }

    let mut coefficients = vec![0.0; p];
    for i in (0..p).rev() {
        let mut acc = qty[i];
        for j in (i + 1)..p {
            acc -= r[i * p + j] * coefficients[j];
        }
        coefficients[i] = acc / r[i * p + i];
    }
    Ok(QrSolution { coefficients, r })
}

/// Inverse of an upper-triangular row-major `p x p` matrix.
pub(crate) fn invert_upper(r: &[f64], p: usize) -> Vec<f64> {
    let mut inv = vec![0.0; p * p];
    for col in 0..p {
        for i in (0..=col).rev() {
            let mut acc = if i == col { 1.0 } else { 0.0 };
            for k in (i + 1)..=col {
                acc -= r[i * p + k] * inv[k * p + col];
            }
            inv[i * p + col] = acc / r[i * p + i];
        }
    }
    inv
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    // Scaled accumulation so 1e9-magnitude columns don't overflow the sum.
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * a.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        // [2 1; 1 3] b = [3; 5]  ->  b = [0.8, 1.4]
        let cols = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let sol = solve(&cols, &[3.0, 5.0], 1e-10).unwrap();
        assert!((sol.coefficients[0] - 0.8).abs() < 1e-14);
        assert!((sol.coefficients[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn detects_duplicate_column() {
        let c = vec![1.0, 2.0, 3.0, 4.0];
        let cols = vec![vec![1.0; 4], c.clone(), c];
        assert_eq!(solve(&cols, &[1.0, 2.0, 3.0, 4.0], 1e-10).unwrap_err(), RankDeficient(2));
    }

    #[test]
    fn zero_column_is_rank_deficient() {
        let cols = vec![vec![1.0; 3], vec![0.0; 3]];
        assert_eq!(solve(&cols, &[1.0, 2.0, 3.0], 1e-10).unwrap_err(), RankDeficient(1));
    }

    #[test]
    fn upper_inverse() {
        let r = [2.0, 1.0, 0.5, 0.0, 4.0, -1.0, 0.0, 0.0, 0.25];
        let inv = invert_upper(&r, 3);
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| r[i * 3 + k] * inv[k * 3 + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-14);
            }
        }
    }
}
