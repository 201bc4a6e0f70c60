//! One-sided Jacobi SVD for small dense matrices.
//!
//! Orthogonalises the columns of the working matrix by plane rotations
//! until all pairs are numerically orthogonal; column norms are then the
//! singular values. Deterministic sweep order, no pivoting, accurate to a
//! few ulps on the matrix sizes used here (at most a few hundred rows by
//! a few dozen columns).

#[derive(Debug, Clone)]
pub struct Svd {
    /// Left singular vectors, one per dimension, each of length `rows`.
    pub u: Vec<Vec<f64>>,
    /// Right singular vectors, one per dimension, each of length `cols`.
    pub v: Vec<Vec<f64>>,
    /// Singular values in descending order, min(rows, cols) of them.
    pub sigma: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rotate_pair(columns: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let (head, tail) = columns.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = c * *x - s * *y;
        let yq = s * *x + c * *y;
        *x = xp;
        *y = yq;
    }
}

fn transpose(matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let rows = matrix.len();
    let cols = if rows == 0 { 0 } else { matrix[0].len() };
    (0..cols)
        .map(|j| (0..rows).map(|i| matrix[i][j]).collect())
        .collect()
}

/// Decompose a row-major matrix. Rotations stop once every column pair has
/// |cosine| below 1e-14, which keeps the reconstruction residual orders of
/// magnitude under the 1e-10 the analysis requires.
pub fn svd(matrix: &[Vec<f64>]) -> Svd {
    let rows = matrix.len();
    let cols = if rows == 0 { 0 } else { matrix[0].len() };
    if rows < cols {
        let flipped = svd(&transpose(matrix));
        return Svd {
            u: flipped.v,
            v: flipped.u,
            sigma: flipped.sigma,
        };
    }
    if cols == 0 {
        return Svd {
            u: Vec::new(),
            v: Vec::new(),
            sigma: Vec::new(),
        };
    }

    let mut work: Vec<Vec<f64>> = transpose(matrix);
    let mut right: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    const MAX_SWEEPS: usize = 64;
    const ORTHO_TOL: f64 = 1e-14;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = dot(&work[p], &work[p]);
                let beta = dot(&work[q], &work[q]);
                let gamma = dot(&work[p], &work[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut work, p, q, c, s);
                rotate_pair(&mut right, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = work.iter().map(|col| dot(col, col).sqrt()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite norms"));

    let mut u = Vec::with_capacity(cols);
    let mut v = Vec::with_capacity(cols);
    let mut sigma = Vec::with_capacity(cols);
    for &j in &order {
        let norm = norms[j];
        sigma.push(norm);
        if norm > 0.0 {
            u.push(work[j].iter().map(|x| x / norm).collect());
        } else {
            u.push(vec![0.0; rows]);
        }
        v.push(right[j].clone());
    }
    Svd { u, v, sigma }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruction_residual(matrix: &[Vec<f64>], svd: &Svd) -> f64 {
        let rows = matrix.len();
        let cols = matrix[0].len();
        let mut err: f64 = 0.0;
        let mut norm: f64 = 0.0;
        for i in 0..rows {
            for j in 0..cols {
                let mut rec = 0.0;
                for k in 0..svd.sigma.len() {
                    rec += svd.u[k][i] * svd.sigma[k] * svd.v[k][j];
                }
                err += (matrix[i][j] - rec).powi(2);
                norm += matrix[i][j].powi(2);
            }
        }
        (err / norm.max(f64::MIN_POSITIVE)).sqrt()
    }

    fn orthogonality(vectors: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, va) in vectors.iter().enumerate() {
            for (b, vb) in vectors.iter().enumerate() {
                let d = dot(va, vb);
                let expect = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((d - expect).abs());
            }
        }
        worst
    }

    #[test]
    fn known_two_by_two() {
        // [[3,0],[4,5]] has singular values sqrt(45) and sqrt(5).
        let m = vec![vec![3.0, 0.0], vec![4.0, 5.0]];
        let s = svd(&m);
        assert!((s.sigma[0] - 45.0f64.sqrt()).abs() < 1e-12);
        assert!((s.sigma[1] - 5.0f64.sqrt()).abs() < 1e-12);
        assert!(reconstruction_residual(&m, &s) < 1e-14);
    }

    #[test]
    fn residual_and_orthogonality_on_pseudorandom_matrices() {
        // Plain LCG so the test has no RNG dependencies.
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 4001) as f64 / 17.0 - 100.0
        };
        for (rows, cols) in [(9, 3), (3, 9), (8, 8), (40, 21), (200, 21), (5, 2)] {
            let m: Vec<Vec<f64>> = (0..rows)
                .map(|_| (0..cols).map(|_| next()).collect())
                .collect();
            let s = svd(&m);
            assert_eq!(s.sigma.len(), rows.min(cols));
            let resid = reconstruction_residual(&m, &s);
            assert!(resid < 1e-12, "{rows}x{cols}: residual {resid}");
            let kept: Vec<Vec<f64>> =
                s.u.iter()
                    .zip(&s.sigma)
                    .filter(|(_, sig)| **sig > 1e-9)
                    .map(|(u, _)| u.clone())
                    .collect();
            assert!(orthogonality(&kept) < 1e-13);
            assert!(orthogonality(&s.v) < 1e-13);
            for w in s.sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn rank_deficient_and_zero_matrices() {
        let zero = vec![vec![0.0; 4]; 3];
        let s = svd(&zero);
        assert!(s.sigma.iter().all(|v| *v == 0.0));

        // Rank-1 matrix: exactly one nonzero singular value.
        let rank1: Vec<Vec<f64>> = (1..=4).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let s = svd(&rank1);
        assert!(s.sigma[0] > 1.0);
        assert!(s.sigma[1] < 1e-12 * s.sigma[0]);
        assert!(reconstruction_residual(&rank1, &s) < 1e-14);
    }

    #[test]
    fn deterministic_across_calls() {
        let m = vec![
            vec![1.5, -2.0, 0.25],
            vec![4.0, 0.5, -1.75],
            vec![-3.25, 2.25, 0.5],
            vec![0.125, -0.75, 2.0],
        ];
        let a = svd(&m);
        let b = svd(&m);
        assert_eq!(a.sigma, b.sigma);
        assert_eq!(a.u, b.u);
        assert_eq!(a.v, b.v);
    }
}
