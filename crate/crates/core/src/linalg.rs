//! Dense least-squares helpers.

use nalgebra::{DMatrix, DVector};

/// Householder QR with column pivoting on the largest remaining column norm.
/// Factorisation stops once that norm drops below `tol` times the first.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    // Householder vectors below the diagonal, `R` on and above it.
    qr: DMatrix<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(mut a: DMatrix<f64>, tol: f64) -> Self {
        let (m, n) = a.shape();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
        let mut exact = norms.clone();
        let first = norms.iter().copied().fold(0.0, f64::max);
        let mut tau = Vec::new();
        let mut rank = 0;
        for k in 0..m.min(n) {
            let (j, &best) = norms[k..]
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .map(|(i, v)| (i + k, v))
                .expect("nonempty");
            if !(best > tol * first) || best == 0.0 {
                break;
            }
            if j != k {
                a.swap_columns(j, k);
                perm.swap(j, k);
                norms.swap(j, k);
                exact.swap(j, k);
            }
            let t = {
                let mut col = a.view_mut((k, k), (m - k, 1));
                let alpha = col[0];
                let norm = alpha.hypot(col.rows(1, m - k - 1).norm());
                let beta = if alpha >= 0.0 { -norm } else { norm };
                let scale = 1.0 / (alpha - beta);
                for i in 1..m - k {
                    col[i] *= scale;
                }
                col[0] = beta;
                (beta - alpha) / beta
            };
            tau.push(t);
            rank += 1;
            let (head, mut tail) = a.columns_range_pair_mut(k, k + 1..);
            let v = head.rows(k + 1, m - k - 1);
            for (c, mut col) in tail.column_iter_mut().enumerate() {
                let jcol = k + 1 + c;
                let dot = col[k] + v.dot(&col.rows(k + 1, m - k - 1));
                let w = t * dot;
                col[k] -= w;
                col.rows_mut(k + 1, m - k - 1).axpy(-w, &v, 1.0);
                // Norm downdating with recomputation when cancellation
                // makes it unreliable.
                if norms[jcol] != 0.0 {
                    let r = col[k].abs() / norms[jcol];
                    let f = (1.0 - r * r).max(0.0);
                    let ratio = norms[jcol] / exact[jcol];
                    if f * ratio * ratio <= f64::EPSILON.sqrt() {
                        let fresh = col.rows(k + 1, m - k - 1).norm();
                        norms[jcol] = fresh;
                        exact[jcol] = fresh;
                    } else {
                        norms[jcol] *= f.sqrt();
                    }
                }
            }
        }
        PivotedQr {
            qr: a,
            tau,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Basic least-squares solution: unknowns outside the pivoted columns are
    /// zero.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.qr.nrows();
        let mut y = DVector::from_column_slice(b);
        for (k, &t) in self.tau.iter().enumerate() {
            let v = self.qr.view((k + 1, k), (m - k - 1, 1));
            let dot = y[k] + v.column(0).dot(&y.rows(k + 1, m - k - 1));
            let w = t * dot;
            y[k] -= w;
            y.rows_mut(k + 1, m - k - 1).axpy(-w, &v.column(0), 1.0);
        }
        let r = self.rank;
        let mut z = vec![0.0; r];
        for i in (0..r).rev() {
            let mut acc = y[i];
            for j in i + 1..r {
                acc -= self.qr[(i, j)] * z[j];
            }
            z[i] = acc / self.qr[(i, i)];
        }
        let mut x = vec![0.0; self.qr.ncols()];
        for (i, v) in z.into_iter().enumerate() {
            x[self.perm[i]] = v;
        }
        x
    }
}

/// Result of a least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    pub rank: usize,
    pub residual_max: f64,
    pub residual_rms: f64,
}

/// Minimises `‖A x − b‖₂² + ridge ‖x‖₂²` with a column-pivoted QR of `A`
/// (stacked on `√ridge · I` when the ridge is positive) and one step of
/// iterative refinement on the original residual.
pub fn least_squares(a: &DMatrix<f64>, b: &[f64], ridge: f64) -> LeastSquares {
    let (m, n) = a.shape();
    let (mat, rhs) = if ridge > 0.0 {
        let mut mat = DMatrix::<f64>::zeros(m + n, n);
        mat.rows_mut(0, m).copy_from(a);
        for i in 0..n {
            mat[(m + i, i)] = ridge.sqrt();
        }
        let mut rhs = b.to_vec();
        rhs.resize(m + n, 0.0);
        (mat, rhs)
    } else {
        (a.clone(), b.to_vec())
    };
    let tol = (m.max(n).max(1) as f64) * f64::EPSILON;
    let qr = PivotedQr::new(mat.clone(), tol);
    let full = DVector::from_vec(rhs);
    let mut x = DVector::from_vec(qr.solve(full.as_slice()));
    let res = &full - &mat * &x;
    x += DVector::from_vec(qr.solve(res.as_slice()));
    let bv = DVector::from_column_slice(b);
    let r = &bv - a * &x;
    let residual_max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual_rms = (r.norm_squared() / r.len().max(1) as f64).sqrt();
    LeastSquares {
        solution: x.as_slice().to_vec(),
        rank: qr.rank(),
        residual_max,
        residual_rms,
    }
}

/// Moore–Penrose pseudo-inverse of a matrix with full row rank, computed
/// from a QR factorisation of its transpose: `S⁺ = Q R⁻ᵀ`.
pub fn right_pseudo_inverse(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let qr = s.transpose().qr();
    let q = qr.q();
    let r = qr.r();
    // Solve Rᵀ Y = I for Y = R⁻ᵀ.
    let rt = r.transpose();
    let k = rt.nrows();
    let y = rt.solve_lower_triangular(&DMatrix::identity(k, k))?;
    Some(q * y)
}

/// Unit vector minimising `‖A x‖₂`, the right singular vector of the
/// smallest singular value, together with the numerical rank of `A`.
pub fn min_norm_direction(a: &DMatrix<f64>) -> (Vec<f64>, usize) {
    let (m, n) = a.shape();
    // A thin SVD of a wide matrix omits the null space, so pad to square.
    let padded = if m < n {
        let mut p = DMatrix::<f64>::zeros(n, n);
        p.rows_mut(0, m).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv = &svd.singular_values;
    let (k, _) =
        sv.iter().enumerate().fold(
            (0, f64::INFINITY),
            |best, (i, &s)| if s < best.1 { (i, s) } else { best },
        );
    let top = sv.iter().copied().fold(0.0, f64::max);
    let tol = (m.max(n) as f64) * f64::EPSILON * top;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    (v_t.row(k).iter().copied().collect(), rank)
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {

    #[test]
    fn min_norm_direction_spans_the_null_space() {
        // Rows orthogonal to (1, -2, 1) / √6.
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 2.0, 1.0, 0.0]);
        let (v, rank) = min_norm_direction(&a);
        assert_eq!(rank, 2);
        let expect = [1.0, -2.0, 1.0].map(|x: f64| x / 6f64.sqrt());
        let sign = v[0].signum();
        for (x, e) in v.iter().zip(expect) {
            assert!((sign * x - e).abs() < 1e-14);
        }
    }
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn matches_svd_least_squares() {
        let a = random(60, 12, 1);
        let b: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin()).collect();
        let ours = least_squares(&a, &b, 0.0);
        let svd = a.clone().svd(true, true);
        let oracle = svd.solve(&DVector::from_column_slice(&b), 1e-14).unwrap();
        assert_eq!(ours.rank, 12);
        for (x, y) in ours.solution.iter().zip(oracle.iter()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn rank_deficient_columns() {
        let mut a = random(40, 6, 2);
        let c0 = a.column(0).clone_owned();
        a.set_column(5, &(c0 * 2.0));
        let b: Vec<f64> = a.column(1).iter().map(|v| 3.0 * v).collect();
        let ours = least_squares(&a, &b, 0.0);
        assert_eq!(ours.rank, 5);
        assert!(ours.residual_max < 1e-12);
    }

    #[test]
    fn pseudo_inverse_of_wide_matrix() {
        let s = random(4, 9, 3);
        let pinv = right_pseudo_inverse(&s).unwrap();
        let id = &s * &pinv;
        assert!((id - DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
        let oracle = s.clone().pseudo_inverse(1e-14).unwrap();
        assert!((pinv - oracle).amax() < 1e-12);
    }
}
