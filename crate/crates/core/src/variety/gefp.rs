use nalgebra::DMatrix;

/// Default rank tolerance, relative to the first pivot.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// `W₁ R W₂ = L U` from Gaussian elimination with full pivoting, stopped at
/// the detected rank `k`.
#[derive(Debug, Clone)]
pub struct GefpFactorization {
    /// `row_perm[i]` is the original row moved to position `i`.
    pub row_perm: Vec<usize>,
    /// `col_perm[j]` is the original column moved to position `j`.
    pub col_perm: Vec<usize>,
    /// Unit lower-triangular, `|P| × k`.
    pub lower: DMatrix<f64>,
    /// `k × |A|`; the leading `k × k` block is `U₁`, the rest `U₂`.
    pub upper: DMatrix<f64>,
    pub rank: usize,
    pub pivot_magnitudes: Vec<f64>,
    /// Largest entry of the discarded Schur complement.
    pub trailing_max: f64,
    pub rank_tol: f64,
}

impl GefpFactorization {
    pub fn corank(&self) -> usize {
        self.col_perm.len() - self.rank
    }

    pub fn nrows(&self) -> usize {
        self.row_perm.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_perm.len()
    }

    /// `W₁ R W₂`.
    pub fn permuted(&self, r: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(r.nrows(), r.ncols(), |i, j| {
            r[(self.row_perm[i], self.col_perm[j])]
        })
    }

    /// Ratio of the first discarded to the last retained pivot (0 when the
    /// factorisation ran to completion).
    pub fn rank_gap(&self) -> f64 {
        match self.pivot_magnitudes.last() {
            Some(&last) if last > 0.0 => self.trailing_max / last,
            _ => 0.0,
        }
    }
}

/// Gaussian elimination with full pivoting. Rank is the number of pivots
/// larger than `rank_tol · |first pivot|`. Ties go to the smallest
/// (row, column) in the current ordering.
pub fn gefp(r: &DMatrix<f64>, rank_tol: f64) -> GefpFactorization {
    let (rows, cols) = r.shape();
    let mut a: Vec<f64> = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        a.extend(r.row(i).iter());
    }
    let mut row_perm: Vec<usize> = (0..rows).collect();
    let mut col_perm: Vec<usize> = (0..cols).collect();
    let mut pivots = Vec::new();
    let mut first = 0.0;
    let steps = rows.min(cols);
    let mut k = 0;
    while k < steps {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for i in k..rows {
            for j in k..cols {
                let v = a[i * cols + j].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if k == 0 {
            first = best;
        }
        if best <= 0.0 || best <= rank_tol * first {
            break;
        }
        if pi != k {
            for j in 0..cols {
                a.swap(k * cols + j, pi * cols + j);
            }
            row_perm.swap(k, pi);
        }
        if pj != k {
            for i in 0..rows {
                a.swap(i * cols + k, i * cols + pj);
            }
            col_perm.swap(k, pj);
        }
        let pivot = a[k * cols + k];
        pivots.push(pivot.abs());
        let (head, tail) = a.split_at_mut((k + 1) * cols);
        let pivot_row = &head[k * cols..];
        for row in tail.chunks_exact_mut(cols) {
            let l = row[k] / pivot;
            row[k] = l;
            if l != 0.0 {
                for j in k + 1..cols {
                    row[j] -= l * pivot_row[j];
                }
            }
        }
        k += 1;
    }
    let rank = k;
    let mut trailing_max: f64 = 0.0;
    for i in rank..rows {
        for j in rank..cols {
            trailing_max = trailing_max.max(a[i * cols + j].abs());
        }
    }
    let lower = DMatrix::from_fn(rows, rank, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => a[i * cols + j],
        std::cmp::Ordering::Less => 0.0,
    });
    let upper = DMatrix::from_fn(
        rank,
        cols,
        |i, j| if j >= i { a[i * cols + j] } else { 0.0 },
    );
    GefpFactorization {
        row_perm,
        col_perm,
        lower,
        upper,
        rank,
        pivot_magnitudes: pivots,
        trailing_max,
        rank_tol,
    }
}

/// Solves `U₁ D = −U₂` column by column and returns the kernel vectors
/// `W₂ (D_j, e_j)` of `R`, one per discarded column.
pub fn kernel_vectors(f: &GefpFactorization) -> Vec<Vec<f64>> {
    let k = f.rank;
    let cols = f.ncols();
    (0..cols - k)
        .map(|j| {
            let mut y = vec![0.0; cols];
            y[k + j] = 1.0;
            for i in (0..k).rev() {
                let mut acc = -f.upper[(i, k + j)];
                for l in i + 1..k {
                    acc -= f.upper[(i, l)] * y[l];
                }
                y[i] = acc / f.upper[(i, i)];
            }
            let mut x = vec![0.0; cols];
            for (pos, v) in y.into_iter().enumerate() {
                x[f.col_perm[pos]] = v;
            }
            x
        })
        .collect()
}
