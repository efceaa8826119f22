//! Unisolvent interpolation nodes.
//!
//! A grid is generated by one ordered node tuple `P_i ⊆ [-1,1]` per axis; the
//! node of a multi-index `α` is `(P_1[α_1], …, P_m[α_m])`. For downward-closed
//! index sets these nodes are unisolvent, and the Newton-on-grid matrix
//! `N_α(p_β)` is lower triangular and factors into one 1D Newton matrix per
//! axis acting along axis-parallel lines of the index set. All basis
//! transforms below exploit that factorisation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GplsError, Result};
use crate::mindex::MultiIndexSet;

/// How the generating node tuples are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum GridScheme {
    /// Caller-supplied distinct nodes, one tuple of length `n_i + 1` per axis.
    Custom(Vec<Vec<f64>>),
    /// Leja-ordered Chebyshev–Lobatto nodes on every axis.
    LejaChebyshev,
}

/// `{cos(kπ/n) : 0 ≤ k ≤ n}`, with the single node `{0}` for `n = 0`.
pub fn chebyshev_lobatto(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    (0..=n)
        .map(|k| {
            // Mirror the upper half so the set is exactly symmetric.
            if 2 * k > n {
                -(((n - k) as f64) * std::f64::consts::PI / n as f64).cos()
            } else if 2 * k == n {
                0.0
            } else {
                ((k as f64) * std::f64::consts::PI / n as f64).cos()
            }
        })
        .collect()
}

/// Greedy Leja ordering: start with the point of largest modulus, then keep
/// adding the point maximising the product of distances to those chosen.
/// Ties (relative 1e-12) go to the larger value.
pub fn leja_order(points: &[f64]) -> Result<Vec<f64>> {
    for (i, a) in points.iter().enumerate() {
        if !a.is_finite() {
            return Err(GplsError::domain(format!("non-finite node {a}")));
        }
        if points[..i].contains(a) {
            return Err(GplsError::domain(format!("duplicate node {a}")));
        }
    }
    let mut remaining: Vec<f64> = points.to_vec();
    let mut ordered = Vec::with_capacity(points.len());
    while !remaining.is_empty() {
        let score = |p: f64| -> f64 {
            if ordered.is_empty() {
                p.abs()
            } else {
                ordered.iter().map(|&q: &f64| (p - q).abs()).product()
            }
        };
        let mut best = 0;
        let mut best_score = score(remaining[0]);
        for (k, &p) in remaining.iter().enumerate().skip(1) {
            let s = score(p);
            let tie = (s - best_score).abs() <= 1e-12 * best_score.abs().max(s.abs());
            if (!tie && s > best_score) || (tie && p > remaining[best]) {
                best = k;
                best_score = s;
            }
        }
        ordered.push(remaining.remove(best));
    }
    Ok(ordered)
}

/// Dense row-major square matrix with a fixed size, used for the small
/// per-axis transforms.
#[derive(Debug, Clone)]
struct AxisMatrix {
    size: usize,
    data: Vec<f64>,
}

impl AxisMatrix {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.size + c]
    }

    /// Inverse of a lower-triangular matrix by forward substitution.
    fn lower_inverse(&self) -> AxisMatrix {
        let n = self.size;
        let mut inv = vec![0.0; n * n];
        for col in 0..n {
            for row in col..n {
                let mut acc = if row == col { 1.0 } else { 0.0 };
                for k in col..row {
                    acc -= self.at(row, k) * inv[k * n + col];
                }
                inv[row * n + col] = acc / self.at(row, row);
            }
        }
        AxisMatrix { size: n, data: inv }
    }
}

/// Applies a per-axis lower-triangular matrix to every line along `axis`.
/// With `transpose = false`, `y_i = Σ_{j≤i} M[i][j] x_j`; otherwise
/// `y_i = Σ_{j≥i} M[j][i] x_j`. Only the leading block matching the line
/// length is used.
fn apply_lines(
    set: &MultiIndexSet,
    data: &mut [f64],
    axis: usize,
    mat: &AxisMatrix,
    transpose: bool,
    scratch: &mut Vec<f64>,
) {
    for line in set.lines(axis) {
        let len = line.len();
        if len <= 1 && mat.at(0, 0) == 1.0 {
            continue;
        }
        scratch.clear();
        scratch.extend(line.iter().map(|&pos| data[pos]));
        for i in 0..len {
            let mut acc = 0.0;
            if transpose {
                for j in i..len {
                    acc += mat.at(j, i) * scratch[j];
                }
            } else {
                for j in 0..=i {
                    acc += mat.at(i, j) * scratch[j];
                }
            }
            data[line[i]] = acc;
        }
    }
}

/// Node set `P_A` for a downward-closed index set, with the per-axis
/// transforms needed to move between value, Newton and monomial coefficients.
#[derive(Debug, Clone)]
pub struct UnisolventGrid {
    index_set: Arc<MultiIndexSet>,
    generating_points: Vec<Vec<f64>>,
    nodes: Vec<f64>,
    newton_inverse: Vec<AxisMatrix>,
    newton_to_monomial: Vec<AxisMatrix>,
    monomial_to_newton: Vec<AxisMatrix>,
}

/// Builds the node set `P_A` and its transforms.
pub fn build_grid(set: Arc<MultiIndexSet>, scheme: GridScheme) -> Result<UnisolventGrid> {
    UnisolventGrid::new(set, scheme)
}

impl UnisolventGrid {
    pub fn new(set: Arc<MultiIndexSet>, scheme: GridScheme) -> Result<Self> {
        if !set.is_downward_closed() {
            return Err(GplsError::domain("index set must be downward closed"));
        }
        let m = set.dim();
        let generating_points = match scheme {
            GridScheme::LejaChebyshev => set
                .max_per_dim()
                .iter()
                .map(|&n| leja_order(&chebyshev_lobatto(n)))
                .collect::<Result<Vec<_>>>()?,
            GridScheme::Custom(points) => {
                if points.len() != m {
                    return Err(GplsError::DimensionMismatch {
                        expected: m,
                        actual: points.len(),
                    });
                }
                for (axis, (p, &n)) in points.iter().zip(set.max_per_dim()).enumerate() {
                    if p.len() != n + 1 {
                        return Err(GplsError::domain(format!(
                            "axis {axis}: expected {} generating nodes, got {}",
                            n + 1,
                            p.len()
                        )));
                    }
                    for (i, a) in p.iter().enumerate() {
                        if !(-1.0..=1.0).contains(a) {
                            return Err(GplsError::domain(format!(
                                "axis {axis}: node {a} outside [-1, 1]"
                            )));
                        }
                        if p[..i].contains(a) {
                            return Err(GplsError::domain(format!(
                                "axis {axis}: duplicate node {a}"
                            )));
                        }
                    }
                }
                points
            }
        };

        let mut nodes = Vec::with_capacity(set.len() * m);
        for alpha in set.iter() {
            for (axis, &a) in alpha.iter().enumerate() {
                nodes.push(generating_points[axis][a as usize]);
            }
        }

        let mut newton_inverse = Vec::with_capacity(m);
        let mut newton_to_monomial = Vec::with_capacity(m);
        let mut monomial_to_newton = Vec::with_capacity(m);
        for p in &generating_points {
            let size = p.len();
            // T[r][c] = Π_{j<c} (p_r - p_j): Newton polynomials at the nodes.
            let mut t = vec![0.0; size * size];
            for r in 0..size {
                let mut prod = 1.0;
                for c in 0..=r {
                    t[r * size + c] = prod;
                    prod *= p[r] - p[c];
                }
            }
            newton_inverse.push(AxisMatrix { size, data: t }.lower_inverse());

            // C[k][j] = coefficient of x^j in Π_{l<k} (x - p_l).
            let mut c = vec![0.0; size * size];
            c[0] = 1.0;
            for k in 1..size {
                for j in 0..=k {
                    let shifted = if j > 0 {
                        c[(k - 1) * size + j - 1]
                    } else {
                        0.0
                    };
                    let kept = if j < k { c[(k - 1) * size + j] } else { 0.0 };
                    c[k * size + j] = shifted - p[k - 1] * kept;
                }
            }
            let c = AxisMatrix { size, data: c };
            monomial_to_newton.push(c.lower_inverse());
            newton_to_monomial.push(c);
        }

        Ok(UnisolventGrid {
            index_set: set,
            generating_points,
            nodes,
            newton_inverse,
            newton_to_monomial,
            monomial_to_newton,
        })
    }

    pub fn index_set(&self) -> &Arc<MultiIndexSet> {
        &self.index_set
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn generating_points(&self) -> &[Vec<f64>] {
        &self.generating_points
    }

    /// The node `p_α` for the `k`-th index.
    pub fn node(&self, k: usize) -> &[f64] {
        let m = self.dim();
        &self.nodes[k * m..(k + 1) * m]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.dim())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(GplsError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// 1D Newton polynomials `w_k(t) = Π_{j<k} (t - p_j)` along one axis.
    pub(crate) fn axis_newton_values(&self, axis: usize, t: f64) -> Vec<f64> {
        let p = &self.generating_points[axis];
        let mut w = Vec::with_capacity(p.len());
        let mut prod = 1.0;
        for &pj in p {
            w.push(prod);
            prod *= t - pj;
        }
        w
    }

    /// All Newton basis values `N_α(x)`, in index order.
    pub fn newton_basis(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|axis| self.axis_newton_values(axis, x[axis]))
            .collect();
        Ok(self
            .index_set
            .iter()
            .map(|alpha| {
                alpha
                    .iter()
                    .zip(&axes)
                    .map(|(&a, w)| w[a as usize])
                    .product()
            })
            .collect())
    }

    /// All Lagrange basis values `L_α(x)`, computed from the Newton basis by
    /// applying the transposed inverse Newton-on-grid matrix.
    pub fn lagrange_basis(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut values = self.newton_basis(x)?;
        let mut scratch = Vec::new();
        for axis in 0..self.dim() {
            apply_lines(
                &self.index_set,
                &mut values,
                axis,
                &self.newton_inverse[axis],
                true,
                &mut scratch,
            );
        }
        Ok(values)
    }

    /// Newton coefficients of the interpolant of `values` given at the nodes
    /// (multivariate divided differences).
    pub(crate) fn values_to_newton(&self, values: &[f64]) -> Vec<f64> {
        self.transform(values, &self.newton_inverse, false)
    }

    /// Newton-on-grid matrix applied to coefficients: values at the nodes.
    pub(crate) fn newton_to_values(&self, coeffs: &[f64]) -> Vec<f64> {
        self.nodes().map(|x| self.eval_newton(coeffs, x)).collect()
    }

    pub(crate) fn newton_to_monomial(&self, coeffs: &[f64]) -> Vec<f64> {
        self.transform(coeffs, &self.newton_to_monomial, true)
    }

    pub(crate) fn monomial_to_newton(&self, coeffs: &[f64]) -> Vec<f64> {
        self.transform(coeffs, &self.monomial_to_newton, true)
    }

    fn transform(&self, input: &[f64], mats: &[AxisMatrix], transpose: bool) -> Vec<f64> {
        let mut data = input.to_vec();
        let mut scratch = Vec::new();
        for (axis, mat) in mats.iter().enumerate() {
            apply_lines(
                &self.index_set,
                &mut data,
                axis,
                mat,
                transpose,
                &mut scratch,
            );
        }
        data
    }

    /// Evaluates a Newton-form polynomial by nested Horner steps: the index
    /// set is sorted by the last coordinate first, so each slice with a fixed
    /// trailing coordinate is a contiguous block holding a lower-dimensional
    /// Newton polynomial.
    pub(crate) fn eval_newton(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        let m = self.dim();
        self.horner(coeffs, x, m - 1, 0, self.len())
    }

    fn horner(&self, coeffs: &[f64], x: &[f64], axis: usize, start: usize, end: usize) -> f64 {
        let set = &self.index_set;
        let p = &self.generating_points[axis];
        // Walk the blocks of equal α_axis from the top level down.
        let mut acc = 0.0;
        let mut e = end;
        while e > start {
            let level = set.get(e - 1)[axis] as usize;
            let mut s = e - 1;
            while s > start && set.get(s - 1)[axis] as usize == level {
                s -= 1;
            }
            let inner = if axis == 0 {
                coeffs[s]
            } else {
                self.horner(coeffs, x, axis - 1, s, e)
            };
            acc = if e == end {
                inner
            } else {
                inner + (x[axis] - p[level]) * acc
            };
            e = s;
        }
        acc
    }
}

/// Empirical Lebesgue constant: the largest value of `Σ_α |L_α(x)|` over the
/// grid nodes and `sample_budget` shifted Halton points in `[-1,1]^m`.
/// This is a lower bound on the true supremum. Samples for a smaller budget
/// are a prefix of those for a larger one.
pub fn lebesgue_estimate(grid: &UnisolventGrid, sample_budget: usize, seed: u64) -> f64 {
    let m = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let primes = first_primes(m);

    let lebesgue_sum = |x: &[f64]| -> f64 {
        grid.lagrange_basis(x)
            .map(|l| l.iter().map(|v| v.abs()).sum())
            .unwrap_or(0.0)
    };

    let at_nodes = grid.nodes().map(lebesgue_sum).fold(0.0, f64::max);
    let sampled = (0..sample_budget)
        .into_par_iter()
        .map(|i| {
            let x: Vec<f64> = primes
                .iter()
                .zip(&shift)
                .map(|(&b, &s)| {
                    let u = (radical_inverse(i as u64 + 1, b) + s).fract();
                    2.0 * u - 1.0
                })
                .collect();
            lebesgue_sum(&x)
        })
        .reduce(|| 0.0, f64::max);
    at_nodes.max(sampled)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut k = 2u64;
    while primes.len() < count {
        if primes.iter().all(|&p| k % p != 0) {
            primes.push(k);
        }
        k += 1;
    }
    primes
}
