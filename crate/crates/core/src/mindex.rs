//! Downward-closed multi-index sets.
//!
//! A multi-index set `A ⊆ ℕᵐ` selects the monomials `x^α` spanning a polynomial
//! space `Π_A`. The sets used throughout the crate are lp-balls
//! `A_{m,n,p} = {α : ‖α‖_p ≤ n}`, which are downward closed for every `p > 0`.
//!
//! Indices are kept sorted under the lexicographic order that compares the
//! *last* coordinate first, so that `(5,3,1) ≺ (1,0,3) ≺ (1,1,3)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GplsError, Result};

/// Selector for the lp-degree of a polynomial space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpDegree {
    /// Total degree, `Σ α_i ≤ n`.
    #[serde(rename = "1")]
    One,
    /// Euclidean degree, `Σ α_i² ≤ n²`.
    #[serde(rename = "2")]
    Two,
    /// Maximum degree, `max α_i ≤ n`.
    #[serde(rename = "inf")]
    Infinity,
}

impl LpDegree {
    pub const ALL: [LpDegree; 3] = [LpDegree::One, LpDegree::Two, LpDegree::Infinity];

    /// Exact membership test `‖α‖_p ≤ n`, in integer arithmetic.
    pub fn admits(self, alpha: &[u32], n: usize) -> bool {
        let n = n as u64;
        match self {
            LpDegree::One => alpha.iter().map(|&a| a as u64).sum::<u64>() <= n,
            LpDegree::Two => alpha.iter().map(|&a| (a as u64) * (a as u64)).sum::<u64>() <= n * n,
            LpDegree::Infinity => alpha.iter().all(|&a| a as u64 <= n),
        }
    }

    /// Converts a numeric p. Only 1, 2 and +∞ are accepted.
    pub fn from_f64(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(GplsError::domain(format!(
                "lp-degree must be positive, got {p}"
            )));
        }
        if p == 1.0 {
            Ok(LpDegree::One)
        } else if p == 2.0 {
            Ok(LpDegree::Two)
        } else if p.is_infinite() {
            Ok(LpDegree::Infinity)
        } else {
            Err(GplsError::domain(format!(
                "unsupported lp-degree {p}; use 1, 2 or inf"
            )))
        }
    }
}

impl fmt::Display for LpDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpDegree::One => f.write_str("1"),
            LpDegree::Two => f.write_str("2"),
            LpDegree::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for LpDegree {
    type Err = GplsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" | "max" => Ok(LpDegree::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| GplsError::domain(format!("cannot parse lp-degree '{s}'")))?;
                LpDegree::from_f64(p)
            }
        }
    }
}

/// Membership predicate, including non-integer exponents.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Exponent {
    Lp(LpDegree),
    /// `Σ α_i^p ≤ n^p` for a general positive exponent.
    Real(f64),
}

impl Exponent {
    fn admits(self, alpha: &[u32], n: usize) -> bool {
        match self {
            Exponent::Lp(p) => p.admits(alpha, n),
            Exponent::Real(p) => {
                let lhs: f64 = alpha.iter().map(|&a| (a as f64).powf(p)).sum();
                let rhs = (n as f64).powf(p);
                lhs <= rhs * (1.0 + 4.0 * f64::EPSILON)
            }
        }
    }
}

/// Total order on multi-indices scanning coordinates from the last to the first.
pub fn lex_compare(a: &[u32], b: &[u32]) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(GplsError::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(lex_cmp_unchecked(a, b))
}

#[inline]
pub(crate) fn lex_cmp_unchecked(a: &[u32], b: &[u32]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

/// An ordered set of multi-indices of a fixed dimension.
#[derive(Clone)]
pub struct MultiIndexSet {
    dim: usize,
    degree: usize,
    norm: Option<LpDegree>,
    indices: Vec<u32>,
    lookup: HashMap<Vec<u32>, usize>,
    max_per_dim: Vec<usize>,
    // For each axis, the positions of every axis-parallel line, ordered by
    // the coordinate along the axis. Only filled for downward-closed sets.
    lines: Option<Vec<Vec<Vec<usize>>>>,
}

impl fmt::Debug for MultiIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiIndexSet")
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("norm", &self.norm)
            .field("len", &self.len())
            .finish()
    }
}

impl PartialEq for MultiIndexSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.indices == other.indices
    }
}

/// Builds `A_{m,n,p}`.
pub fn build_index_set(m: usize, n: usize, p: LpDegree) -> Result<MultiIndexSet> {
    MultiIndexSet::lp_ball(m, n, p)
}

/// True iff every index component-wise dominated by a member is a member.
pub fn is_downward_closed(set: &MultiIndexSet) -> bool {
    set.is_downward_closed()
}

impl MultiIndexSet {
    pub fn lp_ball(m: usize, n: usize, p: LpDegree) -> Result<Self> {
        let mut set = Self::enumerate(m, n, Exponent::Lp(p))?;
        set.norm = Some(p);
        Ok(set)
    }

    /// lp-ball for an arbitrary positive exponent.
    #[allow(dead_code)]
    pub(crate) fn with_exponent(m: usize, n: usize, p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(GplsError::domain(format!(
                "lp-degree must be positive, got {p}"
            )));
        }
        match LpDegree::from_f64(p) {
            Ok(lp) => Self::lp_ball(m, n, lp),
            Err(_) => Self::enumerate(m, n, Exponent::Real(p)),
        }
    }

    fn enumerate(m: usize, n: usize, p: Exponent) -> Result<Self> {
        if m == 0 {
            return Err(GplsError::domain("dimension m must be at least 1"));
        }
        let mut indices = Vec::new();
        let mut alpha = vec![0u32; m];
        // Odometer with the first coordinate running fastest; this already
        // yields the last-to-first lexicographic order.
        'outer: loop {
            if p.admits(&alpha, n) {
                indices.extend_from_slice(&alpha);
            }
            for k in 0..m {
                if (alpha[k] as usize) < n {
                    alpha[k] += 1;
                    continue 'outer;
                }
                alpha[k] = 0;
            }
            break;
        }
        let mut set = Self::from_sorted_flat(m, indices);
        set.degree = n;
        Ok(set)
    }

    /// Builds a set from arbitrary indices; they are sorted and deduplicated.
    /// The result need not be downward closed.
    pub fn from_indices(m: usize, indices: &[Vec<u32>]) -> Result<Self> {
        if m == 0 {
            return Err(GplsError::domain("dimension m must be at least 1"));
        }
        for alpha in indices {
            if alpha.len() != m {
                return Err(GplsError::DimensionMismatch {
                    expected: m,
                    actual: alpha.len(),
                });
            }
        }
        let mut sorted: Vec<&Vec<u32>> = indices.iter().collect();
        sorted.sort_by(|a, b| lex_cmp_unchecked(a, b));
        sorted.dedup();
        let flat: Vec<u32> = sorted.into_iter().flatten().copied().collect();
        Ok(Self::from_sorted_flat(m, flat))
    }

    fn from_sorted_flat(m: usize, indices: Vec<u32>) -> Self {
        let count = indices.len() / m;
        let mut lookup = HashMap::with_capacity(count);
        let mut max_per_dim = vec![0usize; m];
        for (k, alpha) in indices.chunks_exact(m).enumerate() {
            lookup.insert(alpha.to_vec(), k);
            for (mx, &a) in max_per_dim.iter_mut().zip(alpha) {
                *mx = (*mx).max(a as usize);
            }
        }
        let degree = max_per_dim.iter().copied().max().unwrap_or(0);
        let mut set = MultiIndexSet {
            dim: m,
            degree,
            norm: None,
            indices,
            lookup,
            max_per_dim,
            lines: None,
        };
        if set.is_downward_closed() {
            set.lines = Some(set.compute_lines());
        }
        set
    }

    fn compute_lines(&self) -> Vec<Vec<Vec<usize>>> {
        (0..self.dim)
            .map(|axis| {
                // Lines start at the indices whose coordinate along `axis` is 0;
                // downward closure guarantees the line is contiguous from there.
                let mut lines = Vec::new();
                let mut probe = vec![0u32; self.dim];
                for (k, alpha) in self.iter().enumerate() {
                    if alpha[axis] != 0 {
                        continue;
                    }
                    let mut line = vec![k];
                    probe.copy_from_slice(alpha);
                    loop {
                        probe[axis] += 1;
                        match self.lookup.get(&probe) {
                            Some(&pos) => line.push(pos),
                            None => break,
                        }
                    }
                    lines.push(line);
                }
                lines
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The degree bound `n` (for lp-balls) or the largest coordinate otherwise.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn norm(&self) -> Option<LpDegree> {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.indices.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, k: usize) -> &[u32] {
        &self.indices[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.indices.chunks_exact(self.dim)
    }

    pub fn position(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub fn contains(&self, alpha: &[u32]) -> bool {
        self.lookup.contains_key(alpha)
    }

    /// `n_i = max_{α∈A} α_i`.
    pub fn max_per_dim(&self) -> &[usize] {
        &self.max_per_dim
    }

    pub fn is_downward_closed(&self) -> bool {
        // Checking the immediate predecessors α - e_i suffices by induction.
        let mut probe = vec![0u32; self.dim];
        self.iter().all(|alpha| {
            (0..self.dim).all(|i| {
                if alpha[i] == 0 {
                    return true;
                }
                probe.copy_from_slice(alpha);
                probe[i] -= 1;
                self.lookup.contains_key(&probe)
            })
        })
    }

    /// Axis-parallel lines of the set, used by the tensorised basis transforms.
    pub(crate) fn lines(&self, axis: usize) -> &[Vec<usize>] {
        &self
            .lines
            .as_ref()
            .expect("lines are only defined for downward-closed sets")[axis]
    }

    /// `{α - k : α ∈ A, α ≥ k}` together with, for each new index, the
    /// position of its parent `α` in `self`. An empty result is replaced by
    /// `{0}` with no parents, so the zero polynomial stays representable.
    pub(crate) fn shifted(&self, k: &[u32]) -> (MultiIndexSet, Vec<usize>) {
        let mut flat = Vec::new();
        let mut parents = Vec::new();
        for (pos, alpha) in self.iter().enumerate() {
            if alpha.iter().zip(k).any(|(a, b)| a < b) {
                continue;
            }
            flat.extend(alpha.iter().zip(k).map(|(a, b)| a - b));
            parents.push(pos);
        }
        // Subtracting a fixed vector preserves the order.
        if flat.is_empty() {
            return (Self::from_sorted_flat(self.dim, vec![0; self.dim]), parents);
        }
        (Self::from_sorted_flat(self.dim, flat), parents)
    }

    /// Smallest downward-closed superset.
    pub fn downward_closure(&self) -> MultiIndexSet {
        let mut all: std::collections::HashSet<Vec<u32>> = std::collections::HashSet::new();
        let mut stack: Vec<Vec<u32>> = self.iter().map(|a| a.to_vec()).collect();
        while let Some(alpha) = stack.pop() {
            if !all.insert(alpha.clone()) {
                continue;
            }
            for i in 0..self.dim {
                if alpha[i] > 0 {
                    let mut beta = alpha.clone();
                    beta[i] -= 1;
                    stack.push(beta);
                }
            }
        }
        let all: Vec<Vec<u32>> = all.into_iter().collect();
        let mut set = Self::from_indices(self.dim, &all).expect("dimension already checked");
        set.norm = self.norm;
        set.degree = self.degree.max(set.degree);
        set
    }

    /// True iff every index of `self` is in `other`.
    pub fn is_subset_of(&self, other: &MultiIndexSet) -> bool {
        self.dim == other.dim && self.iter().all(|a| other.contains(a))
    }

    /// Raw index data, flattened with stride `dim`.
    pub fn as_flat(&self) -> &[u32] {
        &self.indices
    }
}

/// `C(m+n, n)`, the size of the total-degree set.
pub fn total_degree_count(m: usize, n: usize) -> usize {
    let mut c: u128 = 1;
    for k in 1..=n as u128 {
        c = c * (m as u128 + k) / k;
    }
    c as usize
}
