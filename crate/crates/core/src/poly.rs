//! Multivariate polynomials over a downward-closed index set.
//!
//! A [`Polynomial`] stores one coefficient per multi-index, in the order of
//! its [`MultiIndexSet`], with respect to one of three bases:
//!
//! * Newton: `N_α(x) = Π_i Π_{j<α_i} (x_i - p_{j,i})` on a grid,
//! * Lagrange: the values at the grid nodes,
//! * canonical: monomials `x^α`.
//!
//! Differentiation works on the canonical form.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GplsError, Result};
use crate::mindex::{LpDegree, MultiIndexSet};
use crate::nodes::{GridScheme, UnisolventGrid};

#[derive(Debug, Clone)]
pub enum Basis {
    Newton(Arc<UnisolventGrid>),
    Lagrange(Arc<UnisolventGrid>),
    Canonical,
}

impl Basis {
    pub fn name(&self) -> &'static str {
        match self {
            Basis::Newton(_) => "newton",
            Basis::Lagrange(_) => "lagrange",
            Basis::Canonical => "canonical",
        }
    }

    pub fn grid(&self) -> Option<&Arc<UnisolventGrid>> {
        match self {
            Basis::Newton(g) | Basis::Lagrange(g) => Some(g),
            Basis::Canonical => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Polynomial {
    set: Arc<MultiIndexSet>,
    basis: Basis,
    coeffs: Vec<f64>,
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(GplsError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

impl Polynomial {
    pub fn canonical(set: Arc<MultiIndexSet>, coeffs: Vec<f64>) -> Result<Self> {
        check_len(set.len(), coeffs.len())?;
        Ok(Polynomial {
            set,
            basis: Basis::Canonical,
            coeffs,
        })
    }

    pub fn newton(grid: Arc<UnisolventGrid>, coeffs: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), coeffs.len())?;
        Ok(Polynomial {
            set: grid.index_set().clone(),
            basis: Basis::Newton(grid),
            coeffs,
        })
    }

    /// Polynomial taking `values` at the grid nodes.
    pub fn lagrange(grid: Arc<UnisolventGrid>, values: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        Ok(Polynomial {
            set: grid.index_set().clone(),
            basis: Basis::Lagrange(grid),
            coeffs: values,
        })
    }

    /// Canonical polynomial `Σ c x^α` over the downward closure of its terms.
    /// Repeated exponents are summed.
    pub fn from_terms(m: usize, terms: &[(Vec<u32>, f64)]) -> Result<Self> {
        let support: Vec<Vec<u32>> = terms.iter().map(|(a, _)| a.clone()).collect();
        let set = if support.is_empty() {
            MultiIndexSet::from_indices(m, &[vec![0; m]])?
        } else {
            MultiIndexSet::from_indices(m, &support)?.downward_closure()
        };
        Self::from_terms_in(Arc::new(set), terms)
    }

    /// Canonical polynomial over a given set containing every term.
    pub fn from_terms_in(set: Arc<MultiIndexSet>, terms: &[(Vec<u32>, f64)]) -> Result<Self> {
        let mut coeffs = vec![0.0; set.len()];
        for (alpha, c) in terms {
            let pos = set.position(alpha).ok_or_else(|| {
                GplsError::domain(format!("monomial {alpha:?} is not in the index set"))
            })?;
            coeffs[pos] += c;
        }
        Self::canonical(set, coeffs)
    }

    pub fn zero(set: Arc<MultiIndexSet>) -> Self {
        let coeffs = vec![0.0; set.len()];
        Polynomial {
            set,
            basis: Basis::Canonical,
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn index_set(&self) -> &Arc<MultiIndexSet> {
        &self.set
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `α`, zero when `α` is not in the index set.
    pub fn coefficient(&self, alpha: &[u32]) -> f64 {
        self.set.position(alpha).map_or(0.0, |k| self.coeffs[k])
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_len(self.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.basis {
            Basis::Canonical => self.eval_canonical(x),
            Basis::Newton(grid) => grid.eval_newton(&self.coeffs, x),
            Basis::Lagrange(grid) => grid
                .lagrange_basis(x)
                .expect("dimension checked")
                .iter()
                .zip(&self.coeffs)
                .map(|(l, c)| l * c)
                .sum(),
        }
    }

    fn eval_canonical(&self, x: &[f64]) -> f64 {
        let powers = power_table(x, self.set.max_per_dim());
        self.eval_with_powers(&powers)
    }

    /// Canonical evaluation from a precomputed table `powers[i][k] = x_i^k`
    /// covering the set's degrees.
    pub(crate) fn eval_with_powers(&self, powers: &[Vec<f64>]) -> f64 {
        debug_assert!(matches!(self.basis, Basis::Canonical));
        self.set
            .iter()
            .zip(&self.coeffs)
            .map(|(alpha, &c)| {
                if c == 0.0 {
                    return 0.0;
                }
                alpha
                    .iter()
                    .zip(powers)
                    .fold(c, |acc, (&a, pw)| acc * pw[a as usize])
            })
            .sum()
    }

    /// Same function in the monomial basis.
    pub fn to_canonical(&self) -> Polynomial {
        let coeffs = match &self.basis {
            Basis::Canonical => return self.clone(),
            Basis::Newton(grid) => grid.newton_to_monomial(&self.coeffs),
            Basis::Lagrange(grid) => grid.newton_to_monomial(&grid.values_to_newton(&self.coeffs)),
        };
        Polynomial {
            set: self.set.clone(),
            basis: Basis::Canonical,
            coeffs,
        }
    }

    /// Same function in the Newton basis of `grid`. The polynomial's index set
    /// must be contained in the grid's.
    pub fn to_newton(&self, grid: &Arc<UnisolventGrid>) -> Result<Polynomial> {
        let target = grid.index_set();
        match &self.basis {
            Basis::Newton(g) if Arc::ptr_eq(g, grid) => return Ok(self.clone()),
            Basis::Lagrange(g) if Arc::ptr_eq(g, grid) => {
                return Polynomial::newton(grid.clone(), grid.values_to_newton(&self.coeffs));
            }
            _ => {}
        }
        let canonical = self.to_canonical();
        if !canonical.set.is_subset_of(target) {
            return Err(GplsError::domain(
                "polynomial is not contained in the grid's polynomial space",
            ));
        }
        let mut embedded = vec![0.0; target.len()];
        for (alpha, &c) in canonical.set.iter().zip(&canonical.coeffs) {
            embedded[target.position(alpha).expect("subset")] = c;
        }
        Polynomial::newton(grid.clone(), grid.monomial_to_newton(&embedded))
    }

    /// Values at the grid nodes (Lagrange coefficients).
    pub fn to_lagrange(&self, grid: &Arc<UnisolventGrid>) -> Result<Polynomial> {
        if let Basis::Lagrange(g) = &self.basis {
            if Arc::ptr_eq(g, grid) {
                return Ok(self.clone());
            }
        }
        let newton = self.to_newton(grid)?;
        Polynomial::lagrange(grid.clone(), grid.newton_to_values(&newton.coeffs))
    }

    /// `∂/∂x_axis`, in canonical form.
    pub fn differentiate(&self, axis: usize) -> Result<Polynomial> {
        let mut orders = vec![0u32; self.dim()];
        *orders
            .get_mut(axis)
            .ok_or_else(|| GplsError::domain(format!("axis {axis} out of range")))? = 1;
        self.partial(&orders)
    }

    /// Mixed partial `∂^k` with `k = orders`, in canonical form. The integer
    /// factor `Π α_i!/(α_i-k_i)!` is applied in one multiplication, so mixed
    /// partials do not depend on the order of differentiation.
    pub fn partial(&self, orders: &[u32]) -> Result<Polynomial> {
        check_len(self.dim(), orders.len())?;
        let canonical = self.to_canonical();
        let (set, parents) = canonical.set.shifted(orders);
        let mut coeffs = vec![0.0; set.len()];
        for (c, &parent) in coeffs.iter_mut().zip(&parents) {
            let alpha = canonical.set.get(parent);
            let mut factor: u128 = 1;
            for (&a, &k) in alpha.iter().zip(orders) {
                for j in 0..k {
                    factor *= (a - j) as u128;
                }
            }
            *c = canonical.coeffs[parent] * factor as f64;
        }
        Ok(Polynomial {
            set: Arc::new(set),
            basis: Basis::Canonical,
            coeffs,
        })
    }

    /// `c · self`, keeping the basis.
    pub fn scaled(&self, c: f64) -> Polynomial {
        Polynomial {
            set: self.set.clone(),
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    /// Canonical polynomial `y ↦ self(s·y + t)`. The index set is unchanged
    /// since binomial expansion only produces dominated monomials.
    pub fn compose_affine(&self, scale: f64, translation: &[f64]) -> Result<Polynomial> {
        check_len(self.dim(), translation.len())?;
        let canonical = self.to_canonical();
        let set = canonical.set.clone();
        if !set.is_downward_closed() {
            return Err(GplsError::domain(
                "composition needs a downward-closed index set",
            ));
        }
        let m = self.dim();
        let nmax = set.max_per_dim().iter().copied().max().unwrap_or(0);
        // (s y + t)^a = Σ_b C(a,b) s^b t^(a-b) y^b, per axis.
        let binom = binomials(nmax);
        let mut out = vec![0.0; set.len()];
        let mut beta = vec![0u32; m];
        for (alpha, &c) in set.iter().zip(&canonical.coeffs) {
            if c == 0.0 {
                continue;
            }
            let factors: Vec<Vec<f64>> = alpha
                .iter()
                .zip(translation)
                .map(|(&a, &t)| {
                    (0..=a)
                        .map(|b| {
                            binom[a as usize][b as usize]
                                * scale.powi(b as i32)
                                * t.powi((a - b) as i32)
                        })
                        .collect()
                })
                .collect();
            // Iterate over all β ≤ α.
            beta.iter_mut().for_each(|b| *b = 0);
            'outer: loop {
                let w: f64 = beta
                    .iter()
                    .zip(&factors)
                    .map(|(&b, f)| f[b as usize])
                    .product();
                out[set.position(&beta).expect("downward closed")] += c * w;
                for i in 0..m {
                    if beta[i] < alpha[i] {
                        beta[i] += 1;
                        continue 'outer;
                    }
                    beta[i] = 0;
                }
                break;
            }
        }
        Polynomial::canonical(set, out)
    }

    /// Serialisable record.
    pub fn to_record(&self) -> PolynomialRecord {
        PolynomialRecord {
            m: self.dim(),
            n: self.set.degree(),
            p: self.set.norm(),
            basis: self.basis.name().to_string(),
            index_set: self.set.iter().map(|a| a.to_vec()).collect(),
            generating_points: self.basis.grid().map(|g| g.generating_points().to_vec()),
            coefficients: self.coeffs.clone(),
        }
    }

    pub fn from_record(record: &PolynomialRecord) -> Result<Polynomial> {
        let set = record_index_set(record)?;
        match record.basis.as_str() {
            "canonical" => Polynomial::canonical(set, record.coefficients.clone()),
            "newton" | "lagrange" => {
                let points = record.generating_points.clone().ok_or_else(|| {
                    GplsError::Format("grid-based polynomial without generating_points".into())
                })?;
                let grid = Arc::new(UnisolventGrid::new(set, GridScheme::Custom(points))?);
                if record.basis == "newton" {
                    Polynomial::newton(grid, record.coefficients.clone())
                } else {
                    Polynomial::lagrange(grid, record.coefficients.clone())
                }
            }
            other => Err(GplsError::Format(format!("unknown basis '{other}'"))),
        }
    }
}

fn record_index_set(record: &PolynomialRecord) -> Result<Arc<MultiIndexSet>> {
    // Prefer the canonical lp-ball when the listed indices are exactly one,
    // so that the norm survives a round trip.
    if let Some(p) = record.p {
        let ball = MultiIndexSet::lp_ball(record.m, record.n, p)?;
        let listed = MultiIndexSet::from_indices(record.m, &record.index_set)?;
        if ball == listed && listed.len() == record.index_set.len() {
            return Ok(Arc::new(ball));
        }
    }
    let set = MultiIndexSet::from_indices(record.m, &record.index_set)?;
    if set.len() != record.index_set.len() {
        return Err(GplsError::Format("duplicate multi-indices".into()));
    }
    let in_order = set
        .iter()
        .zip(&record.index_set)
        .all(|(a, b)| a == b.as_slice());
    if !in_order {
        return Err(GplsError::Format(
            "index_set is not in lexicographic order".into(),
        ));
    }
    Ok(Arc::new(set))
}

/// `powers[i][k] = x_i^k` for `k ≤ maxes[i]`.
pub(crate) fn power_table(x: &[f64], maxes: &[usize]) -> Vec<Vec<f64>> {
    x.iter()
        .zip(maxes)
        .map(|(&xi, &n)| {
            let mut pw = Vec::with_capacity(n + 1);
            let mut v = 1.0;
            for _ in 0..=n {
                pw.push(v);
                v *= xi;
            }
            pw
        })
        .collect()
}

/// `Σ |c_α x^α|`, which bounds the rounding error of canonical evaluation.
pub(crate) fn abs_sum_with_powers(p: &Polynomial, powers: &[Vec<f64>]) -> f64 {
    p.set
        .iter()
        .zip(&p.coeffs)
        .map(|(alpha, &c)| {
            alpha
                .iter()
                .zip(powers)
                .fold(c.abs(), |acc, (&a, pw)| acc * pw[a as usize].abs())
        })
        .sum()
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        b[i][0] = 1.0;
        for j in 1..=i {
            b[i][j] = b[i - 1][j - 1] + if j < i { b[i - 1][j] } else { 0.0 };
        }
    }
    b
}

/// Interpolant of `values` given at the grid nodes, in Newton form.
pub fn interpolate(grid: &Arc<UnisolventGrid>, values: &[f64]) -> Result<Polynomial> {
    check_len(grid.len(), values.len())?;
    Polynomial::newton(grid.clone(), grid.values_to_newton(values))
}

/// On-disk form of a polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialRecord {
    pub m: usize,
    pub n: usize,
    pub p: Option<LpDegree>,
    pub basis: String,
    pub index_set: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generating_points: Option<Vec<Vec<f64>>>,
    pub coefficients: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mindex::build_index_set;
    use crate::nodes::build_grid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(m: usize, n: usize, p: LpDegree) -> Arc<UnisolventGrid> {
        let set = Arc::new(build_index_set(m, n, p).unwrap());
        Arc::new(build_grid(set, GridScheme::LejaChebyshev).unwrap())
    }

    fn sphere() -> Polynomial {
        Polynomial::from_terms(
            3,
            &[
                (vec![2, 0, 0], 1.0),
                (vec![0, 2, 0], 1.0),
                (vec![0, 0, 2], 1.0),
                (vec![0, 0, 0], -1.0),
            ],
        )
        .unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
        (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect()
    }

    #[test]
    fn constant_newton_polynomial() {
        let g = grid(3, 3, LpDegree::Two);
        let mut c = vec![0.0; g.len()];
        c[0] = 1.0;
        let p = Polynomial::newton(g, c).unwrap();
        assert_eq!(p.eval(&[0.3, -0.2, 0.9]).unwrap(), 1.0);
        let can = p.to_canonical();
        assert_eq!(can.coefficient(&[0, 0, 0]), 1.0);
        assert!(can.coefficients()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn canonical_sphere_vanishes_on_axis() {
        assert_eq!(sphere().eval(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(sphere().eval(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn linear_reproduction() {
        for (m, n, p) in [
            (3, 4, LpDegree::Two),
            (2, 3, LpDegree::One),
            (3, 2, LpDegree::Infinity),
        ] {
            let g = grid(m, n, p);
            let values: Vec<f64> = g.nodes().map(|x| x[0]).collect();
            let q = interpolate(&g, &values).unwrap();
            let mut x = vec![0.0; m];
            x[0] = 0.3;
            assert!((q.eval(&x).unwrap() - 0.3).abs() <= 1e-14);
        }
    }

    #[test]
    fn zero_values_give_zero_coefficients() {
        let g = grid(3, 5, LpDegree::Two);
        let q = interpolate(&g, &vec![0.0; g.len()]).unwrap();
        assert!(q.coefficients().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn interpolation_reproduces_node_values() {
        let g = grid(3, 6, LpDegree::Two);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let q = interpolate(&g, &values).unwrap();
        for (x, v) in g.nodes().zip(&values) {
            assert!((q.eval(x).unwrap() - v).abs() <= 1e-12 * 3.0);
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials_in_the_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=10 {
            for p in LpDegree::ALL {
                if p == LpDegree::Infinity && n > 7 {
                    continue;
                }
                let g = grid(3, n, p);
                let coeffs: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let truth = Polynomial::canonical(g.index_set().clone(), coeffs).unwrap();
                let values: Vec<f64> = g.nodes().map(|x| truth.eval(x).unwrap()).collect();
                let back = interpolate(&g, &values).unwrap().to_canonical();
                let scale = truth.max_abs_coefficient();
                for (a, b) in back.coefficients().iter().zip(truth.coefficients()) {
                    assert!((a - b).abs() <= 1e-9 * scale, "n={n} p={p}: {a} vs {b}");
                }
                for _ in 0..100 {
                    let x = random_point(&mut rng, 3);
                    let (u, v) = (back.eval(&x).unwrap(), truth.eval(&x).unwrap());
                    assert!((u - v).abs() <= 1e-11 * v.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn canonical_newton_round_trip() {
        let g = grid(3, 2, LpDegree::Two);
        let s = sphere();
        let back = s.to_newton(&g).unwrap().to_canonical();
        for alpha in g.index_set().iter() {
            assert!((back.coefficient(alpha) - s.coefficient(alpha)).abs() <= 1e-12);
        }
        let g12 = grid(3, 12, LpDegree::Two);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let coeffs: Vec<f64> = (0..g12.len())
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        let q = Polynomial::canonical(g12.index_set().clone(), coeffs).unwrap();
        let back = q.to_newton(&g12).unwrap().to_canonical();
        for (a, b) in back.coefficients().iter().zip(q.coefficients()) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn lagrange_form_matches_newton_form() {
        let g = grid(3, 4, LpDegree::Two);
        let newton = s_embedded(&g);
        let lagrange = newton.to_lagrange(&g).unwrap();
        let x = [0.2, 0.5, -0.4];
        assert!((lagrange.eval(&x).unwrap() - newton.eval(&x).unwrap()).abs() < 1e-13);
        let canon = lagrange.to_canonical();
        assert!((canon.coefficient(&[2, 0, 0]) - 1.0).abs() < 1e-13);
    }

    fn s_embedded(g: &Arc<UnisolventGrid>) -> Polynomial {
        sphere().to_newton(g).unwrap()
    }

    // Even and odd degrees interleave (an even function sees no gain from the
    // odd node added at n + 1), so the error is compared two degrees apart.
    #[test]
    fn runge_interpolation_error_decreases() {
        let runge = |x: &[f64]| 1.0 / (1.0 + x.iter().map(|v| v * v).sum::<f64>());
        for seed in [1u64, 2, 3] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let test: Vec<Vec<f64>> = (0..1000).map(|_| random_point(&mut rng, 3)).collect();
            let errors: Vec<f64> = (2..=10)
                .map(|n| {
                    let g = grid(3, n, LpDegree::Two);
                    let values: Vec<f64> = g.nodes().map(runge).collect();
                    let q = interpolate(&g, &values).unwrap();
                    test.iter()
                        .map(|x| (q.eval(x).unwrap() - runge(x)).abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            for k in 2..errors.len() {
                assert!(
                    errors[k] < errors[k - 2],
                    "seed {seed} n={}: {errors:?}",
                    k + 2
                );
            }
            assert!(errors[8] < 0.02 * errors[0]);
        }
    }

    #[test]
    fn derivative_examples() {
        let d = sphere().differentiate(0).unwrap();
        assert_eq!(d.coefficient(&[1, 0, 0]), 2.0);
        assert_eq!(d.max_abs_coefficient(), 2.0);
        let xy = Polynomial::from_terms(3, &[(vec![1, 1, 0], 1.0)]).unwrap();
        let dxy = xy.differentiate(0).unwrap().differentiate(1).unwrap();
        assert_eq!(dxy.coefficient(&[0, 0, 0]), 1.0);
        assert_eq!(dxy.max_abs_coefficient(), 1.0);
        let gone = xy.differentiate(2).unwrap();
        assert_eq!(gone.max_abs_coefficient(), 0.0);
        assert_eq!(gone.eval(&[0.1, 0.2, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        // Biconcave disc, d = 0.5, c = 0.375, expanded by hand.
        let d2: f64 = 0.25;
        let c4 = 0.375f64.powi(4);
        let r = |x: &[f64]| -> f64 {
            let s = d2 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            s * s * s - 8.0 * d2 * (x[1] * x[1] + x[2] * x[2]) - c4
        };
        let set = Arc::new(build_index_set(3, 6, LpDegree::Two).unwrap());
        let g = Arc::new(build_grid(set, GridScheme::LejaChebyshev).unwrap());
        let values: Vec<f64> = g.nodes().map(r).collect();
        let q = interpolate(&g, &values).unwrap().to_canonical();
        let grads: Vec<Polynomial> = (0..3).map(|i| q.differentiate(i).unwrap()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = 1e-5;
        for _ in 0..20 {
            let x = random_point(&mut rng, 3);
            for (i, gi) in grads.iter().enumerate() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (r(&xp) - r(&xm)) / (2.0 * h);
                let exact = gi.eval(&x).unwrap();
                assert!(
                    (fd - exact).abs() <= 1e-8 * exact.abs().max(1.0),
                    "{fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn affine_composition() {
        // Unit sphere pulled back through y -> 0.5 y + (0.1, 0, 0).
        let q = sphere().compose_affine(0.5, &[0.1, 0.0, 0.0]).unwrap();
        let y = [1.8, 0.0, 0.0];
        assert!((q.eval(&y).unwrap() - sphere().eval(&[1.0, 0.0, 0.0]).unwrap()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let y = random_point(&mut rng, 3);
            let x = [0.5 * y[0] + 0.1, 0.5 * y[1], 0.5 * y[2]];
            assert!((q.eval(&y).unwrap() - sphere().eval(&x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn json_record_round_trip() {
        let g = grid(3, 3, LpDegree::Two);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let coeffs: Vec<f64> = (0..g.len()).map(|_| rng.random::<f64>() / 3.0).collect();
        for q in [
            Polynomial::newton(g.clone(), coeffs.clone()).unwrap(),
            Polynomial::lagrange(g.clone(), coeffs.clone()).unwrap(),
            Polynomial::canonical(g.index_set().clone(), coeffs.clone()).unwrap(),
        ] {
            let text = serde_json::to_string(&q.to_record()).unwrap();
            let rec: PolynomialRecord = serde_json::from_str(&text).unwrap();
            assert_eq!(rec, q.to_record());
            let back = Polynomial::from_record(&rec).unwrap();
            assert_eq!(back.coefficients(), q.coefficients());
            assert_eq!(back.index_set().norm(), Some(LpDegree::Two));
            let x = [0.1, 0.2, 0.3];
            assert_eq!(back.eval(&x).unwrap(), q.eval(&x).unwrap());
        }
    }

    proptest! {
        #[test]
        fn mixed_partials_commute(seed in 0u64..1000, n in 2usize..=7) {
            let set = Arc::new(build_index_set(3, n, LpDegree::Two).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coeffs: Vec<f64> = (0..set.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let q = Polynomial::canonical(set, coeffs).unwrap();
            let dxy = q.partial(&[1, 1, 0]).unwrap();
            let chained_xy = q.differentiate(0).unwrap().differentiate(1).unwrap();
            let chained_yx = q.differentiate(1).unwrap().differentiate(0).unwrap();
            prop_assert_eq!(chained_xy.index_set().as_flat(), dxy.index_set().as_flat());
            for ((a, b), c) in chained_xy.coefficients().iter()
                .zip(chained_yx.coefficients())
                .zip(dxy.coefficients())
            {
                prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * c.abs());
                prop_assert!((a - c).abs() <= 4.0 * f64::EPSILON * c.abs());
            }
        }
    }
}
