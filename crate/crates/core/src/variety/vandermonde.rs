use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{GplsError, Result};
use crate::mindex::MultiIndexSet;
use crate::nodes::UnisolventGrid;

/// Slack allowed outside `[-1, 1]^m` before a point is rejected.
pub const DOMAIN_SLACK: f64 = 1e-9;

/// `R_{A,P}` with entries `r_{i,α} = L_α(p_i)`.
#[derive(Debug, Clone)]
pub struct Vandermonde {
    grid: Arc<UnisolventGrid>,
    points: Vec<f64>,
    entries: DMatrix<f64>,
}

/// Evaluates the grid's Lagrange basis at every point.
pub fn assemble_vandermonde<P>(grid: &Arc<UnisolventGrid>, points: &[P]) -> Result<Vandermonde>
where
    P: AsRef<[f64]> + Sync,
{
    let m = grid.dim();
    if points.is_empty() {
        return Err(GplsError::domain("at least one point is required"));
    }
    for (i, p) in points.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != m {
            return Err(GplsError::DimensionMismatch {
                expected: m,
                actual: p.len(),
            });
        }
        if p.iter()
            .any(|v| !v.is_finite() || v.abs() > 1.0 + DOMAIN_SLACK)
        {
            return Err(GplsError::domain(format!(
                "point {i} {p:?} lies outside [-1, 1]^{m}"
            )));
        }
    }
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| grid.lagrange_basis(p.as_ref()).expect("dimension checked"))
        .collect();
    let cols = grid.len();
    let entries = DMatrix::from_fn(points.len(), cols, |i, j| rows[i][j]);
    let flat = points
        .iter()
        .flat_map(|p| p.as_ref().iter().copied())
        .collect();
    Ok(Vandermonde {
        grid: grid.clone(),
        points: flat,
        entries,
    })
}

impl Vandermonde {
    pub fn grid(&self) -> &Arc<UnisolventGrid> {
        &self.grid
    }

    pub fn index_set(&self) -> &Arc<MultiIndexSet> {
        self.grid.index_set()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let m = self.grid.dim();
        &self.points[i * m..(i + 1) * m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mindex::{build_index_set, LpDegree};
    use crate::nodes::{build_grid, GridScheme};
    use crate::poly::Polynomial;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Arc<UnisolventGrid> {
        let set = Arc::new(build_index_set(3, n, LpDegree::Two).unwrap());
        Arc::new(build_grid(set, GridScheme::LejaChebyshev).unwrap())
    }

    #[test]
    fn grid_nodes_give_identity() {
        let g = grid(4);
        let nodes: Vec<Vec<f64>> = g.nodes().map(|x| x.to_vec()).collect();
        let v = assemble_vandermonde(&g, &nodes).unwrap();
        let id = DMatrix::<f64>::identity(g.len(), g.len());
        assert!((v.entries() - id).amax() <= 1e-12);
    }

    #[test]
    fn constant_space() {
        let g = grid(0);
        let v = assemble_vandermonde(&g, &[[0.3, 0.1, -0.2]]).unwrap();
        assert_eq!(v.entries().shape(), (1, 1));
        assert_eq!(v.entries()[(0, 0)], 1.0);
    }

    #[test]
    fn rows_evaluate_lagrange_polynomials() {
        let g = grid(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q = Polynomial::lagrange(g.clone(), c.clone()).unwrap();
        let pts: Vec<[f64; 3]> = (0..10)
            .map(|_| {
                [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    0.2,
                ]
            })
            .collect();
        let v = assemble_vandermonde(&g, &pts).unwrap();
        let vals = v.entries() * nalgebra::DVector::from_vec(c);
        for (i, p) in pts.iter().enumerate() {
            assert!((vals[i] - q.eval(p).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_points_outside_the_cube() {
        let g = grid(2);
        let err = assemble_vandermonde(&g, &[[0.0, 0.0, 0.0], [0.0, 1.0 + 1e-6, 0.0]]).unwrap_err();
        assert!(err.to_string().contains("point 1"), "{err}");
        assert!(assemble_vandermonde(&g, &[[1.0 + 1e-10, 0.0, 0.0]]).is_ok());
    }
}
