//! Algebraic varieties through point samples.
//!
//! Given points `P ⊆ Ω = [-1,1]^m` and a space `Π_A`, the Vandermonde matrix
//! `R_{A,P}` (Lagrange basis of a unisolvent grid, evaluated at `P`) is
//! factorised by Gaussian elimination with full pivoting. The retained rows
//! pick an anchor subset `P₀` on which an on-variety Lagrange basis exists;
//! the discarded columns span the polynomials of `Π_A` vanishing on `P`.
//! When exactly one such polynomial exists it is the level-set polynomial
//! `Q_M` of the sample.

mod gefp;
mod vandermonde;

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GplsError, Result};
use crate::linalg::{inf_norm, right_pseudo_inverse};
use crate::mindex::MultiIndexSet;
use crate::nodes::{build_grid, lebesgue_estimate, GridScheme, UnisolventGrid};
use crate::poly::{Polynomial, PolynomialRecord};

pub use gefp::{gefp, kernel_vectors, GefpFactorization, DEFAULT_RANK_TOL};
pub use vandermonde::{assemble_vandermonde, Vandermonde, DOMAIN_SLACK};

/// Half-width of the box the point cloud is mapped into.
pub const DOMAIN_FILL: f64 = 0.95;

/// Relative gradient threshold below which a point counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Isotropic affine map `x_Ω = s·x + t` from user coordinates to `Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainTransform {
    pub scale: f64,
    pub translation: Vec<f64>,
}

impl DomainTransform {
    pub fn identity(m: usize) -> Self {
        DomainTransform {
            scale: 1.0,
            translation: vec![0.0; m],
        }
    }

    /// Maps the bounding box of `points` into `[-0.95, 0.95]^m`, centred.
    pub fn fit<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| GplsError::domain("empty point cloud"))?
            .as_ref();
        let m = first.len();
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for p in points {
            let p = p.as_ref();
            if p.len() != m {
                return Err(GplsError::DimensionMismatch {
                    expected: m,
                    actual: p.len(),
                });
            }
            for i in 0..m {
                if !p[i].is_finite() {
                    return Err(GplsError::domain("non-finite coordinate"));
                }
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let half = (0..m).map(|i| 0.5 * (hi[i] - lo[i])).fold(0.0, f64::max);
        let scale = if half > 0.0 { DOMAIN_FILL / half } else { 1.0 };
        let translation = (0..m).map(|i| -scale * 0.5 * (lo[i] + hi[i])).collect();
        Ok(DomainTransform { scale, translation })
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn to_omega(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.translation)
            .map(|(v, t)| self.scale * v + t)
            .collect()
    }

    pub fn to_user(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.translation)
            .map(|(v, t)| (v - t) / self.scale)
            .collect()
    }
}

/// How the level-set polynomial is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    /// The unique kernel polynomial (requires corank 1).
    KernelCorank1,
    /// `Σ 𝓛_i − 1` over the on-variety Lagrange basis.
    LagrangeSum,
    /// Least-squares fit of a relaxed signed distance.
    SignedDistance,
}

impl std::fmt::Display for FitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitMode::KernelCorank1 => "kernel-corank1",
            FitMode::LagrangeSum => "lagrange-sum",
            FitMode::SignedDistance => "signed-distance",
        })
    }
}

impl std::str::FromStr for FitMode {
    type Err = GplsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel-corank1" | "kernel" => Ok(FitMode::KernelCorank1),
            "lagrange-sum" | "lagrange" => Ok(FitMode::LagrangeSum),
            other => Err(GplsError::domain(format!("unknown fit mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub mode: FitMode,
    pub rank_tol: f64,
    /// `None` fits the bounding box of the cloud.
    pub transform: Option<DomainTransform>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            mode: FitMode::KernelCorank1,
            rank_tol: DEFAULT_RANK_TOL,
            transform: None,
        }
    }
}

/// Diagnostics attached to a fitted surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub mode: FitMode,
    /// Largest `|q(p)|` over the input points (in `Ω`).
    pub max_residual: f64,
    pub rank_tol: f64,
    /// Ratio of the first discarded to the last retained pivot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate_points: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Root-mean-square residual of a least-squares fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rms_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped_band_points: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normals_estimated: bool,
}

impl FitReport {
    pub(crate) fn new(mode: FitMode, rank_tol: f64) -> Self {
        FitReport {
            mode,
            max_residual: 0.0,
            rank_tol,
            rank_gap: None,
            degenerate_points: Vec::new(),
            warnings: Vec::new(),
            rms_residual: None,
            band_points: None,
            dropped_band_points: None,
            normals_estimated: false,
        }
    }
}

/// A reconstructed surface `{x : q(s·x + t) = 0}`.
#[derive(Debug, Clone)]
pub struct GplsSurface {
    /// Level-set polynomial in canonical form, in `Ω` coordinates.
    pub q: Polynomial,
    /// Canonical basis of the vanishing polynomials in `Π_A`, in `Ω`.
    pub kernel_basis: Vec<Polynomial>,
    pub rank: usize,
    pub anchor_indices: Vec<usize>,
    pub transform: DomainTransform,
    pub fit_report: FitReport,
}

impl GplsSurface {
    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn corank(&self) -> usize {
        self.q.index_set().len() - self.rank
    }

    /// `q` at a point given in user coordinates.
    pub fn eval_user(&self, x: &[f64]) -> Result<f64> {
        self.q.eval(&self.transform.to_omega(x))
    }

    /// Canonical polynomial of the surface in user coordinates.
    pub fn user_canonical(&self) -> Result<Polynomial> {
        self.q
            .compose_affine(self.transform.scale, &self.transform.translation)
    }

    pub fn to_record(&self) -> GplsSurfaceRecord {
        GplsSurfaceRecord {
            polynomial: self.q.to_record(),
            rank: self.rank,
            corank: self.corank(),
            anchor_indices: self.anchor_indices.clone(),
            transform: self.transform.clone(),
            fit_report: self.fit_report.clone(),
        }
    }

    pub fn from_record(record: &GplsSurfaceRecord) -> Result<Self> {
        let q = Polynomial::from_record(&record.polynomial)?.to_canonical();
        if record.transform.dim() != q.dim() || !(record.transform.scale > 0.0) {
            return Err(GplsError::Format("invalid domain transform".into()));
        }
        Ok(GplsSurface {
            q,
            kernel_basis: Vec::new(),
            rank: record.rank,
            anchor_indices: record.anchor_indices.clone(),
            transform: record.transform.clone(),
            fit_report: record.fit_report.clone(),
        })
    }
}

/// On-disk form of a [`GplsSurface`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GplsSurfaceRecord {
    #[serde(flatten)]
    pub polynomial: PolynomialRecord,
    pub rank: usize,
    pub corank: usize,
    pub anchor_indices: Vec<usize>,
    pub transform: DomainTransform,
    pub fit_report: FitReport,
}

/// Polynomials (Lagrange form on the Vandermonde's grid) spanning the
/// vanishing ideal within `Π_A`.
pub fn kernel_basis(v: &Vandermonde, f: &GefpFactorization) -> Vec<Polynomial> {
    kernel_vectors(f)
        .into_iter()
        .map(|c| Polynomial::lagrange(v.grid().clone(), c).expect("length matches"))
        .collect()
}

/// Anchor rows `P₀` picked by the factorisation.
pub fn anchor_indices(f: &GefpFactorization) -> Vec<usize> {
    f.row_perm[..f.rank].to_vec()
}

/// Minimum-norm coefficients `C = S⁺` of the on-variety Lagrange basis,
/// where `S` holds the anchor rows of the Vandermonde. Column `i` belongs
/// to anchor `i`.
fn on_variety_coefficients(v: &Vandermonde, f: &GefpFactorization) -> Result<DMatrix<f64>> {
    if f.rank == 0 {
        return Err(GplsError::domain("rank 0: no on-variety Lagrange basis"));
    }
    let s = anchor_block(v, f);
    right_pseudo_inverse(&s).ok_or_else(|| GplsError::domain("anchor block is singular"))
}

fn anchor_block(v: &Vandermonde, f: &GefpFactorization) -> DMatrix<f64> {
    let rows = anchor_indices(f);
    DMatrix::from_fn(rows.len(), v.ncols(), |i, j| v.entries()[(rows[i], j)])
}

/// Polynomials `𝓛_i` with `𝓛_i(p_j) = δ_ij` on the anchor subset, as
/// minimum-norm solutions of `S C_i = e_i`.
pub fn on_variety_lagrange(v: &Vandermonde, f: &GefpFactorization) -> Result<Vec<Polynomial>> {
    let c = on_variety_coefficients(v, f)?;
    Ok(c.column_iter()
        .map(|col| Polynomial::lagrange(v.grid().clone(), col.iter().copied().collect()).unwrap())
        .collect())
}

/// Fits the level-set polynomial of a point sample.
pub fn build_gpls<P>(
    points: &[P],
    set: Arc<MultiIndexSet>,
    options: &FitOptions,
) -> Result<GplsSurface>
where
    P: AsRef<[f64]> + Sync,
{
    if options.mode == FitMode::SignedDistance {
        return Err(GplsError::domain(
            "signed-distance fits need a narrow band; use the sdfit module",
        ));
    }
    let transform = match &options.transform {
        Some(t) => t.clone(),
        None => DomainTransform::fit(points)?,
    };
    let omega: Vec<Vec<f64>> = points
        .iter()
        .map(|p| transform.to_omega(p.as_ref()))
        .collect();
    let grid = Arc::new(build_grid(set.clone(), GridScheme::LejaChebyshev)?);
    let v = assemble_vandermonde(&grid, &omega)?;
    let f = gefp(v.entries(), options.rank_tol);
    let corank = f.corank();
    if corank == 0 {
        return Err(GplsError::NoVariety {
            points: points.len(),
            dim: set.len(),
        });
    }
    let mut report = FitReport::new(options.mode, options.rank_tol);
    report.rank_gap = Some(f.rank_gap());
    if f.rank_gap() > 1e-4 {
        report.warnings.push(format!(
            "weak rank separation: discarded/retained pivot ratio {:.3e}",
            f.rank_gap()
        ));
    }
    let kernel: Vec<Polynomial> = kernel_basis(&v, &f)
        .iter()
        .map(Polynomial::to_canonical)
        .collect();

    let q = match options.mode {
        FitMode::KernelCorank1 => {
            if corank > 1 {
                return Err(GplsError::Ambiguous { corank });
            }
            normalise(&kernel[0])
        }
        FitMode::LagrangeSum => {
            let c = on_variety_coefficients(&v, &f)?;
            let coeffs: Vec<f64> = c.row_iter().map(|row| row.sum() - 1.0).collect();
            let q = Polynomial::lagrange(grid.clone(), coeffs)?.to_canonical();
            if q.max_abs_coefficient() == 0.0 {
                return Err(GplsError::domain(
                    "Σ𝓛_i − 1 vanishes identically; use the kernel mode",
                ));
            }
            q
        }
        FitMode::SignedDistance => unreachable!(),
    };

    finish_report(&q, &omega, &mut report);
    Ok(GplsSurface {
        q,
        kernel_basis: kernel,
        rank: f.rank,
        anchor_indices: anchor_indices(&f),
        transform,
        fit_report: report,
    })
}

/// Scales to unit maximal canonical coefficient, oriented so that `q` is
/// positive at the corner `(1, …, 1)` of `Ω`.
fn normalise(q: &Polynomial) -> Polynomial {
    let scale = q.max_abs_coefficient();
    if scale == 0.0 {
        return q.clone();
    }
    let corner = vec![1.0; q.dim()];
    let at_corner = q.eval_unchecked(&corner);
    let sign = if at_corner != 0.0 {
        at_corner.signum()
    } else {
        let big =
            q.coefficients()
                .iter()
                .copied()
                .fold(0.0f64, |a, c| if c.abs() > a.abs() { c } else { a });
        big.signum()
    };
    q.scaled(sign / scale)
}

pub(crate) fn finish_report(q: &Polynomial, omega: &[Vec<f64>], report: &mut FitReport) {
    let grads: Vec<Polynomial> = (0..q.dim())
        .map(|i| q.differentiate(i).expect("axis in range"))
        .collect();
    let threshold = DEGENERACY_TOL * q.max_abs_coefficient().max(1.0);
    let per_point: Vec<(f64, bool)> = omega
        .par_iter()
        .map(|x| {
            let r = q.eval_unchecked(x).abs();
            let g2: f64 = grads.iter().map(|g| g.eval_unchecked(x).powi(2)).sum();
            (r, g2.sqrt() < threshold)
        })
        .collect();
    report.max_residual = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
    report.degenerate_points = per_point
        .iter()
        .enumerate()
        .filter(|(_, p)| p.1)
        .map(|(i, _)| i)
        .collect();
    if !report.degenerate_points.is_empty() {
        report.warnings.push(format!(
            "{} input points have a vanishing gradient",
            report.degenerate_points.len()
        ));
    }
}

/// Diagnostic quantities of the interpolation error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    /// Empirical (lower-bound) Lebesgue constant of the grid.
    pub lebesgue: f64,
    /// `‖S⁺‖_∞` for the anchor-row block `S`.
    pub pseudo_inverse_norm: f64,
    /// `1 + Λ ‖S⁺‖_∞`.
    pub factor: f64,
    /// Number of residual entries, `|P|`.
    pub residual_len: usize,
}

pub fn error_bound_report(
    v: &Vandermonde,
    f: &GefpFactorization,
    lebesgue_budget: usize,
    seed: u64,
) -> Result<ErrorBoundReport> {
    let lebesgue = lebesgue_estimate(v.grid(), lebesgue_budget.max(1), seed);
    let pinv = on_variety_coefficients(v, f)?;
    let norm = inf_norm(&pinv);
    Ok(ErrorBoundReport {
        lebesgue,
        pseudo_inverse_norm: norm,
        factor: 1.0 + lebesgue * norm,
        residual_len: v.nrows(),
    })
}

/// Grid used by [`build_gpls`] for a given index set.
pub fn default_grid(set: Arc<MultiIndexSet>) -> Result<Arc<UnisolventGrid>> {
    Ok(Arc::new(build_grid(set, GridScheme::LejaChebyshev)?))
}
