//! Level sets of surfaces that are not algebraic.
//!
//! Points are pushed along their normals by `±λ` to form a narrow band that
//! carries the signed offset `d = λ` (and `d = 0` on the surface). A
//! polynomial fitted to `d` by least squares has the surface as its
//! approximate zero set.

use std::sync::Arc;

use kiddo::{KdTree, SquaredEuclidean};
use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{GplsError, Result};
use crate::geom::Point3;
use crate::linalg::{least_squares, min_norm_direction};
use crate::mindex::MultiIndexSet;
use crate::poly::Polynomial;
use crate::variety::{
    assemble_vandermonde, default_grid, finish_report, DomainTransform, FitMode, FitReport,
    GplsSurface,
};

/// Offsets used when none are given, in `Ω` units.
pub const DEFAULT_OFFSETS: [f64; 3] = [0.005, 0.01, 0.035];

/// Neighbourhood size for normal estimation.
pub const DEFAULT_NORMAL_NEIGHBOURS: usize = 16;

/// On-surface points and their offset copies, all in `Ω` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct NarrowBand {
    pub transform: DomainTransform,
    pub on_surface: Vec<Point3>,
    /// Unit normals of the on-surface points.
    pub normals: Vec<Point3>,
    pub off_surface: Vec<Point3>,
    /// Signed offset carried by each off-surface point.
    pub distances: Vec<f64>,
    /// Index of the on-surface point each off-surface point came from.
    pub sources: Vec<usize>,
    pub offsets_used: Vec<f64>,
    /// Offset points that fell outside `Ω` and were left out.
    pub dropped: usize,
}

impl NarrowBand {
    pub fn len(&self) -> usize {
        self.on_surface.len() + self.off_surface.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All band points with their target values, on-surface points first.
    pub fn targets(&self) -> (Vec<Point3>, Vec<f64>) {
        let mut pts = self.on_surface.clone();
        pts.extend_from_slice(&self.off_surface);
        let mut d = vec![0.0; self.on_surface.len()];
        d.extend_from_slice(&self.distances);
        (pts, d)
    }
}

/// Builds the band. `points` are in user coordinates; `transform` defaults to
/// the bounding-box fit of the points. Offsets are in `Ω` units.
pub fn build_band(
    points: &[Point3],
    normals: &[Point3],
    offsets: &[f64],
    transform: Option<DomainTransform>,
) -> Result<NarrowBand> {
    if points.is_empty() {
        return Err(GplsError::domain("narrow band needs at least one point"));
    }
    if normals.len() != points.len() {
        return Err(GplsError::DimensionMismatch {
            expected: points.len(),
            actual: normals.len(),
        });
    }
    if let Some(bad) = offsets.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(GplsError::domain(format!(
            "offsets must be positive, got {bad}"
        )));
    }
    let bad: Vec<usize> = normals
        .iter()
        .enumerate()
        .filter(|(_, n)| {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            !(len > 0.0 && len.is_finite())
        })
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(GplsError::ZeroNormals(bad));
    }
    let transform = match transform {
        Some(t) => t,
        None => DomainTransform::fit(points)?,
    };
    let on_surface: Vec<Point3> = points
        .iter()
        .map(|p| {
            let v = transform.to_omega(p);
            [v[0], v[1], v[2]]
        })
        .collect();
    let unit: Vec<Point3> = normals
        .iter()
        .map(|n| {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            [n[0] / len, n[1] / len, n[2] / len]
        })
        .collect();
    let per_point: Vec<Vec<(Point3, f64)>> = on_surface
        .par_iter()
        .zip(&unit)
        .map(|(q, n)| {
            offsets
                .iter()
                .flat_map(|&l| [l, -l])
                .map(|l| ([q[0] + l * n[0], q[1] + l * n[1], q[2] + l * n[2]], l))
                .collect()
        })
        .collect();
    let mut band = NarrowBand {
        transform,
        on_surface,
        normals: unit,
        off_surface: Vec::new(),
        distances: Vec::new(),
        sources: Vec::new(),
        offsets_used: offsets.to_vec(),
        dropped: 0,
    };
    for (i, shifted) in per_point.into_iter().enumerate() {
        for (p, l) in shifted {
            if p.iter().all(|v| v.abs() <= 1.0) {
                band.off_surface.push(p);
                band.distances.push(l);
                band.sources.push(i);
            } else {
                band.dropped += 1;
            }
        }
    }
    Ok(band)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SdfOptions {
    /// Tikhonov weight added to the normal equations; 0 for plain least
    /// squares.
    pub ridge: f64,
}

/// Least-squares fit of the band's signed offsets over `Π_A`.
pub fn fit_sdf(
    band: &NarrowBand,
    set: Arc<MultiIndexSet>,
    options: &SdfOptions,
) -> Result<GplsSurface> {
    if band.on_surface.is_empty() {
        return Err(GplsError::domain("empty narrow band"));
    }
    let (pts, d) = band.targets();
    let grid = default_grid(set.clone())?;
    let v = assemble_vandermonde(&grid, &pts)?;
    // Without offsets every target is zero; fix the scale with ‖c‖ = 1
    // instead of returning the zero polynomial.
    let (coeffs, rank) = if band.off_surface.is_empty() {
        min_norm_direction(v.entries())
    } else {
        let ls = least_squares(v.entries(), &d, options.ridge);
        (ls.solution, ls.rank)
    };
    let q = Polynomial::lagrange(grid, coeffs)?.to_canonical();

    let mut report = FitReport::new(FitMode::SignedDistance, 0.0);
    let omega: Vec<Vec<f64>> = band.on_surface.iter().map(|p| p.to_vec()).collect();
    finish_report(&q, &omega, &mut report);
    if let Some(&index) = report.degenerate_points.first() {
        return Err(GplsError::DegenerateFit { index });
    }
    let residuals: Vec<f64> = pts
        .par_iter()
        .zip(&d)
        .map(|(p, t)| (q.eval_unchecked(p) - t).abs())
        .collect();
    report.max_residual = residuals.iter().copied().fold(0.0, f64::max);
    report.rms_residual =
        Some((residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt());
    report.band_points = Some(pts.len());
    report.dropped_band_points = Some(band.dropped);
    if pts.len() < set.len() {
        report.warnings.push(format!(
            "underdetermined: {} band points for {} coefficients",
            pts.len(),
            set.len()
        ));
    }
    if band.off_surface.is_empty() {
        report
            .warnings
            .push("no offset points: the fit only regresses zero on the surface".into());
    }
    Ok(GplsSurface {
        q,
        kernel_basis: Vec::new(),
        rank,
        anchor_indices: Vec::new(),
        transform: band.transform.clone(),
        fit_report: report,
    })
}

/// A regressor of scalar data near a surface, kept in Lagrange form on the
/// surface's domain `Ω` so that high degrees stay well conditioned.
#[derive(Debug, Clone)]
pub struct SurfaceRegression {
    pub polynomial: Polynomial,
    pub transform: DomainTransform,
    pub rank: usize,
    pub residual_max: f64,
    pub residual_rms: f64,
}

impl SurfaceRegression {
    /// Value at a user-coordinate point.
    pub fn eval(&self, x: &Point3) -> Result<f64> {
        self.polynomial.eval(&self.transform.to_omega(x))
    }

    /// Maximum and root-mean-square error against held-out values.
    pub fn held_out_error(&self, points: &[Point3], values: &[f64]) -> Result<(f64, f64)> {
        if points.len() != values.len() {
            return Err(GplsError::DimensionMismatch {
                expected: points.len(),
                actual: values.len(),
            });
        }
        let errs: Vec<f64> = points
            .par_iter()
            .zip(values)
            .map(|(x, v)| self.eval(x).map(|f| (f - v).abs()))
            .collect::<Result<_>>()?;
        let max = errs.iter().copied().fold(0.0, f64::max);
        let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len().max(1) as f64).sqrt();
        Ok((max, rms))
    }
}

/// Least-squares regressor of `values` at `points` (user coordinates) over
/// `Π_A`, in the domain of `surface`.
pub fn regress_on_surface(
    surface: &GplsSurface,
    points: &[Point3],
    values: &[f64],
    set: Arc<MultiIndexSet>,
    ridge: f64,
) -> Result<SurfaceRegression> {
    regress_in_domain(&surface.transform, points, values, set, ridge)
}

/// [`regress_on_surface`] for a bare domain transform.
pub fn regress_in_domain(
    transform: &DomainTransform,
    points: &[Point3],
    values: &[f64],
    set: Arc<MultiIndexSet>,
    ridge: f64,
) -> Result<SurfaceRegression> {
    if points.is_empty() {
        return Err(GplsError::domain("regression needs at least one point"));
    }
    if points.len() != values.len() {
        return Err(GplsError::DimensionMismatch {
            expected: points.len(),
            actual: values.len(),
        });
    }
    let omega: Vec<Vec<f64>> = points.iter().map(|p| transform.to_omega(p)).collect();
    let grid = default_grid(set)?;
    let v = assemble_vandermonde(&grid, &omega)?;
    let ls = least_squares(v.entries(), values, ridge);
    Ok(SurfaceRegression {
        polynomial: Polynomial::lagrange(grid, ls.solution)?,
        transform: transform.clone(),
        rank: ls.rank,
        residual_max: ls.residual_max,
        residual_rms: ls.residual_rms,
    })
}

/// Unit normals from principal component analysis of the `k` nearest
/// neighbours of each point, oriented away from the cloud's centroid.
pub fn estimate_normals(points: &[Point3], k: usize) -> Result<Vec<Point3>> {
    if points.len() < 3 {
        return Err(GplsError::domain(
            "normal estimation needs at least three points",
        ));
    }
    let k = k.clamp(3, points.len());
    let tree: KdTree<f64, 3> = (&points.to_vec()).into();
    let n = points.len() as f64;
    let centroid: Point3 = std::array::from_fn(|i| points.iter().map(|p| p[i]).sum::<f64>() / n);
    Ok(points
        .par_iter()
        .map(|p| {
            let nn = tree.nearest_n::<SquaredEuclidean>(p, k);
            let m = nn.len() as f64;
            let mean: Point3 = std::array::from_fn(|i| {
                nn.iter().map(|h| points[h.item as usize][i]).sum::<f64>() / m
            });
            let mut cov = Matrix3::<f64>::zeros();
            for h in &nn {
                let q = points[h.item as usize];
                for r in 0..3 {
                    for c in 0..3 {
                        cov[(r, c)] += (q[r] - mean[r]) * (q[c] - mean[c]);
                    }
                }
            }
            let eig = SymmetricEigen::new(cov);
            let imin = eig.eigenvalues.imin();
            let v = eig.eigenvectors.column(imin);
            let outward = (0..3).map(|i| v[i] * (p[i] - centroid[i])).sum::<f64>();
            let s = if outward < 0.0 { -1.0 } else { 1.0 };
            [s * v[0], s * v[1], s * v[2]]
        })
        .collect())
}
