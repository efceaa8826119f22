//! Differential geometry of a polynomial level set `{q = 0} ⊂ ℝ³`.
//!
//! Every quantity is computed from exact partial derivatives of the
//! canonical polynomial. A [`SurfaceJet`] caches all 35 partials of order at
//! most 4, which is what the Laplacian of mean curvature needs.
//!
//! Points and results are in user coordinates. Internally the polynomial
//! lives in `Ω` and results are rescaled by the domain transform.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GplsError, Result};
use crate::mindex::{LpDegree, MultiIndexSet};
use crate::poly::{abs_sum_with_powers, power_table, Polynomial};
use crate::variety::{DomainTransform, GplsSurface, DEGENERACY_TOL};

pub type Point3 = [f64; 3];

/// A level-set polynomial together with its cached partial derivatives.
#[derive(Debug, Clone)]
pub struct SurfaceJet {
    transform: DomainTransform,
    orders: MultiIndexSet,
    lookup: [[[usize; 5]; 5]; 5],
    partials: Vec<Polynomial>,
    max_degree: Vec<usize>,
    coeff_scale: f64,
}

/// Partial derivatives of `q` at one point, indexed by order.
struct Derivs<'a> {
    lookup: &'a [[[usize; 5]; 5]; 5],
    values: Vec<f64>,
}

impl Derivs<'_> {
    fn d(&self, k: [usize; 3]) -> f64 {
        self.values[self.lookup[k[0]][k[1]][k[2]]]
    }

    fn grad(&self) -> [f64; 3] {
        [self.d([1, 0, 0]), self.d([0, 1, 0]), self.d([0, 0, 1])]
    }

    fn hessian(&self) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for (i, row) in h.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let mut k = [0; 3];
                k[i] += 1;
                k[j] += 1;
                *v = self.d(k);
            }
        }
        h
    }
}

fn unit(i: usize) -> [usize; 3] {
    let mut k = [0; 3];
    k[i] = 1;
    k
}

fn add(mut a: [usize; 3], b: [usize; 3]) -> [usize; 3] {
    for i in 0..3 {
        a[i] += b[i];
    }
    a
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn quad(h: &[[f64; 3]; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i] * h[i][j] * b[j];
        }
    }
    s
}

impl SurfaceJet {
    /// `q` is given in `Ω` coordinates; `transform` maps user points to `Ω`.
    pub fn new(q: &Polynomial, transform: DomainTransform) -> Result<Self> {
        if q.dim() != 3 || transform.dim() != 3 {
            return Err(GplsError::DimensionMismatch {
                expected: 3,
                actual: q.dim(),
            });
        }
        let q = q.to_canonical();
        let orders = MultiIndexSet::lp_ball(3, 4, LpDegree::One)?;
        let mut lookup = [[[usize::MAX; 5]; 5]; 5];
        let mut partials = Vec::with_capacity(orders.len());
        for (pos, k) in orders.iter().enumerate() {
            lookup[k[0] as usize][k[1] as usize][k[2] as usize] = pos;
            partials.push(q.partial(k)?);
        }
        Ok(SurfaceJet {
            transform,
            orders,
            lookup,
            max_degree: q.index_set().max_per_dim().to_vec(),
            coeff_scale: q.max_abs_coefficient(),
            partials,
        })
    }

    pub fn from_surface(surface: &GplsSurface) -> Result<Self> {
        Self::new(&surface.q, surface.transform.clone())
    }

    /// Jet of a polynomial given directly in user coordinates.
    pub fn exact(q: &Polynomial) -> Result<Self> {
        Self::new(q, DomainTransform::identity(3))
    }

    pub fn transform(&self) -> &DomainTransform {
        &self.transform
    }

    /// The level-set polynomial in `Ω` coordinates.
    pub fn polynomial(&self) -> &Polynomial {
        &self.partials[0]
    }

    /// Cached `∂^k q` (in `Ω` coordinates); `None` beyond order 4.
    pub fn partial(&self, k: [u32; 3]) -> Option<&Polynomial> {
        self.orders.position(&k).map(|p| &self.partials[p])
    }

    fn to_omega(&self, x: &Point3) -> Point3 {
        let v = self.transform.to_omega(x);
        [v[0], v[1], v[2]]
    }

    fn derivs(&self, y: &Point3, order: u32) -> Derivs<'_> {
        let powers = power_table(y, &self.max_degree);
        let values = self
            .orders
            .iter()
            .zip(&self.partials)
            .map(|(k, p)| {
                if k.iter().sum::<u32>() <= order {
                    p.eval_with_powers(&powers)
                } else {
                    f64::NAN
                }
            })
            .collect();
        Derivs {
            lookup: &self.lookup,
            values,
        }
    }

    fn degeneracy_threshold(&self) -> f64 {
        DEGENERACY_TOL * self.coeff_scale.max(1.0)
    }

    /// `q` at a user point (the value of the `Ω` polynomial).
    pub fn value(&self, x: &Point3) -> f64 {
        let y = self.to_omega(x);
        self.partials[0].eval_with_powers(&power_table(&y, &self.max_degree))
    }

    /// Gradient of `x ↦ q(s·x + t)`.
    pub fn gradient(&self, x: &Point3) -> Point3 {
        let g = self.derivs(&self.to_omega(x), 1).grad();
        let s = self.transform.scale;
        [s * g[0], s * g[1], s * g[2]]
    }

    /// Unit normal `∇q/‖∇q‖`.
    pub fn normal(&self, x: &Point3) -> Result<Point3> {
        let y = self.to_omega(x);
        let g = self.derivs(&y, 1).grad();
        let n = dot(&g, &g).sqrt();
        self.check_gradient(n, x)?;
        Ok([g[0] / n, g[1] / n, g[2] / n])
    }

    fn check_gradient(&self, norm: f64, x: &Point3) -> Result<()> {
        if !(norm >= self.degeneracy_threshold()) {
            return Err(GplsError::Degenerate {
                grad_norm: norm,
                point: x.to_vec(),
            });
        }
        Ok(())
    }
}

/// Settings for [`project_to_surface`].
#[derive(Debug, Clone, Copy)]
pub struct ProjectOptions {
    pub max_iter: usize,
    /// Absolute residual tolerance in `Ω`; `None` uses
    /// `1e-14 · (1 + ‖coefficients‖_∞)`.
    pub tol: Option<f64>,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        ProjectOptions {
            max_iter: 50,
            tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: Point3,
    /// `‖point − x‖` in user units.
    pub distance: f64,
    pub iterations: usize,
    /// `|q(point)|` in `Ω`.
    pub residual: f64,
    /// Smallest distance the evaluation can resolve at `point`: the rounding
    /// bound `16ε Σ|c_α y^α|` divided by `‖∇q‖`, in user units.
    pub resolution: f64,
}

/// Newton–gradient iteration `y ← y − q(y)∇q(y)/‖∇q(y)‖²` onto `{q = 0}`.
/// Converges when `|q|` is below the tolerance or below the rounding error
/// of evaluating `q` at the iterate. A step that overshoots the zero set
/// with a larger residual is halved once.
pub fn project_to_surface(
    jet: &SurfaceJet,
    x: &Point3,
    opts: ProjectOptions,
) -> Result<Projection> {
    let tol = opts.tol.unwrap_or(1e-14 * (1.0 + jet.coeff_scale));
    let q = &jet.partials[0];
    let start = jet.to_omega(x);
    let residual = |y: &Point3| -> (f64, f64) {
        let powers = power_table(y, &jet.max_degree);
        let v = q.eval_with_powers(&powers);
        let floor = 16.0 * f64::EPSILON * abs_sum_with_powers(q, &powers);
        (v, tol.max(floor))
    };
    let finish = |y: Point3, iterations: usize, r: f64| {
        let d = ((y[0] - start[0]).powi(2) + (y[1] - start[1]).powi(2) + (y[2] - start[2]).powi(2))
            .sqrt();
        let u = jet.transform.to_user(&y);
        let floor = 16.0 * f64::EPSILON * abs_sum_with_powers(q, &power_table(&y, &jet.max_degree));
        let g = jet.derivs(&y, 1).grad();
        Projection {
            point: [u[0], u[1], u[2]],
            distance: d / jet.transform.scale,
            iterations,
            residual: r,
            resolution: floor / dot(&g, &g).sqrt() / jet.transform.scale,
        }
    };
    let mut y = start;
    let (mut val, mut accept) = residual(&y);
    for it in 0..opts.max_iter {
        if val.abs() <= accept {
            return Ok(finish(y, it, val.abs()));
        }
        let g = jet.derivs(&y, 1).grad();
        let g2 = dot(&g, &g);
        let gn = g2.sqrt();
        if !(gn >= jet.degeneracy_threshold()) {
            return Err(GplsError::Degenerate {
                grad_norm: gn,
                point: jet.transform.to_user(&y),
            });
        }
        let f = val / g2;
        let mut next = [y[0] - f * g[0], y[1] - f * g[1], y[2] - f * g[2]];
        let (mut nval, mut nacc) = residual(&next);
        if nval.signum() != val.signum() && nval.abs() > val.abs() {
            next = [
                0.5 * (y[0] + next[0]),
                0.5 * (y[1] + next[1]),
                0.5 * (y[2] + next[2]),
            ];
            (nval, nacc) = residual(&next);
        }
        let step =
            ((next[0] - y[0]).powi(2) + (next[1] - y[1]).powi(2) + (next[2] - y[2]).powi(2)).sqrt();
        y = next;
        val = nval;
        accept = nacc;
        // Stagnation at rounding level: the iterate no longer moves.
        let ynorm = dot(&y, &y).sqrt();
        if step <= 4.0 * f64::EPSILON * (1.0 + ynorm) && val.abs() <= 64.0 * accept {
            return Ok(finish(y, it + 1, val.abs()));
        }
    }
    if val.abs() <= accept {
        return Ok(finish(y, opts.max_iter, val.abs()));
    }
    Err(GplsError::NonConvergence {
        iterations: opts.max_iter,
        residual: val.abs(),
        point: jet.transform.to_user(&y),
    })
}

/// Maximum and mean distance of points to the zero set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub count: usize,
    pub e_inf: f64,
    pub e_mean: f64,
    /// Largest [`Projection::resolution`] over the points.
    pub resolution: f64,
}

/// Projects every point and summarises the distances. Fails on the first
/// point that does not converge.
pub fn distance_stats(jet: &SurfaceJet, points: &[Point3]) -> Result<DistanceStats> {
    let proj: Vec<Projection> = points
        .par_iter()
        .map(|x| project_to_surface(jet, x, ProjectOptions::default()))
        .collect::<Result<_>>()?;
    let count = proj.len();
    Ok(DistanceStats {
        count,
        e_inf: proj.iter().map(|p| p.distance).fold(0.0, f64::max),
        e_mean: if count == 0 {
            0.0
        } else {
            proj.iter().map(|p| p.distance).sum::<f64>() / count as f64
        },
        resolution: proj.iter().map(|p| p.resolution).fold(0.0, f64::max),
    })
}

/// Mean curvature `(∇q H ∇qᵀ − ‖∇q‖² tr H) / (2‖∇q‖³)`, signed with the
/// orientation of `∇q` (the unit sphere with `q = ‖x‖² − 1` gives −1).
pub fn mean_curvature(jet: &SurfaceJet, x: &Point3) -> Result<f64> {
    let d = jet.derivs(&jet.to_omega(x), 2);
    let (g, h) = (d.grad(), d.hessian());
    let n = dot(&g, &g).sqrt();
    jet.check_gradient(n, x)?;
    Ok(jet.transform.scale * mean_from(&g, &h))
}

fn mean_from(g: &[f64; 3], h: &[[f64; 3]; 3]) -> f64 {
    let n2 = dot(g, g);
    let tr = h[0][0] + h[1][1] + h[2][2];
    (quad(h, g, g) - n2 * tr) / (2.0 * n2 * n2.sqrt())
}

/// Gauss curvature `∇q adj(H) ∇qᵀ / ‖∇q‖⁴` (the unit sphere gives +1).
pub fn gauss_curvature(jet: &SurfaceJet, x: &Point3) -> Result<f64> {
    let d = jet.derivs(&jet.to_omega(x), 2);
    let (g, h) = (d.grad(), d.hessian());
    let n = dot(&g, &g).sqrt();
    jet.check_gradient(n, x)?;
    Ok(jet.transform.scale.powi(2) * gauss_from(&g, &h))
}

fn gauss_from(g: &[f64; 3], h: &[[f64; 3]; 3]) -> f64 {
    let mut adj = [[0.0; 3]; 3];
    for (i, row) in adj.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            // Cofactor of h[j][i].
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *v = h[r0][c0] * h[r1][c1] - h[r0][c1] * h[r1][c0];
        }
    }
    let n2 = dot(g, g);
    quad(&adj, g, g) / (n2 * n2)
}

/// First and second derivatives of a user-space field at a point.
fn field_derivs(f: &Polynomial, x: &Point3) -> Result<(f64, [f64; 3], [[f64; 3]; 3])> {
    if f.dim() != 3 {
        return Err(GplsError::DimensionMismatch {
            expected: 3,
            actual: f.dim(),
        });
    }
    let mut grad = [0.0; 3];
    let mut hess = [[0.0; 3]; 3];
    for i in 0..3 {
        let mut k = [0u32; 3];
        k[i] = 1;
        grad[i] = f.partial(&k)?.eval(x)?;
        for j in i..3 {
            let mut k = [0u32; 3];
            k[i] += 1;
            k[j] += 1;
            let v = f.partial(&k)?.eval(x)?;
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok((f.eval(x)?, grad, hess))
}

/// Tangential gradient `∇f − ⟨η, ∇f⟩η` of a field given in user coordinates.
pub fn surface_gradient(jet: &SurfaceJet, f: &Polynomial, x: &Point3) -> Result<Point3> {
    let eta = jet.normal(x)?;
    let (_, g, _) = field_derivs(f, x)?;
    let c = dot(&eta, &g);
    Ok([g[0] - c * eta[0], g[1] - c * eta[1], g[2] - c * eta[2]])
}

/// Laplace–Beltrami operator `Δf + 2K_mean⟨η, ∇f⟩ − ⟨η, ∇²f η⟩`.
pub fn laplace_beltrami(jet: &SurfaceJet, f: &Polynomial, x: &Point3) -> Result<f64> {
    let eta = jet.normal(x)?;
    let k = mean_curvature(jet, x)?;
    let (_, g, h) = field_derivs(f, x)?;
    let lap = h[0][0] + h[1][1] + h[2][2];
    Ok(lap + 2.0 * k * dot(&eta, &g) - quad(&h, &eta, &eta))
}

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Debug, Clone, Copy)]
struct Jet2 {
    v: f64,
    g: [f64; 3],
    h: [[f64; 3]; 3],
}

impl Jet2 {
    fn constant(v: f64) -> Self {
        Jet2 {
            v,
            g: [0.0; 3],
            h: [[0.0; 3]; 3],
        }
    }

    fn add(self, o: Jet2) -> Jet2 {
        let mut r = self;
        r.v += o.v;
        for i in 0..3 {
            r.g[i] += o.g[i];
            for j in 0..3 {
                r.h[i][j] += o.h[i][j];
            }
        }
        r
    }

    fn scale(self, c: f64) -> Jet2 {
        let mut r = self;
        r.v *= c;
        for i in 0..3 {
            r.g[i] *= c;
            for j in 0..3 {
                r.h[i][j] *= c;
            }
        }
        r
    }

    fn mul(self, o: Jet2) -> Jet2 {
        let mut r = Jet2::constant(self.v * o.v);
        for i in 0..3 {
            r.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..3 {
                r.h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        r
    }

    /// `φ ∘ self` given `φ(v), φ'(v), φ''(v)`.
    fn compose(self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let mut r = Jet2::constant(f0);
        for i in 0..3 {
            r.g[i] = f1 * self.g[i];
            for j in 0..3 {
                r.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        r
    }
}

/// `Δ_M K_mean` from the split `K_mean = u·v` with
/// `u = ½(∇q H ∇qᵀ − ‖∇q‖² tr H)` and `v = ‖∇q‖⁻³`; the first and second
/// derivatives of `u` and `v` come from exact partials up to order 4.
pub fn laplacian_mean_curvature(jet: &SurfaceJet, x: &Point3) -> Result<f64> {
    let y = jet.to_omega(x);
    let d = jet.derivs(&y, 4);
    let g = d.grad();
    let n = dot(&g, &g).sqrt();
    jet.check_gradient(n, x)?;
    let s = jet.transform.scale;
    Ok(s.powi(3) * lap_mean_from(&d))
}

fn lap_mean_from(d: &Derivs<'_>) -> f64 {
    // Jets of ∂_i q and ∂_i∂_j q.
    let gj: Vec<Jet2> = (0..3)
        .map(|i| {
            let mut j = Jet2::constant(d.d(unit(i)));
            for a in 0..3 {
                j.g[a] = d.d(add(unit(i), unit(a)));
                for b in 0..3 {
                    j.h[a][b] = d.d(add(add(unit(i), unit(a)), unit(b)));
                }
            }
            j
        })
        .collect();
    let hj = |i: usize, k: usize| -> Jet2 {
        let base = add(unit(i), unit(k));
        let mut j = Jet2::constant(d.d(base));
        for a in 0..3 {
            j.g[a] = d.d(add(base, unit(a)));
            for b in 0..3 {
                j.h[a][b] = d.d(add(add(base, unit(a)), unit(b)));
            }
        }
        j
    };
    let mut ghg = Jet2::constant(0.0);
    let mut trace = Jet2::constant(0.0);
    let mut norm2 = Jet2::constant(0.0);
    for i in 0..3 {
        norm2 = norm2.add(gj[i].mul(gj[i]));
        trace = trace.add(hj(i, i));
        for k in 0..3 {
            ghg = ghg.add(gj[i].mul(hj(i, k)).mul(gj[k]));
        }
    }
    let u = ghg.add(norm2.mul(trace).scale(-1.0)).scale(0.5);
    let s = norm2.v;
    let v = norm2.compose(s.powf(-1.5), -1.5 * s.powf(-2.5), 3.75 * s.powf(-3.5));
    let w = u.mul(v);
    let gvec = d.grad();
    let gn = dot(&gvec, &gvec).sqrt();
    let eta = [gvec[0] / gn, gvec[1] / gn, gvec[2] / gn];
    let lap = w.h[0][0] + w.h[1][1] + w.h[2][2];
    lap + 2.0 * w.v * dot(&eta, &w.g) - quad(&w.h, &eta, &eta)
}

/// Curvatures at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointCurvature {
    pub grad_norm: f64,
    pub k_mean: f64,
    pub k_gauss: f64,
    pub lap_k_mean: Option<f64>,
    pub normal: Point3,
}

/// All curvature quantities at `x` from a single evaluation of the jet.
pub fn curvature_at(jet: &SurfaceJet, x: &Point3, laplacian: bool) -> Result<PointCurvature> {
    let y = jet.to_omega(x);
    let d = jet.derivs(&y, if laplacian { 4 } else { 2 });
    let (g, h) = (d.grad(), d.hessian());
    let n = dot(&g, &g).sqrt();
    jet.check_gradient(n, x)?;
    let s = jet.transform.scale;
    Ok(PointCurvature {
        grad_norm: s * n,
        k_mean: s * mean_from(&g, &h),
        k_gauss: s * s * gauss_from(&g, &h),
        lap_k_mean: laplacian.then(|| s.powi(3) * lap_mean_from(&d)),
        normal: [g[0] / n, g[1] / n, g[2] / n],
    })
}

/// Reference values at a surface point. Mean curvature and its Laplacian use
/// the convention in which convex surfaces have positive mean curvature
/// with respect to `normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    pub k_mean: f64,
    pub k_gauss: f64,
    pub lap_k_mean: Option<f64>,
    pub normal: Point3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub k_mean: f64,
    pub err_k_mean: f64,
    pub k_gauss: f64,
    pub err_k_gauss: f64,
    pub lap_k_mean: Option<f64>,
    pub err_lap_k_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRecord {
    pub point: Point3,
    pub grad_norm: f64,
    pub k_mean: f64,
    pub k_gauss: f64,
    pub lap_k_mean: Option<f64>,
    pub oracle: Option<OracleComparison>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub linf: f64,
    pub mean: f64,
}

impl ErrorStats {
    pub fn from_errors(errors: impl IntoIterator<Item = f64>) -> Option<Self> {
        let (mut linf, mut sum, mut count) = (0.0f64, 0.0, 0usize);
        for e in errors {
            linf = linf.max(e);
            sum += e;
            count += 1;
        }
        (count > 0).then(|| ErrorStats {
            linf,
            mean: sum / count as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSummary {
    pub points: usize,
    pub degenerate: usize,
    pub k_mean: Option<ErrorStats>,
    pub k_gauss: Option<ErrorStats>,
    pub lap_k_mean: Option<ErrorStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub records: Vec<CurvatureRecord>,
    pub degenerate_points: Vec<usize>,
    pub summary: CurvatureSummary,
}

pub type Oracle<'a> = dyn Fn(&Point3) -> Result<OracleSample> + Sync + 'a;

/// Evaluates curvatures at every point. Points with a vanishing gradient are
/// listed instead of reported. With an oracle, the fit's mean curvature and
/// its Laplacian are flipped into the oracle's orientation before comparing.
pub fn curvature_report(
    jet: &SurfaceJet,
    points: &[Point3],
    oracle: Option<&Oracle<'_>>,
    laplacian: bool,
) -> Result<CurvatureReport> {
    let results: Vec<Result<Option<CurvatureRecord>>> = points
        .par_iter()
        .map(|x| {
            let c = match curvature_at(jet, x, laplacian) {
                Ok(c) => c,
                Err(GplsError::Degenerate { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let oracle = match oracle {
                Some(o) => {
                    let truth = o(x)?;
                    let sigma = dot(&c.normal, &truth.normal).signum();
                    let mean = -sigma * c.k_mean;
                    let lap = c.lap_k_mean.map(|l| -sigma * l);
                    Some(OracleComparison {
                        k_mean: truth.k_mean,
                        err_k_mean: (mean - truth.k_mean).abs(),
                        k_gauss: truth.k_gauss,
                        err_k_gauss: (c.k_gauss - truth.k_gauss).abs(),
                        lap_k_mean: truth.lap_k_mean,
                        err_lap_k_mean: match (lap, truth.lap_k_mean) {
                            (Some(a), Some(b)) => Some((a - b).abs()),
                            _ => None,
                        },
                    })
                }
                None => None,
            };
            Ok(Some(CurvatureRecord {
                point: *x,
                grad_norm: c.grad_norm,
                k_mean: c.k_mean,
                k_gauss: c.k_gauss,
                lap_k_mean: c.lap_k_mean,
                oracle,
            }))
        })
        .collect();
    let mut records = Vec::with_capacity(points.len());
    let mut degenerate_points = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r? {
            Some(rec) => records.push(rec),
            None => degenerate_points.push(i),
        }
    }
    let oracles = || records.iter().filter_map(|r| r.oracle.as_ref());
    let summary = CurvatureSummary {
        points: records.len(),
        degenerate: degenerate_points.len(),
        k_mean: ErrorStats::from_errors(oracles().map(|o| o.err_k_mean)),
        k_gauss: ErrorStats::from_errors(oracles().map(|o| o.err_k_gauss)),
        lap_k_mean: ErrorStats::from_errors(oracles().filter_map(|o| o.err_lap_k_mean)),
    };
    Ok(CurvatureReport {
        records,
        degenerate_points,
        summary,
    })
}

impl CurvatureReport {
    /// Per-point CSV with a header line.
    pub fn to_csv(&self) -> String {
        let lap = self.records.iter().any(|r| r.lap_k_mean.is_some());
        let oracle = self.records.iter().any(|r| r.oracle.is_some());
        let oracle_lap = self
            .records
            .iter()
            .any(|r| r.oracle.is_some_and(|o| o.err_lap_k_mean.is_some()));
        let mut out = String::from("x,y,z,grad_norm,k_mean,k_gauss");
        if lap {
            out.push_str(",lap_k_mean");
        }
        if oracle {
            out.push_str(",oracle_k_mean,err_k_mean,oracle_k_gauss,err_k_gauss");
        }
        if oracle_lap {
            out.push_str(",oracle_lap_k_mean,err_lap_k_mean");
        }
        out.push('\n');
        for r in &self.records {
            let p = r.point;
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                p[0], p[1], p[2], r.grad_norm, r.k_mean, r.k_gauss
            );
            if lap {
                let _ = write!(out, ",{}", r.lap_k_mean.unwrap_or(f64::NAN));
            }
            if let Some(o) = r.oracle.filter(|_| oracle) {
                let _ = write!(
                    out,
                    ",{},{},{},{}",
                    o.k_mean, o.err_k_mean, o.k_gauss, o.err_k_gauss
                );
                if oracle_lap {
                    let _ = write!(
                        out,
                        ",{},{}",
                        o.lap_k_mean.unwrap_or(f64::NAN),
                        o.err_lap_k_mean.unwrap_or(f64::NAN)
                    );
                }
            }
            out.push('\n');
        }
        out
    }
}
