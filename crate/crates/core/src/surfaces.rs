//! Benchmark surfaces with exact implicit polynomials, a seeded sampler,
//! curvature oracles and a smooth non-algebraic test surface.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GplsError, Result};
use crate::geom::{
    curvature_at, project_to_surface, OracleSample, Point3, ProjectOptions, SurfaceJet,
};
use crate::io::PointCloud;
use crate::mindex::{LpDegree, MultiIndexSet};
use crate::poly::{Basis, Polynomial};

/// Closed-form curvature formulas exist for ellipsoids and tori only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceKind {
    Ellipsoid { a: f64, b: f64, c: f64 },
    Biconcave { d: f64, c: f64 },
    Torus { big_r: f64, r: f64 },
    Genus2,
    Klein,
}

impl SurfaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceKind::Ellipsoid { .. } => "ellipsoid",
            SurfaceKind::Biconcave { .. } => "biconcave",
            SurfaceKind::Torus { .. } => "torus",
            SurfaceKind::Genus2 => "genus2",
            SurfaceKind::Klein => "klein",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceDef {
    pub kind: SurfaceKind,
    /// Canonical implicit polynomial over the recommended index set.
    pub polynomial: Polynomial,
    pub degree: usize,
    pub recommended: (usize, LpDegree),
    pub orientable: bool,
    /// Box `[lo, hi]` containing the (bounded component of the) surface.
    pub bounds: [Point3; 2],
}

impl SurfaceDef {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn has_closed_form_oracle(&self) -> bool {
        matches!(
            self.kind,
            SurfaceKind::Ellipsoid { .. } | SurfaceKind::Torus { .. }
        )
    }

    /// Curvature ground truth is available for every orientable surface.
    pub fn has_oracle(&self) -> bool {
        self.orientable
    }

    /// Parameters as `key=value` pairs, in catalogue order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.kind {
            SurfaceKind::Ellipsoid { a, b, c } => vec![("a", a), ("b", b), ("c", c)],
            SurfaceKind::Biconcave { d, c } => vec![("d", d), ("c", c)],
            SurfaceKind::Torus { big_r, r } => vec![("R", big_r), ("r", r)],
            SurfaceKind::Genus2 | SurfaceKind::Klein => Vec::new(),
        }
    }

    pub fn params_string(&self) -> String {
        self.params()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn recommended_set(&self) -> &Arc<MultiIndexSet> {
        self.polynomial.index_set()
    }
}

impl fmt::Display for SurfaceDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params_string();
        if params.is_empty() {
            write!(f, "{}", self.name())
        } else {
            write!(f, "{}({})", self.name(), params)
        }
    }
}

/// Parses `a=1,b=0.5`.
pub fn parse_params(text: &str) -> Result<Vec<(String, f64)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| GplsError::domain(format!("expected key=value, got '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| GplsError::domain(format!("invalid number in '{item}'")))?;
            if !v.is_finite() {
                return Err(GplsError::domain(format!(
                    "non-finite parameter in '{item}'"
                )));
            }
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Sparse canonical polynomial in three variables, used to expand the
/// defining equations.
#[derive(Debug, Clone, Default)]
struct Sparse(BTreeMap<[u32; 3], f64>);

impl Sparse {
    fn constant(c: f64) -> Self {
        Sparse([([0, 0, 0], c)].into_iter().collect())
    }

    fn var(i: usize) -> Self {
        let mut a = [0; 3];
        a[i] = 1;
        Sparse([(a, 1.0)].into_iter().collect())
    }

    fn add(&self, o: &Sparse) -> Sparse {
        let mut r = self.0.clone();
        for (k, v) in &o.0 {
            *r.entry(*k).or_insert(0.0) += v;
        }
        Sparse(r)
    }

    fn sub(&self, o: &Sparse) -> Sparse {
        self.add(&o.scale(-1.0))
    }

    fn scale(&self, c: f64) -> Sparse {
        Sparse(self.0.iter().map(|(k, v)| (*k, c * v)).collect())
    }

    fn mul(&self, o: &Sparse) -> Sparse {
        let mut r = BTreeMap::new();
        for (a, x) in &self.0 {
            for (b, y) in &o.0 {
                let k = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                *r.entry(k).or_insert(0.0) += x * y;
            }
        }
        Sparse(r)
    }

    fn terms(&self) -> Vec<(Vec<u32>, f64)> {
        self.0
            .iter()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, v)| (k.to_vec(), *v))
            .collect()
    }
}

fn square(i: usize) -> Sparse {
    Sparse::var(i).mul(&Sparse::var(i))
}

fn radius2() -> Sparse {
    square(0).add(&square(1)).add(&square(2))
}

fn get(params: &[(String, f64)], key: &str, default: f64) -> f64 {
    params
        .iter()
        .rev()
        .find(|(k, _)| k == key)
        .map_or(default, |(_, v)| *v)
}

fn check_keys(name: &str, params: &[(String, f64)], allowed: &[&str]) -> Result<()> {
    for (k, _) in params {
        if !allowed.contains(&k.as_str()) {
            return Err(GplsError::domain(format!(
                "unknown parameter '{k}' for {name} (expected {})",
                if allowed.is_empty() {
                    "none".to_string()
                } else {
                    allowed.join(", ")
                }
            )));
        }
    }
    Ok(())
}

/// Largest root of `(d² + t)³ = 8d²t + c⁴`, the squared equatorial radius
/// of the biconcave disc; `None` when the zero set is empty.
fn biconcave_radius2(d: f64, c: f64) -> Option<f64> {
    let f = |t: f64| (d * d + t).powi(3) - 8.0 * d * d * t - c.powi(4);
    // f is increasing beyond its critical point.
    let mut lo = ((8.0f64 / 3.0).sqrt() * d - d * d).max(0.0);
    if f(lo) >= 0.0 {
        return None;
    }
    let mut hi = lo + 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Largest `|x|` on the biconcave disc: `x² = (8d²s + c⁴)^⅓ − d² − s`
/// maximised over `s = y² + z² ∈ [0, ρ²]` on a fine grid, plus 1%.
fn biconcave_half_thickness(d: f64, c: f64, rho2: f64) -> f64 {
    let steps = 4096;
    let best = (0..=steps)
        .map(|i| {
            let s = rho2 * i as f64 / steps as f64;
            (8.0 * d * d * s + c.powi(4)).cbrt() - d * d - s
        })
        .fold(0.0, f64::max);
    1.01 * best.sqrt()
}

/// Looks up a catalogue surface. Names: `ellipsoid` (`a,b,c`, default 1),
/// `sphere` (`r`, default 1), `biconcave` (`d,c`, default 0.5, 0.375),
/// `torus` (`R,r`, default 0.5, 0.3), `genus2`, `klein`.
pub fn catalog_lookup(name: &str, params: &[(String, f64)]) -> Result<SurfaceDef> {
    let (x, y, z) = (Sparse::var(0), Sparse::var(1), Sparse::var(2));
    let one = Sparse::constant(1.0);
    let (kind, poly, degree, rec, orientable, half): (_, _, _, _, _, Point3) =
        match name.to_ascii_lowercase().as_str() {
            "ellipsoid" | "sphere" => {
                let (a, b, c) = if name.eq_ignore_ascii_case("sphere") {
                    check_keys(name, params, &["r"])?;
                    let r = get(params, "r", 1.0);
                    (r, r, r)
                } else {
                    check_keys(name, params, &["a", "b", "c"])?;
                    (get(params, "a", 1.0), get(params, "b", 1.0), get(params, "c", 1.0))
                };
                if a == 0.0 || b == 0.0 || c == 0.0 {
                    return Err(GplsError::domain("ellipsoid requires a, b, c ≠ 0"));
                }
                let q = square(0)
                    .scale(1.0 / (a * a))
                    .add(&square(1).scale(1.0 / (b * b)))
                    .add(&square(2).scale(1.0 / (c * c)))
                    .sub(&one);
                let (a, b, c) = (a.abs(), b.abs(), c.abs());
                (SurfaceKind::Ellipsoid { a, b, c }, q, 2, (2, LpDegree::Two), true, [a, b, c])
            }
            "biconcave" => {
                check_keys(name, params, &["d", "c"])?;
                let (d, c) = (get(params, "d", 0.5), get(params, "c", 0.375));
                if !(c > 0.0 && c < d) {
                    return Err(GplsError::domain("biconcave disc requires 0 < c < d"));
                }
                let s = Sparse::constant(d * d).add(&radius2());
                let q = s
                    .mul(&s)
                    .mul(&s)
                    .sub(&square(1).add(&square(2)).scale(8.0 * d * d))
                    .sub(&Sparse::constant(c.powi(4)));
                let rho2 = biconcave_radius2(d, c)
                    .ok_or_else(|| GplsError::domain("biconcave disc with these parameters is empty"))?;
                let rho = rho2.sqrt();
                let thick = biconcave_half_thickness(d, c, rho2);
                (SurfaceKind::Biconcave { d, c }, q, 6, (6, LpDegree::Two), true, [thick, rho, rho])
            }
            "torus" => {
                check_keys(name, params, &["R", "r"])?;
                let (big_r, r) = (get(params, "R", 0.5), get(params, "r", 0.3));
                if !(r > 0.0 && r < big_r) {
                    return Err(GplsError::domain("torus requires 0 < r < R"));
                }
                let s = radius2().add(&Sparse::constant(big_r * big_r - r * r));
                let q = s.mul(&s).sub(&square(0).add(&square(1)).scale(4.0 * big_r * big_r));
                let w = big_r + r;
                (SurfaceKind::Torus { big_r, r }, q, 4, (4, LpDegree::Two), true, [w, w, r])
            }
            "genus2" | "genus-2" => {
                check_keys(name, params, &[])?;
                let z2 = square(2);
                let one_minus_z2 = one.sub(&z2);
                let rho2 = square(0).add(&square(1));
                let q = y
                    .scale(2.0)
                    .mul(&square(1).sub(&square(0).scale(3.0)))
                    .mul(&one_minus_z2)
                    .add(&rho2.mul(&rho2))
                    .sub(&z2.scale(9.0).sub(&one).mul(&one_minus_z2));
                // Total degree 5; the Euclidean ball of radius 5 also admits
                // x·q, so the total-degree set is the one with corank 1.
                (SurfaceKind::Genus2, q, 5, (5, LpDegree::One), true, [0.0; 3])
            }
            "klein" => {
                check_keys(name, params, &[])?;
                let r2 = radius2();
                let plus = r2.add(&y.scale(2.0)).sub(&one);
                let minus = r2.sub(&y.scale(2.0)).sub(&one);
                let q = plus
                    .mul(&minus.mul(&minus).sub(&square(2).scale(8.0)))
                    .add(&x.mul(&z).scale(16.0).mul(&minus));
                (SurfaceKind::Klein, q, 6, (6, LpDegree::Two), false, [0.0; 3])
            }
            other => {
                return Err(GplsError::domain(format!(
                    "unknown surface '{other}' (expected ellipsoid, sphere, biconcave, torus, genus2, klein)"
                )))
            }
        };
    let bounds = match kind {
        SurfaceKind::Genus2 => [[-1.6, -1.82, -1.0], [1.6, 1.0, 1.0]],
        SurfaceKind::Klein => [[-2.9, -2.45, -3.65], [2.9, 3.05, 3.65]],
        _ => [[-half[0], -half[1], -half[2]], half],
    };
    let set = Arc::new(MultiIndexSet::lp_ball(3, rec.0, rec.1)?);
    let polynomial = Polynomial::from_terms_in(set, &poly.terms())?;
    Ok(SurfaceDef {
        kind,
        polynomial,
        degree,
        recommended: rec,
        orientable,
        bounds,
    })
}

/// Points on a catalogue surface with unit normals of the exact polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub points: Vec<Point3>,
    /// NaN where the gradient nearly vanishes (see `flagged`).
    pub normals: Vec<Point3>,
    /// Points whose gradient norm is below `1e-6 · max(1, ‖q‖_∞)`.
    pub flagged: Vec<usize>,
    pub attempts: usize,
}

impl SurfaceSample {
    pub fn into_cloud(self) -> PointCloud {
        PointCloud {
            points: self.points,
            normals: Some(self.normals),
        }
    }
}

const FLAG_TOL: f64 = 1e-6;

/// Draws uniform points in the surface's bounding box (enlarged by 5%) and
/// projects them onto the exact zero set. Projections that fail or leave the
/// box are rejected. Draw `i` uses its own ChaCha stream, so the result
/// depends only on `(surface, count, seed)`.
pub fn sample_surface(def: &SurfaceDef, count: usize, seed: u64) -> Result<SurfaceSample> {
    if count == 0 {
        return Err(GplsError::domain("sample count must be at least 1"));
    }
    let jet = SurfaceJet::exact(&def.polynomial)?;
    let (lo, hi) = (def.bounds[0], def.bounds[1]);
    let margin: Vec<f64> = (0..3).map(|i| 0.05 * (hi[i] - lo[i])).collect();
    let inside =
        |p: &Point3| (0..3).all(|i| p[i] >= lo[i] - margin[i] && p[i] <= hi[i] + margin[i]);
    let coeff_scale = def.polynomial.max_abs_coefficient().max(1.0);
    let draw = |i: usize| -> Option<(Point3, Point3, bool)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let x: Point3 =
            std::array::from_fn(|k| rng.random_range(lo[k] - margin[k]..=hi[k] + margin[k]));
        let p = project_to_surface(&jet, &x, ProjectOptions::default()).ok()?;
        if !inside(&p.point) {
            return None;
        }
        let g = jet.gradient(&p.point);
        let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        if n < FLAG_TOL * coeff_scale {
            Some((p.point, [f64::NAN; 3], true))
        } else {
            Some((p.point, [g[0] / n, g[1] / n, g[2] / n], false))
        }
    };
    let max_attempts = count.saturating_mul(100);
    let mut out = SurfaceSample {
        points: Vec::with_capacity(count),
        normals: Vec::with_capacity(count),
        flagged: Vec::new(),
        attempts: 0,
    };
    let mut next = 0;
    while out.points.len() < count && next < max_attempts {
        let batch = (2 * (count - out.points.len()))
            .max(64)
            .min(max_attempts - next);
        let results: Vec<_> = (next..next + batch).into_par_iter().map(draw).collect();
        for (offset, r) in results.into_iter().enumerate() {
            if out.points.len() == count {
                break;
            }
            out.attempts = next + offset + 1;
            if let Some((p, n, flag)) = r {
                if flag {
                    out.flagged.push(out.points.len());
                }
                out.points.push(p);
                out.normals.push(n);
            }
        }
        next += batch;
    }
    if out.points.len() < count {
        return Err(GplsError::Sampling {
            wanted: count,
            got: out.points.len(),
            attempts: max_attempts,
        });
    }
    Ok(out)
}

/// Largest coefficient deviation between `fit` (canonical, user
/// coordinates) and the catalogue polynomial. The fit is first scaled so
/// that its coefficient at the lex-last index where the catalogue polynomial
/// is nonzero matches the catalogue value.
pub fn coefficient_error(def: &SurfaceDef, fit: &Polynomial) -> Result<f64> {
    if !matches!(fit.basis(), Basis::Canonical) {
        return coefficient_error(def, &fit.to_canonical());
    }
    let truth = &def.polynomial;
    let k = truth
        .coefficients()
        .iter()
        .rposition(|c| *c != 0.0)
        .ok_or_else(|| GplsError::domain("catalogue polynomial is zero"))?;
    let (lead, c) = (truth.index_set().get(k).to_vec(), truth.coefficients()[k]);
    let d = fit.coefficient(&lead);
    if d == 0.0 {
        return Err(GplsError::domain(format!(
            "fit has no {lead:?} coefficient"
        )));
    }
    let lambda = c / d;
    let over_truth = truth
        .index_set()
        .iter()
        .zip(truth.coefficients())
        .map(|(a, c)| (lambda * fit.coefficient(a) - c).abs());
    let over_fit = fit
        .index_set()
        .iter()
        .zip(fit.coefficients())
        .filter(|(a, _)| truth.index_set().position(a).is_none())
        .map(|(_, d)| (lambda * d).abs());
    Ok(over_truth.chain(over_fit).fold(0.0, f64::max))
}

/// Curvature quantity of the exact surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Mean,
    Gauss,
    LapMean,
}

/// Closed-form mean and Gauss curvature for ellipsoids and tori. Mean
/// curvature is positive on convex parts with respect to the outward normal
/// `∇q/‖∇q‖`.
pub fn oracle_curvature(def: &SurfaceDef, x: &Point3) -> Result<(f64, f64)> {
    match def.kind {
        SurfaceKind::Ellipsoid { a, b, c } => {
            let h2 = x[0] * x[0] / a.powi(4) + x[1] * x[1] / b.powi(4) + x[2] * x[2] / c.powi(4);
            let abc2 = (a * b * c).powi(2);
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            let mean = (r2 - a * a - b * b - c * c).abs() / (2.0 * abc2 * h2.powf(1.5));
            Ok((mean, 1.0 / (abc2 * h2 * h2)))
        }
        SurfaceKind::Torus { big_r, r } => {
            let cos_t = ((x[0] * x[0] + x[1] * x[1]).sqrt() - big_r) / r;
            let w = big_r + r * cos_t;
            Ok(((big_r + 2.0 * r * cos_t) / (2.0 * r * w), cos_t / (r * w)))
        }
        _ => Err(GplsError::UnsupportedOracle(def.name().into())),
    }
}

/// A quantity computed from the exact implicit polynomial, in the same
/// convention as [`oracle_curvature`].
pub fn oracle_numeric(def: &SurfaceDef, x: &Point3, quantity: Quantity) -> Result<f64> {
    if !def.orientable {
        return Err(GplsError::UnsupportedOracle(def.name().into()));
    }
    let jet = SurfaceJet::exact(&def.polynomial)?;
    let c = curvature_at(&jet, x, quantity == Quantity::LapMean)?;
    Ok(match quantity {
        Quantity::Mean => -c.k_mean,
        Quantity::Gauss => c.k_gauss,
        Quantity::LapMean => -c.lap_k_mean.unwrap_or(f64::NAN),
    })
}

pub type BoxedOracle = Box<dyn Fn(&Point3) -> Result<OracleSample> + Send + Sync>;

/// Reference curvature for a surface: closed forms where they exist, the
/// exact-polynomial path otherwise. The Laplacian of mean curvature always
/// comes from the exact polynomial. Non-orientable surfaces have none.
pub fn oracle(def: &SurfaceDef, laplacian: bool) -> Result<BoxedOracle> {
    if !def.has_oracle() {
        return Err(GplsError::UnsupportedOracle(def.name().into()));
    }
    let jet = SurfaceJet::exact(&def.polynomial)?;
    let def = def.clone();
    Ok(Box::new(move |x: &Point3| {
        let c = curvature_at(&jet, x, laplacian)?;
        let (k_mean, k_gauss) = if def.has_closed_form_oracle() {
            oracle_curvature(&def, x)?
        } else {
            (-c.k_mean, c.k_gauss)
        };
        Ok(OracleSample {
            k_mean,
            k_gauss,
            lap_k_mean: c.lap_k_mean.map(|l| -l),
            normal: jet.normal(x)?,
        })
    }))
}

/// `Δ_M K_mean` on an ellipsoid of revolution (`a = b`) at `x`, by
/// Richardson-extrapolated central differences of the closed-form mean
/// curvature along the meridian `(a cos t, c sin t)`.
pub fn lap_mean_axisymmetric_fd(def: &SurfaceDef, x: &Point3) -> Result<f64> {
    let (a, c) = match def.kind {
        SurfaceKind::Ellipsoid { a, b, c } if a == b => (a, c),
        _ => return Err(GplsError::UnsupportedOracle(def.name().into())),
    };
    let k = |t: f64| {
        let p = [a * t.cos(), 0.0, c * t.sin()];
        oracle_curvature(def, &p).map(|v| v.0).unwrap_or(f64::NAN)
    };
    // Δf = (1/(ρL)) d/dt(ρ/L · df/dt), ρ = a cos t, L = |d(meridian)/dt|.
    let rho = |t: f64| a * t.cos();
    let len = |t: f64| (a * a * t.sin().powi(2) + c * c * t.cos().powi(2)).sqrt();
    let lap = |t: f64, h: f64| {
        let flux = |s: f64| rho(s) / len(s) * (k(s + 0.5 * h) - k(s - 0.5 * h)) / h;
        (flux(t + 0.5 * h) - flux(t - 0.5 * h)) / h / (rho(t) * len(t))
    };
    let rxy = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let t = (x[2] / c).atan2(rxy / a);
    if t.abs() > 0.5 * PI - 1e-2 {
        return Err(GplsError::domain(
            "meridian differences are singular at the poles",
        ));
    }
    let h = 1e-3;
    Ok((4.0 * lap(t, h / 2.0) - lap(t, h)) / 3.0)
}

/// Star-shaped surface `r(θ, φ) = base + amplitude · sin 3θ · sin 2φ` with
/// polar angle `θ` and azimuth `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticStar {
    pub base: f64,
    pub amplitude: f64,
}

impl Default for SyntheticStar {
    fn default() -> Self {
        SyntheticStar {
            base: 0.7,
            amplitude: 0.1,
        }
    }
}

impl SyntheticStar {
    pub fn radius(&self, theta: f64, phi: f64) -> f64 {
        self.base + self.amplitude * (3.0 * theta).sin() * (2.0 * phi).sin()
    }

    pub fn point(&self, theta: f64, phi: f64) -> Point3 {
        let r = self.radius(theta, phi);
        [
            r * theta.sin() * phi.cos(),
            r * theta.sin() * phi.sin(),
            r * theta.cos(),
        ]
    }

    /// Outward unit normal, the normalised gradient of `|x| − r(θ(x), φ(x))`.
    pub fn normal(&self, theta: f64, phi: f64) -> Point3 {
        let (st, ct, sp, cp) = (theta.sin(), theta.cos(), phi.sin(), phi.cos());
        let r = self.radius(theta, phi);
        let r_theta = 3.0 * self.amplitude * (3.0 * theta).cos() * (2.0 * phi).sin();
        // r_φ / sin θ, using sin 3θ / sin θ = 3 − 4 sin²θ.
        let r_phi_over_st = 2.0 * self.amplitude * (3.0 - 4.0 * st * st) * (2.0 * phi).cos();
        let u = [st * cp, st * sp, ct];
        let u_theta = [ct * cp, ct * sp, -st];
        let e_phi = [-sp, cp, 0.0];
        let g: Point3 =
            std::array::from_fn(|i| u[i] - (r_theta * u_theta[i] + r_phi_over_st * e_phi[i]) / r);
        let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        g.map(|v| v / n)
    }

    /// `count` points with directions uniform on the unit sphere.
    pub fn sample(&self, count: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(count);
        let mut normals = Vec::with_capacity(count);
        for _ in 0..count {
            let theta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
            let phi = 2.0 * PI * rng.random::<f64>();
            points.push(self.point(theta, phi));
            normals.push(self.normal(theta, phi));
        }
        PointCloud {
            points,
            normals: Some(normals),
        }
    }
}

/// The smooth function `1 / (1 + |x|²)` used for regression tests.
pub fn runge(x: &Point3) -> f64 {
    1.0 / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
}

#[cfg(test)]
mod tests;
