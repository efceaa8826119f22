use super::*;
use crate::geom::mean_curvature;
use crate::poly::abs_sum_with_powers;
use crate::poly::power_table;

fn params(list: &[(&str, f64)]) -> Vec<(String, f64)> {
    list.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn lookup(name: &str, list: &[(&str, f64)]) -> SurfaceDef {
    catalog_lookup(name, &params(list)).unwrap()
}

fn residual_bound(def: &SurfaceDef, x: &Point3) -> f64 {
    let p = &def.polynomial;
    abs_sum_with_powers(p, &power_table(x, p.index_set().max_per_dim())).max(1.0)
}

/// Direct evaluation of each defining equation.
fn formula(def: &SurfaceDef, p: &Point3) -> f64 {
    let [x, y, z] = *p;
    let r2 = x * x + y * y + z * z;
    match def.kind {
        SurfaceKind::Ellipsoid { a, b, c } => {
            x * x / (a * a) + y * y / (b * b) + z * z / (c * c) - 1.0
        }
        SurfaceKind::Biconcave { d, c } => {
            (d * d + r2).powi(3) - 8.0 * d * d * (y * y + z * z) - c.powi(4)
        }
        SurfaceKind::Torus { big_r, r } => {
            (r2 + big_r * big_r - r * r).powi(2) - 4.0 * big_r * big_r * (x * x + y * y)
        }
        SurfaceKind::Genus2 => {
            2.0 * y * (y * y - 3.0 * x * x) * (1.0 - z * z) + (x * x + y * y).powi(2)
                - (9.0 * z * z - 1.0) * (1.0 - z * z)
        }
        SurfaceKind::Klein => {
            (r2 + 2.0 * y - 1.0) * ((r2 - 2.0 * y - 1.0).powi(2) - 8.0 * z * z)
                + 16.0 * x * z * (r2 - 2.0 * y - 1.0)
        }
    }
}

fn all_surfaces() -> Vec<SurfaceDef> {
    vec![
        lookup("ellipsoid", &[("a", 0.8), ("b", 0.9), ("c", 1.0)]),
        lookup("biconcave", &[("d", 0.5), ("c", 0.375)]),
        lookup("torus", &[("R", 0.5), ("r", 0.3)]),
        lookup("genus2", &[]),
        lookup("klein", &[]),
    ]
}

#[test]
fn catalogue_polynomials_match_their_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for def in all_surfaces() {
        for _ in 0..50 {
            let x: Point3 = std::array::from_fn(|_| rng.random_range(-1.5..1.5));
            let a = def.polynomial.eval(&x).unwrap();
            let b = formula(&def, &x);
            assert!(
                (a - b).abs() <= 1e-13 * residual_bound(&def, &x),
                "{def}: {a} vs {b}"
            );
        }
        let top = def
            .polynomial
            .index_set()
            .iter()
            .zip(def.polynomial.coefficients())
            .filter(|(_, c)| **c != 0.0)
            .map(|(a, _)| a.iter().sum::<u32>() as usize)
            .max()
            .unwrap();
        assert_eq!(top, def.degree, "{def}");
        let (n, p) = def.recommended;
        assert_eq!(def.recommended_set().degree(), n);
        assert_eq!(def.recommended_set().norm(), Some(p));
    }
}

#[test]
fn catalogue_examples() {
    let s = lookup("ellipsoid", &[]);
    let expect = [
        (vec![2, 0, 0], 1.0),
        (vec![0, 2, 0], 1.0),
        (vec![0, 0, 2], 1.0),
        (vec![0, 0, 0], -1.0),
    ];
    for (alpha, c) in &expect {
        assert_eq!(s.polynomial.coefficient(alpha), *c);
    }
    let nonzero = s
        .polynomial
        .coefficients()
        .iter()
        .filter(|c| **c != 0.0)
        .count();
    assert_eq!(nonzero, 4);
    assert_eq!(s.degree, 2);

    let t = lookup("torus", &[("R", 0.5), ("r", 0.3)]);
    assert_eq!(t.degree, 4);
    assert!(t.polynomial.eval(&[0.8, 0.0, 0.0]).unwrap().abs() < 1e-15);

    let b = lookup("biconcave", &[("d", 0.5), ("c", 0.375)]);
    assert_eq!(b.degree, 6);
    // (d² + |x|²)³ − 8d²(y² + z²) − c⁴: constant d⁶ − c⁴, x⁶ coefficient 1,
    // y² coefficient 3d⁴ − 8d².
    assert_eq!(
        b.polynomial.coefficient(&[0, 0, 0]),
        0.5f64.powi(6) - 0.375f64.powi(4)
    );
    assert_eq!(b.polynomial.coefficient(&[6, 0, 0]), 1.0);
    assert_eq!(b.polynomial.coefficient(&[0, 2, 0]), 3.0 * 0.0625 - 2.0);
    assert_eq!(b.polynomial.coefficient(&[2, 2, 2]), 6.0);

    assert_eq!(
        lookup("sphere", &[("r", 2.0)])
            .polynomial
            .coefficient(&[2, 0, 0]),
        0.25
    );
    assert!(!lookup("klein", &[]).orientable);
}

#[test]
fn invalid_parameters() {
    let err = catalog_lookup("torus", &params(&[("R", 0.3), ("r", 0.3)])).unwrap_err();
    assert!(err.to_string().contains("0 < r < R"));
    let err = catalog_lookup("biconcave", &params(&[("d", 0.3), ("c", 0.4)])).unwrap_err();
    assert!(err.to_string().contains("0 < c < d"));
    assert!(catalog_lookup("ellipsoid", &params(&[("a", 0.0)])).is_err());
    assert!(catalog_lookup("torus", &params(&[("q", 1.0)])).is_err());
    assert!(catalog_lookup("genus2", &params(&[("a", 1.0)])).is_err());
    assert!(catalog_lookup("cube", &[]).is_err());
    assert!(parse_params("a=1,b").is_err());
    assert!(parse_params("a=inf").is_err());
    assert_eq!(
        parse_params(" R=0.5, r=0.3 ").unwrap(),
        params(&[("R", 0.5), ("r", 0.3)])
    );
    assert!(parse_params("").unwrap().is_empty());
}

#[test]
fn samples_lie_on_the_surface() {
    let sphere = lookup("sphere", &[]);
    let s = sample_surface(&sphere, 50, 7).unwrap();
    assert_eq!(s.points.len(), 50);
    for (p, n) in s.points.iter().zip(&s.normals) {
        assert!((p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0).abs() <= 1e-13);
        for i in 0..3 {
            assert!((n[i] - p[i]).abs() < 1e-12);
        }
    }
    let torus = lookup("torus", &[("R", 0.5), ("r", 0.3)]);
    let t = sample_surface(&torus, 100, 1).unwrap();
    for p in &t.points {
        assert!(torus.polynomial.eval(p).unwrap().abs() <= 1e-12);
    }
    for def in all_surfaces() {
        let s = sample_surface(&def, 60, 3).unwrap();
        for (i, p) in s.points.iter().enumerate() {
            let r = def.polynomial.eval(p).unwrap();
            assert!(r.abs() <= 1e-13 * residual_bound(&def, p), "{def} {r:e}");
            if !s.flagged.contains(&i) {
                let n = s.normals[i];
                assert!(((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn klein_sample_size_and_flags() {
    let k = lookup("klein", &[]);
    let s = sample_surface(&k, 200, 5).unwrap();
    assert_eq!(s.points.len(), 200);
    for &i in &s.flagged {
        assert!(s.normals[i][0].is_nan());
    }
}

#[test]
fn sampler_is_deterministic() {
    let def = lookup("genus2", &[]);
    let a = sample_surface(&def, 40, 11).unwrap();
    let b = sample_surface(&def, 40, 11).unwrap();
    let bits = |s: &SurfaceSample| -> Vec<u64> {
        s.points.iter().flatten().map(|v| v.to_bits()).collect()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_ne!(bits(&a), bits(&sample_surface(&def, 40, 12).unwrap()));
    assert!(sample_surface(&def, 0, 1).is_err());
}

/// Monge patch `z = c√(1 − x²/a² − y²/b²)` with analytic derivatives.
fn monge_curvatures(a: f64, b: f64, c: f64, x: f64, y: f64) -> (f64, f64) {
    let w = 1.0 - x * x / (a * a) - y * y / (b * b);
    let sw = w.sqrt();
    let p = -c * x / (a * a * sw);
    let q = -c * y / (b * b * sw);
    let r = -c / (a * a * sw) - c * x * x / (a.powi(4) * w * sw);
    let t = -c / (b * b * sw) - c * y * y / (b.powi(4) * w * sw);
    let s = -c * x * y / (a * a * b * b * w * sw);
    let g = 1.0 + p * p + q * q;
    let gauss = (r * t - s * s) / (g * g);
    let mean = ((1.0 + q * q) * r - 2.0 * p * q * s + (1.0 + p * p) * t) / (2.0 * g.powf(1.5));
    (mean.abs(), gauss)
}

#[test]
fn closed_form_oracles() {
    let sphere = lookup("sphere", &[]);
    assert_eq!(
        oracle_curvature(&sphere, &[0.0, 0.6, 0.8]).unwrap(),
        (1.0, 1.0)
    );

    let torus = lookup("torus", &[("R", 0.5), ("r", 0.3)]);
    let (m, g) = oracle_curvature(&torus, &[0.8, 0.0, 0.0]).unwrap();
    assert!((m - 1.1 / 0.48).abs() < 1e-14);
    assert!((g - 1.0 / 0.24).abs() < 1e-13);

    let e = lookup("ellipsoid", &[("a", 1.0), ("b", 1.0), ("c", 0.6)]);
    let (m, g) = oracle_curvature(&e, &[0.0, 0.0, 0.6]).unwrap();
    let (mm, gm) = monge_curvatures(1.0, 1.0, 0.6, 0.0, 0.0);
    assert!((m - mm).abs() < 1e-14 && (g - gm).abs() < 1e-14);
    assert!((m - 0.6).abs() < 1e-14 && (g - 0.36).abs() < 1e-14);

    let (a, b, c) = (0.6, 0.8, 1.0);
    let e = lookup("ellipsoid", &[("a", a), ("b", b), ("c", c)]);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let (x, y) = (
            rng.random_range(-0.5..0.5) * a,
            rng.random_range(-0.5..0.5) * b,
        );
        let z = c * (1.0 - x * x / (a * a) - y * y / (b * b)).sqrt();
        let (m, g) = oracle_curvature(&e, &[x, y, z]).unwrap();
        let (mm, gm) = monge_curvatures(a, b, c, x, y);
        assert!((m - mm).abs() < 1e-12 * mm && (g - gm).abs() < 1e-12 * gm);
    }
    assert!(matches!(
        oracle_curvature(&lookup("biconcave", &[]), &[0.0; 3]),
        Err(GplsError::UnsupportedOracle(_))
    ));
}

#[test]
fn closed_form_and_numeric_paths_agree() {
    for def in [
        lookup("ellipsoid", &[("a", 0.6), ("b", 0.8), ("c", 1.0)]),
        lookup("torus", &[("R", 0.5), ("r", 0.1)]),
    ] {
        let s = sample_surface(&def, 50, 4).unwrap();
        for x in &s.points {
            let (m, g) = oracle_curvature(&def, x).unwrap();
            let mn = oracle_numeric(&def, x, Quantity::Mean).unwrap();
            let gn = oracle_numeric(&def, x, Quantity::Gauss).unwrap();
            assert!(
                (m - mn).abs() <= 1e-11 * m.abs().max(1.0),
                "{def}: {m} vs {mn}"
            );
            assert!(
                (g - gn).abs() <= 1e-11 * g.abs().max(1.0),
                "{def}: {g} vs {gn}"
            );
        }
    }
}

#[test]
fn numeric_oracle_properties() {
    let sphere = lookup("sphere", &[]);
    assert!(
        oracle_numeric(&sphere, &[0.0, 0.0, 1.0], Quantity::LapMean)
            .unwrap()
            .abs()
            < 1e-13
    );
    let g2 = lookup("genus2", &[]);
    let jet = SurfaceJet::exact(&g2.polynomial).unwrap();
    for x in &sample_surface(&g2, 10, 1).unwrap().points {
        let m = oracle_numeric(&g2, x, Quantity::Mean).unwrap();
        assert_eq!(m, -mean_curvature(&jet, x).unwrap());
    }
    assert!(matches!(
        oracle_numeric(&lookup("klein", &[]), &[0.0; 3], Quantity::Mean),
        Err(GplsError::UnsupportedOracle(_))
    ));
    assert!(oracle(&lookup("klein", &[]), false).is_err());
}

#[test]
fn laplacian_oracle_matches_meridian_differences() {
    for (a, c) in [(1.0, 0.6), (0.6, 1.0), (1.0, 1.0)] {
        let def = lookup("ellipsoid", &[("a", a), ("b", a), ("c", c)]);
        for t in [0.0f64, 0.3, -0.7, 1.2] {
            let x = [a * t.cos() * 0.6, a * t.cos() * 0.8, c * t.sin()];
            let exact = oracle_numeric(&def, &x, Quantity::LapMean).unwrap();
            let fd = lap_mean_axisymmetric_fd(&def, &x).unwrap();
            assert!(
                (exact - fd).abs() <= 1e-6,
                "a={a} c={c} t={t}: {exact} vs {fd}"
            );
        }
    }
    let tri = lookup("ellipsoid", &[("a", 0.6), ("b", 0.8), ("c", 1.0)]);
    assert!(lap_mean_axisymmetric_fd(&tri, &[0.6, 0.0, 0.0]).is_err());
}

#[test]
fn oracle_normals_are_outward() {
    let def = lookup("torus", &[("R", 0.5), ("r", 0.3)]);
    let o = oracle(&def, true).unwrap();
    let s = o(&[0.8, 0.0, 0.0]).unwrap();
    assert!((s.normal[0] - 1.0).abs() < 1e-15);
    assert!((s.k_mean - 1.1 / 0.48).abs() < 1e-14);
    assert!(s.lap_k_mean.is_some());
}

#[test]
fn synthetic_star_surface() {
    let star = SyntheticStar::default();
    let cloud = star.sample(4000, 1);
    assert_eq!(cloud.len(), 4000);
    for (p, n) in cloud.points.iter().zip(cloud.normals.as_ref().unwrap()) {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        assert!((0.6..=0.8).contains(&r));
        assert!(n[0] * p[0] + n[1] * p[1] + n[2] * p[2] > 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = 1e-5;
    for _ in 0..200 {
        let theta = rng.random_range(0.05..PI - 0.05);
        let phi = rng.random_range(0.0..2.0 * PI);
        let d = |dt: f64, dp: f64| star.point(theta + dt, phi + dp);
        let xt: Point3 = std::array::from_fn(|i| (d(h, 0.0)[i] - d(-h, 0.0)[i]) / (2.0 * h));
        let xp: Point3 = std::array::from_fn(|i| (d(0.0, h)[i] - d(0.0, -h)[i]) / (2.0 * h));
        let c = [
            xt[1] * xp[2] - xt[2] * xp[1],
            xt[2] * xp[0] - xt[0] * xp[2],
            xt[0] * xp[1] - xt[1] * xp[0],
        ];
        let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        let n = star.normal(theta, phi);
        for i in 0..3 {
            assert!(
                (c[i] / norm - n[i]).abs() < 1e-8,
                "{:?} vs {n:?}",
                c.map(|v| v / norm)
            );
        }
    }
    assert_eq!(star.sample(10, 3), star.sample(10, 3));
}

#[test]
fn coefficient_error_normalises_at_the_last_index() {
    let def = lookup("torus", &[("R", 0.5), ("r", 0.3)]);
    let scaled = def.polynomial.scaled(-3.7);
    assert!(coefficient_error(&def, &scaled).unwrap() <= 1e-15);
    let mut terms: Vec<(Vec<u32>, f64)> = def
        .polynomial
        .index_set()
        .iter()
        .zip(def.polynomial.coefficients())
        .map(|(a, c)| (a.to_vec(), *c))
        .collect();
    terms.iter_mut().find(|t| t.0 == [1, 0, 0]).unwrap().1 += 1e-6;
    let sum = Polynomial::from_terms_in(def.polynomial.index_set().clone(), &terms).unwrap();
    let e = coefficient_error(&def, &sum).unwrap();
    assert!((e - 1e-6).abs() <= 1e-15, "{e}");
}
