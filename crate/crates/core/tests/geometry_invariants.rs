use std::f64::consts::PI;

use gpls::geom::{
    curvature_report, gauss_curvature, laplacian_mean_curvature, mean_curvature,
    project_to_surface, surface_gradient, Point3, ProjectOptions, SurfaceJet,
};
use gpls::surfaces::{catalog_lookup, oracle, parse_params, sample_surface, SurfaceDef};
use gpls::{build_gpls, FitOptions, GplsSurface, Polynomial};
use proptest::prelude::*;

fn lookup(name: &str, params: &str) -> SurfaceDef {
    catalog_lookup(name, &parse_params(params).unwrap()).unwrap()
}

fn fit(def: &SurfaceDef, points: &[Point3]) -> GplsSurface {
    build_gpls(
        points,
        def.recommended_set().clone(),
        &FitOptions::default(),
    )
    .unwrap()
}

fn project(jet: &SurfaceJet, p: &Point3) -> Point3 {
    project_to_surface(jet, p, ProjectOptions::default())
        .unwrap()
        .point
}

#[test]
fn sphere_identities_on_a_fit() {
    let def = lookup("sphere", "r=1");
    let s = fit(&def, &sample_surface(&def, 50, 1).unwrap().points);
    let jet = SurfaceJet::from_surface(&s).unwrap();
    for x in sample_surface(&def, 100, 2).unwrap().points {
        let x = project(&jet, &x);
        assert!((mean_curvature(&jet, &x).unwrap().abs() - 1.0).abs() <= 1e-12);
        assert!((gauss_curvature(&jet, &x).unwrap() - 1.0).abs() <= 1e-12);
        assert!(laplacian_mean_curvature(&jet, &x).unwrap().abs() <= 1e-10);
    }
}

#[test]
fn gauss_bonnet_on_the_torus() {
    let (big_r, r) = (0.5, 0.3);
    let def = lookup("torus", "R=0.5,r=0.3");
    let s = fit(&def, &sample_surface(&def, 100, 3).unwrap().points);
    let jet = SurfaceJet::from_surface(&s).unwrap();
    let m = 96;
    let h = 2.0 * PI / m as f64;
    let mut total = 0.0;
    for i in 0..m {
        let theta = (i as f64 + 0.5) * h;
        for j in 0..m {
            let phi = (j as f64 + 0.5) * h;
            let rho = big_r + r * phi.cos();
            let x = [rho * theta.cos(), rho * theta.sin(), r * phi.sin()];
            let x = project(&jet, &x);
            total += gauss_curvature(&jet, &x).unwrap() * r * rho * h * h;
        }
    }
    assert!(total.abs() <= 1e-2, "{total}");
}

fn rotation(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    let rz = [[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
    let rx = [[1.0, 0.0, 0.0], [0.0, cc, -sc], [0.0, sc, cc]];
    let mul = |p: [[f64; 3]; 3], q: [[f64; 3]; 3]| -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| p[i][k] * q[k][j]).sum()))
    };
    mul(rz, mul(ry, rx))
}

fn apply(m: &[[f64; 3]; 3], t: &Point3, p: &Point3) -> Point3 {
    std::array::from_fn(|i| (0..3).map(|k| m[i][k] * p[k]).sum::<f64>() + t[i])
}

#[test]
fn curvature_is_invariant_under_rigid_motion() {
    let def = lookup("ellipsoid", "a=0.8,b=0.9,c=1");
    let pts = sample_surface(&def, 50, 4).unwrap().points;
    let base = SurfaceJet::from_surface(&fit(&def, &pts)).unwrap();
    let rot = rotation(0.7, -1.1, 2.3);
    let shift = [3.0, -2.0, 0.5];
    let moved: Vec<Point3> = pts.iter().map(|p| apply(&rot, &shift, p)).collect();
    let jet = SurfaceJet::from_surface(&fit(&def, &moved)).unwrap();
    for p in sample_surface(&def, 50, 5).unwrap().points {
        let x = project(&base, &p);
        let y = project(&jet, &apply(&rot, &shift, &x));
        let (k0, k1) = (
            mean_curvature(&base, &x).unwrap(),
            mean_curvature(&jet, &y).unwrap(),
        );
        assert!((k0.abs() - k1.abs()).abs() <= 1e-8, "{k0} {k1}");
        let (g0, g1) = (
            gauss_curvature(&base, &x).unwrap(),
            gauss_curvature(&jet, &y).unwrap(),
        );
        assert!((g0 - g1).abs() <= 1e-8, "{g0} {g1}");
    }
}

#[test]
fn dense_points_match_sample_point_accuracy() {
    let def = lookup("torus", "R=0.5,r=0.3");
    let train = sample_surface(&def, 100, 6).unwrap().points;
    let jet = SurfaceJet::from_surface(&fit(&def, &train)).unwrap();
    let orc = oracle(&def, false).unwrap();
    let err = |pts: &[Point3]| {
        let rep = curvature_report(&jet, pts, Some(&*orc), false).unwrap();
        let s = rep.summary.k_mean.unwrap();
        let g = rep.summary.k_gauss.unwrap();
        (s.linf, g.linf)
    };
    let dense: Vec<Point3> = sample_surface(&def, 1000, 7)
        .unwrap()
        .points
        .iter()
        .map(|p| project(&jet, p))
        .collect();
    let (m0, g0) = err(&train);
    let (m1, g1) = err(&dense);
    let floor = 1e-13;
    assert!(m1 <= 10.0 * m0.max(floor), "{m0} {m1}");
    assert!(g1 <= 10.0 * g0.max(floor), "{g0} {g1}");
}

fn torus_jet() -> SurfaceJet {
    let def = lookup("torus", "R=0.5,r=0.3");
    SurfaceJet::exact(&def.polynomial).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surface_gradient_is_tangent(
        theta in 0.0..2.0 * PI,
        phi in 0.0..2.0 * PI,
        c in proptest::collection::vec(-1.0..1.0f64, 4),
    ) {
        let jet = torus_jet();
        let rho = 0.5 + 0.3 * phi.cos();
        let x = [rho * theta.cos(), rho * theta.sin(), 0.3 * phi.sin()];
        let f = Polynomial::from_terms_in(
            jet.polynomial().index_set().clone(),
            &[
                (vec![1, 0, 0], c[0]),
                (vec![0, 1, 1], c[1]),
                (vec![2, 0, 1], c[2]),
                (vec![0, 0, 3], c[3]),
            ],
        )
        .unwrap();
        let g = surface_gradient(&jet, &f, &x).unwrap();
        let n = jet.normal(&x).unwrap();
        let dot: f64 = (0..3).map(|i| g[i] * n[i]).sum();
        let size = (g.iter().map(|v| v * v).sum::<f64>()).sqrt().max(1.0);
        prop_assert!(dot.abs() <= 1e-12 * size);
    }
}
