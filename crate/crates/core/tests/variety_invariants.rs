use std::sync::Arc;

use gpls::geom::{project_to_surface, Point3, ProjectOptions, SurfaceJet};
use gpls::surfaces::{catalog_lookup, parse_params, sample_surface};
use gpls::variety::{assemble_vandermonde, default_grid, gefp};
use gpls::{build_gpls, build_index_set, FitMode, FitOptions, LpDegree, MultiIndexSet};

fn lookup(name: &str, params: &str) -> gpls::surfaces::SurfaceDef {
    catalog_lookup(name, &parse_params(params).unwrap()).unwrap()
}

fn set(n: usize, lp: LpDegree) -> Arc<MultiIndexSet> {
    Arc::new(build_index_set(3, n, lp).unwrap())
}

fn project_all(jet: &SurfaceJet, pts: &[Point3]) -> Vec<Point3> {
    pts.iter()
        .map(|p| {
            project_to_surface(jet, p, ProjectOptions::default())
                .unwrap()
                .point
        })
        .collect()
}

/// Points scattered around a surface's samples, for projection.
fn jittered(pts: &[Point3], amount: f64) -> Vec<Point3> {
    pts.iter()
        .enumerate()
        .map(|(i, p)| {
            let t = i as f64;
            [
                p[0] + amount * (1.3 * t).sin(),
                p[1] + amount * (0.7 * t).cos(),
                p[2] + amount * (2.1 * t).sin(),
            ]
        })
        .collect()
}

#[test]
fn degree_raising_keeps_the_zero_set() {
    let def = lookup("sphere", "r=1");
    let sample = sample_surface(&def, 60, 1).unwrap();
    let small = build_gpls(
        &sample.points,
        set(2, LpDegree::Two),
        &FitOptions::default(),
    )
    .unwrap();
    let opts = FitOptions {
        mode: FitMode::LagrangeSum,
        ..FitOptions::default()
    };
    let large = build_gpls(&sample.points, set(3, LpDegree::Two), &opts).unwrap();
    assert_eq!(large.kernel_basis.len(), 4);
    let probe = sample_surface(&def, 200, 2).unwrap().points;
    let on_small = project_all(
        &SurfaceJet::from_surface(&small).unwrap(),
        &jittered(&probe, 0.05),
    );
    for k in &large.kernel_basis {
        let scale = k.max_abs_coefficient();
        for p in &on_small {
            let v = k.eval(&large.transform.to_omega(p)).unwrap() / scale;
            assert!(v.abs() <= 1e-8, "{v}");
        }
    }
}

#[test]
fn disjoint_samples_describe_the_same_variety() {
    for (name, params, count) in [
        ("ellipsoid", "a=0.8,b=0.9,c=1", 50),
        ("torus", "R=0.5,r=0.3", 100),
    ] {
        let def = lookup(name, params);
        let fit = |seed| {
            let s = sample_surface(&def, count, seed).unwrap();
            build_gpls(
                &s.points,
                def.recommended_set().clone(),
                &FitOptions::default(),
            )
            .unwrap()
        };
        let (a, b) = (fit(10), fit(20));
        let jet_a = SurfaceJet::from_surface(&a).unwrap();
        let probe = sample_surface(&def, 100, 30).unwrap().points;
        let on_a = project_all(&jet_a, &jittered(&probe, 0.02));
        let scale = b.q.max_abs_coefficient();
        for p in &on_a {
            let v = b.eval_user(p).unwrap() / scale;
            assert!(v.abs() <= 1e-8, "{name}: {v}");
        }
    }
}

#[test]
fn gefp_rank_matches_singular_values() {
    let rows = [
        ("ellipsoid", "a=0.8,b=0.9,c=1", 50, 1e-8),
        ("torus", "R=0.5,r=0.3", 100, 1e-8),
        ("genus2", "", 100, 1e-8),
        ("klein", "", 200, 1e-8),
        ("biconcave", "d=0.5,c=0.375", 200, 1e-12),
    ];
    for (name, params, count, tol) in rows {
        let def = lookup(name, params);
        let s = sample_surface(&def, count, 1).unwrap();
        let fit = build_gpls(
            &s.points,
            def.recommended_set().clone(),
            &FitOptions {
                rank_tol: tol,
                ..FitOptions::default()
            },
        )
        .unwrap();
        let omega: Vec<Vec<f64>> = s.points.iter().map(|p| fit.transform.to_omega(p)).collect();
        let grid = default_grid(def.recommended_set().clone()).unwrap();
        let v = assemble_vandermonde(&grid, &omega).unwrap();
        let f = gefp(v.entries(), tol);
        let sv = v.entries().clone().svd(false, false).singular_values;
        let top = sv.max();
        // Numerical rank at the widest gap in the singular spectrum.
        let floor = f64::EPSILON * top * 1e-3;
        let oracle = (1..sv.len())
            .max_by(|&a, &b| {
                let gap = |k: usize| sv[k - 1] / sv[k].max(floor);
                gap(a).total_cmp(&gap(b))
            })
            .unwrap();
        assert_eq!(f.rank, oracle, "{name}");
        assert_eq!(f.rank, fit.rank, "{name}");
        assert_eq!(fit.corank(), 1, "{name}");
    }
}

#[test]
fn kernel_and_lagrange_sum_modes_agree() {
    let def = lookup("torus", "R=0.5,r=0.3");
    let s = sample_surface(&def, 100, 3).unwrap();
    let kernel = build_gpls(
        &s.points,
        def.recommended_set().clone(),
        &FitOptions::default(),
    )
    .unwrap();
    let sum = build_gpls(
        &s.points,
        def.recommended_set().clone(),
        &FitOptions {
            mode: FitMode::LagrangeSum,
            ..FitOptions::default()
        },
    )
    .unwrap();
    let on_kernel = project_all(
        &SurfaceJet::from_surface(&kernel).unwrap(),
        &jittered(&sample_surface(&def, 100, 4).unwrap().points, 0.02),
    );
    let scale = sum.q.max_abs_coefficient();
    for p in &on_kernel {
        assert!(sum.eval_user(p).unwrap().abs() <= 1e-8 * scale);
    }
}
