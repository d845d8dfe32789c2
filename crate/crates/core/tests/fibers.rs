use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortex_core::combinatorics::CouplingSpec;
use vortex_core::energy::{Background, PsiSign, SourceSet, System, VortexConfig};
use vortex_core::fibers::{
    collapse_slope, fiber_point, inner_product_identity, intersection_csv, intersection_table, log_space,
    nesting_angles, predicted_intersection, psi_planar, separation_delta, upsilon, DistanceMode, FiberLayout,
    FiberSpec, PlanarConfig, SeparationKind, Side,
};
use vortex_core::surface::{stereo_distance, ExtComplex, Surface};
use vortex_core::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Inverse stereographic projection from the north pole.
fn lift(z: ExtComplex) -> Vector3<f64> {
    match z {
        ExtComplex::Infinity => Vector3::z(),
        ExtComplex::Finite(z) => {
            let s = 1.0 + z.norm_sqr();
            Vector3::new(2.0 * z.re / s, 2.0 * z.im / s, (z.norm_sqr() - 1.0) / s)
        }
    }
}

fn anchor_point(l: usize, i: usize) -> ExtComplex {
    if i == l {
        ExtComplex::Infinity
    } else {
        ExtComplex::Finite(c(i as f64, 0.0))
    }
}

fn consecutive_layout(alphas: Vec<f64>) -> FiberLayout {
    let groups = vec![1, 2, 3];
    let angles = nesting_angles(&groups);
    FiberLayout::new(CouplingSpec::consecutive(3).unwrap(), groups, angles, vec![1.0; 3], alphas).unwrap()
}

#[test]
fn upsilon_examples() {
    assert!((upsilon(3, 1, 2, c(1.0, 1.0)).unwrap() - Complex64::i()).norm() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..100 {
        let (i, r) = (1usize, 3usize);
        let mid = 0.5 * (i + r) as f64;
        let z = c(mid, rng.random_range(-5.0..5.0));
        let left = (z - i as f64).arg();
        let right = PI - (z - r as f64).arg();
        assert!((Complex64::from_polar(1.0, left) - Complex64::from_polar(1.0, right)).norm() < 1e-12);
        let above = upsilon(4, i, r, z + 1e-13).unwrap();
        let below = upsilon(4, i, r, z - 1e-13).unwrap();
        assert!((above - below).norm() < 1e-12);
    }
    for _ in 0..100 {
        let z = c(rng.random_range(-3.0..5.0), rng.random_range(-3.0..3.0));
        for (i, r) in [(1, 2), (1, 3), (2, 4)] {
            let prod = upsilon(4, r, i, z).unwrap() * upsilon(4, i, r, z).unwrap();
            assert!((prod - 1.0).norm() < 1e-15);
        }
    }
    assert!(matches!(upsilon(3, 1, 2, c(1.0, 0.0)), Err(Error::Singularity { .. })));
}

#[test]
fn fiber_points_are_preimages() {
    let f = FiberSpec::new(4, 1, 2, PI / 4.0).unwrap();
    assert!((fiber_point(&f, 1e-14, Side::Left).unwrap() - c(1.0, 0.0)).norm() < 1e-13);
    let m = (2.0 - 1.0) / (2.0 * (PI / 4.0).cos());
    assert!((f.rho_max() - m).abs() < 1e-15);
    let a = fiber_point(&f, m, Side::Left).unwrap();
    let b = fiber_point(&f, m, Side::Right).unwrap();
    assert!((a - b).norm() < 1e-12);
    assert!(matches!(fiber_point(&f, 1.01 * m, Side::Left), Err(Error::OutOfRange(_))));
    assert!(matches!(fiber_point(&f, 0.0, Side::Left), Err(Error::OutOfRange(_))));

    let specs = [
        FiberSpec::new(4, 1, 2, 0.7).unwrap(),
        FiberSpec::new(4, 3, 1, -0.4).unwrap(),
        FiberSpec::new(4, 2, 4, 1.2).unwrap(),
        FiberSpec::new(4, 4, 1, 0.3).unwrap(),
    ];
    for f in specs {
        let top = if f.is_ray() { 50.0 } else { f.rho_max() };
        for rho in log_space(1e-8, top, 60) {
            for side in [Side::Left, Side::Right] {
                let z = fiber_point(&f, rho, side).unwrap();
                let u = upsilon(4, f.i, f.r, z).unwrap();
                // Forming z = q + rho e^{i theta} in floating point perturbs the angle by about eps |q| / rho.
                let tol = 1e-12f64.max(8.0 * f64::EPSILON * 4.0 / rho);
                assert!((u - Complex64::from_polar(1.0, f.theta)).norm() < tol, "{f:?} rho {rho}");
            }
        }
    }
    assert!(FiberSpec::new(4, 1, 2, FRAC_PI_2).is_err());
    assert!(FiberSpec::new(4, 2, 2, 0.1).is_err());
}

#[test]
fn psi_of_a_single_point() {
    let alphas = vec![1.5, 0.5, 2.0];
    let z = ExtComplex::Finite(c(0.3, 0.8));
    let cfg = PlanarConfig {
        l: 3,
        alphas: alphas.clone(),
        points: vec![z],
        strengths: vec![0.7],
        groups: vec![1],
        mode: DistanceMode::Spherical,
    };
    let expected: f64 = (1..=3)
        .map(|i| alphas[i - 1] / (2.0 * PI) * 0.7 * stereo_distance(z, anchor_point(3, i)).ln())
        .sum();
    assert!((psi_planar(&cfg).unwrap() - expected).abs() < 1e-15);

    let euclid = PlanarConfig {
        mode: DistanceMode::Euclidean,
        ..cfg
    };
    let expected: f64 = (1..=3)
        .map(|i| alphas[i - 1] / (2.0 * PI) * 0.7 * (c(0.3, 0.8) - i as f64).norm().ln())
        .sum();
    assert!((psi_planar(&euclid).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn psi_matches_the_sphere_through_stereographic_transport() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let l = 4;
    let alphas = vec![1.0, 2.5, 0.5, 3.0];
    for _ in 0..200 {
        let points: Vec<ExtComplex> = (0..3)
            .map(|_| ExtComplex::Finite(c(rng.random_range(-4.0..6.0), rng.random_range(-3.0..3.0))))
            .collect();
        let strengths = vec![1.0, 0.6, 1.7];
        let cfg = PlanarConfig {
            l,
            alphas: alphas.clone(),
            points: points.clone(),
            strengths: strengths.clone(),
            groups: vec![1, 2, 4],
            mode: DistanceMode::Spherical,
        };
        let anchors = (1..=l).map(|i| lift(anchor_point(l, i))).collect();
        let src = SourceSet::new(&Surface::Sphere, anchors, alphas.clone()).unwrap();
        let sys = System::new(Surface::Sphere, src, Background::zero());
        let vc = VortexConfig::new(&Surface::Sphere, points.iter().map(|z| lift(*z)).collect(), strengths).unwrap();
        let on_sphere = sys.psi_pm(&vc, PsiSign::Plus).unwrap();
        assert!((psi_planar(&cfg).unwrap() - on_sphere).abs() < 1e-8);
    }
}

#[test]
fn collapse_slopes() {
    let rhos = log_space(1e-6, 1e-3, 20);
    let bounded = collapse_slope(&consecutive_layout(vec![3.0, 3.0, 3.0]), 2, &rhos).unwrap();
    assert_eq!(bounded.movers, vec![0, 1]);
    assert!((bounded.predicted - (2.0 - 6.0) / (2.0 * PI)).abs() < 1e-15);
    assert!(bounded.relative_error() < 0.05);

    let blowup = collapse_slope(&consecutive_layout(vec![3.0, 0.5, 3.0]), 2, &rhos).unwrap();
    assert!((blowup.predicted - 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert!(blowup.measured > 0.0);
    assert!(blowup.relative_error() < 0.05);

    // A lone vortex collapsing onto q_1 of a two-block coupling.
    let layout = FiberLayout::new(
        CouplingSpec::from_r(&[1, 0, 3, 2]).unwrap(),
        vec![1, 3],
        vec![0.4, 0.8],
        vec![1.3, 1.0],
        vec![2.0, 1.0, 1.0, 1.0],
    )
    .unwrap();
    let single = collapse_slope(&layout, 1, &rhos).unwrap();
    assert_eq!(single.movers, vec![0]);
    assert!((single.predicted + 2.0 * 1.3 / (2.0 * PI)).abs() < 1e-15);
    assert!(single.relative_error() < 0.05);

    assert!(collapse_slope(&layout, 1, &rhos[..3]).is_err());
    assert!(bounded.to_csv().starts_with("rho,psi\n"));
}

/// Largest planar energy over random fiber samples and the matched collapse onto each anchor.
fn sup_psi(layout: &FiberLayout, rho_min: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        best = best.max(psi_planar(&layout.sample(&mut rng, rho_min).unwrap()).unwrap());
    }
    for a in 1..=layout.l() {
        if let Ok(s) = collapse_slope(layout, a, &log_space(rho_min, 1e-1, 8)) {
            best = s.samples.iter().map(|p| p.1).fold(best, f64::max);
        }
    }
    best
}

#[test]
fn supremum_is_stable_under_the_strict_condition() {
    let layout = consecutive_layout(vec![3.0, 3.0, 3.0]);
    let shallow = sup_psi(&layout, 1e-3, 100_000, 1);
    let deep = sup_psi(&layout, 1e-8, 100_000, 1);
    assert!(deep.is_finite());
    assert!((deep - shallow) / 5.0 < 0.1, "{shallow} -> {deep}");
}

#[test]
fn supremum_grows_when_one_group_violates_the_condition() {
    let layout = consecutive_layout(vec![3.0, 0.5, 3.0]);
    let predicted = 1.0 / (2.0 * PI);
    let shallow = sup_psi(&layout, 1e-3, 100_000, 2);
    let deep = sup_psi(&layout, 1e-8, 100_000, 2);
    let growth = deep - shallow;
    assert!(growth >= 0.9 * predicted * 5.0 * 10f64.ln(), "growth {growth}");
}

#[test]
fn separation_is_bounded_below() {
    let a = FiberSpec::new(3, 1, 2, 0.3).unwrap();
    let b = FiberSpec::new(3, 1, 2, 0.6).unwrap();
    let deep = separation_delta(&a, &b, 10_000, 1e-8, 5).unwrap();
    let shallow = separation_delta(&a, &b, 10_000, 1e-4, 5).unwrap();
    assert_eq!(deep.kind, SeparationKind::BothEnds);
    assert!(deep.delta > 1e-3, "{}", deep.delta);
    assert!(deep.delta > 0.5 * shallow.delta);

    assert!(matches!(separation_delta(&a, &a, 10, 1e-4, 0), Err(Error::Validation(_))));
    // Matched points on one fiber: the normalized distance tends to zero.
    let mut last = f64::INFINITY;
    for rho in log_space(1e-2, 1e-8, 7) {
        let z = ExtComplex::Finite(fiber_point(&a, rho, Side::Left).unwrap());
        let w = ExtComplex::Finite(fiber_point(&a, rho * (1.0 + rho), Side::Left).unwrap());
        let ratio = stereo_distance(z, w)
            / (stereo_distance(z, anchor_point(3, 1)) * stereo_distance(z, anchor_point(3, 2)));
        assert!(ratio < last);
        last = ratio;
    }
    assert!(last < 1e-6);

    let near = FiberSpec::new(4, 1, 2, 0.3).unwrap();
    let far = FiberSpec::new(4, 3, 4, 0.5).unwrap();
    let disjoint = separation_delta(&near, &far, 10_000, 1e-8, 6).unwrap();
    assert_eq!(disjoint.kind, SeparationKind::Disjoint);
    assert!(disjoint.delta > 0.1);

    let touching = FiberSpec::new(3, 2, 3, 0.5).unwrap();
    let one = separation_delta(&a, &touching, 10_000, 1e-8, 7).unwrap();
    assert_eq!(one.kind, SeparationKind::OneEnd);
    assert!(one.delta > 1e-3);
}

#[test]
fn intersection_table_follows_the_case_list() {
    let r = |c: &CouplingSpec, i: usize| c.r()[i - 1] + 1;
    let consecutive = CouplingSpec::consecutive(4).unwrap();
    assert_eq!(predicted_intersection(&consecutive, 2, 2), vec![2, r(&consecutive, 2)]);

    let shared = CouplingSpec::from_r(&[2, 2, 0]).unwrap();
    assert_eq!(predicted_intersection(&shared, 1, 2), vec![3]);

    let two_blocks = CouplingSpec::from_r(&[1, 0, 3, 2]).unwrap();
    assert!(predicted_intersection(&two_blocks, 1, 3).is_empty());
    assert!(predicted_intersection(&two_blocks, 2, 4).is_empty());

    let layouts = [
        (consecutive.clone(), vec![1, 1, 2, 3, 4]),
        (shared, vec![1, 2, 2, 3]),
        (two_blocks, vec![1, 2, 3, 4, 4]),
    ];
    for (coupling, groups) in layouts {
        let n = groups.len();
        let l = coupling.len();
        let layout = FiberLayout::new(coupling, groups.clone(), nesting_angles(&groups), vec![1.0; n], vec![2.0; l]).unwrap();
        let rows = intersection_table(&layout);
        assert_eq!(rows.len(), n * (n - 1) / 2);
        for row in &rows {
            assert!(row.matches, "{row:?}");
        }
        let csv = intersection_csv(&rows);
        assert!(csv.starts_with("j,k,fiber_j,fiber_k,predicted,anchors,crossings,matches\n"));
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }
}

#[test]
fn fiber_layout_validation() {
    let coupling = CouplingSpec::consecutive(3).unwrap();
    assert!(FiberLayout::new(coupling.clone(), vec![1, 2], vec![0.3, 0.3], vec![1.0; 2], vec![1.0; 3]).is_err());
    assert!(FiberLayout::new(coupling.clone(), vec![1, 4], vec![0.3, 0.5], vec![1.0; 2], vec![1.0; 3]).is_err());
    assert!(FiberLayout::new(coupling, vec![1], vec![0.3], vec![1.0], vec![1.0; 2]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inner_product_identity_holds(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..7),
        z in (-10.0f64..10.0, -10.0f64..10.0),
        seed in any::<u64>(),
    ) {
        let points: Vec<Complex64> = pts.iter().map(|p| c(p.0, p.1)).collect();
        for j in 0..points.len() {
            for k in 0..j {
                prop_assume!((points[j] - points[k]).norm() > 1e-3);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let strengths: Vec<f64> = points.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
        let (lhs, rhs) = inner_product_identity(&points, &strengths, c(z.0, z.1));
        let scale: f64 = strengths.iter().map(|g| g.abs()).sum::<f64>().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + scale));
    }

    #[test]
    fn psi_is_finite_away_from_anchors(seed in any::<u64>()) {
        let layout = consecutive_layout(vec![1.0, 2.0, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = layout.sample(&mut rng, 1e-6).unwrap();
        prop_assert!(psi_planar(&cfg).unwrap().is_finite());
    }
}
