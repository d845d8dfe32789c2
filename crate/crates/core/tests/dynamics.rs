mod common;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vortex_core::dynamics::{integrate, integrate_with, velocity, Integrator, Method, Status};
use vortex_core::energy::{Background, FieldSpec, SourceSet, System, VortexConfig};
use vortex_core::surface::{Point, Surface};
use vortex_core::Error;

use common::*;

fn sphere_system(sources: Vec<Point>, alphas: Vec<f64>, h: FieldSpec) -> System {
    let src = SourceSet::new(&Surface::Sphere, sources, alphas).unwrap();
    let bg = Background::from_spec(&Surface::Sphere, &h, None).unwrap();
    System::new(Surface::Sphere, src, bg)
}

fn tetrahedron() -> Vec<Point> {
    let s = 1.0 / 3f64.sqrt();
    vec![
        Vector3::new(s, s, s),
        Vector3::new(s, -s, -s),
        Vector3::new(-s, s, -s),
        Vector3::new(-s, -s, s),
    ]
}

#[test]
fn antipodal_pair_does_not_move() {
    let sys = System::free(Surface::Sphere);
    let x = Vector3::new(0.3, -0.4, 0.5).normalize();
    let cfg = VortexConfig::new(&sys.surface, vec![x, -x], vec![1.0, 1.0]).unwrap();
    for v in velocity(&sys, &cfg).unwrap() {
        assert!(v.norm() < 1e-12);
    }
    let traj = integrate(&sys, &cfg, 10.0, 1e-3, Method::Rk4).unwrap();
    assert_eq!(traj.status, Status::Completed);
    for (a, b) in traj.final_config().positions.iter().zip(&cfg.positions) {
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn velocity_is_orthogonal_to_the_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let surfaces = [
        Surface::Sphere,
        Surface::Projective,
        Surface::torus(Complex64::new(-0.1, 0.9)).unwrap(),
    ];
    for surface in surfaces {
        let sources = separated_points(&surface, &mut rng, 2, &[], 0.3);
        let src = SourceSet::new(&surface, sources.clone(), vec![1.0, 2.5]).unwrap();
        let sys = System::new(surface, src, Background::zero());
        for _ in 0..50 {
            let pts = separated_points(&surface, &mut rng, 3, &sources, 0.2);
            let cfg = VortexConfig::new(&surface, pts, vec![1.0, 0.5, 2.0]).unwrap();
            let v = velocity(&sys, &cfg).unwrap();
            let g = sys.grad_hamiltonian(&cfg).unwrap();
            for (j, (v, g)) in v.iter().zip(&g).enumerate() {
                assert!(v.dot(g).abs() < 1e-12 * (1.0 + g.norm_squared()));
                assert!((v.norm() * cfg.strengths[j].abs() - g.norm()).abs() < 1e-12 * (1.0 + g.norm()));
            }
        }
    }
}

#[test]
fn doubling_strengths_doubles_velocities() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sys = System::free(Surface::Sphere);
    let pts = separated_points(&Surface::Sphere, &mut rng, 3, &[], 0.2);
    let cfg = VortexConfig::new(&sys.surface, pts.clone(), vec![1.0, 0.4, -0.7]).unwrap();
    let twice = VortexConfig::new(&sys.surface, pts, vec![2.0, 0.8, -1.4]).unwrap();
    let v1 = velocity(&sys, &cfg).unwrap();
    let v2 = velocity(&sys, &twice).unwrap();
    for (a, b) in v1.iter().zip(&v2) {
        assert!((a * 2.0 - b).norm() < 1e-12 * (1.0 + a.norm()));
    }
}

#[test]
fn single_vortex_circles_a_sink() {
    let p = Vector3::z();
    let sys = sphere_system(vec![p], vec![1.5], FieldSpec::Zero);
    let x = Vector3::new(0.8, 0.0, 0.6);
    let cfg = VortexConfig::new(&sys.surface, vec![x], vec![1.0]).unwrap();
    let d0 = Surface::Sphere.dist(&x, &p);
    let traj = integrate(&sys, &cfg, 10.0, 1e-3, Method::Rk4).unwrap();
    for state in &traj.states {
        assert!((Surface::Sphere.dist(&state[0], &p) - d0).abs() < 1e-6);
    }
    // The vortex actually moves.
    assert!((traj.final_config().positions[0] - x).norm() > 1e-2);
}

#[test]
fn equal_pair_rotates_rigidly() {
    let sys = System::free(Surface::Sphere);
    let a = Vector3::new(1.0, 0.0, 0.2).normalize();
    let b = Vector3::new(0.0, 1.0, 0.3).normalize();
    let cfg = VortexConfig::new(&sys.surface, vec![a, b], vec![1.0, 1.0]).unwrap();
    let d0 = Surface::Sphere.dist(&a, &b);
    let traj = integrate(&sys, &cfg, 10.0, 1e-3, Method::Rk4).unwrap();
    for state in &traj.states {
        assert!((Surface::Sphere.dist(&state[0], &state[1]) - d0).abs() < 1e-6);
    }
}

#[test]
fn rk4_conserves_energy_with_sources() {
    let sys = sphere_system(
        vec![Vector3::new(0.0, 0.6, 0.8), Vector3::new(0.0, -0.6, -0.8)],
        vec![0.5, 0.8],
        FieldSpec::Linear {
            axis: [1.0, 0.0, 0.0],
            coeff: 0.2,
        },
    );
    let cfg = VortexConfig::new(&sys.surface, tetrahedron(), vec![1.0, 1.0, 0.5, 0.8]).unwrap();
    let traj = integrate_with(&sys, &cfg, 10.0, &Integrator::new(Method::Rk4, 1e-3).record_every(10)).unwrap();
    assert_eq!(traj.status, Status::Completed);
    assert!(traj.relative_energy_drift() < 1e-6, "{}", traj.relative_energy_drift());
}

#[test]
fn source_free_moment_is_conserved() {
    let sys = System::free(Surface::Sphere);
    let mut pts = tetrahedron();
    pts[0] = Vector3::new(0.9, 0.1, 0.2).normalize();
    let cfg = VortexConfig::new(&sys.surface, pts, vec![1.0, 0.5, -0.8, 1.3]).unwrap();
    let traj = integrate_with(&sys, &cfg, 10.0, &Integrator::new(Method::Rk4, 1e-3).record_every(10)).unwrap();
    assert_eq!(traj.status, Status::Completed);
    assert!(traj.moment_drift() < 1e-6, "{}", traj.moment_drift());
    assert!(traj.relative_energy_drift() < 1e-6);
}

#[test]
fn states_stay_on_the_sphere_after_every_step() {
    let sys = System::free(Surface::Projective);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pts = separated_points(&Surface::Projective, &mut rng, 3, &[], 0.3);
    let cfg = VortexConfig::new(&sys.surface, pts, vec![1.0, 1.0, 2.0]).unwrap();
    for method in [Method::Rk4, Method::Midpoint] {
        let traj = integrate(&sys, &cfg, 1.0, 1e-3, method).unwrap();
        assert_eq!(traj.len(), 1001);
        for state in &traj.states {
            for x in state {
                assert!((x.norm() - 1.0).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn forward_then_backward_returns_to_start() {
    let sys = sphere_system(vec![Vector3::x()], vec![0.7], FieldSpec::Zero);
    let cfg = VortexConfig::new(
        &sys.surface,
        vec![Vector3::new(0.0, 0.6, 0.8), Vector3::new(0.0, 0.8, -0.6), -Vector3::y()],
        vec![1.0, 0.6, 1.2],
    )
    .unwrap();
    let fwd = integrate(&sys, &cfg, 1.0, 1e-3, Method::Rk4).unwrap();
    let back = integrate_with(&sys, &fwd.final_config(), 1.0, &Integrator::new(Method::Rk4, 1e-3).reversed()).unwrap();
    for (a, b) in back.final_config().positions.iter().zip(&cfg.positions) {
        assert!((a - b).norm() < 1e-8);
    }
}

#[test]
fn torus_states_remain_in_the_fundamental_domain() {
    let surface = Surface::torus(Complex64::new(0.3, 0.8)).unwrap();
    let sys = System::free(surface);
    let cfg = VortexConfig::new(
        &surface,
        vec![Vector3::new(0.1, 0.1, 0.0), Vector3::new(0.35, 0.2, 0.0)],
        vec![1.0, 1.0],
    )
    .unwrap();
    let traj = integrate(&sys, &cfg, 2.0, 1e-3, Method::Rk4).unwrap();
    assert_eq!(traj.status, Status::Completed);
    for state in &traj.states {
        for x in state {
            assert!((surface.canonical(x) - x).norm() < 1e-12);
        }
    }
    assert!(traj.relative_energy_drift() < 1e-8);
    // The separation follows a level curve of the Green's function.
    let g0 = surface.greens(&cfg.positions[0], &cfg.positions[1]).unwrap();
    for state in &traj.states {
        assert!((surface.greens(&state[0], &state[1]).unwrap() - g0).abs() < 1e-6);
    }
}

#[test]
fn opposite_pair_approaching_a_source_halts() {
    // A vortex/anti-vortex pair translates along a great circle into the source.
    let p = Vector3::x();
    let sys = sphere_system(vec![p], vec![0.01], FieldSpec::Zero);
    let c = Vector3::new(0.0, 0.0, 1.0);
    let e = Vector3::y() * 0.05;
    let cfg = VortexConfig::new(
        &sys.surface,
        vec![Surface::Sphere.exp(&c, &e), Surface::Sphere.exp(&c, &(-e))],
        vec![1.0, -1.0],
    )
    .unwrap();
    let mut opts = Integrator::new(Method::Rk4, 1e-3);
    opts.collision_tol = 0.06;
    let traj = integrate_with(&sys, &cfg, 20.0, &opts).unwrap();
    match traj.status {
        Status::Collision { distance, .. } => assert!(distance < 0.06),
        Status::Completed => panic!("expected a near-collision halt"),
    }
    assert_eq!(traj.times.len(), traj.states.len());
}

#[test]
fn invalid_step_or_horizon_is_rejected() {
    let sys = System::free(Surface::Sphere);
    let cfg = VortexConfig::new(&sys.surface, vec![Vector3::x(), Vector3::y()], vec![1.0, 1.0]).unwrap();
    assert!(matches!(integrate(&sys, &cfg, 1.0, 0.0, Method::Rk4), Err(Error::Validation(_))));
    assert!(matches!(integrate(&sys, &cfg, 1.0, -1e-3, Method::Rk4), Err(Error::Validation(_))));
    assert!(matches!(integrate(&sys, &cfg, 0.0, 1e-3, Method::Rk4), Err(Error::Validation(_))));
    let touching = VortexConfig::new(&sys.surface, vec![Vector3::x(), Vector3::x()], vec![1.0, 1.0]).unwrap();
    assert!(matches!(velocity(&sys, &touching), Err(Error::Singularity { .. })));
}

#[test]
fn csv_layout() {
    let sys = System::free(Surface::Sphere);
    let cfg = VortexConfig::new(&sys.surface, vec![Vector3::x(), Vector3::y()], vec![1.0, 1.0]).unwrap();
    let traj = integrate_with(&sys, &cfg, 0.1, &Integrator::new(Method::Midpoint, 1e-2).record_every(5)).unwrap();
    let csv = traj.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x0,y0,z0,x1,y1,z1,energy,mx,my,mz");
    assert_eq!(lines.count(), 3);
    assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
}
