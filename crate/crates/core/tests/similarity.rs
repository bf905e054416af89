use std::f64::consts::PI;

use kh_core::integrator::{integrate, IntegratorOptions, Trajectory};
use kh_core::similarity::{
    crossings, extend, fundamental_domain, replicate, replicate_adapted_k, similarity_factors,
};
use kh_core::survey::{analyze_orbit, AnalysisOptions};
use kh_core::{seed_zero_energy, Branch, CartesianState, Error, PhaseSymmetry, SeedSpec};

fn orbit(spec: SeedSpec, span: f64) -> Trajectory {
    let c0 = seed_zero_energy(&spec).unwrap();
    let opts = IntegratorOptions { rel_tol: 1e-12, abs_tol: 1e-12, stop_after_zeros: Some(7), ..Default::default() };
    integrate(&c0, (0.0, span), &opts).unwrap()
}

fn expanding() -> Trajectory {
    orbit(SeedSpec::new(0.1, 0.6, Branch::Plus), 1e8)
}

#[test]
fn domain_takes_first_three_zeros() {
    let traj = expanding();
    let z = traj.z_zeros();
    let dom = fundamental_domain(&traj, z, 0).unwrap();
    assert_eq!((dom.t0, dom.t1, dom.t2), (z[0], z[1], z[2]));
    let dom = fundamental_domain(&traj, z, 1).unwrap();
    assert_eq!((dom.t0, dom.t1, dom.t2), (z[1], z[2], z[3]));
    assert!(matches!(fundamental_domain(&traj, &z[..2], 0), Err(Error::NotAnAOrbit { count: 2 })));
}

#[test]
fn crossings_are_transversal_and_alternate() {
    let traj = expanding();
    let cs = crossings(&traj, traj.z_zeros()).unwrap();
    assert!(cs.len() >= 5);
    for w in cs.windows(2) {
        assert_eq!(w[0].direction, -w[1].direction, "du/dt sign at {} and {}", w[0].t, w[1].t);
        assert_eq!(w[0].gamma, -w[1].gamma, "branch sign at {} and {}", w[0].t, w[1].t);
    }
}

#[test]
fn endpoint_identity_holds() {
    let traj = expanding();
    let dom = fundamental_domain(&traj, traj.z_zeros(), 0).unwrap();
    assert!(dom.a0.u.abs() < 1e-9 && dom.a2.u.abs() < 1e-9);
    assert!((dom.a0.p_u - dom.a2.p_u).abs() < 1e-6);
    let f = similarity_factors(&dom);
    assert!(f.lambda > 1.0);
    let rep = replicate(&traj, &f, dom.t2).unwrap();
    let actual = traj.sample(dom.t2).unwrap();
    let err = rep.to_array().iter().zip(actual.to_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6 * f.lambda * f.lambda, "replica at t2 off by {err}");
}

#[test]
fn previous_domain_maps_back() {
    let traj = expanding();
    let dom = fundamental_domain(&traj, traj.z_zeros(), 2).unwrap();
    let f = similarity_factors(&dom);
    let (a, b) = (f.boundary(-1), f.boundary(0));
    assert!((a - traj.z_zeros()[0]).abs() < 1e-6 * (b - a));
    for i in 0..=16 {
        let t = a + (b - a) * i as f64 / 16.0;
        let rep = replicate_adapted_k(&traj, &f, -1, t).unwrap();
        assert!(traj.sample_adapted(t).unwrap().max_abs_diff(&rep) < 1e-5);
    }
}

#[test]
fn extension_covers_the_requested_domains() {
    let traj = expanding();
    let dom = fundamental_domain(&traj, traj.z_zeros(), 0).unwrap();
    let f = similarity_factors(&dom);
    let curve = extend(&traj, &f, 0..=2).unwrap();
    assert_eq!(curve.boundaries.len(), 4);
    for (i, &b) in curve.boundaries.iter().enumerate() {
        assert!((b - traj.z_zeros()[2 * i]).abs() < 1e-6 * b.abs().max(1.0));
    }
    let t = 0.5 * (curve.boundaries[2] + curve.boundaries[3]);
    let diff = curve.sample(t).unwrap().to_adapted(None).unwrap();
    let actual = traj.sample_adapted(t).unwrap();
    assert!((diff.s - actual.s).abs() < 1e-6 && (diff.u - actual.u).abs() < 1e-6);
}

#[test]
fn lambda_is_invariant_under_dilation_and_rotation() {
    let spec = SeedSpec::new(-0.12, 0.4, Branch::Minus);
    let c0 = seed_zero_energy(&spec).unwrap();
    let opts = AnalysisOptions { check_collision: false, ..Default::default() };
    let base = analyze_orbit(&c0, &opts).unwrap().report.similarity.unwrap().factors.lambda;
    for (d, phi) in [(0.5, 1.0), (3.0, -2.0), (1.7, PI)] {
        let moved: CartesianState = c0.dilate(d).unwrap().rotate(phi);
        let sim = analyze_orbit(&moved, &opts).unwrap().report.similarity.unwrap();
        assert!((sim.factors.lambda - base).abs() < 1e-8, "λ {} vs {base}", sim.factors.lambda);
    }
}
