use std::f64::consts::PI;

use kh_core::dynamics::{hamiltonian_cartesian, kinetic};
use kh_core::integrator::{find_z_zeros, integrate, IntegratorOptions, Termination};
use kh_core::phase::CartesianState;
use kh_core::seeding::{sample_seeds, seed_zero_energy, SeedRegion, SeedSpec};
use kh_core::Branch;

fn seed() -> CartesianState {
    seed_zero_energy(&SeedSpec::new(-0.1, 0.6, Branch::Plus)).unwrap()
}

#[test]
fn stationary_axis_orbit() {
    let c0 = CartesianState::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
    let traj = integrate(&c0, (0.0, 10.0), &IntegratorOptions::default()).unwrap();
    assert_eq!(traj.termination, Termination::SpanEnd);
    for t in [0.0, 2.5, 5.0, 10.0] {
        let c = traj.sample(t).unwrap();
        assert!((c.z - 1.0).abs() < 1e-12 && c.x == 0.0 && c.y == 0.0);
        assert!((c.pz + t / (32.0 * PI)).abs() < 1e-8, "p_z({t}) = {}", c.pz);
    }
}

#[test]
fn planar_line_collides_on_its_line() {
    let c0 = CartesianState::new(1.0, 0.0, 0.0, -0.5 / PI.sqrt(), 0.0, 0.0);
    let traj = integrate(&c0, (0.0, 10.0), &IntegratorOptions::default()).unwrap();
    assert!(traj.events.planar);
    for seg in &traj.segments {
        assert_eq!((seg.end.y, seg.end.z), (0.0, 0.0));
    }
    let tc = traj.termination.collision_time().expect("collision");
    assert!((tc - PI.sqrt()).abs() < 1e-6);
    let scan = find_z_zeros(&traj, 1e-12);
    assert!(scan.planar && scan.zeros.is_empty());
}

#[test]
fn zero_energy_seeds_conserve_energy() {
    let opts = IntegratorOptions { stop_after_zeros: Some(7), max_span: 1e8, ..Default::default() };
    for spec in sample_seeds(10, 5, &SeedRegion::default()).unwrap() {
        let c0 = seed_zero_energy(&spec).unwrap();
        let traj = integrate(&c0, (0.0, 1e8), &opts).unwrap();
        for seg in &traj.segments {
            let h = hamiltonian_cartesian(&seg.end).unwrap();
            assert!(h.abs() < 1e-9 * kinetic(&seg.end).max(1.0));
        }
        assert!(traj.stats.max_angular_drift < 1e-9);
    }
}

#[test]
fn zeros_are_zeros_of_z() {
    let opts = IntegratorOptions { stop_after_zeros: Some(5), ..Default::default() };
    let traj = integrate(&seed(), (0.0, 1e6), &opts).unwrap();
    assert_eq!(traj.z_zeros().len(), 5);
    for &t in traj.z_zeros() {
        assert!(traj.sample(t).unwrap().z.abs() < 1e-10);
    }
}

#[test]
fn events_survive_tighter_tolerances() {
    let opts = IntegratorOptions { stop_after_zeros: Some(6), ..Default::default() };
    let fine = IntegratorOptions { rel_tol: 1e-12, abs_tol: 1e-12, ..opts.clone() };
    let a = integrate(&seed(), (0.0, 1e6), &opts).unwrap();
    let b = integrate(&seed(), (0.0, 1e6), &fine).unwrap();
    assert_eq!(a.z_zeros().len(), b.z_zeros().len());
    for (x, y) in a.z_zeros().iter().zip(b.z_zeros()) {
        assert!((x - y).abs() < 1e-6, "{x} vs {y}");
    }
}

#[test]
fn time_reversal_recovers_the_seed() {
    let c0 = seed();
    let fwd = integrate(&c0, (0.0, 20.0), &IntegratorOptions::default()).unwrap();
    let back = integrate(&fwd.final_state, (20.0, 0.0), &IntegratorOptions::default()).unwrap();
    let diff = c0
        .to_array()
        .iter()
        .zip(back.final_state.to_array())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-6, "reversal error {diff}");
}

#[test]
fn segments_are_contiguous() {
    let traj = integrate(&seed(), (0.0, 50.0), &IntegratorOptions::default()).unwrap();
    for w in traj.segments.windows(2) {
        assert_eq!(w[0].t_end, w[1].t_start);
        assert_eq!(w[0].end, w[1].start);
    }
}
