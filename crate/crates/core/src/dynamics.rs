//! The Kepler–Heisenberg Hamiltonian `H = K + U`, Hamilton's equations and
//! the first integrals `H`, `p_θ` and `J`.
//!
//! `K = ½(P_X² + P_Y²)` with `P_X = p_x − ½y p_z`, `P_Y = p_y + ½x p_z`, and
//! `U = −1/(8π √((x² + y²)² + 16 z²))`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{AdaptedState, CartesianState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedTriple {
    #[serde(rename = "H")]
    pub energy: f64,
    pub p_theta: f64,
    #[serde(rename = "J")]
    pub dilational: f64,
}

/// Time derivatives of the six Cartesian phase coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseVelocity {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl PhaseVelocity {
    pub const fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.z, self.px, self.py, self.pz]
    }
}

fn check_off_origin(c: &CartesianState) -> Result<()> {
    if !c.is_finite() {
        return Err(Error::NonFinite);
    }
    if c.x == 0.0 && c.y == 0.0 && c.z == 0.0 {
        return Err(Error::Singular);
    }
    Ok(())
}

pub fn kinetic(c: &CartesianState) -> f64 {
    let (big_x, big_y) = (c.p_big_x(), c.p_big_y());
    0.5 * (big_x * big_x + big_y * big_y)
}

/// Potential energy; `-inf` at the origin.
pub fn potential(c: &CartesianState) -> f64 {
    let r2 = c.planar_radius_sq();
    -1.0 / (8.0 * PI * r2.hypot(4.0 * c.z))
}

pub fn hamiltonian_cartesian(c: &CartesianState) -> Result<f64> {
    check_off_origin(c)?;
    Ok(kinetic(c) + potential(c))
}

/// Quadratic form in `(p_s, p_θ, p_u)` whose matrix has rows
/// `(cos u, sin u, 0)`, `(sin u, sec u, 2 cos u)`, `(0, 2 cos u, 4 cos u)`.
pub fn adapted_quadratic_form(a: &AdaptedState) -> f64 {
    let (sin_u, cos_u) = a.u.sin_cos();
    let (ps, pt, pu) = (a.p_s, a.p_theta, a.p_u);
    cos_u * ps * ps + 2.0 * sin_u * ps * pt + pt * pt / cos_u + 4.0 * cos_u * pt * pu + 4.0 * cos_u * pu * pu
}

/// `½ exp(−2s) (Q − 1/(4π))`.
pub fn hamiltonian_adapted(a: &AdaptedState) -> Result<f64> {
    if a.u.abs() >= FRAC_PI_2 {
        return Err(Error::InclinationOutOfRange(a.u));
    }
    Ok(0.5 * (-2.0 * a.s).exp() * (adapted_quadratic_form(a) - 0.25 / PI))
}

/// Hamilton's equations on a raw state array. Produces non-finite output at
/// the origin instead of an error; the integrator relies on that to reject
/// steps that land on the singularity.
#[inline]
pub fn rhs(y: &[f64; 6]) -> [f64; 6] {
    let [x, yy, z, px, py, pz] = *y;
    let big_x = px - 0.5 * yy * pz;
    let big_y = py + 0.5 * x * pz;
    let r2 = x * x + yy * yy;
    let qd = r2 * r2 + 16.0 * z * z;
    let q32 = qd * qd.sqrt();
    let du_dx = r2 * x / (4.0 * PI * q32);
    let du_dy = r2 * yy / (4.0 * PI * q32);
    let du_dz = 2.0 * z / (PI * q32);
    [
        big_x,
        big_y,
        0.5 * (x * big_y - yy * big_x),
        -(0.5 * pz * big_y + du_dx),
        -(-0.5 * pz * big_x + du_dy),
        -du_dz,
    ]
}

pub fn vector_field(c: &CartesianState) -> Result<PhaseVelocity> {
    check_off_origin(c)?;
    let d = rhs(&c.to_array());
    Ok(PhaseVelocity { x: d[0], y: d[1], z: d[2], px: d[3], py: d[4], pz: d[5] })
}

pub fn conserved_triple(c: &CartesianState) -> Result<ConservedTriple> {
    Ok(ConservedTriple {
        energy: hamiltonian_cartesian(c)?,
        p_theta: c.angular_momentum(),
        dilational: c.dilational_momentum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{to_adapted, PhaseSymmetry};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng) -> CartesianState {
        loop {
            let mut a = [0.0; 6];
            for v in a.iter_mut() {
                *v = rng.random_range(-2.0..2.0);
            }
            let c = CartesianState::from_array(a);
            if c.heis_radius() > 0.2 {
                return c;
            }
        }
    }

    fn hamiltonian_raw(a: &[f64; 6]) -> f64 {
        let c = CartesianState::from_array(*a);
        kinetic(&c) + potential(&c)
    }

    #[test]
    fn energy_examples() {
        let h = hamiltonian_cartesian(&CartesianState::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((h + 1.0 / (8.0 * PI)).abs() < 1e-17);
        assert!((h + 0.039_788_74).abs() < 1e-8);

        let c = CartesianState::new(1.0, 0.0, 0.0, 1.0 / (2.0 * PI.sqrt()), 0.0, 0.0);
        assert!(hamiltonian_cartesian(&c).unwrap().abs() < 1e-17);
        let c = CartesianState::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0 / PI.sqrt());
        assert!(hamiltonian_cartesian(&c).unwrap().abs() < 1e-17);

        assert!(matches!(
            hamiltonian_cartesian(&CartesianState::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn adapted_energy_examples() {
        let a = AdaptedState::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / (4.0 * PI.sqrt()));
        assert!(hamiltonian_adapted(&a).unwrap().abs() < 1e-17);

        let c = CartesianState::new(1.0, 1.0, 1.0, 0.3, -0.2, 0.1);
        let ha = hamiltonian_adapted(&to_adapted(&c, None).unwrap()).unwrap();
        let hc = hamiltonian_cartesian(&c).unwrap();
        assert!((ha - hc).abs() < 1e-12, "{ha} vs {hc}");

        let hd = hamiltonian_cartesian(&c.dilate(3.0).unwrap()).unwrap();
        assert!((hd - hc / 9.0).abs() < 1e-15);

        let bad = AdaptedState::new(0.0, 0.0, -FRAC_PI_2, 0.0, 0.0, 0.0);
        assert!(matches!(hamiltonian_adapted(&bad), Err(Error::InclinationOutOfRange(_))));
    }

    #[test]
    fn stationary_axis_point() {
        for p in [-3.0, 0.0, 0.7] {
            let v = vector_field(&CartesianState::new(0.0, 0.0, 1.0, 0.0, 0.0, p)).unwrap();
            assert_eq!((v.x, v.y, v.z, v.px, v.py), (0.0, 0.0, 0.0, 0.0, 0.0));
            assert!((v.pz + 1.0 / (32.0 * PI)).abs() < 1e-17);
            assert!((v.pz + 0.009_947_18).abs() < 1e-8);
        }
        // Oracle: central difference of U in z.
        let h = 1e-6;
        let u = |z: f64| potential(&CartesianState::new(0.0, 0.0, z, 0.0, 0.0, 0.0));
        let slope = -(u(1.0 + h) - u(1.0 - h)) / (2.0 * h);
        assert!((slope + 1.0 / (32.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn horizontal_velocity() {
        let v = vector_field(&CartesianState::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!((v.x, v.y), (0.0, 1.0));
    }

    #[test]
    fn conserved_examples() {
        let t = conserved_triple(&CartesianState::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!((t.p_theta, t.dilational), (1.0, 0.0));

        let c = CartesianState::new(1.0, 0.0, 0.0, -1.0 / (2.0 * PI.sqrt()), 0.0, 0.0);
        let t = conserved_triple(&c).unwrap();
        assert!(t.energy.abs() < 1e-17);
        assert_eq!(t.p_theta, 0.0);
        assert!((t.dilational + 0.282_094_79).abs() < 1e-8);
    }

    #[test]
    fn field_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let c = random_state(&mut rng);
            let base = c.to_array();
            let mut grad = [0.0; 6];
            for (j, g) in grad.iter_mut().enumerate() {
                let h = 1e-6 * base[j].abs().max(1.0);
                let (mut plus, mut minus) = (base, base);
                plus[j] += h;
                minus[j] -= h;
                *g = (hamiltonian_raw(&plus) - hamiltonian_raw(&minus)) / (2.0 * h);
            }
            let fd = [grad[3], grad[4], grad[5], -grad[0], -grad[1], -grad[2]];
            let v = vector_field(&c).unwrap().to_array();
            let scale = fd.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-3);
            for i in 0..6 {
                worst = worst.max((v[i] - fd[i]).abs() / scale);
            }
        }
        assert!(worst < 1e-6, "worst relative error {worst}");
    }

    #[test]
    fn dilational_momentum_rate_is_twice_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let c = random_state(&mut rng);
            let v = vector_field(&c).unwrap();
            // J̇ = ẋ p_x + x ṗ_x + ẏ p_y + y ṗ_y + 2 ż p_z + 2 z ṗ_z
            let jdot = v.x * c.px + c.x * v.px + v.y * c.py + c.y * v.py + 2.0 * (v.z * c.pz + c.z * v.pz);
            let h = hamiltonian_cartesian(&c).unwrap();
            assert!((jdot - 2.0 * h).abs() < 1e-9 * (1.0 + h.abs()), "{jdot} vs {}", 2.0 * h);
        }
    }

    #[test]
    fn rotation_invariance_and_dilation_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let c = random_state(&mut rng);
            let phi = rng.random_range(-10.0..10.0);
            let h = hamiltonian_cartesian(&c).unwrap();
            let hr = hamiltonian_cartesian(&c.rotate(phi)).unwrap();
            assert!((h - hr).abs() < 1e-14 * (1.0 + h.abs()));
            let l: f64 = rng.random_range(0.2..5.0);
            let hd = hamiltonian_cartesian(&c.dilate(l).unwrap()).unwrap();
            assert!((hd - h / (l * l)).abs() < 1e-13 * (1.0 + h.abs()) / (l * l));
        }
    }

    #[test]
    fn planar_lines_stay_planar() {
        let v = vector_field(&CartesianState::new(0.7, 0.0, 0.0, -0.3, 0.0, 0.0)).unwrap();
        assert_eq!((v.y, v.z, v.py, v.pz), (0.0, 0.0, 0.0, 0.0));
    }
}
