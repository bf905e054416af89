//! Fixtures shared by the benchmarks.

use kh_core::{seed_zero_energy, Branch, CartesianState, SeedSpec};

/// A dilating orbit (`J > 0`), a shrinking one and a quasi-periodic one.
pub fn fixtures() -> [(&'static str, CartesianState); 3] {
    let seed = |p_s, p_theta| seed_zero_energy(&SeedSpec::new(p_s, p_theta, Branch::Plus)).expect("valid seed");
    [("expanding", seed(0.1, 0.6)), ("collapsing", seed(-0.15, 0.5)), ("quasi_periodic", seed(0.0, 0.5))]
}
