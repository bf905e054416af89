//! Numerical toolkit for the zero-energy Kepler problem on the Heisenberg
//! group: phase-space charts and symmetries, Hamilton's equations, adaptive
//! integration with event detection, and the self-similarity analysis of
//! orbits (fundamental domains, dilation/rotation factors, time
//! reparametrizations, collision times and the `J`-stratification).

pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod phase;
pub mod seeding;
pub mod similarity;
pub mod survey;

pub use dynamics::{
    conserved_triple, hamiltonian_adapted, hamiltonian_cartesian, vector_field, ConservedTriple, PhaseVelocity,
};
pub use error::{Error, Result};
pub use integrator::{find_z_zeros, integrate, IntegratorOptions, Termination, Trajectory};
pub use phase::{heis_radius, to_adapted, to_cartesian, AdaptedState, CartesianState, PhaseSymmetry};
pub use seeding::{pu_branches, j_bounds, sample_seeds, seed_zero_energy, Branch, SeedRegion, SeedSpec};
pub use similarity::{
    classify, fundamental_domain, similarity_factors, verify, Classification, FundamentalDomain, SimilarityFactors,
    SimilarityReport, VerifyOptions,
};

/// `1/(2√π)`, the bound on `|J|` for zero-energy orbits that cross `z = 0`.
pub const J_BOUND: f64 = 0.282_094_791_773_878_14;
