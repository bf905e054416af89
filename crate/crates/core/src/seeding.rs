//! Zero-energy initial conditions on the `u = 0` (equivalently `z = 0`) slice.
//!
//! Rotation and dilation translate `θ` and `s`, so every off-axis state with
//! `z = 0` is equivalent to one with `s = θ = 0`. What remains is the pair
//! `(p_s, p_θ)` and the choice of root `p_u` of the energy equation
//! `4 p_u² + 4 p_θ p_u + p_s² + p_θ² − 1/(4π) = 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{to_cartesian, AdaptedState, CartesianState};
use crate::J_BOUND;

/// Root selector `γ ∈ {+1, −1}` for `p_u` on the `u = 0` slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl From<Branch> for i8 {
    fn from(b: Branch) -> i8 {
        match b {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Branch {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Branch::Plus),
            -1 => Ok(Branch::Minus),
            other => Err(format!("branch must be +1 or -1, got {other}")),
        }
    }
}

/// Where a sampled seed came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedOrigin {
    pub rng_seed: u64,
    pub index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub p_s: f64,
    pub p_theta: f64,
    pub branch: Branch,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<SeedOrigin>,
}

impl SeedSpec {
    pub fn new(p_s: f64, p_theta: f64, branch: Branch) -> Self {
        Self { p_s, p_theta, branch, rng: None }
    }
}

/// Both roots `p_u = −½p_θ ± ½√(1/(4π) − p_s²)`, `(γ = +1, γ = −1)`, or
/// `None` when they are complex.
pub fn pu_branches(p_s: f64, p_theta: f64) -> Option<(f64, f64)> {
    let disc = 0.25 / PI - p_s * p_s;
    if disc < 0.0 || disc.is_nan() {
        return None;
    }
    let half_root = 0.5 * disc.sqrt();
    let center = -0.5 * p_theta;
    Some((center + half_root, center - half_root))
}

/// Admissible interval for `p_s` at inclination `u` on the zero-energy
/// surface: the `p_s` for which the discriminant
/// `cos u/(4π) − (cos u p_s + sin u p_θ)²` of the `p_u` quadratic is
/// non-negative, i.e. `−tan u p_θ ± √(1/(4π cos u))`.
pub fn j_bounds(u: f64, p_theta: f64) -> Result<(f64, f64)> {
    if !(u.abs() < FRAC_PI_2) {
        return Err(Error::InclinationOutOfRange(u));
    }
    let center = -u.tan() * p_theta;
    let half_width = (0.25 / (PI * u.cos())).sqrt();
    Ok((center - half_width, center + half_width))
}

/// Cartesian state for the normalized seed `(s, θ, u) = (0, 0, 0)`.
pub fn seed_zero_energy(spec: &SeedSpec) -> Result<CartesianState> {
    let (plus, minus) = pu_branches(spec.p_s, spec.p_theta).ok_or(Error::ImaginaryMomentum { p_s: spec.p_s })?;
    let p_u = match spec.branch {
        Branch::Plus => plus,
        Branch::Minus => minus,
    };
    to_cartesian(&AdaptedState::new(0.0, 0.0, 0.0, spec.p_s, spec.p_theta, p_u))
}

/// Rectangle in the `(p_s, p_θ)` plane to sample from. Points closer than
/// `boundary_margin` to the bound `|p_s| = 1/(2√π)` are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedRegion {
    pub p_s_min: f64,
    pub p_s_max: f64,
    pub p_theta_min: f64,
    pub p_theta_max: f64,
    pub boundary_margin: f64,
}

impl Default for SeedRegion {
    fn default() -> Self {
        Self { p_s_min: -J_BOUND, p_s_max: J_BOUND, p_theta_min: -1.0, p_theta_max: 1.0, boundary_margin: 1e-6 }
    }
}

impl SeedRegion {
    /// The line `p_s = value` with the default `p_θ` range.
    pub fn fixed_p_s(value: f64) -> Self {
        Self { p_s_min: value, p_s_max: value, ..Self::default() }
    }

    fn admissible_p_s(&self) -> (f64, f64) {
        let limit = J_BOUND - self.boundary_margin;
        (self.p_s_min.max(-limit), self.p_s_max.min(limit))
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.p_s_min, self.p_s_max, self.p_theta_min, self.p_theta_max, self.boundary_margin];
        if !all.iter().all(|v| v.is_finite()) || self.boundary_margin < 0.0 {
            return Err(Error::InvalidOption(format!("malformed seed region {self:?}")));
        }
        if self.p_s_min > self.p_s_max || self.p_theta_min > self.p_theta_max {
            return Err(Error::InvalidOption(format!("seed region bounds are reversed: {self:?}")));
        }
        let (lo, hi) = self.admissible_p_s();
        if lo > hi {
            return Err(Error::EmptyRegion);
        }
        Ok(())
    }
}

const MAX_REJECTIONS: usize = 100_000;

/// Draws the seed with the given index. Each index has its own ChaCha
/// stream, so the result does not depend on how many seeds are drawn or in
/// which order.
pub fn sample_seed(rng_seed: u64, index: u64, region: &SeedRegion) -> Result<SeedSpec> {
    region.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index);
    let (lo, hi) = region.admissible_p_s();
    for _ in 0..MAX_REJECTIONS {
        let p_s = rng.random_range(region.p_s_min..=region.p_s_max);
        let p_theta = rng.random_range(region.p_theta_min..=region.p_theta_max);
        let branch = if rng.random::<bool>() { Branch::Plus } else { Branch::Minus };
        if p_s < lo || p_s > hi {
            continue;
        }
        return Ok(SeedSpec { p_s, p_theta, branch, rng: Some(SeedOrigin { rng_seed, index }) });
    }
    Err(Error::EmptyRegion)
}

pub fn sample_seeds(n: usize, rng_seed: u64, region: &SeedRegion) -> Result<Vec<SeedSpec>> {
    if n == 0 {
        return Err(Error::InvalidOption("number of seeds must be at least 1".into()));
    }
    region.validate()?;
    (0..n as u64).map(|i| sample_seed(rng_seed, i, region)).collect()
}
