use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The state lies on the z-axis, where the adapted chart is undefined.
    #[error("state lies on the z-axis (planar radius {planar_radius:e}); the adapted chart excludes it")]
    OnZAxis { planar_radius: f64 },

    #[error("inclination u = {0} is outside (-pi/2, pi/2)")]
    InclinationOutOfRange(f64),

    #[error("state is at the origin (collision singularity)")]
    Singular,

    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),

    #[error("non-finite component in phase state")]
    NonFinite,

    #[error("time {t} is outside the trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("not an A-orbit: found {count} zeros of z, need at least three")]
    NotAnAOrbit { count: usize },

    #[error("time {0} is at or beyond the collision time")]
    BeyondCollision(f64),

    #[error("p_s = {p_s} exceeds the zero-energy bound; p_u would be imaginary")]
    ImaginaryMomentum { p_s: f64 },

    #[error("sampling region contains no admissible (p_s, p_theta) points")]
    EmptyRegion,

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("trajectory does not cover the domains required for verification: {0}")]
    InsufficientCoverage(String),

    #[error("trajectory stores no dense output; re-run with keep_dense enabled")]
    NoDenseOutput,
}

pub type Result<T> = std::result::Result<T, Error>;
