//! Phase-space points on T*H in two charts.
//!
//! [`CartesianState`] is the global chart `(x, y, z, p_x, p_y, p_z)` used for
//! integration. [`AdaptedState`] is the chart `(s, θ, u, p_s, p_θ, p_u)` in
//! which Carnot dilation and rotation about the z-axis act by translating `s`
//! and `θ`. The adapted chart excludes the z-axis.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

/// Adapted coordinates. `theta` is a continuous lift, never reduced mod 2π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptedState {
    pub s: f64,
    pub theta: f64,
    pub u: f64,
    pub p_s: f64,
    pub p_theta: f64,
    pub p_u: f64,
}

impl CartesianState {
    pub const fn new(x: f64, y: f64, z: f64, px: f64, py: f64, pz: f64) -> Self {
        Self { x, y, z, px, py, pz }
    }

    pub const fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub const fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.z, self.px, self.py, self.pz]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// `x² + y²`, the squared planar radius.
    pub fn planar_radius_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn heis_radius(&self) -> f64 {
        heis_radius(self.x, self.y, self.z)
    }

    /// Momentum dual to the horizontal field `X = ∂x − ½y∂z`.
    pub fn p_big_x(&self) -> f64 {
        self.px - 0.5 * self.y * self.pz
    }

    /// Momentum dual to the horizontal field `Y = ∂y + ½x∂z`.
    pub fn p_big_y(&self) -> f64 {
        self.py + 0.5 * self.x * self.pz
    }

    /// Dilational momentum `x p_x + y p_y + 2 z p_z`.
    pub fn dilational_momentum(&self) -> f64 {
        self.x * self.px + self.y * self.py + 2.0 * self.z * self.pz
    }

    pub fn angular_momentum(&self) -> f64 {
        self.x * self.py - self.y * self.px
    }

    /// Converts to the adapted chart. When `prev_theta` is given, the planar
    /// angle is the branch of `arg(x, y)` closest to it.
    pub fn to_adapted(&self, prev_theta: Option<f64>) -> Result<AdaptedState> {
        to_adapted(self, prev_theta)
    }
}

impl AdaptedState {
    pub const fn new(s: f64, theta: f64, u: f64, p_s: f64, p_theta: f64, p_u: f64) -> Self {
        Self { s, theta, u, p_s, p_theta, p_u }
    }

    pub const fn to_array(self) -> [f64; 6] {
        [self.s, self.theta, self.u, self.p_s, self.p_theta, self.p_u]
    }

    pub const fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn to_cartesian(&self) -> Result<CartesianState> {
        to_cartesian(self)
    }

    /// Largest absolute component difference, comparing `theta` on the lift.
    pub fn max_abs_diff(&self, other: &AdaptedState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `((x² + y²)² + 16 z²)^{1/4}`; zero only at the origin.
pub fn heis_radius(x: f64, y: f64, z: f64) -> f64 {
    let r2 = x * x + y * y;
    r2.hypot(4.0 * z).sqrt()
}

/// Lifts `angle` (any branch) to the branch nearest `reference`.
pub fn unwrap_angle(angle: f64, reference: f64) -> f64 {
    angle + TAU * ((reference - angle) / TAU).round()
}

/// Wraps an angle difference into `(-π, π]`.
pub fn wrap_angle(delta: f64) -> f64 {
    let w = delta.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

pub fn to_adapted(c: &CartesianState, prev_theta: Option<f64>) -> Result<AdaptedState> {
    if !c.is_finite() {
        return Err(Error::NonFinite);
    }
    let r2 = c.planar_radius_sq();
    if r2 <= 0.0 {
        return Err(Error::OnZAxis { planar_radius: r2.sqrt() });
    }
    let w = 4.0 * c.z;
    let s = 0.5 * r2.hypot(w).ln();
    let raw_theta = c.y.atan2(c.x);
    let theta = match prev_theta {
        Some(reference) => unwrap_angle(raw_theta, reference),
        None => raw_theta,
    };
    let u = w.atan2(r2);
    let radial = c.x * c.px + c.y * c.py;
    Ok(AdaptedState {
        s,
        theta,
        u,
        p_s: radial + 2.0 * c.z * c.pz,
        p_theta: c.angular_momentum(),
        p_u: 0.25 * c.pz * r2 - 2.0 * c.z * radial / r2,
    })
}

pub fn to_cartesian(a: &AdaptedState) -> Result<CartesianState> {
    if !a.to_array().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if a.u.abs() >= FRAC_PI_2 {
        return Err(Error::InclinationOutOfRange(a.u));
    }
    let rho2 = (2.0 * a.s).exp();
    let (sin_u, cos_u) = a.u.sin_cos();
    let r2 = rho2 * cos_u;
    let z = 0.25 * rho2 * sin_u;
    let r = r2.sqrt();
    let (sin_t, cos_t) = a.theta.sin_cos();
    let x = r * cos_t;
    let y = r * sin_t;
    // Invert p_s = A + 2 z p_z and p_u = r² p_z / 4 − 2 z A / r², with A = x p_x + y p_y.
    let pz = (4.0 * cos_u * a.p_u + 2.0 * sin_u * a.p_s) / rho2;
    let radial = a.p_s - 2.0 * z * pz;
    let px = (x * radial - y * a.p_theta) / r2;
    let py = (y * radial + x * a.p_theta) / r2;
    Ok(CartesianState { x, y, z, px, py, pz })
}

/// The two commuting symmetry actions lifted to phase space.
pub trait PhaseSymmetry: Sized {
    /// Carnot dilation `δ_λ`.
    fn dilate(&self, lambda: f64) -> Result<Self>;
    /// Rotation `ρ_φ` about the z-axis.
    fn rotate(&self, phi: f64) -> Self;
}

impl PhaseSymmetry for CartesianState {
    fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NonPositiveDilation(lambda));
        }
        let inv = lambda.recip();
        Ok(Self {
            x: lambda * self.x,
            y: lambda * self.y,
            z: lambda * lambda * self.z,
            px: inv * self.px,
            py: inv * self.py,
            pz: inv * inv * self.pz,
        })
    }

    fn rotate(&self, phi: f64) -> Self {
        let (sin, cos) = phi.sin_cos();
        Self {
            x: cos * self.x - sin * self.y,
            y: sin * self.x + cos * self.y,
            z: self.z,
            px: cos * self.px - sin * self.py,
            py: sin * self.px + cos * self.py,
            pz: self.pz,
        }
    }
}

impl PhaseSymmetry for AdaptedState {
    fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NonPositiveDilation(lambda));
        }
        Ok(Self { s: self.s + lambda.ln(), ..*self })
    }

    fn rotate(&self, phi: f64) -> Self {
        Self { theta: self.theta + phi, ..*self }
    }
}

impl AdaptedState {
    /// Dilation by `exp(log_lambda)`, for callers that already hold the log.
    pub fn dilate_log(&self, log_lambda: f64) -> Self {
        Self { s: self.s + log_lambda, ..*self }
    }
}
