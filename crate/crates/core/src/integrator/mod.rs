//! Adaptive integration of Hamilton's equations in Cartesian coordinates.
//!
//! Steps are taken with an embedded 8(5,3) Runge–Kutta pair. Every accepted
//! step carries a 7th-order interpolant, which is used to locate zeros of
//! `z(t)` and the collision time without extra integration.

mod dop853;

use serde::{Deserialize, Serialize};

use crate::dynamics::{conserved_triple, kinetic, rhs, ConservedTriple};
use crate::error::{Error, Result};
use crate::phase::{heis_radius, to_adapted, unwrap_angle, AdaptedState, CartesianState};

pub use dop853::DenseCoeffs;
use dop853::{dense_output, eval_dense, initial_step, trial_step, Vec6};

/// Threshold on `|z|` and `|ż|` below which a state is treated as lying in a
/// planar (z ≡ 0) line orbit.
pub const PLANAR_THRESHOLD: f64 = 1e-13;

/// Interior points per step at which the sign of `z` is probed.
const SIGN_PROBES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Measure `abs_tol` in units of the current Heisenberg radius `ρ`,
    /// weighted like the dilation: `ρ` for `x, y`, `ρ²` for `z`, `1/ρ` for
    /// `p_x, p_y`, `1/ρ²` for `p_z`. Error control then commutes with
    /// dilations, so shrinking and growing orbits are resolved alike.
    pub scaled_abs_tol: bool,
    /// Upper bound on the integrated time span.
    pub max_span: f64,
    /// Stop when the Heisenberg radius falls below this value.
    pub collision_radius: f64,
    /// Flag (but keep integrating) when the planar radius falls below this.
    pub axis_radius: f64,
    /// Time tolerance for the bisection that refines z-zeros.
    pub zero_refine_tol: f64,
    pub max_steps: usize,
    /// Stop at the end of the step in which this many z-zeros have been seen.
    pub stop_after_zeros: Option<usize>,
    /// Keep per-step interpolants. Without them the trajectory only records
    /// events and endpoints.
    pub keep_dense: bool,
    /// Bound on `|H(t) − H(0)| / max(1, K(t))` at accepted steps.
    pub energy_drift_bound: f64,
    pub initial_step: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            scaled_abs_tol: true,
            max_span: 1e6,
            collision_radius: 1e-6,
            axis_radius: 1e-8,
            zero_refine_tol: 1e-12,
            max_steps: 20_000_000,
            stop_after_zeros: None,
            keep_dense: true,
            energy_drift_bound: 1e-6,
            initial_step: None,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_span", self.max_span),
            ("collision_radius", self.collision_radius),
            ("axis_radius", self.axis_radius),
            ("zero_refine_tol", self.zero_refine_tol),
            ("energy_drift_bound", self.energy_drift_bound),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::InvalidOption(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidOption("max_steps must be positive".into()));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidOption(format!("initial_step must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    SpanEnd,
    ZeroLimit,
    Collision { time: f64 },
    /// Step size collapsed; a collision is suspected just after `time`.
    StepUnderflow { time: f64 },
    MaxSteps { time: f64 },
    EnergyDrift { time: f64, drift: f64 },
}

impl Termination {
    /// Time at which a collision was observed or is suspected.
    pub fn collision_time(&self) -> Option<f64> {
        match *self {
            Termination::Collision { time } | Termination::StepUnderflow { time } => Some(time),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub min_step: f64,
    pub max_energy_drift: f64,
    pub max_dilational_drift: f64,
    pub max_angular_drift: f64,
    pub min_planar_radius: f64,
    pub min_heis_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Events {
    /// Zeros of `z`, ascending in time.
    pub z_zeros: Vec<f64>,
    pub collision: Option<f64>,
    /// `z ≡ 0`: the orbit is a line through the origin in the plane.
    pub planar: bool,
    /// The planar radius dropped below the configured axis radius.
    pub axis_proximity: bool,
}

/// One accepted step with its interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub start: CartesianState,
    pub end: CartesianState,
    /// Lifted planar angle at both ends.
    pub theta_start: f64,
    pub theta_end: f64,
    coeffs: DenseCoeffs,
}

impl Segment {
    fn fraction(&self, t: f64) -> f64 {
        (t - self.t_start) / (self.t_end - self.t_start)
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = ordered(self.t_start, self.t_end);
        (lo..=hi).contains(&t)
    }

    pub fn eval(&self, t: f64) -> CartesianState {
        if t == self.t_start {
            self.start
        } else if t == self.t_end {
            self.end
        } else {
            CartesianState::from_array(eval_dense(&self.coeffs, self.fraction(t)))
        }
    }

    fn eval_z(&self, t: f64) -> f64 {
        self.eval(t).z
    }

    /// Reference angle for lifting `θ` at interior time `t`.
    fn theta_hint(&self, t: f64) -> f64 {
        self.theta_start + (self.theta_end - self.theta_start) * self.fraction(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: CartesianState,
    pub final_state: CartesianState,
    pub t_start: f64,
    pub t_end: f64,
    pub segments: Vec<Segment>,
    pub events: Events,
    pub initial_invariants: ConservedTriple,
    pub stats: IntegrationStats,
    pub termination: Termination,
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Trajectory {
    /// `+1` for forward integration, `-1` for backward.
    pub fn direction(&self) -> f64 {
        if self.t_end >= self.t_start {
            1.0
        } else {
            -1.0
        }
    }

    /// Time range as `(min, max)`.
    pub fn time_range(&self) -> (f64, f64) {
        ordered(self.t_start, self.t_end)
    }

    pub fn has_dense_output(&self) -> bool {
        !self.segments.is_empty()
    }

    pub fn z_zeros(&self) -> &[f64] {
        &self.events.z_zeros
    }

    fn segment_at(&self, t: f64) -> Result<&Segment> {
        if self.segments.is_empty() {
            return Err(Error::NoDenseOutput);
        }
        let (lo, hi) = self.time_range();
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfRange { t, start: lo, end: hi });
        }
        let dir = self.direction();
        // Segments are stored in integration order; their starts are monotone in `dir`.
        let idx = self.segments.partition_point(|s| dir * (s.t_end - t) < 0.0);
        let idx = idx.min(self.segments.len() - 1);
        Ok(&self.segments[idx])
    }

    /// Dense-output state at time `t`.
    pub fn sample(&self, t: f64) -> Result<CartesianState> {
        Ok(self.segment_at(t)?.eval(t))
    }

    /// Adapted state at `t`, with `θ` on the trajectory's continuous lift.
    pub fn sample_adapted(&self, t: f64) -> Result<AdaptedState> {
        let seg = self.segment_at(t)?;
        to_adapted(&seg.eval(t), Some(seg.theta_hint(t)))
    }
}

/// Tracks the sign of `z` across probe points and brackets zeros.
struct ZeroScanner {
    refine_tol: f64,
    prev: Option<(f64, f64)>,
    zeros: Vec<f64>,
}

impl ZeroScanner {
    fn new(refine_tol: f64) -> Self {
        Self { refine_tol, prev: None, zeros: Vec::new() }
    }

    /// Registers the initial point; an exact zero there counts as a zero.
    fn start(&mut self, t: f64, z: f64) {
        if z == 0.0 {
            self.zeros.push(t);
        }
        self.prev = Some((t, z));
    }

    /// Scans `seg` up to `limit` (a time inside the segment).
    fn scan(&mut self, seg: &Segment, limit: Option<f64>) {
        for k in 1..=SIGN_PROBES {
            let mut t = if k == SIGN_PROBES {
                seg.t_end
            } else {
                seg.t_start + (seg.t_end - seg.t_start) * (k as f64 / SIGN_PROBES as f64)
            };
            let mut last = false;
            if let Some(l) = limit {
                if (l - t) * (seg.t_end - seg.t_start) <= 0.0 {
                    t = l;
                    last = true;
                }
            }
            let z = seg.eval_z(t);
            if let Some((tp, zp)) = self.prev {
                if zp != 0.0 {
                    if z == 0.0 {
                        self.zeros.push(t);
                    } else if zp.signum() != z.signum() {
                        self.zeros.push(bisect(|s| seg.eval_z(s), tp, t, self.refine_tol));
                    }
                }
            }
            self.prev = Some((t, z));
            if last {
                break;
            }
        }
    }
}

/// Bisection for a sign change of `g` between `a` and `b`.
fn bisect<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Per-component absolute tolerance at state `y`.
fn abs_tolerance(y: &Vec6, opts: &IntegratorOptions) -> Vec6 {
    if !opts.scaled_abs_tol {
        return [opts.abs_tol; 6];
    }
    let rho = heis_radius(y[0], y[1], y[2]);
    let a = opts.abs_tol;
    [a * rho, a * rho, a * rho * rho, a / rho, a / rho, a / (rho * rho)]
}

fn is_planar_state(y: &Vec6) -> bool {
    let zdot = rhs(y)[2];
    y[2].abs() < PLANAR_THRESHOLD && zdot.abs() < PLANAR_THRESHOLD
}

/// Integrates from `c0` at `t_span.0` towards `t_span.1` (either direction).
pub fn integrate(c0: &CartesianState, t_span: (f64, f64), opts: &IntegratorOptions) -> Result<Trajectory> {
    opts.validate()?;
    if !c0.is_finite() || !t_span.0.is_finite() || !t_span.1.is_finite() {
        return Err(Error::NonFinite);
    }
    let r0 = c0.heis_radius();
    if r0 == 0.0 || r0 < opts.collision_radius {
        return Err(Error::Singular);
    }
    let (t_start, requested_end) = t_span;
    if requested_end == t_start {
        return Err(Error::InvalidOption("empty time span".into()));
    }
    let dir = (requested_end - t_start).signum();
    let t_final = t_start + dir * (requested_end - t_start).abs().min(opts.max_span);

    let f = |y: &Vec6| rhs(y);
    let invariants = conserved_triple(c0)?;
    let mut y = c0.to_array();
    let mut k1 = f(&y);
    let mut t = t_start;
    let mut theta = c0.y.atan2(c0.x);
    let h_max = (t_final - t_start).abs();
    let mut h = match opts.initial_step {
        Some(h0) => dir * h0.min(h_max),
        None => initial_step(&f, &y, &k1, dir, h_max, opts.rel_tol, &abs_tolerance(&y, opts)),
    };

    let mut stats = IntegrationStats {
        steps: 0,
        rejected: 0,
        evaluations: 2,
        min_step: f64::INFINITY,
        max_energy_drift: 0.0,
        max_dilational_drift: 0.0,
        max_angular_drift: 0.0,
        min_planar_radius: c0.planar_radius_sq().sqrt(),
        min_heis_radius: r0,
    };
    let mut events = Events { z_zeros: Vec::new(), collision: None, planar: false, axis_proximity: false };
    events.axis_proximity = stats.min_planar_radius < opts.axis_radius;
    let planar_at_start = is_planar_state(&y);
    let mut planar_checked = false;
    let mut scanner = ZeroScanner::new(opts.zero_refine_tol);
    let mut segments = Vec::new();
    let mut last_end = *c0;

    // Step-size controller constants (Hairer's defaults for DOP853).
    const SAFE: f64 = 0.9;
    const FAC_MIN: f64 = 0.333;
    const FAC_MAX: f64 = 6.0;
    let mut last_rejected = false;

    let termination = loop {
        if dir * (t_final - t) <= 0.0 {
            break Termination::SpanEnd;
        }
        if stats.steps >= opts.max_steps {
            break Termination::MaxSteps { time: t };
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1e-300) || h.abs() < 1e-300 {
            break Termination::StepUnderflow { time: t };
        }
        if dir * (t + h - t_final) > 0.0 {
            h = t_final - t;
        }

        let trial = trial_step(&f, &y, &k1, h, opts.rel_tol, &abs_tolerance(&y, opts));
        stats.evaluations += 11;
        let finite = trial.err.is_finite() && trial.y_new.iter().all(|v| v.is_finite());
        if !finite {
            stats.rejected += 1;
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        let err = trial.err;
        let fac11 = err.powf(1.0 / 8.0);
        let fac = (fac11 / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        if err > 1.0 {
            stats.rejected += 1;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            last_rejected = true;
            continue;
        }

        let t_new = if dir * (t + h - t_final) >= 0.0 { t_final } else { t + h };
        let y_new = trial.y_new;
        let f_new = f(&y_new);
        stats.evaluations += 1;
        if !f_new.iter().all(|v| v.is_finite()) {
            stats.rejected += 1;
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        let end = CartesianState::from_array(y_new);
        let drift = conserved_triple(&end).map(|c| {
            (
                (c.energy - invariants.energy).abs(),
                (c.dilational - invariants.dilational).abs(),
                (c.p_theta - invariants.p_theta).abs(),
            )
        });
        let (h_drift, j_drift, pt_drift) = match drift {
            Ok(d) => d,
            Err(_) => {
                stats.rejected += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };
        let relative_drift = h_drift / kinetic(&end).max(1.0);
        if relative_drift > opts.energy_drift_bound {
            break Termination::EnergyDrift { time: t, drift: relative_drift };
        }

        let coeffs = dense_output(&f, &y, h, &trial, &f_new);
        stats.evaluations += 3;
        let theta_new = unwrap_angle(end.y.atan2(end.x), theta);
        let seg = Segment {
            t_start: t,
            t_end: t_new,
            start: CartesianState::from_array(y),
            end,
            theta_start: theta,
            theta_end: theta_new,
            coeffs,
        };

        stats.steps += 1;
        stats.min_step = stats.min_step.min(h.abs());
        stats.max_energy_drift = stats.max_energy_drift.max(h_drift);
        stats.max_dilational_drift = stats.max_dilational_drift.max(j_drift);
        stats.max_angular_drift = stats.max_angular_drift.max(pt_drift);
        let planar_r = end.planar_radius_sq().sqrt();
        stats.min_planar_radius = stats.min_planar_radius.min(planar_r);
        if planar_r < opts.axis_radius {
            events.axis_proximity = true;
        }

        if !planar_checked {
            planar_checked = true;
            events.planar = planar_at_start && is_planar_state(&y_new);
            if !events.planar {
                scanner.start(t_start, c0.z);
            }
        }

        let radius = end.heis_radius();
        stats.min_heis_radius = stats.min_heis_radius.min(radius);
        let collision = if radius < opts.collision_radius {
            let g = |s: f64| {
                let c = seg.eval(s);
                heis_radius(c.x, c.y, c.z) - opts.collision_radius
            };
            Some(bisect(g, seg.t_start, seg.t_end, opts.zero_refine_tol))
        } else {
            None
        };

        if !events.planar {
            scanner.scan(&seg, collision);
        }

        last_end = end;
        if opts.keep_dense {
            segments.push(seg);
        }
        y = y_new;
        k1 = f_new;
        t = t_new;
        theta = theta_new;

        if let Some(tc) = collision {
            events.collision = Some(tc);
            break Termination::Collision { time: tc };
        }
        if let Some(n) = opts.stop_after_zeros {
            if scanner.zeros.len() >= n {
                break Termination::ZeroLimit;
            }
        }

        let mut h_new = h / fac;
        if last_rejected {
            h_new = dir * h_new.abs().min(h.abs());
            last_rejected = false;
        }
        h = dir * h_new.abs().min(h_max);
    };

    let t_end = match termination {
        Termination::Collision { time } => time,
        _ => t,
    };
    let mut zeros = scanner.zeros;
    if dir < 0.0 {
        zeros.reverse();
    }
    events.z_zeros = zeros;

    Ok(Trajectory {
        initial: *c0,
        final_state: last_end,
        t_start,
        t_end,
        segments,
        events,
        initial_invariants: invariants,
        stats,
        termination,
    })
}

/// Zeros of `z` located on the stored dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroScan {
    pub zeros: Vec<f64>,
    pub planar: bool,
}

/// Recomputes the zeros of `z(t)` from the trajectory's interpolants, refined
/// by bisection to `refine_tol`. Trajectories without dense output return the
/// events recorded during integration.
pub fn find_z_zeros(traj: &Trajectory, refine_tol: f64) -> ZeroScan {
    if traj.events.planar {
        return ZeroScan { zeros: Vec::new(), planar: true };
    }
    if traj.segments.is_empty() {
        return ZeroScan { zeros: traj.events.z_zeros.clone(), planar: false };
    }
    let mut scanner = ZeroScanner::new(refine_tol);
    scanner.start(traj.t_start, traj.initial.z);
    let last = traj.segments.len() - 1;
    for (i, seg) in traj.segments.iter().enumerate() {
        let limit = if i == last && traj.events.collision.is_some() { traj.events.collision } else { None };
        scanner.scan(seg, limit);
    }
    let mut zeros = scanner.zeros;
    if traj.direction() < 0.0 {
        zeros.reverse();
    }
    ZeroScan { zeros, planar: false }
}

/// Dense-output evaluation; see [`Trajectory::sample`].
pub fn sample(traj: &Trajectory, t: f64) -> Result<CartesianState> {
    traj.sample(t)
}
