//! Self-similarity of zero-energy orbits.
//!
//! Three consecutive zeros `t0 < t1 < t2` of `z(t)` bound a fundamental
//! domain. The orbit on `[t2, …)` is the image of the orbit on `[t0, t2]`
//! under `ρ_φ ∘ δ_λ` after the affine time change `τ_1`, and so on for every
//! integer shift. In the adapted chart the symmetry is the translation
//! `(s, θ) ↦ (s + ln λ, θ + φ)`, so all comparisons are made there.

use serde::{Deserialize, Serialize};

use crate::dynamics::vector_field;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::phase::{AdaptedState, CartesianState};

/// `|λ − 1|` below which `λ` is treated as exactly 1.
pub const UNIT_LAMBDA_TOL: f64 = 1e-13;

/// Default band `|J| ≤ tol` for the quasi-periodic stratum.
pub const DEFAULT_TOL_J: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDomain {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub a0: AdaptedState,
    pub a2: AdaptedState,
    /// Number of zeros the domain was picked from.
    pub zeros_found: usize,
}

/// Picks zeros `offset, offset + 1, offset + 2` and samples the adapted
/// state at both ends.
pub fn fundamental_domain(traj: &Trajectory, zeros: &[f64], offset: usize) -> Result<FundamentalDomain> {
    if zeros.len() < offset + 3 {
        return Err(Error::NotAnAOrbit { count: zeros.len().saturating_sub(offset) });
    }
    let (t0, t1, t2) = (zeros[offset], zeros[offset + 1], zeros[offset + 2]);
    Ok(FundamentalDomain {
        t0,
        t1,
        t2,
        a0: traj.sample_adapted(t0)?,
        a2: traj.sample_adapted(t2)?,
        zeros_found: zeros.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityFactors {
    pub lambda: f64,
    pub phi: f64,
    pub t0: f64,
    pub t2: f64,
    pub t_col: Option<f64>,
}

pub fn similarity_factors(dom: &FundamentalDomain) -> SimilarityFactors {
    SimilarityFactors::from_log(dom.a2.s - dom.a0.s, dom.a2.theta - dom.a0.theta, dom.t0, dom.t2)
}

impl SimilarityFactors {
    /// Factors from `ln λ`; fills `t_col` unless `λ` is 1.
    pub fn from_log(log_lambda: f64, phi: f64, t0: f64, t2: f64) -> Self {
        let lambda = log_lambda.exp();
        let mut f = Self { lambda, phi, t0, t2, t_col: None };
        if !f.is_unit() {
            f.t_col = Some(t0 + (t2 - t0) / ratio_denominator(log_lambda));
        }
        f
    }

    pub fn new(lambda: f64, phi: f64, t0: f64, t2: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NonPositiveDilation(lambda));
        }
        Ok(Self::from_log(lambda.ln(), phi, t0, t2))
    }

    pub fn is_unit(&self) -> bool {
        (self.lambda - 1.0).abs() < UNIT_LAMBDA_TOL
    }

    pub fn period(&self) -> f64 {
        self.t2 - self.t0
    }

    fn log_lambda(&self) -> f64 {
        self.lambda.ln()
    }

    /// Continuous-shift time map used for replication. Agrees with
    /// [`tau_shift`] for `λ ≠ 1` and reduces to `t + ψ(t2 − t0)` at `λ = 1`.
    pub fn shift_time(&self, psi: f64, t: f64) -> f64 {
        if self.is_unit() {
            return t + psi * self.period();
        }
        tau_shift_log(psi, t, self.t0, self.t2, self.log_lambda())
    }

    /// Start of domain `k`; domain `k` is `[boundary(k), boundary(k + 1)]`.
    pub fn boundary(&self, k: i32) -> f64 {
        self.shift_time(k as f64, self.t0)
    }

    /// Index of the domain containing `t`.
    pub fn domain_index(&self, t: f64) -> Result<i32> {
        let x = if self.is_unit() {
            (t - self.t0) / self.period()
        } else {
            xi(t, self.t0, self.t2, self.lambda)?
        };
        Ok(x.floor() as i32)
    }
}

/// `1 − λ²` evaluated from `ln λ` without cancellation.
fn ratio_denominator(log_lambda: f64) -> f64 {
    -(2.0 * log_lambda).exp_m1()
}

/// `ξ(t) = ½ log_λ(1 − (t − t0)(1 − λ²)/(t2 − t0))`, the number of
/// fundamental domains between `t0` and `t`. By convention `ξ(t) = t` when
/// `λ = 1`.
pub fn xi(t: f64, t0: f64, t2: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveDilation(lambda));
    }
    if (lambda - 1.0).abs() < UNIT_LAMBDA_TOL {
        return Ok(t);
    }
    let log_lambda = lambda.ln();
    let x = -(t - t0) * ratio_denominator(log_lambda) / (t2 - t0);
    // Within a few ulps of −1 the time is the collision itself.
    if !(x > -1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::BeyondCollision(t));
    }
    Ok(0.5 * x.ln_1p() / log_lambda)
}

fn tau_shift_log(psi: f64, t: f64, t0: f64, t2: f64, log_lambda: f64) -> f64 {
    let l2psi = 2.0 * psi * log_lambda;
    // (1 − λ^{2ψ})/(1 − λ²)
    let frac = l2psi.exp_m1() / (2.0 * log_lambda).exp_m1();
    t0 + frac * (t2 - t0) + (t - t0) * l2psi.exp()
}

/// `τ_ψ(t) = t0 + (1 − λ^{2ψ})(t2 − t0)/(1 − λ²) + (t − t0) λ^{2ψ}`; the
/// identity when `λ = 1`.
pub fn tau_shift(psi: f64, t: f64, t0: f64, t2: f64, lambda: f64) -> f64 {
    if (lambda - 1.0).abs() < UNIT_LAMBDA_TOL {
        return t;
    }
    tau_shift_log(psi, t, t0, t2, lambda.ln())
}

/// `τ(t) = τ_{⌊ξ(t)⌋}(t)`.
pub fn tau(t: f64, t0: f64, t2: f64, lambda: f64) -> Result<f64> {
    if (lambda - 1.0).abs() < UNIT_LAMBDA_TOL {
        return Ok(t);
    }
    let k = xi(t, t0, t2, lambda)?.floor();
    Ok(tau_shift(k, t, t0, t2, lambda))
}

/// `τ(t) = t0 + (t2 − t0)(1 − λ^{2ξ + 2⌊ξ⌋})/(1 − λ²)`.
pub fn tau_closed_form(t: f64, t0: f64, t2: f64, lambda: f64) -> Result<f64> {
    if (lambda - 1.0).abs() < UNIT_LAMBDA_TOL {
        return Ok(t);
    }
    let x = xi(t, t0, t2, lambda)?;
    let e = 2.0 * (x + x.floor()) * lambda.ln();
    Ok(t0 + (t2 - t0) * (-e.exp_m1()) / ratio_denominator(lambda.ln()))
}

/// Adapted state of the `k`-th replica at time `t`: the source is sampled at
/// `τ_{−k}(t)` and translated by `k` steps of `(ln λ, φ)`.
pub fn replicate_adapted_k(traj: &Trajectory, factors: &SimilarityFactors, k: i32, t: f64) -> Result<AdaptedState> {
    let mut source = factors.shift_time(-(k as f64), t);
    // Pullbacks of domain endpoints can overshoot the stored range by rounding.
    let (lo, hi) = traj.time_range();
    let slack = 1e-9 * (hi - lo).abs().max(1.0);
    if source < lo && source > lo - slack {
        source = lo;
    } else if source > hi && source < hi + slack {
        source = hi;
    }
    let mut a = traj.sample_adapted(source)?;
    a.s += k as f64 * factors.log_lambda();
    a.theta += k as f64 * factors.phi;
    Ok(a)
}

pub fn replicate_adapted(traj: &Trajectory, factors: &SimilarityFactors, t: f64) -> Result<AdaptedState> {
    let k = factors.domain_index(t)?;
    replicate_adapted_k(traj, factors, k, t)
}

/// `ρ_{kφ} ∘ δ_{λ^k}` applied to the source orbit at `τ_{−k}(t)`, with
/// `k = ⌊ξ(t)⌋`.
pub fn replicate(traj: &Trajectory, factors: &SimilarityFactors, t: f64) -> Result<CartesianState> {
    replicate_adapted(traj, factors, t)?.to_cartesian()
}

/// The orbit rebuilt from one fundamental domain over domains `k_min..=k_max`.
#[derive(Debug, Clone)]
pub struct PiecewiseCurve<'a> {
    traj: &'a Trajectory,
    pub factors: SimilarityFactors,
    pub k_min: i32,
    pub k_max: i32,
    /// `boundaries[i]` starts domain `k_min + i`; the last entry closes `k_max`.
    pub boundaries: Vec<f64>,
}

impl PiecewiseCurve<'_> {
    pub fn time_range(&self) -> (f64, f64) {
        (self.boundaries[0], *self.boundaries.last().unwrap())
    }

    pub fn sample(&self, t: f64) -> Result<CartesianState> {
        let (lo, hi) = self.time_range();
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfRange { t, start: lo, end: hi });
        }
        let i = self.boundaries.partition_point(|&b| b <= t).clamp(1, self.boundaries.len() - 1);
        let k = self.k_min + i as i32 - 1;
        replicate_adapted_k(self.traj, &self.factors, k, t)?.to_cartesian()
    }
}

pub fn extend<'a>(
    traj: &'a Trajectory,
    factors: &SimilarityFactors,
    k_range: std::ops::RangeInclusive<i32>,
) -> Result<PiecewiseCurve<'a>> {
    let (k_min, k_max) = (*k_range.start(), *k_range.end());
    if k_min > k_max {
        return Err(Error::InvalidOption(format!("empty domain range {k_min}..={k_max}")));
    }
    let boundaries = (k_min..=k_max + 1).map(|k| factors.boundary(k)).collect();
    Ok(PiecewiseCurve { traj, factors: *factors, k_min, k_max, boundaries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    FutureCollision,
    PastCollision,
    QuasiPeriodic,
    PlanarLine,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::FutureCollision => "FutureCollision",
            Classification::PastCollision => "PastCollision",
            Classification::QuasiPeriodic => "QuasiPeriodic",
            Classification::PlanarLine => "PlanarLine",
        }
    }

    /// Whether `λ` lies on the side of 1 that this class predicts.
    pub fn agrees_with_lambda(self, lambda: f64, tol: f64) -> bool {
        match self {
            Classification::FutureCollision => lambda < 1.0,
            Classification::PastCollision => lambda > 1.0,
            Classification::QuasiPeriodic => (lambda - 1.0).abs() <= tol,
            Classification::PlanarLine => true,
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(j: f64, tol_j: f64) -> Classification {
    if j < -tol_j {
        Classification::FutureCollision
    } else if j > tol_j {
        Classification::PastCollision
    } else {
        Classification::QuasiPeriodic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Grid points per replicated domain.
    pub grid: usize,
    /// Largest `|k|` checked.
    pub max_domains: usize,
    pub tol_j: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { grid: 512, max_domains: 8, tol_j: DEFAULT_TOL_J }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    #[serde(flatten)]
    pub factors: SimilarityFactors,
    #[serde(rename = "J")]
    pub j: f64,
    pub classification: Classification,
    pub endpoint_residual: f64,
    pub domain_residual: f64,
    pub zeros_found: usize,
    /// Shifts `k ≠ 0` whose whole domain lay inside the trajectory.
    #[serde(default, skip_serializing)]
    pub domains_verified: Vec<i32>,
}

/// Translates `a` by `(ln λ, φ)` and returns the largest component
/// difference from `b`.
fn translated_residual(a: &AdaptedState, b: &AdaptedState, log_lambda: f64, phi: f64) -> f64 {
    let moved = AdaptedState { s: a.s + log_lambda, theta: a.theta + phi, ..*a };
    moved.max_abs_diff(b)
}

/// Domains `k ≠ 0`, `|k| ≤ max`, lying entirely inside the trajectory.
pub fn covered_domains(traj: &Trajectory, factors: &SimilarityFactors, max: usize) -> Vec<i32> {
    let (lo, hi) = traj.time_range();
    let max = max as i32;
    (-max..=max)
        .filter(|&k| k != 0)
        .filter(|&k| {
            let (a, b) = (factors.boundary(k), factors.boundary(k + 1));
            a.is_finite() && b.is_finite() && a >= lo && b <= hi && a < b
        })
        .collect()
}

/// Largest adapted-coordinate gap between the orbit and its replica over a
/// uniform grid on each covered domain.
pub fn verify(traj: &Trajectory, dom: &FundamentalDomain, opts: &VerifyOptions) -> Result<SimilarityReport> {
    if opts.grid < 2 {
        return Err(Error::InvalidOption("verification grid needs at least 2 points".into()));
    }
    let factors = similarity_factors(dom);
    let endpoint_residual = translated_residual(&dom.a0, &dom.a2, dom.a2.s - dom.a0.s, factors.phi);
    let domains = covered_domains(traj, &factors, opts.max_domains);
    if domains.is_empty() {
        return Err(Error::InsufficientCoverage(format!(
            "no replicated domain inside [{}, {}]",
            traj.time_range().0,
            traj.time_range().1
        )));
    }
    let mut domain_residual = 0.0f64;
    for &k in &domains {
        let (a, b) = (factors.boundary(k), factors.boundary(k + 1));
        for i in 0..opts.grid {
            let t = a + (b - a) * (i as f64 / (opts.grid - 1) as f64);
            let actual = traj.sample_adapted(t)?;
            let replica = replicate_adapted_k(traj, &factors, k, t)?;
            domain_residual = domain_residual.max(actual.max_abs_diff(&replica));
        }
    }
    let j = traj.initial_invariants.dilational;
    Ok(SimilarityReport {
        factors,
        j,
        classification: classify(j, opts.tol_j),
        endpoint_residual,
        domain_residual,
        zeros_found: dom.zeros_found,
        domains_verified: domains,
    })
}

/// Residual of the periodicity `c(t + kT) = ρ_{kφ} c(t)` with no dilation
/// and no time distortion, for `k = 1..=domains` (or `−1..=−domains` when
/// `domains` is negative). Meant for `J = 0` orbits.
pub fn quasi_periodicity_residual(
    traj: &Trajectory,
    dom: &FundamentalDomain,
    domains: i32,
    grid: usize,
) -> Result<f64> {
    if domains == 0 || grid < 2 {
        return Err(Error::InvalidOption("need at least one shifted domain and two grid points".into()));
    }
    let period = dom.t2 - dom.t0;
    let phi = dom.a2.theta - dom.a0.theta;
    let mut worst = 0.0f64;
    let step = domains.signum();
    let mut k = step;
    loop {
        for i in 0..grid {
            let t = dom.t0 + period * (i as f64 / (grid - 1) as f64);
            let base = traj.sample_adapted(t)?;
            let shifted = traj.sample_adapted(t + k as f64 * period)?;
            worst = worst.max(translated_residual(&base, &shifted, 0.0, k as f64 * phi));
        }
        if k == domains {
            break;
        }
        k += step;
    }
    Ok(worst)
}

/// Sign data at one zero of `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    /// Sign of `du/dt`.
    pub direction: f64,
    /// Sign of `p_u + ½p_θ`, i.e. which root of the `p_u` quadratic holds.
    pub gamma: f64,
}

pub fn crossings(traj: &Trajectory, zeros: &[f64]) -> Result<Vec<Crossing>> {
    zeros
        .iter()
        .map(|&t| {
            let c = traj.sample(t)?;
            let a = traj.sample_adapted(t)?;
            // u = atan2(4z, R), so at z = 0 the sign of du/dt is that of ż.
            let zdot = vector_field(&c)?.z;
            Ok(Crossing { t, direction: zdot.signum(), gamma: (a.p_u + 0.5 * a.p_theta).signum() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HALF_SQRT: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn factor_examples() {
        let f = SimilarityFactors::from_log(0.0, 0.3, 0.0, 1.0);
        assert_eq!(f.lambda, 1.0);
        assert!(f.t_col.is_none());

        let f = SimilarityFactors::from_log(-0.5 * 2f64.ln(), 0.0, 0.0, 1.0);
        assert!((f.lambda - HALF_SQRT).abs() < 1e-15);
        assert!((f.t_col.unwrap() - 2.0).abs() < 1e-14);

        assert!(SimilarityFactors::new(-1.0, 0.0, 0.0, 1.0).is_err());
        assert!(SimilarityFactors::new(1.0 + 1e-14, 0.0, 0.0, 1.0).unwrap().t_col.is_none());
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi(0.0, 0.0, 1.0, HALF_SQRT).unwrap(), 0.0);
        assert_eq!(xi(3.0, 3.0, 7.0, 1.7).unwrap(), 0.0);
        assert!((xi(1.0, 0.0, 1.0, HALF_SQRT).unwrap() - 1.0).abs() < 1e-14);
        assert!((xi(1.5, 0.0, 1.0, HALF_SQRT).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(xi(4.2, 0.0, 1.0, 1.0).unwrap(), 4.2);
        assert!(matches!(xi(2.0, 0.0, 1.0, HALF_SQRT), Err(Error::BeyondCollision(_))));
        assert!(matches!(xi(2.5, 0.0, 1.0, HALF_SQRT), Err(Error::BeyondCollision(_))));
    }

    #[test]
    fn tau_shift_examples() {
        for t in [-3.0, 0.0, 0.4, 1.9] {
            assert_eq!(tau_shift(0.0, t, 0.0, 1.0, HALF_SQRT), t);
            assert!((tau_shift(1.0, t, 0.0, 1.0, HALF_SQRT) - (1.0 + t / 2.0)).abs() < 1e-15);
            assert_eq!(tau_shift(2.5, t, 0.0, 1.0, 1.0), t);
        }
        assert!((tau_shift(1.0, 2.0, 0.0, 1.0, HALF_SQRT) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(0.3, 0.0, 1.0, HALF_SQRT).unwrap(), 0.3);
        assert!((tau(1.25, 0.0, 1.0, HALF_SQRT).unwrap() - 1.625).abs() < 1e-15);
        assert!((tau_closed_form(1.25, 0.0, 1.0, HALF_SQRT).unwrap() - 1.625).abs() < 1e-14);
        assert_eq!(tau(5.0, 0.0, 1.0, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn boundary_examples() {
        let f = SimilarityFactors::from_log(0.0, 0.0, 2.0, 5.0);
        let b: Vec<f64> = (-2..=3).map(|k| f.boundary(k)).collect();
        assert_eq!(b, vec![-4.0, -1.0, 2.0, 5.0, 8.0, 11.0]);

        let f = SimilarityFactors::from_log(-0.5 * 2f64.ln(), 0.0, 0.0, 1.0);
        for (k, want) in [(1, 1.0), (2, 1.5), (3, 1.75), (-1, -2.0)] {
            assert!((f.boundary(k) - want).abs() < 1e-14, "k={k}");
        }
        assert!((f.boundary(60) - 2.0).abs() < 1e-14);
        assert_eq!(f.domain_index(1.25).unwrap(), 1);
        assert_eq!(f.domain_index(-0.5).unwrap(), -1);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(-0.1, DEFAULT_TOL_J), Classification::FutureCollision);
        assert_eq!(classify(0.0, DEFAULT_TOL_J), Classification::QuasiPeriodic);
        assert_eq!(classify(0.1, DEFAULT_TOL_J), Classification::PastCollision);
        assert_eq!(classify(5e-10, DEFAULT_TOL_J), Classification::QuasiPeriodic);
        assert_eq!(serde_json::to_value(Classification::PlanarLine).unwrap(), "PlanarLine");
    }

    #[test]
    fn report_json_fields() {
        let report = SimilarityReport {
            factors: SimilarityFactors::from_log(-0.1, 0.2, 0.0, 1.0),
            j: -0.05,
            classification: Classification::FutureCollision,
            endpoint_residual: 0.0,
            domain_residual: 0.0,
            zeros_found: 5,
            domains_verified: vec![1, 2],
        };
        let v = serde_json::to_value(&report).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        let mut want = vec![
            "lambda", "phi", "t0", "t2", "t_col", "J", "classification", "endpoint_residual", "domain_residual",
            "zeros_found",
        ];
        want.sort_unstable();
        assert_eq!(keys, want);
    }

    fn params() -> impl Strategy<Value = (f64, f64, f64)> {
        (-5.0..5.0f64, 0.1..10.0f64, prop_oneof![0.3..0.999f64, 1.001..3.0f64])
    }

    proptest! {
        #[test]
        fn tau_group_law((t0, period, lambda) in params(), psi in -3.0..3.0f64, eta in -3.0..3.0f64, t in -5.0..5.0f64) {
            let t2 = t0 + period;
            let composed = tau_shift(psi, tau_shift(eta, t, t0, t2, lambda), t0, t2, lambda);
            let direct = tau_shift(psi + eta, t, t0, t2, lambda);
            prop_assert!(close(composed, direct, 1e-12));
            let back = tau_shift(-psi, tau_shift(psi, t, t0, t2, lambda), t0, t2, lambda);
            prop_assert!(close(back, t, 1e-12));
        }

        #[test]
        fn tau_fixed_point_is_collision_time((t0, period, lambda) in params(), psi in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64]) {
            let t2 = t0 + period;
            // Fixed point of t ↦ a + b t, solved directly.
            let a = tau_shift(psi, 0.0, t0, t2, lambda);
            let b = tau_shift(psi, 1.0, t0, t2, lambda) - a;
            let fixed = a / (1.0 - b);
            let t_col = SimilarityFactors::new(lambda, 0.0, t0, t2).unwrap().t_col.unwrap();
            prop_assert!(close(fixed, t_col, 1e-10), "{fixed} vs {t_col}");
            prop_assert!(close(tau_shift(psi, t_col, t0, t2, lambda), t_col, 1e-12));
        }

        #[test]
        fn xi_inverts((t0, period, lambda) in params(), frac in -0.9..0.9f64) {
            let t2 = t0 + period;
            let f = SimilarityFactors::new(lambda, 0.0, t0, t2).unwrap();
            let t_col = f.t_col.unwrap();
            // Stay on the admissible side of the collision.
            let t = if lambda < 1.0 { t0 + frac.abs() * (t_col - t0) * 0.999 - (1.0 - frac.abs()) * period }
                    else { t0 - frac.abs() * (t0 - t_col) * 0.999 + (1.0 - frac.abs()) * period };
            let x = xi(t, t0, t2, lambda).unwrap();
            let back = t0 + period * (1.0 - lambda.powf(2.0 * x)) / (1.0 - lambda * lambda);
            prop_assert!(close(back, t, 1e-12), "{back} vs {t}");
        }

        #[test]
        fn tau_forms_agree((t0, period, lambda) in params(), frac in 0.0..0.95f64) {
            let t2 = t0 + period;
            let f = SimilarityFactors::new(lambda, 0.0, t0, t2).unwrap();
            let t = if lambda < 1.0 { t0 + frac * (f.t_col.unwrap() - t0) } else { t0 + frac * 6.0 * period };
            let a = tau(t, t0, t2, lambda).unwrap();
            let b = tau_closed_form(t, t0, t2, lambda).unwrap();
            prop_assert!(close(a, b, 1e-12), "{a} vs {b}");
        }
    }
}
