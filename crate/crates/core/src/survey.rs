//! Per-orbit analysis pipeline and the parallel seed survey built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorOptions, Termination, Trajectory};
use crate::phase::CartesianState;
use crate::seeding::{sample_seeds, seed_zero_energy, SeedRegion, SeedSpec};
use crate::similarity::{
    classify, fundamental_domain, similarity_factors, verify, Classification, SimilarityReport, VerifyOptions,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Which way in time the analysis run goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
    /// The direction in which fundamental domains grow: forward when
    /// `J ≥ 0`, backward when `J < 0`.
    #[default]
    Expanding,
    /// The direction in which fundamental domains shrink towards a
    /// collision: forward when `J ≤ 0`, backward when `J > 0`.
    Contracting,
}

impl Direction {
    pub fn sign_for(self, j: f64) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
            Direction::Expanding if j < 0.0 => -1.0,
            Direction::Expanding => 1.0,
            Direction::Contracting if j > 0.0 => -1.0,
            Direction::Contracting => 1.0,
        }
    }
}

/// Integrator tolerance of the analysis runs. Domains far from the seed
/// last up to ~1e9 time units, and `J̇ = 2H` turns every bit of energy error
/// into dilational drift over that time.
pub const ANALYSIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub integrator: IntegratorOptions,
    pub verify: VerifyOptions,
    pub direction: Direction,
    /// Time budget of the analysis run. Domains of strongly dilating orbits
    /// grow by `λ²` each, so this is far larger than the integrator default.
    pub span: f64,
    /// The analysis run stops after this many zeros of `z`.
    pub zeros_wanted: usize,
    /// Integrate `FutureCollision` orbits forward into the collision and
    /// compare the observed time with the prediction.
    pub check_collision: bool,
    /// Time budget of the collision run.
    pub collision_span: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            integrator: IntegratorOptions { rel_tol: ANALYSIS_TOL, abs_tol: ANALYSIS_TOL, ..Default::default() },
            verify: VerifyOptions::default(),
            direction: Direction::Expanding,
            span: 1e12,
            zeros_wanted: 8,
            check_collision: true,
            collision_span: 1e12,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if self.zeros_wanted < 3 {
            return Err(Error::InvalidOption("zeros_wanted must be at least 3".into()));
        }
        if !(self.span > 0.0 && self.collision_span > 0.0) {
            return Err(Error::InvalidOption("time budgets must be positive".into()));
        }
        if self.verify.grid < 2 {
            return Err(Error::InvalidOption("verification grid needs at least 2 points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitStatus {
    Ok,
    Planar,
    InsufficientZeros,
    Failed,
}

/// Predicted and observed collision time of a `FutureCollision` orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionCheck {
    pub predicted: f64,
    pub observed: Option<f64>,
    pub relative_error: Option<f64>,
    /// `t2` of the forward domain used for the prediction.
    pub t2: f64,
    pub forward_zeros: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub schema_version: u32,
    pub status: OrbitStatus,
    pub classification: Option<Classification>,
    #[serde(rename = "J")]
    pub j: f64,
    pub p_theta: f64,
    pub energy: f64,
    pub direction: f64,
    pub zeros: Vec<f64>,
    pub planar: bool,
    pub axis_proximity: bool,
    pub termination: Termination,
    pub similarity: Option<SimilarityReport>,
    pub domains_verified: Vec<i32>,
    pub collision: Option<CollisionCheck>,
    /// Zeros seen going forward from the seed (before collision or budget).
    pub forward_zeros: usize,
    pub max_energy_drift: f64,
    pub max_dilational_drift: f64,
    pub max_angular_drift: f64,
    pub failure: Option<String>,
}

/// Analysis output together with the trajectory it was computed from.
pub struct Analysis {
    pub report: OrbitReport,
    pub trajectory: Option<Trajectory>,
}

fn analysis_integrator(opts: &AnalysisOptions) -> IntegratorOptions {
    IntegratorOptions {
        stop_after_zeros: Some(opts.zeros_wanted),
        keep_dense: true,
        max_span: opts.integrator.max_span.max(opts.span),
        ..opts.integrator.clone()
    }
}

/// Integrates forward into the collision and predicts its time from the first
/// forward fundamental domain.
pub fn collision_check(c0: &CartesianState, opts: &AnalysisOptions) -> Result<CollisionCheck> {
    let run_opts = IntegratorOptions { stop_after_zeros: None, keep_dense: true, ..opts.integrator.clone() };
    let run_opts = IntegratorOptions { max_span: run_opts.max_span.max(opts.collision_span), ..run_opts };
    let traj = integrate(c0, (0.0, opts.collision_span), &run_opts)?;
    let zeros = traj.z_zeros();
    let dom = fundamental_domain(&traj, zeros, 0)?;
    let factors = similarity_factors(&dom);
    let predicted = factors.t_col.ok_or_else(|| Error::InvalidOption("orbit has λ = 1".into()))?;
    let observed = traj.termination.collision_time();
    Ok(CollisionCheck {
        predicted,
        observed,
        relative_error: observed.map(|t| (t - predicted).abs() / predicted.abs()),
        t2: dom.t2,
        forward_zeros: zeros.len(),
        termination: traj.termination,
    })
}

/// Integrates in direction `dir` and verifies the fundamental domain nearest
/// the seed.
fn directed_run(
    c0: &CartesianState,
    opts: &AnalysisOptions,
    invariants: &crate::dynamics::ConservedTriple,
    dir: f64,
) -> Result<(OrbitReport, Trajectory)> {
    let traj = integrate(c0, (0.0, dir * opts.span), &analysis_integrator(opts))?;
    let zeros = traj.z_zeros().to_vec();
    let mut report = OrbitReport {
        schema_version: SCHEMA_VERSION,
        status: OrbitStatus::Ok,
        classification: None,
        j: invariants.dilational,
        p_theta: invariants.p_theta,
        energy: invariants.energy,
        direction: dir,
        zeros: zeros.clone(),
        planar: traj.events.planar,
        axis_proximity: traj.events.axis_proximity,
        termination: traj.termination,
        similarity: None,
        domains_verified: Vec::new(),
        collision: None,
        forward_zeros: if dir > 0.0 { zeros.len() } else { 0 },
        max_energy_drift: traj.stats.max_energy_drift,
        max_dilational_drift: traj.stats.max_dilational_drift,
        max_angular_drift: traj.stats.max_angular_drift,
        failure: None,
    };

    if traj.events.planar {
        report.status = OrbitStatus::Planar;
        report.classification = Some(Classification::PlanarLine);
        return Ok((report, traj));
    }
    if zeros.len() < 3 {
        report.status = OrbitStatus::InsufficientZeros;
        report.failure = Some(Error::NotAnAOrbit { count: zeros.len() }.to_string());
        return Ok((report, traj));
    }

    report.classification = Some(classify(invariants.dilational, opts.verify.tol_j));
    // The base domain is the one nearest the seed, so backward runs take the last three zeros.
    let offset = if dir < 0.0 { zeros.len() - 3 } else { 0 };
    match fundamental_domain(&traj, &zeros, offset).and_then(|dom| verify(&traj, &dom, &opts.verify)) {
        Ok(sim) => {
            report.domains_verified = sim.domains_verified.clone();
            report.similarity = Some(sim);
        }
        Err(e) => {
            report.status = OrbitStatus::Failed;
            report.failure = Some(e.to_string());
        }
    }
    Ok((report, traj))
}

pub fn analyze_orbit(c0: &CartesianState, opts: &AnalysisOptions) -> Result<Analysis> {
    opts.validate()?;
    let invariants = crate::dynamics::conserved_triple(c0)?;
    let j = invariants.dilational;
    let dir = opts.direction.sign_for(j);
    let (mut report, traj) = directed_run(c0, opts, &invariants, dir)?;

    if opts.check_collision && report.classification == Some(Classification::FutureCollision) {
        match collision_check(c0, opts) {
            Ok(check) => {
                report.forward_zeros = check.forward_zeros;
                report.collision = Some(check);
            }
            Err(e) => {
                report.status = OrbitStatus::Failed;
                report.failure.get_or_insert(format!("collision check: {e}"));
            }
        }
    } else if dir < 0.0 {
        let fwd = IntegratorOptions { stop_after_zeros: Some(3), keep_dense: false, ..analysis_integrator(opts) };
        if let Ok(t) = integrate(c0, (0.0, opts.span), &fwd) {
            report.forward_zeros = t.z_zeros().len();
        }
    }
    Ok(Analysis { report, trajectory: Some(traj) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurveyConfig {
    pub n: usize,
    pub rng_seed: u64,
    pub region: SeedRegion,
    pub analysis: AnalysisOptions,
    /// Worker threads; 0 picks the number of CPUs. Not serialized, so
    /// reports do not depend on it.
    #[serde(skip_serializing)]
    pub threads: usize,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        Self { n: 500, rng_seed: 2024, region: SeedRegion::default(), analysis: AnalysisOptions::default(), threads: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    pub index: u64,
    pub seed: SeedSpec,
    #[serde(rename = "J")]
    pub j: f64,
    pub lambda: Option<f64>,
    pub phi: Option<f64>,
    pub classification: Option<Classification>,
    pub status: OrbitStatus,
    pub zeros_found: usize,
    pub forward_zeros: usize,
    pub endpoint_residual: Option<f64>,
    pub domain_residual: Option<f64>,
    pub domains_verified: usize,
    pub t_col_predicted: Option<f64>,
    pub t_col_observed: Option<f64>,
    pub failure: Option<String>,
}

impl SurveyRow {
    fn from_report(index: u64, seed: SeedSpec, r: &OrbitReport) -> Self {
        let sim = r.similarity.as_ref();
        Self {
            index,
            seed,
            j: r.j,
            lambda: sim.map(|s| s.factors.lambda),
            phi: sim.map(|s| s.factors.phi),
            classification: r.classification,
            status: r.status,
            zeros_found: r.zeros.len(),
            forward_zeros: r.forward_zeros,
            endpoint_residual: sim.map(|s| s.endpoint_residual),
            domain_residual: sim.map(|s| s.domain_residual),
            domains_verified: r.domains_verified.len(),
            t_col_predicted: r.collision.map(|c| c.predicted),
            t_col_observed: r.collision.and_then(|c| c.observed),
            failure: r.failure.clone(),
        }
    }

    fn failed(index: u64, seed: SeedSpec, e: &Error) -> Self {
        Self {
            index,
            seed,
            j: seed.p_s,
            lambda: None,
            phi: None,
            classification: None,
            status: OrbitStatus::Failed,
            zeros_found: 0,
            forward_zeros: 0,
            endpoint_residual: None,
            domain_residual: None,
            domains_verified: 0,
            t_col_predicted: None,
            t_col_observed: None,
            failure: Some(e.to_string()),
        }
    }

    pub fn succeeded(&self) -> bool {
        self.status == OrbitStatus::Ok
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCounts {
    pub future_collision: usize,
    pub past_collision: usize,
    pub quasi_periodic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureTally {
    pub orbits: usize,
    pub with_three_zeros: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub schema_version: u32,
    pub config: SurveyConfig,
    pub rows: Vec<SurveyRow>,
    pub failures: usize,
    pub families: FamilyCounts,
    /// Rows with `|J| > 1e−6` whose `λ` is on the wrong side of 1.
    pub table_violations: usize,
    pub conjecture: ConjectureTally,
}

pub fn analyze_seed(seed: &SeedSpec, opts: &AnalysisOptions) -> Result<OrbitReport> {
    let c0 = seed_zero_energy(seed)?;
    Ok(analyze_orbit(&c0, opts)?.report)
}

pub fn run_survey(config: &SurveyConfig) -> Result<SurveyReport> {
    use rayon::prelude::*;

    if config.n == 0 {
        return Err(Error::InvalidOption("survey needs n ≥ 1".into()));
    }
    config.analysis.validate()?;
    let seeds = sample_seeds(config.n, config.rng_seed, &config.region)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::InvalidOption(format!("thread pool: {e}")))?;
    // `collect` on an indexed parallel iterator keeps the input order.
    let rows: Vec<SurveyRow> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, seed)| match analyze_seed(seed, &config.analysis) {
                Ok(r) => SurveyRow::from_report(i as u64, *seed, &r),
                Err(e) => SurveyRow::failed(i as u64, *seed, &e),
            })
            .collect()
    });
    Ok(summarize(config.clone(), rows))
}

pub fn summarize(config: SurveyConfig, rows: Vec<SurveyRow>) -> SurveyReport {
    let mut families = FamilyCounts::default();
    let mut table_violations = 0;
    for row in rows.iter().filter(|r| r.succeeded()) {
        match row.classification {
            Some(Classification::FutureCollision) => families.future_collision += 1,
            Some(Classification::PastCollision) => families.past_collision += 1,
            Some(Classification::QuasiPeriodic) => families.quasi_periodic += 1,
            _ => {}
        }
        if let (Some(lambda), true) = (row.lambda, row.j.abs() > 1e-6) {
            if (row.j > 0.0) != (lambda > 1.0) {
                table_violations += 1;
            }
        }
    }
    let with_three_zeros = rows.iter().filter(|r| r.forward_zeros >= 3).count();
    let orbits = rows.len();
    SurveyReport {
        schema_version: SCHEMA_VERSION,
        config,
        failures: rows.iter().filter(|r| !r.succeeded()).count(),
        families,
        table_violations,
        conjecture: ConjectureTally {
            orbits,
            with_three_zeros,
            fraction: if orbits == 0 { 0.0 } else { with_three_zeros as f64 / orbits as f64 },
        },
        rows,
    }
}
