use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use kh_core::integrator::IntegratorOptions;
use kh_core::seeding::{seed_zero_energy, SeedRegion, SeedSpec};
use kh_core::similarity::VerifyOptions;
use kh_core::survey::{AnalysisOptions, Direction, ANALYSIS_TOL};
use kh_core::{Branch, CartesianState, J_BOUND};

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Directory for every file the command writes.
    #[arg(long, env = "KH_OUT_DIR", default_value = ".", global = true)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
    Expanding,
    Contracting,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
            DirectionArg::Expanding => Direction::Expanding,
            DirectionArg::Contracting => Direction::Contracting,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Seed value of p_s (equal to J on the zero-energy seed).
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    pub p_s: f64,
    /// Seed value of p_θ.
    #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
    pub p_theta: f64,
    /// Root of the p_u quadratic.
    #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
    pub branch: BranchArg,
}

impl SeedArgs {
    pub fn spec(&self) -> SeedSpec {
        SeedSpec::new(self.p_s, self.p_theta, self.branch.into())
    }
}

/// Initial condition: a zero-energy seed, or an explicit Cartesian state.
#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Explicit state `x,y,z,p_x,p_y,p_z`; overrides the seed flags.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub state: Option<Vec<f64>>,
}

impl StateArgs {
    pub fn resolve(&self) -> Result<(CartesianState, Option<SeedSpec>)> {
        if let Some(v) = &self.state {
            if v.len() != 6 || v.iter().any(|x| !x.is_finite()) {
                bail!("--state needs six finite numbers");
            }
            return Ok((CartesianState::from_array([v[0], v[1], v[2], v[3], v[4], v[5]]), None));
        }
        let spec = self.seed.spec();
        Ok((seed_zero_energy(&spec)?, Some(spec)))
    }
}

#[derive(Debug, Clone, Args)]
pub struct IntegratorArgs {
    #[arg(long, default_value_t = ANALYSIS_TOL)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = ANALYSIS_TOL)]
    pub abs_tol: f64,
    /// Use a plain absolute tolerance instead of one scaled by the Heisenberg radius.
    #[arg(long)]
    pub unscaled_abs_tol: bool,
    /// Stop when the Heisenberg radius drops below this.
    #[arg(long, default_value_t = 1e-6)]
    pub collision_radius: f64,
    /// Flag orbits whose planar radius drops below this.
    #[arg(long, default_value_t = 1e-8)]
    pub axis_radius: f64,
    /// Time tolerance of z-zero refinement.
    #[arg(long, default_value_t = 1e-12)]
    pub zero_refine_tol: f64,
    #[arg(long, default_value_t = 20_000_000)]
    pub max_steps: usize,
    /// Abort when |H(t) − H(0)| / max(1, K) exceeds this.
    #[arg(long, default_value_t = 1e-6)]
    pub energy_drift_bound: f64,
}

impl IntegratorArgs {
    pub fn options(&self) -> IntegratorOptions {
        IntegratorOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            scaled_abs_tol: !self.unscaled_abs_tol,
            collision_radius: self.collision_radius,
            axis_radius: self.axis_radius,
            zero_refine_tol: self.zero_refine_tol,
            max_steps: self.max_steps,
            energy_drift_bound: self.energy_drift_bound,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// Verification grid points per replicated domain.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Largest |k| of a replicated domain that is checked.
    #[arg(long, default_value_t = 8)]
    pub max_domains: usize,
    /// |J| at or below this counts as J = 0.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_j: f64,
    /// Time budget of the analysis run.
    #[arg(long, default_value_t = 1e12)]
    pub span: f64,
    /// Stop the analysis run after this many zeros of z.
    #[arg(long, default_value_t = 8)]
    pub zeros: usize,
    /// Skip the forward run into the collision for J < 0 orbits.
    #[arg(long)]
    pub no_collision_check: bool,
}

impl AnalysisArgs {
    pub fn options(&self, direction: Direction) -> Result<AnalysisOptions> {
        let opts = AnalysisOptions {
            integrator: self.integrator.options(),
            verify: VerifyOptions { grid: self.grid, max_domains: self.max_domains, tol_j: self.tol_j },
            direction,
            span: self.span,
            zeros_wanted: self.zeros,
            check_collision: !self.no_collision_check,
            collision_span: self.span,
        };
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    #[arg(long, default_value_t = -J_BOUND, allow_hyphen_values = true)]
    pub p_s_min: f64,
    #[arg(long, default_value_t = J_BOUND, allow_hyphen_values = true)]
    pub p_s_max: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub p_theta_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub p_theta_max: f64,
    /// Samples closer than this to the J bound are rejected.
    #[arg(long, default_value_t = 1e-6)]
    pub boundary_margin: f64,
}

impl RegionArgs {
    pub fn region(&self) -> Result<SeedRegion> {
        let r = SeedRegion {
            p_s_min: self.p_s_min,
            p_s_max: self.p_s_max,
            p_theta_min: self.p_theta_min,
            p_theta_max: self.p_theta_max,
            boundary_margin: self.boundary_margin,
        };
        r.validate()?;
        Ok(r)
    }
}
