use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use kh_core::phase::CartesianState;
use kh_core::seeding::{sample_seeds, seed_zero_energy, SeedSpec};
use kh_core::similarity::SimilarityFactors;
use kh_core::survey::{analyze_orbit, run_survey, OrbitReport, SurveyConfig};
use serde::Serialize;

mod args;
mod output;
mod svg;

use args::{AnalysisArgs, DirectionArg, OutArgs, RegionArgs, SeedArgs, StateArgs};

#[derive(Parser)]
#[command(name = "kh", version, about = "Zero-energy Kepler-Heisenberg orbits: integrate, verify self-similarity, survey")]
struct Cli {
    #[command(flatten)]
    out: OutArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one orbit, analyse it and write a JSON report plus an optional CSV series.
    Integrate {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
        /// Base name of the output files.
        #[arg(long, default_value = "orbit")]
        name: String,
        /// Also write `<name>.csv`.
        #[arg(long)]
        csv: bool,
        /// Evenly spaced CSV rows instead of one row per step (0 keeps steps).
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Print zero-energy seeds with their Cartesian states.
    Seed {
        #[command(flatten)]
        region: RegionArgs,
        /// Sample this many seeds; without it the single seed given by --p-s, --p-theta, --branch is used.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 2024)]
        rng_seed: u64,
        #[command(flatten)]
        seed: SeedArgs,
        /// Write `<name>.json` instead of printing.
        #[arg(long)]
        name: Option<String>,
    },
    /// Sample seeds, analyse every orbit in parallel and aggregate.
    Survey {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 2024)]
        rng_seed: u64,
        /// Worker threads; 0 uses every CPU.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        region: RegionArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, value_enum, default_value_t = DirectionArg::Expanding)]
        direction: DirectionArg,
        #[arg(long, default_value = "survey")]
        name: String,
    },
    /// Check the self-similarity of one orbit over its replicated domains.
    Verify {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, value_enum, default_value_t = DirectionArg::Expanding)]
        direction: DirectionArg,
        /// Exit with status 1 when the domain residual exceeds this.
        #[arg(long)]
        max_residual: Option<f64>,
        #[arg(long, default_value = "verify")]
        name: String,
    },
    /// Render a CSV series as a two-panel SVG.
    Plot {
        /// Series written by `integrate --csv`.
        series: PathBuf,
        /// Orbit report; supplies zeros and the domain overlay.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 960.0)]
        width: f64,
        #[arg(long, default_value_t = 420.0)]
        height: f64,
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Serialize)]
struct OrbitRecord<'a> {
    initial: CartesianState,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<SeedSpec>,
    #[serde(flatten)]
    report: &'a OrbitReport,
}

#[derive(Serialize)]
struct SeedRecord {
    seed: SeedSpec,
    state: CartesianState,
    #[serde(rename = "J")]
    j: f64,
    p_theta: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let dir = cli.out.out_dir;
    match cli.command {
        Command::Integrate { state, analysis, direction, name, csv, samples } => {
            let opts = analysis.options(direction.into())?;
            let (c0, seed) = state.resolve()?;
            let an = analyze_orbit(&c0, &opts)?;
            let path = output::out_path(&dir, &format!("{name}.json"))?;
            output::write_json(&path, &OrbitRecord { initial: c0, seed, report: &an.report })?;
            println!("{}", path.display());
            if csv {
                let traj = an.trajectory.as_ref().context("analysis kept no trajectory")?;
                let path = output::out_path(&dir, &format!("{name}.csv"))?;
                output::write_series(&path, traj, samples)?;
                println!("{}", path.display());
            }
            summary(&an.report);
        }
        Command::Seed { region, n, rng_seed, seed, name } => {
            let specs = match n {
                Some(n) => sample_seeds(n, rng_seed, &region.region()?)?,
                None => vec![seed.spec()],
            };
            let records = specs
                .into_iter()
                .map(|seed| {
                    let c = seed_zero_energy(&seed)?;
                    Ok(SeedRecord { seed, state: c, j: c.dilational_momentum(), p_theta: c.angular_momentum() })
                })
                .collect::<Result<Vec<_>>>()?;
            match name {
                Some(name) => {
                    let path = output::out_path(&dir, &format!("{name}.json"))?;
                    output::write_json(&path, &records)?;
                    println!("{}", path.display());
                }
                None => println!("{}", serde_json::to_string_pretty(&records)?),
            }
        }
        Command::Survey { n, rng_seed, threads, region, analysis, direction, name } => {
            let config =
                SurveyConfig { n, rng_seed, region: region.region()?, analysis: analysis.options(direction.into())?, threads };
            let report = run_survey(&config)?;
            let json = output::out_path(&dir, &format!("{name}.json"))?;
            output::write_json(&json, &report)?;
            let csv = output::out_path(&dir, &format!("{name}.csv"))?;
            output::write_survey_csv(&csv, &report.rows)?;
            println!("{}\n{}", json.display(), csv.display());
            let f = &report.families;
            println!(
                "{} orbits, {} failures; future collision {}, past collision {}, quasi-periodic {}; sign violations {}; ≥ 3 zeros: {}/{}",
                report.rows.len(),
                report.failures,
                f.future_collision,
                f.past_collision,
                f.quasi_periodic,
                report.table_violations,
                report.conjecture.with_three_zeros,
                report.conjecture.orbits
            );
        }
        Command::Verify { state, analysis, direction, max_residual, name } => {
            let opts = analysis.options(direction.into())?;
            let (c0, seed) = state.resolve()?;
            let an = analyze_orbit(&c0, &opts)?;
            let path = output::out_path(&dir, &format!("{name}.json"))?;
            output::write_json(&path, &OrbitRecord { initial: c0, seed, report: &an.report })?;
            println!("{}", path.display());
            summary(&an.report);
            let Some(sim) = &an.report.similarity else {
                bail!("not verified: {}", an.report.failure.as_deref().unwrap_or("no similarity report"));
            };
            if max_residual.is_some_and(|m| !(sim.domain_residual <= m)) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Plot { series, report, width, height, name } => {
            let points = output::read_series(&series)?;
            if points.is_empty() {
                bail!("{} has no data rows", series.display());
            }
            let mut plot = svg::Plot { zeros: svg::sampled_zeros(&points), points, ..Default::default() };
            if let Some(path) = report {
                overlay(&mut plot, &path)?;
            }
            let stem = name.unwrap_or_else(|| series.file_stem().map_or("plot".into(), |s| s.to_string_lossy().into()));
            let path = output::out_path(&dir, &format!("{stem}.svg"))?;
            std::fs::write(&path, svg::render(&plot, width, height))?;
            println!("{}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn summary(r: &OrbitReport) {
    let class = r.classification.map_or("-", |c| c.as_str());
    match &r.similarity {
        Some(s) => println!(
            "{class}: J = {:.6}, λ = {:.9}, φ = {:.6}, zeros {}, endpoint residual {:.2e}, domain residual {:.2e} over {:?}",
            r.j, s.factors.lambda, s.factors.phi, s.zeros_found, s.endpoint_residual, s.domain_residual, r.domains_verified
        ),
        None => println!("{class}: J = {:.6}, zeros {}, {}", r.j, r.zeros.len(), r.failure.as_deref().unwrap_or("not analysed")),
    }
    if let Some(c) = &r.collision {
        println!("collision predicted at {:.9}, observed {:?}", c.predicted, c.observed);
    }
}

fn overlay(plot: &mut svg::Plot, path: &std::path::Path) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(zeros) = v.get("zeros").and_then(|z| z.as_array()) {
        plot.zeros = zeros.iter().filter_map(|z| z.as_f64()).collect();
    }
    let sim = v.get("similarity").filter(|s| !s.is_null());
    if let Some(sim) = sim {
        let num = |k: &str| sim.get(k).and_then(|x| x.as_f64()).with_context(|| format!("similarity.{k} missing"));
        let f = SimilarityFactors::new(num("lambda")?, num("phi")?, num("t0")?, num("t2")?)?;
        plot.domain = Some((f.t0, f.t2));
        plot.image = Some((f.t2, f.boundary(2)));
    }
    Ok(())
}
