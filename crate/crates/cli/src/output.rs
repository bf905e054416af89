use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kh_core::dynamics::hamiltonian_cartesian;
use kh_core::integrator::Trajectory;
use kh_core::phase::{to_adapted, CartesianState};
use kh_core::survey::SurveyRow;
use serde::Serialize;

pub fn out_path(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// One time-series row. Adapted coordinates are empty on the z-axis.
#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    p_x: f64,
    p_y: f64,
    p_z: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "J")]
    j: f64,
    p_theta: f64,
    s: Option<f64>,
    theta: Option<f64>,
    u: Option<f64>,
}

fn series_row(t: f64, c: &CartesianState, theta_hint: Option<f64>) -> SeriesRow {
    let adapted = to_adapted(c, theta_hint).ok();
    SeriesRow {
        t,
        x: c.x,
        y: c.y,
        z: c.z,
        p_x: c.px,
        p_y: c.py,
        p_z: c.pz,
        h: hamiltonian_cartesian(c).unwrap_or(f64::NAN),
        j: c.dilational_momentum(),
        p_theta: c.angular_momentum(),
        s: adapted.map(|a| a.s),
        theta: adapted.map(|a| a.theta),
        u: adapted.map(|a| a.u),
    }
}

/// Writes the trajectory at its accepted steps, or at `samples` evenly spaced
/// times when `samples > 1`.
pub fn write_series(path: &Path, traj: &Trajectory, samples: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut theta = None;
    let mut emit = |w: &mut csv::Writer<File>, t: f64, c: &CartesianState| -> Result<()> {
        let row = series_row(t, c, theta);
        theta = row.theta.or(theta);
        w.serialize(row)?;
        Ok(())
    };
    if samples > 1 && traj.has_dense_output() {
        let (a, b) = (traj.t_start, traj.t_end);
        for i in 0..samples {
            let t = a + (b - a) * (i as f64 / (samples - 1) as f64);
            emit(&mut w, t, &traj.sample(t)?)?;
        }
    } else {
        emit(&mut w, traj.t_start, &traj.initial)?;
        for seg in &traj.segments {
            emit(&mut w, seg.t_end, &seg.end)?;
        }
        if traj.segments.is_empty() && traj.t_end != traj.t_start {
            emit(&mut w, traj.t_end, &traj.final_state)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SurveyCsvRow<'a> {
    index: u64,
    p_s: f64,
    p_theta: f64,
    branch: i8,
    #[serde(rename = "J")]
    j: f64,
    lambda: Option<f64>,
    phi: Option<f64>,
    classification: &'a str,
    status: &'a str,
    zeros_found: usize,
    forward_zeros: usize,
    endpoint_residual: Option<f64>,
    domain_residual: Option<f64>,
    domains_verified: usize,
    t_col_predicted: Option<f64>,
    t_col_observed: Option<f64>,
    failure: &'a str,
}

fn status_str(row: &SurveyRow) -> &'static str {
    use kh_core::survey::OrbitStatus::*;
    match row.status {
        Ok => "ok",
        Planar => "planar",
        InsufficientZeros => "insufficient-zeros",
        Failed => "failed",
    }
}

pub fn write_survey_csv(path: &Path, rows: &[SurveyRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(SurveyCsvRow {
            index: r.index,
            p_s: r.seed.p_s,
            p_theta: r.seed.p_theta,
            branch: r.seed.branch.into(),
            j: r.j,
            lambda: r.lambda,
            phi: r.phi,
            classification: r.classification.map(|c| c.as_str()).unwrap_or(""),
            status: status_str(r),
            zeros_found: r.zeros_found,
            forward_zeros: r.forward_zeros,
            endpoint_residual: r.endpoint_residual,
            domain_residual: r.domain_residual,
            domains_verified: r.domains_verified,
            t_col_predicted: r.t_col_predicted,
            t_col_observed: r.t_col_observed,
            failure: r.failure.as_deref().unwrap_or(""),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// `(t, x, y, z)` columns of a time-series file.
pub fn read_series(path: &Path) -> Result<Vec<[f64; 4]>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).with_context(|| format!("{} has no `{name}` column", path.display()))
    };
    let idx = [col("t")?, col("x")?, col("y")?, col("z")?];
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut v = [0.0; 4];
        for (slot, &i) in v.iter_mut().zip(&idx) {
            *slot = rec
                .get(i)
                .unwrap_or("")
                .parse()
                .with_context(|| format!("{}: bad number on data row {}", path.display(), line + 1))?;
        }
        out.push(v);
    }
    Ok(out)
}
