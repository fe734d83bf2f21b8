//! Performance indicators and plot-ready exports from simulation logs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::wrap_angle;
use crate::log::{LogError, SimulationLog};
use crate::radar::TargetId;

/// m/s per knot
pub const KNOT: f64 = 1852.0 / 3600.0;

/// Minimum on-time for a trigger activation to count as sustained, s.
pub const SUSTAINED_ACTIVATION: f64 = 10.0;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("log has no records")]
    EmptyLog,
    #[error("log has a gap between t = {before} s and t = {after} s")]
    Gap { before: f64, after: f64 },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Log(#[from] LogError),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PIReport {
    pub scenario_name: String,
    pub scenario_hash: String,
    pub seed: u64,
    /// minimum passing distance per target, m
    pub mpd_per_target: BTreeMap<TargetId, f64>,
    /// m/s
    pub rmse_speed: f64,
    pub rmse_speed_knots: f64,
    /// deg
    pub rmse_heading: f64,
    /// false→true edges of the trigger over the whole run
    pub trigger_transitions: usize,
    /// edges before the first activation lasting at least the sustain window
    pub activations_before_sustained: usize,
    /// s, start of the first sustained activation
    pub sustained_onset: Option<f64>,
    pub grounded: bool,
    pub cdca_infeasible_ticks: usize,
}

impl PIReport {
    pub fn mpd(&self, id: TargetId) -> Option<f64> {
        self.mpd_per_target.get(&id).copied()
    }
}

pub fn compute_pis(log: &SimulationLog) -> Result<PIReport> {
    compute_pis_with(log, SUSTAINED_ACTIVATION)
}

pub fn compute_pis_with(log: &SimulationLog, sustain: f64) -> Result<PIReport> {
    let recs = &log.records;
    if recs.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    let dt = log.header.dt;
    for w in recs.windows(2) {
        if ((w[1].time - w[0].time) - dt).abs() > 1e-6 * dt.max(1.0) {
            return Err(MetricsError::Gap { before: w[0].time, after: w[1].time });
        }
    }
    let mut mpd: BTreeMap<TargetId, f64> = BTreeMap::new();
    let mut sq_v = 0.0;
    let mut sq_psi = 0.0;
    for r in recs {
        for t in &r.targets {
            let d = r.ego.position.distance(t.position);
            mpd.entry(t.id).and_modify(|m| *m = m.min(d)).or_insert(d);
        }
        sq_v += (r.desired_speed - r.ego.speed).powi(2);
        sq_psi += wrap_angle(r.desired_heading - r.ego.heading).to_degrees().powi(2);
    }
    let n = recs.len() as f64;
    let rmse_speed = (sq_v / n).sqrt();

    let trigger: Vec<bool> = recs.iter().map(|r| r.trigger).collect();
    let (trigger_transitions, activations_before_sustained, sustained_onset) = trigger_stats(&trigger, dt, sustain, recs[0].time);

    Ok(PIReport {
        scenario_name: log.header.scenario_name.clone(),
        scenario_hash: log.header.scenario_hash.clone(),
        seed: log.header.seed,
        mpd_per_target: mpd,
        rmse_speed,
        rmse_speed_knots: rmse_speed / KNOT,
        rmse_heading: (sq_psi / n).sqrt(),
        trigger_transitions,
        activations_before_sustained,
        sustained_onset,
        grounded: recs.iter().any(|r| r.grounded),
        cdca_infeasible_ticks: recs.iter().filter(|r| r.cdca_infeasible).count(),
    })
}

/// (rising edges, edges before the first sustained run, onset time of that run).
/// A run that is still on at the end of the signal counts as sustained once
/// it reaches the window.
pub fn trigger_stats(signal: &[bool], dt: f64, sustain: f64, t0: f64) -> (usize, usize, Option<f64>) {
    let mut edges = 0;
    let mut before = None;
    let mut onset = None;
    let mut prev = false;
    let mut run_start = 0usize;
    for (i, &on) in signal.iter().enumerate() {
        if on && !prev {
            edges += 1;
            run_start = i;
        }
        if on && onset.is_none() && (i - run_start + 1) as f64 * dt >= sustain - 1e-9 {
            onset = Some(t0 + run_start as f64 * dt);
            before = Some(edges - 1);
        }
        prev = on;
    }
    (edges, before.unwrap_or(edges), onset)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| MetricsError::Io { path: path.into(), source })
}

/// File-name-safe label.
fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Writes the log, the report and the plot-ready CSVs into `out_dir`.
/// Returns the written paths in a fixed order.
pub fn export(log: &SimulationLog, report: &PIReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|source| MetricsError::Io { path: out_dir.into(), source })?;
    let mut written = Vec::new();

    let log_path = out_dir.join("log.csv");
    log.write(&log_path)?;
    written.push(log_path.clone());
    written.push(crate::log::header_path(&log_path));

    let report_path = out_dir.join("report.json");
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    write_file(&report_path, &json)?;
    written.push(report_path);

    let mut ego = String::from("time,x,y\n");
    for r in &log.records {
        let _ = writeln!(ego, "{},{},{}", r.time, r.ego.position.x, r.ego.position.y);
    }
    let p = out_dir.join("trajectory_ego.csv");
    write_file(&p, &ego)?;
    written.push(p);

    for meta in &log.header.targets {
        let mut s = String::from("time,x,y\n");
        for r in &log.records {
            if let Some(t) = r.targets.iter().find(|t| t.id == meta.id) {
                let _ = writeln!(s, "{},{},{}", r.time, t.position.x, t.position.y);
            }
        }
        let p = out_dir.join(format!("trajectory_{}.csv", slug(&meta.name)));
        write_file(&p, &s)?;
        written.push(p);
    }

    let mut ts = String::from("time,heading_deg,desired_heading_deg,heading_error_deg,speed,desired_speed,rudder_deg,propeller\n");
    for r in &log.records {
        let _ = writeln!(
            ts,
            "{},{},{},{},{},{},{},{}",
            r.time,
            r.ego.heading.to_degrees(),
            r.desired_heading.to_degrees(),
            wrap_angle(r.desired_heading - r.ego.heading).to_degrees(),
            r.ego.speed,
            r.desired_speed,
            r.ego.rudder_angle.to_degrees(),
            r.ego.propeller_setting
        );
    }
    let p = out_dir.join("timeseries.csv");
    write_file(&p, &ts)?;
    written.push(p);

    let mut trig = String::from("time,trigger\n");
    for r in &log.records {
        let _ = writeln!(trig, "{},{}", r.time, u8::from(r.trigger));
    }
    let p = out_dir.join("trigger.csv");
    write_file(&p, &trig)?;
    written.push(p);

    for meta in &log.header.targets {
        let mut s = String::from("time,position_error,velocity_error,sigma_range,sigma_velocity\n");
        let mut sigma: Option<(f64, f64)> = None;
        for r in &log.records {
            let Some(t) = r.targets.iter().find(|t| t.id == meta.id) else { continue };
            if let Some(d) = t.detection {
                sigma = Some((d.sigma_range, d.sigma_velocity));
            }
            let (Some(e), Some((sr, sv))) = (t.estimate, sigma) else { continue };
            let truth_v = crate::geom::Vec2::from_polar(t.speed, t.heading);
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.time,
                e.position.distance(t.position),
                (e.velocity - truth_v).norm(),
                sr,
                sv
            );
        }
        let p = out_dir.join(format!("estimate_error_{}.csv", slug(&meta.name)));
        write_file(&p, &s)?;
        written.push(p);
    }
    Ok(written)
}
