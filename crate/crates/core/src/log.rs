//! Per-tick simulation records, stored as CSV with a JSON header sidecar.
//!
//! Angles are radians, positions metres in the local frame, speeds m/s.
//! Booleans are written as 0/1 and absent values as empty cells. Columns for
//! each target carry a `t<id>_` prefix.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autonomy::PlanKind;
use crate::dynamics::{Commands, VesselState, WaveDisturbance};
use crate::geom::Vec2;
use crate::radar::TargetId;

pub const LOG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: line {line}: {reason}")]
    Malformed { path: PathBuf, line: u64, reason: String },
    #[error("log is empty")]
    Empty,
}

pub type Result<T> = std::result::Result<T, LogError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMeta {
    pub id: TargetId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format_version: u32,
    pub scenario_name: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub build_version: String,
    pub dt: f64,
    pub duration: f64,
    pub tick_count: usize,
    pub targets: Vec<TargetMeta>,
    /// combined VO radius used by the run, m
    pub safety_radius: f64,
    /// the scenario as run, defaults filled in
    pub scenario: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub position: Vec2,
    pub velocity: Vec2,
    pub snr: f64,
    pub sigma_range: f64,
    pub sigma_velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub position: Vec2,
    pub velocity: Vec2,
    pub age: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskRecord {
    pub dcpa: f64,
    pub tcpa: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub id: TargetId,
    pub position: Vec2,
    pub heading: f64,
    pub speed: f64,
    pub detection: Option<DetectionRecord>,
    pub estimate: Option<EstimateRecord>,
    pub risk: Option<RiskRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub time: f64,
    pub ego: VesselState,
    pub desired_heading: f64,
    pub desired_speed: f64,
    pub commands: Commands,
    pub depth: f64,
    pub wave: WaveDisturbance,
    pub scan: bool,
    pub trigger: bool,
    pub plan_id: u32,
    pub plan_kind: PlanKind,
    pub cdca_infeasible: bool,
    pub grounded: bool,
    pub targets: Vec<TargetRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationLog {
    pub header: LogHeader,
    pub records: Vec<TickRecord>,
}

const BASE_COLUMNS: [&str; 22] = [
    "time",
    "x",
    "y",
    "heading",
    "speed",
    "yaw_rate",
    "rudder",
    "propeller",
    "desired_heading",
    "desired_speed",
    "cmd_rudder",
    "cmd_propeller",
    "depth",
    "wave_surge",
    "wave_sway",
    "wave_yaw",
    "scan",
    "trigger",
    "plan_id",
    "plan_kind",
    "cdca_infeasible",
    "grounded",
];

const TARGET_COLUMNS: [&str; 20] = [
    "x",
    "y",
    "heading",
    "speed",
    "det",
    "det_x",
    "det_y",
    "det_vx",
    "det_vy",
    "det_snr",
    "det_sigma_range",
    "det_sigma_velocity",
    "est_x",
    "est_y",
    "est_vx",
    "est_vy",
    "est_age",
    "dcpa",
    "tcpa",
    "flagged",
];

/// Header sidecar that goes with a log CSV.
pub fn header_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn b(v: bool) -> &'static str {
    if v {
        "1"
    } else {
        "0"
    }
}

fn kind_str(k: PlanKind) -> &'static str {
    match k {
        PlanKind::Global => "global",
        PlanKind::Cdca => "cdca",
    }
}

impl SimulationLog {
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
        for t in &self.header.targets {
            cols.extend(TARGET_COLUMNS.iter().map(|c| format!("t{}_{c}", t.id)));
        }
        cols
    }

    pub fn csv_string(&self) -> String {
        let mut out = self.columns().join(",");
        out.push('\n');
        let mut row: Vec<String> = Vec::new();
        for r in &self.records {
            row.clear();
            let f = |v: f64| v.to_string();
            row.extend([
                f(r.time),
                f(r.ego.position.x),
                f(r.ego.position.y),
                f(r.ego.heading),
                f(r.ego.speed),
                f(r.ego.yaw_rate),
                f(r.ego.rudder_angle),
                f(r.ego.propeller_setting),
                f(r.desired_heading),
                f(r.desired_speed),
                f(r.commands.rudder),
                f(r.commands.propeller),
                f(r.depth),
                f(r.wave.surge_accel),
                f(r.wave.sway_drift),
                f(r.wave.yaw_accel),
            ]);
            row.extend([b(r.scan), b(r.trigger)].map(String::from));
            row.push(r.plan_id.to_string());
            row.extend([kind_str(r.plan_kind), b(r.cdca_infeasible), b(r.grounded)].map(String::from));
            for meta in &self.header.targets {
                let t = r.targets.iter().find(|t| t.id == meta.id);
                let opt = |v: Option<f64>| v.map(f).unwrap_or_default();
                row.push(opt(t.map(|t| t.position.x)));
                row.push(opt(t.map(|t| t.position.y)));
                row.push(opt(t.map(|t| t.heading)));
                row.push(opt(t.map(|t| t.speed)));
                let d = t.and_then(|t| t.detection);
                row.push(b(d.is_some()).to_owned());
                row.push(opt(d.map(|d| d.position.x)));
                row.push(opt(d.map(|d| d.position.y)));
                row.push(opt(d.map(|d| d.velocity.x)));
                row.push(opt(d.map(|d| d.velocity.y)));
                row.push(opt(d.map(|d| d.snr)));
                row.push(opt(d.map(|d| d.sigma_range)));
                row.push(opt(d.map(|d| d.sigma_velocity)));
                let e = t.and_then(|t| t.estimate);
                row.push(opt(e.map(|e| e.position.x)));
                row.push(opt(e.map(|e| e.position.y)));
                row.push(opt(e.map(|e| e.velocity.x)));
                row.push(opt(e.map(|e| e.velocity.y)));
                row.push(opt(e.map(|e| e.age)));
                let k = t.and_then(|t| t.risk);
                row.push(opt(k.map(|k| k.dcpa)));
                row.push(opt(k.map(|k| k.tcpa)));
                row.push(k.map(|k| b(k.flagged).to_owned()).unwrap_or_default());
            }
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn header_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.header).expect("header serializes");
        s.push('\n');
        s
    }

    /// Writes `path` (CSV) and its `.json` header sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.csv_string()).map_err(|source| LogError::Io { path: path.into(), source })?;
        let hp = header_path(path);
        fs::write(&hp, self.header_json()).map_err(|source| LogError::Io { path: hp, source })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let hp = header_path(path);
        let text = fs::read_to_string(&hp).map_err(|source| LogError::Io { path: hp.clone(), source })?;
        let header: LogHeader = serde_json::from_str(&text).map_err(|source| LogError::Json { path: hp, source })?;
        let body = fs::read_to_string(path).map_err(|source| LogError::Io { path: path.into(), source })?;
        Self::parse_csv(header, &body, path)
    }

    pub fn parse_csv(header: LogHeader, body: &str, path: &Path) -> Result<Self> {
        let csv_err = |source| LogError::Csv { path: path.into(), source };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let names: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        let shell = SimulationLog { header, records: Vec::new() };
        if names != shell.columns() {
            return Err(LogError::Malformed { path: path.into(), line: 1, reason: "columns do not match the header".into() });
        }
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(csv_err)?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let bad = |reason: String| LogError::Malformed { path: path.into(), line, reason };
            let mut cells = row.iter();
            let mut next = || cells.next().ok_or_else(|| bad("short row".into()));
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number {s:?}")));
            let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            let flag = |s: &str| match s {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad(format!("bad flag {s:?}"))),
            };
            let time = num(next()?)?;
            let ego = VesselState {
                position: Vec2::new(num(next()?)?, num(next()?)?),
                heading: num(next()?)?,
                speed: num(next()?)?,
                yaw_rate: num(next()?)?,
                rudder_angle: num(next()?)?,
                propeller_setting: num(next()?)?,
            };
            let desired_heading = num(next()?)?;
            let desired_speed = num(next()?)?;
            let commands = Commands { rudder: num(next()?)?, propeller: num(next()?)? };
            let depth = num(next()?)?;
            let wave = WaveDisturbance { surge_accel: num(next()?)?, sway_drift: num(next()?)?, yaw_accel: num(next()?)? };
            let scan = flag(next()?)?;
            let trigger = flag(next()?)?;
            let plan_id_s = next()?;
            let plan_id = plan_id_s.parse().map_err(|_| bad(format!("bad plan id {plan_id_s:?}")))?;
            let plan_kind = match next()? {
                "global" => PlanKind::Global,
                "cdca" => PlanKind::Cdca,
                other => return Err(bad(format!("bad plan kind {other:?}"))),
            };
            let cdca_infeasible = flag(next()?)?;
            let grounded = flag(next()?)?;
            let mut targets = Vec::with_capacity(shell.header.targets.len());
            for meta in &shell.header.targets {
                let x = opt(next()?)?;
                let y = opt(next()?)?;
                let heading = opt(next()?)?;
                let speed = opt(next()?)?;
                let det = flag(next()?)?;
                let dv: Vec<Option<f64>> = (0..7).map(|_| next().and_then(opt)).collect::<Result<_>>()?;
                let ev: Vec<Option<f64>> = (0..5).map(|_| next().and_then(opt)).collect::<Result<_>>()?;
                let dcpa = opt(next()?)?;
                let tcpa = opt(next()?)?;
                let flagged = next()?;
                let (Some(x), Some(y), Some(heading), Some(speed)) = (x, y, heading, speed) else {
                    continue;
                };
                let detection = if det {
                    let v: Option<Vec<f64>> = dv.into_iter().collect();
                    let v = v.ok_or_else(|| bad("detection with empty cells".into()))?;
                    Some(DetectionRecord {
                        position: Vec2::new(v[0], v[1]),
                        velocity: Vec2::new(v[2], v[3]),
                        snr: v[4],
                        sigma_range: v[5],
                        sigma_velocity: v[6],
                    })
                } else {
                    None
                };
                let estimate = match ev.into_iter().collect::<Option<Vec<f64>>>() {
                    Some(v) => Some(EstimateRecord { position: Vec2::new(v[0], v[1]), velocity: Vec2::new(v[2], v[3]), age: v[4] }),
                    None => None,
                };
                let risk = match (dcpa, tcpa) {
                    (Some(dcpa), Some(tcpa)) => Some(RiskRecord { dcpa, tcpa, flagged: flag(flagged)? }),
                    _ => None,
                };
                targets.push(TargetRecord { id: meta.id, position: Vec2::new(x, y), heading, speed, detection, estimate, risk });
            }
            records.push(TickRecord {
                time,
                ego,
                desired_heading,
                desired_speed,
                commands,
                depth,
                wave,
                scan,
                trigger,
                plan_id,
                plan_kind,
                cdca_infeasible,
                grounded,
                targets,
            });
        }
        Ok(SimulationLog { header: shell.header, records })
    }
}
