//! Multi-seed batches and the weather × radar study matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::log::SimulationLog;
use crate::metrics::{compute_pis, MetricsError, PIReport};
use crate::radar::TargetId;
use crate::scenario::{load_scenario, run, Scenario, ScenarioError};
use crate::weather::{RadarConfig, WeatherSeverity};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("unknown weather preset `{0}` (expected ideal, moderate or severe)")]
    UnknownWeather(String),
    #[error("unknown radar preset `{0}` (expected high, nominal or low)")]
    UnknownRadar(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("no scenario files (*.toml) in {0}")]
    NoScenarios(PathBuf),
    #[error("{name} seed {seed}: {source}")]
    Run { name: String, seed: u64, source: ScenarioError },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

pub type Result<T> = std::result::Result<T, StudyError>;

pub fn weather_preset(name: &str) -> Result<WeatherSeverity> {
    match name {
        "ideal" => Ok(WeatherSeverity::ideal()),
        "moderate" => Ok(WeatherSeverity::moderate()),
        "severe" => Ok(WeatherSeverity::severe()),
        other => Err(StudyError::UnknownWeather(other.to_owned())),
    }
}

pub fn radar_preset(name: &str) -> Result<RadarConfig> {
    match name {
        "high" => Ok(RadarConfig::high_power()),
        "nominal" => Ok(RadarConfig::nominal()),
        "low" => Ok(RadarConfig::low_power()),
        other => Err(StudyError::UnknownRadar(other.to_owned())),
    }
}

/// Preset name when `w` equals one, else `custom`.
pub fn weather_label(w: &WeatherSeverity) -> &'static str {
    ["ideal", "moderate", "severe"].into_iter().find(|n| weather_preset(n).ok().as_ref() == Some(w)).unwrap_or("custom")
}

/// Preset name when `r` equals one, else `custom`.
pub fn radar_label(r: &RadarConfig) -> &'static str {
    ["high", "nominal", "low"].into_iter().find(|n| radar_preset(n).ok().as_ref() == Some(r)).unwrap_or("custom")
}

/// One finished run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub seed: u64,
    pub log: SimulationLog,
    pub report: PIReport,
}

/// Runs `scenario` once per seed, in parallel. Results come back in seed order.
pub fn run_seeds(scenario: &Scenario, seeds: &[u64]) -> Result<Vec<RunOutcome>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let sc = scenario.with_seed(seed);
            let log = run(&sc).map_err(|source| StudyError::Run { name: sc.name.clone(), seed, source })?;
            let report = compute_pis(&log)?;
            Ok(RunOutcome { seed, log, report })
        })
        .collect()
}

/// `n` consecutive seeds starting at the scenario's own seed.
pub fn seed_range(scenario: &Scenario, n: u64) -> Vec<u64> {
    (0..n).map(|i| scenario.seed.wrapping_add(i)).collect()
}

/// Per-cell aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub weather: String,
    pub radar: String,
    pub seeds: Vec<u64>,
    pub mean_mpd: BTreeMap<TargetId, f64>,
    pub min_mpd: BTreeMap<TargetId, f64>,
    pub mean_rmse_speed: f64,
    pub mean_rmse_speed_knots: f64,
    pub mean_rmse_heading: f64,
    pub mean_trigger_transitions: f64,
    pub grounded_runs: usize,
    pub reports: Vec<PIReport>,
}

impl CellSummary {
    pub fn from_reports(weather: &str, radar: &str, reports: Vec<PIReport>) -> Self {
        let n = reports.len().max(1) as f64;
        let mut sum_mpd: BTreeMap<TargetId, f64> = BTreeMap::new();
        let mut min_mpd: BTreeMap<TargetId, f64> = BTreeMap::new();
        for r in &reports {
            for (&id, &m) in &r.mpd_per_target {
                *sum_mpd.entry(id).or_default() += m;
                min_mpd.entry(id).and_modify(|v| *v = v.min(m)).or_insert(m);
            }
        }
        let mean = |f: fn(&PIReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Self {
            weather: weather.to_owned(),
            radar: radar.to_owned(),
            seeds: reports.iter().map(|r| r.seed).collect(),
            mean_mpd: sum_mpd.into_iter().map(|(id, s)| (id, s / n)).collect(),
            min_mpd,
            mean_rmse_speed: mean(|r| r.rmse_speed),
            mean_rmse_speed_knots: mean(|r| r.rmse_speed_knots),
            mean_rmse_heading: mean(|r| r.rmse_heading),
            mean_trigger_transitions: mean(|r| r.trigger_transitions as f64),
            grounded_runs: reports.iter().filter(|r| r.grounded).count(),
            reports,
        }
    }
}

/// Every (weather, radar) pair over the same seeds. Cells come back in
/// weather-major order.
pub fn sweep(base: &Scenario, weathers: &[&str], radars: &[&str], seeds: &[u64]) -> Result<Vec<CellSummary>> {
    let mut jobs = Vec::new();
    for &w in weathers {
        for &r in radars {
            let sc = base.with_weather(weather_preset(w)?).with_radar(radar_preset(r)?);
            for &seed in seeds {
                jobs.push((w, r, sc.with_seed(seed)));
            }
        }
    }
    let reports: Vec<(&str, &str, PIReport)> = jobs
        .par_iter()
        .map(|(w, r, sc)| {
            let log = run(sc).map_err(|source| StudyError::Run { name: format!("{w}/{r}"), seed: sc.seed, source })?;
            Ok((*w, *r, compute_pis(&log)?))
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for &w in weathers {
        for &r in radars {
            let cell: Vec<PIReport> =
                reports.iter().filter(|(cw, cr, _)| *cw == w && *cr == r).map(|(_, _, p)| p.clone()).collect();
            cells.push(CellSummary::from_reports(w, r, cell));
        }
    }
    Ok(cells)
}

/// Plain-text table, one row per cell, MPD columns per target in id order.
pub fn render_table(cells: &[CellSummary], names: &BTreeMap<TargetId, String>) -> String {
    let ids: Vec<TargetId> = cells.iter().flat_map(|c| c.mean_mpd.keys().copied()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut out = format!("{:<9} {:<8} {:>5}", "weather", "radar", "seeds");
    for id in &ids {
        let name = names.get(id).cloned().unwrap_or_else(|| format!("T{id}"));
        let _ = write!(out, " {:>11}", format!("MPD {name}"));
    }
    out.push_str("  RMSE_V m/s  RMSE_V kn  RMSE_psi deg  triggers\n");
    for c in cells {
        let _ = write!(out, "{:<9} {:<8} {:>5}", c.weather, c.radar, c.seeds.len());
        for id in &ids {
            match c.mean_mpd.get(id) {
                Some(m) => {
                    let _ = write!(out, " {m:>11.1}");
                }
                None => out.push_str(&format!(" {:>11}", "-")),
            }
        }
        let _ = writeln!(
            out,
            "  {:>10.3}  {:>9.3}  {:>12.3}  {:>8.1}",
            c.mean_rmse_speed, c.mean_rmse_speed_knots, c.mean_rmse_heading, c.mean_trigger_transitions
        );
    }
    out
}

/// CSV with the same columns as [`render_table`] plus per-target minimum MPD.
pub fn table_csv(cells: &[CellSummary]) -> String {
    let ids: Vec<TargetId> = cells.iter().flat_map(|c| c.mean_mpd.keys().copied()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut out = String::from("weather,radar,seeds");
    for id in &ids {
        let _ = write!(out, ",mean_mpd_t{id},min_mpd_t{id}");
    }
    out.push_str(",rmse_speed,rmse_speed_knots,rmse_heading_deg,trigger_transitions,grounded_runs\n");
    for c in cells {
        let _ = write!(out, "{},{},{}", c.weather, c.radar, c.seeds.len());
        for id in &ids {
            let cell = |m: Option<&f64>| m.map(f64::to_string).unwrap_or_default();
            let _ = write!(out, ",{},{}", cell(c.mean_mpd.get(id)), cell(c.min_mpd.get(id)));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{}",
            c.mean_rmse_speed, c.mean_rmse_speed_knots, c.mean_rmse_heading, c.mean_trigger_transitions, c.grounded_runs
        );
    }
    out
}

/// Scenario files directly inside `dir`, sorted by path.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|source| StudyError::Io { path: dir.into(), source })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|source| StudyError::Io { path: dir.into(), source })?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "toml") {
            files.push(path);
        }
    }
    if files.is_empty() {
        return Err(StudyError::NoScenarios(dir.into()));
    }
    files.sort();
    Ok(files)
}

/// Loads every scenario in `dir` and runs each over `n` seeds.
pub fn batch(dir: &Path, n: u64) -> Result<Vec<(Scenario, Vec<RunOutcome>)>> {
    let mut out = Vec::new();
    for path in scenario_files(dir)? {
        let sc = load_scenario(&path)?;
        let runs = run_seeds(&sc, &seed_range(&sc, n))?;
        out.push((sc, runs));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        assert_eq!(weather_preset("severe").unwrap(), WeatherSeverity::severe());
        assert_eq!(radar_preset("low").unwrap(), RadarConfig::low_power());
        assert!(matches!(weather_preset("stormy"), Err(StudyError::UnknownWeather(_))));
        assert!(matches!(radar_preset("x"), Err(StudyError::UnknownRadar(_))));
        assert_eq!(weather_label(&WeatherSeverity::moderate()), "moderate");
        assert_eq!(radar_label(&RadarConfig::high_power()), "high");
    }

    #[test]
    fn summary_means() {
        let mk = |seed, mpd: f64, v: f64| PIReport {
            scenario_name: "s".into(),
            scenario_hash: "h".into(),
            seed,
            mpd_per_target: BTreeMap::from([(1, mpd)]),
            rmse_speed: v,
            rmse_speed_knots: v / crate::metrics::KNOT,
            rmse_heading: 2.0 * v,
            trigger_transitions: seed as usize,
            activations_before_sustained: 0,
            sustained_onset: None,
            grounded: false,
            cdca_infeasible_ticks: 0,
        };
        let c = CellSummary::from_reports("ideal", "nominal", vec![mk(0, 400.0, 1.0), mk(1, 600.0, 2.0)]);
        assert_eq!(c.mean_mpd[&1], 500.0);
        assert_eq!(c.min_mpd[&1], 400.0);
        assert_eq!(c.mean_rmse_speed, 1.5);
        assert_eq!(c.mean_rmse_heading, 3.0);
        assert_eq!(c.mean_trigger_transitions, 0.5);
        assert_eq!(c.seeds, vec![0, 1]);
    }
}
