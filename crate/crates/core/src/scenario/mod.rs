//! Declarative scenarios and the fixed-step simulation loop.

mod engine;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::autonomy::{AlphaBeta, CdcaParams, ControlGains, GuidanceParams, PlannerError, Thresholds, TriggerPolicy};
use crate::bathymetry::{load_raster, BathyError, DepthGrid, RasterFormat, UkcPolicy};
use crate::dynamics::{DynamicsError, SeaSpectrumConfig, VesselParams, MAX_DT};
use crate::geom::Vec2;
use crate::radar::{RadarError, TargetId};
use crate::weather::{RadarConfig, SeverityMap, WeatherError, WeatherSeverity};

pub use engine::{run, EGO_ID};

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

/// Mean Earth radius, m.
const EARTH_RADIUS: f64 = 6_371_008.8;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: TOML syntax: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("{path}: field `{field}`: {message}")]
    Schema { path: PathBuf, field: String, message: String },
    #[error("invalid scenario: `{field}` {reason}")]
    Invalid { field: String, reason: String },
    #[error("ego starts in a non-navigable cell at ({x:.1}, {y:.1}); check draft, clearance and bathymetry")]
    GroundingConfig { x: f64, y: f64 },
    #[error("goal ({x:.1}, {y:.1}) is unreachable on the occupancy grid")]
    GoalUnreachable { x: f64, y: f64 },
    #[error("non-finite ego state at tick {tick}")]
    NonFinite { tick: usize },
    #[error("ego left the bathymetry grid at tick {tick}")]
    LeftGrid { tick: usize },
    #[error(transparent)]
    Bathymetry(#[from] BathyError),
    #[error(transparent)]
    Weather(#[from] WeatherError),
    #[error(transparent)]
    Radar(#[from] RadarError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

/// Operating area in degrees. The local frame is equirectangular about
/// `origin`, or the centre of the box when no origin is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<GeoPoint>,
}

impl Area {
    pub fn origin(&self) -> GeoPoint {
        self.origin.unwrap_or(GeoPoint {
            lat: 0.5 * (self.lat_min + self.lat_max),
            lon: 0.5 * (self.lon_min + self.lon_max),
        })
    }

    pub fn to_local(&self, p: GeoPoint) -> Vec2 {
        let o = self.origin();
        let k = EARTH_RADIUS * std::f64::consts::PI / 180.0;
        Vec2::new((p.lon - o.lon) * k * o.lat.to_radians().cos(), (p.lat - o.lat) * k)
    }

    pub fn to_geo(&self, v: Vec2) -> GeoPoint {
        let o = self.origin();
        let k = EARTH_RADIUS * std::f64::consts::PI / 180.0;
        GeoPoint { lat: o.lat + v.y / k, lon: o.lon + v.x / (k * o.lat.to_radians().cos()) }
    }

    /// South-west and north-east corners in the local frame.
    pub fn local_bounds(&self) -> (Vec2, Vec2) {
        let sw = self.to_local(GeoPoint { lat: self.lat_min, lon: self.lon_min });
        let ne = self.to_local(GeoPoint { lat: self.lat_max, lon: self.lon_max });
        (sw, ne)
    }

    pub fn contains_local(&self, p: Vec2) -> bool {
        let (sw, ne) = self.local_bounds();
        p.x >= sw.x && p.x <= ne.x && p.y >= sw.y && p.y <= ne.y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BathymetrySource {
    Flat(f64),
    Raster(PathBuf),
}

impl BathymetrySource {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix("flat(").and_then(|r| r.strip_suffix(')')) {
            let depth: f64 = inner
                .trim()
                .parse()
                .map_err(|_| invalid("environment.bathymetry", format!("bad flat depth {inner:?}")))?;
            if !(depth > 0.0) || !depth.is_finite() {
                return Err(invalid("environment.bathymetry", "flat depth must be positive"));
            }
            return Ok(Self::Flat(depth));
        }
        if t.is_empty() {
            return Err(invalid("environment.bathymetry", "is empty"));
        }
        Ok(Self::Raster(PathBuf::from(t)))
    }
}

fn default_cell_size() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    /// `flat(<depth m>)` or a raster path relative to the scenario file
    pub bathymetry: String,
    /// cell size of a generated flat grid, m
    #[serde(default = "default_cell_size")]
    pub flat_cell_size: f64,
    pub weather: WeatherSeverity,
    #[serde(default)]
    pub severity_map: SeverityMap,
    #[serde(default)]
    pub sea: SeaSpectrumConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoConfig {
    #[serde(default)]
    pub params: VesselParams,
    pub position: Vec2,
    pub heading_deg: f64,
    pub speed: f64,
    pub goal: Vec2,
    /// m/s
    pub cruise_speed: f64,
    #[serde(default)]
    pub ukc: UkcPolicy,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutonomyConfig {
    pub thresholds: Thresholds,
    pub alpha_beta: AlphaBeta,
    pub cdca: CdcaParams,
    pub guidance: GuidanceParams,
    pub control: ControlGains,
    pub trigger: TriggerPolicy,
}

fn default_rcs() -> f64 {
    1000.0
}

fn default_target_length() -> f64 {
    175.0
}

fn default_target_beam() -> f64 {
    25.4
}

/// Open-loop traffic: straight line at constant speed, or through
/// `waypoints` and then straight on along the last leg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub id: TargetId,
    #[serde(default)]
    pub name: String,
    pub position: Vec2,
    pub heading_deg: f64,
    pub speed: f64,
    /// m²
    #[serde(default = "default_rcs")]
    pub rcs: f64,
    #[serde(default = "default_target_length")]
    pub length: f64,
    #[serde(default = "default_target_beam")]
    pub beam: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waypoints: Vec<Vec2>,
}

impl TargetConfig {
    pub fn label(&self) -> String {
        if self.name.is_empty() {
            format!("T{}", self.id)
        } else {
            self.name.clone()
        }
    }
}

fn default_format_version() -> u32 {
    SCENARIO_FORMAT_VERSION
}

fn default_dt() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_format_version")]
    pub format_version: u32,
    pub name: String,
    pub seed: u64,
    /// s
    pub duration: f64,
    /// s
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub area: Area,
    pub environment: Environment,
    #[serde(default)]
    pub radar: RadarConfig,
    pub ego: EgoConfig,
    #[serde(default)]
    pub autonomy: AutonomyConfig,
    #[serde(default)]
    pub targets: Vec<TargetConfig>,
    /// directory relative raster paths resolve against
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// Reads, parses and validates a scenario file. Schema errors name the
/// offending field path, e.g. `ego.initial.speed`.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
    let mut sc = parse_scenario(&text, path)?;
    sc.base_dir = path.parent().map(Path::to_path_buf);
    sc.validate()?;
    Ok(sc)
}

/// Parses without validation; `path` only labels errors.
pub fn parse_scenario(text: &str, path: &Path) -> Result<Scenario> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| ScenarioError::Syntax { path: path.into(), message: e.to_string().trim().to_owned() })?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut field = e.path().to_string();
        let message = e.inner().message().trim().to_owned();
        if let Some(missing) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
            field = if field == "." { missing.to_owned() } else { format!("{field}.{missing}") };
        }
        ScenarioError::Schema { path: path.into(), field, message }
    })
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != SCENARIO_FORMAT_VERSION {
            return Err(invalid("format_version", format!("{} is not supported (expected {SCENARIO_FORMAT_VERSION})", self.format_version)));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(invalid("duration", "must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(invalid("dt", format!("{} outside (0, {MAX_DT}]", self.dt)));
        }
        let a = &self.area;
        if !(a.lat_min < a.lat_max && a.lon_min < a.lon_max) || a.lat_min < -89.0 || a.lat_max > 89.0 {
            return Err(invalid("area", "bounds must satisfy min < max within ±89° latitude"));
        }
        BathymetrySource::parse(&self.environment.bathymetry)?;
        if !(self.environment.flat_cell_size > 0.0) {
            return Err(invalid("environment.flat_cell_size", "must be positive"));
        }
        self.environment.severity_map.validate()?;
        self.radar.validate()?;
        self.ego.params.validate()?;
        let sea = &self.environment.sea;
        if sea.components == 0 || !(sea.omega_min > 0.0 && sea.omega_min < sea.omega_max) || !(sea.gamma >= 1.0) {
            return Err(invalid("environment.sea", "needs components > 0, 0 < omega_min < omega_max, gamma >= 1"));
        }
        if !self.ego.position.is_finite() || !a.contains_local(self.ego.position) {
            return Err(invalid("ego.position", "is outside the area"));
        }
        if !a.contains_local(self.ego.goal) {
            return Err(invalid("ego.goal", "is outside the area"));
        }
        if !(self.ego.speed >= 0.0) || !(self.ego.cruise_speed > 0.0) || self.ego.cruise_speed > self.ego.params.max_speed {
            return Err(invalid("ego.cruise_speed", "must be in (0, max_speed] with a non-negative initial speed"));
        }
        let au = &self.autonomy;
        if !(au.thresholds.dcpa > 0.0 && au.thresholds.tcpa > 0.0) {
            return Err(invalid("autonomy.thresholds", "must be positive"));
        }
        if !au.alpha_beta.is_valid() {
            return Err(invalid("autonomy.alpha_beta", "needs alpha in (0, 1] and beta in (0, 2)"));
        }
        let c = &au.cdca;
        if !(c.heading_step_deg > 0.0 && c.heading_span_deg >= 0.0 && c.safety_radius > 0.0 && c.horizon > 0.0)
            || c.speed_factors.is_empty()
            || c.speed_factors.iter().any(|f| !(*f > 0.0))
        {
            return Err(invalid("autonomy.cdca", "needs positive step, radius, horizon and speed factors"));
        }
        if !(au.guidance.lookahead > 0.0 && au.guidance.accept_radius > 0.0) {
            return Err(invalid("autonomy.guidance", "lookahead and accept_radius must be positive"));
        }
        let mut ids: Vec<TargetId> = Vec::new();
        for (i, t) in self.targets.iter().enumerate() {
            let field = |f: &str| format!("targets[{i}].{f}");
            if t.id == EGO_ID {
                return Err(invalid(field("id"), format!("{EGO_ID} is reserved for the ego")));
            }
            if ids.contains(&t.id) {
                return Err(invalid(field("id"), format!("{} is used twice", t.id)));
            }
            ids.push(t.id);
            if !a.contains_local(t.position) {
                return Err(invalid(field("position"), "is outside the area"));
            }
            if !(t.speed >= 0.0) || !(t.rcs > 0.0) || !(t.length > 0.0) || !(t.beam > 0.0) {
                return Err(invalid(field("speed"), "speed must be non-negative and rcs, length, beam positive"));
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, defaults included.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn bathymetry_source(&self) -> Result<BathymetrySource> {
        let src = BathymetrySource::parse(&self.environment.bathymetry)?;
        Ok(match (src, &self.base_dir) {
            (BathymetrySource::Raster(p), Some(dir)) if p.is_relative() => BathymetrySource::Raster(dir.join(p)),
            (s, _) => s,
        })
    }

    /// Depth grid for the run: the raster, or a flat grid covering the area.
    pub fn depth_grid(&self) -> Result<DepthGrid> {
        match self.bathymetry_source()? {
            BathymetrySource::Flat(depth) => {
                let (sw, ne) = self.area.local_bounds();
                let cs = self.environment.flat_cell_size;
                let cols = ((ne.x - sw.x) / cs).ceil() as usize;
                let rows = ((ne.y - sw.y) / cs).ceil() as usize;
                Ok(DepthGrid::flat(sw, cs, rows, cols, depth)?)
            }
            BathymetrySource::Raster(p) => {
                let fmt = RasterFormat::from_path(&p);
                Ok(load_raster(&p, fmt)?)
            }
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_weather(&self, weather: WeatherSeverity) -> Self {
        let mut s = self.clone();
        s.environment.weather = weather;
        s
    }

    pub fn with_radar(&self, radar: RadarConfig) -> Self {
        Self { radar, ..self.clone() }
    }
}

/// The crossing and head-on encounter off the Port of Los Angeles.
///
/// Ego starts at the origin heading north towards V2; V1 crosses from
/// starboard. All three vessels would meet at (0, 3500) m after 350 s.
pub fn build_reference_scenario() -> Scenario {
    let params = VesselParams::s175();
    let (length, beam) = (params.length, params.beam);
    let target = |id, name: &str, x, y, heading_deg| TargetConfig {
        id,
        name: name.to_owned(),
        position: Vec2::new(x, y),
        heading_deg,
        speed: 10.0,
        rcs: default_rcs(),
        length,
        beam,
        waypoints: Vec::new(),
    };
    Scenario {
        format_version: SCENARIO_FORMAT_VERSION,
        name: "reference".to_owned(),
        seed: 1,
        duration: 600.0,
        dt: 0.05,
        area: Area { lat_min: 33.5666, lat_max: 33.7780, lon_min: -118.2838, lon_max: -118.0318, origin: None },
        environment: Environment {
            bathymetry: "flat(25.0)".to_owned(),
            flat_cell_size: default_cell_size(),
            weather: WeatherSeverity::ideal(),
            severity_map: SeverityMap::default(),
            sea: SeaSpectrumConfig::default(),
        },
        radar: RadarConfig::nominal(),
        ego: EgoConfig {
            params,
            position: Vec2::ZERO,
            heading_deg: 0.0,
            speed: 10.0,
            goal: Vec2::new(0.0, 10_000.0),
            cruise_speed: 10.0,
            ukc: UkcPolicy::default(),
        },
        autonomy: AutonomyConfig::default(),
        targets: vec![target(1, "V1", 3500.0, 3500.0, 270.0), target(2, "V2", 0.0, 7000.0, 180.0)],
        base_dir: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_round_trips_through_toml() {
        let sc = build_reference_scenario();
        sc.validate().unwrap();
        let back = parse_scenario(&sc.to_toml(), Path::new("mem.toml")).unwrap();
        assert_eq!(back, sc);
        assert_eq!(back.hash(), sc.hash());
    }

    #[test]
    fn local_frame_round_trip() {
        let a = build_reference_scenario().area;
        let p = GeoPoint { lat: 33.70, lon: -118.10 };
        let back = a.to_geo(a.to_local(p));
        assert!((back.lat - p.lat).abs() < 1e-12 && (back.lon - p.lon).abs() < 1e-12);
        let (sw, ne) = a.local_bounds();
        assert!((sw.x + ne.x).abs() < 1e-6 && (sw.y + ne.y).abs() < 1e-6);
        // about 23.3 km by 23.5 km
        assert!((ne.x - sw.x - 23_300.0).abs() < 200.0, "{}", ne.x - sw.x);
        assert!((ne.y - sw.y - 23_500.0).abs() < 200.0, "{}", ne.y - sw.y);
    }

    #[test]
    fn missing_field_names_its_path() {
        let sc = build_reference_scenario();
        let text = sc.to_toml().replace("cruise_speed = 10.0\n", "");
        match parse_scenario(&text, Path::new("x.toml")) {
            Err(ScenarioError::Schema { field, .. }) => assert_eq!(field, "ego.cruise_speed"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dt_cap_enforced() {
        let mut sc = build_reference_scenario();
        sc.dt = 0.5;
        assert!(matches!(sc.validate(), Err(ScenarioError::Invalid { ref field, .. }) if field == "dt"));
    }

    #[test]
    fn out_of_area_start_rejected() {
        let mut sc = build_reference_scenario();
        sc.targets[0].position = Vec2::new(50_000.0, 0.0);
        assert!(matches!(sc.validate(), Err(ScenarioError::Invalid { ref field, .. }) if field == "targets[0].position"));
    }

    #[test]
    fn flat_source_parsing() {
        assert_eq!(BathymetrySource::parse("flat(12.5)").unwrap(), BathymetrySource::Flat(12.5));
        assert!(BathymetrySource::parse("flat(-1)").is_err());
        assert_eq!(BathymetrySource::parse("a.asc").unwrap(), BathymetrySource::Raster("a.asc".into()));
    }
}
