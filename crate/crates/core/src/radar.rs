//! Radar sensor: range gating, plan-view occlusion, SNR-calibrated noise and
//! sliding-window tracks.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::VesselState;
use crate::geom::{segments_intersect, wrap_angle, Vec2};
use crate::weather::{
    compute_snr, measurement_noise_stds, path_attenuation, PhysicalWeather, RadarConfig,
    WeatherError,
};

pub type TargetId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadarError {
    #[error("obstacle {id}: {reason}")]
    DegeneratePolygon { id: TargetId, reason: &'static str },
    #[error("line of sight needs distinct endpoints")]
    CoincidentEndpoints,
    #[error("track {target_id}: detection at t={timestamp} is not after last entry t={last}")]
    OutOfOrder { target_id: TargetId, timestamp: f64, last: f64 },
    #[error("detection for target {got} applied to track {expected}")]
    WrongTarget { expected: TargetId, got: TargetId },
    #[error(transparent)]
    Link(#[from] WeatherError),
}

pub type Result<T> = std::result::Result<T, RadarError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    Vessel,
    Terrain,
    Infrastructure,
}

/// Convex plan-view footprint of anything that can block the radar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleShape {
    id: TargetId,
    footprint: Vec<Vec2>,
    kind: ObstacleKind,
}

impl ObstacleShape {
    /// Builds a shape from vertices in either winding order.
    pub fn new(id: TargetId, footprint: Vec<Vec2>, kind: ObstacleKind) -> Result<Self> {
        let bad = |reason| RadarError::DegeneratePolygon { id, reason };
        let n = footprint.len();
        if n < 3 {
            return Err(bad("needs at least 3 vertices"));
        }
        if footprint.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite vertex"));
        }
        let mut sign = 0.0;
        for i in 0..n {
            let a = footprint[i];
            let b = footprint[(i + 1) % n];
            let c = footprint[(i + 2) % n];
            let turn = (b - a).cross(c - b);
            if turn == 0.0 {
                return Err(bad("collinear or repeated vertices"));
            }
            if sign == 0.0 {
                sign = turn.signum();
            } else if turn.signum() != sign {
                return Err(bad("polygon is not convex"));
            }
        }
        // A star polygon turns the same way at every vertex; reject by winding.
        let winding: f64 = (0..n)
            .map(|i| {
                let a = footprint[i] - footprint[(i + n - 1) % n];
                let b = footprint[(i + 1) % n] - footprint[i];
                a.cross(b).atan2(a.dot(b))
            })
            .sum();
        if (winding.abs() - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(bad("polygon is self-intersecting"));
        }
        Ok(Self { id, footprint, kind })
    }

    /// Rectangular hull outline centred on `center`, long axis along `heading`.
    pub fn vessel(id: TargetId, center: Vec2, heading: f64, length: f64, beam: f64) -> Self {
        let fwd = Vec2::from_heading(heading) * (length / 2.0);
        let stbd = Vec2::from_heading(heading + std::f64::consts::FRAC_PI_2) * (beam / 2.0);
        let footprint = vec![
            center + fwd + stbd,
            center + fwd - stbd,
            center - fwd - stbd,
            center - fwd + stbd,
        ];
        Self { id, footprint, kind: ObstacleKind::Vessel }
    }

    pub fn id(&self) -> TargetId {
        self.id
    }

    pub fn kind(&self) -> ObstacleKind {
        self.kind
    }

    pub fn footprint(&self) -> &[Vec2] {
        &self.footprint
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.footprint.len();
        let mut sign = 0.0;
        for i in 0..n {
            let a = self.footprint[i];
            let b = self.footprint[(i + 1) % n];
            let c = (b - a).cross(p - a);
            if c == 0.0 {
                continue;
            }
            if sign == 0.0 {
                sign = c.signum();
            } else if c.signum() != sign {
                return false;
            }
        }
        true
    }

    pub fn intersects_segment(&self, a: Vec2, b: Vec2) -> bool {
        if self.contains(a) || self.contains(b) {
            return true;
        }
        let n = self.footprint.len();
        (0..n).any(|i| segments_intersect(a, b, self.footprint[i], self.footprint[(i + 1) % n]))
    }
}

/// True iff the segment from `origin` to `target` crosses none of the occluders.
pub fn line_of_sight<'a>(
    origin: Vec2,
    target: Vec2,
    occluders: impl IntoIterator<Item = &'a ObstacleShape>,
) -> Result<bool> {
    if origin == target {
        return Err(RadarError::CoincidentEndpoints);
    }
    Ok(!occluders.into_iter().any(|o| o.intersects_segment(origin, target)))
}

/// Ground truth for one radar-visible target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarTarget {
    pub id: TargetId,
    pub position: Vec2,
    pub velocity: Vec2,
    /// m²
    pub rcs: f64,
}

/// Everything the radar can see or be blocked by at one instant.
#[derive(Debug, Clone, Default)]
pub struct RadarWorld {
    pub targets: Vec<RadarTarget>,
    pub occluders: Vec<ObstacleShape>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub target_id: TargetId,
    /// m, from the measured position
    pub range: f64,
    /// rad, relative to ego heading, wrapped to (−π, π]
    pub bearing: f64,
    pub measured_position: Vec2,
    pub measured_velocity: Vec2,
    /// dB
    pub snr: f64,
    /// s
    pub timestamp: f64,
    /// m, noise std used for this detection
    pub sigma_range: f64,
    /// m/s
    pub sigma_velocity: f64,
}

/// One radar sweep.
///
/// The ego's own occluder entry (same id as `ego_id`) and each target's own
/// footprint are ignored for that target's line of sight.
pub fn scan<R: Rng + ?Sized>(
    world: &RadarWorld,
    ego: &VesselState,
    ego_id: TargetId,
    cfg: &RadarConfig,
    weather: &PhysicalWeather,
    now: f64,
    rng: &mut R,
) -> Result<Vec<Detection>> {
    let (gamma_rain, gamma_fog) = cfg.specific_attenuation(weather)?;
    let mut out = Vec::new();
    for tgt in &world.targets {
        let rel = tgt.position - ego.position;
        let true_range = rel.norm();
        if true_range <= 0.0 || true_range > cfg.max_range {
            continue;
        }
        let occluders = world
            .occluders
            .iter()
            .filter(|o| o.id() != tgt.id && o.id() != ego_id);
        if !line_of_sight(ego.position, tgt.position, occluders)? {
            continue;
        }
        let loss = path_attenuation(gamma_rain, gamma_fog, true_range, cfg.path_mode)?;
        let snr = compute_snr(cfg, true_range, tgt.rcs, &loss)?;
        if cfg.snr_floor_db.is_some_and(|floor| snr < floor) {
            continue;
        }
        let (sigma_range, sigma_velocity) = measurement_noise_stds(snr, cfg)?;
        let n: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let measured_position = tgt.position + Vec2::new(n[0], n[1]) * sigma_range;
        let measured_velocity = tgt.velocity + Vec2::new(n[2], n[3]) * sigma_velocity;
        let rel_meas = measured_position - ego.position;
        let range = rel_meas.norm().clamp(f64::MIN_POSITIVE, cfg.max_range);
        let bearing = wrap_angle(rel_meas.bearing() - ego.heading);
        out.push(Detection {
            target_id: tgt.id,
            range,
            bearing,
            measured_position,
            measured_velocity,
            snr,
            timestamp: now,
            sigma_range,
            sigma_velocity,
        });
    }
    Ok(out)
}

/// Sliding-window history of one target's measured positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub target_id: TargetId,
    history: VecDeque<(f64, Vec2)>,
    pub velocity_estimate: Vec2,
    pub last_snr: f64,
}

impl Track {
    pub fn new(det: &Detection) -> Self {
        Self {
            target_id: det.target_id,
            history: VecDeque::from([(det.timestamp, det.measured_position)]),
            velocity_estimate: det.measured_velocity,
            last_snr: det.snr,
        }
    }

    pub fn history(&self) -> impl ExactSizeIterator<Item = &(f64, Vec2)> {
        self.history.iter()
    }

    pub fn last_timestamp(&self) -> f64 {
        self.history.back().expect("track is never empty").0
    }

    pub fn last_position(&self) -> Vec2 {
        self.history.back().expect("track is never empty").1
    }

    /// Appends a detection, evicts entries older than `window` and refits the
    /// velocity.
    pub fn update(&mut self, det: &Detection, window: f64) -> Result<()> {
        if det.target_id != self.target_id {
            return Err(RadarError::WrongTarget { expected: self.target_id, got: det.target_id });
        }
        let last = self.last_timestamp();
        if det.timestamp <= last {
            return Err(RadarError::OutOfOrder {
                target_id: self.target_id,
                timestamp: det.timestamp,
                last,
            });
        }
        self.history.push_back((det.timestamp, det.measured_position));
        let cutoff = det.timestamp - window;
        while self.history.front().is_some_and(|(t, _)| *t < cutoff) {
            self.history.pop_front();
        }
        self.last_snr = det.snr;
        self.velocity_estimate = fit_velocity(&self.history).unwrap_or(det.measured_velocity);
        Ok(())
    }
}

/// Functional form of [`Track::update`].
pub fn update_track(track: &Track, det: &Detection, window: f64) -> Result<Track> {
    let mut next = track.clone();
    next.update(det, window)?;
    Ok(next)
}

/// Least-squares slope of position against time.
fn fit_velocity(history: &VecDeque<(f64, Vec2)>) -> Option<Vec2> {
    if history.len() < 2 {
        return None;
    }
    let n = history.len() as f64;
    let t_mean = history.iter().map(|(t, _)| t).sum::<f64>() / n;
    let p_mean = history.iter().fold(Vec2::ZERO, |acc, (_, p)| acc + *p) * (1.0 / n);
    let mut stt = 0.0;
    let mut stp = Vec2::ZERO;
    for (t, p) in history {
        let dt = t - t_mean;
        stt += dt * dt;
        stp += (*p - p_mean) * dt;
    }
    (stt > 0.0).then(|| stp * (1.0 / stt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square(id: TargetId, center: Vec2, half: f64) -> ObstacleShape {
        let v = vec![
            center + Vec2::new(-half, -half),
            center + Vec2::new(half, -half),
            center + Vec2::new(half, half),
            center + Vec2::new(-half, half),
        ];
        ObstacleShape::new(id, v, ObstacleKind::Terrain).unwrap()
    }

    fn det(t: f64, p: Vec2, v: Vec2) -> Detection {
        Detection {
            target_id: 1,
            range: 1.0,
            bearing: 0.0,
            measured_position: p,
            measured_velocity: v,
            snr: 10.0,
            timestamp: t,
            sigma_range: 0.0,
            sigma_velocity: 0.0,
        }
    }

    #[test]
    fn polygon_validation() {
        let tri = vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert!(ObstacleShape::new(0, tri, ObstacleKind::Infrastructure).is_ok());
        assert!(ObstacleShape::new(0, vec![Vec2::ZERO, Vec2::new(1.0, 0.0)], ObstacleKind::Terrain).is_err());
        let collinear = vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        assert!(ObstacleShape::new(0, collinear, ObstacleKind::Terrain).is_err());
        let concave = vec![
            Vec2::ZERO,
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.5),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ];
        assert!(ObstacleShape::new(0, concave, ObstacleKind::Terrain).is_err());
        // pentagram: every turn has the same sign but winds twice
        let star: Vec<Vec2> = (0..5)
            .map(|i| Vec2::from_heading(i as f64 * 4.0 * std::f64::consts::PI / 5.0))
            .collect();
        assert!(ObstacleShape::new(0, star, ObstacleKind::Terrain).is_err());
    }

    #[test]
    fn line_of_sight_basics() {
        let a = Vec2::ZERO;
        let b = Vec2::new(0.0, 1000.0);
        assert!(line_of_sight(a, b, []).unwrap());
        let blocker = square(5, Vec2::new(0.0, 500.0), 10.0);
        assert!(!line_of_sight(a, b, [&blocker]).unwrap());
        let aside = square(5, Vec2::new(25.0, 500.0), 10.0);
        assert!(line_of_sight(a, b, [&aside]).unwrap());
        assert!(line_of_sight(a, a, []).is_err());
    }

    #[test]
    fn range_gate_and_occlusion_in_scan() {
        let cfg = RadarConfig::nominal();
        let ego = VesselState::at(Vec2::ZERO, 0.0, 0.0);
        let weather = PhysicalWeather::clear();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let far = RadarTarget {
            id: 1,
            position: Vec2::new(0.0, 1.2 * cfg.max_range),
            velocity: Vec2::ZERO,
            rcs: 1000.0,
        };
        let world = RadarWorld { targets: vec![far], occluders: vec![] };
        assert!(scan(&world, &ego, 0, &cfg, &weather, 0.0, &mut rng).unwrap().is_empty());

        let hidden = RadarTarget { position: Vec2::new(0.0, 3000.0), ..far };
        let world = RadarWorld {
            targets: vec![hidden],
            occluders: vec![square(9, Vec2::new(0.0, 1500.0), 200.0)],
        };
        assert!(scan(&world, &ego, 0, &cfg, &weather, 0.0, &mut rng).unwrap().is_empty());

        // own footprint and the ego hull never block
        let world = RadarWorld {
            targets: vec![hidden],
            occluders: vec![
                ObstacleShape::vessel(1, hidden.position, 0.0, 175.0, 25.4),
                ObstacleShape::vessel(0, Vec2::ZERO, 0.0, 175.0, 25.4),
            ],
        };
        let dets = scan(&world, &ego, 0, &cfg, &weather, 0.0, &mut rng).unwrap();
        assert_eq!(dets.len(), 1);
        assert!(dets[0].range > 0.0 && dets[0].range <= cfg.max_range);
        assert!(dets[0].bearing.abs() < 0.01);
    }

    #[test]
    fn snr_floor_drops_weak_returns() {
        let cfg = RadarConfig { snr_floor_db: Some(200.0), ..RadarConfig::nominal() };
        let ego = VesselState::at(Vec2::ZERO, 0.0, 0.0);
        let world = RadarWorld {
            targets: vec![RadarTarget { id: 1, position: Vec2::new(0.0, 100.0), velocity: Vec2::ZERO, rcs: 1.0 }],
            occluders: vec![],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(scan(&world, &ego, 0, &cfg, &PhysicalWeather::clear(), 0.0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn track_fallback_and_exact_fit() {
        let v = Vec2::new(3.0, -4.0);
        let mut track = Track::new(&det(0.0, Vec2::ZERO, Vec2::new(7.0, 7.0)));
        assert_eq!(track.velocity_estimate, Vec2::new(7.0, 7.0));
        for i in 1..20 {
            let t = i as f64 * 0.5;
            track.update(&det(t, v * t, Vec2::new(7.0, 7.0)), 4.0).unwrap();
        }
        assert_relative_eq!(track.velocity_estimate.x, v.x, epsilon = 1e-9);
        assert_relative_eq!(track.velocity_estimate.y, v.y, epsilon = 1e-9);
        let times: Vec<f64> = track.history().map(|(t, _)| *t).collect();
        assert!(times.last().unwrap() - times.first().unwrap() <= 4.0);
        assert!(times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn track_rejects_out_of_order() {
        let track = Track::new(&det(5.0, Vec2::ZERO, Vec2::ZERO));
        assert!(matches!(
            update_track(&track, &det(5.0, Vec2::ZERO, Vec2::ZERO), 10.0),
            Err(RadarError::OutOfOrder { .. })
        ));
        let other = Detection { target_id: 2, ..det(6.0, Vec2::ZERO, Vec2::ZERO) };
        assert!(update_track(&track, &other, 10.0).is_err());
    }
}
