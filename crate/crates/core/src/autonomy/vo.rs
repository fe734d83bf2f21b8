//! Velocity obstacles and the discrete course/speed search used for
//! collision avoidance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fusion::TargetEstimate;
use super::planner::{PlanKind, PlanResult};
use crate::bathymetry::OccupancyGrid;
use crate::dynamics::VesselState;
use crate::geom::{wrap_angle, Vec2};

#[derive(Debug, Error, PartialEq)]
pub enum VoError {
    #[error("ego is already within the combined radius ({distance:.1} m <= {radius:.1} m)")]
    Overlap { distance: f64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingObstacle {
    pub position: Vec2,
    pub velocity: Vec2,
    /// ego and obstacle radii combined, m
    pub radius: f64,
}

/// Whether `candidate` (ego velocity) leads into the obstacle disc within
/// `horizon` seconds. A candidate exactly on the cone boundary counts as inside.
pub fn in_velocity_obstacle(ego_pos: Vec2, candidate: Vec2, obs: &MovingObstacle, horizon: f64) -> Result<bool, VoError> {
    let p = obs.position - ego_pos;
    let d = p.norm();
    if d <= obs.radius {
        return Err(VoError::Overlap { distance: d, radius: obs.radius });
    }
    let v = candidate - obs.velocity;
    let vn = v.norm();
    if vn == 0.0 {
        return Ok(false);
    }
    let along = v.dot(p);
    if along <= 0.0 {
        return Ok(false);
    }
    let half = (obs.radius / d).asin();
    let angle = (along / (vn * d)).clamp(-1.0, 1.0).acos();
    if angle > half {
        return Ok(false);
    }
    // first contact with the disc
    let disc = along * along - vn * vn * (d * d - obs.radius * obs.radius);
    let t_enter = (along - disc.max(0.0).sqrt()) / (vn * vn);
    Ok(t_enter <= horizon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdcaParams {
    /// candidate course offsets span ±this, deg
    pub heading_span_deg: f64,
    pub heading_step_deg: f64,
    /// candidate speeds as fractions of cruise speed
    pub speed_factors: Vec<f64>,
    /// combined ego/target radius, m
    pub safety_radius: f64,
    /// VO look-ahead, s
    pub horizon: f64,
    /// straight-line look-ahead against non-navigable cells, s
    pub static_horizon: f64,
    /// length of the avoidance leg before rejoining, s of travel
    pub leg_time: f64,
}

impl Default for CdcaParams {
    fn default() -> Self {
        Self {
            heading_span_deg: 90.0,
            heading_step_deg: 5.0,
            speed_factors: vec![1.0, 0.75, 0.5],
            safety_radius: 350.0,
            horizon: 600.0,
            static_horizon: 120.0,
            leg_time: 120.0,
        }
    }
}

/// What the avoidance search needs besides the obstacle picture.
#[derive(Debug, Clone, Copy)]
pub struct CdcaContext<'a> {
    /// course the ego would take without avoidance, rad
    pub reference_course: f64,
    pub cruise_speed: f64,
    pub global_path: &'a [Vec2],
    /// side committed to earlier in the same encounter: +1 starboard,
    /// -1 port, 0 none
    pub committed_side: f64,
}

struct Candidate {
    offset_steps: i64,
    heading: f64,
    speed: f64,
}

/// Outside every target's velocity obstacle, and the straight run over
/// `static_horizon` stays on navigable cells.
pub fn velocity_is_clear(
    ego_pos: Vec2,
    v: Vec2,
    estimates: &[TargetEstimate],
    occ: &OccupancyGrid,
    params: &CdcaParams,
) -> bool {
    let dynamic_clear = estimates.iter().all(|e| {
        let obs = MovingObstacle { position: e.position, velocity: e.velocity, radius: params.safety_radius };
        match in_velocity_obstacle(ego_pos, v, &obs, params.horizon) {
            Ok(inside) => !inside,
            // already too close: only opening velocities are acceptable
            Err(VoError::Overlap { .. }) => (v - e.velocity).dot(e.position - ego_pos) <= 0.0,
        }
    });
    dynamic_clear && occ.segment_clear(ego_pos, ego_pos + v * params.static_horizon)
}

/// Picks a feasible candidate. Candidates on the committed side come first,
/// then the smallest course change, then starboard, then the speed closest
/// to cruise.
///
/// The plan is ego → end of an avoidance leg along the chosen course → the
/// nearest downstream point on the global path.
pub fn cdca_replan(
    ego: &VesselState,
    estimates: &[TargetEstimate],
    occ: &OccupancyGrid,
    params: &CdcaParams,
    ctx: CdcaContext<'_>,
) -> PlanResult {
    let n = (params.heading_span_deg / params.heading_step_deg).floor() as i64;
    let step = params.heading_step_deg.to_radians();
    let mut candidates: Vec<Candidate> = Vec::new();
    for k in -n..=n {
        for &f in &params.speed_factors {
            candidates.push(Candidate {
                offset_steps: k,
                heading: wrap_angle(ctx.reference_course + k as f64 * step),
                speed: f * ctx.cruise_speed,
            });
        }
    }
    let off_side = |c: &Candidate| ctx.committed_side != 0.0 && c.offset_steps as f64 * ctx.committed_side < 0.0;
    candidates.sort_by(|a, b| {
        off_side(a)
            .cmp(&off_side(b))
            .then(a.offset_steps.abs().cmp(&b.offset_steps.abs()))
            .then(b.offset_steps.cmp(&a.offset_steps))
            .then((a.speed - ctx.cruise_speed).abs().total_cmp(&(b.speed - ctx.cruise_speed).abs()))
    });

    let chosen = candidates
        .into_iter()
        .find(|c| velocity_is_clear(ego.position, Vec2::from_polar(c.speed, c.heading), estimates, occ, params));

    let Some(c) = chosen else {
        return PlanResult::infeasible(PlanKind::Cdca, ego.position);
    };
    let dir = Vec2::from_heading(c.heading);
    let leg_end = ego.position + dir * (c.speed.max(ctx.cruise_speed * 0.5) * params.leg_time);
    let mut waypoints = vec![ego.position, leg_end];
    if let Some(rejoin) = downstream_rejoin(ctx.global_path, ego.position, leg_end) {
        if rejoin.distance(leg_end) > 1e-6 {
            waypoints.push(rejoin);
        }
    }
    PlanResult {
        kind: PlanKind::Cdca,
        waypoints,
        feasible: true,
        speed: Some(c.speed),
        heading: Some(c.heading),
        course_offset: Some(c.offset_steps as f64 * step),
    }
}

/// Closest point on the path to `from`, searched only at or beyond the
/// segment nearest to `ego`.
fn downstream_rejoin(path: &[Vec2], ego: Vec2, from: Vec2) -> Option<Vec2> {
    if path.len() < 2 {
        return path.first().copied();
    }
    let closest_on = |a: Vec2, b: Vec2, p: Vec2| {
        let ab = b - a;
        let t = if ab.norm_sq() > 0.0 { ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0) } else { 0.0 };
        a + ab * t
    };
    let ego_seg = (0..path.len() - 1)
        .min_by(|&i, &j| {
            let di = closest_on(path[i], path[i + 1], ego).distance(ego);
            let dj = closest_on(path[j], path[j + 1], ego).distance(ego);
            di.total_cmp(&dj)
        })
        .unwrap_or(0);
    (ego_seg..path.len() - 1)
        .map(|i| closest_on(path[i], path[i + 1], from))
        .min_by(|a, b| a.distance(from).total_cmp(&b.distance(from)))
}
