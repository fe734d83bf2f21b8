//! Line-of-sight path following.

use serde::{Deserialize, Serialize};

use crate::dynamics::VesselState;
use crate::geom::{wrap_angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceParams {
    /// m
    pub lookahead: f64,
    /// waypoint switching radius, m
    pub accept_radius: f64,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        Self { lookahead: 800.0, accept_radius: 300.0 }
    }
}

/// Index of the waypoint currently steered to. Only moves forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GuidanceState {
    pub active: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceOutput {
    /// rad
    pub desired_heading: f64,
    /// m/s
    pub desired_speed: f64,
    /// the final waypoint is within the acceptance radius
    pub arrived: bool,
}

/// Heading towards the point `lookahead` metres ahead of the ego's
/// projection onto the active segment.
pub fn guide(
    waypoints: &[Vec2],
    state: &mut GuidanceState,
    ego: &VesselState,
    cruise_speed: f64,
    params: &GuidanceParams,
) -> GuidanceOutput {
    let hold = GuidanceOutput { desired_heading: ego.heading, desired_speed: 0.0, arrived: true };
    match waypoints.len() {
        0 => return hold,
        1 => {
            let to = waypoints[0] - ego.position;
            if to.norm() <= params.accept_radius {
                return hold;
            }
            return GuidanceOutput { desired_heading: to.bearing(), desired_speed: cruise_speed, arrived: false };
        }
        _ => {}
    }
    let last = waypoints.len() - 1;
    state.active = state.active.clamp(1, last);
    while state.active < last && ego.position.distance(waypoints[state.active]) <= params.accept_radius {
        state.active += 1;
    }
    if state.active == last && ego.position.distance(waypoints[last]) <= params.accept_radius {
        return hold;
    }
    let a = waypoints[state.active - 1];
    let b = waypoints[state.active];
    let ab = b - a;
    let course = ab.bearing();
    let tangent = ab * (1.0 / ab.norm());
    // starboard normal of the path
    let normal = Vec2::new(tangent.y, -tangent.x);
    let cross_track = (ego.position - a).dot(normal);
    GuidanceOutput {
        desired_heading: wrap_angle(course - (cross_track / params.lookahead).atan()),
        desired_speed: cruise_speed,
        arrived: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn on_path_follows_course() {
        let wps = [Vec2::ZERO, Vec2::new(0.0, 1000.0)];
        let mut st = GuidanceState::default();
        let out = guide(&wps, &mut st, &VesselState::at(Vec2::new(0.0, 200.0), 0.3, 5.0), 5.0, &GuidanceParams::default());
        assert!(out.desired_heading.abs() < 1e-12);
    }

    #[test]
    fn offset_to_starboard_steers_to_port() {
        let wps = [Vec2::ZERO, Vec2::new(0.0, 5000.0)];
        let mut st = GuidanceState::default();
        let p = GuidanceParams { lookahead: 100.0, accept_radius: 10.0 };
        let out = guide(&wps, &mut st, &VesselState::at(Vec2::new(100.0, 200.0), 0.0, 5.0), 5.0, &p);
        assert!((out.desired_heading + std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn advances_through_waypoints() {
        let wps = [Vec2::ZERO, Vec2::new(0.0, 1000.0), Vec2::new(1000.0, 1000.0)];
        let mut st = GuidanceState::default();
        let p = GuidanceParams { lookahead: 200.0, accept_radius: 50.0 };
        let out = guide(&wps, &mut st, &VesselState::at(Vec2::new(0.0, 980.0), 0.0, 5.0), 5.0, &p);
        assert_eq!(st.active, 2);
        assert!((out.desired_heading - FRAC_PI_2).abs() < 0.1);
        let done = guide(&wps, &mut st, &VesselState::at(Vec2::new(990.0, 1000.0), 0.0, 5.0), 5.0, &p);
        assert!(done.arrived);
        assert_eq!(done.desired_speed, 0.0);
    }
}
