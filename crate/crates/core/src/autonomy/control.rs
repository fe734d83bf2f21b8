//! Heading PID and speed PI with conditional-integration anti-windup.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Commands, VesselParams, VesselState};
use crate::geom::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlGains {
    /// rudder rad per rad of heading error
    pub heading_kp: f64,
    /// rad per rad·s
    pub heading_ki: f64,
    /// rad per rad/s of yaw rate
    pub heading_kd: f64,
    /// propeller setting per m/s of speed error
    pub speed_kp: f64,
    pub speed_ki: f64,
}

impl Default for ControlGains {
    fn default() -> Self {
        Self { heading_kp: 4.0, heading_ki: 0.005, heading_kd: 140.0, speed_kp: 0.2, speed_ki: 0.005 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControllerState {
    pub heading_integral: f64,
    pub speed_integral: f64,
}

/// One controller update. The derivative acts on measured yaw rate, so a
/// jump in desired heading does not kick the rudder. An integrator only
/// accumulates while its output is unsaturated or the error drives it back
/// out of saturation.
pub fn control_step(
    desired_heading: f64,
    desired_speed: f64,
    ego: &VesselState,
    gains: &ControlGains,
    params: &VesselParams,
    dt: f64,
    state: &mut ControllerState,
) -> Commands {
    let e = wrap_angle(desired_heading - ego.heading);
    let unclamped = |i: f64| gains.heading_kp * e + gains.heading_ki * i - gains.heading_kd * ego.yaw_rate;
    let trial = state.heading_integral + e * dt;
    let u = unclamped(trial);
    if u.abs() <= params.max_rudder || u.signum() != e.signum() {
        state.heading_integral = trial;
    }
    let rudder = unclamped(state.heading_integral).clamp(-params.max_rudder, params.max_rudder);

    let eu = desired_speed - ego.speed;
    let ff = desired_speed / params.max_speed;
    let speed_out = |i: f64| ff + gains.speed_kp * eu + gains.speed_ki * i;
    let trial = state.speed_integral + eu * dt;
    let p = speed_out(trial);
    if (0.0..=1.0).contains(&p) || (p > 1.0 && eu < 0.0) || (p < 0.0 && eu > 0.0) {
        state.speed_integral = trial;
    }
    let propeller = speed_out(state.speed_integral).clamp(0.0, 1.0);
    Commands { rudder, propeller }
}
