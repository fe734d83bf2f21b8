//! Reduced 3-DOF ship dynamics with depth-aware wave disturbance.
//!
//! Yaw follows the first-order Nomoto model `T·ṙ + r = K·δ`, surge relaxes
//! toward `prop·U_max` with time constant `τ_U`, and the rudder slews at a
//! bounded rate. Waves come from a JONSWAP realization whose components are
//! re-dispersed for the local water depth.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{wrap_angle, Vec2};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("time step {0} s is outside (0, 0.2]")]
    BadTimeStep(f64),
    #[error("frequency list is empty or not positive ascending")]
    BadFrequencies,
    #[error("dispersion relation did not converge for omega={omega}, depth={depth}")]
    NoConvergence { omega: f64, depth: f64 },
    #[error("vessel state became non-finite")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

pub const MAX_DT: f64 = 0.2;

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::NotPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselState {
    pub position: Vec2,
    /// rad, nautical, wrapped to (−π, π]
    pub heading: f64,
    /// m/s, surge
    pub speed: f64,
    /// rad/s
    pub yaw_rate: f64,
    /// rad
    pub rudder_angle: f64,
    /// [0, 1]
    pub propeller_setting: f64,
}

impl VesselState {
    pub fn at(position: Vec2, heading: f64, speed: f64) -> Self {
        Self {
            position,
            heading: wrap_angle(heading),
            speed,
            yaw_rate: 0.0,
            rudder_angle: 0.0,
            propeller_setting: 0.0,
        }
    }

    /// State in steady straight-line motion for the given hull.
    pub fn cruising(position: Vec2, heading: f64, speed: f64, params: &VesselParams) -> Self {
        Self {
            propeller_setting: (speed / params.max_speed).clamp(0.0, 1.0),
            ..Self::at(position, heading, speed)
        }
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_polar(self.speed, self.heading)
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.heading.is_finite()
            && self.speed.is_finite()
            && self.yaw_rate.is_finite()
            && self.rudder_angle.is_finite()
            && self.propeller_setting.is_finite()
    }
}

/// Per-axis scaling from wave slope to equivalent loads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveGains {
    /// surge acceleration per unit of `g·slope`
    pub surge: f64,
    /// lateral drift velocity (m/s) per unit of `g·slope`
    pub sway: f64,
    /// yaw acceleration (rad/s²) per unit of `g·curvature`
    pub yaw: f64,
}

impl Default for WaveGains {
    fn default() -> Self {
        Self { surge: 0.1, sway: 0.5, yaw: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VesselParams {
    /// m
    pub length: f64,
    /// m
    pub beam: f64,
    /// m
    pub draft: f64,
    /// Nomoto gain K, 1/s
    pub nomoto_gain: f64,
    /// Nomoto time constant T, s
    pub nomoto_time_constant: f64,
    /// s
    pub speed_time_constant: f64,
    /// m/s
    pub max_speed: f64,
    /// rad
    pub max_rudder: f64,
    /// rad/s
    pub rudder_rate_limit: f64,
    pub wave_gain: WaveGains,
}

impl Default for VesselParams {
    fn default() -> Self {
        Self::s175()
    }
}

impl VesselParams {
    /// S175 containership with a reduced steering/surge model.
    pub fn s175() -> Self {
        Self {
            length: 175.0,
            beam: 25.4,
            draft: 9.5,
            nomoto_gain: 0.05,
            nomoto_time_constant: 80.0,
            speed_time_constant: 60.0,
            max_speed: 12.0,
            max_rudder: 35f64.to_radians(),
            rudder_rate_limit: 3f64.to_radians(),
            wave_gain: WaveGains::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("length", self.length)?;
        positive("beam", self.beam)?;
        positive("draft", self.draft)?;
        positive("nomoto_gain", self.nomoto_gain)?;
        positive("nomoto_time_constant", self.nomoto_time_constant)?;
        positive("speed_time_constant", self.speed_time_constant)?;
        positive("max_speed", self.max_speed)?;
        positive("max_rudder", self.max_rudder)?;
        positive("rudder_rate_limit", self.rudder_rate_limit)?;
        if self.max_rudder >= PI / 2.0 {
            return Err(DynamicsError::NotPositive { name: "max_rudder below 90°", value: self.max_rudder });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Waves
// ---------------------------------------------------------------------------

/// JONSWAP spectral density `S(ω)` in m²·s.
///
/// Uses the Goda normalization `1 − 0.287·ln γ` so `4·√m₀ ≈ Hs`.
pub fn jonswap_spectrum(hs: f64, tp: f64, gamma: f64, omegas: &[f64]) -> Result<Vec<f64>> {
    if hs < 0.0 || !hs.is_finite() {
        return Err(DynamicsError::NotPositive { name: "significant wave height", value: hs });
    }
    positive("peak period", tp)?;
    positive("peak enhancement", gamma)?;
    if omegas.is_empty() || omegas[0] <= 0.0 || omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DynamicsError::BadFrequencies);
    }
    let wp = TAU / tp;
    let norm = 1.0 - 0.287 * gamma.ln();
    Ok(omegas
        .iter()
        .map(|&w| {
            let sigma = if w <= wp { 0.07 } else { 0.09 };
            let r = (-(w - wp).powi(2) / (2.0 * sigma * sigma * wp * wp)).exp();
            norm * 5.0 / 16.0 * hs * hs * wp.powi(4) / w.powi(5)
                * (-1.25 * (wp / w).powi(4)).exp()
                * gamma.powf(r)
        })
        .collect())
}

/// Solves `ω² = g·k·tanh(k·h)` for `k` by Newton iteration.
pub fn finite_depth_wavenumber(omega: f64, depth: f64) -> Result<f64> {
    positive("omega", omega)?;
    positive("depth", depth)?;
    let w2 = omega * omega;
    let mut k = w2 / GRAVITY;
    for _ in 0..100 {
        let th = (k * depth).tanh();
        let residual = GRAVITY * k * th - w2;
        if residual.abs() < 1e-9 * w2 {
            return Ok(k);
        }
        let slope = GRAVITY * th + GRAVITY * k * depth * (1.0 - th * th);
        let next = k - residual / slope;
        k = if next > 0.0 { next } else { k / 2.0 };
    }
    Err(DynamicsError::NoConvergence { omega, depth })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveComponent {
    /// m
    pub amplitude: f64,
    /// rad/s
    pub omega: f64,
    /// deep-water wavenumber, 1/m
    pub wavenumber: f64,
    /// rad in [0, 2π)
    pub phase: f64,
}

/// Long-crested random sea as a sum of harmonic components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaStateRealization {
    pub components: Vec<WaveComponent>,
    pub hs: f64,
    pub tp: f64,
    /// wave propagation direction relative to the bow, rad
    pub relative_direction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeaSpectrumConfig {
    pub gamma: f64,
    pub components: usize,
    /// rad/s
    pub omega_min: f64,
    /// rad/s
    pub omega_max: f64,
    /// rad, relative to the bow
    pub relative_direction: f64,
}

impl Default for SeaSpectrumConfig {
    fn default() -> Self {
        Self {
            gamma: 3.3,
            components: 48,
            omega_min: 0.2,
            omega_max: 3.0,
            relative_direction: 45f64.to_radians(),
        }
    }
}

impl SeaStateRealization {
    pub fn calm() -> Self {
        Self { components: Vec::new(), hs: 0.0, tp: 1.0, relative_direction: 0.0 }
    }

    /// Draws one realization: one frequency jittered inside each equal-width
    /// bin, then one uniform phase per component.
    pub fn realize<R: Rng + ?Sized>(hs: f64, tp: f64, cfg: &SeaSpectrumConfig, rng: &mut R) -> Result<Self> {
        if cfg.components == 0 || !(cfg.omega_max > cfg.omega_min && cfg.omega_min > 0.0) {
            return Err(DynamicsError::BadFrequencies);
        }
        let width = (cfg.omega_max - cfg.omega_min) / cfg.components as f64;
        let omegas: Vec<f64> = (0..cfg.components)
            .map(|i| cfg.omega_min + width * (i as f64 + rng.random_range(0.05..0.95)))
            .collect();
        let density = jonswap_spectrum(hs, tp, cfg.gamma, &omegas)?;
        let components = omegas
            .iter()
            .zip(density)
            .map(|(&omega, s)| WaveComponent {
                amplitude: (2.0 * s * width).sqrt(),
                omega,
                wavenumber: omega * omega / GRAVITY,
                phase: rng.random_range(0.0..TAU),
            })
            .collect();
        Ok(Self { components, hs, tp, relative_direction: cfg.relative_direction })
    }

    /// Wavenumbers at a given depth; components not feeling the bottom keep
    /// their deep-water value.
    pub fn wavenumbers_at(&self, depth: f64) -> Result<Vec<f64>> {
        self.components
            .iter()
            .map(|c| {
                if c.wavenumber * depth < PI {
                    finite_depth_wavenumber(c.omega, depth)
                } else {
                    Ok(c.wavenumber)
                }
            })
            .collect()
    }
}

/// Wave loads expressed as equivalent accelerations and drift.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WaveDisturbance {
    /// m/s²
    pub surge_accel: f64,
    /// m/s, lateral
    pub sway_drift: f64,
    /// rad/s²
    pub yaw_accel: f64,
}

impl WaveDisturbance {
    pub const NONE: WaveDisturbance = WaveDisturbance { surge_accel: 0.0, sway_drift: 0.0, yaw_accel: 0.0 };
}

pub fn wave_disturbance(
    sea: &SeaStateRealization,
    depth_here: f64,
    t: f64,
    params: &VesselParams,
) -> Result<WaveDisturbance> {
    positive("depth", depth_here)?;
    let ks = sea.wavenumbers_at(depth_here)?;
    let mut slope = 0.0;
    let mut curvature = 0.0;
    for (c, k) in sea.components.iter().zip(ks) {
        let (s, co) = (c.omega * t + c.phase).sin_cos();
        slope += c.amplitude * k * s;
        curvature += c.amplitude * k * k * co;
    }
    let (sin_b, cos_b) = sea.relative_direction.sin_cos();
    let g = &params.wave_gain;
    Ok(WaveDisturbance {
        surge_accel: g.surge * GRAVITY * slope * cos_b,
        sway_drift: g.sway * GRAVITY * slope * sin_b,
        yaw_accel: g.yaw * GRAVITY * curvature * sin_b * cos_b,
    })
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Commands {
    /// rad
    pub rudder: f64,
    /// [0, 1]
    pub propeller: f64,
}

/// Advances one vessel by `dt` with the explicit midpoint rule.
pub fn step(
    state: &VesselState,
    commands: Commands,
    disturbance: &WaveDisturbance,
    dt: f64,
    params: &VesselParams,
) -> Result<VesselState> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(DynamicsError::BadTimeStep(dt));
    }
    let rudder_cmd = commands.rudder.clamp(-params.max_rudder, params.max_rudder);
    let prop = commands.propeller.clamp(0.0, 1.0);
    let max_slew = params.rudder_rate_limit * dt;
    let rudder = (state.rudder_angle + (rudder_cmd - state.rudder_angle).clamp(-max_slew, max_slew))
        .clamp(-params.max_rudder, params.max_rudder);

    // x = (px, py, psi, u, r)
    let deriv = |x: [f64; 5]| -> [f64; 5] {
        let [_, _, psi, u, r] = x;
        let (s, c) = psi.sin_cos();
        let drift = disturbance.sway_drift;
        [
            u * s + drift * c,
            u * c - drift * s,
            r,
            (prop * params.max_speed - u) / params.speed_time_constant + disturbance.surge_accel,
            (params.nomoto_gain * rudder - r) / params.nomoto_time_constant + disturbance.yaw_accel,
        ]
    };
    let x0 = [state.position.x, state.position.y, state.heading, state.speed, state.yaw_rate];
    let k1 = deriv(x0);
    let mid: [f64; 5] = std::array::from_fn(|i| x0[i] + 0.5 * dt * k1[i]);
    let k2 = deriv(mid);
    let x1: [f64; 5] = std::array::from_fn(|i| x0[i] + dt * k2[i]);

    let next = VesselState {
        position: Vec2::new(x1[0], x1[1]),
        heading: wrap_angle(x1[2]),
        speed: x1[3].max(0.0),
        yaw_rate: x1[4],
        rudder_angle: rudder,
        propeller_setting: prop,
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(DynamicsError::NonFinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(mut s: VesselState, cmd: Commands, dt: f64, secs: f64, p: &VesselParams) -> VesselState {
        let n = (secs / dt).round() as usize;
        for _ in 0..n {
            s = step(&s, cmd, &WaveDisturbance::NONE, dt, p).unwrap();
        }
        s
    }

    #[test]
    fn straight_line_is_equilibrium() {
        let p = VesselParams::s175();
        let s0 = VesselState::cruising(Vec2::ZERO, 0.3, 10.0, &p);
        let cmd = Commands { rudder: 0.0, propeller: s0.propeller_setting };
        let s = run(s0, cmd, 0.05, 100.0, &p);
        assert_relative_eq!(s.heading, 0.3, epsilon = 1e-12);
        assert_relative_eq!(s.speed, 10.0, epsilon = 1e-9);
        let rest = VesselState::at(Vec2::new(5.0, 5.0), 1.0, 0.0);
        assert_eq!(run(rest, Commands::default(), 0.1, 10.0, &p), rest);
    }

    #[test]
    fn nomoto_steady_state_rate() {
        let p = VesselParams::s175();
        let s0 = VesselState::cruising(Vec2::ZERO, 0.0, 10.0, &p);
        let delta = 10f64.to_radians();
        let s = run(s0, Commands { rudder: delta, propeller: s0.propeller_setting }, 0.05, 1000.0, &p);
        assert_relative_eq!(s.yaw_rate, p.nomoto_gain * delta, max_relative = 0.01);
        assert!((s.rudder_angle - delta).abs() < 1e-12);
    }

    #[test]
    fn surge_first_order_response() {
        let p = VesselParams::s175();
        let s0 = VesselState::at(Vec2::ZERO, 0.0, 0.0);
        let s = run(s0, Commands { rudder: 0.0, propeller: 1.0 }, 0.05, p.speed_time_constant, &p);
        let expected = p.max_speed * (1.0 - (-1.0f64).exp());
        assert_relative_eq!(s.speed, expected, max_relative = 0.02);
    }

    #[test]
    fn rudder_rate_and_limits() {
        let p = VesselParams::s175();
        let mut s = VesselState::cruising(Vec2::ZERO, 0.0, 10.0, &p);
        let dt = 0.05;
        for _ in 0..1000 {
            let next = step(&s, Commands { rudder: 2.0, propeller: 0.5 }, &WaveDisturbance::NONE, dt, &p).unwrap();
            assert!((next.rudder_angle - s.rudder_angle).abs() <= p.rudder_rate_limit * dt + 1e-15);
            assert!(next.rudder_angle.abs() <= p.max_rudder);
            assert!(next.heading > -PI && next.heading <= PI);
            s = next;
        }
        assert_relative_eq!(s.rudder_angle, p.max_rudder);
        assert!(matches!(
            step(&s, Commands::default(), &WaveDisturbance::NONE, 0.0, &p),
            Err(DynamicsError::BadTimeStep(_))
        ));
        assert!(step(&s, Commands::default(), &WaveDisturbance::NONE, 0.5, &p).is_err());
    }

    #[test]
    fn halving_dt_barely_moves_endpoint() {
        let p = VesselParams::s175();
        let s0 = VesselState::cruising(Vec2::ZERO, 0.0, 8.0, &p);
        let cmd = Commands { rudder: 15f64.to_radians(), propeller: 0.9 };
        let a = run(s0, cmd, 0.1, 300.0, &p);
        let b = run(s0, cmd, 0.05, 300.0, &p);
        let path = 300.0 * 8.0;
        assert!(a.position.distance(b.position) < 1e-3 * path, "{:?} vs {:?}", a.position, b.position);
    }

    #[test]
    fn zero_hs_gives_zero_spectrum_and_disturbance() {
        let w: Vec<f64> = (1..100).map(|i| i as f64 * 0.03).collect();
        assert!(jonswap_spectrum(0.0, 8.0, 3.3, &w).unwrap().iter().all(|s| *s == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sea = SeaStateRealization::realize(0.0, 8.0, &SeaSpectrumConfig::default(), &mut rng).unwrap();
        let d = wave_disturbance(&sea, 20.0, 12.3, &VesselParams::s175()).unwrap();
        assert_eq!(d, WaveDisturbance::NONE);
        assert!(jonswap_spectrum(1.0, 8.0, 3.3, &[]).is_err());
    }

    #[test]
    fn spectrum_peaks_at_peak_frequency() {
        let step_w = 0.001;
        let w: Vec<f64> = (1..3000).map(|i| i as f64 * step_w).collect();
        let s = jonswap_spectrum(2.0, 10.0, 3.3, &w).unwrap();
        let imax = s.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!((w[imax] - TAU / 10.0).abs() <= step_w);
    }

    #[test]
    fn wavenumber_limits() {
        let w = 0.8;
        let deep = finite_depth_wavenumber(w, 1e4).unwrap();
        assert_relative_eq!(deep, w * w / GRAVITY, max_relative = 1e-3);
        let w = 0.05;
        let h = 5.0;
        let shallow = finite_depth_wavenumber(w, h).unwrap();
        assert_relative_eq!(shallow, w / (GRAVITY * h).sqrt(), max_relative = 0.01);
        assert!(finite_depth_wavenumber(0.0, 1.0).is_err());
    }

    #[test]
    fn realization_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sea = SeaStateRealization::realize(1.5, 8.0, &SeaSpectrumConfig::default(), &mut rng).unwrap();
        assert!(sea.components.windows(2).all(|w| w[0].omega < w[1].omega));
        assert!(sea.components.iter().all(|c| c.amplitude >= 0.0 && (0.0..TAU).contains(&c.phase)));
        let m0: f64 = sea.components.iter().map(|c| c.amplitude * c.amplitude / 2.0).sum();
        assert_relative_eq!(4.0 * m0.sqrt(), 1.5, max_relative = 0.05);
    }

    #[test]
    fn disturbance_is_deterministic_and_depth_only_changes_wavenumbers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = VesselParams::s175();
        let sea = SeaStateRealization::realize(1.0, 7.0, &SeaSpectrumConfig::default(), &mut rng).unwrap();
        let a = wave_disturbance(&sea, 15.0, 42.0, &p).unwrap();
        assert_eq!(a, wave_disturbance(&sea, 15.0, 42.0, &p).unwrap());
        let shallow = sea.wavenumbers_at(15.0).unwrap();
        let deep = sea.wavenumbers_at(5000.0).unwrap();
        for ((c, ks), kd) in sea.components.iter().zip(&shallow).zip(&deep) {
            assert_eq!(*kd, c.wavenumber);
            assert!(*ks >= c.wavenumber);
        }
    }
}
