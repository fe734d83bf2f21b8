//! Per-target alpha-beta filtering of radar tracks.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::radar::{TargetId, Track};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphaBeta {
    /// position correction gain, (0, 1]
    pub alpha: f64,
    /// velocity correction gain, (0, 2)
    pub beta: f64,
}

impl Default for AlphaBeta {
    fn default() -> Self {
        Self { alpha: 0.5, beta: 0.1 }
    }
}

impl AlphaBeta {
    pub fn is_valid(&self) -> bool {
        self.alpha > 0.0 && self.alpha <= 1.0 && self.beta > 0.0 && self.beta < 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub target_id: TargetId,
    pub position: Vec2,
    pub velocity: Vec2,
    /// s since the last measurement was folded in
    pub age: f64,
    /// dB
    pub source_snr: f64,
    /// timestamp of the last folded-in measurement
    pub measured_at: f64,
}

/// Advances every estimate by `dt` and corrects those whose track has a
/// measurement newer than the estimate.
///
/// The velocity correction divides the residual by the time elapsed since
/// the previous correction, so coasting between scans does not inflate the
/// gain. Estimates come out ordered by target id.
pub fn fuse_tracks(
    previous: &[TargetEstimate],
    tracks: &[Track],
    dt: f64,
    gains: AlphaBeta,
) -> Vec<TargetEstimate> {
    let mut out: Vec<TargetEstimate> = tracks
        .iter()
        .map(|track| {
            let t_meas = track.last_timestamp();
            let meas = track.last_position();
            let Some(prev) = previous.iter().find(|e| e.target_id == track.target_id) else {
                return TargetEstimate {
                    target_id: track.target_id,
                    position: meas,
                    velocity: track.velocity_estimate,
                    age: 0.0,
                    source_snr: track.last_snr,
                    measured_at: t_meas,
                };
            };
            let predicted = prev.position + prev.velocity * dt;
            if t_meas > prev.measured_at {
                let residual = meas - predicted;
                let interval = t_meas - prev.measured_at;
                TargetEstimate {
                    position: predicted + residual * gains.alpha,
                    velocity: prev.velocity + residual * (gains.beta / interval),
                    age: 0.0,
                    source_snr: track.last_snr,
                    measured_at: t_meas,
                    ..*prev
                }
            } else {
                TargetEstimate { position: predicted, age: prev.age + dt, ..*prev }
            }
        })
        .collect();
    out.sort_by_key(|e| e.target_id);
    out
}
