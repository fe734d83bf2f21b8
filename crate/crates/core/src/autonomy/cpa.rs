//! Closest point of approach and the CDCA trigger.

use serde::{Deserialize, Serialize};

use super::fusion::TargetEstimate;
use crate::geom::Vec2;
use crate::radar::TargetId;

/// Relative speeds below this are treated as parallel motion.
const PARALLEL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cpa {
    /// m
    pub dcpa: f64,
    /// s, negative when the closest approach is in the past
    pub tcpa: f64,
}

pub fn cpa(ego_pos: Vec2, ego_vel: Vec2, target_pos: Vec2, target_vel: Vec2) -> Cpa {
    let dp = target_pos - ego_pos;
    let dv = target_vel - ego_vel;
    let vv = dv.norm_sq();
    if vv < PARALLEL_EPS {
        return Cpa { dcpa: dp.norm(), tcpa: 0.0 };
    }
    let tcpa = -dp.dot(dv) / vv;
    Cpa { dcpa: (dp + dv * tcpa.max(0.0)).norm(), tcpa }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// m
    pub dcpa: f64,
    /// s
    pub tcpa: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { dcpa: 1000.0, tcpa: 300.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRisk {
    pub target_id: TargetId,
    pub dcpa: f64,
    pub tcpa: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionAssessment {
    pub timestamp: f64,
    pub per_target: Vec<TargetRisk>,
    pub trigger: bool,
}

impl CollisionAssessment {
    pub fn risk(&self, id: TargetId) -> Option<&TargetRisk> {
        self.per_target.iter().find(|r| r.target_id == id)
    }
}

/// Flags a target when `0 < tcpa < T_th` and `dcpa < D_th`.
/// No hysteresis here: the trigger follows the flags tick by tick.
pub fn assess(
    estimates: &[TargetEstimate],
    ego_pos: Vec2,
    ego_vel: Vec2,
    thresholds: Thresholds,
    now: f64,
) -> CollisionAssessment {
    let per_target: Vec<TargetRisk> = estimates
        .iter()
        .map(|e| {
            let c = cpa(ego_pos, ego_vel, e.position, e.velocity);
            TargetRisk {
                target_id: e.target_id,
                dcpa: c.dcpa,
                tcpa: c.tcpa,
                flagged: c.tcpa > 0.0 && c.tcpa < thresholds.tcpa && c.dcpa < thresholds.dcpa,
            }
        })
        .collect();
    let trigger = per_target.iter().any(|r| r.flagged);
    CollisionAssessment { timestamp: now, per_target, trigger }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriggerPolicy {
    /// Off by default. When set, the trigger is held until the raw flags
    /// have stayed clear for `release_dwell` seconds.
    pub hysteresis: bool,
    /// s
    pub release_dwell: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TriggerLatch {
    policy: TriggerPolicy,
    clear_since: Option<f64>,
    active: bool,
}

impl TriggerLatch {
    pub fn new(policy: TriggerPolicy) -> Self {
        Self { policy, clear_since: None, active: false }
    }

    pub fn update(&mut self, raw: bool, now: f64) -> bool {
        if !self.policy.hysteresis {
            self.active = raw;
            return raw;
        }
        if raw {
            self.active = true;
            self.clear_since = None;
        } else if self.active {
            let since = *self.clear_since.get_or_insert(now);
            if now - since >= self.policy.release_dwell {
                self.active = false;
                self.clear_since = None;
            }
        }
        self.active
    }
}
