//! Baseline autonomy pipeline, run in this order every tick:
//! fuse → assess → plan → guide → control.

pub mod control;
pub mod cpa;
pub mod fusion;
pub mod guidance;
pub mod planner;
pub mod vo;

pub use control::{control_step, ControlGains, ControllerState};
pub use cpa::{assess, cpa, Cpa, CollisionAssessment, TargetRisk, Thresholds, TriggerLatch, TriggerPolicy};
pub use fusion::{fuse_tracks, AlphaBeta, TargetEstimate};
pub use guidance::{guide, GuidanceOutput, GuidanceParams, GuidanceState};
pub use planner::{astar_cells, neighbours, plan_global, path_length, PlanKind, PlanResult, PlannerError};
pub use vo::{cdca_replan, in_velocity_obstacle, velocity_is_clear, CdcaContext, CdcaParams, MovingObstacle, VoError};
