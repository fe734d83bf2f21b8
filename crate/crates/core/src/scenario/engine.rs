use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Result, Scenario, ScenarioError, TargetConfig};
use crate::autonomy::{
    assess, cdca_replan, control_step, fuse_tracks, guide, plan_global, CdcaContext, ControllerState, GuidanceState,
    PlanKind, PlanResult, TargetEstimate, TriggerLatch,
};
use crate::bathymetry::build_occupancy;
use crate::dynamics::{step, wave_disturbance, SeaStateRealization, VesselState};
use crate::geom::{wrap_positive, Vec2};
use crate::log::{
    DetectionRecord, EstimateRecord, LogHeader, RiskRecord, SimulationLog, TargetMeta, TargetRecord, TickRecord,
    LOG_FORMAT_VERSION,
};
use crate::radar::{scan, ObstacleShape, RadarTarget, RadarWorld, TargetId, Track};
use crate::weather::severity_to_physical;

/// Id the ego uses in radar worlds; targets may not reuse it.
pub const EGO_ID: TargetId = 0;

/// Kinematic open-loop traffic.
struct ScriptedTarget<'a> {
    cfg: &'a TargetConfig,
    position: Vec2,
    heading: f64,
    next_waypoint: usize,
}

impl<'a> ScriptedTarget<'a> {
    fn new(cfg: &'a TargetConfig) -> Self {
        let mut t = Self { cfg, position: cfg.position, heading: wrap_positive(cfg.heading_deg.to_radians()), next_waypoint: 0 };
        t.aim();
        t
    }

    fn aim(&mut self) {
        if let Some(&wp) = self.cfg.waypoints.get(self.next_waypoint) {
            let to = wp - self.position;
            if to.norm() > 0.0 {
                self.heading = wrap_positive(to.bearing());
            }
        }
    }

    fn velocity(&self) -> Vec2 {
        Vec2::from_polar(self.cfg.speed, self.heading)
    }

    fn advance(&mut self, dt: f64) {
        let mut travel = self.cfg.speed * dt;
        while let Some(&wp) = self.cfg.waypoints.get(self.next_waypoint) {
            let gap = self.position.distance(wp);
            if gap > travel {
                break;
            }
            self.position = wp;
            travel -= gap;
            self.next_waypoint += 1;
            self.aim();
        }
        self.position += Vec2::from_heading(self.heading) * travel;
    }
}

fn plan_signature(p: &PlanResult) -> (PlanKind, Option<u64>, Option<u64>) {
    (p.kind, p.heading.map(f64::to_bits), p.speed.map(f64::to_bits))
}

/// Runs a validated scenario to completion. Per tick the pipeline is
/// sense → fuse → assess → plan → guide → control → environment → record →
/// step. Every random draw comes from one ChaCha8 stream seeded by
/// `scenario.seed`, so equal inputs give bit-identical logs.
pub fn run(scenario: &Scenario) -> Result<SimulationLog> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let env = &scenario.environment;
    let weather = severity_to_physical(&env.weather, &env.severity_map);
    let params = &scenario.ego.params;
    let au = &scenario.autonomy;
    let radar = &scenario.radar;
    let dt = scenario.dt;
    let cruise = scenario.ego.cruise_speed;

    let grid = scenario.depth_grid()?;
    let occ = build_occupancy(&grid, params.draft, scenario.ego.ukc.clearance(params.draft))?;
    let mut ego = VesselState::cruising(
        scenario.ego.position,
        wrap_positive(scenario.ego.heading_deg.to_radians()),
        scenario.ego.speed,
        params,
    );
    if occ.is_blocked_at(ego.position) {
        return Err(ScenarioError::GroundingConfig { x: ego.position.x, y: ego.position.y });
    }
    let global = plan_global(&occ, ego.position, scenario.ego.goal)?;
    if !global.feasible {
        return Err(ScenarioError::GoalUnreachable { x: scenario.ego.goal.x, y: scenario.ego.goal.y });
    }
    let sea = SeaStateRealization::realize(weather.significant_wave_height, weather.peak_period, &env.sea, &mut rng)?;

    let mut targets: Vec<ScriptedTarget> = scenario.targets.iter().map(ScriptedTarget::new).collect();
    targets.sort_by_key(|t| t.cfg.id);
    let mut tracks: Vec<Track> = Vec::new();
    let mut estimates: Vec<TargetEstimate> = Vec::new();
    let mut latch = TriggerLatch::new(au.trigger);
    let mut global_guidance = GuidanceState::default();
    let mut controller = ControllerState::default();
    // reroute being followed, kept until its rejoin point is reached
    let mut avoidance: Option<(PlanResult, GuidanceState)> = None;
    let mut committed_side = 0.0;
    let mut plan_id: u32 = 0;
    let mut last_signature = plan_signature(&global);

    let ticks = (scenario.duration / dt).round() as usize;
    let scan_period = 1.0 / radar.update_rate;
    let mut next_scan = 0.0;
    let mut records = Vec::with_capacity(ticks + 1);

    for i in 0..=ticks {
        let t = i as f64 * dt;

        // sense
        let mut detections = Vec::new();
        let scanned = t >= next_scan - 0.5 * dt;
        if scanned {
            let world = RadarWorld {
                targets: targets
                    .iter()
                    .map(|s| RadarTarget { id: s.cfg.id, position: s.position, velocity: s.velocity(), rcs: s.cfg.rcs })
                    .collect(),
                occluders: targets
                    .iter()
                    .map(|s| ObstacleShape::vessel(s.cfg.id, s.position, s.heading, s.cfg.length, s.cfg.beam))
                    .collect(),
            };
            detections = scan(&world, &ego, EGO_ID, radar, &weather, t, &mut rng)?;
            while next_scan <= t + 0.5 * dt {
                next_scan += scan_period;
            }
            for det in &detections {
                match tracks.iter_mut().find(|tr| tr.target_id == det.target_id) {
                    Some(tr) => tr.update(det, radar.track_window)?,
                    None => tracks.push(Track::new(det)),
                }
            }
        }

        // fuse, assess
        estimates = fuse_tracks(&estimates, &tracks, dt, au.alpha_beta);
        let assessment = assess(&estimates, ego.position, ego.velocity(), au.thresholds, t);
        let trigger = latch.update(assessment.trigger, t);

        // plan, guide
        let on_global = guide(&global.waypoints, &mut global_guidance, &ego, cruise, &au.guidance);
        let mut cdca_infeasible = false;
        if trigger {
            let ctx = CdcaContext {
                reference_course: on_global.desired_heading,
                cruise_speed: cruise,
                global_path: &global.waypoints,
                committed_side,
            };
            let plan = cdca_replan(&ego, &estimates, &occ, &au.cdca, ctx);
            if plan.feasible {
                if committed_side == 0.0 {
                    committed_side = plan.course_offset.map_or(0.0, |o| if o == 0.0 { 0.0 } else { o.signum() });
                }
                avoidance = Some((plan, GuidanceState::default()));
            } else {
                // keep following the last safe reroute, if any
                cdca_infeasible = true;
            }
        }
        let mut rerouting = None;
        if let Some((plan, gs)) = avoidance.as_mut() {
            let out = guide(&plan.waypoints, gs, &ego, plan.speed.unwrap_or(cruise), &au.guidance);
            if out.arrived {
                avoidance = None;
                committed_side = 0.0;
            } else {
                rerouting = Some(out);
            }
        }
        let (desired_heading, desired_speed, plan_kind) = match rerouting {
            Some(out) => (out.desired_heading, out.desired_speed, PlanKind::Cdca),
            None => (on_global.desired_heading, on_global.desired_speed, PlanKind::Global),
        };
        let signature = match &avoidance {
            Some((p, _)) => plan_signature(p),
            None => plan_signature(&global),
        };
        if signature != last_signature {
            plan_id += 1;
            last_signature = signature;
        }

        // control
        let commands = control_step(desired_heading, desired_speed, &ego, &au.control, params, dt, &mut controller);

        // environment
        let depth = grid.depth_at(ego.position).map_err(|_| ScenarioError::LeftGrid { tick: i })?;
        let wave = wave_disturbance(&sea, depth.max(0.1), t, params)?;

        records.push(TickRecord {
            time: t,
            ego,
            desired_heading,
            desired_speed,
            commands,
            depth,
            wave,
            scan: scanned,
            trigger,
            plan_id,
            plan_kind,
            cdca_infeasible,
            grounded: depth < params.draft,
            targets: targets
                .iter()
                .map(|s| {
                    let id = s.cfg.id;
                    TargetRecord {
                        id,
                        position: s.position,
                        heading: s.heading,
                        speed: s.cfg.speed,
                        detection: detections.iter().find(|d| d.target_id == id).map(|d| DetectionRecord {
                            position: d.measured_position,
                            velocity: d.measured_velocity,
                            snr: d.snr,
                            sigma_range: d.sigma_range,
                            sigma_velocity: d.sigma_velocity,
                        }),
                        estimate: estimates.iter().find(|e| e.target_id == id).map(|e| EstimateRecord {
                            position: e.position,
                            velocity: e.velocity,
                            age: e.age,
                        }),
                        risk: assessment.risk(id).map(|r| RiskRecord { dcpa: r.dcpa, tcpa: r.tcpa, flagged: r.flagged }),
                    }
                })
                .collect(),
        });

        if i < ticks {
            ego = step(&ego, commands, &wave, dt, params)?;
            if !ego.is_finite() {
                return Err(ScenarioError::NonFinite { tick: i + 1 });
            }
            for s in &mut targets {
                s.advance(dt);
            }
        }
    }

    let header = LogHeader {
        format_version: LOG_FORMAT_VERSION,
        scenario_name: scenario.name.clone(),
        scenario_hash: scenario.hash(),
        seed: scenario.seed,
        build_version: env!("CARGO_PKG_VERSION").to_owned(),
        dt,
        duration: scenario.duration,
        tick_count: records.len(),
        targets: targets.iter().map(|s| TargetMeta { id: s.cfg.id, name: s.cfg.label() }).collect(),
        safety_radius: au.cdca.safety_radius,
        scenario: serde_json::to_value(scenario).expect("scenario serializes"),
    };
    Ok(SimulationLog { header, records })
}
