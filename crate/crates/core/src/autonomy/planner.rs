//! Grid A* on the occupancy map with greedy string pulling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bathymetry::OccupancyGrid;
use crate::geom::Vec2;

#[derive(Debug, Error, PartialEq)]
pub enum PlannerError {
    #[error("start position ({x:.1}, {y:.1}) is not in a navigable cell")]
    StartBlocked { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    Global,
    Cdca,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub kind: PlanKind,
    pub waypoints: Vec<Vec2>,
    pub feasible: bool,
    /// commanded speed override, m/s
    pub speed: Option<f64>,
    /// chosen course for avoidance plans, rad
    pub heading: Option<f64>,
    /// chosen course minus the reference course, rad
    pub course_offset: Option<f64>,
}

impl PlanResult {
    pub fn infeasible(kind: PlanKind, at: Vec2) -> Self {
        Self { kind, waypoints: vec![at], feasible: false, speed: None, heading: None, course_offset: None }
    }
}

pub fn path_length(waypoints: &[Vec2]) -> f64 {
    waypoints.windows(2).map(|w| w[0].distance(w[1])).sum()
}

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, ties broken by index for a reproducible expansion order
        other.f.total_cmp(&self.f).then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Neighbour offsets (drow, dcol) and their cost in cells.
const MOVES: [(i64, i64, f64); 8] = [
    (1, 0, 1.0),
    (-1, 0, 1.0),
    (0, 1, 1.0),
    (0, -1, 1.0),
    (1, 1, std::f64::consts::SQRT_2),
    (1, -1, std::f64::consts::SQRT_2),
    (-1, 1, std::f64::consts::SQRT_2),
    (-1, -1, std::f64::consts::SQRT_2),
];

/// Navigable 8-neighbours of `(r, c)`. Diagonal moves that would clip a
/// blocked orthogonal neighbour are not allowed.
pub fn neighbours(occ: &OccupancyGrid, r: usize, c: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
    let g = *occ.geometry();
    let free = move |r: i64, c: i64| {
        r >= 0 && c >= 0 && (r as usize) < g.rows && (c as usize) < g.cols && !occ.is_blocked(r as usize, c as usize)
    };
    MOVES.iter().filter_map(move |&(dr, dc, cost)| {
        let (nr, nc) = (r as i64 + dr, c as i64 + dc);
        if !free(nr, nc) {
            return None;
        }
        if dr != 0 && dc != 0 && (!free(r as i64 + dr, c as i64) || !free(r as i64, c as i64 + dc)) {
            return None;
        }
        Some((nr as usize, nc as usize, cost))
    })
}

/// Cell sequence of a shortest 8-connected path, or `None` if unreachable.
pub fn astar_cells(occ: &OccupancyGrid, start: (usize, usize), goal: (usize, usize)) -> Option<Vec<(usize, usize)>> {
    let g = *occ.geometry();
    if occ.is_blocked(start.0, start.1) || occ.is_blocked(goal.0, goal.1) {
        return None;
    }
    let n = g.len();
    let h = |r: usize, c: usize| ((r as f64 - goal.0 as f64).powi(2) + (c as f64 - goal.1 as f64).powi(2)).sqrt();
    let mut cost = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let s = g.index(start.0, start.1);
    cost[s] = 0.0;
    open.push(Open { f: h(start.0, start.1), idx: s });
    let goal_idx = g.index(goal.0, goal.1);
    while let Some(Open { idx, .. }) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == goal_idx {
            break;
        }
        let (r, c) = (idx / g.cols, idx % g.cols);
        for (nr, nc, step) in neighbours(occ, r, c) {
            let ni = g.index(nr, nc);
            let tentative = cost[idx] + step;
            if tentative < cost[ni] {
                cost[ni] = tentative;
                parent[ni] = idx;
                open.push(Open { f: tentative + h(nr, nc), idx: ni });
            }
        }
    }
    if !closed[goal_idx] {
        return None;
    }
    let mut cells = vec![goal];
    let mut cur = goal_idx;
    while cur != s {
        cur = parent[cur];
        cells.push((cur / g.cols, cur % g.cols));
    }
    cells.reverse();
    Some(cells)
}

/// Shortest navigable route from `start` to `goal`.
///
/// The start must sit in a navigable cell. An unreachable or blocked goal
/// gives an infeasible result holding only the start.
pub fn plan_global(occ: &OccupancyGrid, start: Vec2, goal: Vec2) -> Result<PlanResult, PlannerError> {
    let g = *occ.geometry();
    let start_cell = match g.cell_of(start) {
        Some(c) if !occ.is_blocked(c.0, c.1) => c,
        _ => return Err(PlannerError::StartBlocked { x: start.x, y: start.y }),
    };
    let Some(goal_cell) = g.cell_of(goal) else {
        return Ok(PlanResult::infeasible(PlanKind::Global, start));
    };
    let Some(cells) = astar_cells(occ, start_cell, goal_cell) else {
        return Ok(PlanResult::infeasible(PlanKind::Global, start));
    };
    let mut points = Vec::with_capacity(cells.len());
    points.push(start);
    if cells.len() > 2 {
        points.extend(cells[1..cells.len() - 1].iter().map(|&(r, c)| g.center(r, c)));
    }
    points.push(goal);
    let mut waypoints = string_pull(occ, &points);
    waypoints.dedup_by(|a, b| a.distance(*b) < 1e-9);
    Ok(PlanResult { kind: PlanKind::Global, waypoints, feasible: true, speed: None, heading: None, course_offset: None })
}

/// Greedy shortcutting: from each anchor jump to the farthest point still
/// reachable along a clear straight segment.
fn string_pull(occ: &OccupancyGrid, points: &[Vec2]) -> Vec<Vec2> {
    let mut out = vec![points[0]];
    let mut anchor = 0;
    while anchor < points.len() - 1 {
        let mut next = anchor + 1;
        for j in (anchor + 2..points.len()).rev() {
            if occ.segment_clear(points[anchor], points[j]) {
                next = j;
                break;
            }
        }
        out.push(points[next]);
        anchor = next;
    }
    out
}
