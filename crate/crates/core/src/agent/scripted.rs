//! Privileged greedy builder.
//!
//! Reads the true grid and target, picks the next block operation, walks to a
//! spot from which the operation's face is in reach, aims, and acts. When no
//! reachable spot works it builds a pillar under its own feet and removes the
//! scaffold once every target block is in place.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::nav::{neighbors, standable, Node, Reach, MAX_STAND};
use super::Agent;
use crate::env::{
    angle_diff, apply_movement, break_target, on_ground, placement_target, yaw_of, Action, AgentPose, Env, Verb,
    CAMERA_LIMIT, HALF_WIDTH,
};
use crate::tasks::Subtask;
use crate::voxel::{BlockColor, CellCoord, Grid};

/// Distance from a stand center at which the agent counts as arrived.
pub const STAND_TOLERANCE: f64 = 0.18;
const WAYPOINT_TOLERANCE: f64 = 0.2;
/// Aim points are kept this far inside the interaction reach.
pub const AIM_REACH: f64 = 2.8;
/// Consecutive failed actions before the current goal is abandoned.
pub const MAX_FAILURES: u32 = 5;
const MAX_STALLS: u32 = 6;
const GOAL_STEP_BUDGET: u32 = 400;

const MOVES: [Verb; 4] = [Verb::StepForward, Verb::StepBackward, Verb::StepLeft, Verb::StepRight];
const DIRS6: [(i64, i64, i64); 6] = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];

fn cell_center(c: CellCoord) -> [f64; 3] {
    [c.x() as f64 + 0.5, c.y() as f64 + 0.5, c.z() as f64 + 0.5]
}

/// Sample points on the face of `cell` pointing along `d`.
fn face_points(cell: CellCoord, d: (i64, i64, i64)) -> [[f64; 3]; 5] {
    let c = cell_center(cell);
    let f = [c[0] + d.0 as f64 * 0.5, c[1] + d.1 as f64 * 0.5, c[2] + d.2 as f64 * 0.5];
    let (u, v) = match d {
        (_, 0, 0) => ([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
        (0, _, 0) => ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
        _ => ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
    };
    let at = |a: f64, b: f64| [f[0] + a * u[0] + b * v[0], f[1] + a * u[1] + b * v[1], f[2] + a * u[2] + b * v[2]];
    [at(0.0, 0.0), at(0.25, 0.0), at(-0.25, 0.0), at(0.0, 0.25), at(0.0, -0.25)]
}

/// Points whose hit would perform `s`.
fn aim_points(grid: &Grid, s: Subtask) -> Vec<[f64; 3]> {
    let cell = s.cell();
    let (x, y, z) = (cell.x(), cell.y(), cell.z());
    let mut out = Vec::new();
    for d in DIRS6 {
        let ground = d.1 == -1 && y == 0;
        let solid = ground || grid.is_solid(x + d.0, y + d.1, z + d.2);
        let usable = match s {
            Subtask::Add { .. } => solid,
            Subtask::Remove { .. } => !solid,
        };
        if usable {
            out.extend(face_points(cell, d));
        }
    }
    out
}

/// Whether acting from `pose` performs `s` exactly.
pub fn performs(pose: &AgentPose, grid: &Grid, s: Subtask) -> bool {
    match s {
        Subtask::Add { cell, .. } => placement_target(pose, grid).is_some_and(|t| t.cell == cell),
        Subtask::Remove { cell } => break_target(pose, grid) == Some(cell),
    }
}

fn angles_to(eye: [f64; 3], p: [f64; 3], current_yaw: f64) -> (f64, f64) {
    let (dx, dy, dz) = (p[0] - eye[0], p[1] - eye[1], p[2] - eye[2]);
    let h = dx.hypot(dz);
    let yaw = if h < 1e-9 { current_yaw } else { yaw_of(dx, dz) };
    (dy.atan2(h).to_degrees(), yaw)
}

/// Closest (in camera travel) orientation from which `s` succeeds at this position.
pub fn find_aim(pose: &AgentPose, grid: &Grid, s: Subtask) -> Option<(f64, f64)> {
    let eye = pose.eye();
    let mut best: Option<(f64, (f64, f64))> = None;
    for p in aim_points(grid, s) {
        let dist = ((p[0] - eye[0]).powi(2) + (p[1] - eye[1]).powi(2) + (p[2] - eye[2]).powi(2)).sqrt();
        if dist > AIM_REACH {
            continue;
        }
        let (pitch, yaw) = angles_to(eye, p, pose.yaw);
        let mut q = *pose;
        q.pitch = pitch;
        q.yaw = yaw;
        if !performs(&q, grid, s) {
            continue;
        }
        let cost = (pitch - pose.pitch).abs() + angle_diff(pose.yaw, yaw).abs();
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, (pitch, yaw)));
        }
    }
    best.map(|(_, a)| a)
}

fn pose_at(n: Node) -> AgentPose {
    let c = n.center();
    AgentPose::new(c[0], c[1], c[2])
}

fn within_reach_box(n: Node, cell: CellCoord) -> bool {
    (n.x - cell.x()).abs() <= 3 && (n.z - cell.z()).abs() <= 3 && cell.y() - n.h <= 4 && n.h - cell.y() <= 4
}

/// Nearest reachable node from which `s` can be performed.
pub fn stand_for(grid: &Grid, reach: &Reach, s: Subtask, banned: &HashSet<Node>) -> Option<Node> {
    reach
        .order
        .iter()
        .map(|&(n, _)| n)
        .filter(|n| !banned.contains(n) && within_reach_box(*n, s.cell()))
        .find(|&n| find_aim(&pose_at(n), grid, s).is_some())
}

/// A pillar of blocks placed under the agent's feet at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PillarPlan {
    pub base: Node,
    /// Cells bottom-up with the color each receives.
    pub cells: Vec<(CellCoord, BlockColor)>,
}

impl PillarPlan {
    pub fn top(&self) -> Node {
        Node::new(self.base.x, self.base.h + self.cells.len() as i64, self.base.z)
    }
}

/// Cheapest pillar from which `s` becomes possible (or which performs `s` itself).
pub fn pillar_for(
    grid: &Grid,
    target: &Grid,
    reach: &Reach,
    s: Subtask,
    banned: &HashSet<Node>,
    filler: BlockColor,
) -> Option<PillarPlan> {
    let mut best: Option<(u32, PillarPlan)> = None;
    for &(n, d) in &reach.order {
        if banned.contains(&n) || (n.x - s.cell().x()).abs() > 3 || (n.z - s.cell().z()).abs() > 3 {
            continue;
        }
        let mut g = grid.clone();
        let mut cells = Vec::new();
        for k in 1..=(MAX_STAND - n.h) {
            let Some(cell) = CellCoord::checked(n.x, n.h + k - 1, n.z) else {
                break;
            };
            if g.is_solid(cell.x(), cell.y(), cell.z()) {
                break;
            }
            let want = target.get(cell);
            let color = match s {
                Subtask::Add { cell: c, color } if c == cell => color,
                Subtask::Remove { cell: c } if c == cell => break,
                _ if !want.is_air() => want,
                _ => filler,
            };
            g.set(cell, color);
            cells.push((cell, color));
            let top = Node::new(n.x, n.h + k, n.z);
            if !standable(&g, top.x, top.h, top.z) {
                break;
            }
            let done = s.is_done(&g) || find_aim(&pose_at(top), &g, s).is_some();
            if done {
                let cost = d + 3 * k as u32;
                if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    best = Some((cost, PillarPlan { base: n, cells: cells.clone() }));
                }
                break;
            }
        }
    }
    best.map(|(_, p)| p)
}

fn supported(grid: &Grid, c: CellCoord) -> bool {
    c.y() == 0 || DIRS6.iter().any(|d| grid.is_solid(c.x() + d.0, c.y() + d.1, c.z() + d.2))
}

/// Candidate operations in priority order: wrong blocks, then the first
/// missing target block (preferring ones with a face to build against), then
/// scaffold removal top-down.
fn candidates(world: &Grid, target: &Grid, scaffolds: &BTreeSet<CellCoord>, under_feet: Option<CellCoord>) -> Vec<Subtask> {
    if let Some((cell, _)) = world
        .iter_blocks()
        .find(|&(c, v)| !scaffolds.contains(&c) && target.get(c) != v)
    {
        return vec![Subtask::Remove { cell }];
    }
    let missing: Vec<(CellCoord, BlockColor)> = target.iter_blocks().filter(|&(c, v)| world.get(c) != v).collect();
    if let Some(&(cell, color)) = missing.iter().find(|(c, _)| supported(world, *c)).or(missing.first()) {
        return vec![Subtask::Add { cell, color }];
    }
    let mut rest: Vec<CellCoord> = scaffolds.iter().copied().filter(|c| !world.get(*c).is_air()).collect();
    rest.sort_by_key(|c| (std::cmp::Reverse(c.y()), *c));
    if let Some(f) = under_feet.filter(|c| rest.contains(c)) {
        rest.retain(|c| *c != f);
        rest.insert(0, f);
    }
    rest.into_iter().map(|cell| Subtask::Remove { cell }).collect()
}

fn cell_below(n: Node) -> Option<CellCoord> {
    CellCoord::checked(n.x, n.h - 1, n.z)
}

/// Where the agent stands after performing `s` from `n` on `grid` (already updated).
fn node_after(grid: &Grid, n: Node, s: Subtask) -> Node {
    match s {
        Subtask::Add { cell, .. } if cell == CellCoord::new(n.x, n.h, n.z).unwrap_or(cell) && cell.y() == n.h => {
            Node::new(n.x, n.h + 1, n.z)
        }
        Subtask::Remove { cell } if Some(cell) == cell_below(n) => {
            let landing = (0..n.h).rev().find(|&y| grid.is_solid(n.x, y, n.z)).map_or(0, |y| y + 1);
            Node::new(n.x, landing, n.z)
        }
        _ => n,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSubtask {
    pub subtask: Subtask,
    /// Pillar placements made before the subtask.
    pub pillar: Vec<Subtask>,
    pub stand: Node,
    pub waypoints: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuilderPlan {
    pub steps: Vec<PlannedSubtask>,
    /// First subtask no stand or pillar could reach; the plan stops there.
    pub unreachable: Option<Subtask>,
    pub current: usize,
}

impl BuilderPlan {
    pub fn subtasks(&self) -> impl Iterator<Item = Subtask> + '_ {
        self.steps.iter().flat_map(|s| s.pillar.iter().copied().chain(std::iter::once(s.subtask)))
    }
}

/// Simulate the builder from `start` until `current` matches `target`.
pub fn plan(current: &Grid, target: &Grid, start: Node) -> BuilderPlan {
    let mut sim = current.clone();
    let mut scaffolds = BTreeSet::new();
    let mut node = start;
    let mut steps = Vec::new();
    let none = HashSet::new();
    let limit = 4 * (current.nonzero_count() + target.nonzero_count()) + 64;
    for _ in 0..limit {
        let cands = candidates(&sim, target, &scaffolds, cell_below(node));
        let Some(&first) = cands.first() else {
            break;
        };
        let reach = Reach::from(&sim, node);
        if let Some((s, stand)) = cands.iter().find_map(|&s| stand_for(&sim, &reach, s, &none).map(|n| (s, n))) {
            steps.push(PlannedSubtask {
                subtask: s,
                pillar: Vec::new(),
                stand,
                waypoints: reach.path_to(stand).unwrap_or_default(),
            });
            s.apply(&mut sim);
            if let Subtask::Remove { cell } = s {
                scaffolds.remove(&cell);
            }
            node = node_after(&sim, stand, s);
            continue;
        }
        let Some(p) = pillar_for(&sim, target, &reach, first, &none, BlockColor::BLUE) else {
            return BuilderPlan {
                steps,
                unreachable: Some(first),
                current: 0,
            };
        };
        let mut pillar = Vec::new();
        for &(cell, color) in &p.cells {
            sim.set(cell, color);
            if target.get(cell) != color {
                scaffolds.insert(cell);
            }
            pillar.push(Subtask::Add { cell, color });
        }
        let top = p.top();
        if !first.is_done(&sim) {
            first.apply(&mut sim);
            if let Subtask::Remove { cell } = first {
                scaffolds.remove(&cell);
            }
        }
        steps.push(PlannedSubtask {
            subtask: first,
            pillar,
            stand: top,
            waypoints: reach.path_to(p.base).unwrap_or_default(),
        });
        node = node_after(&sim, top, first);
    }
    BuilderPlan {
        steps,
        unreachable: None,
        current: 0,
    }
}

/// Resting node of the agent: the column under its center, or an overlapped
/// column that supports it when standing on an edge.
pub fn resting_node(pose: &AgentPose, grid: &Grid) -> Option<Node> {
    if !on_ground(pose, grid) {
        return None;
    }
    let h = pose.y.round();
    if (pose.y - h).abs() > 1e-6 {
        return None;
    }
    let h = h as i64;
    let mut best: Option<(f64, Node)> = None;
    for dx in [-HALF_WIDTH, 0.0, HALF_WIDTH] {
        for dz in [-HALF_WIDTH, 0.0, HALF_WIDTH] {
            let n = Node::new((pose.x + dx).floor() as i64, h, (pose.z + dz).floor() as i64);
            if !standable(grid, n.x, n.h, n.z) {
                continue;
            }
            let c = n.center();
            let d = (c[0] - pose.x).hypot(c[2] - pose.z);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, n));
            }
        }
    }
    best.map(|(_, n)| n)
}

fn hdist(pose: &AgentPose, n: Node) -> f64 {
    let c = n.center();
    (pose.x - c[0]).hypot(pose.z - c[2])
}

fn camera_toward(pose: &AgentPose, pitch: f64, yaw: f64) -> (f64, f64) {
    let dp = (pitch - pose.pitch).clamp(-CAMERA_LIMIT, CAMERA_LIMIT);
    let dy = angle_diff(pose.yaw, yaw).clamp(-CAMERA_LIMIT, CAMERA_LIMIT);
    (dp, dy)
}

fn turned(pose: &AgentPose, dp: f64, dy: f64) -> AgentPose {
    let mut p = *pose;
    p.turn(dp, dy);
    p
}

/// Greedy move toward the center of `to` while turning toward `(pitch, yaw)`.
fn steer(pose: &AgentPose, grid: &Grid, to: Node, look: (f64, f64)) -> Action {
    let (dp, dy) = camera_toward(pose, look.0, look.1);
    let t = turned(pose, dp, dy);
    let d0 = hdist(pose, to);
    let (verb, d) = MOVES
        .iter()
        .map(|&v| (v, hdist(&apply_movement(&t, v, grid), to)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("four moves");
    let grounded = on_ground(pose, grid);
    if d < d0 - 1e-9 {
        Action::new(verb, dp, dy)
    } else if grounded && to.h as f64 > pose.y + 0.5 {
        Action::new(Verb::Jump, dp, dy)
    } else {
        Action::new(Verb::Noop, dp, dy)
    }
}

#[derive(Debug, Clone)]
struct Goal {
    subtask: Subtask,
    stand: Node,
    path: Vec<Node>,
    pillar: Option<PillarPlan>,
    steps: u32,
}

#[derive(Debug, Clone, Copy)]
struct Expect {
    cell: CellCoord,
    new: BlockColor,
    scaffold: bool,
}

/// Closed-loop builder over the true environment state.
#[derive(Debug, Clone, Default)]
pub struct ScriptedAgent {
    scaffolds: BTreeSet<CellCoord>,
    goal: Option<Goal>,
    banned: HashSet<Node>,
    failures: u32,
    stalls: u32,
    expect: Option<Expect>,
    last_pose: Option<AgentPose>,
    moved: bool,
    /// Number of times a goal was abandoned.
    pub replans: u32,
}

impl ScriptedAgent {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scaffolds(&self) -> impl Iterator<Item = &CellCoord> {
        self.scaffolds.iter()
    }

    fn observe(&mut self, world: &Grid, pose: &AgentPose) {
        if let Some(e) = self.expect.take() {
            if world.get(e.cell) == e.new {
                self.failures = 0;
                if e.new.is_air() {
                    self.scaffolds.remove(&e.cell);
                } else if e.scaffold {
                    self.scaffolds.insert(e.cell);
                }
                self.banned.clear();
            } else {
                self.failures += 1;
            }
        }
        if self.moved {
            let same = self.last_pose.is_some_and(|l| (l.x, l.y, l.z) == (pose.x, pose.y, pose.z));
            self.stalls = if same { self.stalls + 1 } else { 0 };
        }
        self.moved = false;
        self.last_pose = Some(*pose);
        self.scaffolds.retain(|c| !world.get(*c).is_air());
    }

    fn abandon(&mut self) {
        if let Some(g) = self.goal.take() {
            self.banned.insert(g.stand);
            if let Some(p) = g.pillar {
                self.banned.insert(p.base);
            }
        }
        self.failures = 0;
        self.stalls = 0;
        self.replans += 1;
    }

    fn make_goal(&mut self, world: &Grid, target: &Grid, node: Node, cands: &[Subtask], filler: BlockColor) -> Option<Goal> {
        let reach = Reach::from(world, node);
        for attempt in 0..2 {
            if let Some((s, stand)) = cands
                .iter()
                .find_map(|&s| stand_for(world, &reach, s, &self.banned).map(|n| (s, n)))
            {
                return Some(Goal {
                    subtask: s,
                    stand,
                    path: reach.path_to(stand).unwrap_or_default(),
                    pillar: None,
                    steps: 0,
                });
            }
            if let Some(p) = pillar_for(world, target, &reach, cands[0], &self.banned, filler) {
                return Some(Goal {
                    subtask: cands[0],
                    stand: p.base,
                    path: reach.path_to(p.base).unwrap_or_default(),
                    pillar: Some(p),
                    steps: 0,
                });
            }
            if attempt == 0 && !self.banned.is_empty() {
                self.banned.clear();
            } else {
                break;
            }
        }
        // nothing works from here: climb one block for a new vantage point
        let cell = CellCoord::checked(node.x, node.h, node.z)?;
        let mut g = world.clone();
        let color = if target.get(cell).is_air() { filler } else { target.get(cell) };
        g.set(cell, color);
        standable(&g, node.x, node.h + 1, node.z).then(|| Goal {
            subtask: cands[0],
            stand: node,
            path: Vec::new(),
            pillar: Some(PillarPlan {
                base: node,
                cells: vec![(cell, color)],
            }),
            steps: 0,
        })
    }

    fn edit(&mut self, verb: Verb, dp: f64, dy: f64, cell: CellCoord, new: BlockColor, target: &Grid) -> Action {
        self.expect = Some(Expect {
            cell,
            new,
            scaffold: target.get(cell) != new,
        });
        Action::new(verb, dp, dy)
    }

    fn movement(&mut self, a: Action) -> Action {
        self.moved = true;
        a
    }

    fn decide(&mut self, env: &Env) -> Action {
        let world = env.world();
        let target = env.target();
        let pose = *env.pose();
        let selected = env.inventory().selected;
        self.observe(world, &pose);
        if self.failures >= MAX_FAILURES || self.stalls >= MAX_STALLS {
            self.abandon();
        }
        if let Some(g) = &mut self.goal {
            g.steps += 1;
            if g.steps > GOAL_STEP_BUDGET {
                self.abandon();
            }
        }

        let node = resting_node(&pose, world);
        let cands = candidates(world, target, &self.scaffolds, node.and_then(cell_below));
        if cands.is_empty() {
            return Action::verb(Verb::Noop);
        }
        if self.goal.as_ref().is_some_and(|g| !cands.contains(&g.subtask)) {
            self.goal = None;
        }
        let look_at = |g: &Goal, p: &AgentPose| angles_to(p.eye(), cell_center(g.subtask.cell()), p.yaw);

        let Some(node) = node else {
            // airborne or mid-step: keep heading for the next waypoint
            let Some(g) = &self.goal else {
                return Action::verb(Verb::Noop);
            };
            let next = g.path.first().copied().unwrap_or(g.stand);
            let a = steer(&pose, world, next, look_at(g, &pose));
            return self.movement(a);
        };

        if self.goal.is_none() {
            self.goal = self.make_goal(world, target, node, &cands, selected);
            if self.goal.is_none() {
                return Action::verb(Verb::Noop);
            }
        }
        let mut g = self.goal.take().expect("goal set");
        let action = self.pursue(&mut g, world, target, &pose, node, selected);
        if self.goal.is_none() && !matches!(action, GoalOutcome::Drop) {
            self.goal = Some(g);
        }
        match action {
            GoalOutcome::Act(a) => a,
            GoalOutcome::Move(a) => self.movement(a),
            GoalOutcome::Drop => Action::verb(Verb::Noop),
        }
    }

    fn pursue(
        &mut self,
        g: &mut Goal,
        world: &Grid,
        target: &Grid,
        pose: &AgentPose,
        node: Node,
        selected: BlockColor,
    ) -> GoalOutcome {
        let look = angles_to(pose.eye(), cell_center(g.subtask.cell()), pose.yaw);

        // walk to the stand (or pillar base)
        let on_pillar = g.pillar.as_ref().is_some_and(|p| {
            node.x == p.base.x && node.z == p.base.z && node.h >= p.base.h && node.h < p.top().h
        });
        if node != g.stand && !on_pillar {
            if let Some(i) = g.path.iter().position(|&n| n == node) {
                if hdist(pose, node) <= WAYPOINT_TOLERANCE || i + 1 == g.path.len() {
                    g.path.drain(..=i);
                }
            } else if g.path.first().is_none_or(|&n| !neighbors(world, node).any(|m| m == n)) {
                let reach = Reach::from(world, node);
                match reach.path_to(g.stand) {
                    Some(p) => g.path = p,
                    None => return GoalOutcome::Drop,
                }
            }
            let next = g.path.first().copied().unwrap_or(g.stand);
            return GoalOutcome::Move(steer(pose, world, next, look));
        }
        let stand = if on_pillar { Node::new(node.x, node.h, node.z) } else { g.stand };
        let d = hdist(pose, stand);

        // pillar up under the feet
        if let Some(p) = &g.pillar {
            let top = p.top();
            if node.h < top.h {
                if d > STAND_TOLERANCE {
                    return GoalOutcome::Move(steer(pose, world, stand, (-90.0, pose.yaw)));
                }
                let Some(&(cell, color)) = p.cells.iter().find(|(c, _)| c.y() == node.h) else {
                    return GoalOutcome::Drop;
                };
                let color = if target.get(cell).is_air() { selected } else { color };
                let (dp, dy) = camera_toward(pose, -90.0, pose.yaw);
                if selected != color {
                    let v = Verb::select(color).expect("placeable");
                    return GoalOutcome::Act(Action::new(v, dp, dy));
                }
                let after = turned(pose, dp, dy);
                if placement_target(&after, world).is_some_and(|t| t.cell == cell && t.lifts_agent) {
                    return GoalOutcome::Act(self.edit(Verb::PlaceBlock, dp, dy, cell, color, target));
                }
                if dp == 0.0 && dy == 0.0 {
                    self.failures += 1;
                }
                return GoalOutcome::Act(Action::new(Verb::Noop, dp, dy));
            }
            g.pillar = None;
            g.stand = node;
            g.path.clear();
            if g.subtask.is_done(world) || find_aim(pose, world, g.subtask).is_none() {
                return GoalOutcome::Drop;
            }
        }

        // aim and act
        match find_aim(pose, world, g.subtask) {
            Some((pitch, yaw)) => {
                let (dp, dy) = camera_toward(pose, pitch, yaw);
                let after = turned(pose, dp, dy);
                if let Subtask::Add { color, .. } = g.subtask {
                    if selected != color {
                        let v = Verb::select(color).expect("placeable");
                        return GoalOutcome::Act(Action::new(v, dp, dy));
                    }
                }
                if performs(&after, world, g.subtask) {
                    let (verb, new) = match g.subtask {
                        Subtask::Add { color, .. } => (Verb::PlaceBlock, color),
                        Subtask::Remove { .. } => (Verb::BreakBlock, BlockColor::AIR),
                    };
                    let cell = match (verb, placement_target(&after, world)) {
                        (Verb::PlaceBlock, Some(t)) => t.cell,
                        _ => g.subtask.cell(),
                    };
                    return GoalOutcome::Act(self.edit(verb, dp, dy, cell, new, target));
                }
                if dp == 0.0 && dy == 0.0 {
                    self.failures += 1;
                }
                GoalOutcome::Act(Action::new(Verb::Noop, dp, dy))
            }
            None if d > 0.02 => GoalOutcome::Move(steer(pose, world, stand, look)),
            None => {
                self.failures += 1;
                GoalOutcome::Act(Action::new(Verb::Noop, 0.0, 0.0))
            }
        }
    }
}

enum GoalOutcome {
    Act(Action),
    Move(Action),
    Drop,
}

impl Agent for ScriptedAgent {
    fn act(&mut self, env: &Env) -> Action {
        self.decide(env)
    }

    fn reset(&mut self) {
        *self = ScriptedAgent::new();
    }
}
