//! The episode state machine.
//!
//! Each [`Env::step`] applies the camera delta, then the verb, then one
//! physics tick, and finally scores the step according to the configured
//! reward mode.

mod arrays;
mod action;
mod interact;
mod kinematics;
mod vector;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use action::{Action, UnknownVerb, Verb, CAMERA_LIMIT};
pub use interact::{
    break_target, placement_target, try_break, try_place, Inventory, InventoryMode, PlacementTarget, REACH,
    UNLIMITED_COUNT,
};
pub use kinematics::{
    angle_diff, apply_movement, body_collides, body_overlaps_cell, on_ground, tick_physics, view_vector, wrap_yaw,
    yaw_of, AgentPose, BODY_HEIGHT, EYE_HEIGHT, GRAVITY, HALF_WIDTH, JUMP_VELOCITY, STEP_LENGTH, TERMINAL_VELOCITY,
};

pub use arrays::{ObservationArrays, GRID_SHAPE, POV_SHAPE};
pub use vector::VecEnv;

use crate::render::{render, CameraParams, Image};
use crate::reward::{distance_reward, shaped_reward, step_reward, F1Report, IntersectionTracker};
use crate::tasks::{next_subtask, Subtask, TaskRecord};
use crate::voxel::{BlockChange, Grid, X_SIZE, Z_SIZE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("episode is over; call reset")]
    EpisodeOver,
    #[error("end_episode action is disabled in this configuration")]
    EndActionDisabled,
    #[error("malformed task: {0}")]
    MalformedTask(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Change in maximal intersection.
    #[default]
    MaxIntersectionDelta,
    /// Manhattan-distance shaping toward the current subtask block.
    ShapedSubtask,
}

/// Which observation fields a remote client may see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Image, chat, compass and inventory only.
    Visual,
    /// Adds agent position and the current grid.
    #[default]
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub max_steps: u32,
    pub reward_mode: RewardMode,
    pub render: bool,
    pub end_action_enabled: bool,
    pub inventory_mode: InventoryMode,
    pub profile: Profile,
    /// Report the maximum only over alignments that keep every placed block in the zone.
    pub prune_alignments: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            max_steps: 500,
            reward_mode: RewardMode::MaxIntersectionDelta,
            render: false,
            end_action_enabled: false,
            inventory_mode: InventoryMode::Unlimited,
            profile: Profile::Full,
            prune_alignments: false,
        }
    }
}

impl EpisodeConfig {
    /// Named environment profile: `"visual"` renders and hides the grid, `"full"` exposes it.
    pub fn for_profile(name: &str) -> Option<Self> {
        match name {
            "visual" => Some(EpisodeConfig {
                render: true,
                profile: Profile::Visual,
                ..Default::default()
            }),
            "full" => Some(EpisodeConfig::default()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if self.max_steps == 0 {
            return Err(EnvError::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Complete,
    TimeLimit,
    EndAction,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::Complete => "complete",
            TerminationReason::TimeLimit => "time_limit",
            TerminationReason::EndAction => "end_action",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub step: u32,
    pub pov: Option<Image>,
    pub inventory: [u32; 6],
    pub selected: u8,
    pub grid: Grid,
    /// `(x, y, z, pitch, yaw)`.
    pub pose: [f64; 5],
    /// Signed yaw offset (degrees) from the view direction to the zone center.
    pub compass: f64,
    pub chat: Arc<str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub intersection_size: usize,
    pub f1_so_far: f64,
    pub termination_reason: Option<TerminationReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
    /// Block edits made by this step (at most one).
    pub changes: Vec<BlockChange>,
}

pub const ZONE_CENTER: (f64, f64) = (X_SIZE as f64 / 2.0, Z_SIZE as f64 / 2.0);

/// Signed angle from the agent's yaw to the bearing of the zone center; 0 at the center.
pub fn compass(pose: &AgentPose) -> f64 {
    let dx = ZONE_CENTER.0 - pose.x;
    let dz = ZONE_CENTER.1 - pose.z;
    if dx.hypot(dz) < 1e-9 {
        return 0.0;
    }
    angle_diff(pose.yaw, yaw_of(dx, dz))
}

/// Spawn on top of the highest block of the center column.
pub fn spawn_pose(grid: &Grid) -> AgentPose {
    let (cx, cz) = ZONE_CENTER;
    let col_x = cx.floor() as i64;
    let col_z = cz.floor() as i64;
    let y = grid.column_top(col_x, col_z).map(|t| t as f64 + 1.0).unwrap_or(0.0);
    let mut pose = AgentPose::new(cx, y, cz);
    // rise until the body fits; only matters for overhangs above the column top
    while body_collides(pose.x, pose.y, pose.z, grid) {
        pose.y += 1.0;
    }
    pose
}

/// A single-agent build episode.
#[derive(Debug, Clone)]
pub struct Env {
    config: EpisodeConfig,
    camera: CameraParams,
    task_id: String,
    chat: Arc<str>,
    seed: u64,
    target: Grid,
    target_blocks: usize,
    world: Grid,
    pose: AgentPose,
    inventory: Inventory,
    tracker: IntersectionTracker,
    initial_intersection: usize,
    subtask: Option<Subtask>,
    steps: u32,
    done: Option<TerminationReason>,
}

impl Env {
    pub fn new(task: &TaskRecord, config: EpisodeConfig, seed: u64) -> Result<Self, EnvError> {
        config.validate()?;
        task.validate().map_err(EnvError::MalformedTask)?;
        let tracker = IntersectionTracker::new(&task.target_grid, &task.starting_grid)
            .with_pruning(config.prune_alignments);
        let mut env = Env {
            inventory: Inventory::new(config.inventory_mode),
            config,
            camera: CameraParams::default(),
            task_id: task.task_id.clone(),
            chat: Arc::from(task.instruction.as_str()),
            seed,
            target: task.target_grid.clone(),
            target_blocks: task.target_grid.nonzero_count(),
            world: task.starting_grid.clone(),
            pose: spawn_pose(&task.starting_grid),
            initial_intersection: tracker.size(),
            tracker,
            subtask: None,
            steps: 0,
            done: None,
        };
        env.subtask = next_subtask(&env.world, &env.target);
        Ok(env)
    }

    /// Start a new episode for `task`, returning the first observation.
    pub fn reset(&mut self, task: &TaskRecord, config: EpisodeConfig, seed: u64) -> Result<Observation, EnvError> {
        *self = Env::new(task, config, seed)?;
        Ok(self.observe())
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    pub fn task_id(&self) -> &str {
        &self.task_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn world(&self) -> &Grid {
        &self.world
    }

    pub fn target(&self) -> &Grid {
        &self.target
    }

    pub fn pose(&self) -> &AgentPose {
        &self.pose
    }

    pub fn inventory(&self) -> &Inventory {
        &self.inventory
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done.is_some()
    }

    pub fn termination(&self) -> Option<TerminationReason> {
        self.done
    }

    pub fn intersection_size(&self) -> usize {
        self.tracker.size()
    }

    pub fn initial_intersection(&self) -> usize {
        self.initial_intersection
    }

    /// Current subtask of the shaped reward.
    pub fn subtask(&self) -> Option<Subtask> {
        self.subtask
    }

    pub fn f1_so_far(&self) -> F1Report {
        let best = self.tracker.best().best;
        F1Report::from_counts(
            self.tracker.unpruned_size(),
            self.world.nonzero_count(),
            self.target_blocks,
            best,
        )
    }

    fn is_complete(&self) -> bool {
        self.tracker.unpruned_size() == self.target_blocks && self.world.nonzero_count() == self.target_blocks
    }

    pub fn observe(&self) -> Observation {
        Observation {
            step: self.steps,
            pov: self.config.render.then(|| render(&self.pose, &self.world, &self.camera)),
            inventory: self.inventory.counts,
            selected: self.inventory.selected.value(),
            grid: self.world.clone(),
            pose: self.pose.pose5(),
            compass: compass(&self.pose),
            chat: Arc::clone(&self.chat),
        }
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        if self.done.is_some() {
            return Err(EnvError::EpisodeOver);
        }
        let action = action.clamped();
        if action.verb == Verb::EndEpisode && !self.config.end_action_enabled {
            return Err(EnvError::EndActionDisabled);
        }
        self.pose.turn(action.camera[0], action.camera[1]);

        let subtask = self.subtask;
        let mut change = None;
        match action.verb {
            v if v.is_movement() => {
                self.pose = apply_movement(&self.pose, v, &self.world);
            }
            v => {
                match v {
                    Verb::PlaceBlock => change = try_place(&mut self.pose, &mut self.inventory, &mut self.world),
                    Verb::BreakBlock => change = try_break(&self.pose, &mut self.inventory, &mut self.world),
                    _ => {
                        if let Some(c) = v.selected_color() {
                            self.inventory.selected = c;
                        }
                    }
                }
                tick_physics(&mut self.pose, &self.world);
            }
        }

        let prev = self.tracker.size();
        let mut reward = 0.0;
        if let Some(ch) = change {
            let size = self.tracker.apply(ch).expect("environment edits always change the cell");
            reward = match self.config.reward_mode {
                RewardMode::MaxIntersectionDelta => step_reward(prev, size),
                RewardMode::ShapedSubtask => shaped_step_reward(ch, subtask, &self.pose),
            };
            self.subtask = next_subtask(&self.world, &self.target);
        }
        self.steps += 1;

        self.done = if self.is_complete() {
            Some(TerminationReason::Complete)
        } else if action.verb == Verb::EndEpisode {
            Some(TerminationReason::EndAction)
        } else if self.steps >= self.config.max_steps {
            Some(TerminationReason::TimeLimit)
        } else {
            None
        };

        Ok(StepResult {
            observation: self.observe(),
            reward,
            done: self.done.is_some(),
            info: StepInfo {
                intersection_size: self.tracker.size(),
                f1_so_far: self.f1_so_far().f1,
                termination_reason: self.done,
            },
            changes: change.into_iter().collect(),
        })
    }
}

/// Placements score by distance to the subtask cell (plus the under-feet bonus);
/// removals score by distance only while the subtask is itself a removal.
fn shaped_step_reward(change: BlockChange, subtask: Option<Subtask>, pose: &AgentPose) -> f64 {
    let Some(subtask) = subtask else {
        return 0.0;
    };
    let placed = !change.new.is_air();
    match (placed, subtask) {
        (true, _) => match pose.feet_cell() {
            Some(feet) => shaped_reward(change.cell, subtask.cell(), feet),
            None => distance_reward(change.cell.manhattan(subtask.cell())),
        },
        (false, Subtask::Remove { cell }) => distance_reward(change.cell.manhattan(cell)),
        (false, Subtask::Add { .. }) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::{BlockColor, CellCoord};

    fn cc(x: i64, y: i64, z: i64) -> CellCoord {
        CellCoord::new(x, y, z).unwrap()
    }

    fn single_block_task(cell: CellCoord) -> TaskRecord {
        TaskRecord::new("one", Grid::from_blocks([(cell, BlockColor::BLUE)]), "place one blue block")
    }

    #[test]
    fn reset_spawns_at_center_on_ground() {
        let env = Env::new(&single_block_task(cc(0, 0, 0)), EpisodeConfig::default(), 0).unwrap();
        assert_eq!(env.pose().pose5(), [5.5, 0.0, 5.5, 0.0, 0.0]);
        let obs = env.observe();
        assert!(obs.pov.is_none());
        assert_eq!(obs.compass, 0.0);
    }

    #[test]
    fn spawn_on_top_of_center_column() {
        let task = single_block_task(cc(0, 0, 0))
            .with_starting_grid(Grid::from_blocks([(cc(5, 0, 5), BlockColor::RED), (cc(5, 1, 5), BlockColor::RED)]));
        let env = Env::new(&task, EpisodeConfig::default(), 0).unwrap();
        assert_eq!(env.pose().y, 2.0);
    }

    #[test]
    fn reset_is_deterministic() {
        let task = single_block_task(cc(3, 0, 3));
        let cfg = EpisodeConfig {
            render: true,
            ..Default::default()
        };
        let mut a = Env::new(&task, cfg.clone(), 9).unwrap();
        let mut b = Env::new(&task, cfg.clone(), 9).unwrap();
        assert_eq!(a.reset(&task, cfg.clone(), 9).unwrap(), b.reset(&task, cfg, 9).unwrap());
    }

    #[test]
    fn noop_is_static() {
        let mut env = Env::new(&single_block_task(cc(0, 0, 0)), EpisodeConfig::default(), 0).unwrap();
        let before = *env.pose();
        let r = env.step(Action::verb(Verb::Noop)).unwrap();
        assert_eq!(r.reward, 0.0);
        assert_eq!(*env.pose(), before);
        assert!(!r.done);
    }

    #[test]
    fn completing_the_target_ends_the_episode() {
        // agent stands on the target cell and pillars up into it
        let mut env = Env::new(&single_block_task(cc(5, 0, 5)), EpisodeConfig::default(), 0).unwrap();
        env.step(Action::look(-5.0, 0.0)).unwrap();
        for _ in 0..17 {
            env.step(Action::look(-5.0, 0.0)).unwrap();
        }
        assert_eq!(env.pose().pitch, -90.0);
        let r = env.step(Action::verb(Verb::PlaceBlock)).unwrap();
        assert_eq!(r.reward, 1.0);
        assert!(r.done);
        assert_eq!(r.info.termination_reason, Some(TerminationReason::Complete));
        assert_eq!(r.info.f1_so_far, 1.0);
        assert_eq!(env.step(Action::verb(Verb::Noop)), Err(EnvError::EpisodeOver));
    }

    #[test]
    fn time_limit() {
        let cfg = EpisodeConfig {
            max_steps: 500,
            ..Default::default()
        };
        let mut env = Env::new(&single_block_task(cc(0, 0, 0)), cfg, 0).unwrap();
        for i in 0..500 {
            let r = env.step(Action::verb(Verb::Noop)).unwrap();
            assert_eq!(r.done, i == 499);
        }
        assert_eq!(env.termination(), Some(TerminationReason::TimeLimit));
    }

    #[test]
    fn end_action_is_gated() {
        let task = single_block_task(cc(0, 0, 0));
        let mut env = Env::new(&task, EpisodeConfig::default(), 0).unwrap();
        assert_eq!(env.step(Action::verb(Verb::EndEpisode)), Err(EnvError::EndActionDisabled));
        let cfg = EpisodeConfig {
            end_action_enabled: true,
            ..Default::default()
        };
        let mut env = Env::new(&task, cfg, 0).unwrap();
        let r = env.step(Action::verb(Verb::EndEpisode)).unwrap();
        assert_eq!(r.info.termination_reason, Some(TerminationReason::EndAction));
    }

    #[test]
    fn shaped_mode_pays_under_feet_bonus() {
        let cfg = EpisodeConfig {
            reward_mode: RewardMode::ShapedSubtask,
            ..Default::default()
        };
        let target = Grid::from_blocks([(cc(5, 0, 5), BlockColor::BLUE), (cc(5, 1, 5), BlockColor::BLUE)]);
        let mut env = Env::new(&TaskRecord::new("t", target, ""), cfg, 0).unwrap();
        for _ in 0..18 {
            env.step(Action::look(-5.0, 0.0)).unwrap();
        }
        let r = env.step(Action::verb(Verb::PlaceBlock)).unwrap();
        assert_eq!(r.reward, 1.5);
        assert_eq!(env.pose().y, 1.0);
    }

    #[test]
    fn compass_points_at_center() {
        // north of center facing south
        let mut p = AgentPose::new(5.5, 0.0, 1.5);
        p.yaw = 180.0;
        assert!(compass(&p).abs() < 1e-9);
        p.yaw = 90.0;
        assert!((compass(&p) - 90.0).abs() < 1e-9);
    }

    #[test]
    fn empty_target_is_rejected() {
        let task = TaskRecord::new("bad", Grid::empty(), "");
        assert!(matches!(Env::new(&task, EpisodeConfig::default(), 0), Err(EnvError::MalformedTask(_))));
        let cfg = EpisodeConfig {
            max_steps: 0,
            ..Default::default()
        };
        assert!(matches!(Env::new(&single_block_task(cc(0, 0, 0)), cfg, 0), Err(EnvError::InvalidConfig(_))));
    }

    #[test]
    fn visual_profile_renders() {
        let cfg = EpisodeConfig::for_profile("visual").unwrap();
        let env = Env::new(&single_block_task(cc(0, 0, 0)), cfg, 0).unwrap();
        let obs = env.observe();
        assert_eq!(obs.pov.as_ref().unwrap().pixels.len(), 64 * 64 * 3);
    }
}
