//! Tape → environment-step conversion, and the reverse direction for
//! exporting live sessions as records.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{place_action_block, BehaviorError, BehaviorRecord, EventKind, IdOffsetMap, RawBlockChange, TapeEvent, PLACE_ACTION};
use crate::env::{angle_diff, spawn_pose, wrap_yaw, Action, AgentPose, Verb, CAMERA_LIMIT, STEP_LENGTH};
use crate::tasks::TaskRecord;
use crate::voxel::{BlockChange, BlockColor, Grid};

/// Largest position jump folded into the preceding step: one step length plus drift slack.
pub const POS_FOLD_TOLERANCE: f64 = STEP_LENGTH + 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Annotation {
    /// A delimiter or unrecognized action name.
    Marker { name: String },
    /// Block written while the world state was being restored.
    Recovery,
    /// Block change without an action that explains it.
    WorldEdit,
    /// Position change too large for one movement step.
    Teleport { to: [f64; 3] },
    Elision,
    Opaque { line: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StepKind {
    Action { action: Action },
    Annotation { annotation: Annotation },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoStep {
    pub index: usize,
    pub kind: StepKind,
    /// Pose after the step, `(x, y, z, pitch, yaw)`.
    pub pose: [f64; 5],
    /// At most one block change.
    pub changes: Vec<BlockChange>,
    /// Grid after the step. Not written to JSON lines; rebuilt from `changes` on read.
    #[serde(skip)]
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoTrajectory {
    pub game_id: i64,
    pub step_id: i64,
    pub initial_pose: AgentPose,
    /// Target is the final grid.
    pub task: TaskRecord,
    pub steps: Vec<DemoStep>,
}

impl DemoTrajectory {
    pub fn final_grid(&self) -> &Grid {
        &self.task.target_grid
    }

    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.steps.iter().filter_map(|s| match &s.kind {
            StepKind::Action { action } => Some(action),
            StepKind::Annotation { .. } => None,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct StepLine<'a> {
    task_id: std::borrow::Cow<'a, str>,
    #[serde(flatten)]
    step: std::borrow::Cow<'a, DemoStep>,
}

/// One JSON object per step.
pub fn trajectory_to_jsonl(traj: &DemoTrajectory) -> String {
    let mut out = String::new();
    for s in &traj.steps {
        let line = StepLine {
            task_id: traj.task.task_id.as_str().into(),
            step: std::borrow::Cow::Borrowed(s),
        };
        out.push_str(&serde_json::to_string(&line).expect("step serializes"));
        out.push('\n');
    }
    out
}

/// Read JSON-lines steps back, rebuilding grid snapshots from an empty zone.
/// Returns `(task_id, steps)` pairs in file order.
pub fn read_jsonl(text: &str) -> Result<Vec<(String, DemoStep)>, serde_json::Error> {
    let mut out = Vec::new();
    let mut grid = Grid::empty();
    let mut current: Option<String> = None;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let parsed: StepLine<'static> = serde_json::from_str(line)?;
        let task_id = parsed.task_id.into_owned();
        if current.as_deref() != Some(task_id.as_str()) {
            grid = Grid::empty();
            current = Some(task_id.clone());
        }
        let mut step = parsed.step.into_owned();
        for c in &step.changes {
            grid.set(c.cell, c.new);
        }
        step.grid = grid.clone();
        out.push((task_id, step));
    }
    Ok(out)
}

struct Converter<'a> {
    map: &'a IdOffsetMap,
    grid: Grid,
    pose: AgentPose,
    selected: BlockColor,
    recovering: bool,
    steps: Vec<DemoStep>,
    /// Index of a place/break step still waiting for its block change.
    pending_edit: Option<usize>,
}

impl Converter<'_> {
    fn push(&mut self, kind: StepKind, change: Option<BlockChange>) -> usize {
        let index = self.steps.len();
        self.steps.push(DemoStep {
            index,
            kind,
            pose: self.pose.pose5(),
            changes: change.into_iter().collect(),
            grid: self.grid.clone(),
        });
        index
    }

    fn annotate(&mut self, a: Annotation, change: Option<BlockChange>) {
        self.push(StepKind::Annotation { annotation: a }, change);
    }

    fn act(&mut self, action: Action, change: Option<BlockChange>) -> usize {
        self.push(StepKind::Action { action }, change)
    }

    fn event(&mut self, line: usize, ev: &TapeEvent) -> Result<(), BehaviorError> {
        match &ev.kind {
            EventKind::Action { name, args } => self.action(line, name, args)?,
            EventKind::BlockChange { changes } => {
                for c in changes {
                    self.block_change(line, c)?;
                }
            }
            EventKind::PosChange { pos } => {
                let p = self.map.position(*pos);
                let d = ((p[0] - self.pose.x).powi(2) + (p[1] - self.pose.y).powi(2) + (p[2] - self.pose.z).powi(2)).sqrt();
                self.pose.x = p[0];
                self.pose.y = p[1];
                self.pose.z = p[2];
                if d > POS_FOLD_TOLERANCE {
                    self.annotate(Annotation::Teleport { to: p }, None);
                } else if let Some(last) = self.steps.last_mut() {
                    last.pose = self.pose.pose5();
                }
            }
            EventKind::SetLook { look } => {
                let pitch = self.map.look_degrees(look[0]).clamp(-90.0, 90.0);
                let yaw = wrap_yaw(self.map.look_degrees(look[1]));
                let dp = pitch - self.pose.pitch;
                let dy = angle_diff(self.pose.yaw, yaw);
                let n = (dp.abs().max(dy.abs()) / CAMERA_LIMIT).ceil() as usize;
                for k in 0..n {
                    self.pose.turn(dp / n as f64, dy / n as f64);
                    if k + 1 == n {
                        self.pose.pitch = pitch;
                        self.pose.yaw = yaw;
                    }
                    self.act(Action::look(dp / n as f64, dy / n as f64), None);
                }
            }
            EventKind::Elision => self.annotate(Annotation::Elision, None),
            EventKind::Opaque => self.annotate(
                Annotation::Opaque {
                    line: ev.raw_line.clone(),
                },
                None,
            ),
        }
        Ok(())
    }

    fn action(&mut self, line: usize, name: &str, args: &[String]) -> Result<(), BehaviorError> {
        match name {
            "start_recover_world_state" => self.recovering = true,
            "finish_recover_world_state" => self.recovering = false,
            PLACE_ACTION => {
                let [x, y, z, id] = place_action_block(args).ok_or_else(|| BehaviorError::Malformed {
                    line,
                    what: PLACE_ACTION.into(),
                })?;
                let (cell, color) = self.map.block(line, x, y, z, id)?;
                if !self.grid.get(cell).is_air() {
                    return Ok(());
                }
                let change = self.grid.set(cell, color);
                if self.recovering {
                    self.annotate(Annotation::Recovery, Some(change));
                } else {
                    if self.selected != color {
                        self.selected = color;
                        self.act(Action::verb(Verb::select(color).expect("placeable color")), None);
                    }
                    self.act(Action::verb(Verb::PlaceBlock), Some(change));
                }
                return Ok(());
            }
            _ => {}
        }
        match name.parse::<Verb>() {
            Ok(verb) => {
                if let Some(c) = verb.selected_color() {
                    self.selected = c;
                }
                let i = self.act(Action::verb(verb), None);
                if matches!(verb, Verb::PlaceBlock | Verb::BreakBlock) {
                    self.pending_edit = Some(i);
                }
            }
            Err(_) => self.annotate(Annotation::Marker { name: name.to_string() }, None),
        }
        Ok(())
    }

    fn block_change(&mut self, line: usize, c: &RawBlockChange) -> Result<(), BehaviorError> {
        let (cell, new) = self.map.block(line, c.x, c.y, c.z, c.new)?;
        self.map.color(c.old).ok_or(BehaviorError::UnmappedId { line, id: c.old })?;
        if self.grid.get(cell) == new {
            return Ok(());
        }
        let change = self.grid.set(cell, new);
        if let Some(i) = self.pending_edit.take() {
            let is_last = i + 1 == self.steps.len();
            let step = &mut self.steps[i];
            let fits = match step.kind {
                StepKind::Action { action } => (action.verb == Verb::PlaceBlock) != new.is_air(),
                StepKind::Annotation { .. } => false,
            };
            if fits && step.changes.is_empty() && is_last {
                step.changes.push(change);
                step.grid = self.grid.clone();
                return Ok(());
            }
        }
        let a = if self.recovering {
            Annotation::Recovery
        } else {
            Annotation::WorldEdit
        };
        self.annotate(a, Some(change));
        Ok(())
    }
}

/// Convert a record into environment steps. Block edits land on the step
/// that caused them; camera moves become ±5° look steps.
pub fn to_trajectory(rec: &BehaviorRecord, map: &IdOffsetMap) -> Result<DemoTrajectory, BehaviorError> {
    let mut pose = spawn_pose(&Grid::empty());
    if let Some(p) = rec.tape.iter().find_map(|e| match e.kind {
        EventKind::PosChange { pos } => Some(pos),
        _ => None,
    }) {
        let p = map.position(p);
        (pose.x, pose.y, pose.z) = (p[0], p[1], p[2]);
    }
    if let Some(l) = rec.tape.iter().find_map(|e| match e.kind {
        EventKind::SetLook { look } => Some(look),
        _ => None,
    }) {
        pose.pitch = map.look_degrees(l[0]).clamp(-90.0, 90.0);
        pose.yaw = wrap_yaw(map.look_degrees(l[1]));
    }
    let mut conv = Converter {
        map,
        grid: Grid::empty(),
        pose,
        selected: BlockColor::BLUE,
        recovering: false,
        steps: Vec::new(),
        pending_edit: None,
    };
    for (i, ev) in rec.tape.iter().enumerate() {
        conv.event(i + 1, ev)?;
    }
    let task = TaskRecord::new(
        format!("game{}-step{}", rec.game_id, rec.step_id),
        conv.grid.clone(),
        rec.clarification_question.clone().unwrap_or_default(),
    );
    Ok(DemoTrajectory {
        game_id: rec.game_id,
        step_id: rec.step_id,
        initial_pose: pose,
        task,
        steps: conv.steps,
    })
}

/// Accumulates a live session into a record in the raw log format.
#[derive(Debug, Clone)]
pub struct RecordBuilder {
    map: IdOffsetMap,
    game_id: i64,
    step_id: i64,
    tape: Vec<TapeEvent>,
    last_pose: Option<AgentPose>,
    question: Option<String>,
    extra: Map<String, Value>,
}

impl RecordBuilder {
    /// Starts the tape with the initial world restored block by block.
    pub fn new(game_id: i64, step_id: i64, map: IdOffsetMap, start: &Grid, pose: &AgentPose) -> Self {
        let mut b = RecordBuilder {
            map,
            game_id,
            step_id,
            tape: Vec::new(),
            last_pose: None,
            question: None,
            extra: Map::new(),
        };
        b.action("start_recover_world_state", Vec::new());
        let changes: Vec<BlockChange> = start
            .iter_blocks()
            .map(|(cell, new)| BlockChange {
                cell,
                old: BlockColor::AIR,
                new,
            })
            .collect();
        b.block_changes(&changes);
        b.pose(pose);
        b.action("finish_recover_world_state", Vec::new());
        b
    }

    fn action(&mut self, name: &str, args: Vec<String>) {
        self.tape.push(TapeEvent::from_kind(EventKind::Action {
            name: name.to_string(),
            args,
        }));
    }

    fn block_changes(&mut self, changes: &[BlockChange]) {
        if changes.is_empty() {
            return;
        }
        let raw = changes
            .iter()
            .map(|c| {
                let [x, y, z] = self.map.raw_cell(c.cell);
                RawBlockChange {
                    x,
                    y,
                    z,
                    old: self.map.raw_id(c.old).expect("color has a raw id"),
                    new: self.map.raw_id(c.new).expect("color has a raw id"),
                }
            })
            .collect();
        self.tape.push(TapeEvent::from_kind(EventKind::BlockChange { changes: raw }));
    }

    fn pose(&mut self, pose: &AgentPose) {
        let last = self.last_pose;
        if last.is_none_or(|l| (l.x, l.y, l.z) != (pose.x, pose.y, pose.z)) {
            self.tape.push(TapeEvent::from_kind(EventKind::PosChange {
                pos: self.map.raw_position([pose.x, pose.y, pose.z]),
            }));
        }
        if last.is_none_or(|l| (l.pitch, l.yaw) != (pose.pitch, pose.yaw)) {
            self.tape.push(TapeEvent::from_kind(EventKind::SetLook {
                look: [self.map.raw_look(pose.pitch), self.map.raw_look(pose.yaw)],
            }));
        }
        self.last_pose = Some(*pose);
    }

    /// Log one environment step and its outcome.
    pub fn step(&mut self, action: &Action, pose_after: &AgentPose, changes: &[BlockChange]) {
        if action.verb != Verb::Noop {
            self.action(action.verb.name(), Vec::new());
        }
        self.block_changes(changes);
        self.pose(pose_after);
    }

    pub fn set_clarification_question(&mut self, q: Option<String>) {
        self.question = q;
    }

    pub fn set_extra(&mut self, key: &str, value: Value) {
        self.extra.insert(key.to_string(), value);
    }

    pub fn is_empty(&self) -> bool {
        self.tape.is_empty()
    }

    pub fn finish(&self, world: &Grid, pose: &AgentPose) -> BehaviorRecord {
        let world_ending_blocks = world
            .iter_blocks()
            .map(|(cell, c)| {
                let [x, y, z] = self.map.raw_cell(cell);
                [x, y, z, self.map.raw_id(c).expect("color has a raw id")]
            })
            .collect();
        BehaviorRecord {
            game_id: self.game_id,
            step_id: self.step_id,
            avatar_pos: self.map.raw_position([pose.x, pose.y, pose.z]),
            avatar_look: [self.map.raw_look(pose.pitch), self.map.raw_look(pose.yaw)],
            world_ending_blocks,
            clarification_question: self.question.clone(),
            tape: self.tape.clone(),
            extra: self.extra.clone(),
        }
    }
}
