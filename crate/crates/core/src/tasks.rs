//! Task records, the random structure generator, the bottom-up subtask
//! generator, and the skill labeler.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::voxel::{BlockColor, CellCoord, Grid, VoxelError, X_SIZE, Y_SIZE, Z_SIZE};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed task file at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("task {task} ({task_id}): {field}[{index}]: {source}")]
    Block {
        task: usize,
        task_id: String,
        field: String,
        index: usize,
        #[source]
        source: VoxelError,
    },
    #[error("task {task} ({task_id}): zone dimensions {found:?} do not match {expected:?}")]
    Dimensions {
        task: usize,
        task_id: String,
        found: [usize; 3],
        expected: [usize; 3],
    },
    #[error("task {task} ({task_id}): {message}")]
    Invalid {
        task: usize,
        task_id: String,
        message: String,
    },
    #[error("generator parameter {name} = {value} is outside {range}")]
    Params {
        name: &'static str,
        value: usize,
        range: &'static str,
    },
}

/// Capability a target structure demands from the builder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkillLabel {
    Flat,
    Flying,
    Tricky,
    Tall,
}

impl SkillLabel {
    pub const ALL: [SkillLabel; 4] = [SkillLabel::Flat, SkillLabel::Flying, SkillLabel::Tricky, SkillLabel::Tall];

    pub fn as_str(self) -> &'static str {
        match self {
            SkillLabel::Flat => "flat",
            SkillLabel::Flying => "flying",
            SkillLabel::Tricky => "tricky",
            SkillLabel::Tall => "tall",
        }
    }
}

impl fmt::Display for SkillLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Serializes in the task-file entry format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TaskEntry", into = "TaskEntry")]
pub struct TaskRecord {
    pub task_id: String,
    pub starting_grid: Grid,
    pub target_grid: Grid,
    pub instruction: String,
    pub context_utterances: Vec<String>,
    pub skills: Vec<SkillLabel>,
}

impl TaskRecord {
    /// A task that starts from an empty zone; skills are computed from the target.
    pub fn new(task_id: impl Into<String>, target_grid: Grid, instruction: impl Into<String>) -> Self {
        let skills = label_skills(&target_grid);
        TaskRecord {
            task_id: task_id.into(),
            starting_grid: Grid::empty(),
            target_grid,
            instruction: instruction.into(),
            context_utterances: Vec::new(),
            skills,
        }
    }

    pub fn with_starting_grid(mut self, grid: Grid) -> Self {
        self.starting_grid = grid;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.target_grid.is_empty() {
            return Err("target grid has no blocks".into());
        }
        Ok(())
    }
}

/// Target lowest height at which a ground-standing builder can no longer reach.
pub const TALL_HEIGHT: i64 = 4;

/// Label a target structure. Labels are not exclusive.
///
/// * flat: every block on the ground layer
/// * flying: some face-connected component does not touch the ground
/// * tall: some block at height index [`TALL_HEIGHT`] or above
/// * tricky: some block has solid neighbors on all six faces
pub fn label_skills(target: &Grid) -> Vec<SkillLabel> {
    let mut labels = Vec::new();
    if target.is_empty() {
        return labels;
    }
    if target.iter_blocks().all(|(c, _)| c.y() == 0) {
        labels.push(SkillLabel::Flat);
    }
    let comps = target.connected_components();
    if comps.iter().any(|comp| comp.iter().all(|c| c.y() > 0)) {
        labels.push(SkillLabel::Flying);
    }
    let hidden = target.iter_blocks().any(|(c, _)| {
        let (x, y, z) = (c.x(), c.y(), c.z());
        target.is_solid(x, y - 1, z)
            && target.is_solid(x, y + 1, z)
            && target.is_solid(x - 1, y, z)
            && target.is_solid(x + 1, y, z)
            && target.is_solid(x, y, z - 1)
            && target.is_solid(x, y, z + 1)
    });
    if hidden {
        labels.push(SkillLabel::Tricky);
    }
    if target.iter_blocks().any(|(c, _)| c.y() >= TALL_HEIGHT) {
        labels.push(SkillLabel::Tall);
    }
    labels
}

/// A single add-or-remove block operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subtask {
    Add { cell: CellCoord, color: BlockColor },
    Remove { cell: CellCoord },
}

impl Subtask {
    pub fn cell(&self) -> CellCoord {
        match *self {
            Subtask::Add { cell, .. } | Subtask::Remove { cell } => cell,
        }
    }

    /// Color the cell should hold once the subtask is done.
    pub fn result_color(&self) -> BlockColor {
        match *self {
            Subtask::Add { color, .. } => color,
            Subtask::Remove { .. } => BlockColor::AIR,
        }
    }

    pub fn is_done(&self, grid: &Grid) -> bool {
        grid.get(self.cell()) == self.result_color()
    }

    pub fn apply(&self, grid: &mut Grid) {
        grid.set(self.cell(), self.result_color());
    }
}

/// Next block operation moving `current` toward `target`, scanning bottom-up
/// in `(y, x, z)` order. Wrong or extra blocks are removed before missing ones
/// are added.
pub fn next_subtask(current: &Grid, target: &Grid) -> Option<Subtask> {
    let remove = current
        .iter_blocks()
        .find(|&(c, v)| target.get(c) != v)
        .map(|(cell, _)| Subtask::Remove { cell });
    remove.or_else(|| {
        target
            .iter_blocks()
            .find(|&(c, _)| current.get(c).is_air())
            .map(|(cell, color)| Subtask::Add { cell, color })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n_blocks: usize,
    pub max_height: usize,
    pub n_colors: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_blocks: 10,
            max_height: 4,
            n_colors: 3,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), TaskError> {
        check_range("n_blocks", self.n_blocks, 1, 30, "[1, 30]")?;
        check_range("max_height", self.max_height, 1, 8, "[1, 8]")?;
        check_range("n_colors", self.n_colors, 1, 6, "[1, 6]")
    }
}

fn check_range(name: &'static str, value: usize, lo: usize, hi: usize, range: &'static str) -> Result<(), TaskError> {
    if (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(TaskError::Params { name, value, range })
    }
}

const HORIZONTAL_BIAS: f64 = 0.7;

/// Grow a compact, ground-connected random structure.
///
/// Starts from a random ground cell and repeatedly attaches a block to a face
/// of a random existing block: horizontally with probability 0.7, otherwise
/// vertically. Colors are uniform over the first `n_colors` ids.
pub fn generate_task(seed: u64, params: GeneratorParams) -> Result<TaskRecord, TaskError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = Grid::empty();
    let mut cells: Vec<CellCoord> = Vec::with_capacity(params.n_blocks);
    let color = |rng: &mut ChaCha8Rng| BlockColor::placeable(rng.random_range(1..=params.n_colors as u8));

    let start = CellCoord::new(rng.random_range(0..X_SIZE as i64), 0, rng.random_range(0..Z_SIZE as i64))
        .expect("ground cell in zone");
    let c = color(&mut rng);
    grid.set(start, c);
    cells.push(start);

    let max_y = params.max_height.min(Y_SIZE) as i64;
    while cells.len() < params.n_blocks {
        let base = cells[rng.random_range(0..cells.len())];
        let (dx, dy, dz) = if rng.random_bool(HORIZONTAL_BIAS) {
            [(1, 0, 0), (-1, 0, 0), (0, 0, 1), (0, 0, -1)][rng.random_range(0..4)]
        } else if rng.random_bool(0.8) {
            (0, 1, 0)
        } else {
            (0, -1, 0)
        };
        let Some(next) = CellCoord::checked(base.x() + dx, base.y() + dy, base.z() + dz) else {
            continue;
        };
        if next.y() >= max_y || !grid.get(next).is_air() {
            continue;
        }
        let c = color(&mut rng);
        grid.set(next, c);
        cells.push(next);
    }

    let names: Vec<&str> = {
        let mut used: Vec<BlockColor> = grid.iter_blocks().map(|(_, v)| v).collect();
        used.sort();
        used.dedup();
        used.into_iter().map(BlockColor::name).collect()
    };
    let instruction = format!("Build a {}-block structure using {}.", params.n_blocks, names.join(", "));
    Ok(TaskRecord::new(format!("gen-{seed}"), grid, instruction))
}

/// On-disk form of a task.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaskEntry {
    task_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zone: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    starting_blocks: Option<Vec<[i64; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    context_segments: Option<Vec<Vec<[i64; 4]>>>,
    target_blocks: Vec<[i64; 4]>,
    #[serde(default)]
    instruction: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    context_utterances: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    skills: Option<Vec<SkillLabel>>,
}

const ZONE: [usize; 3] = [X_SIZE, Y_SIZE, Z_SIZE];

fn block_grid(task: usize, task_id: &str, field: &str, blocks: &[[i64; 4]], grid: &mut Grid) -> Result<(), TaskError> {
    for (index, &[x, y, z, v]) in blocks.iter().enumerate() {
        let err = |source| TaskError::Block {
            task,
            task_id: task_id.to_string(),
            field: field.to_string(),
            index,
            source,
        };
        let cell = CellCoord::new(x, y, z).map_err(err)?;
        let color = BlockColor::try_from(v).map_err(err)?;
        grid.set(cell, color);
    }
    Ok(())
}

impl TryFrom<TaskEntry> for TaskRecord {
    type Error = TaskError;

    fn try_from(e: TaskEntry) -> Result<Self, TaskError> {
        e.into_record(0)
    }
}

impl From<TaskRecord> for TaskEntry {
    fn from(t: TaskRecord) -> Self {
        TaskEntry::from_record(&t)
    }
}

impl TaskEntry {
    fn into_record(self, task: usize) -> Result<TaskRecord, TaskError> {
        let id = self.task_id.clone();
        if let Some(found) = self.zone {
            if found != ZONE {
                return Err(TaskError::Dimensions {
                    task,
                    task_id: id,
                    found,
                    expected: ZONE,
                });
            }
        }
        let mut starting = Grid::empty();
        if let Some(blocks) = &self.starting_blocks {
            block_grid(task, &id, "starting_blocks", blocks, &mut starting)?;
        }
        // context utterances each place their own blocks; the episode starts from their union
        if let Some(segments) = &self.context_segments {
            for (i, seg) in segments.iter().enumerate() {
                block_grid(task, &id, &format!("context_segments[{i}]"), seg, &mut starting)?;
            }
        }
        let mut target = Grid::empty();
        block_grid(task, &id, "target_blocks", &self.target_blocks, &mut target)?;
        if target.is_empty() {
            return Err(TaskError::Invalid {
                task,
                task_id: id,
                message: "target_blocks is empty".into(),
            });
        }
        let skills = label_skills(&target);
        if let Some(declared) = &self.skills {
            let mut declared = declared.clone();
            declared.sort();
            declared.dedup();
            let mut computed = skills.clone();
            computed.sort();
            if declared != computed {
                log::warn!(
                    "task {task} ({id}): declared skills {declared:?} differ from computed {computed:?}; using computed"
                );
            }
        }
        Ok(TaskRecord {
            task_id: self.task_id,
            starting_grid: starting,
            target_grid: target,
            instruction: self.instruction,
            context_utterances: self.context_utterances,
            skills,
        })
    }

    fn from_record(r: &TaskRecord) -> Self {
        TaskEntry {
            task_id: r.task_id.clone(),
            zone: None,
            starting_blocks: Some(r.starting_grid.blocks()),
            context_segments: None,
            target_blocks: r.target_grid.blocks(),
            instruction: r.instruction.clone(),
            context_utterances: r.context_utterances.clone(),
            skills: Some(r.skills.clone()),
        }
    }
}

/// Parse a task file: a single task object or an array of them.
pub fn parse_tasks(text: &str) -> Result<Vec<TaskRecord>, TaskError> {
    let syntax = |e: serde_json::Error| TaskError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    // dispatch on the first token so serde keeps line/column information
    let entries: Vec<TaskEntry> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(syntax)?
    } else {
        vec![serde_json::from_str(text).map_err(syntax)?]
    };
    entries.into_iter().enumerate().map(|(i, e)| e.into_record(i)).collect()
}

pub fn tasks_to_json(tasks: &[TaskRecord]) -> String {
    let entries: Vec<TaskEntry> = tasks.iter().map(TaskEntry::from_record).collect();
    serde_json::to_string_pretty(&entries).expect("task entries serialize")
}

pub fn load_tasks(path: impl AsRef<Path>) -> Result<Vec<TaskRecord>, TaskError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TaskError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_tasks(&text)
}

pub fn save_tasks(tasks: &[TaskRecord], path: impl AsRef<Path>) -> Result<(), TaskError> {
    let path = path.as_ref();
    std::fs::write(path, tasks_to_json(tasks) + "\n").map_err(|source| TaskError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Generated tasks labeled only flat and/or tall, sizes 3 to 15 and heights
/// 1 to 6. Deterministic in `seed`.
pub fn flat_tall_suite(count: usize, seed: u64) -> Vec<TaskRecord> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let params = GeneratorParams {
            n_blocks: 3 + (i % 13) as usize,
            max_height: 1 + (i % 6) as usize,
            n_colors: 3,
        };
        let task = generate_task(seed.wrapping_add(i), params).expect("valid params");
        let labels = label_skills(&task.target_grid);
        if !labels.is_empty() && labels.iter().all(|l| matches!(l, SkillLabel::Flat | SkillLabel::Tall)) {
            out.push(task);
        }
        i += 1;
    }
    out
}
