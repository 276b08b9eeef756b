//! Raw game logs: parsing, replay on the zone grid, and conversion to
//! demonstration trajectories.
//!
//! A record's tape is a stream of `action`, `block_change`, `pos_change` and
//! `set_look` lines in raw world coordinates. [`IdOffsetMap`] translates raw
//! coordinates and block ids into zone cells and colors.

mod record;
mod tape;
mod trajectory;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use record::{parse_record, parse_records, record_to_json, BehaviorRecord};
pub use tape::{parse_tape, EventKind, RawBlockChange, TapeEvent, TapeLineError};
pub use trajectory::{
    read_jsonl, to_trajectory, trajectory_to_jsonl, Annotation, DemoStep, DemoTrajectory, RecordBuilder, StepKind,
    POS_FOLD_TOLERANCE,
};

use crate::voxel::{BlockColor, CellCoord, Grid};

#[derive(Debug, Error)]
pub enum BehaviorError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{0}")]
    Tape(TapeLineError),
    #[error("tape is empty")]
    EmptyTape,
    #[error("tape line {line}: raw cell ({x}, {y}, {z}) maps outside the zone")]
    OutOfZone { line: usize, x: i64, y: i64, z: i64 },
    #[error("tape line {line}: raw block id {id} has no color mapping")]
    UnmappedId { line: usize, id: i64 },
    #[error("tape line {line}: malformed {what}")]
    Malformed { line: usize, what: String },
}

/// How recorded look angles are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookUnit {
    #[default]
    Radians,
    Degrees,
}

/// Raw world → zone mapping. Zone cell = raw − offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdOffsetMap {
    pub colors: BTreeMap<i64, BlockColor>,
    pub x_off: i64,
    pub y_off: i64,
    pub z_off: i64,
    pub look_unit: LookUnit,
}

impl Default for IdOffsetMap {
    fn default() -> Self {
        let colors = [
            (50, BlockColor::BLUE),
            (59, BlockColor::GREEN),
            (51, BlockColor::RED),
            (52, BlockColor::ORANGE),
            (53, BlockColor::PURPLE),
            (54, BlockColor::YELLOW),
        ]
        .into_iter()
        .collect();
        IdOffsetMap {
            colors,
            x_off: 0,
            y_off: 63,
            z_off: 0,
            look_unit: LookUnit::Radians,
        }
    }
}

impl IdOffsetMap {
    pub fn cell(&self, x: i64, y: i64, z: i64) -> Option<CellCoord> {
        CellCoord::checked(x - self.x_off, y - self.y_off, z - self.z_off)
    }

    /// Raw id 0 is air.
    pub fn color(&self, raw: i64) -> Option<BlockColor> {
        if raw == 0 {
            Some(BlockColor::AIR)
        } else {
            self.colors.get(&raw).copied()
        }
    }

    /// Smallest raw id mapped to `color`.
    pub fn raw_id(&self, color: BlockColor) -> Option<i64> {
        if color.is_air() {
            return Some(0);
        }
        self.colors.iter().find(|(_, &c)| c == color).map(|(&k, _)| k)
    }

    pub fn raw_cell(&self, cell: CellCoord) -> [i64; 3] {
        [cell.x() + self.x_off, cell.y() + self.y_off, cell.z() + self.z_off]
    }

    pub fn position(&self, raw: [f64; 3]) -> [f64; 3] {
        [
            raw[0] - self.x_off as f64,
            raw[1] - self.y_off as f64,
            raw[2] - self.z_off as f64,
        ]
    }

    pub fn raw_position(&self, pos: [f64; 3]) -> [f64; 3] {
        [
            pos[0] + self.x_off as f64,
            pos[1] + self.y_off as f64,
            pos[2] + self.z_off as f64,
        ]
    }

    pub fn look_degrees(&self, v: f64) -> f64 {
        match self.look_unit {
            LookUnit::Radians => v.to_degrees(),
            LookUnit::Degrees => v,
        }
    }

    pub fn raw_look(&self, degrees: f64) -> f64 {
        match self.look_unit {
            LookUnit::Radians => degrees.to_radians(),
            LookUnit::Degrees => degrees,
        }
    }

    fn block(&self, line: usize, x: i64, y: i64, z: i64, id: i64) -> Result<(CellCoord, BlockColor), BehaviorError> {
        let cell = self.cell(x, y, z).ok_or(BehaviorError::OutOfZone { line, x, y, z })?;
        let color = self.color(id).ok_or(BehaviorError::UnmappedId { line, id })?;
        Ok((cell, color))
    }

    /// The record's ending state as a zone grid.
    pub fn ending_grid(&self, rec: &BehaviorRecord) -> Result<Grid, BehaviorError> {
        let mut g = Grid::empty();
        for &[x, y, z, id] in &rec.world_ending_blocks {
            let (cell, color) = self.block(0, x, y, z, id)?;
            g.set(cell, color);
        }
        Ok(g)
    }
}

/// Cell and color of a `select_and_place_block <id> <x> <y> <z> ...` action.
pub(crate) fn place_action_block(args: &[String]) -> Option<[i64; 4]> {
    let v: Vec<i64> = args.iter().take(4).map(|a| a.parse().ok()).collect::<Option<_>>()?;
    match v[..] {
        [id, x, y, z] => Some([x, y, z, id]),
        _ => None,
    }
}

pub const PLACE_ACTION: &str = "select_and_place_block";

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub grid: Grid,
    pub warnings: Vec<String>,
}

/// Rebuild the final grid from an empty zone by applying placement actions and
/// block changes in tape order. Block changes win on disagreement.
pub fn replay_tape(rec: &BehaviorRecord, map: &IdOffsetMap) -> Result<Replay, BehaviorError> {
    let mut grid = Grid::empty();
    let mut warnings = Vec::new();
    for (i, ev) in rec.tape.iter().enumerate() {
        let line = i + 1;
        match &ev.kind {
            EventKind::Action { name, args } if name == PLACE_ACTION => {
                let [x, y, z, id] = place_action_block(args).ok_or_else(|| BehaviorError::Malformed {
                    line,
                    what: PLACE_ACTION.into(),
                })?;
                let (cell, color) = map.block(line, x, y, z, id)?;
                if grid.get(cell).is_air() {
                    grid.set(cell, color);
                } else {
                    warnings.push(format!("event {line}: placement into occupied cell {cell:?} ignored"));
                }
            }
            EventKind::BlockChange { changes } => {
                for c in changes {
                    let (cell, new) = map.block(line, c.x, c.y, c.z, c.new)?;
                    let old = map.color(c.old).ok_or(BehaviorError::UnmappedId { line, id: c.old })?;
                    let cur = grid.get(cell);
                    if cur != old && cur != new {
                        warnings.push(format!(
                            "event {line}: cell {cell:?} holds {} but change expects {}",
                            cur.name(),
                            old.name()
                        ));
                    }
                    grid.set(cell, new);
                }
            }
            _ => {}
        }
    }
    for w in &warnings {
        log::warn!("game {} step {}: {w}", rec.game_id, rec.step_id);
    }
    Ok(Replay { grid, warnings })
}
