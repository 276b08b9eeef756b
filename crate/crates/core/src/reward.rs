//! Alignment-invariant structure matching and the reward signals built on it.
//!
//! The maximal intersection between a build and its target is the largest
//! number of target blocks matched (same cell, same color) over every
//! horizontal 90° rotation and every horizontal translation of the build.
//! [`max_intersection_naive`] evaluates that definition directly;
//! [`IntersectionTracker`] maintains the same quantity under single-cell edits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::voxel::{rotate_xz, BlockChange, BlockColor, CellCoord, Grid, X_SIZE, Y_SIZE, Z_SIZE};

/// Translation range per axis: `[-SHIFT, SHIFT]`.
pub const SHIFT: i64 = X_SIZE as i64;
const SPAN: usize = 2 * SHIFT as usize + 1;
/// Number of distinct alignments: 4 rotations × 23 × 23 translations.
pub const ALIGNMENT_COUNT: usize = 4 * SPAN * SPAN;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewardError {
    #[error("block change at {0} does not change the cell")]
    NoopChange(CellCoord),
}

/// Quarter-turn count and horizontal shift applied to the build before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Alignment {
    pub rotation: u8,
    pub dx: i64,
    pub dz: i64,
}

impl Alignment {
    pub const IDENTITY: Alignment = Alignment {
        rotation: 0,
        dx: 0,
        dz: 0,
    };

    fn index(self) -> usize {
        (self.rotation as usize * SPAN + (self.dx + SHIFT) as usize) * SPAN + (self.dz + SHIFT) as usize
    }

    fn from_index(i: usize) -> Self {
        let dz = (i % SPAN) as i64 - SHIFT;
        let dx = ((i / SPAN) % SPAN) as i64 - SHIFT;
        let rotation = (i / (SPAN * SPAN)) as u8;
        Alignment { rotation, dx, dz }
    }

    /// Where a build cell lands in target space under this alignment (may be out of zone).
    pub fn map(self, c: CellCoord) -> (i64, i64, i64) {
        let (x, z) = rotate_xz(c.x(), c.z(), self.rotation);
        (x + self.dx, c.y(), z + self.dz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionResult {
    pub size: usize,
    pub best: Alignment,
}

/// Exhaustive maximal intersection over all 4 × 23 × 23 alignments.
///
/// For each rotation of `current` and each shift, counts target cells that are
/// nonzero and equal to the shifted build. The first alignment reaching the
/// maximum in rotation, dx, dz order is reported.
pub fn max_intersection_naive(current: &Grid, target: &Grid) -> IntersectionResult {
    let target_blocks: Vec<(CellCoord, BlockColor)> = target.iter_blocks().collect();
    let mut best = IntersectionResult {
        size: 0,
        best: Alignment::IDENTITY,
    };
    let mut first = true;
    let mut rotated = current.clone();
    for rotation in 0..4u8 {
        for dx in -SHIFT..=SHIFT {
            for dz in -SHIFT..=SHIFT {
                // shifted(p) = rotated(p - d); only nonzero target cells can count
                let size = target_blocks
                    .iter()
                    .filter(|(p, v)| rotated.get_or_air(p.x() - dx, p.y(), p.z() - dz) == *v)
                    .count();
                if first || size > best.size {
                    best = IntersectionResult {
                        size,
                        best: Alignment { rotation, dx, dz },
                    };
                    first = false;
                }
            }
        }
        rotated = rotated.rotate_y90();
    }
    best
}

/// Intersection at the identity alignment only.
pub fn intersection_identity(current: &Grid, target: &Grid) -> usize {
    target.iter_blocks().filter(|(p, v)| current.get(*p) == *v).count()
}

/// Incrementally maintained maximal intersection.
///
/// Holds one counter per alignment plus a histogram of counter values so the
/// maximum is known after every edit without rescanning. A block added at a
/// build cell raises every alignment that maps it onto a same-colored target
/// block; removal lowers them.
#[derive(Debug, Clone)]
pub struct IntersectionTracker {
    target: Grid,
    /// Target `(x, z)` positions per `(layer, color)`.
    target_index: Vec<Vec<(i64, i64)>>,
    counts: Vec<u32>,
    histogram: Vec<u32>,
    max: usize,
    /// Number of build blocks that each alignment maps outside the zone.
    outside: Vec<u32>,
    prune: bool,
    current_blocks: usize,
}

impl IntersectionTracker {
    pub fn new(target: &Grid, current: &Grid) -> Self {
        let mut target_index = vec![Vec::new(); Y_SIZE * 7];
        for (c, v) in target.iter_blocks() {
            target_index[c.y() as usize * 7 + v.value() as usize].push((c.x(), c.z()));
        }
        let mut histogram = vec![0u32; target.nonzero_count() + 1];
        histogram[0] = ALIGNMENT_COUNT as u32;
        let mut tr = IntersectionTracker {
            target: target.clone(),
            target_index,
            counts: vec![0; ALIGNMENT_COUNT],
            histogram,
            max: 0,
            outside: vec![0; ALIGNMENT_COUNT],
            prune: false,
            current_blocks: 0,
        };
        for (c, v) in current.iter_blocks() {
            tr.add(c, v);
        }
        tr
    }

    /// Report the maximum only over alignments that keep every placed block in the zone.
    pub fn with_pruning(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }

    pub fn target(&self) -> &Grid {
        &self.target
    }

    /// Apply one cell edit and return the new reported maximum.
    /// A color switch is handled as a removal followed by an addition.
    pub fn apply(&mut self, change: BlockChange) -> Result<usize, RewardError> {
        if change.old == change.new {
            return Err(RewardError::NoopChange(change.cell));
        }
        if !change.old.is_air() {
            self.remove(change.cell, change.old);
        }
        if !change.new.is_air() {
            self.add(change.cell, change.new);
        }
        Ok(self.size())
    }

    /// Reported maximal intersection.
    pub fn size(&self) -> usize {
        if self.prune {
            self.pruned_max()
        } else {
            self.max
        }
    }

    /// Unpruned maximum, always equal to [`max_intersection_naive`].
    pub fn unpruned_size(&self) -> usize {
        self.max
    }

    pub fn count(&self, a: Alignment) -> usize {
        self.counts[a.index()] as usize
    }

    /// Alignment achieving [`Self::size`], first in scan order.
    pub fn best(&self) -> IntersectionResult {
        let size = self.size();
        let idx = (0..ALIGNMENT_COUNT)
            .find(|&i| self.counts[i] as usize == size && (!self.prune || self.outside[i] == 0))
            .unwrap_or(0);
        IntersectionResult {
            size,
            best: Alignment::from_index(idx),
        }
    }

    fn pruned_max(&self) -> usize {
        self.counts
            .iter()
            .zip(&self.outside)
            .filter(|(_, &o)| o == 0)
            .map(|(&c, _)| c as usize)
            .max()
            .unwrap_or(0)
    }

    fn add(&mut self, c: CellCoord, v: BlockColor) {
        self.current_blocks += 1;
        self.visit(c, v, true);
    }

    fn remove(&mut self, c: CellCoord, v: BlockColor) {
        self.current_blocks -= 1;
        self.visit(c, v, false);
    }

    fn visit(&mut self, c: CellCoord, v: BlockColor, add: bool) {
        let layer = c.y() as usize * 7 + v.value() as usize;
        for rotation in 0..4u8 {
            let (rx, rz) = rotate_xz(c.x(), c.z(), rotation);
            for i in 0..self.target_index[layer].len() {
                let (tx, tz) = self.target_index[layer][i];
                let a = Alignment {
                    rotation,
                    dx: tx - rx,
                    dz: tz - rz,
                };
                let idx = a.index();
                let old = self.counts[idx] as usize;
                let new = if add { old + 1 } else { old - 1 };
                self.counts[idx] = new as u32;
                self.histogram[old] -= 1;
                self.histogram[new] += 1;
                if new > self.max || (old == self.max && self.histogram[old] == 0) {
                    self.max = new;
                }
            }
            // every alignment of this rotation whose shift pushes the cell out
            let shift = SHIFT;
            for dx in -shift..=shift {
                let x_out = !(0..X_SIZE as i64).contains(&(rx + dx));
                for dz in -shift..=shift {
                    if x_out || !(0..Z_SIZE as i64).contains(&(rz + dz)) {
                        let idx = Alignment { rotation, dx, dz }.index();
                        if add {
                            self.outside[idx] += 1;
                        } else {
                            self.outside[idx] -= 1;
                        }
                    }
                }
            }
        }
    }
}

/// Reward for one step: the change in maximal intersection.
pub fn step_reward(prev_size: usize, new_size: usize) -> f64 {
    new_size as f64 - prev_size as f64
}

/// How the F1 intersection aligns the snapshot against the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F1Alignment {
    #[default]
    Maximized,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub intersection_size: usize,
    pub best_alignment: Alignment,
}

impl F1Report {
    /// Build a report from an intersection size and the two block counts.
    pub fn from_counts(intersection: usize, snapshot_blocks: usize, target_blocks: usize, best: Alignment) -> Self {
        let (precision, recall) = match (snapshot_blocks, target_blocks) {
            (0, 0) => (1.0, 1.0),
            (0, _) | (_, 0) => (0.0, 0.0),
            (s, t) => (intersection as f64 / s as f64, intersection as f64 / t as f64),
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        F1Report {
            precision,
            recall,
            f1,
            intersection_size: intersection,
            best_alignment: best,
        }
    }
}

/// F1 of the final snapshot against the target, alignment-maximized.
pub fn f1_score(snapshot: &Grid, target: &Grid) -> F1Report {
    f1_score_with(snapshot, target, F1Alignment::Maximized)
}

pub fn f1_score_with(snapshot: &Grid, target: &Grid, mode: F1Alignment) -> F1Report {
    let (size, best) = match mode {
        F1Alignment::Maximized => {
            let r = max_intersection_naive(snapshot, target);
            (r.size, r.best)
        }
        F1Alignment::Identity => (intersection_identity(snapshot, target), Alignment::IDENTITY),
    };
    F1Report::from_counts(size, snapshot.nonzero_count(), target.nonzero_count(), best)
}

/// Extra reward for placing the subtask block directly beneath the agent.
pub const UNDER_FEET_BONUS: f64 = 0.5;
/// Slope of the penalty beyond distance 5.
pub const FAR_PENALTY_SLOPE: f64 = 0.01;

/// Reward for a placement at Manhattan distance `d` from the subtask cell.
pub fn distance_reward(d: u32) -> f64 {
    match d {
        0 => 1.0,
        1 => 0.25,
        2 => 0.05,
        3 => 0.001,
        4 => -0.0001,
        5 => -0.001,
        _ => -FAR_PENALTY_SLOPE * (d - 5) as f64,
    }
}

/// Shaped subtask reward for a placed block, including the under-feet bonus
/// when the block lands on the subtask cell directly below the agent's feet.
pub fn shaped_reward(placed: CellCoord, subtask_target: CellCoord, agent_feet_cell: CellCoord) -> f64 {
    let under_feet = placed.x() == agent_feet_cell.x()
        && placed.z() == agent_feet_cell.z()
        && placed.y() + 1 == agent_feet_cell.y();
    let bonus = if placed == subtask_target && under_feet {
        UNDER_FEET_BONUS
    } else {
        0.0
    };
    distance_reward(placed.manhattan(subtask_target)) + bonus
}
