//! Block placement and removal targeted by the agent's view ray.

use serde::{Deserialize, Serialize};

use super::kinematics::{body_collides, body_overlaps_cell, AgentPose};
use crate::voxel::{raycast, BlockChange, BlockColor, CellCoord, Grid, HitKind};

/// Interaction reach in blocks.
pub const REACH: f64 = 3.0;

/// Count reported for every color in unlimited mode.
pub const UNLIMITED_COUNT: u32 = i32::MAX as u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InventoryMode {
    #[default]
    Unlimited,
    /// Each color starts with this many blocks.
    Counted(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub counts: [u32; 6],
    pub selected: BlockColor,
    pub mode: InventoryMode,
}

impl Inventory {
    pub fn new(mode: InventoryMode) -> Self {
        let counts = match mode {
            InventoryMode::Unlimited => [UNLIMITED_COUNT; 6],
            InventoryMode::Counted(n) => [n; 6],
        };
        Inventory {
            counts,
            selected: BlockColor::BLUE,
            mode,
        }
    }

    pub fn count(&self, color: BlockColor) -> u32 {
        self.counts[color.value() as usize - 1]
    }

    pub fn has(&self, color: BlockColor) -> bool {
        !color.is_air() && self.count(color) > 0
    }

    fn take(&mut self, color: BlockColor) {
        if let InventoryMode::Counted(_) = self.mode {
            self.counts[color.value() as usize - 1] -= 1;
        }
    }

    fn give(&mut self, color: BlockColor) {
        if let InventoryMode::Counted(_) = self.mode {
            self.counts[color.value() as usize - 1] += 1;
        }
    }
}

/// Where a placement from this pose would land.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacementTarget {
    pub cell: CellCoord,
    /// Placing into the agent's own feet cell lifts the agent on top of the new block.
    pub lifts_agent: bool,
}

/// Cell a `place_block` would fill, without mutating anything.
///
/// The view ray (reach 3) must hit a block face or the ground; the cell in
/// front of that face must be air and either clear of the body or the feet
/// cell, in which case the agent must fit standing on top of the new block.
pub fn placement_target(pose: &AgentPose, grid: &Grid) -> Option<PlacementTarget> {
    let hit = raycast(grid, pose.eye(), pose.view_direction(), REACH)?;
    let cell = match hit.kind {
        HitKind::Block => hit.cell.offset(hit.face)?,
        HitKind::Ground => hit.cell,
    };
    if !grid.get(cell).is_air() {
        return None;
    }
    if !body_overlaps_cell(pose, cell) {
        return Some(PlacementTarget {
            cell,
            lifts_agent: false,
        });
    }
    if pose.feet_cell() != Some(cell) {
        return None;
    }
    let lifted = cell.y() as f64 + 1.0;
    let mut after = grid.clone();
    after.set(cell, BlockColor::BLUE);
    if body_collides(pose.x, lifted, pose.z, &after) {
        return None;
    }
    Some(PlacementTarget {
        cell,
        lifts_agent: true,
    })
}

/// Cell a `break_block` would clear.
pub fn break_target(pose: &AgentPose, grid: &Grid) -> Option<CellCoord> {
    let hit = raycast(grid, pose.eye(), pose.view_direction(), REACH)?;
    (hit.kind == HitKind::Block).then_some(hit.cell)
}

/// Place the selected color; returns the change, or `None` for a no-op.
pub fn try_place(pose: &mut AgentPose, inventory: &mut Inventory, grid: &mut Grid) -> Option<BlockChange> {
    let color = inventory.selected;
    if !inventory.has(color) {
        return None;
    }
    let target = placement_target(pose, grid)?;
    let change = grid.set(target.cell, color);
    inventory.take(color);
    if target.lifts_agent {
        pose.y = target.cell.y() as f64 + 1.0;
        pose.vertical_velocity = 0.0;
    }
    Some(change)
}

/// Remove the targeted block and return it to the inventory.
pub fn try_break(pose: &AgentPose, inventory: &mut Inventory, grid: &mut Grid) -> Option<BlockChange> {
    let cell = break_target(pose, grid)?;
    let change = grid.set(cell, BlockColor::AIR);
    inventory.give(change.old);
    Some(change)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(x: i64, y: i64, z: i64) -> CellCoord {
        CellCoord::new(x, y, z).unwrap()
    }

    fn looking(x: f64, y: f64, z: f64, pitch: f64, yaw: f64) -> AgentPose {
        let mut p = AgentPose::new(x, y, z);
        p.pitch = pitch;
        p.yaw = yaw;
        p
    }

    #[test]
    fn place_against_block_face() {
        let mut g = Grid::from_blocks([(cc(5, 0, 3), BlockColor::RED)]);
        // look north and slightly down at the south face of (5, 0, 3)
        let eye_to_face = (5.5f64 - 4.0, 1.6f64 - 0.5);
        let pitch = -(eye_to_face.1 / eye_to_face.0).atan().to_degrees();
        let mut p = looking(5.5, 0.0, 5.5, pitch, 0.0);
        let mut inv = Inventory::new(InventoryMode::Counted(2));
        inv.selected = BlockColor::GREEN;
        let ch = try_place(&mut p, &mut inv, &mut g).unwrap();
        assert_eq!(ch.cell, cc(5, 0, 4));
        assert_eq!(g.get(cc(5, 0, 4)), BlockColor::GREEN);
        assert_eq!(inv.count(BlockColor::GREEN), 1);
    }

    #[test]
    fn looking_at_sky_is_noop() {
        let mut g = Grid::empty();
        let mut p = looking(5.5, 0.0, 5.5, 30.0, 0.0);
        let mut inv = Inventory::new(InventoryMode::Unlimited);
        assert!(try_place(&mut p, &mut inv, &mut g).is_none());
        assert!(g.is_empty());
    }

    #[test]
    fn pillar_up_from_ground_and_block() {
        let mut g = Grid::empty();
        let mut p = looking(5.5, 0.0, 5.5, -90.0, 0.0);
        let mut inv = Inventory::new(InventoryMode::Unlimited);
        let ch = try_place(&mut p, &mut inv, &mut g).unwrap();
        assert_eq!(ch.cell, cc(5, 0, 5));
        assert_eq!(p.y, 1.0);
        let ch = try_place(&mut p, &mut inv, &mut g).unwrap();
        assert_eq!(ch.cell, cc(5, 1, 5));
        assert_eq!(p.y, 2.0);
        assert!(!body_collides(p.x, p.y, p.z, &g));
    }

    #[test]
    fn pillar_blocked_by_ceiling() {
        let mut g = Grid::from_blocks([(cc(5, 2, 5), BlockColor::RED)]);
        let mut p = looking(5.5, 0.0, 5.5, -90.0, 0.0);
        let mut inv = Inventory::new(InventoryMode::Unlimited);
        assert!(try_place(&mut p, &mut inv, &mut g).is_none());
        assert_eq!(p.y, 0.0);
    }

    #[test]
    fn cannot_place_into_own_head() {
        let g = Grid::from_blocks([(cc(5, 2, 4), BlockColor::RED)]);
        // looking up-north at the bottom face of a block above and in front
        let p = looking(5.5, 0.0, 4.4, 80.0, 0.0);
        assert!(placement_target(&p, &g).is_none());
    }

    #[test]
    fn break_returns_block_to_inventory() {
        let mut g = Grid::from_blocks([(cc(5, 0, 5), BlockColor::ORANGE)]);
        let p = looking(5.5, 1.0, 5.5, -90.0, 0.0);
        let mut inv = Inventory::new(InventoryMode::Counted(0));
        let ch = try_break(&p, &mut inv, &mut g).unwrap();
        assert_eq!(ch.old, BlockColor::ORANGE);
        assert!(g.is_empty());
        assert_eq!(inv.count(BlockColor::ORANGE), 1);
        assert!(try_break(&p, &mut inv, &mut g).is_none());
    }

    #[test]
    fn counted_inventory_blocks_placement_when_empty() {
        let mut g = Grid::empty();
        let mut p = looking(5.5, 0.0, 5.5, -90.0, 0.0);
        let mut inv = Inventory::new(InventoryMode::Counted(0));
        assert!(try_place(&mut p, &mut inv, &mut g).is_none());
    }
}
