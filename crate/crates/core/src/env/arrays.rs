//! Contiguous numeric view of an observation for array-based consumers.

use serde::{Deserialize, Serialize};

use super::Observation;
use crate::voxel::{CELL_COUNT, X_SIZE, Y_SIZE, Z_SIZE};

pub const POV_SHAPE: [usize; 3] = [64, 64, 3];
/// `(y, x, z)`.
pub const GRID_SHAPE: [usize; 3] = [Y_SIZE, X_SIZE, Z_SIZE];

/// Fixed-shape arrays: pov `u8 (64, 64, 3)` row-major RGB, zero when not
/// rendered; grid `i8 (9, 11, 11)`; inventory `i32 (6)`; pose `f32 (5)`;
/// compass `f32`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationArrays {
    pub pov: Vec<u8>,
    pub has_pov: bool,
    pub grid: Vec<i8>,
    pub inventory: [i32; 6],
    pub pose: [f32; 5],
    pub compass: f32,
    pub instruction: String,
}

impl Observation {
    pub fn to_arrays(&self) -> ObservationArrays {
        let pov_len = POV_SHAPE.iter().product();
        let pov = match &self.pov {
            Some(img) if img.pixels.len() == pov_len => img.pixels.clone(),
            _ => vec![0; pov_len],
        };
        let grid: Vec<i8> = self.grid.as_bytes().iter().map(|&v| v as i8).collect();
        debug_assert_eq!(grid.len(), CELL_COUNT);
        ObservationArrays {
            pov,
            has_pov: self.pov.is_some(),
            grid,
            inventory: self.inventory.map(|c| c.min(i32::MAX as u32) as i32),
            pose: self.pose.map(|v| v as f32),
            compass: self.compass as f32,
            instruction: self.chat.to_string(),
        }
    }
}
