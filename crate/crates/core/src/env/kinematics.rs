//! Agent body physics: horizontal stepping, jumping, gravity and
//! axis-separated collision against solid cells, the ground, and zone walls.
//!
//! Conventions: yaw 0 faces −z, yaw 90 faces +x; positive pitch looks up.
//! The pose position is the center of the bottom face of the body box.

use serde::{Deserialize, Serialize};

use super::action::Verb;
use crate::voxel::{CellCoord, Grid, X_SIZE, Z_SIZE};

pub const STEP_LENGTH: f64 = 0.25;
pub const EYE_HEIGHT: f64 = 1.6;
pub const HALF_WIDTH: f64 = 0.3;
pub const BODY_HEIGHT: f64 = 1.8;
pub const GRAVITY: f64 = -0.08;
pub const TERMINAL_VELOCITY: f64 = -3.0;
/// Launch speed whose apex (1.2 blocks under [`GRAVITY`]) clears one block but not two.
pub const JUMP_VELOCITY: f64 = 0.48;

const EPS: f64 = 1e-9;
const MAX_SUBSTEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub vertical_velocity: f64,
}

impl AgentPose {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        AgentPose {
            x,
            y,
            z,
            pitch: 0.0,
            yaw: 0.0,
            vertical_velocity: 0.0,
        }
    }

    pub fn eye(&self) -> [f64; 3] {
        [self.x, self.y + EYE_HEIGHT, self.z]
    }

    /// Unit view vector from pitch and yaw.
    pub fn view_direction(&self) -> [f64; 3] {
        view_vector(self.pitch, self.yaw)
    }

    /// Apply a camera delta: pitch is clamped to [−90, 90], yaw wrapped to [0, 360).
    pub fn turn(&mut self, d_pitch: f64, d_yaw: f64) {
        self.pitch = (self.pitch + d_pitch).clamp(-90.0, 90.0);
        self.yaw = wrap_yaw(self.yaw + d_yaw);
    }

    /// Cell containing the feet, if inside the zone.
    pub fn feet_cell(&self) -> Option<CellCoord> {
        CellCoord::checked(self.x.floor() as i64, (self.y + EPS).floor() as i64, self.z.floor() as i64)
    }

    /// `(x, y, z, pitch, yaw)` as exposed in observations.
    pub fn pose5(&self) -> [f64; 5] {
        [self.x, self.y, self.z, self.pitch, self.yaw]
    }
}

pub fn wrap_yaw(yaw: f64) -> f64 {
    let w = yaw.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Signed smallest difference `to - from` in degrees, in (−180, 180].
pub fn angle_diff(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

pub fn view_vector(pitch: f64, yaw: f64) -> [f64; 3] {
    let (p, y) = (pitch.to_radians(), yaw.to_radians());
    [y.sin() * p.cos(), p.sin(), -y.cos() * p.cos()]
}

/// Yaw (degrees) of the horizontal direction `(dx, dz)`.
pub fn yaw_of(dx: f64, dz: f64) -> f64 {
    wrap_yaw(dx.atan2(-dz).to_degrees())
}

/// Horizontal unit displacement for a movement verb at the given yaw.
fn step_direction(verb: Verb, yaw: f64) -> (f64, f64) {
    let y = yaw.to_radians();
    let forward = (y.sin(), -y.cos());
    let right = (y.cos(), y.sin());
    match verb {
        Verb::StepForward => forward,
        Verb::StepBackward => (-forward.0, -forward.1),
        Verb::StepRight => right,
        Verb::StepLeft => (-right.0, -right.1),
        _ => (0.0, 0.0),
    }
}

/// True if the body box at `(x, y, z)` overlaps a solid cell, the ground, or a wall.
pub fn body_collides(x: f64, y: f64, z: f64, grid: &Grid) -> bool {
    if x - HALF_WIDTH < -EPS
        || x + HALF_WIDTH > X_SIZE as f64 + EPS
        || z - HALF_WIDTH < -EPS
        || z + HALF_WIDTH > Z_SIZE as f64 + EPS
        || y < -EPS
    {
        return true;
    }
    let x0 = (x - HALF_WIDTH + EPS).floor() as i64;
    let x1 = (x + HALF_WIDTH - EPS).floor() as i64;
    let y0 = (y + EPS).floor() as i64;
    let y1 = (y + BODY_HEIGHT - EPS).floor() as i64;
    let z0 = (z - HALF_WIDTH + EPS).floor() as i64;
    let z1 = (z + HALF_WIDTH - EPS).floor() as i64;
    for cy in y0..=y1 {
        for cx in x0..=x1 {
            for cz in z0..=z1 {
                if grid.is_solid(cx, cy, cz) {
                    return true;
                }
            }
        }
    }
    false
}

/// True if the body box overlaps the interior of `cell`.
pub fn body_overlaps_cell(pose: &AgentPose, cell: CellCoord) -> bool {
    let (cx, cy, cz) = (cell.x() as f64, cell.y() as f64, cell.z() as f64);
    pose.x - HALF_WIDTH < cx + 1.0 - EPS
        && pose.x + HALF_WIDTH > cx + EPS
        && pose.y < cy + 1.0 - EPS
        && pose.y + BODY_HEIGHT > cy + EPS
        && pose.z - HALF_WIDTH < cz + 1.0 - EPS
        && pose.z + HALF_WIDTH > cz + EPS
}

pub fn on_ground(pose: &AgentPose, grid: &Grid) -> bool {
    pose.vertical_velocity <= 0.0 && body_collides(pose.x, pose.y - 0.01, pose.z, grid)
}

/// Move along x (axis 0) or z (axis 2) by at most one cell, stopping at contact.
fn slide(pose: &mut AgentPose, axis: usize, delta: f64, grid: &Grid) {
    if delta == 0.0 {
        return;
    }
    let old = if axis == 0 { pose.x } else { pose.z };
    let mut new = old + delta;
    let at = |p: &AgentPose, v: f64| {
        if axis == 0 {
            body_collides(v, p.y, p.z, grid)
        } else {
            body_collides(p.x, p.y, v, grid)
        }
    };
    if at(pose, new) {
        new = if delta > 0.0 {
            (old + HALF_WIDTH - EPS).ceil() - HALF_WIDTH
        } else {
            (old - HALF_WIDTH + EPS).floor() + HALF_WIDTH
        };
        // the contact position must not lie beyond the requested move
        if (new - old).abs() > delta.abs() || at(pose, new) {
            new = old;
        }
    }
    if axis == 0 {
        pose.x = new;
    } else {
        pose.z = new;
    }
}

/// Remove float drift near integer heights so resting positions compare exactly.
fn snap(y: f64) -> f64 {
    let r = y.round();
    if (y - r).abs() < EPS {
        r.max(0.0)
    } else {
        y
    }
}

/// One gravity tick: integrate vertical velocity and resolve floor/ceiling contact.
pub fn tick_physics(pose: &mut AgentPose, grid: &Grid) {
    if on_ground(pose, grid) {
        pose.vertical_velocity = 0.0;
        return;
    }
    pose.vertical_velocity = (pose.vertical_velocity + GRAVITY).max(TERMINAL_VELOCITY);
    let total = pose.vertical_velocity;
    let n = (total.abs() / MAX_SUBSTEP).ceil().max(1.0) as usize;
    let dy = total / n as f64;
    for _ in 0..n {
        let new = pose.y + dy;
        if body_collides(pose.x, new, pose.z, grid) {
            if dy < 0.0 {
                pose.y = (new - EPS).ceil().max(0.0);
            } else {
                pose.y = (new + BODY_HEIGHT + EPS).floor() - BODY_HEIGHT;
            }
            if body_collides(pose.x, pose.y, pose.z, grid) {
                pose.y -= dy;
            }
            pose.vertical_velocity = 0.0;
            return;
        }
        pose.y = snap(new);
    }
}

/// Apply a movement verb followed by one physics tick.
pub fn apply_movement(pose: &AgentPose, verb: Verb, grid: &Grid) -> AgentPose {
    let mut p = *pose;
    match verb {
        Verb::Jump => {
            if on_ground(&p, grid) {
                p.vertical_velocity = JUMP_VELOCITY;
            }
        }
        _ => {
            let (dx, dz) = step_direction(verb, p.yaw);
            slide(&mut p, 0, dx * STEP_LENGTH, grid);
            slide(&mut p, 2, dz * STEP_LENGTH, grid);
        }
    }
    tick_physics(&mut p, grid);
    p
}
