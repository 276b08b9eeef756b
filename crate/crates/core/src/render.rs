//! First-person software renderer.
//!
//! One ray per pixel through the block grid with flat per-face shading.
//! The ground is the infinite plane `y = 0` with a checkerboard; everything
//! else is sky. Output uses a small closed palette so frames compress well
//! and are easy to compare.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::env::AgentPose;
use crate::voxel::{in_zone, raycast, BlockColor, Face, Grid, HitKind};

pub const SKY: [u8; 3] = [135, 190, 235];
/// Checkerboard colors inside the build zone.
pub const ZONE_GROUND: [[u8; 3]; 2] = [[150, 150, 150], [120, 120, 120]];
/// Checkerboard colors outside the build zone.
pub const OUTER_GROUND: [[u8; 3]; 2] = [[90, 140, 70], [75, 120, 60]];

/// Base RGB of colors 1..=6.
pub const BLOCK_RGB: [[u8; 3]; 6] = [
    [40, 80, 220],
    [40, 170, 60],
    [210, 40, 40],
    [240, 140, 30],
    [140, 60, 190],
    [235, 215, 40],
];

/// Brightness of a face by its outward normal.
pub fn face_brightness(face: Face) -> f64 {
    match face {
        Face::PosY => 1.0,
        Face::NegY => 0.5,
        Face::PosX | Face::NegX => 0.8,
        Face::PosZ | Face::NegZ => 0.7,
    }
}

fn shade(rgb: [u8; 3], k: f64) -> [u8; 3] {
    rgb.map(|c| (c as f64 * k).round() as u8)
}

/// Shaded color of a block face.
pub fn face_color(color: BlockColor, face: Face) -> [u8; 3] {
    shade(BLOCK_RGB[color.value() as usize - 1], face_brightness(face))
}

/// Every color the renderer can emit.
pub fn palette() -> Vec<[u8; 3]> {
    let mut p = vec![SKY];
    p.extend(ZONE_GROUND);
    p.extend(OUTER_GROUND);
    for c in BlockColor::all_placeable() {
        for f in Face::ALL {
            p.push(face_color(c, f));
        }
    }
    p.sort();
    p.dedup();
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraParams {
    pub width: usize,
    pub height: usize,
    /// Vertical field of view, degrees.
    pub fov: f64,
    pub near: f64,
    /// Block hits beyond this distance are not drawn. The ground plane is unbounded.
    pub far: f64,
}

impl Default for CameraParams {
    fn default() -> Self {
        CameraParams {
            width: 64,
            height: 64,
            fov: 70.0,
            near: 0.05,
            far: 32.0,
        }
    }
}

/// Row-major RGB8 image.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Image({}x{})", self.width, self.height)
    }
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Binary PPM (P6).
    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)
    }
}

fn ground_color(x: f64, z: f64) -> [u8; 3] {
    let (cx, cz) = (x.floor() as i64, z.floor() as i64);
    let parity = (cx + cz).rem_euclid(2) as usize;
    if in_zone(cx, 0, cz) {
        ZONE_GROUND[parity]
    } else {
        OUTER_GROUND[parity]
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Color seen along one ray from `origin`.
pub fn trace(grid: &Grid, origin: [f64; 3], dir: [f64; 3], params: &CameraParams) -> [u8; 3] {
    let start = [
        origin[0] + dir[0] * params.near,
        origin[1] + dir[1] * params.near,
        origin[2] + dir[2] * params.near,
    ];
    if let Some(hit) = raycast(grid, start, dir, params.far - params.near) {
        if hit.kind == HitKind::Block {
            return face_color(grid.get(hit.cell), hit.face);
        }
    }
    if dir[1] < 0.0 && start[1] > 0.0 {
        let t = -start[1] / dir[1];
        return ground_color(start[0] + dir[0] * t, start[2] + dir[2] * t);
    }
    SKY
}

/// Render the agent's first-person view.
pub fn render(pose: &AgentPose, grid: &Grid, params: &CameraParams) -> Image {
    let forward = pose.view_direction();
    let yaw = pose.yaw.to_radians();
    let right = [yaw.cos(), 0.0, yaw.sin()];
    // up = right × forward
    let up = [
        right[1] * forward[2] - right[2] * forward[1],
        right[2] * forward[0] - right[0] * forward[2],
        right[0] * forward[1] - right[1] * forward[0],
    ];
    let half_h = (params.fov.to_radians() / 2.0).tan();
    let half_w = half_h * params.width as f64 / params.height as f64;
    let eye = pose.eye();

    let mut pixels = Vec::with_capacity(params.width * params.height * 3);
    for j in 0..params.height {
        let v = (1.0 - 2.0 * (j as f64 + 0.5) / params.height as f64) * half_h;
        for i in 0..params.width {
            let u = (2.0 * (i as f64 + 0.5) / params.width as f64 - 1.0) * half_w;
            let dir = normalize([
                forward[0] + u * right[0] + v * up[0],
                forward[1] + u * right[1] + v * up[1],
                forward[2] + u * right[2] + v * up[2],
            ]);
            pixels.extend(trace(grid, eye, dir, params));
        }
    }
    Image {
        width: params.width,
        height: params.height,
        pixels,
    }
}
