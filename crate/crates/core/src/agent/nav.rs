//! Walkable-column graph used by the scripted builder.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::env::{on_ground, AgentPose};
use crate::voxel::{Grid, X_SIZE, Y_SIZE, Z_SIZE};

/// A standing spot: column `(x, z)` with feet at height `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub x: i64,
    pub h: i64,
    pub z: i64,
}

impl Node {
    pub fn new(x: i64, h: i64, z: i64) -> Self {
        Node { x, h, z }
    }

    /// Feet position at the column center.
    pub fn center(&self) -> [f64; 3] {
        [self.x as f64 + 0.5, self.h as f64, self.z as f64 + 0.5]
    }

    pub fn eye(&self) -> [f64; 3] {
        let c = self.center();
        [c[0], c[1] + crate::env::EYE_HEIGHT, c[2]]
    }
}

/// Highest feet height considered; standing on top of the top layer.
pub const MAX_STAND: i64 = Y_SIZE as i64;

fn column_in_zone(x: i64, z: i64) -> bool {
    (0..X_SIZE as i64).contains(&x) && (0..Z_SIZE as i64).contains(&z)
}

/// Both body cells free and something to stand on.
pub fn standable(grid: &Grid, x: i64, h: i64, z: i64) -> bool {
    column_in_zone(x, z)
        && (0..=MAX_STAND).contains(&h)
        && !grid.is_solid(x, h, z)
        && !grid.is_solid(x, h + 1, z)
        && (h == 0 || grid.is_solid(x, h - 1, z))
}

/// Node the agent currently occupies, if it is resting on a surface.
pub fn node_of(pose: &AgentPose, grid: &Grid) -> Option<Node> {
    if !on_ground(pose, grid) {
        return None;
    }
    let h = pose.y.round();
    if (pose.y - h).abs() > 1e-6 {
        return None;
    }
    let n = Node::new(pose.x.floor() as i64, h as i64, pose.z.floor() as i64);
    standable(grid, n.x, n.h, n.z).then_some(n)
}

const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Nodes reachable in one move: same level, one up (jump), or any drop.
pub fn neighbors(grid: &Grid, n: Node) -> impl Iterator<Item = Node> + '_ {
    DIRS.iter().filter_map(move |&(dx, dz)| {
        let (x, z) = (n.x + dx, n.z + dz);
        if !column_in_zone(x, z) {
            return None;
        }
        if standable(grid, x, n.h, z) {
            return Some(Node::new(x, n.h, z));
        }
        if standable(grid, x, n.h + 1, z) && !grid.is_solid(n.x, n.h + 2, n.z) {
            return Some(Node::new(x, n.h + 1, z));
        }
        if grid.is_solid(x, n.h, z) || grid.is_solid(x, n.h + 1, z) {
            return None;
        }
        let landing = (0..n.h).rev().find(|&y| grid.is_solid(x, y, z)).map_or(0, |y| y + 1);
        standable(grid, x, landing, z).then_some(Node::new(x, landing, z))
    })
}

/// Breadth-first search tree from `start`.
#[derive(Debug, Clone)]
pub struct Reach {
    pub start: Node,
    parent: HashMap<Node, Option<Node>>,
    /// Nodes in nondecreasing distance order.
    pub order: Vec<(Node, u32)>,
}

impl Reach {
    pub fn from(grid: &Grid, start: Node) -> Self {
        let mut parent = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        parent.insert(start, None);
        queue.push_back((start, 0));
        while let Some((n, d)) = queue.pop_front() {
            order.push((n, d));
            for m in neighbors(grid, n) {
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(m) {
                    e.insert(Some(n));
                    queue.push_back((m, d + 1));
                }
            }
        }
        Reach { start, parent, order }
    }

    pub fn contains(&self, n: Node) -> bool {
        self.parent.contains_key(&n)
    }

    /// Nodes from the start (excluded) to `goal` (included).
    pub fn path_to(&self, goal: Node) -> Option<Vec<Node>> {
        let mut path = Vec::new();
        let mut cur = goal;
        loop {
            let p = *self.parent.get(&cur)?;
            match p {
                Some(prev) => {
                    path.push(cur);
                    cur = prev;
                }
                None => break,
            }
        }
        path.reverse();
        Some(path)
    }
}
