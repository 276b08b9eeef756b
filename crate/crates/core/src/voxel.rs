//! Block grid for the 11×11×9 build zone.
//!
//! Cells are stored in `(y, x, z)` order: `y` is the vertical axis and the
//! outermost index, matching the layout the reward computation iterates over.
//! Block lists on the wire and in task files are `[x, y, z, color]`
//! quadruples sorted by `(y, x, z)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Horizontal extent along x.
pub const X_SIZE: usize = 11;
/// Vertical extent.
pub const Y_SIZE: usize = 9;
/// Horizontal extent along z.
pub const Z_SIZE: usize = 11;
/// Total number of cells in the zone.
pub const CELL_COUNT: usize = X_SIZE * Y_SIZE * Z_SIZE;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VoxelError {
    #[error("coordinate ({x}, {y}, {z}) is outside the {X_SIZE}x{Y_SIZE}x{Z_SIZE} build zone")]
    OutOfBounds { x: i64, y: i64, z: i64 },
    #[error("block color {0} is not in [0, 6]")]
    InvalidColor(i64),
}

/// Block id: 0 is air, 1..=6 are the placeable colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct BlockColor(u8);

impl BlockColor {
    pub const AIR: BlockColor = BlockColor(0);
    pub const BLUE: BlockColor = BlockColor(1);
    pub const GREEN: BlockColor = BlockColor(2);
    pub const RED: BlockColor = BlockColor(3);
    pub const ORANGE: BlockColor = BlockColor(4);
    pub const PURPLE: BlockColor = BlockColor(5);
    pub const YELLOW: BlockColor = BlockColor(6);

    /// Number of placeable colors.
    pub const PLACEABLE: usize = 6;

    pub fn new(value: u8) -> Result<Self, VoxelError> {
        if value <= 6 {
            Ok(BlockColor(value))
        } else {
            Err(VoxelError::InvalidColor(value as i64))
        }
    }

    /// Build a placeable color from its 1-based index. Panics outside 1..=6.
    pub const fn placeable(value: u8) -> Self {
        assert!(value >= 1 && value <= 6);
        BlockColor(value)
    }

    pub const fn value(self) -> u8 {
        self.0
    }

    pub const fn is_air(self) -> bool {
        self.0 == 0
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            0 => "air",
            1 => "blue",
            2 => "green",
            3 => "red",
            4 => "orange",
            5 => "purple",
            _ => "yellow",
        }
    }

    /// All six placeable colors in id order.
    pub fn all_placeable() -> impl Iterator<Item = BlockColor> {
        (1..=6).map(BlockColor)
    }
}

impl TryFrom<u8> for BlockColor {
    type Error = VoxelError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        BlockColor::new(value)
    }
}

impl TryFrom<i64> for BlockColor {
    type Error = VoxelError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        if (0..=6).contains(&value) {
            Ok(BlockColor(value as u8))
        } else {
            Err(VoxelError::InvalidColor(value))
        }
    }
}

impl From<BlockColor> for u8 {
    fn from(c: BlockColor) -> u8 {
        c.0
    }
}

impl fmt::Display for BlockColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A cell position that is always inside the zone. Serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i64; 3]", into = "[i64; 3]")]
pub struct CellCoord {
    x: u8,
    y: u8,
    z: u8,
}

impl CellCoord {
    pub fn new(x: i64, y: i64, z: i64) -> Result<Self, VoxelError> {
        if in_zone(x, y, z) {
            Ok(CellCoord {
                x: x as u8,
                y: y as u8,
                z: z as u8,
            })
        } else {
            Err(VoxelError::OutOfBounds { x, y, z })
        }
    }

    /// Like [`CellCoord::new`] but returns `None` instead of an error.
    pub fn checked(x: i64, y: i64, z: i64) -> Option<Self> {
        CellCoord::new(x, y, z).ok()
    }

    pub fn x(self) -> i64 {
        self.x as i64
    }

    pub fn y(self) -> i64 {
        self.y as i64
    }

    pub fn z(self) -> i64 {
        self.z as i64
    }

    /// Neighbor across `face`, if it is still in the zone.
    pub fn offset(self, face: Face) -> Option<CellCoord> {
        let (dx, dy, dz) = face.normal();
        CellCoord::checked(self.x() + dx, self.y() + dy, self.z() + dz)
    }

    pub fn manhattan(self, other: CellCoord) -> u32 {
        ((self.x() - other.x()).abs() + (self.y() - other.y()).abs() + (self.z() - other.z()).abs())
            as u32
    }

    fn index(self) -> usize {
        (self.y as usize * X_SIZE + self.x as usize) * Z_SIZE + self.z as usize
    }

    fn from_index(i: usize) -> Self {
        let z = i % Z_SIZE;
        let x = (i / Z_SIZE) % X_SIZE;
        let y = i / (Z_SIZE * X_SIZE);
        CellCoord {
            x: x as u8,
            y: y as u8,
            z: z as u8,
        }
    }
}

impl TryFrom<[i64; 3]> for CellCoord {
    type Error = VoxelError;

    fn try_from([x, y, z]: [i64; 3]) -> Result<Self, Self::Error> {
        CellCoord::new(x, y, z)
    }
}

impl From<CellCoord> for [i64; 3] {
    fn from(c: CellCoord) -> [i64; 3] {
        [c.x(), c.y(), c.z()]
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

pub fn in_zone(x: i64, y: i64, z: i64) -> bool {
    (0..X_SIZE as i64).contains(&x) && (0..Y_SIZE as i64).contains(&y) && (0..Z_SIZE as i64).contains(&z)
}

/// One of the six axis-aligned cube faces, named by outward normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::PosX, Face::NegX, Face::PosY, Face::NegY, Face::PosZ, Face::NegZ];

    pub fn normal(self) -> (i64, i64, i64) {
        match self {
            Face::PosX => (1, 0, 0),
            Face::NegX => (-1, 0, 0),
            Face::PosY => (0, 1, 0),
            Face::NegY => (0, -1, 0),
            Face::PosZ => (0, 0, 1),
            Face::NegZ => (0, 0, -1),
        }
    }

    pub fn opposite(self) -> Face {
        match self {
            Face::PosX => Face::NegX,
            Face::NegX => Face::PosX,
            Face::PosY => Face::NegY,
            Face::NegY => Face::PosY,
            Face::PosZ => Face::NegZ,
            Face::NegZ => Face::PosZ,
        }
    }
}

/// A single-cell write, as reported by [`Grid::set`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockChange {
    pub cell: CellCoord,
    pub old: BlockColor,
    pub new: BlockColor,
}

impl BlockChange {
    pub fn is_noop(&self) -> bool {
        self.old == self.new
    }
}

/// Dense block grid over the build zone. Serializes as a sorted `[x, y, z, color]` list.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<[i64; 4]>", into = "Vec<[i64; 4]>")]
pub struct Grid {
    cells: [u8; CELL_COUNT],
    nonzero: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid::empty()
    }
}

impl TryFrom<Vec<[i64; 4]>> for Grid {
    type Error = VoxelError;

    fn try_from(list: Vec<[i64; 4]>) -> Result<Self, Self::Error> {
        Grid::from_block_list(&list)
    }
}

impl From<Grid> for Vec<[i64; 4]> {
    fn from(g: Grid) -> Self {
        g.blocks()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nonzero", &self.nonzero)
            .field("blocks", &self.blocks())
            .finish()
    }
}

impl Grid {
    pub fn empty() -> Self {
        Grid {
            cells: [0; CELL_COUNT],
            nonzero: 0,
        }
    }

    /// Build a grid from `(cell, color)` pairs; later entries overwrite earlier ones.
    pub fn from_blocks<I>(blocks: I) -> Self
    where
        I: IntoIterator<Item = (CellCoord, BlockColor)>,
    {
        let mut g = Grid::empty();
        for (c, v) in blocks {
            g.set(c, v);
        }
        g
    }

    pub fn get(&self, c: CellCoord) -> BlockColor {
        BlockColor(self.cells[c.index()])
    }

    /// Bounds-checked read from raw integer coordinates.
    pub fn get_at(&self, x: i64, y: i64, z: i64) -> Result<BlockColor, VoxelError> {
        CellCoord::new(x, y, z).map(|c| self.get(c))
    }

    /// Returns air for coordinates outside the zone.
    pub fn get_or_air(&self, x: i64, y: i64, z: i64) -> BlockColor {
        match CellCoord::checked(x, y, z) {
            Some(c) => self.get(c),
            None => BlockColor::AIR,
        }
    }

    pub fn is_solid(&self, x: i64, y: i64, z: i64) -> bool {
        !self.get_or_air(x, y, z).is_air()
    }

    pub fn set(&mut self, c: CellCoord, v: BlockColor) -> BlockChange {
        let slot = &mut self.cells[c.index()];
        let old = BlockColor(*slot);
        *slot = v.0;
        match (old.is_air(), v.is_air()) {
            (true, false) => self.nonzero += 1,
            (false, true) => self.nonzero -= 1,
            _ => {}
        }
        BlockChange { cell: c, old, new: v }
    }

    /// Bounds-checked write from raw integer coordinates.
    pub fn set_at(&mut self, x: i64, y: i64, z: i64, v: BlockColor) -> Result<BlockChange, VoxelError> {
        CellCoord::new(x, y, z).map(|c| self.set(c, v))
    }

    pub fn nonzero_count(&self) -> usize {
        self.nonzero
    }

    pub fn is_empty(&self) -> bool {
        self.nonzero == 0
    }

    /// Per-color block counts, index 0 = color 1.
    pub fn color_counts(&self) -> [usize; 6] {
        let mut counts = [0usize; 6];
        for &v in self.cells.iter() {
            if v != 0 {
                counts[v as usize - 1] += 1;
            }
        }
        counts
    }

    /// Raw cell bytes in `(y, x, z)` order, shape `(9, 11, 11)`.
    pub fn as_bytes(&self) -> &[u8; CELL_COUNT] {
        &self.cells
    }

    /// Cell bytes re-laid out as `(x, z, y)`, shape `(11, 11, 9)`.
    pub fn to_xzy_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; CELL_COUNT];
        for (i, &v) in self.cells.iter().enumerate() {
            let c = CellCoord::from_index(i);
            out[(c.x as usize * Z_SIZE + c.z as usize) * Y_SIZE + c.y as usize] = v;
        }
        out
    }

    /// Nonzero cells in `(y, x, z)` scan order.
    pub fn iter_blocks(&self) -> impl Iterator<Item = (CellCoord, BlockColor)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (CellCoord::from_index(i), BlockColor(v)))
    }

    /// All cells in `(y, x, z)` scan order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (CellCoord, BlockColor)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, &v)| (CellCoord::from_index(i), BlockColor(v)))
    }

    /// Serialized block list: `[x, y, z, color]` sorted by `(y, x, z)`.
    pub fn blocks(&self) -> Vec<[i64; 4]> {
        self.iter_blocks()
            .map(|(c, v)| [c.x(), c.y(), c.z(), v.0 as i64])
            .collect()
    }

    /// Parse a block list. Duplicate cells keep the last color.
    pub fn from_block_list(list: &[[i64; 4]]) -> Result<Self, VoxelError> {
        let mut g = Grid::empty();
        for &[x, y, z, v] in list {
            let c = CellCoord::new(x, y, z)?;
            g.set(c, BlockColor::try_from(v)?);
        }
        Ok(g)
    }

    /// Rotate the horizontal plane by 90° about the zone center:
    /// `(x, z) -> (z, X_SIZE - 1 - x)`. Layers keep their height.
    pub fn rotate_y90(&self) -> Grid {
        let mut out = Grid::empty();
        for (c, v) in self.iter_blocks() {
            let (nx, nz) = rotate_xz(c.x(), c.z(), 1);
            out.set(CellCoord::new(nx, c.y(), nz).expect("rotation maps the zone onto itself"), v);
        }
        out
    }

    /// Shift horizontally; blocks leaving the zone are dropped.
    pub fn translate_xz(&self, dx: i64, dz: i64) -> Grid {
        let mut out = Grid::empty();
        for (c, v) in self.iter_blocks() {
            if let Some(n) = CellCoord::checked(c.x() + dx, c.y(), c.z() + dz) {
                out.set(n, v);
            }
        }
        out
    }

    /// Partition solid cells into face-connected (6-neighborhood) components.
    /// Components are listed in scan order of their first cell; each is sorted.
    pub fn connected_components(&self) -> Vec<Vec<CellCoord>> {
        let mut seen = [false; CELL_COUNT];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for (start, _) in self.iter_blocks() {
            if seen[start.index()] {
                continue;
            }
            seen[start.index()] = true;
            stack.push(start);
            let mut comp = Vec::new();
            while let Some(c) = stack.pop() {
                comp.push(c);
                for face in Face::ALL {
                    if let Some(n) = c.offset(face) {
                        if !seen[n.index()] && !self.get(n).is_air() {
                            seen[n.index()] = true;
                            stack.push(n);
                        }
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    /// Highest solid cell in a column.
    pub fn column_top(&self, x: i64, z: i64) -> Option<i64> {
        (0..Y_SIZE as i64).rev().find(|&y| self.is_solid(x, y, z))
    }
}

/// Apply `turns` quarter rotations to a horizontal coordinate.
pub fn rotate_xz(x: i64, z: i64, turns: u8) -> (i64, i64) {
    let (mut x, mut z) = (x, z);
    for _ in 0..(turns % 4) {
        let nx = z;
        let nz = X_SIZE as i64 - 1 - x;
        x = nx;
        z = nz;
    }
    (x, z)
}

/// What a ray struck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HitKind {
    Block,
    /// The ground plane under the zone; `cell` is the air cell at `y = 0` of the hit column.
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayHit {
    pub cell: CellCoord,
    pub face: Face,
    pub distance: f64,
    pub kind: HitKind,
}

/// A lattice cell crossed by a ray, with the distance at which the ray enters it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayStep {
    pub cell: (i64, i64, i64),
    pub entry: f64,
    /// Face of `cell` through which the ray entered.
    pub face: Face,
}

/// Grid walk over the unbounded unit lattice: each step advances to the
/// nearest axis boundary. Yields cells after the one containing the origin.
#[derive(Debug, Clone)]
pub struct VoxelRay {
    cell: [i64; 3],
    step: [i64; 3],
    t_max: [f64; 3],
    t_delta: [f64; 3],
}

impl VoxelRay {
    pub fn new(origin: [f64; 3], dir: [f64; 3]) -> Self {
        let mut cell = [0i64; 3];
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            cell[a] = origin[a].floor() as i64;
            if dir[a] > 0.0 {
                step[a] = 1;
                t_delta[a] = 1.0 / dir[a];
                t_max[a] = ((cell[a] + 1) as f64 - origin[a]) / dir[a];
            } else if dir[a] < 0.0 {
                step[a] = -1;
                t_delta[a] = -1.0 / dir[a];
                t_max[a] = (cell[a] as f64 - origin[a]) / dir[a];
            }
        }
        VoxelRay {
            cell,
            step,
            t_max,
            t_delta,
        }
    }

    pub fn origin_cell(&self) -> (i64, i64, i64) {
        (self.cell[0], self.cell[1], self.cell[2])
    }

    /// Axis step direction per axis (−1, 0 or +1).
    pub fn steps(&self) -> [i64; 3] {
        self.step
    }
}

impl Iterator for VoxelRay {
    type Item = RayStep;

    fn next(&mut self) -> Option<RayStep> {
        let axis = if self.t_max[0] <= self.t_max[1] && self.t_max[0] <= self.t_max[2] {
            0
        } else if self.t_max[1] <= self.t_max[2] {
            1
        } else {
            2
        };
        let t = self.t_max[axis];
        if !t.is_finite() {
            return None;
        }
        self.cell[axis] += self.step[axis];
        self.t_max[axis] += self.t_delta[axis];
        let face = match (axis, self.step[axis] > 0) {
            (0, true) => Face::NegX,
            (0, false) => Face::PosX,
            (1, true) => Face::NegY,
            (1, false) => Face::PosY,
            (2, true) => Face::NegZ,
            _ => Face::PosZ,
        };
        Some(RayStep {
            cell: (self.cell[0], self.cell[1], self.cell[2]),
            entry: t,
            face,
        })
    }
}

/// True once the walk has left the zone's bounding box and is moving away from it.
pub(crate) fn ray_left_zone(cell: (i64, i64, i64), steps: [i64; 3]) -> bool {
    let (x, y, z) = cell;
    (x < 0 && steps[0] <= 0)
        || (x >= X_SIZE as i64 && steps[0] >= 0)
        || (z < 0 && steps[2] <= 0)
        || (z >= Z_SIZE as i64 && steps[2] >= 0)
        || (y >= Y_SIZE as i64 && steps[1] >= 0)
}

/// First solid cell (or ground-plane cell) along the ray within `reach`.
///
/// `direction` must be unit length. A ray starting inside a solid cell hits it
/// at distance 0.
pub fn raycast(grid: &Grid, origin: [f64; 3], direction: [f64; 3], reach: f64) -> Option<RayHit> {
    let mut ray = VoxelRay::new(origin, direction);
    let (ox, oy, oz) = ray.origin_cell();
    if let Some(c) = CellCoord::checked(ox, oy, oz) {
        if !grid.get(c).is_air() {
            let face = dominant_entry_face(direction);
            return Some(RayHit {
                cell: c,
                face,
                distance: 0.0,
                kind: HitKind::Block,
            });
        }
    }
    let steps = ray.steps();
    for RayStep { cell, entry, face } in ray.by_ref() {
        if entry > reach {
            return None;
        }
        let (x, y, z) = cell;
        if y < 0 {
            // crossed the ground plane from above
            return CellCoord::checked(x, 0, z).map(|c| RayHit {
                cell: c,
                face: Face::PosY,
                distance: entry,
                kind: HitKind::Ground,
            });
        }
        if let Some(c) = CellCoord::checked(x, y, z) {
            if !grid.get(c).is_air() {
                return Some(RayHit {
                    cell: c,
                    face,
                    distance: entry,
                    kind: HitKind::Block,
                });
            }
        } else if ray_left_zone(cell, steps) {
            return None;
        }
    }
    None
}

fn dominant_entry_face(dir: [f64; 3]) -> Face {
    let ax = dir[0].abs();
    let ay = dir[1].abs();
    let az = dir[2].abs();
    if ay >= ax && ay >= az {
        if dir[1] < 0.0 {
            Face::PosY
        } else {
            Face::NegY
        }
    } else if ax >= az {
        if dir[0] < 0.0 {
            Face::PosX
        } else {
            Face::NegX
        }
    } else if dir[2] < 0.0 {
        Face::PosZ
    } else {
        Face::NegZ
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cc(x: i64, y: i64, z: i64) -> CellCoord {
        CellCoord::new(x, y, z).unwrap()
    }

    fn arb_grid(max_blocks: usize) -> impl Strategy<Value = Grid> {
        proptest::collection::vec((0i64..11, 0i64..9, 0i64..11, 1u8..=6), 0..max_blocks).prop_map(|v| {
            Grid::from_blocks(v.into_iter().map(|(x, y, z, c)| (cc(x, y, z), BlockColor::new(c).unwrap())))
        })
    }

    #[test]
    fn colors_out_of_range_are_rejected() {
        assert!(BlockColor::new(7).is_err());
        assert!(BlockColor::try_from(-1i64).is_err());
        assert_eq!(BlockColor::new(6).unwrap(), BlockColor::YELLOW);
        assert!(serde_json::from_str::<BlockColor>("9").is_err());
    }

    #[test]
    fn coords_are_bounds_checked() {
        assert!(CellCoord::new(11, 0, 0).is_err());
        assert!(CellCoord::new(0, 9, 0).is_err());
        assert!(CellCoord::new(0, 0, -1).is_err());
        assert!(CellCoord::new(10, 8, 10).is_ok());
        assert!(Grid::empty().get_at(0, 0, 11).is_err());
    }

    #[test]
    fn get_and_set() {
        let mut g = Grid::empty();
        assert_eq!(g.get(cc(4, 2, 7)), BlockColor::AIR);
        let ch = g.set(cc(4, 2, 7), BlockColor::RED);
        assert_eq!(ch.old, BlockColor::AIR);
        assert_eq!(g.get(cc(4, 2, 7)), BlockColor::RED);
        assert_eq!(g.nonzero_count(), 1);

        let same = g.set(cc(4, 2, 7), BlockColor::RED);
        assert!(same.is_noop());
        assert_eq!(g.nonzero_count(), 1);

        g.set(cc(4, 2, 7), BlockColor::AIR);
        assert_eq!(g.nonzero_count(), 0);
    }

    #[test]
    fn single_block_rotates_to_corner() {
        let g = Grid::from_blocks([(cc(0, 0, 0), BlockColor::BLUE)]);
        let r = g.rotate_y90();
        assert_eq!(r.blocks(), vec![[0, 0, 10, 1]]);
    }

    #[test]
    fn plus_shape_at_center_is_fixed() {
        let cells = [(5, 5), (4, 5), (6, 5), (5, 4), (5, 6)];
        let g = Grid::from_blocks(cells.iter().map(|&(x, z)| (cc(x, 3, z), BlockColor::GREEN)));
        assert_eq!(g.rotate_y90(), g);
    }

    #[test]
    fn translate_edges() {
        let g = Grid::from_blocks([(cc(10, 0, 3), BlockColor::BLUE)]);
        assert_eq!(g.translate_xz(0, 0), g);
        assert!(g.translate_xz(1, 0).is_empty());
    }

    #[test]
    fn components() {
        let single = Grid::from_blocks([(cc(1, 1, 1), BlockColor::BLUE)]);
        assert_eq!(single.connected_components().len(), 1);

        let diag = Grid::from_blocks([(cc(1, 0, 1), BlockColor::BLUE), (cc(2, 0, 2), BlockColor::BLUE)]);
        assert_eq!(diag.connected_components().len(), 2);

        let mut cube = Grid::empty();
        for y in 0..3 {
            for x in 3..6 {
                for z in 3..6 {
                    cube.set(cc(x, y, z), BlockColor::RED);
                }
            }
        }
        let comps = cube.connected_components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].len(), 27);
    }

    #[test]
    fn ray_down_hits_top_face() {
        let g = Grid::from_blocks([(cc(5, 0, 5), BlockColor::BLUE)]);
        let hit = raycast(&g, [5.5, 3.0, 5.5], [0.0, -1.0, 0.0], 3.0).unwrap();
        assert_eq!(hit.cell, cc(5, 0, 5));
        assert_eq!(hit.face, Face::PosY);
        assert_eq!(hit.kind, HitKind::Block);
        assert!((hit.distance - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ray_into_air_hits_ground_or_nothing() {
        let g = Grid::empty();
        let d = {
            let v = [0.0f64, -1.0, -1.0];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        };
        let hit = raycast(&g, [5.5, 1.6, 5.5], d, 3.0).unwrap();
        assert_eq!(hit.kind, HitKind::Ground);
        assert_eq!(hit.cell, cc(5, 0, 3));
        assert_eq!(hit.face, Face::PosY);
        assert!(hit.distance <= 3.0);
        // too short to reach the ground
        assert!(raycast(&g, [5.5, 1.6, 5.5], d, 2.0).is_none());
        // looking up never hits
        assert!(raycast(&g, [5.5, 1.6, 5.5], [0.0, 1.0, 0.0], 100.0).is_none());
    }

    /// Fine-step marching oracle: first solid cell whose interior the ray reaches.
    fn march(grid: &Grid, o: [f64; 3], d: [f64; 3], reach: f64) -> Option<CellCoord> {
        let mut t = 0.0;
        while t <= reach {
            let p = [o[0] + d[0] * t, o[1] + d[1] * t, o[2] + d[2] * t];
            let (x, y, z) = (p[0].floor() as i64, p[1].floor() as i64, p[2].floor() as i64);
            if let Some(c) = CellCoord::checked(x, y, z) {
                if !grid.get(c).is_air() {
                    return Some(c);
                }
            }
            t += 0.001;
        }
        None
    }

    /// Length of the ray segment inside a cell (slab test).
    fn chord_in_cell(o: [f64; 3], d: [f64; 3], c: CellCoord) -> f64 {
        let lo = [c.x() as f64, c.y() as f64, c.z() as f64];
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for a in 0..3 {
            if d[a] == 0.0 {
                if o[a] < lo[a] || o[a] > lo[a] + 1.0 {
                    return 0.0;
                }
                continue;
            }
            let ta = (lo[a] - o[a]) / d[a];
            let tb = (lo[a] + 1.0 - o[a]) / d[a];
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
        }
        (t1 - t0).max(0.0)
    }

    #[test]
    fn grazing_ray_along_wall_matches_marching() {
        let mut g = Grid::empty();
        for x in 2..9 {
            for y in 0..3 {
                g.set(cc(x, y, 6), BlockColor::ORANGE);
            }
        }
        // shallow angle toward the wall face at z = 6
        let cases = [
            ([2.3, 1.7, 5.2], [0.99, 0.0, 0.141]),
            ([8.7, 2.4, 5.6], [-0.995, -0.05, 0.0866]),
            ([1.1, 0.5, 5.9], [0.998, 0.0, 0.0632]),
        ];
        for (o, d) in cases {
            let d: [f64; 3] = d;
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let d = [d[0] / n, d[1] / n, d[2] / n];
            let walked = raycast(&g, o, d, 12.0).filter(|h| h.kind == HitKind::Block).map(|h| h.cell);
            assert_eq!(walked, march(&g, o, d, 12.0), "origin {o:?} dir {d:?}");
        }
    }

    proptest! {
        #[test]
        fn four_rotations_are_identity(g in arb_grid(80)) {
            let r = g.rotate_y90().rotate_y90().rotate_y90().rotate_y90();
            prop_assert_eq!(r, g);
        }

        #[test]
        fn rotation_matches_index_permutation(g in arb_grid(40)) {
            let r = g.rotate_y90();
            for (c, v) in g.iter_blocks() {
                prop_assert_eq!(r.get(cc(c.z(), c.y(), 10 - c.x())), v);
            }
            prop_assert_eq!(r.color_counts(), g.color_counts());
        }

        #[test]
        fn translation_drops_only_out_of_zone(g in arb_grid(60), dx in -11i64..=11, dz in -11i64..=11) {
            let t = g.translate_xz(dx, dz);
            let kept = g.iter_blocks().filter(|(c, _)| CellCoord::checked(c.x() + dx, c.y(), c.z() + dz).is_some()).count();
            prop_assert_eq!(t.nonzero_count(), kept);
        }

        #[test]
        fn interior_translation_round_trips(blocks in proptest::collection::vec((2i64..9, 0i64..9, 1i64..10, 1u8..=6), 1..30)) {
            let g = Grid::from_blocks(blocks.into_iter().map(|(x, y, z, c)| (cc(x, y, z), BlockColor::new(c).unwrap())));
            prop_assert_eq!(g.translate_xz(2, -1).translate_xz(-2, 1), g);
        }

        #[test]
        fn components_partition_blocks(g in arb_grid(120)) {
            let comps = g.connected_components();
            let total: usize = comps.iter().map(|c| c.len()).sum();
            prop_assert_eq!(total, g.nonzero_count());
            let mut all: Vec<_> = comps.into_iter().flatten().collect();
            all.sort();
            all.dedup();
            prop_assert_eq!(all.len(), g.nonzero_count());
        }

        #[test]
        fn nonzero_count_is_cached_correctly(g in arb_grid(120)) {
            let actual = g.as_bytes().iter().filter(|&&v| v != 0).count();
            prop_assert_eq!(g.nonzero_count(), actual);
        }

        #[test]
        fn block_list_round_trips(g in arb_grid(60)) {
            prop_assert_eq!(Grid::from_block_list(&g.blocks()).unwrap(), g);
        }

        #[test]
        fn ray_hit_is_reach_independent(
            g in arb_grid(150),
            o in (0.5f64..10.5, 0.2f64..8.5, 0.5f64..10.5),
            d in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
        ) {
            let n = (d.0 * d.0 + d.1 * d.1 + d.2 * d.2).sqrt();
            prop_assume!(n > 0.1);
            let dir = [d.0 / n, d.1 / n, d.2 / n];
            let o = [o.0, o.1, o.2];
            if let Some(h) = raycast(&g, o, dir, 4.0) {
                prop_assert!(h.distance <= 4.0);
                let far = raycast(&g, o, dir, 40.0).unwrap();
                prop_assert_eq!(far.cell, h.cell);
                prop_assert_eq!(far.face, h.face);
            }
        }

        #[test]
        fn ray_walk_distance_is_increasing(
            o in (0.0f64..11.0, 0.0f64..9.0, 0.0f64..11.0),
            d in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
        ) {
            let n = (d.0 * d.0 + d.1 * d.1 + d.2 * d.2).sqrt();
            prop_assume!(n > 0.1);
            let dir = [d.0 / n, d.1 / n, d.2 / n];
            let mut last = 0.0;
            for s in VoxelRay::new([o.0, o.1, o.2], dir).take(60) {
                prop_assert!(s.entry >= last);
                last = s.entry;
            }
        }

        #[test]
        fn ray_matches_marching_oracle(
            g in arb_grid(200),
            o in (0.5f64..10.5, 0.2f64..8.5, 0.5f64..10.5),
            d in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
        ) {
            let n = (d.0 * d.0 + d.1 * d.1 + d.2 * d.2).sqrt();
            prop_assume!(n > 0.1);
            let dir = [d.0 / n, d.1 / n, d.2 / n];
            let o = [o.0, o.1, o.2];
            prop_assume!(g.get_or_air(o[0] as i64, o[1] as i64, o[2] as i64).is_air());
            let walked = raycast(&g, o, dir, 5.0).filter(|h| h.kind == HitKind::Block);
            let marched = march(&g, o, dir, 5.0);
            // the marcher steps over corner slivers shorter than its step and
            // cannot resolve hits within one step of the reach limit
            let sliver = |h: &RayHit| chord_in_cell(o, dir, h.cell) < 0.002;
            match (walked, marched) {
                (Some(h), Some(c)) => prop_assert!(h.cell == c || sliver(&h)),
                (None, None) => {}
                (Some(h), None) => prop_assert!(h.distance > 5.0 - 0.002 || sliver(&h)),
                (None, Some(_)) => {
                    let far = raycast(&g, o, dir, 5.01).filter(|h| h.kind == HitKind::Block);
                    prop_assert!(far.is_some());
                }
            }
        }
    }
}
