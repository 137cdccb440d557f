// SPDX-License-Identifier: Apache-2.0

//! Multi-layer routing grid and its per-node occupancy encoding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::techlib::{Axis, LayerSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridCoord {
    pub x: i32,
    pub y: i32,
    pub layer: u8,
}

impl GridCoord {
    pub const fn new(x: i32, y: i32, layer: u8) -> Self {
        GridCoord { x, y, layer }
    }

    pub fn step(self, dir: Dir) -> GridCoord {
        let (dx, dy, dz) = dir.delta();
        GridCoord { x: self.x + dx, y: self.y + dy, layer: (self.layer as i32 + dz) as u8 }
    }

    pub fn manhattan(self, other: GridCoord) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn same_xy(self, other: GridCoord) -> bool {
        self.x == other.x && self.y == other.y
    }
}

impl fmt::Display for GridCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},L{})", self.x, self.y, self.layer)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dir {
    N,
    S,
    E,
    W,
    Up,
    Down,
}

impl Dir {
    pub const PLANAR: [Dir; 4] = [Dir::N, Dir::S, Dir::E, Dir::W];

    pub fn delta(self) -> (i32, i32, i32) {
        match self {
            Dir::N => (0, 1, 0),
            Dir::S => (0, -1, 0),
            Dir::E => (1, 0, 0),
            Dir::W => (-1, 0, 0),
            Dir::Up => (0, 0, 1),
            Dir::Down => (0, 0, -1),
        }
    }

    pub fn axis(self) -> Option<Axis> {
        match self {
            Dir::N | Dir::S => Some(Axis::Vertical),
            Dir::E | Dir::W => Some(Axis::Horizontal),
            Dir::Up | Dir::Down => None,
        }
    }

    pub fn is_planar(self) -> bool {
        self.axis().is_some()
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::N => Dir::S,
            Dir::S => Dir::N,
            Dir::E => Dir::W,
            Dir::W => Dir::E,
            Dir::Up => Dir::Down,
            Dir::Down => Dir::Up,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Dir::N => 'N',
            Dir::S => 'S',
            Dir::E => 'E',
            Dir::W => 'W',
            Dir::Up => 'U',
            Dir::Down => 'D',
        }
    }

    pub fn from_planar_delta(dx: i32, dy: i32) -> Option<Dir> {
        match (dx.signum(), dy.signum()) {
            (0, 1) => Some(Dir::N),
            (0, -1) => Some(Dir::S),
            (1, 0) => Some(Dir::E),
            (-1, 0) => Some(Dir::W),
            _ => None,
        }
    }
}

/// Node occupancy: 0 empty, 1 one path (crossable), 2 saturated (cross or
/// splitter), 3 blockage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum NodeState {
    Empty = 0,
    Single = 1,
    Saturated = 2,
    Blocked = 3,
}

/// What occupies a state-1 node, used to decide whether a crossing is legal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Occupant {
    Empty,
    /// A path passing straight through along the axis.
    Straight(Axis),
    /// Corners, endpoints, vias and PTL widgets; never crossable.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteMap {
    pub width: i32,
    pub height: i32,
    pub layers: Vec<LayerSpec>,
    state: Vec<NodeState>,
    occupant: Vec<Occupant>,
    reserved: Vec<bool>,
}

impl RouteMap {
    pub fn new(width: i32, height: i32, layers: Vec<LayerSpec>) -> Self {
        let n = (width.max(0) * height.max(0)) as usize;
        RouteMap {
            width,
            height,
            state: vec![NodeState::Empty; n * layers.len()],
            occupant: vec![Occupant::Empty; n * layers.len()],
            reserved: vec![false; n],
            layers,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn contains(&self, c: GridCoord) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height && (c.layer as usize) < self.layers.len()
    }

    fn idx(&self, c: GridCoord) -> usize {
        debug_assert!(self.contains(c), "{c} outside map");
        (c.layer as usize * self.height as usize + c.y as usize) * self.width as usize + c.x as usize
    }

    pub fn state(&self, c: GridCoord) -> NodeState {
        self.state[self.idx(c)]
    }

    pub fn occupant(&self, c: GridCoord) -> Occupant {
        self.occupant[self.idx(c)]
    }

    pub fn set(&mut self, c: GridCoord, state: NodeState, occupant: Occupant) {
        let i = self.idx(c);
        self.state[i] = state;
        self.occupant[i] = occupant;
    }

    pub fn layer(&self, layer: u8) -> &LayerSpec {
        &self.layers[layer as usize]
    }

    pub fn is_jtl_layer(&self, layer: u8) -> bool {
        self.layers[layer as usize].jtl_enabled
    }

    pub fn is_ptl_only_layer(&self, layer: u8) -> bool {
        self.layers[layer as usize].is_ptl_only()
    }

    /// Port access nodes are reserved on the bottom layer; only the path that
    /// starts or ends there may use them.
    pub fn reserve(&mut self, x: i32, y: i32) {
        let i = (y * self.width + x) as usize;
        self.reserved[i] = true;
    }

    pub fn is_reserved(&self, c: GridCoord) -> bool {
        c.layer == 0 && self.reserved[(c.y * self.width + c.x) as usize]
    }

    pub fn coords(&self) -> impl Iterator<Item = GridCoord> + '_ {
        (0..self.layers.len() as u8).flat_map(move |l| {
            (0..self.height).flat_map(move |y| (0..self.width).map(move |x| GridCoord::new(x, y, l)))
        })
    }

    pub fn count(&self, state: NodeState) -> usize {
        self.state.iter().filter(|s| **s == state).count()
    }

    /// Copies every node inside the planar rectangle from `other`.
    pub fn copy_region(&mut self, other: &RouteMap, x0: i32, y0: i32, x1: i32, y1: i32) {
        for l in 0..self.layers.len() as u8 {
            for y in y0.max(0)..=y1.min(self.height - 1) {
                for x in x0.max(0)..=x1.min(self.width - 1) {
                    let c = GridCoord::new(x, y, l);
                    let i = self.idx(c);
                    self.state[i] = other.state[i];
                    self.occupant[i] = other.occupant[i];
                }
            }
        }
    }
}
