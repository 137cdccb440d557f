// SPDX-License-Identifier: Apache-2.0

//! Modified A* over the multi-layer grid.
//!
//! The cost of a search node is `g + h + c + l`: path length, Manhattan
//! estimate to the destination, corner penalty and layer penalty. The
//! magnitudes are separated by powers of two so that the comparison is
//! lexicographic: length first, then corners, then layer usage.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::design::Rect;
use crate::grid::{Dir, GridCoord, NodeState, Occupant, RouteMap};
use crate::techlib::{Axis, WidgetKind};

pub const STEP: u64 = 1 << 32;
pub const CORNER: u64 = 1 << 20;
pub const LAYER_NODE: u64 = 1;
pub const LAYER_VIA: u64 = 4;
pub const BOUND_MARGIN: i32 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchNode {
    pub coord: GridCoord,
    pub g: u64,
    pub h: u64,
    pub c: u64,
    pub l: u64,
    pub pre: Option<usize>,
    pub entry: Option<Dir>,
}

impl SearchNode {
    pub fn f(&self) -> u64 {
        self.g + self.h + self.c + self.l
    }

    /// Planar and layer moves taken so far.
    pub fn steps(&self) -> u64 {
        self.g / STEP
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchCtx {
    pub source: GridCoord,
    pub dest: GridCoord,
    pub ptl_channel_open: bool,
}

/// Bounding box of the pair expanded by four units, clipped to the map.
pub fn search_bound(source: GridCoord, dest: GridCoord, map: &RouteMap) -> Rect {
    Rect::spanning(source, dest).expand(BOUND_MARGIN).clip(map.width, map.height)
}

/// Legal moves out of `curr`, in the order they are pushed to the open list.
pub fn adjacent_positions(
    curr: &SearchNode,
    bound: Rect,
    map: &RouteMap,
    ctx: &SearchCtx,
) -> Vec<(GridCoord, Dir)> {
    let c = curr.coord;
    let offsets: Vec<Dir> = if map.is_jtl_layer(c.layer) {
        if c != ctx.source && map.state(c) == NodeState::Single {
            // Crossing another path: straight through only.
            match curr.entry {
                Some(d) if d.is_planar() => vec![d],
                _ => vec![],
            }
        } else {
            let mut v = if curr.steps() > 4 {
                vec![Dir::N, Dir::S, Dir::E, Dir::W]
            } else {
                vec![Dir::E, Dir::W, Dir::N, Dir::S]
            };
            if ctx.ptl_channel_open {
                v.extend([Dir::Up, Dir::Down]);
            }
            v
        }
    } else {
        match map.layer(c.layer).ptl_direction() {
            Axis::Vertical => vec![Dir::N, Dir::S, Dir::Up, Dir::Down],
            Axis::Horizontal => vec![Dir::E, Dir::W, Dir::Up, Dir::Down],
        }
    };

    let mut out = Vec::with_capacity(offsets.len());
    for d in offsets {
        if (d == Dir::Down && c.layer == 0) || (d == Dir::Up && c.layer as usize + 1 >= map.num_layers()) {
            continue;
        }
        let n = c.step(d);
        if !map.contains(n) || !bound.contains_xy(n.x, n.y) {
            continue;
        }
        let st = map.state(n);
        if st >= NodeState::Saturated {
            continue;
        }
        if map.is_reserved(n) && n != ctx.dest && n != ctx.source {
            continue;
        }
        if st == NodeState::Single {
            if map.is_ptl_only_layer(n.layer) || !d.is_planar() || n == ctx.dest {
                continue;
            }
            match map.occupant(n) {
                Occupant::Straight(ax) if Some(ax) != d.axis() => {}
                _ => continue,
            }
        }
        if !d.is_planar() {
            let from_jtl = map.is_jtl_layer(c.layer);
            let to_jtl = map.is_jtl_layer(n.layer);
            // Drivers and receivers sit on JTL nodes next to the port, not on it.
            if from_jtl && !to_jtl && c == ctx.source {
                continue;
            }
            if !from_jtl && to_jtl && n == ctx.dest {
                continue;
            }
            // A receiver cannot immediately become a driver again.
            if d == Dir::Up && curr.entry == Some(Dir::Down) && !from_jtl_below(map, c) {
                continue;
            }
        }
        out.push((n, d));
    }
    out
}

fn from_jtl_below(map: &RouteMap, c: GridCoord) -> bool {
    // True when the node above `c` (where we came from) is a JTL layer.
    let above = c.layer as usize + 1;
    above < map.num_layers() && map.layers[above].jtl_enabled
}

/// Finds a lexicographically cheapest path (length, corners, layer usage)
/// from `source` to `dest` inside `bound`. Returns `None` when the open list
/// runs dry. The map is never modified.
pub fn astar_route(
    source: GridCoord,
    dest: GridCoord,
    map: &RouteMap,
    bound: Rect,
    ptl_channel_open: bool,
) -> Option<Vec<GridCoord>> {
    if !map.contains(source) || !map.contains(dest) {
        return None;
    }
    if map.state(source) == NodeState::Blocked || map.state(dest) == NodeState::Blocked {
        return None;
    }
    let ctx = SearchCtx { source, dest, ptl_channel_open };
    let heuristic = |c: GridCoord| {
        (u64::from(c.manhattan(dest)) + u64::from(c.layer.abs_diff(dest.layer))) * STEP
    };

    let mut arena: Vec<SearchNode> = Vec::new();
    let mut open: BinaryHeap<Reverse<(u64, u64, u64, usize)>> = BinaryHeap::new();
    let mut best: HashMap<(GridCoord, Option<Dir>), u64> = HashMap::new();
    let mut closed: HashSet<(GridCoord, Option<Dir>)> = HashSet::new();
    let mut seq = 0u64;

    arena.push(SearchNode { coord: source, g: 0, h: heuristic(source), c: 0, l: layer_node_cost(source), pre: None, entry: None });
    best.insert((source, None), arena[0].f());
    open.push(Reverse((arena[0].f(), arena[0].h, seq, 0)));

    while let Some(Reverse((f, _, _, idx))) = open.pop() {
        let key = (arena[idx].coord, arena[idx].entry);
        if closed.contains(&key) || best.get(&key).is_some_and(|&b| b < f) {
            continue;
        }
        if arena[idx].coord == dest {
            let mut path = Vec::new();
            let mut cur = Some(idx);
            while let Some(i) = cur {
                path.push(arena[i].coord);
                cur = arena[i].pre;
            }
            path.reverse();
            return Some(path);
        }
        closed.insert(key);
        let curr = arena[idx].clone();
        for (pos, d) in adjacent_positions(&curr, bound, map, &ctx) {
            let k = (pos, Some(d));
            if closed.contains(&k) {
                continue;
            }
            let corner = matches!(curr.entry, Some(e) if e.is_planar() && d.is_planar() && e != d);
            let node = SearchNode {
                coord: pos,
                g: curr.g + STEP,
                h: heuristic(pos),
                c: curr.c + if corner { CORNER } else { 0 },
                l: curr.l + layer_node_cost(pos) + if d.is_planar() { 0 } else { LAYER_VIA },
                pre: Some(idx),
                entry: Some(d),
            };
            let nf = node.f();
            if best.get(&k).is_some_and(|&b| b <= nf) {
                continue;
            }
            best.insert(k, nf);
            seq += 1;
            open.push(Reverse((nf, node.h, seq, arena.len())));
            arena.push(node);
        }
    }
    None
}

fn layer_node_cost(c: GridCoord) -> u64 {
    if c.layer > 0 {
        LAYER_NODE
    } else {
        0
    }
}

/// Routes on the JTL layers first and opens the PTL channel only when that
/// fails and the map has more than one layer.
pub fn route_pair(source: GridCoord, dest: GridCoord, map: &RouteMap, bound: Rect) -> Option<Vec<GridCoord>> {
    astar_route(source, dest, map, bound, false).or_else(|| {
        if map.num_layers() > 1 && map.layers.iter().any(|l| l.ptl_enabled) {
            astar_route(source, dest, map, bound, true)
        } else {
            None
        }
    })
}

/// Initial widget kinds for a freshly routed path: JTL2 everywhere, with a
/// driver before and a receiver after every excursion onto MSL-only layers.
pub fn annotate_path(path: &[GridCoord], map: &RouteMap) -> Vec<(GridCoord, WidgetKind)> {
    let mut out: Vec<(GridCoord, WidgetKind)> = path
        .iter()
        .map(|&c| (c, if map.is_ptl_only_layer(c.layer) { WidgetKind::Msl } else { WidgetKind::Jtl2 }))
        .collect();
    for i in 1..path.len() {
        let (a, b) = (path[i - 1], path[i]);
        let (a_jtl, b_jtl) = (map.is_jtl_layer(a.layer), map.is_jtl_layer(b.layer));
        if a_jtl && !b_jtl {
            out[i - 1].1 = WidgetKind::Driver;
        } else if !a_jtl && b_jtl {
            out[i].1 = WidgetKind::Receiver;
        }
    }
    out
}

/// Number of direction changes between planar moves.
pub fn corner_count(path: &[GridCoord]) -> usize {
    let mut last: Option<Dir> = None;
    let mut corners = 0;
    for w in path.windows(2) {
        let d = if w[0].same_xy(w[1]) {
            if w[1].layer > w[0].layer { Dir::Up } else { Dir::Down }
        } else {
            Dir::from_planar_delta(w[1].x - w[0].x, w[1].y - w[0].y).expect("adjacent")
        };
        if let Some(l) = last {
            if l.is_planar() && d.is_planar() && l != d {
                corners += 1;
            }
        }
        last = Some(d);
    }
    corners
}
