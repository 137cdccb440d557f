// SPDX-License-Identifier: Apache-2.0

//! Placement and netlist loading, route-map construction and the clustered,
//! sorted routing queues handed to the global router.
//!
//! # Placement file
//!
//! ```text
//! placement 1
//! grid <width> <height>
//! inst <name> <model> <x> <y> <R0|R90|R180|R270>
//! ```
//!
//! # Netlist file
//!
//! ```text
//! netlist 1
//! net <name> <signal|clock|io> [level=<k>] <inst>.<port> -> <inst>.<port> ...
//! arrival <input-pin instance> <picoseconds>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored in both files.
//!
//! Orientations rotate the cell counter-clockwise about its origin and shift
//! it back so the footprint keeps its lower-left corner at the origin: a
//! `w x h` cell becomes `h x w` under R90/R270.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridCoord, NodeState, Occupant, RouteMap};
use crate::techlib::{CellKind, GateModel, PortDir, Side, Technology};
use crate::time::Time;

/// Nets with at least this many sinks are routed with the clock group.
pub const LARGE_FANOUT: usize = 16;
pub const DEFAULT_MARGIN: i32 = 5;

#[derive(Debug, Error, PartialEq)]
pub enum DesignError {
    #[error("{file}:{line}: {msg}")]
    Parse { file: &'static str, line: usize, msg: String },
    #[error("dangling reference: {0}")]
    Dangling(String),
    #[error("footprints of `{0}` and `{1}` overlap")]
    Overlap(String, String),
    #[error("`{0}` lies outside the {1}x{2} grid")]
    OutOfBounds(String, i32, i32),
    #[error("port {0} is blocked: {1}")]
    PortBlocked(String, String),
    #[error("invalid net `{0}`: {1}")]
    InvalidNet(String, String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    R0,
    R90,
    R180,
    R270,
}

impl FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "R0" => Ok(Orientation::R0),
            "R90" => Ok(Orientation::R90),
            "R180" => Ok(Orientation::R180),
            "R270" => Ok(Orientation::R270),
            _ => Err(format!("unknown orientation `{s}`")),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Orientation::R0 => "R0",
            Orientation::R90 => "R90",
            Orientation::R180 => "R180",
            Orientation::R270 => "R270",
        };
        f.write_str(s)
    }
}

impl Orientation {
    /// Maps a cell-local node to the rotated local frame.
    fn apply(self, x: i32, y: i32, w: i32, h: i32) -> (i32, i32) {
        match self {
            Orientation::R0 => (x, y),
            Orientation::R90 => (h - 1 - y, x),
            Orientation::R180 => (w - 1 - x, h - 1 - y),
            Orientation::R270 => (y, w - 1 - x),
        }
    }
}

/// Inclusive planar rectangle in grid units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Rect {
    pub fn spanning(a: GridCoord, b: GridCoord) -> Rect {
        Rect { x0: a.x.min(b.x), y0: a.y.min(b.y), x1: a.x.max(b.x), y1: a.y.max(b.y) }
    }

    pub fn expand(self, m: i32) -> Rect {
        Rect { x0: self.x0 - m, y0: self.y0 - m, x1: self.x1 + m, y1: self.y1 + m }
    }

    pub fn union(self, o: Rect) -> Rect {
        Rect { x0: self.x0.min(o.x0), y0: self.y0.min(o.y0), x1: self.x1.max(o.x1), y1: self.y1.max(o.y1) }
    }

    pub fn intersects(self, o: Rect) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }

    pub fn contains_xy(self, x: i32, y: i32) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn clip(self, width: i32, height: i32) -> Rect {
        Rect { x0: self.x0.max(0), y0: self.y0.max(0), x1: self.x1.min(width - 1), y1: self.y1.min(height - 1) }
    }

    pub fn area(self) -> i64 {
        i64::from(self.x1 - self.x0 + 1) * i64::from(self.y1 - self.y0 + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateInstance {
    pub name: String,
    pub model: GateModel,
    pub origin: (i32, i32),
    pub orientation: Orientation,
}

impl GateInstance {
    pub fn size(&self) -> (i32, i32) {
        match self.orientation {
            Orientation::R0 | Orientation::R180 => (self.model.width, self.model.height),
            Orientation::R90 | Orientation::R270 => (self.model.height, self.model.width),
        }
    }

    pub fn footprint(&self) -> Rect {
        let (w, h) = self.size();
        Rect { x0: self.origin.0, y0: self.origin.1, x1: self.origin.0 + w - 1, y1: self.origin.1 + h - 1 }
    }

    /// Bottom-layer grid node just outside the block edge where `port` is
    /// accessed.
    pub fn port_coord(&self, port: &str) -> Option<GridCoord> {
        let p = self.model.port(port)?;
        let (w, h) = (self.model.width, self.model.height);
        let (lx, ly) = match p.side {
            Side::W => (-1, p.offset),
            Side::E => (w, p.offset),
            Side::S => (p.offset, -1),
            Side::N => (p.offset, h),
        };
        let (rx, ry) = self.orientation.apply(lx, ly, w, h);
        Some(GridCoord::new(self.origin.0 + rx, self.origin.1 + ry, 0))
    }

    pub fn is_clocked(&self) -> bool {
        self.model.clocked
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NetKind {
    Signal,
    ClockTree,
    Io,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortRef {
    pub inst: usize,
    pub port: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Net {
    pub name: String,
    pub kind: NetKind,
    pub level: Option<u32>,
    pub source: PortRef,
    pub sinks: Vec<PortRef>,
    pub source_coord: GridCoord,
    pub sink_coords: Vec<GridCoord>,
}

impl Net {
    pub fn fanout(&self) -> usize {
        self.sinks.len()
    }

    pub fn is_large(&self) -> bool {
        self.kind == NetKind::ClockTree || self.fanout() >= LARGE_FANOUT
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub name: String,
    pub width: i32,
    pub height: i32,
    pub instances: Vec<GateInstance>,
    pub nets: Vec<Net>,
    /// Primary-input arrival times keyed by instance index.
    pub input_arrivals: BTreeMap<usize, Time>,
}

impl Design {
    pub fn instance_index(&self, name: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.name == name)
    }

    /// One coordinate pair per net sink, in net order.
    pub fn coord_pairs(&self) -> Vec<CoordPair> {
        let mut out = Vec::new();
        for (ni, net) in self.nets.iter().enumerate() {
            for (si, &dest) in net.sink_coords.iter().enumerate() {
                out.push(CoordPair {
                    source: net.source_coord,
                    dest,
                    net: ni,
                    sink_index: si,
                    fanout: net.fanout(),
                    large: net.is_large(),
                });
            }
        }
        out
    }

    pub fn footprint_area(&self) -> i64 {
        self.instances.iter().map(|i| i.footprint().area()).sum()
    }
}

fn parse_err(file: &'static str, line: usize, msg: impl Into<String>) -> DesignError {
    DesignError::Parse { file, line, msg: msg.into() }
}

fn content_lines(src: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    src.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            None
        } else {
            Some((i + 1, t.split_whitespace().collect()))
        }
    })
}

fn parse_num<T: FromStr>(file: &'static str, line: usize, tok: &str) -> Result<T, DesignError> {
    tok.parse().map_err(|_| parse_err(file, line, format!("expected a number, found `{tok}`")))
}

fn parse_endpoint(
    line: usize,
    tok: &str,
    by_name: &HashMap<&str, usize>,
) -> Result<PortRef, DesignError> {
    let (inst, port) = tok
        .split_once('.')
        .ok_or_else(|| parse_err("netlist", line, format!("endpoint `{tok}` must be <inst>.<port>")))?;
    let &idx = by_name
        .get(inst)
        .ok_or_else(|| DesignError::Dangling(format!("netlist line {line}: unknown instance `{inst}`")))?;
    Ok(PortRef { inst: idx, port: port.to_string() })
}

/// Parses and validates placement and netlist text against `tech`.
pub fn load_design(
    name: &str,
    placement: &str,
    netlist: &str,
    tech: &Technology,
) -> Result<Design, DesignError> {
    const P: &str = "placement";
    const N: &str = "netlist";
    let mut grid = None;
    let mut instances: Vec<GateInstance> = Vec::new();
    let mut seen_header = false;
    for (ln, toks) in content_lines(placement) {
        match toks[0] {
            "placement" => {
                if toks.get(1) != Some(&"1") {
                    return Err(parse_err(P, ln, "unsupported placement version"));
                }
                seen_header = true;
            }
            "grid" if toks.len() == 3 => {
                grid = Some((parse_num::<i32>(P, ln, toks[1])?, parse_num::<i32>(P, ln, toks[2])?));
            }
            "inst" if toks.len() == 6 => {
                let model = tech
                    .gate(toks[2])
                    .ok_or_else(|| DesignError::Dangling(format!("placement line {ln}: unknown gate model `{}`", toks[2])))?
                    .clone();
                if instances.iter().any(|i| i.name == toks[1]) {
                    return Err(parse_err(P, ln, format!("duplicate instance `{}`", toks[1])));
                }
                instances.push(GateInstance {
                    name: toks[1].to_string(),
                    model,
                    origin: (parse_num(P, ln, toks[3])?, parse_num(P, ln, toks[4])?),
                    orientation: toks[5].parse().map_err(|e: String| parse_err(P, ln, e))?,
                });
            }
            other => return Err(parse_err(P, ln, format!("unrecognized record `{other}`"))),
        }
    }
    if !seen_header {
        return Err(parse_err(P, 1, "missing `placement 1` header"));
    }
    let (width, height) = grid.ok_or_else(|| parse_err(P, 1, "missing `grid` record"))?;
    if width < 1 || height < 1 {
        return Err(parse_err(P, 1, "grid must be at least 1x1"));
    }

    for inst in &instances {
        let fp = inst.footprint();
        if fp.x0 < 0 || fp.y0 < 0 || fp.x1 >= width || fp.y1 >= height {
            return Err(DesignError::OutOfBounds(inst.name.clone(), width, height));
        }
    }
    for (i, a) in instances.iter().enumerate() {
        for b in &instances[i + 1..] {
            if a.footprint().intersects(b.footprint()) {
                return Err(DesignError::Overlap(a.name.clone(), b.name.clone()));
            }
        }
    }
    // Port access nodes must be free routing nodes.
    let mut port_owner: HashMap<GridCoord, String> = HashMap::new();
    for inst in &instances {
        for p in &inst.model.ports {
            let c = inst.port_coord(&p.name).expect("port exists");
            let label = format!("{}.{}", inst.name, p.name);
            if c.x < 0 || c.y < 0 || c.x >= width || c.y >= height {
                return Err(DesignError::PortBlocked(label, "outside the grid".into()));
            }
            if let Some(o) = instances.iter().find(|o| o.footprint().contains_xy(c.x, c.y)) {
                return Err(DesignError::PortBlocked(label, format!("under `{}`", o.name)));
            }
            if let Some(prev) = port_owner.insert(c, label.clone()) {
                return Err(DesignError::PortBlocked(label, format!("shares its node with {prev}")));
            }
        }
    }

    let by_name: HashMap<&str, usize> =
        instances.iter().enumerate().map(|(i, g)| (g.name.as_str(), i)).collect();
    let mut nets = Vec::new();
    let mut input_arrivals = BTreeMap::new();
    let mut seen_header = false;
    let mut used_ports: HashMap<(usize, String), String> = HashMap::new();
    for (ln, toks) in content_lines(netlist) {
        match toks[0] {
            "netlist" => {
                if toks.get(1) != Some(&"1") {
                    return Err(parse_err(N, ln, "unsupported netlist version"));
                }
                seen_header = true;
            }
            "arrival" if toks.len() == 3 => {
                let &idx = by_name
                    .get(toks[1])
                    .ok_or_else(|| DesignError::Dangling(format!("netlist line {ln}: unknown instance `{}`", toks[1])))?;
                let t: Time = toks[2].parse().map_err(|e: String| parse_err(N, ln, e))?;
                input_arrivals.insert(idx, t);
            }
            "net" if toks.len() >= 6 => {
                let name = toks[1].to_string();
                let kind = match toks[2] {
                    "signal" => NetKind::Signal,
                    "clock" => NetKind::ClockTree,
                    "io" => NetKind::Io,
                    k => return Err(parse_err(N, ln, format!("unknown net kind `{k}`"))),
                };
                let mut rest = &toks[3..];
                let mut level = None;
                if let Some(l) = rest[0].strip_prefix("level=") {
                    level = Some(parse_num::<u32>(N, ln, l)?);
                    rest = &rest[1..];
                }
                if rest.len() < 3 || rest[1] != "->" {
                    return Err(parse_err(N, ln, "expected `<src> -> <sink> ...`"));
                }
                let source = parse_endpoint(ln, rest[0], &by_name)?;
                let sinks = rest[2..]
                    .iter()
                    .map(|t| parse_endpoint(ln, t, &by_name))
                    .collect::<Result<Vec<_>, _>>()?;
                if kind == NetKind::ClockTree && level.is_none() {
                    return Err(DesignError::InvalidNet(name, "clock nets carry a level".into()));
                }
                let resolve = |pr: &PortRef, want: &[PortDir]| -> Result<GridCoord, DesignError> {
                    let inst = &instances[pr.inst];
                    let def = inst.model.port(&pr.port).ok_or_else(|| {
                        DesignError::Dangling(format!("netlist line {ln}: `{}` has no port `{}`", inst.name, pr.port))
                    })?;
                    if !want.contains(&def.dir) {
                        return Err(DesignError::InvalidNet(
                            name.clone(),
                            format!("port {}.{} has the wrong direction", inst.name, pr.port),
                        ));
                    }
                    Ok(inst.port_coord(&pr.port).expect("port exists"))
                };
                let source_coord = resolve(&source, &[PortDir::Out])?;
                let sink_coords = sinks
                    .iter()
                    .map(|s| resolve(s, &[PortDir::In, PortDir::Clock]))
                    .collect::<Result<Vec<_>, _>>()?;
                for pr in std::iter::once(&source).chain(sinks.iter()) {
                    if let Some(prev) = used_ports.insert((pr.inst, pr.port.clone()), name.clone()) {
                        return Err(DesignError::InvalidNet(
                            name.clone(),
                            format!("port {}.{} already used by `{prev}`", instances[pr.inst].name, pr.port),
                        ));
                    }
                }
                nets.push(Net { name, kind, level, source, sinks, source_coord, sink_coords });
            }
            other => return Err(parse_err(N, ln, format!("unrecognized record `{other}`"))),
        }
    }
    if !seen_header {
        return Err(parse_err(N, 1, "missing `netlist 1` header"));
    }
    for &idx in input_arrivals.keys() {
        if instances[idx].model.kind != CellKind::InputPin {
            return Err(DesignError::InvalidNet(
                instances[idx].name.clone(),
                "arrival times apply to input pins only".into(),
            ));
        }
    }
    Ok(Design { name: name.to_string(), width, height, instances, nets, input_arrivals })
}

/// Blocks every footprint node on JTL layers and reserves port nodes.
pub fn build_route_map(design: &Design, tech: &Technology) -> Result<RouteMap, DesignError> {
    let mut map = RouteMap::new(design.width, design.height, tech.layers.clone());
    for inst in &design.instances {
        let fp = inst.footprint();
        if fp.x0 < 0 || fp.y0 < 0 || fp.x1 >= design.width || fp.y1 >= design.height {
            return Err(DesignError::OutOfBounds(inst.name.clone(), design.width, design.height));
        }
        for layer in tech.layers.iter().filter(|l| l.jtl_enabled) {
            for y in fp.y0..=fp.y1 {
                for x in fp.x0..=fp.x1 {
                    map.set(GridCoord::new(x, y, layer.index as u8), NodeState::Blocked, Occupant::Fixed);
                }
            }
        }
        for p in &inst.model.ports {
            let c = inst.port_coord(&p.name).expect("port exists");
            if map.contains(c) {
                map.reserve(c.x, c.y);
            }
        }
    }
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoordPair {
    pub source: GridCoord,
    pub dest: GridCoord,
    pub net: usize,
    pub sink_index: usize,
    pub fanout: usize,
    pub large: bool,
}

impl CoordPair {
    pub fn bbox(&self) -> Rect {
        Rect::spanning(self.source, self.dest)
    }

    pub fn manhattan(&self) -> u32 {
        self.source.manhattan(self.dest)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteGroup {
    pub pairs: Vec<CoordPair>,
    pub bbox: Rect,
    /// Large-fanout group, routed before every other group.
    pub dedicated: bool,
}

/// Partitions pairs into independent routing groups.
///
/// Large-fanout pairs form one dedicated group placed first. The remaining
/// pairs are joined when their margin-expanded boxes intersect, when they
/// belong to the same net, or when the bounding boxes of their groups
/// intersect, until no two groups touch.
pub fn cluster_nets(pairs: &[CoordPair], margin: i32) -> Vec<RouteGroup> {
    let mut groups = Vec::new();
    let large: Vec<CoordPair> = pairs.iter().filter(|p| p.large).copied().collect();
    if !large.is_empty() {
        let bbox = large.iter().map(|p| p.bbox().expand(margin)).reduce(Rect::union).expect("non-empty");
        groups.push(RouteGroup { pairs: large, bbox, dedicated: true });
    }
    let small: Vec<CoordPair> = pairs.iter().filter(|p| !p.large).copied().collect();
    let n = small.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    fn join(parent: &mut [usize], a: usize, b: usize) -> bool {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
        true
    }
    let boxes: Vec<Rect> = small.iter().map(|p| p.bbox().expand(margin)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if small[i].net == small[j].net || boxes[i].intersects(boxes[j]) {
                join(&mut parent, i, j);
            }
        }
    }
    loop {
        let mut gbox: BTreeMap<usize, Rect> = BTreeMap::new();
        for (i, b) in boxes.iter().enumerate() {
            let r = find(&mut parent, i);
            gbox.entry(r).and_modify(|g| *g = g.union(*b)).or_insert(*b);
        }
        let roots: Vec<(usize, Rect)> = gbox.into_iter().collect();
        let mut merged = false;
        for a in 0..roots.len() {
            for b in a + 1..roots.len() {
                if roots[a].1.intersects(roots[b].1) {
                    merged |= join(&mut parent, roots[a].0, roots[b].0);
                }
            }
        }
        if !merged {
            break;
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        by_root.entry(r).or_default().push(i);
    }
    for members in by_root.into_values() {
        let bbox = members.iter().map(|&i| boxes[i]).reduce(Rect::union).expect("non-empty");
        groups.push(RouteGroup { pairs: members.iter().map(|&i| small[i]).collect(), bbox, dedicated: false });
    }
    groups
}

/// Orders a group's pairs: large-fanout first, then fanout descending, then
/// the net's summed Manhattan length descending. Full ties keep input order.
pub fn sort_route_queue(group: &RouteGroup) -> Vec<CoordPair> {
    let mut net_len: HashMap<usize, u64> = HashMap::new();
    for p in &group.pairs {
        *net_len.entry(p.net).or_default() += u64::from(p.manhattan());
    }
    let mut out = group.pairs.clone();
    out.sort_by(|a, b| {
        b.large
            .cmp(&a.large)
            .then(b.fanout.cmp(&a.fanout))
            .then(net_len[&b.net].cmp(&net_len[&a.net]))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(net: usize, s: (i32, i32), d: (i32, i32), fanout: usize) -> CoordPair {
        CoordPair {
            source: GridCoord::new(s.0, s.1, 0),
            dest: GridCoord::new(d.0, d.1, 0),
            net,
            sink_index: 0,
            fanout,
            large: false,
        }
    }

    const PLACE2: &str = "placement 1\ngrid 20 10\ninst a DFF 2 4 R0\ninst b DFF 10 4 R0\n";

    #[test]
    fn minimal_chain_loads() {
        let tech = Technology::desk_nb04();
        let d = load_design("chain", PLACE2, "netlist 1\nnet n0 signal a.q -> b.a\n", &tech).unwrap();
        assert_eq!(d.instances.len(), 2);
        assert_eq!(d.nets.len(), 1);
        assert_eq!(d.nets[0].kind, NetKind::Signal);
        assert_eq!(d.nets[0].source_coord, GridCoord::new(4, 4, 0));
        assert_eq!(d.nets[0].sink_coords[0], GridCoord::new(9, 4, 0));
    }

    #[test]
    fn unknown_instance_is_dangling() {
        let tech = Technology::desk_nb04();
        let err = load_design("x", PLACE2, "netlist 1\nnet n0 signal a.q -> zz.a\n", &tech).unwrap_err();
        assert!(matches!(err, DesignError::Dangling(_)), "{err}");
    }

    #[test]
    fn overlapping_footprints_rejected() {
        let tech = Technology::desk_nb04();
        let p = "placement 1\ngrid 20 10\ninst a AND 2 2 R0\ninst b AND 3 3 R0\n";
        let err = load_design("x", p, "netlist 1\n", &tech).unwrap_err();
        assert_eq!(err, DesignError::Overlap("a".into(), "b".into()));
    }

    #[test]
    fn orientation_rotates_ports() {
        let tech = Technology::desk_nb04();
        let mk = |o: &str| {
            let p = format!("placement 1\ngrid 20 20\ninst g AND 5 5 {o}\n");
            load_design("x", &p, "netlist 1\n", &tech).unwrap().instances.remove(0)
        };
        // AND is 2x2: a on W offset 0, q on E offset 0, clk on S offset 0.
        let r0 = mk("R0");
        assert_eq!(r0.port_coord("a").unwrap(), GridCoord::new(4, 5, 0));
        assert_eq!(r0.port_coord("q").unwrap(), GridCoord::new(7, 5, 0));
        let r90 = mk("R90");
        // W side turns to S, E side turns to N.
        assert_eq!(r90.port_coord("a").unwrap(), GridCoord::new(6, 4, 0));
        assert_eq!(r90.port_coord("q").unwrap(), GridCoord::new(6, 7, 0));
        let r180 = mk("R180");
        assert_eq!(r180.port_coord("a").unwrap(), GridCoord::new(7, 6, 0));
        let r270 = mk("R270");
        assert_eq!(r270.port_coord("a").unwrap(), GridCoord::new(5, 7, 0));
        for g in [r0, r90, r180, r270] {
            let fp = g.footprint();
            for p in &g.model.ports {
                let c = g.port_coord(&p.name).unwrap();
                assert!(!fp.contains_xy(c.x, c.y));
                assert!(fp.expand(1).contains_xy(c.x, c.y));
            }
        }
    }

    #[test]
    fn single_gate_blocks_four_nodes() {
        let tech = Technology::desk_nb04();
        let d = load_design("x", "placement 1\ngrid 12 12\ninst g AND 4 4 R0\n", "netlist 1\n", &tech).unwrap();
        let map = build_route_map(&d, &tech).unwrap();
        let blocked_l0 = map.coords().filter(|c| c.layer == 0 && map.state(*c) == NodeState::Blocked).count();
        assert_eq!(blocked_l0, 4);
        for (x, y) in [(4, 4), (5, 4), (4, 5), (5, 5)] {
            assert_eq!(map.state(GridCoord::new(x, y, 0)), NodeState::Blocked);
            assert_eq!(map.state(GridCoord::new(x, y, 2)), NodeState::Empty);
        }
    }

    #[test]
    fn empty_design_gives_empty_map() {
        let tech = Technology::desk_nb04();
        let d = load_design("x", "placement 1\ngrid 6 6\n", "netlist 1\n", &tech).unwrap();
        let map = build_route_map(&d, &tech).unwrap();
        assert_eq!(map.count(NodeState::Empty), 6 * 6 * 4);
    }

    #[test]
    fn overlapping_expanded_boxes_cluster() {
        let g = cluster_nets(&[pair(0, (0, 0), (3, 0), 1), pair(1, (2, 1), (6, 1), 1)], 5);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].pairs.len(), 2);
    }

    #[test]
    fn distant_pairs_split() {
        let g = cluster_nets(&[pair(0, (0, 0), (3, 0), 1), pair(1, (30, 30), (32, 30), 1)], 5);
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn clustering_is_transitive() {
        // A touches B, B touches C, A does not touch C.
        let a = pair(0, (0, 0), (2, 0), 1);
        let b = pair(1, (12, 0), (14, 0), 1);
        let c = pair(2, (24, 0), (26, 0), 1);
        assert!(!a.bbox().expand(5).intersects(c.bbox().expand(5)));
        let g = cluster_nets(&[a, b, c], 5);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].pairs.len(), 3);
    }

    #[test]
    fn large_nets_get_dedicated_first_group() {
        let mut clk = pair(9, (0, 0), (40, 40), 2);
        clk.large = true;
        let g = cluster_nets(&[pair(0, (0, 0), (3, 0), 8), clk], 5);
        assert!(g[0].dedicated);
        assert_eq!(g[0].pairs, vec![clk]);
    }

    #[test]
    fn queue_sorted_by_fanout_then_length() {
        let mut pairs = vec![];
        // B: fanout 2, total 10; C: fanout 2, total 14; A: fanout 4.
        pairs.push(pair(1, (0, 0), (5, 0), 2));
        pairs.push(pair(1, (0, 0), (0, 5), 2));
        pairs.push(pair(2, (0, 0), (7, 0), 2));
        pairs.push(pair(2, (0, 0), (0, 7), 2));
        pairs.push(pair(0, (0, 0), (1, 0), 4));
        let g = RouteGroup { bbox: Rect { x0: 0, y0: 0, x1: 9, y1: 9 }, pairs, dedicated: false };
        let nets: Vec<usize> = sort_route_queue(&g).iter().map(|p| p.net).collect();
        assert_eq!(nets, vec![0, 2, 2, 1, 1]);
    }

    #[test]
    fn large_fanout_always_first() {
        let mut clk = pair(5, (0, 0), (1, 0), 2);
        clk.large = true;
        let g = RouteGroup { bbox: Rect { x0: 0, y0: 0, x1: 9, y1: 9 }, pairs: vec![pair(0, (0, 0), (9, 9), 8), clk], dedicated: false };
        assert_eq!(sort_route_queue(&g)[0].net, 5);
    }

    #[test]
    fn singleton_queue() {
        let p = pair(0, (0, 0), (1, 0), 1);
        let g = RouteGroup { bbox: p.bbox(), pairs: vec![p], dedicated: false };
        assert_eq!(sort_route_queue(&g), vec![p]);
    }
}
