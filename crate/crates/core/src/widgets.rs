// SPDX-License-Identifier: Apache-2.0

//! Layout widgets compiled from routed trees, and the line-oriented script
//! they are written to.
//!
//! Script body lines read `W <kind> <layer> <x> <y> <orient> <span> <dirs>`.
//! `dirs` lists one flow per signal passing the widget as
//! `<arrive>><departs>`, flows joined by `;`. Direction letters are
//! `N S E W U D`; `.` marks a net source (no arrival) or sink (no
//! departure). A via sits on the node the signal climbs or drops from; its
//! span is the number of layers crossed and its departure is the planar
//! step taken after landing, or the vertical direction again when the next
//! node is directly above or below.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::design::Design;
use crate::grid::{Dir, GridCoord};
use crate::techlib::{node_delay, widget_delay, DelayParams, Technology, WidgetKind};
use crate::time::Time;
use crate::tree::NetTree;

pub const SCRIPT_MAGIC: &str = "# sfq-route widget script v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WidgetError {
    #[error("net {net}: cross at {at} is not straight")]
    BentCross { net: usize, at: GridCoord },
    #[error("script line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("script checksum mismatch")]
    Checksum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orient {
    R0,
    R90,
    R180,
    R270,
}

impl Orient {
    /// Rotation that points a widget's output toward `dir`.
    pub fn toward(dir: Dir) -> Orient {
        match dir {
            Dir::N => Orient::R90,
            Dir::W => Orient::R180,
            Dir::S => Orient::R270,
            _ => Orient::R0,
        }
    }
}

impl fmt::Display for Orient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orient::R0 => "R0",
            Orient::R90 => "R90",
            Orient::R180 => "R180",
            Orient::R270 => "R270",
        })
    }
}

impl FromStr for Orient {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "R0" => Ok(Orient::R0),
            "R90" => Ok(Orient::R90),
            "R180" => Ok(Orient::R180),
            "R270" => Ok(Orient::R270),
            _ => Err(format!("bad orientation `{s}`")),
        }
    }
}

/// One signal passing through a widget. `None` is the `.` end marker.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Flow {
    pub arrive: Option<Dir>,
    pub departs: Vec<Dir>,
}

fn letter(d: Option<Dir>) -> char {
    d.map_or('.', Dir::letter)
}

fn from_letter(c: char) -> Result<Option<Dir>, String> {
    Ok(Some(match c {
        'N' => Dir::N,
        'S' => Dir::S,
        'E' => Dir::E,
        'W' => Dir::W,
        'U' => Dir::Up,
        'D' => Dir::Down,
        '.' => return Ok(None),
        _ => return Err(format!("bad direction `{c}`")),
    }))
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>", letter(self.arrive))?;
        if self.departs.is_empty() {
            return f.write_char('.');
        }
        self.departs.iter().try_for_each(|d| f.write_char(d.letter()))
    }
}

impl FromStr for Flow {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, d) = s.split_once('>').ok_or_else(|| format!("bad flow `{s}`"))?;
        let mut ac = a.chars();
        let arrive = match (ac.next(), ac.next()) {
            (Some(c), None) => from_letter(c)?,
            _ => return Err(format!("bad flow `{s}`")),
        };
        let departs = if d == "." {
            Vec::new()
        } else {
            d.chars()
                .map(|c| from_letter(c)?.ok_or_else(|| format!("bad flow `{s}`")))
                .collect::<Result<Vec<_>, _>>()?
        };
        if departs.is_empty() && d != "." {
            return Err(format!("bad flow `{s}`"));
        }
        Ok(Flow { arrive, departs })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WidgetInstance {
    pub kind: WidgetKind,
    pub origin: GridCoord,
    pub orient: Orient,
    /// Grid units covered, or layers crossed for a via.
    pub span: u32,
    pub flows: Vec<Flow>,
}

impl WidgetInstance {
    pub fn dirs(&self) -> String {
        self.flows.iter().map(Flow::to_string).collect::<Vec<_>>().join(";")
    }

    /// Delay one signal sees through the widget.
    pub fn delay(&self, delays: &DelayParams) -> Time {
        match self.kind {
            WidgetKind::Cross | WidgetKind::Via => node_delay(self.kind, delays),
            k => widget_delay(k, self.span, delays).expect("wire widget"),
        }
    }

    /// Junctions in the widget. A long JTL has one pair of junctions
    /// whatever its length.
    pub fn junctions(&self) -> u32 {
        match self.kind {
            WidgetKind::Jtl2 | WidgetKind::Jtl3 | WidgetKind::Jtl4 => self.kind.junctions() * self.span,
            k => k.junctions(),
        }
    }

    /// Grid nodes the widget occupies.
    pub fn covered(&self) -> Vec<GridCoord> {
        if self.kind == WidgetKind::Via {
            return vec![self.origin];
        }
        let dir = match self.orient {
            Orient::R0 => Dir::E,
            Orient::R90 => Dir::N,
            Orient::R180 => Dir::W,
            Orient::R270 => Dir::S,
        };
        let mut out = vec![self.origin];
        for _ in 1..self.span {
            out.push(out.last().expect("non-empty").step(dir));
        }
        out
    }

    /// Script line, without the trailing newline.
    pub fn line(&self) -> String {
        format!(
            "W {} {} {} {} {} {} {}",
            self.kind, self.origin.layer, self.origin.x, self.origin.y, self.orient, self.span, self.dirs()
        )
    }

    fn sort_key(&self) -> (u8, i32, i32, WidgetKind, String, Orient, u32) {
        (self.origin.layer, self.origin.y, self.origin.x, self.kind, self.dirs(), self.orient, self.span)
    }
}

fn sort_widgets(ws: &mut [WidgetInstance]) {
    ws.sort_by_cached_key(WidgetInstance::sort_key);
}

/// Direction of the step from `a` to `b` as seen on arrival at `b`: the
/// planar component if the positions differ, otherwise up or down.
fn arrival(a: GridCoord, b: GridCoord) -> Dir {
    if a.same_xy(b) {
        if b.layer > a.layer {
            Dir::Up
        } else {
            Dir::Down
        }
    } else {
        Dir::from_planar_delta(b.x - a.x, b.y - a.y).expect("planar neighbour")
    }
}

/// Direction of the step as seen on departure from `a`: vertical first.
fn departure(a: GridCoord, b: GridCoord) -> Dir {
    if b.layer > a.layer {
        Dir::Up
    } else if b.layer < a.layer {
        Dir::Down
    } else {
        Dir::from_planar_delta(b.x - a.x, b.y - a.y).expect("planar neighbour")
    }
}

fn orient_of(flow: &Flow) -> Orient {
    flow.departs
        .iter()
        .copied()
        .find(|d| d.is_planar())
        .or(flow.arrive.filter(|d| d.is_planar()))
        .map_or(Orient::R0, Orient::toward)
}

fn node_flow(t: &NetTree, n: usize) -> Flow {
    let node = &t.nodes[n];
    let mut departs: Vec<Dir> = node.children.iter().map(|&c| departure(node.coord, t.nodes[c].coord)).collect();
    departs.sort();
    departs.dedup();
    Flow { arrive: node.parent.map(|p| arrival(t.nodes[p].coord, node.coord)), departs }
}

fn coalesces(kind: WidgetKind) -> bool {
    matches!(kind, WidgetKind::LongJtl | WidgetKind::Msl)
}

/// Compiles one tree. Crossing nodes are returned separately as
/// `(coord, flow)` so they can be merged across nets.
fn compile_tree(t: &NetTree, out: &mut Vec<WidgetInstance>, crosses: &mut BTreeMap<GridCoord, Vec<Flow>>) -> Result<(), WidgetError> {
    let mut done = vec![false; t.nodes.len()];
    for n in 0..t.nodes.len() {
        let node = &t.nodes[n];
        for &c in &node.children {
            let cc = t.nodes[c].coord;
            if cc.layer != node.coord.layer {
                let dep = if cc.same_xy(node.coord) { departure(node.coord, cc) } else { arrival(node.coord, cc) };
                let v = departure(node.coord, cc);
                out.push(WidgetInstance {
                    kind: WidgetKind::Via,
                    origin: node.coord,
                    orient: Orient::R0,
                    span: u32::from(node.coord.layer.abs_diff(cc.layer)),
                    flows: vec![Flow { arrive: Some(v), departs: vec![dep] }],
                });
            }
        }
        if done[n] {
            continue;
        }
        let flow = node_flow(t, n);
        if node.kind == WidgetKind::Cross {
            if !t.is_straight(n) {
                return Err(WidgetError::BentCross { net: t.net, at: node.coord });
            }
            crosses.entry(node.coord).or_default().push(flow);
            continue;
        }
        if !coalesces(node.kind) {
            out.push(WidgetInstance { kind: node.kind, origin: node.coord, orient: orient_of(&flow), span: 1, flows: vec![flow] });
            continue;
        }
        // Follow the run of same-kind collinear nodes below `n`.
        let mut run = vec![n];
        let mut dir: Option<Dir> = None;
        loop {
            let last = *run.last().expect("non-empty");
            let [c] = t.nodes[last].children.as_slice() else { break };
            let (a, b) = (t.nodes[last].coord, t.nodes[*c].coord);
            if t.nodes[*c].kind != node.kind || a.layer != b.layer {
                break;
            }
            let d = departure(a, b);
            if dir.is_some_and(|x| x != d) {
                break;
            }
            dir = Some(d);
            run.push(*c);
        }
        for &r in &run {
            done[r] = true;
        }
        let last = node_flow(t, *run.last().expect("non-empty"));
        let span_flow = Flow { arrive: flow.arrive, departs: last.departs };
        let orient = match dir {
            Some(d) => Orient::toward(d),
            None => orient_of(&span_flow),
        };
        out.push(WidgetInstance { kind: node.kind, origin: node.coord, orient, span: run.len() as u32, flows: vec![span_flow] });
    }
    Ok(())
}

/// Turns routed trees into widgets, sorted in script order.
pub fn compile_widgets(trees: &[Option<NetTree>]) -> Result<Vec<WidgetInstance>, WidgetError> {
    let mut out = Vec::new();
    let mut crosses: BTreeMap<GridCoord, Vec<Flow>> = BTreeMap::new();
    for t in trees.iter().flatten() {
        compile_tree(t, &mut out, &mut crosses)?;
    }
    for (c, mut flows) in crosses {
        flows.sort();
        let orient = orient_of(&flows[0]);
        out.push(WidgetInstance { kind: WidgetKind::Cross, origin: c, orient, span: 1, flows });
    }
    sort_widgets(&mut out);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScriptFormat {
    /// The `W ...` line format.
    Text,
    /// A JSON array of widgets.
    Json,
}

fn checksum(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

/// Writes the widgets in deterministic order under a header naming the
/// design and technology.
pub fn emit_script(design: &str, tech: &str, widgets: &[WidgetInstance], format: ScriptFormat) -> String {
    let mut ws = widgets.to_vec();
    sort_widgets(&mut ws);
    match format {
        ScriptFormat::Json => serde_json::to_string_pretty(&ws).expect("serializable") + "\n",
        ScriptFormat::Text => {
            let mut body = String::new();
            for w in &ws {
                body.push_str(&w.line());
                body.push('\n');
            }
            format!("{SCRIPT_MAGIC}\n# design {design}\n# tech {tech}\n# checksum {}\n{body}", checksum(&body))
        }
    }
}

/// A parsed text script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidgetScript {
    pub design: String,
    pub tech: String,
    pub widgets: Vec<WidgetInstance>,
}

fn parse_line(line: &str, no: usize) -> Result<WidgetInstance, WidgetError> {
    let err = |msg: String| WidgetError::Parse { line: no, msg };
    let f: Vec<&str> = line.split(' ').collect();
    if f.len() != 8 || f[0] != "W" {
        return Err(err(format!("expected 8 fields, got `{line}`")));
    }
    let int = |s: &str| s.parse::<i64>().map_err(|e| err(format!("`{s}`: {e}")));
    let layer = u8::try_from(int(f[2])?).map_err(|e| err(e.to_string()))?;
    let x = i32::try_from(int(f[3])?).map_err(|e| err(e.to_string()))?;
    let y = i32::try_from(int(f[4])?).map_err(|e| err(e.to_string()))?;
    let span = u32::try_from(int(f[6])?).map_err(|e| err(e.to_string()))?;
    if span == 0 {
        return Err(err("zero span".into()));
    }
    let flows = f[7].split(';').map(Flow::from_str).collect::<Result<Vec<_>, _>>().map_err(err)?;
    Ok(WidgetInstance {
        kind: f[1].parse().map_err(err)?,
        origin: GridCoord::new(x, y, layer),
        orient: f[5].parse().map_err(err)?,
        span,
        flows,
    })
}

/// Parses a text script, checking the header and checksum.
pub fn parse_script(text: &str) -> Result<WidgetScript, WidgetError> {
    let mut lines = text.split('\n');
    let mut head = |key: &str, no: usize| -> Result<String, WidgetError> {
        let l = lines.next().unwrap_or_default();
        l.strip_prefix(key)
            .map(str::to_string)
            .ok_or_else(|| WidgetError::Parse { line: no, msg: format!("expected `{key}`") })
    };
    if !head(SCRIPT_MAGIC, 1)?.is_empty() {
        return Err(WidgetError::Parse { line: 1, msg: "bad magic".into() });
    }
    let design = head("# design ", 2)?;
    let tech = head("# tech ", 3)?;
    let sum = head("# checksum ", 4)?;
    let body_start = text.match_indices('\n').nth(3).map_or(text.len(), |(i, _)| i + 1);
    let body = &text[body_start..];
    if checksum(body) != sum {
        return Err(WidgetError::Checksum);
    }
    let mut widgets = Vec::new();
    for (i, line) in body.split('\n').enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        widgets.push(parse_line(line, i + 5)?);
    }
    Ok(WidgetScript { design, tech, widgets })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidgetManifest {
    pub design: String,
    pub tech: String,
    pub widgets: usize,
    pub counts: BTreeMap<String, usize>,
    pub junctions: BTreeMap<String, u32>,
    pub total_junctions: u32,
    /// Widgets per path style: all-JTL, all-PTL or hybrid nets.
    pub path_styles: BTreeMap<String, usize>,
}

/// Per-kind counts and junction totals.
pub fn manifest(design: &str, tech: &str, widgets: &[WidgetInstance], trees: &[Option<NetTree>]) -> WidgetManifest {
    let mut counts = BTreeMap::new();
    let mut junctions = BTreeMap::new();
    for w in widgets {
        *counts.entry(w.kind.name().to_string()).or_default() += 1;
        *junctions.entry(w.kind.name().to_string()).or_default() += w.junctions();
    }
    let mut path_styles = BTreeMap::new();
    for t in trees.iter().flatten() {
        let ptl = t.nodes.iter().filter(|n| n.kind.is_ptl()).count();
        let style = if ptl == 0 {
            "jtl"
        } else if ptl == t.nodes.len() {
            "ptl"
        } else {
            "hybrid"
        };
        *path_styles.entry(style.to_string()).or_default() += 1;
    }
    WidgetManifest {
        design: design.into(),
        tech: tech.into(),
        widgets: widgets.len(),
        total_junctions: junctions.values().sum(),
        counts,
        junctions,
        path_styles,
    }
}

/// Delay from a net source to every reached end, found by walking the
/// widgets alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceResult {
    pub ends: BTreeMap<GridCoord, Time>,
    /// Steps that led nowhere: `(position, direction)`.
    pub dangling: Vec<(GridCoord, Dir)>,
}

/// Walks the script geometry from `source`, summing widget delays.
pub fn trace_from(widgets: &[WidgetInstance], source: GridCoord, delays: &DelayParams) -> TraceResult {
    let mut at: BTreeMap<(GridCoord, Option<Dir>, bool), usize> = BTreeMap::new();
    for (i, w) in widgets.iter().enumerate() {
        for f in &w.flows {
            at.insert((w.origin, f.arrive, w.kind == WidgetKind::Via), i);
        }
    }
    let mut res = TraceResult { ends: BTreeMap::new(), dangling: Vec::new() };
    // (widget, arrival, delay before the widget)
    let mut stack: Vec<(usize, Option<Dir>, Time)> = Vec::new();
    match at.get(&(source, None, false)) {
        Some(&w) => stack.push((w, None, Time::ZERO)),
        None => return res,
    }
    let mut guard = 0usize;
    while let Some((wi, arrive, t)) = stack.pop() {
        guard += 1;
        if guard > 16 * widgets.len() + 16 {
            break;
        }
        let w = &widgets[wi];
        let t = t + w.delay(delays);
        let flow = w.flows.iter().find(|f| f.arrive == arrive).expect("indexed flow");
        let end = *w.covered().last().expect("non-empty");
        if flow.departs.is_empty() {
            res.ends.insert(end, t);
        }
        for &d in &flow.departs {
            let next = if w.kind == WidgetKind::Via {
                let landed = GridCoord {
                    layer: if arrive == Some(Dir::Up) {
                        end.layer + w.span as u8
                    } else {
                        end.layer - w.span as u8
                    },
                    ..end
                };
                if d.is_planar() {
                    at.get(&(landed.step(d), Some(d), false))
                } else {
                    at.get(&(landed, Some(d), false))
                }
            } else if d.is_planar() {
                at.get(&(end.step(d), Some(d), false))
            } else {
                at.get(&(end, Some(d), true))
            };
            match next {
                Some(&n) => stack.push((n, Some(d), t)),
                None => res.dangling.push((end, d)),
            }
        }
    }
    res
}

/// Wire delay of every routed sink recomputed from the widgets.
pub fn traced_sink_delays(design: &Design, widgets: &[WidgetInstance], delays: &DelayParams) -> Vec<Vec<Option<Time>>> {
    design
        .nets
        .iter()
        .map(|net| {
            let tr = trace_from(widgets, net.source_coord, delays);
            net.sink_coords.iter().map(|c| tr.ends.get(c).copied()).collect()
        })
        .collect()
}

/// Convenience wrapper used by the flow.
pub fn compile_and_emit(design: &Design, tech: &Technology, trees: &[Option<NetTree>]) -> Result<(Vec<WidgetInstance>, String), WidgetError> {
    let ws = compile_widgets(trees)?;
    let s = emit_script(&design.name, &tech.name, &ws, ScriptFormat::Text);
    Ok((ws, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(coords: &[(i32, i32, u8)], kinds: &[WidgetKind]) -> NetTree {
        let p: Vec<_> = coords.iter().zip(kinds).map(|(&(x, y, l), &k)| (GridCoord::new(x, y, l), k)).collect();
        NetTree::from_path(0, 1, 0, &p)
    }

    #[test]
    fn straight_path_gives_unit_widgets() {
        let t = path(&[(1, 1, 0), (2, 1, 0), (3, 1, 0), (4, 1, 0)], &[WidgetKind::Jtl2; 4]);
        let ws = compile_widgets(&[Some(t)]).unwrap();
        assert_eq!(ws.len(), 4);
        assert!(ws.iter().all(|w| w.kind == WidgetKind::Jtl2 && w.orient == Orient::R0 && w.span == 1));
        assert_eq!(ws[0].dirs(), ".>E");
        assert_eq!(ws[3].dirs(), "E>.");

        let t = path(&[(1, 4, 0), (1, 3, 0), (1, 2, 0), (1, 1, 0)], &[WidgetKind::LongJtl; 4]);
        let ws = compile_widgets(&[Some(t)]).unwrap();
        assert_eq!(ws.len(), 1);
        assert_eq!((ws[0].kind, ws[0].span, ws[0].orient), (WidgetKind::LongJtl, 4, Orient::R270));
        assert_eq!(ws[0].origin, GridCoord::new(1, 4, 0));
        assert_eq!(ws[0].covered().last(), Some(&GridCoord::new(1, 1, 0)));
    }

    #[test]
    fn microstrip_run_compiles_with_vias() {
        use WidgetKind::*;
        let mut coords = vec![(1, 3, 0), (2, 3, 0)];
        coords.extend((3..8).map(|x| (x, 3, 2)));
        coords.extend([(8, 3, 0), (9, 3, 0)]);
        let kinds = [Jtl2, Driver, Msl, Msl, Msl, Msl, Msl, Receiver, Jtl2];
        let t = path(&coords, &kinds);
        let ws = compile_widgets(&[Some(t)]).unwrap();
        let kinds: Vec<WidgetKind> = ws.iter().map(|w| w.kind).collect();
        assert_eq!(kinds, vec![Jtl2, Driver, Via, Receiver, Jtl2, Msl, Via]);
        let msl = ws.iter().find(|w| w.kind == Msl).unwrap();
        assert_eq!((msl.origin, msl.span, msl.dirs()), (GridCoord::new(3, 3, 2), 5, "E>D".to_string()));
        let vias: Vec<_> = ws.iter().filter(|w| w.kind == Via).map(|w| (w.origin, w.span, w.dirs())).collect();
        assert_eq!(vias, vec![(GridCoord::new(2, 3, 0), 2, "U>E".into()), (GridCoord::new(7, 3, 2), 2, "D>E".into())]);

        let d = crate::techlib::Technology::desk_nb04().delays;
        let tr = trace_from(&ws, GridCoord::new(1, 3, 0), &d);
        assert!(tr.dangling.is_empty());
        let body = Time::from_ps(19.0);
        assert_eq!(tr.ends[&GridCoord::new(9, 3, 0)], body + d.t_jtl2 * 2);
    }

    #[test]
    fn crossing_is_emitted_once() {
        use WidgetKind::*;
        let a = path(&[(0, 1, 0), (1, 1, 0), (2, 1, 0)], &[Jtl2, Cross, Jtl2]);
        let mut b = path(&[(1, 0, 0), (1, 1, 0), (1, 2, 0)], &[Jtl2, Cross, Jtl2]);
        b.net = 1;
        let ws = compile_widgets(&[Some(a), Some(b)]).unwrap();
        let cross: Vec<_> = ws.iter().filter(|w| w.kind == Cross).collect();
        assert_eq!(cross.len(), 1);
        assert_eq!(cross[0].dirs(), "N>N;E>E");
        assert_eq!(ws.len(), 5);
        let d = crate::techlib::Technology::desk_nb04().delays;
        for (src, dst) in [((0, 1), (2, 1)), ((1, 0), (1, 2))] {
            let tr = trace_from(&ws, GridCoord::new(src.0, src.1, 0), &d);
            assert_eq!(tr.ends[&GridCoord::new(dst.0, dst.1, 0)], d.t_jtl2 * 3);
        }
    }

    #[test]
    fn bent_cross_is_rejected() {
        use WidgetKind::*;
        let a = path(&[(0, 1, 0), (1, 1, 0), (1, 2, 0)], &[Jtl2, Cross, Jtl2]);
        assert!(matches!(compile_widgets(&[Some(a)]), Err(WidgetError::BentCross { .. })));
    }

    #[test]
    fn empty_script_is_header_only() {
        let s = emit_script("d", "t", &[], ScriptFormat::Text);
        assert_eq!(s.lines().count(), 4);
        assert!(s.lines().all(|l| l.starts_with('#')));
        let p = parse_script(&s).unwrap();
        assert!(p.widgets.is_empty());
        assert_eq!((p.design.as_str(), p.tech.as_str()), ("d", "t"));
    }

    #[test]
    fn tampered_body_fails_checksum() {
        let t = path(&[(1, 1, 0), (2, 1, 0)], &[WidgetKind::Jtl2; 2]);
        let ws = compile_widgets(&[Some(t)]).unwrap();
        let s = emit_script("d", "t", &ws, ScriptFormat::Text).replace("JTL2 0 2", "JTL3 0 2");
        assert_eq!(parse_script(&s), Err(WidgetError::Checksum));
    }

    fn dir() -> impl Strategy<Value = Dir> {
        prop::sample::select(vec![Dir::N, Dir::S, Dir::E, Dir::W, Dir::Up, Dir::Down])
    }

    fn flow() -> impl Strategy<Value = Flow> {
        (prop::option::of(dir()), prop::collection::vec(dir(), 0..3)).prop_map(|(arrive, departs)| Flow { arrive, departs })
    }

    fn widget() -> impl Strategy<Value = WidgetInstance> {
        (
            prop::sample::select(WidgetKind::ALL.to_vec()),
            (-50i32..50, -50i32..50, 0u8..4),
            prop::sample::select(vec![Orient::R0, Orient::R90, Orient::R180, Orient::R270]),
            1u32..6,
            prop::collection::vec(flow(), 1..3),
        )
            .prop_map(|(kind, (x, y, l), orient, span, flows)| WidgetInstance {
                kind,
                origin: GridCoord::new(x, y, l),
                orient,
                span,
                flows,
            })
    }

    proptest! {
        #[test]
        fn script_round_trips(ws in prop::collection::vec(widget(), 0..30)) {
            let s = emit_script("bench", "desk", &ws, ScriptFormat::Text);
            let p = parse_script(&s).unwrap();
            let mut sorted = ws.clone();
            sort_widgets(&mut sorted);
            prop_assert_eq!(&p.widgets, &sorted);
            prop_assert_eq!(emit_script(&p.design, &p.tech, &p.widgets, ScriptFormat::Text), s);
            let j = emit_script("bench", "desk", &ws, ScriptFormat::Json);
            let back: Vec<WidgetInstance> = serde_json::from_str(&j).unwrap();
            prop_assert_eq!(back, sorted);
        }
    }
}
