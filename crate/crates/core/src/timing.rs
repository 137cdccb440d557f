// SPDX-License-Identifier: Apache-2.0

//! Static timing over the routed design.
//!
//! Every data edge runs from a clocked driver to a clocked receiver:
//!
//! ```text
//! hold slack  = t1 + t_delay + t_wire - (t2 + t_hold)
//! setup slack = (t2 + t_clk - t_setup) - (t1 + t_delay + t_wire)
//! ```
//!
//! where `t1`/`t2` are the clock arrivals of driver and receiver. Clock
//! arrivals are the wire delays of the clock tree from its root, passed on
//! through clock taps from one level to the next.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::design::{Design, NetKind};
use crate::techlib::{node_delay, CellKind, DelayParams, PortDir, Technology, WidgetKind};
use crate::time::Time;
use crate::tree::NetTree;

/// The six quantities of one register-to-register edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EdgeTiming {
    pub t1: Time,
    pub t_delay: Time,
    pub t_wire: Time,
    pub t2: Time,
    pub t_hold: Time,
    pub t_setup: Time,
}

impl EdgeTiming {
    pub fn data_arrival(&self) -> Time {
        self.t1 + self.t_delay + self.t_wire
    }

    pub fn hold_slack(&self) -> Time {
        self.data_arrival() - (self.t2 + self.t_hold)
    }

    pub fn setup_slack(&self, t_clk: Time) -> Time {
        (self.t2 + t_clk - self.t_setup) - self.data_arrival()
    }

    /// Smallest period meeting setup on this edge.
    pub fn min_period(&self) -> Time {
        self.data_arrival() - self.t2 + self.t_setup
    }

    /// Wire delays keeping both hold and setup at period `t_clk`.
    pub fn wire_window(&self, t_clk: Time) -> WireWindow {
        let base = self.t1 + self.t_delay;
        let min = (self.t2 + self.t_hold - base).max(Time::ZERO);
        let max = self.t2 + t_clk - self.t_setup - base;
        WireWindow { min, max, feasible: min <= max }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WireWindow {
    pub min: Time,
    pub max: Time,
    pub feasible: bool,
}

/// Period for a set of edges: the worst per-edge requirement, never below
/// the library bound. The binding edge is `None` when the bound wins.
pub fn max_clock(edges: &[EdgeTiming], library_bound: Time) -> (Time, Option<usize>) {
    let mut best = (library_bound, None);
    for (i, e) in edges.iter().enumerate() {
        let p = e.min_period();
        if p > best.0 {
            best = (p, Some(i));
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IoRegime {
    /// The clock reaches the first stage strictly after the input.
    ClockAfterInput,
    /// Input and clock coincide.
    Boundary,
    ClockBeforeInput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IoSlack {
    pub t_input: Time,
    pub t_clock: Time,
    pub gap: Time,
    pub regime: IoRegime,
    pub flagged: bool,
}

/// Input regime check: the clock should arrive after the input, as close to
/// it as possible.
pub fn io_slack(t_input: Time, t_clock: Time) -> IoSlack {
    let regime = match t_clock.cmp(&t_input) {
        std::cmp::Ordering::Greater => IoRegime::ClockAfterInput,
        std::cmp::Ordering::Equal => IoRegime::Boundary,
        std::cmp::Ordering::Less => IoRegime::ClockBeforeInput,
    };
    IoSlack { t_input, t_clock, gap: (t_clock - t_input).abs(), regime, flagged: regime != IoRegime::ClockAfterInput }
}

/// Wire delay along a sequence of widget kinds.
pub fn path_wire_delay(kinds: &[WidgetKind], delays: &DelayParams) -> Time {
    kinds.iter().map(|&k| node_delay(k, delays)).sum()
}

/// A net sink: `(net, sink index)`.
pub type SinkRef = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DataEdge {
    pub driver: usize,
    pub receiver: usize,
    pub net: usize,
    pub sink: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InputEdge {
    pub pin: usize,
    pub receiver: usize,
    pub net: usize,
    pub sink: usize,
}

/// Connectivity relevant to timing, independent of the routed geometry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimingGraph {
    pub edges: Vec<DataEdge>,
    pub inputs: Vec<InputEdge>,
    /// Clock sink feeding each instance's clock port.
    pub clock_sink: Vec<Option<SinkRef>>,
    /// Clock net driven by each clock tap, keyed by tap instance.
    pub tap_net: BTreeMap<usize, usize>,
    /// Clock sink feeding each clock tap input.
    pub tap_feed: BTreeMap<usize, SinkRef>,
    /// Clock net level of each clocked instance.
    pub level: Vec<Option<u32>>,
    pub t_delay: Vec<Time>,
    pub t_hold: Vec<Time>,
    pub t_setup: Vec<Time>,
    pub kind: Vec<CellKind>,
    /// Instance and port of every net sink.
    pub sink_target: Vec<Vec<(usize, PortDir)>>,
    pub net_kind: Vec<NetKind>,
    pub net_source: Vec<usize>,
    pub library_bound: Time,
}

impl TimingGraph {
    pub fn new(design: &Design, tech: &Technology) -> TimingGraph {
        let n = design.instances.len();
        let mut g = TimingGraph {
            edges: Vec::new(),
            inputs: Vec::new(),
            clock_sink: vec![None; n],
            tap_net: BTreeMap::new(),
            tap_feed: BTreeMap::new(),
            level: vec![None; n],
            t_delay: design.instances.iter().map(|i| i.model.t_delay).collect(),
            t_hold: design.instances.iter().map(|i| i.model.t_hold).collect(),
            t_setup: design.instances.iter().map(|i| i.model.t_setup).collect(),
            kind: design.instances.iter().map(|i| i.model.kind).collect(),
            sink_target: Vec::new(),
            net_kind: design.nets.iter().map(|n| n.kind).collect(),
            net_source: design.nets.iter().map(|n| n.source.inst).collect(),
            library_bound: tech.library_clock_bound(),
        };
        for (ni, net) in design.nets.iter().enumerate() {
            let mut targets = Vec::new();
            let src = net.source.inst;
            if net.kind == NetKind::ClockTree && g.kind[src] == CellKind::ClockTap {
                g.tap_net.insert(src, ni);
            }
            for (si, s) in net.sinks.iter().enumerate() {
                let inst = &design.instances[s.inst];
                let dir = inst.model.port(&s.port).expect("validated port").dir;
                targets.push((s.inst, dir));
                if net.kind == NetKind::ClockTree {
                    match inst.model.kind {
                        CellKind::ClockTap => {
                            g.tap_feed.insert(s.inst, (ni, si));
                        }
                        _ if dir == PortDir::Clock => {
                            g.clock_sink[s.inst] = Some((ni, si));
                            g.level[s.inst] = net.level;
                        }
                        _ => {}
                    }
                    continue;
                }
                let receiver_clocked = inst.model.kind == CellKind::Logic && inst.model.clocked && dir == PortDir::In;
                if !receiver_clocked {
                    continue;
                }
                let drv = &design.instances[src].model;
                if drv.kind == CellKind::Logic && drv.clocked {
                    g.edges.push(DataEdge { driver: src, receiver: s.inst, net: ni, sink: si });
                } else if drv.kind == CellKind::InputPin {
                    g.inputs.push(InputEdge { pin: src, receiver: s.inst, net: ni, sink: si });
                }
            }
            g.sink_target.push(targets);
        }
        g
    }

    pub fn is_clock_net(&self, net: usize) -> bool {
        self.net_kind[net] == NetKind::ClockTree
    }
}

/// Per-sink wire delays and clock arrivals, kept current under widget
/// substitutions without re-walking the trees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayTracker {
    pub graph: TimingGraph,
    pub delays: DelayParams,
    /// Wire delay of each routed sink.
    pub wire: Vec<Vec<Option<Time>>>,
    /// Clock arrival at each instance's clock port.
    pub clock: Vec<Option<Time>>,
    /// Clock arrival at the root of each clock net.
    pub net_root: Vec<Option<Time>>,
    pub input_arrival: BTreeMap<usize, Time>,
    labels: Vec<Vec<Vec<usize>>>,
}

impl DelayTracker {
    /// Computes everything from scratch.
    pub fn new(graph: TimingGraph, design: &Design, trees: &[Option<NetTree>], delays: &DelayParams) -> DelayTracker {
        let wire: Vec<Vec<Option<Time>>> = design
            .nets
            .iter()
            .enumerate()
            .map(|(ni, net)| match &trees[ni] {
                Some(t) => t.sink_delays(delays),
                None => vec![None; net.fanout()],
            })
            .collect();
        let labels = trees.iter().map(|t| t.as_ref().map(NetTree::labels).unwrap_or_default()).collect();
        let mut tr = DelayTracker {
            clock: vec![None; design.instances.len()],
            net_root: vec![None; design.nets.len()],
            graph,
            delays: delays.clone(),
            wire,
            input_arrival: design.input_arrivals.clone(),
            labels,
        };
        tr.recompute_clock();
        tr
    }

    /// Tracker over wire delays obtained some other way, such as a trace of
    /// the emitted widgets. It answers timing queries but cannot take
    /// substitutions.
    pub fn from_wires(graph: TimingGraph, design: &Design, wire: Vec<Vec<Option<Time>>>, delays: &DelayParams) -> DelayTracker {
        let mut tr = DelayTracker {
            clock: vec![None; design.instances.len()],
            net_root: vec![None; design.nets.len()],
            labels: vec![Vec::new(); design.nets.len()],
            graph,
            delays: delays.clone(),
            wire,
            input_arrival: design.input_arrivals.clone(),
        };
        tr.recompute_clock();
        tr
    }

    fn recompute_clock(&mut self) {
        self.clock.iter_mut().for_each(|c| *c = None);
        self.net_root.iter_mut().for_each(|c| *c = None);
        let roots: Vec<usize> = (0..self.net_root.len())
            .filter(|&n| self.graph.is_clock_net(n) && self.graph.kind[self.graph.net_source[n]] == CellKind::ClockSource)
            .collect();
        for n in roots {
            let src = self.graph.net_source[n];
            self.set_root(n, self.graph.t_delay[src]);
        }
    }

    fn set_root(&mut self, net: usize, t: Time) {
        self.net_root[net] = Some(t);
        for s in 0..self.wire[net].len() {
            let arrival = self.wire[net][s].map(|w| t + w);
            let (inst, _) = self.graph.sink_target[net][s];
            if let Some(&child) = self.graph.tap_net.get(&inst) {
                if let Some(a) = arrival {
                    self.set_root(child, a + self.graph.t_delay[inst]);
                }
            } else if self.graph.clock_sink[inst] == Some((net, s)) {
                self.clock[inst] = arrival;
            }
        }
    }

    fn shift_sink(&mut self, net: usize, sink: usize, delta: Time) {
        if !self.graph.is_clock_net(net) {
            return;
        }
        let (inst, _) = self.graph.sink_target[net][sink];
        if let Some(&child) = self.graph.tap_net.get(&inst) {
            if let Some(r) = self.net_root[child].as_mut() {
                *r += delta;
                for s in 0..self.wire[child].len() {
                    if self.wire[child][s].is_some() {
                        self.shift_sink(child, s, delta);
                    }
                }
            }
        } else if self.graph.clock_sink[inst] == Some((net, sink)) {
            if let Some(c) = self.clock[inst].as_mut() {
                *c += delta;
            }
        }
    }

    /// Records that tree node `node` of `net` changed from `old` to `new`.
    pub fn substitute(&mut self, net: usize, node: usize, old: WidgetKind, new: WidgetKind) {
        let delta = node_delay(new, &self.delays) - node_delay(old, &self.delays);
        if delta == Time::ZERO {
            return;
        }
        let label = self.labels[net][node].clone();
        for s in label {
            if let Some(w) = self.wire[net][s].as_mut() {
                *w += delta;
            }
            self.shift_sink(net, s, delta);
        }
    }

    /// Sinks whose path runs through a node.
    pub fn label(&self, net: usize, node: usize) -> &[usize] {
        &self.labels[net][node]
    }

    pub fn edge_timing(&self, e: &DataEdge) -> Option<EdgeTiming> {
        Some(EdgeTiming {
            t1: self.clock[e.driver]?,
            t_delay: self.graph.t_delay[e.driver],
            t_wire: self.wire[e.net][e.sink]?,
            t2: self.clock[e.receiver]?,
            t_hold: self.graph.t_hold[e.receiver],
            t_setup: self.graph.t_setup[e.receiver],
        })
    }

    /// Timing of every data edge; edges with an unrouted part are skipped.
    pub fn edge_timings(&self) -> Vec<(usize, EdgeTiming)> {
        self.graph.edges.iter().enumerate().filter_map(|(i, e)| self.edge_timing(e).map(|t| (i, t))).collect()
    }

    pub fn io(&self, e: &InputEdge) -> Option<IoSlack> {
        let t_in = self.input_arrival.get(&e.pin).copied().unwrap_or(Time::ZERO) + self.graph.t_delay[e.pin];
        Some(io_slack(t_in + self.wire[e.net][e.sink]?, self.clock[e.receiver]?))
    }

    pub fn hold_violations(&self) -> usize {
        self.edge_timings().iter().filter(|(_, t)| t.hold_slack().is_negative()).count()
    }

    pub fn t_clk(&self) -> Time {
        let t: Vec<EdgeTiming> = self.edge_timings().into_iter().map(|(_, t)| t).collect();
        max_clock(&t, self.graph.library_bound).0
    }

    pub fn report(&self) -> SlackReport {
        let timings = self.edge_timings();
        let plain: Vec<EdgeTiming> = timings.iter().map(|(_, t)| *t).collect();
        let (t_clk, crit) = max_clock(&plain, self.graph.library_bound);
        let edges: Vec<EdgeSlack> = timings
            .iter()
            .map(|&(i, t)| {
                let e = self.graph.edges[i];
                EdgeSlack { driver: e.driver, receiver: e.receiver, net: e.net, hold: t.hold_slack(), setup: t.setup_slack(t_clk) }
            })
            .collect();
        let io: Vec<IoSlack> = self.graph.inputs.iter().filter_map(|e| self.io(e)).collect();
        SlackReport {
            worst_hold: edges.iter().map(|e| e.hold).min(),
            worst_setup: edges.iter().map(|e| e.setup).min(),
            hold_violations: edges.iter().filter(|e| e.hold.is_negative()).count(),
            io_violations: io.iter().filter(|s| s.regime == IoRegime::ClockBeforeInput).count(),
            t_clk,
            frequency_ghz: t_clk.frequency_ghz(),
            critical_edge: crit.map(|c| timings[c].0),
            edges,
            io,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeSlack {
    pub driver: usize,
    pub receiver: usize,
    pub net: usize,
    pub hold: Time,
    pub setup: Time,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlackReport {
    pub edges: Vec<EdgeSlack>,
    pub io: Vec<IoSlack>,
    pub worst_hold: Option<Time>,
    pub worst_setup: Option<Time>,
    pub hold_violations: usize,
    pub io_violations: usize,
    pub t_clk: Time,
    pub frequency_ghz: f64,
    /// Index into the graph's data edges; `None` when the library bound binds.
    pub critical_edge: Option<usize>,
}
