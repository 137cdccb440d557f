// SPDX-License-Identifier: Apache-2.0

//! Timing-driven widget substitution on routed trees.
//!
//! The router never changes tree topology. It swaps widget kinds on nodes
//! (junction upgrades, long JTLs) and moves the interior of straight runs
//! onto microstrip layers, keeping the delay tracker in step with every
//! change.

mod ops;
mod phases;

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::design::Design;
use crate::grid::{GridCoord, NodeState, Occupant, RouteMap};
use crate::techlib::{node_delay, Technology, WidgetKind};
use crate::time::Time;
use crate::timing::{DelayTracker, SlackReport, TimingGraph};
use crate::tree::{NetTree, PathSegment};

pub use phases::DetailedOutcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OptimizerConfig {
    pub rng_seed: u64,
    /// Upgrade passes over one segment.
    pub max_passes: usize,
    /// Allow microstrip on layers that also carry JTLs (two-layer process).
    pub allow_ptl_on_jtl_layers: bool,
    pub enable_io_opt: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { rng_seed: 0, max_passes: 4, allow_ptl_on_jtl_layers: false, enable_io_opt: true }
    }
}

/// One widget change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Substitution {
    pub net: usize,
    pub node: usize,
    pub coord: GridCoord,
    pub old: WidgetKind,
    pub new: WidgetKind,
    pub delta: Time,
}

impl Substitution {
    pub fn log_line(&self) -> String {
        format!(
            "S {} {} {} {} {} {} {} {}",
            self.net,
            self.node,
            self.coord.layer,
            self.coord.x,
            self.coord.y,
            self.old,
            self.new,
            self.delta
        )
    }
}

pub fn format_log(subs: &[Substitution]) -> String {
    let mut s = String::new();
    for sub in subs {
        writeln!(s, "{}", sub.log_line()).expect("string write");
    }
    s
}

/// Wire delay bounds of one sink.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SinkResidue {
    pub wire: Time,
    /// `None` for sinks without a timing requirement.
    pub min_wire: Option<Time>,
    pub max_wire: Option<Time>,
}

impl SinkResidue {
    /// Negative when the sink violates hold.
    pub fn hold_residue(&self) -> Option<Time> {
        self.min_wire.map(|m| self.wire - m)
    }

    /// Delay that may be removed without a hold violation.
    pub fn headroom(&self) -> Option<Time> {
        self.hold_residue()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueTable {
    pub net: usize,
    pub sinks: Vec<SinkResidue>,
}

impl ResidueTable {
    /// Windows of every sink of `net` that ends in a timed data edge, at
    /// period `t_clk`.
    pub fn for_net(tracker: &DelayTracker, net: usize, t_clk: Time) -> ResidueTable {
        let mut sinks: Vec<SinkResidue> = tracker.wire[net]
            .iter()
            .map(|w| SinkResidue { wire: w.unwrap_or(Time::ZERO), min_wire: None, max_wire: None })
            .collect();
        for e in tracker.graph.edges.iter().filter(|e| e.net == net) {
            if let Some(t) = tracker.edge_timing(e) {
                let w = t.wire_window(t_clk);
                sinks[e.sink].min_wire = Some(w.min);
                sinks[e.sink].max_wire = Some(w.max);
            }
        }
        ResidueTable { net, sinks }
    }

    /// Smallest headroom over `label`; `None` when no sink is constrained.
    pub fn label_headroom(&self, label: &[usize]) -> Option<Time> {
        label.iter().filter_map(|&s| self.sinks[s].headroom()).min()
    }
}

/// Mutable state of the detailed router.
#[derive(Clone, Debug)]
pub struct DetailedRouter<'a> {
    pub design: &'a Design,
    pub tech: &'a Technology,
    pub trees: Vec<Option<NetTree>>,
    pub map: RouteMap,
    pub tracker: DelayTracker,
    pub log: Vec<Substitution>,
    pub cfg: OptimizerConfig,
    rng: ChaCha8Rng,
}

impl<'a> DetailedRouter<'a> {
    pub fn new(
        design: &'a Design,
        tech: &'a Technology,
        trees: Vec<Option<NetTree>>,
        map: RouteMap,
        cfg: OptimizerConfig,
    ) -> Self {
        let tracker = DelayTracker::new(TimingGraph::new(design, tech), design, &trees, &tech.delays);
        DetailedRouter { design, tech, trees, map, tracker, log: Vec::new(), cfg, rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed) }
    }

    pub fn tree(&self, net: usize) -> Option<&NetTree> {
        self.trees[net].as_ref()
    }

    pub fn segments(&self, net: usize) -> Vec<PathSegment> {
        self.tree(net).map(NetTree::segments).unwrap_or_default()
    }

    pub fn report(&self) -> SlackReport {
        self.tracker.report()
    }

    /// Fresh tracker built from the current trees.
    pub fn recomputed(&self) -> DelayTracker {
        DelayTracker::new(self.tracker.graph.clone(), self.design, &self.trees, &self.tech.delays)
    }

    pub fn kind(&self, net: usize, node: usize) -> WidgetKind {
        self.trees[net].as_ref().expect("routed net").nodes[node].kind
    }

    /// Replaces the widget kind of one node.
    pub fn set_kind(&mut self, net: usize, node: usize, new: WidgetKind) {
        let tree = self.trees[net].as_mut().expect("routed net");
        let old = tree.nodes[node].kind;
        if old == new {
            return;
        }
        tree.nodes[node].kind = new;
        let coord = tree.nodes[node].coord;
        self.tracker.substitute(net, node, old, new);
        let d = &self.tech.delays;
        self.log.push(Substitution { net, node, coord, old, new, delta: node_delay(new, d) - node_delay(old, d) });
    }

    /// Moves a node to another grid position, updating the map.
    fn relocate(&mut self, net: usize, node: usize, to: GridCoord) {
        let tree = self.trees[net].as_mut().expect("routed net");
        let from = tree.nodes[node].coord;
        tree.nodes[node].coord = to;
        if from != to {
            self.map.set(from, NodeState::Empty, Occupant::Empty);
        }
        self.map.set(to, NodeState::Single, Occupant::Fixed);
    }

    pub fn hold_violations(&self) -> usize {
        self.tracker.hold_violations()
    }

    pub fn t_clk(&self) -> Time {
        self.tracker.t_clk()
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot { trees: self.trees.clone(), map: self.map.clone(), tracker: self.tracker.clone(), log: self.log.len() }
    }

    fn restore(&mut self, s: Snapshot) {
        self.trees = s.trees;
        self.map = s.map;
        self.tracker = s.tracker;
        self.log.truncate(s.log);
    }

    /// Runs `f` and rolls it back when it adds a hold violation or slows
    /// the clock. Returns whether the change was kept.
    pub fn guarded(&mut self, f: impl FnOnce(&mut Self)) -> bool {
        self.guarded_by(f, |(v0, c0), (v1, c1)| v1 <= v0 && c1 <= c0)
    }

    /// Runs `f` and keeps it only if `accept` approves the change of
    /// (hold violations, clock period).
    pub fn guarded_by(
        &mut self,
        f: impl FnOnce(&mut Self),
        accept: impl FnOnce((usize, Time), (usize, Time)) -> bool,
    ) -> bool {
        let snap = self.snapshot();
        let before = (self.hold_violations(), self.t_clk());
        f(self);
        if accept(before, (self.hold_violations(), self.t_clk())) {
            true
        } else {
            self.restore(snap);
            false
        }
    }
}

struct Snapshot {
    trees: Vec<Option<NetTree>>,
    map: RouteMap,
    tracker: DelayTracker,
    log: usize,
}

#[cfg(test)]
mod tests;
