// SPDX-License-Identifier: Apache-2.0

//! The four optimization phases and the driver that runs them in order.

use serde::Serialize;

use crate::design::NetKind;
use crate::techlib::CellKind;
use crate::time::Time;
use crate::timing::SlackReport;

use super::{DetailedRouter, ResidueTable};

/// Result of a full detailed-routing run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetailedOutcome {
    pub before: SlackReport,
    pub after: SlackReport,
    /// Data edges still violating hold, as indices into the timing graph.
    pub irreducible: Vec<usize>,
    /// Clock nets whose gate sinks could not be balanced, with the remaining
    /// skew.
    pub unbalanced: Vec<(usize, Time)>,
    pub substitutions: usize,
}

/// Clock delay change for an instance from the worst hold slack of its
/// incoming (`curr`) and outgoing (`next`) edges. Positive delays the clock.
/// A missing side places no bound on the move.
pub fn retime_delta(curr: Option<Time>, next: Option<Time>) -> Time {
    match (curr, next) {
        (Some(c), Some(n)) => (c - n).half_floor(),
        (None, Some(n)) => -n,
        (Some(c), None) => c,
        (None, None) => Time::ZERO,
    }
}

impl DetailedRouter<'_> {
    /// Nodes of the segment that reaches `sink` alone.
    pub fn leaf_nodes(&self, net: usize, sink: usize) -> Vec<usize> {
        self.segments(net).into_iter().find(|s| s.label == [sink]).map(|s| s.nodes).unwrap_or_default()
    }

    fn clock_nets_by_level(&self) -> Vec<(u32, usize)> {
        let mut v: Vec<(u32, usize)> = self
            .design
            .nets
            .iter()
            .enumerate()
            .filter(|(i, n)| n.kind == NetKind::ClockTree && self.trees[*i].is_some())
            .map(|(i, n)| (n.level.unwrap_or(0), i))
            .collect();
        v.sort();
        v
    }

    /// Phase I: balances the gate sinks of every clock net, deepest level
    /// first, by slowing the early branches toward the latest one. Taps
    /// feeding the next level are left alone.
    pub fn optimize_clock_tree(&mut self) -> Vec<(usize, Time)> {
        let mut unbalanced = Vec::new();
        for (_, net) in self.clock_nets_by_level().into_iter().rev() {
            let gate_sinks: Vec<usize> = (0..self.tracker.wire[net].len())
                .filter(|&s| {
                    let (inst, _) = self.tracker.graph.sink_target[net][s];
                    self.tracker.graph.clock_sink[inst] == Some((net, s))
                })
                .collect();
            let Some(target) = gate_sinks.iter().filter_map(|&s| self.tracker.wire[net][s]).max() else {
                continue;
            };
            let mut mins = vec![None; self.tracker.wire[net].len()];
            for &s in &gate_sinks {
                mins[s] = Some(target);
            }
            self.guarded_by(
                |r| {
                    r.fix_hold(net, &mins, true);
                },
                |(v0, _), (v1, _)| v1 <= v0,
            );
            let skew = gate_sinks.iter().filter_map(|&s| Some(target - self.tracker.wire[net][s]?)).max();
            if let Some(skew) = skew.filter(|w| *w > Time::ZERO) {
                unbalanced.push((net, skew));
            }
        }
        unbalanced
    }

    /// Phase II: fixes hold on every data net, then shortens its segments
    /// down to their hold minimum to lower the clock period.
    pub fn optimize_signals(&mut self) {
        let t_clk = self.tracker.graph.library_bound;
        for net in 0..self.design.nets.len() {
            if self.trees[net].is_none() || self.tracker.graph.is_clock_net(net) {
                continue;
            }
            if !self.tracker.graph.edges.iter().any(|e| e.net == net) {
                continue;
            }
            let mins: Vec<Option<Time>> =
                ResidueTable::for_net(&self.tracker, net, t_clk).sinks.iter().map(|s| s.min_wire).collect();
            self.fix_hold(net, &mins, false);
            for seg in self.segments(net) {
                self.shorten_segment(net, &seg, &mins);
            }
        }
    }

    /// Edges entering clock level `k` from a lower level.
    fn edges_into_level(&self, k: u32) -> Vec<usize> {
        let g = &self.tracker.graph;
        (0..g.edges.len())
            .filter(|&i| {
                let e = g.edges[i];
                g.level[e.receiver] == Some(k) && g.level[e.driver].is_some_and(|l| l < k)
            })
            .collect()
    }

    fn min_slack(&self, edges: &[usize], setup: bool) -> Option<Time> {
        let t_clk = self.t_clk();
        edges
            .iter()
            .filter_map(|&i| self.tracker.edge_timing(&self.tracker.graph.edges[i]))
            .map(|t| if setup { t.setup_slack(t_clk) } else { t.hold_slack() })
            .min()
    }

    /// Phase III: moves whole clock levels through their tap bridges, then
    /// single instances through their clock leaves.
    pub fn retime_clock(&mut self) {
        for (k, net) in self.clock_nets_by_level() {
            let src = self.tracker.graph.net_source[net];
            if self.tracker.graph.kind[src] != CellKind::ClockTap {
                continue;
            }
            let Some(&(bnet, bsink)) = self.tracker.graph.tap_feed.get(&src) else {
                continue;
            };
            let bridge = self.leaf_nodes(bnet, bsink);
            let into = self.edges_into_level(k);
            let Some(m) = self.min_slack(&into, false) else {
                continue;
            };
            if m < Time::ZERO {
                let limit = self.min_slack(&into, true).unwrap_or(Time::ZERO);
                if limit > Time::ZERO {
                    self.guarded(|r| {
                        r.shorten_nodes(bnet, &bridge, limit);
                    });
                }
            } else if m > Time::ZERO {
                let mut left = m;
                loop {
                    let before = self.log.len();
                    let kept = self.guarded_by(
                        |r| {
                            r.lengthen_nodes(bnet, &bridge, left.min(r.tech.delays.t_jtl4 - r.tech.delays.t_jtl2));
                        },
                        |(v0, c0), (v1, c1)| v1 <= v0 && c1 < c0,
                    );
                    if !kept || self.log.len() == before {
                        break;
                    }
                    let step: Time = self.log[before..].iter().map(|s| s.delta).sum();
                    left -= step;
                }
            }
        }

        let g = self.tracker.graph.clone();
        for inst in 0..g.clock_sink.len() {
            let Some((net, sink)) = g.clock_sink[inst] else {
                continue;
            };
            if self.trees[net].is_none() {
                continue;
            }
            let hold = |r: &Self, pick: &dyn Fn(&crate::timing::DataEdge) -> bool| {
                g.edges
                    .iter()
                    .filter(|e| pick(e))
                    .filter_map(|e| r.tracker.edge_timing(e))
                    .map(|t| t.hold_slack())
                    .min()
            };
            let curr = hold(self, &|e| e.receiver == inst);
            let next = hold(self, &|e| e.driver == inst);
            let worst = curr.into_iter().chain(next).min();
            if !worst.is_some_and(|w| w < Time::ZERO) {
                continue;
            }
            let delta = retime_delta(curr, next);
            let leaf = self.leaf_nodes(net, sink);
            if delta > Time::ZERO {
                self.guarded(|r| {
                    r.lengthen_nodes(net, &leaf, delta);
                });
            } else if delta < Time::ZERO {
                self.guarded(|r| {
                    r.shorten_nodes(net, &leaf, -delta);
                });
            }
        }
    }

    /// Phase IV: brings each input as close as possible before the clock of
    /// its first stage.
    pub fn optimize_io(&mut self) {
        let inputs = self.tracker.graph.inputs.clone();
        for e in inputs {
            if self.trees[e.net].is_none() {
                continue;
            }
            let Some(io) = self.tracker.io(&e) else {
                continue;
            };
            let leaf = self.leaf_nodes(e.net, e.sink);
            let gap = io.t_clock - io.t_input;
            if gap < Time::ZERO {
                self.shorten_nodes(e.net, &leaf, Time::MAX);
            }
            let Some(io) = self.tracker.io(&e) else {
                continue;
            };
            let gap = io.t_clock - io.t_input;
            if gap > Time::ZERO {
                self.lengthen_nodes(e.net, &leaf, gap - Time::from_fs(1));
            }
        }
    }

    /// Runs all phases. Phase II is repeated after clock retiming.
    pub fn run(&mut self) -> DetailedOutcome {
        let before = self.report();
        let unbalanced = self.optimize_clock_tree();
        self.optimize_signals();
        self.retime_clock();
        self.optimize_signals();
        if self.cfg.enable_io_opt {
            self.optimize_io();
        }
        let after = self.recomputed().report();
        debug_assert_eq!(after, self.report());
        let irreducible = self
            .tracker
            .edge_timings()
            .into_iter()
            .filter(|(_, t)| t.hold_slack().is_negative())
            .map(|(i, _)| i)
            .collect();
        DetailedOutcome { before, after, irreducible, unbalanced, substitutions: self.log.len() }
    }
}
