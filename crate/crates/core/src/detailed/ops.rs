// SPDX-License-Identifier: Apache-2.0

//! Segment-level primitives: junction upgrades to fix hold, PTL and long-JTL
//! replacement to shorten.

use rand::seq::SliceRandom;

use crate::grid::{Dir, GridCoord, NodeState};
use crate::techlib::{node_delay, ptl_delay, WidgetKind};
use crate::time::Time;
use crate::tree::PathSegment;

use super::DetailedRouter;

fn upgraded(kind: WidgetKind) -> Option<WidgetKind> {
    match kind {
        WidgetKind::Jtl2 => Some(WidgetKind::Jtl3),
        WidgetKind::Jtl3 => Some(WidgetKind::Jtl4),
        _ => None,
    }
}

/// Minimum microstrip run, in nodes, including driver and receiver.
pub(crate) fn min_ptl_run(r: &DetailedRouter<'_>) -> usize {
    let d = &r.tech.delays;
    (r.tech.breakeven_length().max(d.l_drv + d.l_rec + 1)) as usize
}

impl DetailedRouter<'_> {
    fn behind(&self, net: usize, s: usize, mins: &[Option<Time>]) -> bool {
        match (mins[s], self.tracker.wire[net][s]) {
            (Some(m), Some(w)) => w < m,
            _ => false,
        }
    }

    /// Raises the wire delay of sinks below their minimum by junction
    /// upgrades, segment by segment in label order. Nodes of a segment are
    /// picked in seeded random order, one upgrade per node per pass.
    ///
    /// With `strict`, a segment is only touched while every sink of its
    /// label is behind, so sinks already on target never move.
    ///
    /// Returns the remaining shortfall of each sink.
    pub fn fix_hold(&mut self, net: usize, mins: &[Option<Time>], strict: bool) -> Vec<Time> {
        for seg in self.segments(net) {
            let active = |r: &Self| {
                if strict {
                    seg.label.iter().all(|&s| r.behind(net, s, mins))
                } else {
                    seg.label.iter().any(|&s| r.behind(net, s, mins))
                }
            };
            for _ in 0..self.cfg.max_passes {
                if !active(self) {
                    break;
                }
                let mut cands: Vec<usize> =
                    seg.nodes.iter().copied().filter(|&n| upgraded(self.kind(net, n)).is_some()).collect();
                if cands.is_empty() {
                    break;
                }
                cands.shuffle(&mut self.rng);
                for n in cands {
                    if !active(self) {
                        break;
                    }
                    let k = upgraded(self.kind(net, n)).expect("filtered");
                    self.set_kind(net, n, k);
                }
            }
        }
        (0..mins.len())
            .map(|s| match (mins[s], self.tracker.wire[net][s]) {
                (Some(m), Some(w)) if w < m => m - w,
                _ => Time::ZERO,
            })
            .collect()
    }

    /// Adds at most `amount` of delay to the nodes by junction upgrades.
    /// Returns the delay added.
    pub fn lengthen_nodes(&mut self, net: usize, nodes: &[usize], amount: Time) -> Time {
        let d = self.tech.delays.clone();
        let mut added = Time::ZERO;
        loop {
            let mut cands: Vec<usize> = nodes
                .iter()
                .copied()
                .filter(|&n| {
                    let k = self.kind(net, n);
                    upgraded(k).is_some_and(|u| added + node_delay(u, &d) - node_delay(k, &d) <= amount)
                })
                .collect();
            if cands.is_empty() {
                return added;
            }
            cands.shuffle(&mut self.rng);
            let mut progressed = false;
            for n in cands {
                let k = self.kind(net, n);
                let u = upgraded(k).expect("filtered");
                let step = node_delay(u, &d) - node_delay(k, &d);
                if added + step <= amount {
                    self.set_kind(net, n, u);
                    added += step;
                    progressed = true;
                }
            }
            if !progressed {
                return added;
            }
        }
    }

    /// Maximal runs of straight, changeable JTL nodes within `nodes`.
    fn straight_runs(&self, net: usize, nodes: &[usize], accept: impl Fn(WidgetKind) -> bool) -> Vec<Vec<usize>> {
        let tree = self.tree(net).expect("routed net");
        let mut runs = Vec::new();
        let mut cur: Vec<usize> = Vec::new();
        for &n in nodes {
            let node = &tree.nodes[n];
            let ok = accept(node.kind)
                && tree.is_straight(n)
                && self.map.is_jtl_layer(node.coord.layer)
                && self.map.state(node.coord) == NodeState::Single;
            let continues = cur.last().is_some_and(|&p| tree.nodes[n].parent == Some(p));
            if ok && (cur.is_empty() || continues) {
                cur.push(n);
            } else {
                if !cur.is_empty() {
                    runs.push(std::mem::take(&mut cur));
                }
                if ok {
                    cur.push(n);
                }
            }
        }
        if !cur.is_empty() {
            runs.push(cur);
        }
        runs
    }

    /// Where the interior of a straight run can be rebuilt as microstrip:
    /// the lowest free microstrip-only layer running along the run, or in
    /// place when allowed.
    fn ptl_layer(&self, net: usize, run: &[usize]) -> Option<u8> {
        let tree = self.tree(net).expect("routed net");
        let a = tree.nodes[run[0]].coord;
        let b = tree.nodes[run[1]].coord;
        let axis = Dir::from_planar_delta(b.x - a.x, b.y - a.y).and_then(Dir::axis)?;
        for l in 0..self.map.num_layers() as u8 {
            let spec = self.map.layer(l);
            if !spec.is_ptl_only() || spec.ptl_direction() != axis {
                continue;
            }
            let free = run[1..run.len() - 1].iter().all(|&n| {
                let c = tree.nodes[n].coord;
                self.map.state(GridCoord::new(c.x, c.y, l)) == NodeState::Empty
            });
            if free {
                return Some(l);
            }
        }
        if self.cfg.allow_ptl_on_jtl_layers && self.map.layer(a.layer).ptl_enabled {
            return Some(a.layer);
        }
        None
    }

    fn run_delay(&self, net: usize, nodes: &[usize]) -> Time {
        nodes.iter().map(|&n| node_delay(self.kind(net, n), &self.tech.delays)).sum()
    }

    /// One microstrip replacement with the longest run whose gain fits in
    /// `limit`. Returns the gain.
    fn try_ptl(&mut self, net: usize, nodes: &[usize], limit: Time) -> Option<Time> {
        let d = self.tech.delays.clone();
        let kmin = min_ptl_run(self);
        let runs = self.straight_runs(net, nodes, WidgetKind::is_changeable);
        let mut best: Option<(usize, usize, usize, Time)> = None;
        for (ri, run) in runs.iter().enumerate() {
            for k in (kmin..=run.len()).rev() {
                if best.is_some_and(|b| b.2 >= k) {
                    break;
                }
                for off in 0..=run.len() - k {
                    let part = &run[off..off + k];
                    let gain = self.run_delay(net, part) - ptl_delay(k as u32, &d);
                    if gain > Time::ZERO && gain <= limit && self.ptl_layer(net, part).is_some() {
                        best = Some((ri, off, k, gain));
                        break;
                    }
                }
            }
        }
        let (ri, off, k, gain) = best?;
        let part = runs[ri][off..off + k].to_vec();
        let layer = self.ptl_layer(net, &part).expect("checked");
        let last = part.len() - 1;
        for (i, &n) in part.iter().enumerate() {
            let c = self.tree(net).expect("routed").nodes[n].coord;
            let kind = match i {
                0 => WidgetKind::Driver,
                i if i == last => WidgetKind::Receiver,
                _ => WidgetKind::Msl,
            };
            self.set_kind(net, n, kind);
            let to = if kind == WidgetKind::Msl { GridCoord::new(c.x, c.y, layer) } else { c };
            self.relocate(net, n, to);
        }
        Some(gain)
    }

    /// One long-JTL replacement of at least two collinear nodes with the
    /// largest gain that fits in `limit`.
    fn try_long_jtl(&mut self, net: usize, nodes: &[usize], limit: Time) -> Option<Time> {
        let runs = self.straight_runs(net, nodes, |k| {
            matches!(k, WidgetKind::Jtl2 | WidgetKind::Jtl3 | WidgetKind::Jtl4)
        });
        let long = node_delay(WidgetKind::LongJtl, &self.tech.delays);
        let mut best: Option<(Vec<usize>, Time)> = None;
        for run in &runs {
            for k in (2..=run.len()).rev() {
                for off in 0..=run.len() - k {
                    let part = &run[off..off + k];
                    let gain = self.run_delay(net, part) - long * k as i64;
                    if gain > Time::ZERO && gain <= limit && best.as_ref().is_none_or(|b| gain > b.1) {
                        best = Some((part.to_vec(), gain));
                    }
                }
            }
        }
        let (part, gain) = best?;
        for n in part {
            self.set_kind(net, n, WidgetKind::LongJtl);
        }
        Some(gain)
    }

    /// Removes at most `limit` of delay from the nodes: microstrip first,
    /// then long JTLs. Returns the delay removed.
    pub fn shorten_nodes(&mut self, net: usize, nodes: &[usize], limit: Time) -> Time {
        let mut removed = Time::ZERO;
        let ptl_possible = self.map.layers.iter().any(|l| l.is_ptl_only())
            || (self.cfg.allow_ptl_on_jtl_layers && self.map.layers.iter().any(|l| l.ptl_enabled));
        if ptl_possible {
            while let Some(g) = self.try_ptl(net, nodes, limit - removed) {
                removed += g;
            }
        }
        while let Some(g) = self.try_long_jtl(net, nodes, limit - removed) {
            removed += g;
        }
        removed
    }

    /// Shortens one segment without letting any sink of its label drop
    /// below its minimum. Segments with one JTL2 delay of headroom or less
    /// are left alone.
    pub fn shorten_segment(&mut self, net: usize, seg: &PathSegment, mins: &[Option<Time>]) -> Time {
        let headroom = seg
            .label
            .iter()
            .filter_map(|&s| Some(self.tracker.wire[net][s]? - mins[s]?))
            .min();
        match headroom {
            Some(h) if h > self.tech.delays.t_jtl2 => self.shorten_nodes(net, &seg.nodes, h),
            _ => Time::ZERO,
        }
    }
}
