// SPDX-License-Identifier: Apache-2.0

//! Routed net trees: a source-rooted arborescence of grid nodes whose leaves
//! are the net's sinks. Shared prefixes form trunks; nodes with several
//! children host splitters.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::grid::GridCoord;
use crate::techlib::{node_delay, DelayParams, WidgetKind};
use crate::time::Time;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub coord: GridCoord,
    pub kind: WidgetKind,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetTree {
    pub net: usize,
    pub nodes: Vec<TreeNode>,
    /// Leaf node of each sink, `None` while the sink is unrouted.
    pub sinks: Vec<Option<usize>>,
}

/// Maximal chain of tree nodes between splitters, labelled with the sinks
/// reachable through it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSegment {
    pub label: Vec<usize>,
    /// Tree node indices ordered from the source side towards the sinks.
    pub nodes: Vec<usize>,
}

impl NetTree {
    /// Tree consisting of a single routed path from the source to `sink`.
    pub fn from_path(net: usize, fanout: usize, sink: usize, path: &[(GridCoord, WidgetKind)]) -> NetTree {
        let mut t = NetTree { net, nodes: Vec::new(), sinks: vec![None; fanout] };
        for (i, &(coord, kind)) in path.iter().enumerate() {
            t.nodes.push(TreeNode {
                coord,
                kind,
                parent: i.checked_sub(1),
                children: if i + 1 < path.len() { vec![i + 1] } else { vec![] },
            });
        }
        t.sinks[sink] = Some(path.len() - 1);
        t
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Appends `branch` below existing node `at`; `branch` excludes `at`.
    pub fn attach(&mut self, at: usize, sink: usize, branch: &[(GridCoord, WidgetKind)]) {
        let mut prev = at;
        for &(coord, kind) in branch {
            let idx = self.nodes.len();
            self.nodes.push(TreeNode { coord, kind, parent: Some(prev), children: vec![] });
            self.nodes[prev].children.push(idx);
            prev = idx;
        }
        if self.nodes[at].children.len() >= 2 {
            self.nodes[at].kind = WidgetKind::Splitter;
        }
        self.sinks[sink] = Some(prev);
    }

    /// Length of the longest prefix of `coords` that follows the tree from
    /// the root, with the tree node where it ends.
    pub fn common_prefix(&self, coords: &[GridCoord]) -> Option<(usize, usize)> {
        if coords.first() != Some(&self.nodes[0].coord) {
            return None;
        }
        let mut node = 0;
        let mut len = 1;
        for c in &coords[1..] {
            match self.nodes[node].children.iter().find(|&&ch| self.nodes[ch].coord == *c) {
                Some(&ch) => {
                    node = ch;
                    len += 1;
                }
                None => break,
            }
        }
        Some((len, node))
    }

    /// Node indices from the root to `node` inclusive.
    pub fn path_to(&self, node: usize) -> Vec<usize> {
        let mut out = vec![node];
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    pub fn sink_path(&self, sink: usize) -> Option<Vec<usize>> {
        self.sinks[sink].map(|leaf| self.path_to(leaf))
    }

    pub fn coord_set(&self) -> BTreeSet<GridCoord> {
        self.nodes.iter().map(|n| n.coord).collect()
    }

    pub fn is_splitter(&self, node: usize) -> bool {
        self.nodes[node].children.len() >= 2
    }

    /// Sinks whose root path contains each node.
    pub fn labels(&self) -> Vec<Vec<usize>> {
        let mut labels = vec![Vec::new(); self.nodes.len()];
        for (s, leaf) in self.sinks.iter().enumerate() {
            if let Some(leaf) = *leaf {
                for n in self.path_to(leaf) {
                    labels[n].push(s);
                }
            }
        }
        labels
    }

    /// Segments ordered by label size, then by smallest sink index.
    pub fn segments(&self) -> Vec<PathSegment> {
        let labels = self.labels();
        let mut segs = Vec::new();
        let mut starts = vec![0usize];
        while let Some(start) = starts.pop() {
            let mut nodes = vec![start];
            let mut cur = start;
            while self.nodes[cur].children.len() == 1 {
                cur = self.nodes[cur].children[0];
                nodes.push(cur);
            }
            starts.extend(self.nodes[cur].children.iter().rev().copied());
            let label = labels[start].clone();
            if !label.is_empty() {
                segs.push(PathSegment { label, nodes });
            }
        }
        segs.sort_by(|a, b| a.label.len().cmp(&b.label.len()).then(a.label.cmp(&b.label)));
        segs
    }

    /// Wire delay from the source to each routed sink.
    pub fn sink_delays(&self, delays: &DelayParams) -> Vec<Option<Time>> {
        (0..self.sinks.len())
            .map(|s| {
                self.sink_path(s)
                    .map(|p| p.iter().map(|&n| node_delay(self.nodes[n].kind, delays)).sum())
            })
            .collect()
    }

    /// Planar steps along tree edges.
    pub fn wire_steps(&self) -> u64 {
        self.nodes
            .iter()
            .filter_map(|n| n.parent.map(|p| u64::from(n.coord.manhattan(self.nodes[p].coord))))
            .sum()
    }

    /// True when `node` has a parent and one child collinear with it on the
    /// same layer.
    pub fn is_straight(&self, node: usize) -> bool {
        let n = &self.nodes[node];
        let (Some(p), [c]) = (n.parent, n.children.as_slice()) else {
            return false;
        };
        let (a, b) = (self.nodes[p].coord, self.nodes[*c].coord);
        if a.layer != n.coord.layer || b.layer != n.coord.layer {
            return false;
        }
        let d1 = (n.coord.x - a.x, n.coord.y - a.y);
        let d2 = (b.x - n.coord.x, b.y - n.coord.y);
        d1 == d2 && d1.0.abs() + d1.1.abs() == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(coords: &[(i32, i32)]) -> Vec<(GridCoord, WidgetKind)> {
        coords.iter().map(|&(x, y)| (GridCoord::new(x, y, 0), WidgetKind::Jtl2)).collect()
    }

    /// Topology with sinks 0..=3 where sinks 1 and 2 share a branch, which in
    /// turn shares a trunk with sink 0.
    fn four_sink_tree() -> NetTree {
        let mut t = NetTree::from_path(0, 4, 0, &line(&[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0)]));
        // Sink 3 splits off at (1,0).
        t.attach(1, 3, &line(&[(1, -1), (1, -2)]));
        // Sinks 1 and 2 split off at (3,0) then split again at (3,2).
        t.attach(3, 1, &line(&[(3, 1), (3, 2), (3, 3)]));
        let n32 = t.nodes.iter().position(|n| n.coord == GridCoord::new(3, 2, 0)).unwrap();
        t.attach(n32, 2, &line(&[(4, 2)]));
        t
    }

    #[test]
    fn segment_order_follows_label_size() {
        let t = four_sink_tree();
        let labels: Vec<Vec<usize>> = t.segments().into_iter().map(|s| s.label).collect();
        assert_eq!(
            labels,
            vec![vec![0], vec![1], vec![2], vec![3], vec![1, 2], vec![0, 1, 2], vec![0, 1, 2, 3]]
        );
    }

    #[test]
    fn single_fanout_has_one_segment() {
        let t = NetTree::from_path(0, 1, 0, &line(&[(0, 0), (1, 0), (2, 0)]));
        let segs = t.segments();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].nodes, vec![0, 1, 2]);
    }

    #[test]
    fn segments_partition_nodes() {
        let t = four_sink_tree();
        let mut all: Vec<usize> = t.segments().into_iter().flat_map(|s| s.nodes).collect();
        all.sort();
        assert_eq!(all, (0..t.nodes.len()).collect::<Vec<_>>());
    }

    #[test]
    fn splitters_marked_on_attach() {
        let t = four_sink_tree();
        let splitters: Vec<GridCoord> =
            t.nodes.iter().filter(|n| n.kind == WidgetKind::Splitter).map(|n| n.coord).collect();
        assert_eq!(splitters.len(), 3);
        assert!(splitters.contains(&GridCoord::new(1, 0, 0)));
    }

    #[test]
    fn common_prefix_walks_children() {
        let t = four_sink_tree();
        let probe: Vec<GridCoord> = [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (2, 1)]
            .iter()
            .map(|&(x, y)| GridCoord::new(x, y, 0))
            .collect();
        let (len, node) = t.common_prefix(&probe).unwrap();
        assert_eq!(len, 5);
        assert_eq!(t.nodes[node].coord, GridCoord::new(3, 1, 0));
    }
}
