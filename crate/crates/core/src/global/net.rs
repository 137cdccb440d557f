// SPDX-License-Identifier: Apache-2.0

//! Routing of one net: per-sink A* paths merged into a splitter tree.

use std::collections::BTreeSet;

use crate::design::{CoordPair, Rect};
use crate::grid::{Dir, GridCoord, NodeState, Occupant, RouteMap};
use crate::techlib::WidgetKind;
use crate::tree::NetTree;

use super::astar::{annotate_path, route_pair, search_bound};

/// Divergence candidates tried when a raw branch overlaps the tree.
const MAX_BRANCH_CANDIDATES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetResult {
    pub tree: Option<NetTree>,
    pub failed: Vec<CoordPair>,
}

/// Writes a routed tree into the map.
///
/// Splitters and nodes already holding another path become saturated; a
/// node passed straight through stays crossable along the other axis.
pub fn commit_tree(map: &mut RouteMap, tree: &NetTree) {
    for (i, n) in tree.nodes.iter().enumerate() {
        let c = n.coord;
        let (state, occ) = if n.kind == WidgetKind::Splitter || tree.is_splitter(i) {
            (NodeState::Saturated, Occupant::Fixed)
        } else if map.is_ptl_only_layer(c.layer) {
            (NodeState::Single, Occupant::Fixed)
        } else if map.state(c) == NodeState::Single {
            (NodeState::Saturated, Occupant::Fixed)
        } else if tree.is_straight(i) {
            let p = tree.nodes[n.parent.expect("straight nodes have a parent")].coord;
            let axis = Dir::from_planar_delta(c.x - p.x, c.y - p.y).and_then(Dir::axis).expect("planar");
            (NodeState::Single, Occupant::Straight(axis))
        } else {
            (NodeState::Single, Occupant::Fixed)
        };
        map.set(c, state, occ);
    }
}

/// Tree node where a new branch may split off.
fn can_diverge(tree: &NetTree, node: usize, map: &RouteMap, bound: Rect) -> bool {
    let n = &tree.nodes[node];
    n.kind == WidgetKind::Jtl2
        && n.children.len() == 1
        && map.is_jtl_layer(n.coord.layer)
        && map.state(n.coord) == NodeState::Empty
        && bound.contains_xy(n.coord.x, n.coord.y)
}

/// Routes every pair of one net, in the given order, on `map`.
///
/// A fanout-1 net is committed as soon as it is found. For larger fanout all
/// per-sink paths are found first, merged into one tree by longest common
/// prefix from the source, and the tree is committed at the end.
pub fn route_net(pairs: &[CoordPair], map: &mut RouteMap) -> NetResult {
    let mut tree: Option<NetTree> = None;
    let mut failed = Vec::new();
    let Some(first) = pairs.first() else {
        return NetResult { tree: None, failed };
    };
    let fanout = first.fanout;
    for p in pairs {
        let bound = search_bound(p.source, p.dest, map);
        let Some(t) = tree.as_mut() else {
            match route_pair(p.source, p.dest, map, bound) {
                Some(path) => tree = Some(NetTree::from_path(p.net, fanout, p.sink_index, &annotate_path(&path, map))),
                None => failed.push(*p),
            }
            continue;
        };
        if !add_branch(t, p, map, bound) {
            failed.push(*p);
        }
    }
    if let Some(t) = &tree {
        commit_tree(map, t);
    }
    NetResult { tree, failed }
}

fn add_branch(tree: &mut NetTree, p: &CoordPair, map: &RouteMap, bound: Rect) -> bool {
    let used: BTreeSet<GridCoord> = tree.coord_set();
    if used.contains(&p.dest) {
        return false;
    }
    if let Some(raw) = route_pair(p.source, p.dest, map, bound) {
        let kinds = annotate_path(&raw, map);
        if let Some((len, node)) = tree.common_prefix(&raw) {
            let suffix = &kinds[len..];
            if !suffix.is_empty()
                && kinds[len - 1].1 == WidgetKind::Jtl2
                && can_diverge(tree, node, map, bound)
                && suffix.iter().all(|(c, _)| !used.contains(c))
            {
                tree.attach(node, p.sink_index, suffix);
                return true;
            }
        }
    }

    // Reroute the branch from a tree node with the tree blocked.
    let mut scratch = map.clone();
    for &c in &used {
        scratch.set(c, NodeState::Blocked, Occupant::Fixed);
    }
    let mut candidates: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..tree.nodes.len()).collect();
    order.sort_by_key(|&i| (tree.nodes[i].coord.manhattan(p.dest), i));
    for i in order {
        if candidates.len() >= MAX_BRANCH_CANDIDATES {
            break;
        }
        if can_diverge(tree, i, map, bound) {
            candidates.push(i);
        }
    }
    for node in candidates {
        let c = tree.nodes[node].coord;
        scratch.set(c, map.state(c), map.occupant(c));
        let found = route_pair(c, p.dest, &scratch, bound);
        scratch.set(c, NodeState::Blocked, Occupant::Fixed);
        if let Some(branch) = found {
            let kinds = annotate_path(&branch, &scratch);
            tree.attach(node, p.sink_index, &kinds[1..]);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::techlib::{Axis, LayerProfile};

    fn map(w: i32, h: i32) -> RouteMap {
        RouteMap::new(w, h, vec![LayerProfile::Nb03.layers().remove(0)])
    }

    fn pair(net: usize, s: (i32, i32), d: (i32, i32), sink: usize, fanout: usize) -> CoordPair {
        CoordPair {
            source: GridCoord::new(s.0, s.1, 0),
            dest: GridCoord::new(d.0, d.1, 0),
            net,
            sink_index: sink,
            fanout,
            large: false,
        }
    }

    #[test]
    fn single_fanout_marks_nodes_single() {
        let mut m = map(10, 10);
        let r = route_net(&[pair(0, (1, 5), (6, 5), 0, 1)], &mut m);
        let t = r.tree.unwrap();
        assert_eq!(t.nodes.len(), 6);
        for n in &t.nodes {
            assert_eq!(m.state(n.coord), NodeState::Single);
        }
        assert_eq!(m.occupant(GridCoord::new(3, 5, 0)), Occupant::Straight(Axis::Horizontal));
        assert_eq!(m.count(NodeState::Single), 6);
    }

    #[test]
    fn fanout_two_shares_trunk_with_one_splitter() {
        let mut m = map(12, 12);
        let pairs = [pair(0, (1, 5), (6, 8), 0, 2), pair(0, (1, 5), (6, 2), 1, 2)];
        let r = route_net(&pairs, &mut m);
        assert!(r.failed.is_empty());
        let t = r.tree.unwrap();
        let splitters: Vec<usize> = (0..t.nodes.len()).filter(|&i| t.is_splitter(i)).collect();
        assert_eq!(splitters.len(), 1);
        assert_eq!(m.state(t.nodes[splitters[0]].coord), NodeState::Saturated);
        assert_eq!(m.count(NodeState::Saturated), 1);
        // Every node is reached by one path from the source.
        assert_eq!(t.coord_set().len(), t.nodes.len());
    }

    #[test]
    fn perpendicular_crossing_saturates_node() {
        let mut m = map(10, 10);
        route_net(&[pair(0, (5, 1), (5, 8), 0, 1)], &mut m);
        let r = route_net(&[pair(1, (1, 4), (8, 4), 0, 1)], &mut m);
        let t = r.tree.unwrap();
        assert_eq!(t.nodes.len(), 8);
        assert_eq!(m.state(GridCoord::new(5, 4, 0)), NodeState::Saturated);
        assert_eq!(m.count(NodeState::Saturated), 1);
    }
}
