// SPDX-License-Identifier: Apache-2.0

//! Group routing with rip-up and reroute, and the design-level driver.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use crate::design::{cluster_nets, sort_route_queue, CoordPair, Design, RouteGroup};
use crate::grid::{GridCoord, RouteMap};
use crate::techlib::WidgetKind;
use crate::tree::NetTree;

use super::net::{commit_tree, route_net};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupResult {
    /// Routed trees in commit order.
    pub trees: Vec<NetTree>,
    pub failed: Vec<CoordPair>,
    pub iterations: usize,
}

impl GroupResult {
    fn wire(&self) -> u64 {
        self.trees.iter().map(NetTree::wire_steps).sum()
    }
}

/// Routes one queue on `map`. Each net is routed as a whole when its first
/// pair comes up, its pairs in queue order.
fn route_queue(queue: &[CoordPair], map: &mut RouteMap) -> (Vec<NetTree>, Vec<CoordPair>) {
    let mut done: HashSet<usize> = HashSet::new();
    let mut trees = Vec::new();
    let mut failed = Vec::new();
    for p in queue {
        if !done.insert(p.net) {
            continue;
        }
        let pairs: Vec<CoordPair> = queue.iter().filter(|q| q.net == p.net).copied().collect();
        let r = route_net(&pairs, map);
        trees.extend(r.tree);
        failed.extend(r.failed);
    }
    (trees, failed)
}

/// Routes a sorted queue, ripping up and restarting with failed pairs moved
/// to the front until every pair routes, a queue order repeats, or
/// `max_ripup` restarts have been made.
///
/// The attempt with the fewest failures (then the least wire) is kept and
/// written into `map`; abandoned attempts leave no trace.
pub fn route_group(queue: &[CoordPair], map: &mut RouteMap, max_ripup: usize) -> GroupResult {
    let snapshot = map.clone();
    let mut history: HashSet<Vec<CoordPair>> = HashSet::new();
    let mut queue = queue.to_vec();
    let mut best: Option<(GroupResult, RouteMap)> = None;
    let mut iterations = 0;
    loop {
        iterations += 1;
        history.insert(queue.clone());
        let mut attempt = snapshot.clone();
        let (trees, failed) = route_queue(&queue, &mut attempt);
        let result = GroupResult { trees, failed, iterations };
        let better = match &best {
            None => true,
            Some((b, _)) => {
                (result.failed.len(), result.wire()) < (b.failed.len(), b.wire())
            }
        };
        let done = result.failed.is_empty();
        let failed_now = result.failed.clone();
        if better {
            best = Some((result, attempt));
        }
        if done || iterations > max_ripup {
            break;
        }
        let mut next: Vec<CoordPair> = failed_now.clone();
        next.extend(queue.iter().filter(|p| !failed_now.contains(p)).copied());
        if history.contains(&next) {
            break;
        }
        queue = next;
    }
    let (mut result, best_map) = best.expect("at least one attempt");
    result.iterations = iterations;
    *map = best_map;
    result
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoutedDesign {
    pub map: RouteMap,
    /// Routed tree of each net, indexed like `Design::nets`.
    pub trees: Vec<Option<NetTree>>,
    pub failed: Vec<CoordPair>,
    pub groups: usize,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlobalConfig {
    pub margin: i32,
    pub max_ripup: usize,
    pub threads: usize,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig { margin: crate::design::DEFAULT_MARGIN, max_ripup: 8, threads: 1 }
    }
}

/// Routes every net of the design.
///
/// The large-fanout group goes first on the shared map. The remaining groups
/// have disjoint regions and are routed concurrently on copies of the map;
/// their trees are then committed in group order, so the result does not
/// depend on the number of workers.
pub fn route_design(design: &Design, mut map: RouteMap, cfg: &GlobalConfig) -> RoutedDesign {
    let groups: Vec<RouteGroup> = cluster_nets(&design.coord_pairs(), cfg.margin);
    let mut trees: Vec<Option<NetTree>> = vec![None; design.nets.len()];
    let mut failed = Vec::new();
    let mut iterations = 0;

    let mut rest = groups.as_slice();
    if let Some(g) = groups.first().filter(|g| g.dedicated) {
        let r = route_group(&sort_route_queue(g), &mut map, cfg.max_ripup);
        iterations += r.iterations;
        failed.extend(r.failed);
        for t in r.trees {
            let n = t.net;
            trees[n] = Some(t);
        }
        rest = &groups[1..];
    }

    let base = map.clone();
    let run = |g: &RouteGroup| {
        let mut m = base.clone();
        route_group(&sort_route_queue(g), &mut m, cfg.max_ripup)
    };
    let results: Vec<GroupResult> = if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build().expect("thread pool");
        pool.install(|| rest.par_iter().map(run).collect())
    } else {
        rest.iter().map(run).collect()
    };
    for r in results {
        iterations += r.iterations;
        failed.extend(r.failed);
        for t in r.trees {
            commit_tree(&mut map, &t);
            let n = t.net;
            trees[n] = Some(t);
        }
    }
    mark_crosses(&mut trees);
    RoutedDesign { map, trees, failed, groups: groups.len(), iterations }
}

/// Nodes shared by two nets become JTL crosses in both trees.
pub fn mark_crosses(trees: &mut [Option<NetTree>]) {
    let mut users: BTreeMap<GridCoord, usize> = BTreeMap::new();
    for t in trees.iter().flatten() {
        for c in t.coord_set() {
            *users.entry(c).or_default() += 1;
        }
    }
    for t in trees.iter_mut().flatten() {
        for n in &mut t.nodes {
            if users[&n.coord] > 1 {
                n.kind = WidgetKind::Cross;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{NodeState, Occupant};
    use crate::techlib::LayerProfile;

    fn map(w: i32, h: i32) -> RouteMap {
        RouteMap::new(w, h, vec![LayerProfile::Nb03.layers().remove(0)])
    }

    fn pair(net: usize, s: (i32, i32), d: (i32, i32)) -> CoordPair {
        CoordPair {
            source: GridCoord::new(s.0, s.1, 0),
            dest: GridCoord::new(d.0, d.1, 0),
            net,
            sink_index: 0,
            fanout: 1,
            large: false,
        }
    }

    #[test]
    fn independent_pairs_route_first_time() {
        let mut m = map(12, 12);
        let r = route_group(&[pair(0, (1, 1), (8, 1)), pair(1, (1, 8), (8, 8))], &mut m, 8);
        assert_eq!(r.iterations, 1);
        assert!(r.failed.is_empty());
        assert_eq!(r.trees.len(), 2);
    }

    #[test]
    fn walled_sink_fails_once() {
        let mut m = map(10, 10);
        for c in [(6, 5), (8, 5), (7, 4), (7, 6)] {
            m.set(GridCoord::new(c.0, c.1, 0), NodeState::Blocked, Occupant::Fixed);
        }
        let snapshot = m.clone();
        let r = route_group(&[pair(0, (1, 5), (7, 5))], &mut m, 8);
        assert_eq!(r.failed.len(), 1);
        assert!(r.trees.is_empty());
        assert_eq!(m, snapshot);
    }

    #[test]
    fn map_equals_snapshot_plus_trees() {
        let mut m = map(16, 16);
        m.set(GridCoord::new(7, 7, 0), NodeState::Blocked, Occupant::Fixed);
        let snapshot = m.clone();
        let q = [pair(0, (1, 7), (14, 7)), pair(1, (7, 1), (7, 14)), pair(2, (2, 2), (12, 12))];
        let r = route_group(&q, &mut m, 8);
        let mut replay = snapshot;
        for t in &r.trees {
            commit_tree(&mut replay, t);
        }
        assert_eq!(m, replay);
    }

    /// Pair C can only reach its sink through a node the longer pair A
    /// passes straight through; A has a detour.
    fn fronting_instance() -> (RouteMap, Vec<CoordPair>) {
        let mut m = map(7, 5);
        for c in m.coords().collect::<Vec<_>>() {
            let free = c.y == 0 || c.y == 2 || c.y == 4 || (c.y == 1 && [0, 3, 6].contains(&c.x));
            if !free {
                m.set(c, NodeState::Blocked, Occupant::Fixed);
            }
        }
        let q = vec![pair(0, (0, 0), (6, 0)), pair(1, (0, 4), (6, 4)), pair(2, (3, 1), (3, 0))];
        (m, q)
    }

    #[test]
    fn fronting_failed_pair_succeeds() {
        let (m, q) = fronting_instance();
        // Oracle: try every queue order from scratch.
        let mut ok_orders = 0;
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let order: Vec<CoordPair> = perm.iter().map(|&i| q[i]).collect();
            let mut scratch = m.clone();
            let (_, failed) = route_queue(&order, &mut scratch);
            if failed.is_empty() {
                ok_orders += 1;
            }
            if perm == [0, 1, 2] {
                assert_eq!(failed.len(), 1);
            }
        }
        assert!(ok_orders > 0);
        let mut mm = m.clone();
        let r = route_group(&q, &mut mm, 8);
        assert!(r.failed.is_empty());
        assert_eq!(r.iterations, 2);
    }
}
