// SPDX-License-Identifier: Apache-2.0

//! Independent checks of routed trees against the map encoding.

use std::collections::BTreeMap;

use crate::grid::{GridCoord, NodeState, RouteMap};
use crate::techlib::WidgetKind;
use crate::tree::NetTree;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotAdjacent { net: usize, a: GridCoord, b: GridCoord },
    ThroughBlockage { net: usize, at: GridCoord },
    OverCapacity { at: GridCoord, users: usize },
    BadSaturated { at: GridCoord },
    BentCross { net: usize, at: GridCoord },
    WrongState { at: GridCoord, expected: NodeState, found: NodeState },
    PtlNodeOnJtlLayer { net: usize, at: GridCoord },
}

fn adjacent(a: GridCoord, b: GridCoord) -> bool {
    (a.same_xy(b) && a.layer.abs_diff(b.layer) == 1) || (a.layer == b.layer && a.manhattan(b) == 1)
}

/// Microstrip ends connect to the line through a stacked via, so a driver or
/// receiver may sit beside its first line node on any layer.
fn ptl_adjacent(a: (GridCoord, WidgetKind), b: (GridCoord, WidgetKind)) -> bool {
    let ends = |k: WidgetKind| matches!(k, WidgetKind::Driver | WidgetKind::Receiver);
    let pair = (ends(a.1) && b.1 == WidgetKind::Msl) || (a.1 == WidgetKind::Msl && ends(b.1));
    pair && i64::from(a.0.x.abs_diff(b.0.x) + a.0.y.abs_diff(b.0.y)) <= 1 && a.0 != b.0
}

/// Checks adjacency, blockages, capacity and the meaning of every state-2
/// node. `blocked` is the map before routing; `map` the map after.
pub fn validate_routing(blocked: &RouteMap, map: &RouteMap, trees: &[Option<NetTree>]) -> Vec<Violation> {
    let mut out = Vec::new();
    // node -> (net, straight, splitter)
    let mut uses: BTreeMap<GridCoord, Vec<(usize, bool, bool)>> = BTreeMap::new();
    for t in trees.iter().flatten() {
        for (i, n) in t.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                let pn = &t.nodes[p];
                if !adjacent(pn.coord, n.coord) && !ptl_adjacent((pn.coord, pn.kind), (n.coord, n.kind)) {
                    out.push(Violation::NotAdjacent { net: t.net, a: t.nodes[p].coord, b: n.coord });
                }
            }
            if blocked.state(n.coord) == NodeState::Blocked {
                out.push(Violation::ThroughBlockage { net: t.net, at: n.coord });
            }
            if n.kind == WidgetKind::Msl && map.is_jtl_layer(n.coord.layer) && !map.layer(n.coord.layer).ptl_enabled {
                out.push(Violation::PtlNodeOnJtlLayer { net: t.net, at: n.coord });
            }
            uses.entry(n.coord).or_default().push((t.net, t.is_straight(i), t.is_splitter(i)));
        }
    }
    for (&c, u) in &uses {
        let expected = if u.len() > 2 {
            out.push(Violation::OverCapacity { at: c, users: u.len() });
            continue;
        } else if u.len() == 2 {
            if map.is_ptl_only_layer(c.layer) {
                out.push(Violation::OverCapacity { at: c, users: 2 });
            }
            for &(net, straight, _) in u {
                if !straight {
                    out.push(Violation::BentCross { net, at: c });
                }
            }
            if u[0].0 == u[1].0 {
                out.push(Violation::BadSaturated { at: c });
            }
            NodeState::Saturated
        } else if u[0].2 {
            NodeState::Saturated
        } else {
            NodeState::Single
        };
        if map.state(c) != expected {
            out.push(Violation::WrongState { at: c, expected, found: map.state(c) });
        }
    }
    for c in map.coords() {
        let s = map.state(c);
        if s == NodeState::Blocked {
            if blocked.state(c) != NodeState::Blocked {
                out.push(Violation::WrongState { at: c, expected: blocked.state(c), found: s });
            }
        } else if s != NodeState::Empty && !uses.contains_key(&c) {
            out.push(Violation::WrongState { at: c, expected: NodeState::Empty, found: s });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::CoordPair;
    use crate::global::{commit_tree, route_net};
    use crate::grid::Occupant;
    use crate::techlib::LayerProfile;

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
    fn crossing_routes_validate() {
        let base = RouteMap::new(10, 10, LayerProfile::Nb03.layers());
        let mut m = base.clone();
        let a = route_net(&[pair(0, (5, 1), (5, 8))], &mut m).tree;
        let b = route_net(&[pair(1, (1, 4), (8, 4))], &mut m).tree;
        assert!(validate_routing(&base, &m, &[a, b]).is_empty());
    }

    #[test]
    fn leaked_state_is_reported() {
        let base = RouteMap::new(6, 6, LayerProfile::Nb03.layers());
        let mut m = base.clone();
        let a = route_net(&[pair(0, (0, 1), (4, 1))], &mut m).tree;
        m.set(GridCoord::new(3, 3, 0), NodeState::Single, Occupant::Fixed);
        let v = validate_routing(&base, &m, std::slice::from_ref(&a));
        assert_eq!(v.len(), 1);
        let mut m2 = base.clone();
        commit_tree(&mut m2, a.as_ref().unwrap());
        assert!(validate_routing(&base, &m2, &[a]).is_empty());
    }
}
