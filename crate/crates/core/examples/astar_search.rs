// SPDX-License-Identifier: Apache-2.0

//! Searches one source/sink pair around an obstacle and draws the result.
//! Among shortest paths the search prefers fewer corners, then the lowest
//! layers.

use sfq_route::design::Rect;
use sfq_route::global::{astar_route, search_bound};
use sfq_route::global::astar::corner_count;
use sfq_route::grid::{GridCoord, NodeState, Occupant, RouteMap};
use sfq_route::techlib::LayerProfile;

fn main() {
    let mut map = RouteMap::new(16, 9, LayerProfile::Nb03.layers());
    for y in 1..8 {
        for l in 0..2 {
            map.set(GridCoord::new(7, y, l), NodeState::Blocked, Occupant::Fixed);
        }
    }
    let (src, dst) = (GridCoord::new(1, 4, 0), GridCoord::new(14, 4, 0));
    let bound: Rect = search_bound(src, dst, &map).expand(8).clip(map.width, map.height);
    let path = astar_route(src, dst, &map, bound, false).expect("routable");
    println!("{} nodes, {} corners", path.len(), corner_count(&path));
    for y in (0..map.height).rev() {
        let row: String = (0..map.width)
            .map(|x| {
                let on = path.iter().filter(|c| c.x == x && c.y == y).map(|c| c.layer).max();
                match (on, map.state(GridCoord::new(x, y, 0))) {
                    (Some(l), _) => char::from(b'0' + l),
                    (None, NodeState::Blocked) => '#',
                    _ => '.',
                }
            })
            .collect();
        println!("{row}");
    }
}
