// SPDX-License-Identifier: Apache-2.0

//! Global routing of every bundled bench: clustering, A* per pair,
//! multi-fanout trees and rip-up, followed by the map-encoding check.

use sfq_route::bench;
use sfq_route::design::build_route_map;
use sfq_route::global::{route_design, GlobalConfig};
use sfq_route::grid::NodeState;
use sfq_route::techlib::Technology;
use sfq_route::validate::validate_routing;

fn main() {
    let tech = Technology::desk_nb04();
    let threads = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    for spec in bench::all() {
        let design = bench::generate(&spec).load(&tech).expect("bench loads");
        let map = build_route_map(&design, &tech).expect("map");
        let blocked = map.clone();
        let cfg = GlobalConfig { threads, ..GlobalConfig::default() };
        let r = route_design(&design, map, &cfg);
        let bad = validate_routing(&blocked, &r.map, &r.trees);
        println!(
            "{:<8} nets {:>2} groups {:>2} rip-up rounds {:>2} failed {} single {:>4} saturated {:>2} validator {}",
            spec.name,
            design.nets.len(),
            r.groups,
            r.iterations,
            r.failed.len(),
            r.map.count(NodeState::Single),
            r.map.count(NodeState::Saturated),
            if bad.is_empty() { "clean".to_string() } else { format!("{} issues", bad.len()) },
        );
    }
}
