// SPDX-License-Identifier: Apache-2.0

//! Static timing of a globally routed bench: per-edge hold and setup slack,
//! input regimes and the achievable clock period.

use sfq_route::bench;
use sfq_route::design::build_route_map;
use sfq_route::global::{route_design, GlobalConfig};
use sfq_route::techlib::Technology;
use sfq_route::timing::{DelayTracker, TimingGraph};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "c17".into());
    let tech = Technology::desk_nb04();
    let spec = bench::by_name(&name).unwrap_or_else(|| panic!("unknown bench {name}"));
    let design = bench::generate(&spec).load(&tech).expect("bench loads");
    let r = route_design(&design, build_route_map(&design, &tech).expect("map"), &GlobalConfig::default());
    let tracker = DelayTracker::new(TimingGraph::new(&design, &tech), &design, &r.trees, &tech.delays);
    let rep = tracker.report();
    println!("{:<10}{:<10}{:>10}{:>10}", "driver", "receiver", "hold", "setup");
    for e in &rep.edges {
        let flag = if e.hold.is_negative() { "  violation" } else { "" };
        println!(
            "{:<10}{:<10}{:>10}{:>10}{flag}",
            design.instances[e.driver].name, design.instances[e.receiver].name, e.hold, e.setup
        );
    }
    for io in &rep.io {
        println!("input {} ps, clock {} ps: {:?}", io.t_input, io.t_clock, io.regime);
    }
    println!("hold violations {}, t_clk {} ps ({:.2} GHz)", rep.hold_violations, rep.t_clk, rep.frequency_ghz);
}
