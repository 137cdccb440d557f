// SPDX-License-Identifier: Apache-2.0

//! Timing-driven widget substitution on every bench: hold fixing, path
//! shortening with microstrip and long JTLs, clock retiming and input
//! alignment.

use sfq_route::bench;
use sfq_route::design::build_route_map;
use sfq_route::detailed::{DetailedRouter, OptimizerConfig};
use sfq_route::global::{route_design, GlobalConfig};
use sfq_route::techlib::Technology;

fn main() {
    let tech = Technology::desk_nb04();
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    println!("{:<8}{:>12}{:>22}{:>8}", "bench", "hold", "t_clk (ps)", "subs");
    for spec in bench::all() {
        let design = bench::generate(&spec).load(&tech).expect("bench loads");
        let r = route_design(&design, build_route_map(&design, &tech).expect("map"), &GlobalConfig::default());
        let cfg = OptimizerConfig { rng_seed: seed, ..OptimizerConfig::default() };
        let mut router = DetailedRouter::new(&design, &tech, r.trees, r.map, cfg);
        let out = router.run();
        println!(
            "{:<8}{:>12}{:>22}{:>8}",
            spec.name,
            format!("{} -> {}", out.before.hold_violations, out.after.hold_violations),
            format!("{} -> {}", out.before.t_clk, out.after.t_clk),
            out.substitutions
        );
    }
}
