// SPDX-License-Identifier: Apache-2.0

//! Compiles an optimized bench into layout widgets, prints the script and
//! checks it by tracing the script text back into per-sink delays.

use sfq_route::bench;
use sfq_route::flow::{run_design, FlowOptions};
use sfq_route::techlib::Technology;
use sfq_route::widgets::{parse_script, traced_sink_delays};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "chain2".into());
    let tech = Technology::desk_nb04();
    let spec = bench::by_name(&name).unwrap_or_else(|| panic!("unknown bench {name}"));
    let design = bench::generate(&spec).load(&tech).expect("bench loads");
    let out = run_design(&design, &tech, &FlowOptions::default()).expect("flow");
    print!("{}", out.script);
    let parsed = parse_script(&out.script).expect("script parses");
    let traced = traced_sink_delays(&design, &parsed.widgets, &tech.delays);
    for (net, delays) in traced.iter().enumerate() {
        let shown: Vec<String> = delays.iter().map(|d| d.map_or("-".into(), |t| t.to_string())).collect();
        println!("# {:<6} {}", design.nets[net].name, shown.join(" "));
    }
    println!("# {:?}", out.manifest.counts);
}
