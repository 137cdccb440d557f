// SPDX-License-Identifier: Apache-2.0

//! Runs the complete flow on every bench in both layer modes and prints a
//! results table. With a directory argument, the artifacts of each run are
//! written below it.

use std::path::PathBuf;

use sfq_route::bench;
use sfq_route::flow::{run_design, write_artifacts, FlowOptions};
use sfq_route::techlib::{LayerProfile, Technology};

fn main() {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    let tech = Technology::desk_nb04();
    println!(
        "{:<8}{:>6}{:>12}{:>8}{:>10}{:>10}{:>16}{:>10}",
        "bench", "mode", "junctions", "nets", "area mm2", "wire um", "freq GHz", "hold"
    );
    for mode in [LayerProfile::Nb04, LayerProfile::Nb03] {
        for spec in bench::all() {
            let design = bench::generate(&spec).load(&tech).expect("bench loads");
            let opts = FlowOptions { mode, ..FlowOptions::default() };
            let out = run_design(&design, &tech, &opts).expect("flow");
            let r = &out.report;
            println!(
                "{:<8}{:>6}{:>12}{:>8}{:>10.4}{:>10.0}{:>16}{:>10}",
                r.design,
                r.mode,
                format!("{}/{}", r.junctions_pre, r.junctions_post),
                r.nets,
                r.area_mm2,
                r.wirelength_um,
                format!("{:.2}/{:.2}", r.frequency_pre_ghz, r.frequency_post_ghz),
                format!("{}/{}", r.hold_violations_pre, r.hold_violations_post),
            );
            if let Some(dir) = &out_dir {
                write_artifacts(&dir.join(format!("{}-{}", r.design, r.mode)), &out).expect("write");
            }
        }
    }
}
