// SPDX-License-Identifier: Apache-2.0

//! Writes a bundled bench as placement and netlist files, ready for the
//! command-line tool:
//!
//! ```text
//! cargo run --example export_bench -- c17 /tmp/c17
//! cargo run -- --tech crates/core/data/desk-nb04.toml \
//!     --placement /tmp/c17/c17.place --netlist /tmp/c17/c17.net --out /tmp/c17/out
//! ```

use std::path::PathBuf;

use sfq_route::bench;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "chain2".into());
    let dir = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let spec = bench::by_name(&name).unwrap_or_else(|| panic!("unknown bench {name}"));
    let b = bench::generate(&spec);
    std::fs::create_dir_all(&dir).expect("create output directory");
    std::fs::write(dir.join(format!("{name}.place")), &b.placement).expect("write placement");
    std::fs::write(dir.join(format!("{name}.net")), &b.netlist).expect("write netlist");
    println!("{}", serde_json::to_string_pretty(&b.manifest).expect("manifest"));
}
