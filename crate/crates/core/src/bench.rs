// SPDX-License-Identifier: Apache-2.0

//! Bundled desk-scale benchmarks.
//!
//! Every bench is a levelized pipeline: the gates of logic level `k` sit in
//! column `k`, staggered diagonally so each clock branch can rise straight
//! from the clock row at the bottom. The clock enters at the left and is
//! passed from level to level through clock taps on that row, so it flows
//! with the data. Data edges only join consecutive levels.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::design::{load_design, Design, DesignError};
use crate::techlib::Technology;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Src {
    Pin(usize),
    Gate(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSpec {
    pub name: &'static str,
    pub model: &'static str,
    pub fanin: Vec<Src>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub name: &'static str,
    pub levels: Vec<Vec<GateSpec>>,
    /// Input pin arrival times in picoseconds.
    pub inputs: Vec<f64>,
    /// Gates driving an output pin.
    pub outputs: Vec<&'static str>,
    /// Horizontal distance between levels.
    pub pitch: i32,
}

/// Counts a generated bench is expected to load with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchManifest {
    pub name: String,
    pub instances: usize,
    pub logic_gates: usize,
    pub clock_nets: usize,
    pub signal_nets: usize,
    pub io_nets: usize,
    pub data_edges: usize,
    pub footprint_area: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bench {
    pub name: String,
    pub placement: String,
    pub netlist: String,
    pub manifest: BenchManifest,
}

impl Bench {
    pub fn load(&self, tech: &Technology) -> Result<Design, DesignError> {
        load_design(&self.name, &self.placement, &self.netlist, tech)
    }
}

fn gate(name: &'static str, model: &'static str, fanin: Vec<Src>) -> GateSpec {
    GateSpec { name, model, fanin }
}

const STAGGER_X: i32 = 3;
const STAGGER_Y: i32 = 4;
const FIRST_ROW: i32 = 3;
const CLOCK_ROW: i32 = 1;

fn footprint(model: &str) -> (i32, i32) {
    match model {
        "DFF" => (2, 1),
        "AND" | "OR" | "NOT" => (2, 2),
        _ => (1, 1),
    }
}

pub fn generate(spec: &BenchSpec) -> Bench {
    let mut place = String::from("placement 1\n");
    let mut inst_lines = String::new();
    let mut nets = String::from("netlist 1\n");
    let mut area = 0i64;
    let mut instances = 0;
    let levels = spec.levels.len() as i32;
    let x_first = 8;
    let base = |k: i32| x_first + k * spec.pitch;
    let max_rows = spec.levels.iter().map(Vec::len).max().unwrap_or(0).max(spec.inputs.len()).max(spec.outputs.len());

    let mut add = |line: String, model: &str| {
        let (w, h) = footprint(model);
        area += i64::from(w * h);
        instances += 1;
        inst_lines.push_str(&line);
    };

    add(format!("inst clkin CLKIN 1 {CLOCK_ROW} R0\n"), "CLKIN");
    for k in 1..levels {
        add(format!("inst tap{k} CLKTAP {} {CLOCK_ROW} R0\n", base(k) - 3), "CLKTAP");
    }
    for (i, _) in spec.inputs.iter().enumerate() {
        add(format!("inst in{i} PIN_IN 2 {} R0\n", FIRST_ROW + STAGGER_Y * i as i32), "PIN_IN");
    }
    let mut pos = std::collections::HashMap::new();
    for (k, level) in spec.levels.iter().enumerate() {
        for (j, g) in level.iter().enumerate() {
            let x = base(k as i32) + STAGGER_X * j as i32;
            let y = FIRST_ROW + STAGGER_Y * j as i32;
            pos.insert(g.name, (k, x, y));
            add(format!("inst {} {} {x} {y} R0\n", g.name, g.model), g.model);
        }
    }
    let x_out = base(levels - 1) + spec.pitch;
    for (i, _) in spec.outputs.iter().enumerate() {
        add(format!("inst out{i} PIN_OUT {x_out} {} R0\n", FIRST_ROW + STAGGER_Y * i as i32), "PIN_OUT");
    }
    let width = x_out + 3;
    let height = FIRST_ROW + STAGGER_Y * max_rows as i32 + 2;
    writeln!(place, "grid {width} {height}").unwrap();
    place.push_str(&inst_lines);

    // Clock tree, one net per level.
    let mut clock_nets = 0;
    for (k, level) in spec.levels.iter().enumerate() {
        let src = if k == 0 { "clkin.q".to_string() } else { format!("tap{k}.q") };
        let mut sinks: Vec<String> = level.iter().map(|g| format!("{}.clk", g.name)).collect();
        if k + 1 < spec.levels.len() {
            sinks.push(format!("tap{}.a", k + 1));
        }
        writeln!(nets, "net clk{k} clock level={k} {src} -> {}", sinks.join(" ")).unwrap();
        clock_nets += 1;
    }

    // Data: collect sinks per driver.
    let ports = ["a", "b"];
    let mut driven: Vec<(String, Vec<String>, bool)> = Vec::new();
    let mut push = |drv: String, sink: String, io: bool| {
        if let Some(e) = driven.iter_mut().find(|d| d.0 == drv) {
            e.1.push(sink);
        } else {
            driven.push((drv, vec![sink], io));
        }
    };
    let mut data_edges = 0;
    for level in &spec.levels {
        for g in level {
            for (pi, s) in g.fanin.iter().enumerate() {
                let sink = format!("{}.{}", g.name, ports[pi]);
                match s {
                    Src::Pin(i) => push(format!("in{i}.q"), sink, true),
                    Src::Gate(n) => {
                        data_edges += 1;
                        push(format!("{n}.q"), sink, false)
                    }
                }
            }
        }
    }
    for (i, g) in spec.outputs.iter().enumerate() {
        push(format!("{g}.q"), format!("out{i}.a"), false);
    }
    let (mut signal_nets, mut io_nets) = (0, 0);
    for (n, (drv, sinks, io)) in driven.iter().enumerate() {
        let kind = if *io {
            io_nets += 1;
            "io"
        } else {
            signal_nets += 1;
            "signal"
        };
        writeln!(nets, "net d{n} {kind} {drv} -> {}", sinks.join(" ")).unwrap();
    }
    for (i, t) in spec.inputs.iter().enumerate() {
        writeln!(nets, "arrival in{i} {t:.3}").unwrap();
    }

    Bench {
        name: spec.name.to_string(),
        placement: place,
        netlist: nets,
        manifest: BenchManifest {
            name: spec.name.to_string(),
            instances,
            logic_gates: spec.levels.iter().map(Vec::len).sum(),
            clock_nets,
            signal_nets,
            io_nets,
            data_edges,
            footprint_area: area,
        },
    }
}

/// Two flip-flops in series.
pub fn chain2() -> BenchSpec {
    BenchSpec {
        name: "chain2",
        levels: vec![vec![gate("d0", "DFF", vec![Src::Pin(0)])], vec![gate("d1", "DFF", vec![Src::Gate("d0")])]],
        inputs: vec![0.0],
        outputs: vec!["d1"],
        pitch: 10,
    }
}

/// Eight flip-flops in series.
pub fn chain8() -> BenchSpec {
    const NAMES: [&str; 8] = ["d0", "d1", "d2", "d3", "d4", "d5", "d6", "d7"];
    let mut levels = vec![vec![gate(NAMES[0], "DFF", vec![Src::Pin(0)])]];
    for k in 1..8 {
        levels.push(vec![gate(NAMES[k], "DFF", vec![Src::Gate(NAMES[k - 1])])]);
    }
    BenchSpec { name: "chain8", levels, inputs: vec![0.0], outputs: vec!["d7"], pitch: 10 }
}

/// Six gates in three levels with reconvergent fanout.
pub fn c17_like() -> BenchSpec {
    use Src::*;
    BenchSpec {
        name: "c17",
        levels: vec![
            vec![gate("g11", "OR", vec![Pin(2), Pin(3)]), gate("g10", "AND", vec![Pin(0), Pin(1)])],
            vec![gate("g19", "DFF", vec![Gate("g11")]), gate("g16", "AND", vec![Gate("g10"), Gate("g11")])],
            vec![gate("g23", "NOT", vec![Gate("g16")]), gate("g22", "OR", vec![Gate("g16"), Gate("g19")])],
        ],
        inputs: vec![0.0, 0.0, 0.0, 0.0],
        outputs: vec!["g22", "g23"],
        pitch: 14,
    }
}

/// Ripple-style 4-bit adder skeleton: per bit an AND/OR pair feeding the
/// next bit's carry logic.
pub fn adder4() -> BenchSpec {
    use Src::*;
    BenchSpec {
        name: "adder4",
        levels: vec![
            vec![gate("p0", "OR", vec![Pin(0), Pin(1)]), gate("g0", "AND", vec![Pin(2), Pin(3)])],
            vec![gate("c1", "OR", vec![Gate("p0"), Gate("g0")]), gate("s0", "DFF", vec![Gate("p0")])],
            vec![gate("c2", "AND", vec![Gate("c1"), Gate("s0")]), gate("s1", "NOT", vec![Gate("c1")])],
            vec![gate("c3", "OR", vec![Gate("c2"), Gate("s1")]), gate("s2", "DFF", vec![Gate("c2")])],
            vec![gate("c4", "DFF", vec![Gate("c3")]), gate("s3", "NOT", vec![Gate("s2")])],
        ],
        inputs: vec![0.0, 0.0, 0.0, 0.0],
        outputs: vec!["c4", "s3"],
        pitch: 14,
    }
}

/// Three parallel shift registers, four stages deep.
pub fn srarray() -> BenchSpec {
    const N: [[&str; 4]; 3] = [["r0s0", "r0s1", "r0s2", "r0s3"], ["r1s0", "r1s1", "r1s2", "r1s3"], ["r2s0", "r2s1", "r2s2", "r2s3"]];
    let mut levels = Vec::new();
    for k in 0..4 {
        levels.push(
            (0..3)
                .map(|r| gate(N[r][k], "DFF", vec![if k == 0 { Src::Pin(r) } else { Src::Gate(N[r][k - 1]) }]))
                .collect(),
        );
    }
    BenchSpec { name: "srarray", levels, inputs: vec![0.0; 3], outputs: vec!["r0s3", "r1s3", "r2s3"], pitch: 16 }
}

/// Every bundled bench, in report order.
pub fn all() -> Vec<BenchSpec> {
    vec![chain2(), chain8(), c17_like(), adder4(), srarray()]
}

pub fn by_name(name: &str) -> Option<BenchSpec> {
    all().into_iter().find(|b| b.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{build_route_map, NetKind};
    use crate::grid::NodeState;

    #[test]
    fn benches_match_manifests() {
        let tech = Technology::desk_nb04();
        for spec in all() {
            let b = generate(&spec);
            let d = b.load(&tech).unwrap_or_else(|e| panic!("{}: {e}", spec.name));
            let m = &b.manifest;
            assert_eq!(d.instances.len(), m.instances, "{}", spec.name);
            assert_eq!(d.nets.iter().filter(|n| n.kind == NetKind::ClockTree).count(), m.clock_nets);
            assert_eq!(d.nets.iter().filter(|n| n.kind == NetKind::Signal).count(), m.signal_nets);
            assert_eq!(d.nets.iter().filter(|n| n.kind == NetKind::Io).count(), m.io_nets);
            assert_eq!(d.footprint_area(), m.footprint_area);
            let map = build_route_map(&d, &tech).unwrap();
            // Two JTL layers are blocked under each footprint.
            assert_eq!(map.count(NodeState::Blocked) as i64, 2 * m.footprint_area);
        }
    }

    #[test]
    fn c17_has_six_gates() {
        let b = generate(&c17_like());
        assert_eq!(b.manifest.logic_gates, 6);
        assert_eq!(b.manifest.data_edges, 6);
    }
}
