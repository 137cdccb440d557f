// SPDX-License-Identifier: Apache-2.0

//! End-to-end flow: load, global route, detailed route, widget generation
//! and reporting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::design::{build_route_map, load_design, Design, Rect};
use crate::detailed::{format_log, DetailedOutcome, DetailedRouter, OptimizerConfig};
use crate::global::{route_design, GlobalConfig};
use crate::grid::GridCoord;
use crate::techlib::{load_technology, LayerProfile, Technology};
use crate::time::Time;
use crate::timing::{DelayTracker, SlackReport, TimingGraph};
use crate::tree::NetTree;
use crate::validate::{validate_routing, Violation};
use crate::widgets::{self, ScriptFormat, WidgetInstance, WidgetManifest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Text,
    Machine,
}

/// Options shared by file-based and in-memory runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlowOptions {
    pub seed: u64,
    pub max_ripup: usize,
    pub threads: usize,
    pub mode: LayerProfile,
    pub enable_io_opt: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { seed: 0, max_ripup: 8, threads: 1, mode: LayerProfile::Nb04, enable_io_opt: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowConfig {
    pub tech: PathBuf,
    pub placement: PathBuf,
    pub netlist: PathBuf,
    pub out: PathBuf,
    pub options: FlowOptions,
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {msg}")]
    Stage { stage: &'static str, msg: String },
}

fn stage(stage: &'static str) -> impl Fn(String) -> FlowError {
    move |msg| FlowError::Stage { stage, msg }
}

/// How the run ended, with the process exit code of each case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Ok,
    RoutedWithFailures,
    InfeasibleTiming,
}

impl FlowStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            FlowStatus::Ok => 0,
            FlowStatus::RoutedWithFailures => 2,
            FlowStatus::InfeasibleTiming => 3,
        }
    }
}

/// Headline metrics of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoutingReport {
    pub design: String,
    pub tech: String,
    pub mode: String,
    pub junctions_pre: u32,
    pub junctions_post: u32,
    pub nets: usize,
    /// Bounding box of gates and routed nodes.
    pub area_mm2: f64,
    pub wirelength_um: f64,
    pub jtl_units: usize,
    pub ptl_units: usize,
    pub hold_violations_pre: usize,
    pub hold_violations_post: usize,
    /// Hold violations recounted from the emitted script alone.
    pub hold_violations_script: usize,
    /// Worst hold slack after routing.
    pub worst_slack_ps: f64,
    pub t_clk_pre_ps: f64,
    pub t_clk_post_ps: f64,
    pub frequency_pre_ghz: f64,
    pub frequency_post_ghz: f64,
    pub failed_pairs: usize,
    pub rip_up_iterations: usize,
    pub io_violations: usize,
    pub validator_violations: usize,
    pub substitutions: usize,
    pub status: FlowStatus,
    pub runtime_s: f64,
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct FlowOutput {
    pub report: RoutingReport,
    pub script: String,
    pub substitution_log: String,
    pub slack: SlackReport,
    pub manifest: WidgetManifest,
    pub widgets: Vec<WidgetInstance>,
    pub trees: Vec<Option<NetTree>>,
    pub violations: Vec<Violation>,
    pub outcome: DetailedOutcome,
}

fn routed_area(design: &Design, trees: &[Option<NetTree>]) -> Option<Rect> {
    let mut pts: Vec<GridCoord> = trees.iter().flatten().flat_map(|t| t.nodes.iter().map(|n| n.coord)).collect();
    for inst in &design.instances {
        let f = inst.footprint();
        pts.push(GridCoord::new(f.x0, f.y0, 0));
        pts.push(GridCoord::new(f.x1, f.y1, 0));
    }
    let first = *pts.first()?;
    Some(pts.iter().fold(Rect::spanning(first, first), |r, &p| r.union(Rect::spanning(p, p))))
}

/// Hold violations found by tracing the script text and rerunning timing
/// on the traced wire delays.
pub fn script_recount(design: &Design, tech: &Technology, script: &str) -> Result<SlackReport, widgets::WidgetError> {
    let parsed = widgets::parse_script(script)?;
    let wire = widgets::traced_sink_delays(design, &parsed.widgets, &tech.delays);
    Ok(DelayTracker::from_wires(TimingGraph::new(design, tech), design, wire, &tech.delays).report())
}

/// Runs the whole flow on a loaded design.
pub fn run_design(design: &Design, tech: &Technology, opts: &FlowOptions) -> Result<FlowOutput, FlowError> {
    let tech = tech.clone().with_layer_profile(opts.mode);
    let start = Instant::now();
    let map = build_route_map(design, &tech).map_err(|e| stage("prepare")(e.to_string()))?;
    let blocked = map.clone();
    let gcfg = GlobalConfig { max_ripup: opts.max_ripup, threads: opts.threads.max(1), ..GlobalConfig::default() };
    let routed = route_design(design, map, &gcfg);
    let ocfg = OptimizerConfig {
        rng_seed: opts.seed,
        allow_ptl_on_jtl_layers: opts.mode == LayerProfile::Nb03,
        enable_io_opt: opts.enable_io_opt,
        ..OptimizerConfig::default()
    };
    let mut router = DetailedRouter::new(design, &tech, routed.trees, routed.map, ocfg);
    let outcome = router.run();
    let runtime = start.elapsed().as_secs_f64();

    let widgets = widgets::compile_widgets(&router.trees).map_err(|e| stage("widgets")(e.to_string()))?;
    let script = widgets::emit_script(&design.name, &tech.name, &widgets, ScriptFormat::Text);
    let manifest = widgets::manifest(&design.name, &tech.name, &widgets, &router.trees);
    let recount = script_recount(design, &tech, &script).map_err(|e| stage("report")(e.to_string()))?;
    let violations = validate_routing(&blocked, &router.map, &router.trees);

    let gate_junctions: u32 = design.instances.iter().map(|i| i.model.junctions).sum();
    let nodes = || router.trees.iter().flatten().flat_map(|t| t.nodes.iter());
    let steps: u64 = router.trees.iter().flatten().map(NetTree::wire_steps).sum();
    let pitch_um = tech.pitch_mm * 1000.0;
    let timed = !router.tracker.graph.edges.is_empty();
    let freq = |r: &SlackReport| if timed { r.frequency_ghz } else { 0.0 };
    let period = |r: &SlackReport| if timed { r.t_clk.ps() } else { 0.0 };
    let failed = routed.failed.len();
    let status = if failed > 0 {
        FlowStatus::RoutedWithFailures
    } else if outcome.after.hold_violations > 0 {
        FlowStatus::InfeasibleTiming
    } else {
        FlowStatus::Ok
    };
    let report = RoutingReport {
        design: design.name.clone(),
        tech: tech.name.clone(),
        mode: opts.mode.to_string(),
        junctions_pre: gate_junctions,
        junctions_post: gate_junctions + manifest.total_junctions,
        nets: design.nets.len(),
        area_mm2: routed_area(design, &router.trees)
            .map_or(0.0, |r| ((r.x1 - r.x0 + 1) as f64) * ((r.y1 - r.y0 + 1) as f64) * tech.pitch_mm * tech.pitch_mm),
        wirelength_um: steps as f64 * pitch_um,
        jtl_units: nodes().filter(|n| n.kind.is_jtl_family()).count(),
        ptl_units: nodes().filter(|n| n.kind.is_ptl()).count(),
        hold_violations_pre: outcome.before.hold_violations,
        hold_violations_post: outcome.after.hold_violations,
        hold_violations_script: recount.hold_violations,
        worst_slack_ps: outcome.after.worst_hold.unwrap_or(Time::ZERO).ps(),
        t_clk_pre_ps: period(&outcome.before),
        t_clk_post_ps: period(&outcome.after),
        frequency_pre_ghz: freq(&outcome.before),
        frequency_post_ghz: freq(&outcome.after),
        failed_pairs: failed,
        rip_up_iterations: routed.iterations,
        io_violations: outcome.after.io_violations,
        validator_violations: violations.len(),
        substitutions: router.log.len(),
        status,
        runtime_s: runtime,
    };
    Ok(FlowOutput {
        report,
        script,
        substitution_log: format_log(&router.log),
        slack: outcome.after.clone(),
        manifest,
        widgets,
        trees: router.trees,
        violations,
        outcome,
    })
}

fn read(path: &Path) -> Result<String, FlowError> {
    std::fs::read_to_string(path).map_err(|e| FlowError::Config(format!("{}: {e}", path.display())))
}

/// Loads the input files, runs the flow and writes every artifact into the
/// output directory.
pub fn run_flow(cfg: &FlowConfig) -> Result<FlowOutput, FlowError> {
    let tech_src = read(&cfg.tech)?;
    let placement = read(&cfg.placement)?;
    let netlist = read(&cfg.netlist)?;
    let tech = load_technology(&tech_src).map_err(|e| stage("techlib")(e.to_string()))?;
    let name = cfg.placement.file_stem().and_then(|s| s.to_str()).unwrap_or("design");
    let design = load_design(name, &placement, &netlist, &tech).map_err(|e| stage("design")(e.to_string()))?;
    let out = run_design(&design, &tech, &cfg.options)?;
    write_artifacts(&cfg.out, &out)?;
    Ok(out)
}

pub const SCRIPT_FILE: &str = "widgets.script";
pub const MANIFEST_FILE: &str = "widgets.json";
pub const LOG_FILE: &str = "substitutions.log";
pub const SLACK_FILE: &str = "slack.json";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";

pub fn write_artifacts(dir: &Path, out: &FlowOutput) -> Result<(), FlowError> {
    let io = |e: std::io::Error| stage("output")(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for (file, body) in [
        (SCRIPT_FILE, out.script.clone()),
        (MANIFEST_FILE, pretty(&out.manifest)),
        (LOG_FILE, out.substitution_log.clone()),
        (SLACK_FILE, pretty(&out.slack)),
        (REPORT_FILE, emit_report(&out.report, ReportFormat::Machine)),
        (REPORT_TEXT_FILE, emit_report(&out.report, ReportFormat::Text)),
    ] {
        std::fs::write(dir.join(file), body).map_err(io)?;
    }
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Renders the report as a table or as JSON.
pub fn emit_report(r: &RoutingReport, format: ReportFormat) -> String {
    if format == ReportFormat::Machine {
        return serde_json::to_string_pretty(r).expect("serializable") + "\n";
    }
    let mut s = String::new();
    let mut row = |k: &str, v: String| writeln!(s, "{k:<26}{v}").expect("string write");
    row("design", format!("{} ({} on {})", r.design, r.tech, r.mode));
    row("junctions pre/post", format!("{}/{}", r.junctions_pre, r.junctions_post));
    row("nets", r.nets.to_string());
    row("area (mm2, routed bbox)", format!("{:.4}", r.area_mm2));
    row("wire length (um)", format!("{:.1}", r.wirelength_um));
    row("JTL/PTL units", format!("{}/{}", r.jtl_units, r.ptl_units));
    row("hold violations pre/post", format!("{}/{}", r.hold_violations_pre, r.hold_violations_post));
    row("worst slack (ps)", format!("{:.3}", r.worst_slack_ps));
    row("t_clk pre/post (ps)", format!("{:.3}/{:.3}", r.t_clk_pre_ps, r.t_clk_post_ps));
    row("frequency pre/post (GHz)", format!("{:.2}/{:.2}", r.frequency_pre_ghz, r.frequency_post_ghz));
    row("failed pairs", r.failed_pairs.to_string());
    row("input regime violations", r.io_violations.to_string());
    row("status", format!("{:?}", r.status));
    row("run time (s)", format!("{:.3}", r.runtime_s));
    s
}
