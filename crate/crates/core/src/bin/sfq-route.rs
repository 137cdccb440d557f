// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: routes one placed design and writes the widget
//! script, substitution log, slack report and routing report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sfq_route::flow::{emit_report, run_flow, FlowConfig, FlowOptions, ReportFormat};
use sfq_route::techlib::LayerProfile;

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Nb03,
    Nb04,
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Text,
    Machine,
}

#[derive(Parser)]
#[command(name = "sfq-route", version, about = "Hybrid JTL/PTL router for clocked SFQ circuits")]
struct Args {
    /// Technology file (TOML).
    #[arg(long)]
    tech: PathBuf,
    #[arg(long)]
    placement: PathBuf,
    #[arg(long)]
    netlist: PathBuf,
    /// Output directory for all artifacts.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    max_ripup: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = Mode::Nb04)]
    mode: Mode,
    /// Format of the report printed to stdout.
    #[arg(long, value_enum, default_value_t = Report::Text)]
    report: Report,
}

fn main() -> ExitCode {
    // Usage errors share exit code 1 with other configuration errors; 2 and 3
    // are routing outcomes.
    let a = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = FlowConfig {
        tech: a.tech,
        placement: a.placement,
        netlist: a.netlist,
        out: a.out,
        options: FlowOptions {
            seed: a.seed,
            max_ripup: a.max_ripup,
            threads: a.threads,
            mode: match a.mode {
                Mode::Nb03 => LayerProfile::Nb03,
                Mode::Nb04 => LayerProfile::Nb04,
            },
            ..FlowOptions::default()
        },
    };
    match run_flow(&cfg) {
        Ok(out) => {
            let fmt = match a.report {
                Report::Text => ReportFormat::Text,
                Report::Machine => ReportFormat::Machine,
            };
            print!("{}", emit_report(&out.report, fmt));
            ExitCode::from(out.report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("sfq-route: {e}");
            ExitCode::from(1)
        }
    }
}
