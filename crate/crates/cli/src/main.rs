use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use xyf_core::circuit::{build_circuit, emit_text, Basis, Init};
use xyf_core::experiment::{run_memory_experiment, run_surgery_experiment};
use xyf_core::lattice::{GeometryKind, SpacetimeLattice};
use xyf_core::syndrome::build_detector_graph;

mod config;
mod output;

use config::{PartialConfig, PartialGeometry, PartialNoise};

#[derive(Parser)]
#[command(name = "xyf", version, about = "Simulate and decode the XY Floquet code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Memory experiment on a torus or rectangle.
    Memory(RunArgs),
    /// Lattice surgery experiment.
    Surgery(RunArgs),
    /// Write the circuit or its detector graph.
    Export(ExportArgs),
    /// Run the oracle-equivalence checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Clone, Default)]
struct GeometryArgs {
    #[arg(long, value_parser = parse_kind)]
    geometry: Option<GeometryKind>,
    #[arg(long)]
    l1: Option<u32>,
    #[arg(long)]
    l2: Option<u32>,
    /// Code distance of the surgery geometry.
    #[arg(long)]
    l: Option<u32>,
    /// Periods of the run (surgery: total periods).
    #[arg(long)]
    rounds: Option<u32>,
    /// First surgery period.
    #[arg(long)]
    t0: Option<u32>,
    /// Last surgery period.
    #[arg(long)]
    t1: Option<u32>,
    /// JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long)]
    p_gate: Option<f64>,
    #[arg(long)]
    p_idle: Option<f64>,
    #[arg(long)]
    p_meas: Option<f64>,
    #[arg(long)]
    p_prep: Option<f64>,
    #[arg(long)]
    shots: Option<u64>,
    /// Root seed; required here or in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON metadata path; defaults to the CSV path with a .json extension.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Write wall_seconds as 0 so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportKind {
    CircuitText,
    DetectorGraphJson,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Z,
    X,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(value_enum)]
    what: ExportKind,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Preparation and readout basis.
    #[arg(long, value_enum, default_value = "z")]
    basis: BasisArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<GeometryKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

impl GeometryArgs {
    fn partial(&self) -> Result<PartialConfig> {
        let file = match &self.config {
            Some(p) => PartialConfig::load(p)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            geometry: PartialGeometry {
                kind: self.geometry,
                l1: self.l1,
                l2: self.l2,
                l: self.l,
                rounds: self.rounds,
                t0: self.t0,
                t1: self.t1,
            },
            ..Default::default()
        };
        Ok(file.overlay(flags))
    }
}

fn run(command: &str, a: &RunArgs) -> Result<()> {
    let flags = PartialConfig {
        noise: PartialNoise { p_gate: a.p_gate, p_idle: a.p_idle, p_meas: a.p_meas, p_prep: a.p_prep, idle_unused_bridge: None },
        shots: a.shots,
        seed: a.seed,
        workers: a.workers,
        ..Default::default()
    };
    let cfg = a.geometry.partial()?.overlay(flags).experiment()?;
    let mut stats = match command {
        "memory" => run_memory_experiment(&cfg)?,
        _ => run_surgery_experiment(&cfg)?,
    };
    if a.no_timing {
        stats.wall_seconds = 0.0;
    }
    output::emit(a.out.as_deref(), &output::csv_text(command, &cfg, &stats))?;
    if let Some(meta) = output::metadata_path(a.out.as_deref(), a.meta.as_deref()) {
        let mut text = serde_json::to_string_pretty(&output::metadata(command, &cfg, &stats))?;
        text.push('\n');
        output::emit(Some(&meta), &text)?;
    }
    Ok(())
}

fn export(a: &ExportArgs) -> Result<()> {
    let spec = a.geometry.partial()?.geometry()?;
    let (init, ro) = match a.basis {
        BasisArg::Z => (Init::Z, Basis::Z),
        BasisArg::X => (Init::X, Basis::X),
    };
    let c = build_circuit(&SpacetimeLattice::new(spec)?, Some(init), Some(ro))?;
    let text = match a.what {
        ExportKind::CircuitText => emit_text(&c),
        ExportKind::DetectorGraphJson => build_detector_graph(&c)?.to_json(&c),
    };
    output::emit(a.out.as_deref(), &text)
}

fn selftest(seed: u64) -> Result<()> {
    let checks = xyf_core::selftest::run_all(seed);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let res = match Cli::parse().command {
        Command::Memory(a) => run("memory", &a),
        Command::Surgery(a) => run("surgery", &a),
        Command::Export(a) => export(&a),
        Command::Selftest { seed } => selftest(seed),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
