// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fslnet::report::{emit_csv, reference_tables, sweep, SweepRow, SweepSpec};
use fslnet::topology::{self, TopologyKind};
use fslnet::workload::{
    build_matmul_program, matmul_reference, seeded_operands, verify_result, VALUE_RANGE,
};
use fslnet::{route, CoreId, SimConfig};

#[derive(Parser)]
#[command(
    name = "fslnet",
    version,
    about = "Simulate message passing between soft cores over ring, star and hypercube links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one matrix product and report timing.
    Simulate(SimulateArgs),
    /// Run the matrix product over several sizes and topologies, printing CSV.
    Sweep(SweepArgs),
    /// Print the route between two cores.
    Route(RouteArgs),
    /// Print the reference power and utilization tables.
    Tables,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat key=value file; `#` starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set interrupt_overhead_cycles=200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed for the generated operands.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ConfigArgs {
    fn load(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                SimConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => SimConfig::default(),
        };
        for o in &self.overrides {
            let Some((key, value)) = o.split_once('=') else {
                bail!("--set expects KEY=VALUE, got {o:?}");
            };
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    topology: TopologyKind,
    /// Number of cores; a power of two for the hypercube.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Square matrix dimension.
    #[arg(long)]
    size: usize,
    #[command(flatten)]
    config: ConfigArgs,
    /// Also write the result row as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write every processed event, one per line.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [4, 8, 16, 32, 64])]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "ring,star,cube")]
    topologies: Vec<TopologyKind>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[command(flatten)]
    config: ConfigArgs,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RouteArgs {
    #[arg(long)]
    topology: TopologyKind,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long)]
    src: u32,
    #[arg(long)]
    dst: u32,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn simulate(args: &SimulateArgs) -> Result<String> {
    let cfg = args.config.load()?;
    let t = topology::build(args.topology, args.n)?;
    let (a, b) = seeded_operands(args.size, args.config.seed);
    let reference = matmul_reference(&a, &b)?;
    let program = build_matmul_program(&a, &b, &t, &cfg)?;
    let workers = program.active_workers();
    let (run, trace) = if args.trace.is_some() {
        let (run, trace) = program.run_traced(&cfg, &t)?;
        (run, Some(trace))
    } else {
        (program.run(&cfg, &t)?, None)
    };
    let check = verify_result(
        &run.result,
        &reference,
        cfg.codec_mode,
        args.size,
        VALUE_RANGE,
    );
    if !check.pass {
        bail!(
            "result differs from the sequential product: error {} over bound {}",
            check.max_abs_err,
            check.bound
        );
    }
    let m = &run.metrics;
    if let Some(path) = &args.csv {
        let row = SweepRow::from_metrics(args.size, t.kind(), m, check.max_abs_err);
        write_file(path, &emit_csv(&[row]))?;
    }
    if let (Some(path), Some(trace)) = (&args.trace, trace) {
        let mut text = String::from("# time seq kind subject detail\n");
        for r in &trace {
            text.push_str(&r.to_string());
            text.push('\n');
        }
        write_file(path, &text)?;
    }
    let hist: Vec<String> = m
        .hop_histogram
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(h, c)| format!("{h}:{c}"))
        .collect();
    Ok(format!(
        "topology       {} ({} cores, {} active workers)\n\
         size           {}x{}\n\
         codec          {}\n\
         total_cycles   {}\n\
         total_seconds  {}\n\
         compute_cycles {}\n\
         comm_cycles    {}\n\
         messages       {} sent, {} delivered\n\
         hops           {}\n\
         max_abs_err    {}\n",
        t.kind(),
        t.n(),
        workers,
        args.size,
        args.size,
        cfg.codec_mode,
        m.total_cycles,
        m.total_seconds(),
        m.compute_cycles(),
        m.comm_cycles(),
        m.messages_sent,
        m.messages_delivered,
        hist.join(" "),
        check.max_abs_err,
    ))
}

fn run_sweep(args: &SweepArgs) -> Result<String> {
    let cfg = args.config.load()?;
    let spec = SweepSpec {
        cores: args.n,
        seed: args.config.seed,
        ..SweepSpec::new(args.sizes.clone(), args.topologies.clone())
    };
    Ok(emit_csv(&sweep(&cfg, &spec)?))
}

fn show_route(args: &RouteArgs) -> Result<String> {
    let t = topology::build(args.topology, args.n)?;
    let r = route(&t, CoreId(args.src), CoreId(args.dst))?;
    let path: Vec<String> = r.path.iter().map(ToString::to_string).collect();
    Ok(format!("{}\nhops {}\n", path.join(" -> "), r.hops()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Simulate(a) => simulate(a)?,
        Command::Sweep(a) => {
            let csv = run_sweep(a)?;
            match &a.csv {
                Some(path) => {
                    write_file(path, &csv)?;
                    String::new()
                }
                None => csv,
            }
        }
        Command::Route(a) => show_route(a)?,
        Command::Tables => reference_tables().render(),
    };
    std::io::stdout().lock().write_all(out.as_bytes())?;
    Ok(())
}
