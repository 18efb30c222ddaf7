//! `skelex`: run, benchmark and ablate skeleton-graph exploration in
//! generated or file-defined voxel worlds.
//!
//! Exit codes: 0 on success (a single run reached Complete), 1 on invalid
//! input or I/O failure, 2 when a run stalled, 3 when it ran out of budget.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use skelex_sim::bench::{export_generated, parse_variants, run_ablation, run_bench, BenchOptions};
use skelex_sim::env::EnvKind;
use skelex_sim::{run_exploration, AblationFlags, Phase, RunConfig, Scenario};

#[derive(Parser, Debug)]
#[command(name = "skelex", version, about = "Skeleton-graph exploration runner")]
struct Cli {
    /// Print the default configuration as JSON and exit.
    #[arg(long, global = true)]
    dump_default_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fly one exploration run and write its artifacts.
    Run(RunArgs),
    /// Run every scenario over a seed set and summarize avg/std per metric.
    Bench(BenchArgs),
    /// Compare the full planner with single-component variants.
    Ablate(AblateArgs),
    /// Write a scenario file embedding a generated world.
    GenEnv(GenArgs),
}

#[derive(Args, Debug)]
struct WorldArgs {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "kind")]
    scenario: Option<PathBuf>,
    /// Generated world kind (office, maze, tunnel) when no scenario file is given.
    #[arg(long)]
    kind: Option<EnvKind>,
    /// World size `x,y,z` in metres for `--kind`.
    #[arg(long, value_parser = parse_size, default_value = "12,12,2.5")]
    size: [f64; 3],
    /// Run configuration JSON; unset keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    world: WorldArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Planner component to switch off (pir, rsp or pp).
    #[arg(long)]
    without: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Scenario JSON files; repeat or separate with commas.
    #[arg(long, value_delimiter = ',', conflicts_with = "kind")]
    scenario: Vec<PathBuf>,
    /// Generated world kinds, e.g. `office,maze`.
    #[arg(long, value_delimiter = ',')]
    kind: Vec<EnvKind>,
    #[arg(long, value_parser = parse_size, default_value = "12,12,2.5")]
    size: [f64; 3],
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed list such as `1..10` (inclusive) or `1,4,9`.
    #[arg(long, value_parser = parse_seeds, default_value = "1..10")]
    seeds: SeedList,
    /// Planner variants to run besides the full planner.
    #[arg(long, value_delimiter = ',')]
    variants: Vec<String>,
    /// Concurrent runs; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "bench")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[command(flatten)]
    world: WorldArgs,
    #[arg(long, value_parser = parse_seeds, default_value = "1..10")]
    seeds: SeedList,
    /// Components to switch off one at a time.
    #[arg(long, value_delimiter = ',', default_value = "pir,rsp,pp")]
    variants: Vec<String>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "ablation")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    kind: EnvKind,
    #[arg(long, value_parser = parse_size, default_value = "12,12,2.5")]
    size: [f64; 3],
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scenario name; defaults to `<kind>-<seed>`.
    #[arg(long)]
    name: Option<String>,
    /// Config whose voxel size is used for the connectivity check.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_size(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|_| "expected three comma-separated values".to_string())
}

/// Seeds given as an inclusive range `a..b` or a comma-separated list.
#[derive(Clone, Debug)]
struct SeedList(Vec<u64>);

fn parse_seeds(s: &str) -> std::result::Result<SeedList, String> {
    if let Some((a, b)) = s.split_once("..") {
        let lo: u64 = a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?;
        let hi: u64 = b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?;
        if hi < lo {
            return Err(format!("empty seed range {s}"));
        }
        return Ok(SeedList((lo..=hi).collect()));
    }
    s.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()
        .map(SeedList)
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn world(args: &WorldArgs) -> Result<Scenario> {
    match (&args.scenario, args.kind) {
        (Some(p), _) => Ok(Scenario::load(p)?),
        (None, Some(kind)) => Ok(Scenario::generated(&kind.to_string(), kind, args.size)),
        (None, None) => bail!("either --scenario or --kind is required"),
    }
}

fn cmd_run(args: &RunArgs) -> Result<Phase> {
    let cfg = load_config(args.world.config.as_deref())?;
    let scenario = world(&args.world)?;
    let flags = match &args.without {
        Some(c) => AblationFlags::without(c)?,
        None => AblationFlags::PROPOSED,
    };
    let out = run_exploration(&scenario, &cfg, flags, args.seed)?;
    out.write_to(&args.out)?;
    let m = &out.metrics;
    println!(
        "{} seed {}: {:?} after {:.1} s, {} cycles, path {:.1} m, reachable coverage {:.3}",
        m.scenario, m.seed, m.status.phase, m.exploration_time, m.cycles, m.path_length, m.reachable_coverage
    );
    Ok(m.status.phase)
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let mut scenarios = Vec::new();
    for p in &args.scenario {
        scenarios.push(Scenario::load(p)?);
    }
    for kind in &args.kind {
        scenarios.push(Scenario::generated(&kind.to_string(), *kind, args.size));
    }
    if scenarios.is_empty() {
        bail!("either --scenario or --kind is required");
    }
    let mut variants = vec![AblationFlags::PROPOSED];
    variants.extend(parse_variants(&args.variants)?);
    let opts = BenchOptions {
        seeds: args.seeds.0.clone(),
        variants,
        jobs: args.jobs,
        out: args.out.clone(),
    };
    let summary = run_bench(&scenarios, &cfg, &opts)?;
    print!("{}", summary.to_csv());
    Ok(())
}

fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    let cfg = load_config(args.world.config.as_deref())?;
    let scenario = world(&args.world)?;
    let variants = parse_variants(&args.variants)?;
    let table = run_ablation(&scenario, &cfg, &args.seeds.0, &variants, args.jobs, &args.out)?;
    print!("{}", table.to_csv());
    Ok(())
}

fn cmd_gen_env(args: &GenArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let min = 2.0 * cfg.voxel_size;
    if args.size.iter().any(|s| !(*s >= min)) {
        bail!("world size {:?} is below twice the voxel size ({min} m)", args.size);
    }
    let name = args.name.clone().unwrap_or_else(|| format!("{}-{}", args.kind, args.seed));
    let scenario = export_generated(&name, args.kind, args.size, args.seed, cfg.voxel_size)?;
    let text = serde_json::to_string_pretty(&scenario)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    }
    std::fs::write(&args.out, text + "\n").with_context(|| args.out.display().to_string())?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn exit_code(phase: Phase) -> u8 {
    match phase {
        Phase::Stalled => 2,
        Phase::TimedOut => 3,
        _ => 0,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if cli.dump_default_config {
        println!("{}", RunConfig::default().to_json_pretty());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: no command given (see --help)");
        return ExitCode::from(1);
    };
    let result = match &command {
        Command::Run(a) => cmd_run(a).map(exit_code),
        Command::Bench(a) => cmd_bench(a).map(|_| 0),
        Command::Ablate(a) => cmd_ablate(a).map(|_| 0),
        Command::GenEnv(a) => cmd_gen_env(a).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
