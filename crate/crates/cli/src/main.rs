use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use ris_hbf::harness::{run_sweep, write_results, write_trace, Method, ScenarioConfig, SweepOutput, SweepSpec};

/// Monte Carlo rate sweeps for RIS-aided hybrid beamforming.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,

    /// Swept variable and its values, e.g. `d1=20,60,100`. Variables: d1, dTR, PT, MI.
    #[arg(long)]
    sweep: SweepSpec,

    /// Per-trial results CSV.
    #[arg(long)]
    out: PathBuf,

    /// Overrides `run.master_seed`.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,

    /// Comma-separated subset of pso,random,constant,no_ris.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,

    /// Overrides `run.trials`.
    #[arg(long)]
    trials: Option<usize>,

    /// Writes the PSO global-best trace of the first sweep point, trial 0.
    #[arg(long)]
    emit_trace: Option<PathBuf>,

    /// Suppresses the summary table.
    #[arg(long, short)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: &Args) -> Result<(), String> {
    let mut cfg = ScenarioConfig::load(&args.config).map_err(|e| e.to_string())?;
    if let Some(seed) = args.seed {
        cfg.run.master_seed = seed;
    }
    if let Some(methods) = &args.methods {
        cfg.run.methods = methods.clone();
    }
    if let Some(trials) = args.trials {
        cfg.run.trials = trials;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    if args.emit_trace.is_some() && !cfg.run.methods.contains(&Method::Pso) {
        return Err("--emit-trace needs the pso method".into());
    }
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err("--workers must be at least 1".into());
    }

    let start = Instant::now();
    let out = run_sweep(&cfg, &args.sweep, workers).map_err(|e| e.to_string())?;
    write_results(&out.rows, &args.out).map_err(|e| e.to_string())?;

    if let Some(path) = &args.emit_trace {
        let summary = out
            .rows
            .iter()
            .find_map(|r| r.pso.as_ref())
            .ok_or("no PSO trial ran")?;
        write_trace(summary.initial_best, &summary.trace, path).map_err(|e| e.to_string())?;
    }

    if !args.quiet {
        print_summary(&args.sweep, &out);
        println!(
            "{} rows -> {} ({:.1} s)",
            out.rows.len(),
            args.out.display(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

fn print_summary(sweep: &SweepSpec, out: &SweepOutput) {
    println!(
        "{:>10}  {:<9} {:>10} {:>10} {:>7} {:>8}",
        sweep.variable.as_str(),
        "method",
        "mean",
        "std",
        "trials",
        "flagged"
    );
    for a in &out.aggregates {
        println!(
            "{:>10}  {:<9} {:>10.4} {:>10.4} {:>7} {:>8}",
            a.sweep_value,
            a.method.as_str(),
            a.mean,
            a.std,
            a.trials,
            a.flagged
        );
    }
}
