use std::path::PathBuf;
use std::process::ExitCode;

use avfrontier_cli::stages::{self, SummaryDocument};
use avfrontier_cli::{CliError, Run, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "avfrontier", version, about = "Empirical multi-objective frontier pipeline for trajectory data")]
struct Cli {
    /// Run configuration (TOML). Without it every key takes its default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `out_dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for intra-stage parallelism (outputs do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load, rescale, smooth and differentiate the raw tables.
    Ingest,
    /// Per-AV, per-timestep behavioral metrics.
    Metrics,
    /// Normalized composite safety/efficiency/interaction scores.
    Objectives,
    /// Pareto set, frontier surface, headroom and hull.
    Pareto,
    /// Histogram data and summary for plotting.
    Report,
    /// All stages in order.
    RunAll,
    /// Write the bundled synthetic scenarios and a config that runs them.
    Synth {
        /// Target directory (defaults to the output directory).
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Check every stage manifest against the files on disk.
    Verify,
}

fn print_summary(s: &SummaryDocument) {
    let r = &s.run;
    println!("observations: {}  pareto-optimal: {}  fraction: {:.4}", r.n, r.n_pareto, r.fraction);
    let fmt = |v: [f64; 3]| format!("S {:.3}  E {:.3}  I {:.3}", v[0], v[1], v[2]);
    println!("mean (pareto):    {}", fmt(r.mean_pareto));
    if let Some(d) = r.mean_dominated {
        println!("mean (dominated): {}", fmt(d));
    }
    if let Some(h) = &r.headroom {
        println!("median headroom:  {}", fmt(h.medians));
    }
    if let Some(f) = &r.frontier {
        println!(
            "frontier: {} on the other two, train rmse {:.4}, overshoot max {:.4} mean {:.4} fraction {:.4} ({}x{} lattice)",
            f.dependent_axis.name(),
            f.train_rmse,
            f.overshoot.max,
            f.overshoot.mean,
            f.overshoot.fraction,
            f.overshoot.resolution,
            f.overshoot.resolution
        );
    }
    for n in &r.notices {
        println!("notice: {n}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Synth { dir } = &cli.command {
        let dir = dir.clone().or(cli.out_dir.clone()).unwrap_or_else(|| PathBuf::from("synthetic"));
        let path = stages::cmd_synth(&dir, cli.seed.unwrap_or(0))?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out_dir {
        cfg.out_dir = out;
    } else if let Some(parent) = cli.config.as_ref().and_then(|p| p.parent()).filter(|_| cfg.out_dir.is_relative()) {
        cfg.out_dir = parent.join(&cfg.out_dir);
    }
    let cfg = cfg.resolved();
    cfg.validate()?;
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    }
    let run = Run::new(&cfg);
    match cli.command {
        Command::Ingest => drop(stages::cmd_ingest(&run)?),
        Command::Metrics => drop(stages::cmd_metrics(&run)?),
        Command::Objectives => drop(stages::cmd_objectives(&run)?),
        Command::Pareto => print_summary(&stages::cmd_pareto(&run)?.1),
        Command::Report => {
            for n in stages::cmd_report(&run)?.1.notices {
                println!("notice: {n}");
            }
        }
        Command::RunAll => {
            let (summary, index) = stages::run_all(&run)?;
            print_summary(&summary);
            for n in index.notices {
                println!("notice: {n}");
            }
        }
        Command::Verify => {
            let problems = avfrontier_cli::validate_chain(&run.out, &stages::STAGES);
            if !problems.is_empty() {
                for p in &problems {
                    eprintln!("{p}");
                }
                return Err(CliError::Config(format!("{} manifest inconsistencies", problems.len())));
            }
            println!("manifest chain consistent");
        }
        Command::Synth { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
