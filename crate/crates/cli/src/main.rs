//! `cmlab`: generate configuration-model multigraphs, compute closed-form
//! phase-transition predictions, and run seeded Monte Carlo campaigns that
//! test them.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use cmlab_core::exploration::{self, ActiveOrder, ExploreOptions};
use cmlab_core::generator::Pairing;
use cmlab_core::harness::{self, ExperimentConfig, MCReport, SequenceSpec};
use cmlab_core::rng::derive_stream;
use cmlab_core::{critical, generator};

#[derive(Parser)]
#[command(name = "cmlab", version, about = "Configuration-model phase-transition laboratory")]
struct Cli {
    /// Worker threads for replica-parallel commands (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form prediction report for a sequence spec as JSON.
    Theory {
        /// JSON config: a sequence spec or a full experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Override the population size used by the predictions.
        #[arg(long)]
        n: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate one multigraph and write its edge list.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rejection-sample until the graph is simple.
        #[arg(long)]
        simple: bool,
        #[arg(long, default_value_t = 1000)]
        max_attempts: u32,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exploration walk over one graph and report its components.
    Explore {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use LIFO active-stub order instead of FIFO.
        #[arg(long)]
        lifo: bool,
        /// Stop after this many steps.
        #[arg(long)]
        until: Option<usize>,
        /// Dump the walk arrays as CSV to this path.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Keep every k-th row of the walk dump.
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
    /// Supercritical Monte Carlo campaign.
    RunSuper(RunArgs),
    /// Subcritical Monte Carlo campaign.
    RunSub(RunArgs),
    /// Critical-window Monte Carlo campaign against the limit process.
    RunCritical(RunArgs),
    /// Simulate the critical limit process and emit excursion samples.
    LimitSim {
        #[arg(long)]
        a0: f64,
        #[arg(long, default_value_t = 0.0)]
        a1: f64,
        #[arg(long)]
        a2: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1000)]
        runs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the simulation horizon.
        #[arg(long)]
        smax: Option<f64>,
        /// Override the grid step.
        #[arg(long)]
        ds: Option<f64>,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config JSON (regime, sequence, replicas, seed, ...).
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config replica count.
    #[arg(long)]
    replicas: Option<u32>,
    /// Output directory for replicas.csv, summary.json, plotdata.csv.
    #[arg(long)]
    out: PathBuf,
    /// Override the regime consistency guard.
    #[arg(long)]
    force: bool,
}

fn read_sequence_spec(path: &Path) -> Result<SequenceSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("sequence").is_some() {
        let config: ExperimentConfig = serde_json::from_value(value)?;
        Ok(config.sequence)
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

fn read_experiment_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(replicas) = args.replicas {
        config.replicas = replicas;
    }
    if args.force {
        config.force = true;
    }
    Ok(config)
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn finish_run(report: &MCReport, out: &Path) -> Result<bool> {
    harness::emit_report(report, out)?;
    for t in &report.tests {
        let verdict = if t.pass { "pass" } else { "FAIL" };
        let p = t
            .p_value
            .map_or(String::new(), |p| format!(" p={p:.4}"));
        let gate = if t.gating { "" } else { " (non-gating)" };
        println!("{verdict}  {}  statistic={:.6}{p}{gate}", t.name, t.statistic);
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!(
        "wrote {}, {}, {}",
        out.join("replicas.csv").display(),
        out.join("summary.json").display(),
        out.join("plotdata.csv").display()
    );
    Ok(report.gating_tests_pass())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Theory { config, n, out } => {
            let spec = read_sequence_spec(&config)?;
            let report = harness::theory_report(&spec, n)?;
            write_or_print(&out, &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            Ok(true)
        }
        Command::Generate {
            config,
            seed,
            simple,
            max_attempts,
            out,
        } => {
            let spec = read_sequence_spec(&config)?;
            let (graph, attempts) = harness::generate_graph(&spec, seed, simple, max_attempts)?;
            let mut buf = Vec::new();
            graph.write_edge_list(&mut buf)?;
            write_or_print(&out, &String::from_utf8(buf)?)?;
            if simple {
                eprintln!("simple after {attempts} attempt(s)");
            }
            Ok(true)
        }
        Command::Explore {
            config,
            seed,
            lifo,
            until,
            dump,
            every,
        } => {
            let spec = read_sequence_spec(&config)?;
            let options = ExploreOptions {
                mode: until,
                order: if lifo { ActiveOrder::Lifo } else { ActiveOrder::Fifo },
                snapshot_times: Vec::new(),
            };
            let mut rng = derive_stream(seed, 0);
            let trace = match spec.percolation() {
                Some(p) => {
                    let seq = spec.graph_sequence()?;
                    let pairing = generator::generate_pairing(&seq, &mut rng)?;
                    let graph =
                        generator::percolate(&generator::to_multigraph(&pairing), p, &mut rng)?;
                    exploration::replay_on_pairing(
                        &Pairing::from_multigraph(&graph),
                        &mut rng,
                        &options,
                    )?
                }
                None => exploration::explore(&spec.graph_sequence()?, &mut rng, &options)?,
            };
            let mut components = trace.components.clone();
            components.sort_by(|a, b| b.cmp(a));
            let summary = serde_json::json!({
                "steps": trace.steps(),
                "components_completed": trace.components.len(),
                "l1": components.first().map_or(0, |c| c.0),
                "n1": components.first().map_or(0, |c| c.1),
                "total_back_edges": trace.y.last().copied().unwrap_or(0),
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if let Some(path) = dump {
                let mut buf = Vec::new();
                trace.write_walk_csv(every, &mut buf)?;
                std::fs::write(&path, buf)?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::RunSuper(args) => {
            let config = read_experiment_config(&args)?;
            finish_run(&harness::run_supercritical(&config)?, &args.out)
        }
        Command::RunSub(args) => {
            let config = read_experiment_config(&args)?;
            finish_run(&harness::run_subcritical(&config)?, &args.out)
        }
        Command::RunCritical(args) => {
            let config = read_experiment_config(&args)?;
            finish_run(&harness::run_critical(&config)?, &args.out)
        }
        Command::LimitSim {
            a0,
            a1,
            a2,
            beta,
            runs,
            seed,
            smax,
            ds,
            out,
        } => {
            let mut params = critical::LimitParams::new(a0, a1, a2, beta)?;
            if smax.is_some() || ds.is_some() {
                let s_max = smax.unwrap_or(params.s_max);
                let step = ds.unwrap_or(1e-4 * s_max);
                params = params.with_grid(step, s_max)?;
            }
            if !params.horizon_ok() {
                eprintln!("warning: drift at the horizon is weak; consider a larger --smax");
            }
            let samples: Vec<_> = (0..runs)
                .map(|j| {
                    let mut rng = derive_stream(seed, j as u64);
                    critical::simulate_limit(&params, &mut rng)
                })
                .collect();
            let mut buf = Vec::new();
            critical::write_excursion_csv(&samples, &mut buf)?;
            write_or_print(&out, &String::from_utf8(buf)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // ignore failure when a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("campaign finished: at least one gating test failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
