use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use featgen::bench::{default_data_dir, BENCHMARKS};
use featgen::commands::{cmd_evaluate, cmd_generate, cmd_match, cmd_split};
use featgen::config::{DatasetRef, RunConfig, StrategyConfig, StrategyKind};
use featgen_core::evaluation::FgtSplitSpec;

#[derive(Parser)]
#[command(name = "featgen", version, about = "Generate features for a small dataset from auxiliary datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Match training features against auxiliary datasets.
    Match {
        /// Training CSV; the schema is read from <name>.schema.toml.
        #[arg(long)]
        train: PathBuf,
        #[arg(long = "aux", required = true)]
        aux: Vec<PathBuf>,
        #[arg(long, default_value = "exact")]
        strategy: StrategyKind,
        /// Manual match table (strategy `manual`).
        #[arg(long)]
        table: Option<PathBuf>,
        /// Embedding vectors (strategy `embedding`).
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Maximum distance (fuzzy, distribution) or minimum cosine (embedding).
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate features and write the enhanced dataset.
    Generate(RunArgs),
    /// Run the fold-based evaluation protocol.
    Evaluate(RunArgs),
    /// Split one labeled dataset into a training and an auxiliary part.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        mu1: f64,
        #[arg(long, default_value_t = 2.0 / 3.0)]
        mu2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run a bundled benchmark, or list them.
    Bench {
        name: Option<String>,
        #[arg(long)]
        list: bool,
        /// Defaults to $FEATGEN_DATA_DIR, then the workspace `data/` directory.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of consecutive seeds to run.
        #[arg(long, default_value_t = 1)]
        repeats: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

fn read_config(args: &RunArgs) -> featgen::Result<RunConfig> {
    let mut cfg = RunConfig::read(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> featgen::Result<()> {
    match cli.command {
        Command::Match {
            train,
            aux,
            strategy,
            table,
            embeddings,
            threshold,
            out_dir,
        } => {
            let strategy = StrategyConfig {
                strategy,
                table,
                embeddings,
                threshold,
            };
            for s in cmd_match(&train, &aux, &strategy, out_dir.as_deref())? {
                println!("{}", s.line());
            }
        }
        Command::Generate(args) => {
            let cfg = read_config(&args)?;
            let out = cmd_generate(&cfg, args.jobs, &args.out_dir)?;
            println!(
                "{} generated feature(s) accepted; enhanced dataset has {} features, {} rows",
                out.features.len(),
                out.enhanced.n_features(),
                out.enhanced.n_rows()
            );
            for f in &out.features {
                println!("  {} <- {} ({:.4})", f.name, f.source_dataset(), f.utility_at_acceptance);
            }
        }
        Command::Evaluate(args) => {
            let cfg = read_config(&args)?;
            print!("{}", cmd_evaluate(&cfg, args.jobs, &args.out_dir)?.table);
        }
        Command::Split {
            input,
            mu1,
            mu2,
            seed,
            out_dir,
        } => {
            let input = DatasetRef {
                data: input,
                schema: None,
                normalize: false,
            };
            let s = cmd_split(&input, &FgtSplitSpec { mu1, mu2, seed }, &out_dir)?;
            println!(
                "train: {} rows, {} features; aux: {} rows, {} features; {} shared",
                s.train.n_rows(),
                s.train.n_features(),
                s.aux.n_rows(),
                s.aux.n_features(),
                s.shared.len()
            );
        }
        Command::Bench {
            name,
            list,
            data_dir,
            seed,
            repeats,
            jobs,
            out_dir,
        } => {
            let name = match name {
                Some(n) if !list => n,
                _ => {
                    for b in BENCHMARKS {
                        println!("{}", b.name);
                    }
                    return Ok(());
                }
            };
            let bench = featgen::bench::find(&name)?;
            let data_dir = data_dir.unwrap_or_else(default_data_dir);
            let base = out_dir.join(&name);
            let cfg = bench.materialize(&data_dir, &base.join("bundle"))?;
            let first = seed.unwrap_or(cfg.seed);
            let mut deltas: Vec<(String, Vec<f64>)> = Vec::new();
            for s in first..first + repeats.max(1) {
                let mut c = cfg.clone();
                c.seed = s;
                let out = cmd_evaluate(&c, jobs, &run_dir(&base, s, repeats))?;
                println!("seed {s}");
                print!("{}", out.table);
                for l in &out.report.report.learners {
                    match deltas.iter_mut().find(|d| d.0 == l.learner) {
                        Some(d) => d.1.push(l.delta),
                        None => deltas.push((l.learner.clone(), vec![l.delta])),
                    }
                }
            }
            if repeats > 1 {
                for (learner, d) in deltas {
                    println!("{learner}: mean delta over {} seeds {:+.4}", d.len(), d.iter().sum::<f64>() / d.len() as f64);
                }
            }
        }
    }
    Ok(())
}

fn run_dir(base: &Path, seed: u64, repeats: u64) -> PathBuf {
    if repeats > 1 {
        base.join(format!("seed{seed}"))
    } else {
        base.to_path_buf()
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
