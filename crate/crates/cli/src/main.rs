use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nbvlab_cli::commands;
use nbvlab_cli::config::ExperimentConfig;
use nbvlab_cli::CliResult;

#[derive(Parser)]
#[command(
    name = "nbvlab",
    version,
    about = "Next-best-view planning laboratory: simulate RGB-D capture, train the view scorer, and evaluate acquisition policies"
)]
struct Cli {
    /// TOML configuration file; absent keys fall back to profile defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Scale profile: desk | paper.
    #[arg(long, global = true)]
    profile: Option<String>,

    /// Global seed; every random stream derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run directory for all artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the procedural scenes (OBJ meshes + ground-truth clouds).
    GenScenes,
    /// Exhaustively compute oracle improvements and feature bundles.
    GenLabels,
    /// Train the view scorer on the generated labels.
    Train,
    /// Run every (scene, criterion) rollout and aggregate the curves.
    Rollout {
        /// Dump sample feature grids as PGM images under debug/.
        #[arg(long)]
        dump_grids: bool,
    },
    /// Summarize terminal reconstruction quality per criterion.
    Report,
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), cli.profile.as_deref())?;
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    cfg.validate()?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .ok();
    }
    match cli.command {
        Command::GenScenes => commands::cmd_gen_scenes(&cfg),
        Command::GenLabels => commands::cmd_gen_labels(&cfg),
        Command::Train => commands::cmd_train(&cfg),
        Command::Rollout { dump_grids } => commands::cmd_rollout(&cfg, dump_grids),
        Command::Report => {
            let dir = cfg.out_dir.clone();
            commands::cmd_report(&cfg, &dir)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
