use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod args;
mod commands;
mod config;
mod output;
mod sweep;

use args::{EmbedArgs, EvaluateArgs, FilterArgs, GenerateArgs, SweepArgs};
use config::ConfigFile;

/// Robust MDS experiments: generate scenarios, filter outlier distances,
/// embed, evaluate, and sweep.
#[derive(Parser, Debug)]
#[command(name = "trimds", version)]
struct Cli {
    /// TOML file with `global_seed`, `out_root` and one table per subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Global seed; per-command seeds derive from it unless given.
    #[arg(long, global = true)]
    global_seed: Option<u64>,

    /// Directory under which commands without `--out` write.
    #[arg(long, global = true, env = "TRIMDS_OUT")]
    out_root: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic scenario bundle.
    Generate(GenerateArgs),
    /// Count broken triangles and write the outlier mask.
    Filter(FilterArgs),
    /// Embed a distance matrix.
    Embed(EmbedArgs),
    /// Score an embedding and a mask against a bundle.
    Evaluate(EvaluateArgs),
    /// Run a parameter sweep and write curve CSVs.
    Sweep(SweepArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let ctx = commands::Context {
        global_seed: cli.global_seed.or(file.global_seed).unwrap_or(0),
        out_root: cli.out_root.clone().or(file.out_root.clone()).unwrap_or_else(|| config::DEFAULT_OUT_ROOT.into()),
    };
    match &cli.command {
        Command::Generate(a) => commands::generate(&ctx, file.merge("generate", a)?),
        Command::Filter(a) => commands::filter(&ctx, file.merge("filter", a)?),
        Command::Embed(a) => commands::embed(&ctx, file.merge("embed", a)?),
        Command::Evaluate(a) => commands::evaluate(&ctx, file.merge("evaluate", a)?),
        Command::Sweep(a) => sweep::sweep(&ctx, file.merge("sweep", a)?),
    }
}
