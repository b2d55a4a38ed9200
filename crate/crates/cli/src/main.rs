mod play;
mod selftest;
mod tournament;
mod train;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use swarmplay_service::ServiceConfig;

#[derive(Parser)]
#[command(name = "swarmplay", version, about = "Tic-tac-toe against a simulated drone swarm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tabular TD policy and write the policy and reward trace.
    Train(train::TrainArgs),
    /// Play seeded matches between two strategies.
    Tournament(tournament::TournamentArgs),
    /// Render boards, read them back and report mismatches.
    VisionSelftest(selftest::SelftestArgs),
    /// Play a game in the terminal, reading cells 1-9 from stdin.
    Play(play::PlayArgs),
    /// Run the HTTP play service.
    Serve(ServeArgs),
}

#[derive(clap::Args)]
struct ServeArgs {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Listen port; overrides the config file and the environment.
    #[arg(long)]
    port: Option<u16>,
}

pub(crate) fn load_service_config(path: Option<&PathBuf>) -> Result<ServiceConfig> {
    match path {
        Some(p) => ServiceConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ServiceConfig::default()),
    }
}

fn serve(args: ServeArgs) -> Result<ExitCode> {
    let mut cfg = load_service_config(args.config.as_ref())?.with_env_port()?;
    if let Some(port) = args.port {
        cfg.port = port;
    }
    println!("listening on {}:{}", cfg.bind, cfg.port);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(swarmplay_service::serve(cfg))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Train(args) => train::run(args),
        Command::Tournament(args) => tournament::run(args),
        Command::VisionSelftest(args) => selftest::run(args),
        Command::Play(args) => play::run(args),
        Command::Serve(args) => serve(args),
    }
}
