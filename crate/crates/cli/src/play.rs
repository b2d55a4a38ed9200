use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use swarmplay_core::ib::IbConfig;
use swarmplay_core::sim::SimConfig;
use swarmplay_core::Cell;
use swarmplay_service::session::Turn;
use swarmplay_service::{FirstMover, ServiceError, Session, SessionConfig, StrategyConfig};

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum FirstArg {
    Human,
    Drones,
}

#[derive(clap::Args)]
pub struct PlayArgs {
    /// ib or rl:<policy.json>.
    #[arg(long, default_value = "ib")]
    strategy: String,
    #[arg(long, value_enum, default_value = "human")]
    first: FirstArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write every drone flight as NDJSON telemetry.
    #[arg(long)]
    telemetry_out: Option<PathBuf>,
}

fn strategy_config(spec: &str) -> Result<StrategyConfig> {
    match spec.split_once(':') {
        None if spec == "ib" => Ok(StrategyConfig::Ib(IbConfig::default())),
        Some(("rl", path)) if !path.is_empty() => Ok(StrategyConfig::Rl { policy_path: Some(path.into()) }),
        _ => bail!("unknown strategy {spec:?}; use ib or rl:<policy.json>"),
    }
}

pub fn run(args: PlayArgs) -> Result<ExitCode> {
    let cfg = SessionConfig {
        strategy: strategy_config(&args.strategy)?,
        first_mover: match args.first {
            FirstArg::Human => FirstMover::Human,
            FirstArg::Drones => FirstMover::Drones,
        },
        vision_enabled: false,
        sim: None,
        realtime: false,
        seed: args.seed,
    };
    let mut session = Session::new("terminal".into(), cfg, None, SimConfig::default())?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "you are O, the drones are X; cells are numbered 1-9 from the top left")?;
    for h in session.history() {
        writeln!(out, "drones: {}", h.cell)?;
    }

    let mut tokens = io::stdin()
        .lock()
        .lines()
        .map_while(Result::ok)
        .flat_map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>());
    while session.turn() == Turn::Human {
        write!(out, "{}your move: ", session.board())?;
        out.flush()?;
        let Some(token) = tokens.next() else {
            writeln!(out)?;
            bail!("input ended before the game finished");
        };
        writeln!(out, "{token}")?;
        let cell = match token.parse::<i64>().ok().and_then(|n| Cell::new(n).ok()) {
            Some(c) => c,
            None => {
                writeln!(out, "enter a cell number from 1 to 9")?;
                continue;
            }
        };
        match session.play_human(cell) {
            Ok(result) => {
                if let Some(reply) = result.drones {
                    writeln!(out, "drones: {reply}")?;
                }
            }
            Err(e @ ServiceError::OccupiedCell(_)) => writeln!(out, "{}: {e}", e.code())?,
            Err(e) => return Err(e.into()),
        }
    }

    write!(out, "{}", session.board())?;
    writeln!(out, "outcome: {}", session.status())?;
    let moves: Vec<String> = session.history().iter().map(|h| h.cell.to_string()).collect();
    writeln!(out, "moves: {}", moves.join(" "))?;

    if let Some(path) = &args.telemetry_out {
        let mut file = BufWriter::new(File::create(path).with_context(|| format!("writing {}", path.display()))?);
        for rec in session.telemetry() {
            serde_json::to_writer(&mut file, rec)?;
            writeln!(file)?;
        }
        file.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}
