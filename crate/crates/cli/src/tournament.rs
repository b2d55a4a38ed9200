use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use swarmplay_core::ib::IbConfig;
use swarmplay_core::rl::load_policy;
use swarmplay_core::tournament::{run_tournament, FirstMover, Strategy, TournamentSpec};

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum FirstMoverArg {
    Alternate,
    A,
    B,
}

#[derive(clap::Args)]
pub struct TournamentArgs {
    /// Strategy A (plays Cross): random, minimax, ib[:p_open[:p_mid]] or rl:<policy.json>.
    #[arg(long)]
    a: String,
    /// Strategy B (plays Nought), same forms as A.
    #[arg(long)]
    b: String,
    #[arg(long, default_value_t = 1000)]
    games: u64,
    #[arg(long, value_enum, default_value = "alternate")]
    first_mover: FirstMoverArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Parses a strategy spec such as `ib:0.5:0.25` or `rl:policy.json`.
pub fn parse_strategy(spec: &str) -> Result<Strategy> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match kind {
        "random" if rest.is_empty() => Strategy::Random,
        "minimax" if rest.is_empty() => Strategy::Minimax,
        "ib" => {
            let mut cfg = IbConfig::default();
            let probs: Vec<&str> = rest.split(':').filter(|s| !s.is_empty()).collect();
            if probs.len() > 2 {
                bail!("ib takes at most two probabilities: {spec:?}");
            }
            let parse = |s: &str| -> Result<f64> {
                let p: f64 = s.parse().with_context(|| format!("bad probability {s:?}"))?;
                if !(0.0..=1.0).contains(&p) {
                    bail!("probability {p} not in [0, 1]");
                }
                Ok(p)
            };
            if let Some(p) = probs.first() {
                cfg.p_random_opening = parse(p)?;
            }
            if let Some(p) = probs.get(1) {
                cfg.p_random_midgame = parse(p)?;
            }
            Strategy::Ib(cfg)
        }
        "rl" if !rest.is_empty() => {
            let policy = load_policy(rest).with_context(|| format!("PolicyLoadFailure: {rest}"))?;
            Strategy::Rl(Arc::new(policy))
        }
        _ => bail!("unknown strategy {spec:?}"),
    })
}

pub fn run(args: TournamentArgs) -> Result<ExitCode> {
    let spec = TournamentSpec {
        a: parse_strategy(&args.a)?,
        b: parse_strategy(&args.b)?,
        games: args.games,
        first_mover: match args.first_mover {
            FirstMoverArg::Alternate => FirstMover::AlternateEach,
            FirstMoverArg::A => FirstMover::AlwaysA,
            FirstMoverArg::B => FirstMover::AlwaysB,
        },
        seed: args.seed,
    };
    let report = run_tournament(&spec)?;

    println!("A = {} (Cross), B = {} (Nought), {} games, seed {}", spec.a, spec.b, spec.games, spec.seed);
    println!("{:<12} {:>7} {:>7} {:>7} {:>7} {:>10}", "first mover", "games", "A wins", "B wins", "draws", "mean plies");
    let total = report.total();
    let mut rows = report.strata();
    rows.push(("all", total));
    for (label, s) in rows {
        println!(
            "{label:<12} {:>7} {:>7} {:>7} {:>7} {:>10.2}",
            s.games(),
            s.a_wins,
            s.b_wins,
            s.draws,
            s.mean_plies()
        );
    }
    if let Some(path) = &args.csv {
        let out = File::create(path).with_context(|| format!("writing {}", path.display()))?;
        report.write_csv(BufWriter::new(out))?;
    }
    Ok(ExitCode::SUCCESS)
}
