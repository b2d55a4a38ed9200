use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Deserialize;
use swarmplay_core::rl::{save_policy, train_with_progress, Method, OpponentSpec, RewardSchedule, TdParams};

#[derive(clap::Args)]
pub struct TrainArgs {
    /// TOML file with any of the flag settings below; flags win.
    #[arg(long)]
    params: Option<PathBuf>,
    /// ql, sarsa or sv.
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    episodes: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    discount: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// random, minimax, self-play or mixture[:p_random].
    #[arg(long)]
    opponent: Option<OpponentSpec>,
    /// Policy output; defaults to policy-<method>-<seed>.json.
    #[arg(long)]
    policy_out: Option<PathBuf>,
    /// Reward trace output; defaults to trace-<method>-<seed>.csv.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    method: Option<Method>,
    episodes: Option<u64>,
    seed: Option<u64>,
    learning_rate: Option<f64>,
    discount: Option<f64>,
    epsilon: Option<f64>,
    opponent: Option<OpponentSpec>,
    rewards: Option<RewardSchedule>,
}

pub fn run(args: TrainArgs) -> Result<ExitCode> {
    let file: ParamsFile = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ParamsFile::default(),
    };
    let d = TdParams::default();
    let params = TdParams {
        method: args.method.or(file.method).unwrap_or(d.method),
        episodes: args.episodes.or(file.episodes).unwrap_or(d.episodes),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        learning_rate: args.learning_rate.or(file.learning_rate).unwrap_or(d.learning_rate),
        discount: args.discount.or(file.discount).unwrap_or(d.discount),
        epsilon: args.epsilon.or(file.epsilon).unwrap_or(d.epsilon),
        opponent: args.opponent.or(file.opponent).unwrap_or(d.opponent),
    };
    let rewards = file.rewards.unwrap_or_default();
    params.validate()?;

    let tag = format!("{}-{}", params.method.as_str().to_ascii_lowercase(), params.seed);
    let policy_out = args.policy_out.unwrap_or_else(|| format!("policy-{tag}.json").into());
    let trace_out = args.trace_out.unwrap_or_else(|| format!("trace-{tag}.csv").into());

    let start = Instant::now();
    let mut lap = start;
    let (policy, trace) = train_with_progress(&params, &rewards, 10_000, |done| {
        let now = Instant::now();
        println!("episodes {done}: {:.3} s for the last 10K", (now - lap).as_secs_f64());
        lap = now;
    })?;
    let total = start.elapsed().as_secs_f64();

    save_policy(&policy, &policy_out).with_context(|| format!("writing {}", policy_out.display()))?;
    let out = File::create(&trace_out).with_context(|| format!("writing {}", trace_out.display()))?;
    trace.write_csv(BufWriter::new(out))?;

    println!(
        "{} trained {} episodes in {total:.3} s ({:.3} s per 10K)",
        params.method,
        params.episodes,
        total * 10_000.0 / params.episodes as f64
    );
    println!(
        "final cumulative reward {:.1}, win rate {:.3}, {} table entries",
        trace.final_cumulative(),
        trace.rate(swarmplay_core::Outcome::CrossWins),
        policy.entry_count()
    );
    println!("policy: {}\ntrace: {}", policy_out.display(), trace_out.display());
    Ok(ExitCode::SUCCESS)
}
