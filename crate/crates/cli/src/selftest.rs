use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use rand::Rng;
use rayon::prelude::*;
use swarmplay_core::oracle::all_reachable_boards;
use swarmplay_core::rng::stream_rng;
use swarmplay_core::vision::{detect_board, render_board, NoiseSpec, RenderStyle, VisionError};
use swarmplay_core::{Board, Cell, Mark};

use crate::load_service_config;

#[derive(clap::Args)]
pub struct SelftestArgs {
    /// Service config file; its [vision] table is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gaussian intensity noise added to each frame.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Check this many randomly chosen boards instead of all of them.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fault injection: read crosses as noughts and the other way round.
    #[arg(long)]
    swap_bands: bool,
}

fn mark_name(m: Mark) -> &'static str {
    match m {
        Mark::Empty => "Empty",
        Mark::Cross => "Cross",
        Mark::Nought => "Circle",
    }
}

pub fn run(args: SelftestArgs) -> Result<ExitCode> {
    let vision = load_service_config(args.config.as_ref())?.vision;
    vision.validate()?;
    let g = vision.grid;
    let style = RenderStyle {
        width: 2 * g.left + g.width,
        height: 2 * g.top + g.height,
        grid: g,
        ..Default::default()
    };
    let all = all_reachable_boards();
    let boards: Vec<(u64, Board)> = match args.sample {
        Some(n) => (0..n as u64)
            .map(|i| {
                // Sample index i from its own stream so the draw is order-free.
                let mut rng = stream_rng(args.seed, i);
                (i, all[rng.random_range(0..all.len())])
            })
            .collect(),
        None => (0..).zip(all.iter().copied()).collect(),
    };

    let results: Vec<(Board, Result<Board, VisionError>)> = boards
        .par_iter()
        .map(|&(i, board)| {
            let noise = (args.sigma > 0.0).then_some(NoiseSpec { sigma: args.sigma, seed: args.seed ^ i.rotate_left(17) });
            let seen = detect_board(&render_board(&board, &style, noise), &vision);
            let seen = if args.swap_bands { seen.map(|b| b.swapped()) } else { seen };
            (board, seen)
        })
        .collect();

    let mut confusions = std::collections::BTreeMap::new();
    let mut failures = Vec::new();
    for (board, seen) in &results {
        match seen {
            Ok(b) if b == board => {}
            Ok(b) => {
                for c in Cell::all().filter(|&c| b.get(c) != board.get(c)) {
                    *confusions.entry((mark_name(board.get(c)), mark_name(b.get(c)))).or_insert(0u64) += 1;
                }
                failures.push(format!("{} read as {}", board.encode_key(), b.encode_key()));
            }
            Err(e) => failures.push(format!("{}: {e}", board.encode_key())),
        }
    }

    println!("checked {} boards at sigma {}: {} mismatches", results.len(), args.sigma, failures.len());
    for ((from, to), n) in &confusions {
        println!("  {from} -> {to}: {n} cells");
    }
    for f in failures.iter().take(10) {
        println!("  {f}");
    }
    Ok(if failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

