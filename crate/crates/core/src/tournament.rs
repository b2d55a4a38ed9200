//! Seeded head-to-head matches between strategies.
//!
//! Strategy A always plays Cross and B plays Nought; the first-mover policy
//! decides who opens. Game `i` draws all its randomness from
//! `stream_rng(seed, i)`, so results do not depend on scheduling and games
//! run in parallel.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Board, Cell, Mark, Outcome};
use crate::ib::{ib_move, IbConfig, IbError};
use crate::oracle::{OracleError, Solver};
use crate::rl::{Policy, RlError};
use crate::rng::{stream_rng, GameRng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TournamentError {
    #[error("a tournament needs at least one game")]
    NoGames,
    #[error(transparent)]
    Ib(#[from] IbError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone)]
pub enum Strategy {
    Random,
    Minimax,
    Ib(IbConfig),
    Rl(Arc<Policy>),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Random => f.write_str("random"),
            Strategy::Minimax => f.write_str("minimax"),
            Strategy::Ib(_) => f.write_str("ib"),
            Strategy::Rl(p) => write!(f, "rl-{}", p.method()),
        }
    }
}

fn random_move(board: &Board, rng: &mut GameRng) -> Cell {
    *board.legal_moves().choose(rng).expect("ongoing game has a legal move")
}

impl Strategy {
    /// Move for `me` on `board`; `first` is the mark that opened the game.
    pub fn choose(
        &self,
        board: &Board,
        me: Mark,
        first: Mark,
        rng: &mut GameRng,
    ) -> Result<Cell, TournamentError> {
        Ok(match self {
            Strategy::Random => random_move(board, rng),
            Strategy::Minimax => {
                let best = Solver::global().best_moves(board, me)?;
                *best.choose(rng).expect("non-terminal board has a best move")
            }
            Strategy::Ib(cfg) => {
                // The rule set is written for Cross; mirror the board for Nought.
                let view = if me == Mark::Nought { board.swapped() } else { *board };
                ib_move(&view, cfg, rng, first == me)?
            }
            Strategy::Rl(policy) => policy.choose(board, me, rng)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstMover {
    AlternateEach,
    AlwaysA,
    AlwaysB,
}

impl FirstMover {
    pub fn a_first(self, game: u64) -> bool {
        match self {
            FirstMover::AlternateEach => game.is_multiple_of(2),
            FirstMover::AlwaysA => true,
            FirstMover::AlwaysB => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TournamentSpec {
    pub a: Strategy,
    pub b: Strategy,
    pub games: u64,
    pub first_mover: FirstMover,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameRecord {
    pub a_first: bool,
    pub outcome: Outcome,
    pub moves: Vec<Cell>,
}

impl GameRecord {
    pub fn plies(&self) -> usize {
        self.moves.len()
    }
}

pub fn play_game(
    a: &Strategy,
    b: &Strategy,
    a_first: bool,
    rng: &mut GameRng,
) -> Result<GameRecord, TournamentError> {
    let first = if a_first { Mark::Cross } else { Mark::Nought };
    let mut board = Board::empty();
    let mut to_move = first;
    let mut moves = Vec::with_capacity(9);
    while !board.outcome().is_over() {
        let player = if to_move == Mark::Cross { a } else { b };
        let cell = player.choose(&board, to_move, first, rng)?;
        board = board
            .apply_move(cell, to_move)
            .expect("strategies only return legal cells");
        moves.push(cell);
        to_move = to_move.opponent();
    }
    Ok(GameRecord { a_first, outcome: board.outcome(), moves })
}

/// Results for the games one side opened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stratum {
    pub a_wins: u64,
    pub b_wins: u64,
    pub draws: u64,
    pub total_plies: u64,
}

impl Stratum {
    pub fn games(&self) -> u64 {
        self.a_wins + self.b_wins + self.draws
    }

    pub fn mean_plies(&self) -> f64 {
        self.total_plies as f64 / self.games() as f64
    }

    fn add(&mut self, g: &GameRecord) {
        match g.outcome {
            Outcome::CrossWins => self.a_wins += 1,
            Outcome::NoughtWins => self.b_wins += 1,
            _ => self.draws += 1,
        }
        self.total_plies += g.plies() as u64;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TournamentReport {
    pub a_first: Stratum,
    pub b_first: Stratum,
}

pub const TOURNAMENT_CSV_HEADER: &str = "first_mover,a_wins,b_wins,draws,mean_plies";

impl TournamentReport {
    pub fn from_games(games: &[GameRecord]) -> TournamentReport {
        let mut report = TournamentReport { a_first: Stratum::default(), b_first: Stratum::default() };
        for g in games {
            if g.a_first {
                report.a_first.add(g);
            } else {
                report.b_first.add(g);
            }
        }
        report
    }

    pub fn total(&self) -> Stratum {
        let (a, b) = (self.a_first, self.b_first);
        Stratum {
            a_wins: a.a_wins + b.a_wins,
            b_wins: a.b_wins + b.b_wins,
            draws: a.draws + b.draws,
            total_plies: a.total_plies + b.total_plies,
        }
    }

    /// Non-empty strata labelled `A` or `B` by who moved first.
    pub fn strata(&self) -> Vec<(&'static str, Stratum)> {
        [("A", self.a_first), ("B", self.b_first)]
            .into_iter()
            .filter(|(_, s)| s.games() > 0)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{TOURNAMENT_CSV_HEADER}")?;
        for (label, s) in self.strata() {
            writeln!(out, "{label},{},{},{},{:.4}", s.a_wins, s.b_wins, s.draws, s.mean_plies())?;
        }
        Ok(())
    }
}

pub fn run_games(spec: &TournamentSpec) -> Result<Vec<GameRecord>, TournamentError> {
    if spec.games == 0 {
        return Err(TournamentError::NoGames);
    }
    (0..spec.games)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i);
            play_game(&spec.a, &spec.b, spec.first_mover.a_first(i), &mut rng)
        })
        .collect()
}

pub fn run_tournament(spec: &TournamentSpec) -> Result<TournamentReport, TournamentError> {
    Ok(TournamentReport::from_games(&run_games(spec)?))
}
