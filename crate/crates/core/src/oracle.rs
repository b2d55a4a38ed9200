//! Exhaustive minimax over the full tic-tac-toe game tree.
//!
//! The solver walks every position reachable from the empty board with either
//! side opening, memoizing values keyed on `(board, side to move)`. Values are
//! win/draw/loss from Cross's point of view, with no depth preference.

use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use thiserror::Error;

use crate::game::{Board, Cell, Mark, Outcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("position {key} with {to_move:?} to move is not reachable by legal play")]
    UnreachableBoard { key: String, to_move: Mark },
    #[error("the game is already over")]
    GameOver,
}

/// Game-theoretic value from the Cross player's perspective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameValue(i8);

impl GameValue {
    pub const CROSS_WINS: GameValue = GameValue(1);
    pub const DRAW: GameValue = GameValue(0);
    pub const NOUGHT_WINS: GameValue = GameValue(-1);

    pub fn get(self) -> i8 {
        self.0
    }

    /// Value as seen by `mark` (+1 means `mark` forces a win).
    pub fn for_side(self, mark: Mark) -> i8 {
        match mark {
            Mark::Nought => -self.0,
            _ => self.0,
        }
    }

    fn terminal(outcome: Outcome) -> Option<GameValue> {
        match outcome {
            Outcome::CrossWins => Some(GameValue::CROSS_WINS),
            Outcome::NoughtWins => Some(GameValue::NOUGHT_WINS),
            Outcome::Draw => Some(GameValue::DRAW),
            Outcome::Ongoing => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReachableStats {
    pub state_count: usize,
    pub cross_wins: usize,
    pub nought_wins: usize,
    pub draws: usize,
}

impl ReachableStats {
    pub fn terminal_count(&self) -> usize {
        self.cross_wins + self.nought_wins + self.draws
    }
}

/// Distinct boards reachable by legal play when `first_mover` opens, in BFS
/// order (by ply, then by move order).
pub fn reachable_boards(first_mover: Mark) -> Vec<Board> {
    let mut seen = HashSet::from([Board::empty()]);
    let mut order = vec![Board::empty()];
    let mut queue = VecDeque::from([Board::empty()]);
    while let Some(board) = queue.pop_front() {
        let to_move = board.side_to_move(first_mover);
        for cell in board.legal_moves() {
            let next = board.with(cell, to_move);
            if seen.insert(next) {
                order.push(next);
                queue.push_back(next);
            }
        }
    }
    order
}

/// Union of the boards reachable with either side opening, deduplicated and
/// in a stable order.
pub fn all_reachable_boards() -> Vec<Board> {
    let mut seen = HashSet::new();
    reachable_boards(Mark::Cross)
        .into_iter()
        .chain(reachable_boards(Mark::Nought))
        .filter(|b| seen.insert(*b))
        .collect()
}

pub fn enumerate_reachable(first_mover: Mark) -> ReachableStats {
    let mut stats = ReachableStats::default();
    for board in reachable_boards(first_mover) {
        stats.state_count += 1;
        match board.outcome() {
            Outcome::CrossWins => stats.cross_wins += 1,
            Outcome::NoughtWins => stats.nought_wins += 1,
            Outcome::Draw => stats.draws += 1,
            Outcome::Ongoing => {}
        }
    }
    stats
}

/// Memoized minimax over every reachable position. Build once and share.
///
/// The memo is a dense table indexed by `(board code, side to move)`, where the
/// code is the base-3 image of the board key; unreachable slots stay empty.
pub struct Solver {
    memo: Vec<Option<GameValue>>,
}

const SLOTS: usize = 19_683 * 2;

fn slot(board: &Board, to_move: Mark) -> usize {
    board.code() * 2 + usize::from(to_move == Mark::Nought)
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Solver {
        let mut solver = Solver { memo: vec![None; SLOTS] };
        for first in [Mark::Cross, Mark::Nought] {
            solver.search(Board::empty(), first);
        }
        solver
    }

    /// Process-wide solver, built on first use.
    pub fn global() -> &'static Solver {
        static SOLVER: OnceLock<Solver> = OnceLock::new();
        SOLVER.get_or_init(Solver::new)
    }

    fn search(&mut self, board: Board, to_move: Mark) -> GameValue {
        if let Some(v) = self.memo[slot(&board, to_move)] {
            return v;
        }
        let value = match GameValue::terminal(board.outcome()) {
            Some(v) => v,
            None => {
                let children: Vec<GameValue> = board
                    .legal_moves()
                    .into_iter()
                    .map(|cell| self.search(board.with(cell, to_move), to_move.opponent()))
                    .collect();
                let best = match to_move {
                    Mark::Cross => children.iter().max(),
                    _ => children.iter().min(),
                };
                *best.expect("ongoing board has a legal move")
            }
        };
        self.memo[slot(&board, to_move)] = Some(value);
        value
    }

    fn lookup(&self, board: &Board, to_move: Mark) -> Option<GameValue> {
        self.memo[slot(board, to_move)]
    }

    /// Number of memoized `(board, side to move)` entries.
    pub fn len(&self) -> usize {
        self.memo.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Terminal boards are accepted with either side to move as long as the
    /// board itself is reachable.
    pub fn value(&self, board: &Board, to_move: Mark) -> Result<GameValue, OracleError> {
        let found = self.lookup(board, to_move).or_else(|| {
            if board.outcome().is_over() {
                self.lookup(board, to_move.opponent())
            } else {
                None
            }
        });
        found.ok_or_else(|| OracleError::UnreachableBoard {
            key: board.encode_key(),
            to_move,
        })
    }

    /// Every move achieving the position's minimax value, ascending.
    pub fn best_moves(&self, board: &Board, to_move: Mark) -> Result<Vec<Cell>, OracleError> {
        let target = self.value(board, to_move)?;
        if board.outcome().is_over() {
            return Err(OracleError::GameOver);
        }
        Ok(board
            .legal_moves()
            .into_iter()
            .filter(|&cell| self.lookup(&board.with(cell, to_move), to_move.opponent()) == Some(target))
            .collect())
    }
}

pub fn minimax_value(board: &Board, to_move: Mark) -> Result<GameValue, OracleError> {
    Solver::global().value(board, to_move)
}

pub fn best_moves(board: &Board, to_move: Mark) -> Result<Vec<Cell>, OracleError> {
    Solver::global().best_moves(board, to_move)
}

/// Plain recursive minimax without memoization or reachability checks.
pub fn minimax_value_unmemoized(board: &Board, to_move: Mark) -> GameValue {
    if let Some(v) = GameValue::terminal(board.outcome()) {
        return v;
    }
    let values = board
        .legal_moves()
        .into_iter()
        .map(|cell| minimax_value_unmemoized(&board.with(cell, to_move), to_move.opponent()));
    match to_move {
        Mark::Cross => values.max(),
        _ => values.min(),
    }
    .expect("ongoing board has a legal move")
}
