//! Improved Basic strategy: win, else block, else build a two-in-line, with
//! deliberate random moves mixed in to make the drones beatable.
//!
//! The drones always play Cross here. Random draws happen in a fixed order so
//! a given generator state always yields the same move: the opening and
//! mid-game branches each take one uniform `f64` (random branch iff
//! `u < p`), followed by one index draw if a random cell is needed. The win
//! and block steps consume no randomness.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Board, Cell, Mark, LINES};
use crate::rng::GameRng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IbError {
    #[error("it is not the drones' turn")]
    NotDronesTurn,
    #[error("the game is already over")]
    GameOver,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IbConfig {
    /// Chance of a random opening instead of the centre when drones start.
    pub p_random_opening: f64,
    /// Chance of a random move instead of building a two-in-line.
    pub p_random_midgame: f64,
    pub seed: u64,
}

impl Default for IbConfig {
    fn default() -> Self {
        IbConfig {
            p_random_opening: 0.5,
            p_random_midgame: 0.5,
            seed: 0,
        }
    }
}

/// Lowest empty cell that completes a line of `mark`.
pub fn find_winning_cell(board: &Board, mark: Mark) -> Option<Cell> {
    Cell::all()
        .filter(|&c| board.is_empty_cell(c))
        .find(|&c| board.with(c, mark).has_line(mark))
}

/// Lowest empty cell that leaves Cross with two marks in some line whose
/// third cell is still empty.
pub fn find_two_in_line_cell(board: &Board) -> Option<Cell> {
    let marks = board.marks();
    Cell::all().filter(|&c| board.is_empty_cell(c)).find(|&c| {
        LINES.iter().filter(|line| line.contains(&c.index())).any(|line| {
            let crosses = line.iter().filter(|&&i| marks[i] == Mark::Cross).count();
            let empties = line.iter().filter(|&&i| marks[i] == Mark::Empty).count();
            crosses == 1 && empties == 2
        })
    })
}

fn random_cell(board: &Board, rng: &mut GameRng) -> Cell {
    let empty: Vec<Cell> = board.empty_cells().collect();
    empty[rng.random_range(0..empty.len())]
}

pub fn ib_move(
    board: &Board,
    cfg: &IbConfig,
    rng: &mut GameRng,
    drones_move_first: bool,
) -> Result<Cell, IbError> {
    if board.outcome().is_over() {
        return Err(IbError::GameOver);
    }
    let first = if drones_move_first { Mark::Cross } else { Mark::Nought };
    if board.side_to_move(first) != Mark::Cross {
        return Err(IbError::NotDronesTurn);
    }
    if let Some(cell) = find_winning_cell(board, Mark::Cross) {
        return Ok(cell);
    }
    if let Some(cell) = find_winning_cell(board, Mark::Nought) {
        return Ok(cell);
    }
    if drones_move_first && *board == Board::empty() {
        return Ok(if rng.random::<f64>() < cfg.p_random_opening {
            random_cell(board, rng)
        } else {
            Cell::CENTER
        });
    }
    if rng.random::<f64>() < cfg.p_random_midgame {
        return Ok(random_cell(board, rng));
    }
    Ok(find_two_in_line_cell(board).unwrap_or_else(|| random_cell(board, rng)))
}
