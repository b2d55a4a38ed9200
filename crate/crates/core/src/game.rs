//! Board representation, rules and terminal detection.
//!
//! Cells are numbered 1-9 row-major with the top-left cell as 1. Boards are
//! small `Copy` values; every move produces a new board.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("cell {0} is already occupied")]
    OccupiedCell(Cell),
    #[error("the game is already over")]
    GameOver,
    #[error("cannot place an empty mark")]
    EmptyMarkRejected,
    #[error("cell number {0} is outside 1..=9")]
    InvalidCell(i64),
    #[error("malformed board key {0:?}")]
    MalformedKey(String),
}

/// Content of a single cell. Drones play `Cross`, the human plays `Nought`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum Mark {
    Cross,
    Nought,
    #[default]
    Empty,
}

impl Mark {
    /// Matrix encoding: +1 for the drone symbol, -1 for the player symbol.
    pub const fn value(self) -> i8 {
        match self {
            Mark::Cross => 1,
            Mark::Nought => -1,
            Mark::Empty => 0,
        }
    }

    pub const fn opponent(self) -> Mark {
        match self {
            Mark::Cross => Mark::Nought,
            Mark::Nought => Mark::Cross,
            Mark::Empty => Mark::Empty,
        }
    }

    pub const fn symbol(self) -> char {
        match self {
            Mark::Cross => 'X',
            Mark::Nought => 'O',
            Mark::Empty => '.',
        }
    }

    pub fn from_symbol(c: char) -> Option<Mark> {
        match c {
            'X' => Some(Mark::Cross),
            'O' => Some(Mark::Nought),
            '.' => Some(Mark::Empty),
            _ => None,
        }
    }
}

/// A board cell number in `1..=9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Cell(u8);

impl Cell {
    pub const CENTER: Cell = Cell(5);

    pub fn new(n: i64) -> Result<Cell, GameError> {
        if (1..=9).contains(&n) {
            Ok(Cell(n as u8))
        } else {
            Err(GameError::InvalidCell(n))
        }
    }

    pub const fn from_index(index: usize) -> Cell {
        assert!(index < 9);
        Cell(index as u8 + 1)
    }

    /// Zero-based row-major index.
    pub const fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub const fn number(self) -> u8 {
        self.0
    }

    pub const fn row(self) -> usize {
        self.index() / 3
    }

    pub const fn col(self) -> usize {
        self.index() % 3
    }

    pub fn all() -> impl Iterator<Item = Cell> {
        (0..9).map(Cell::from_index)
    }
}

impl TryFrom<i64> for Cell {
    type Error = GameError;
    fn try_from(n: i64) -> Result<Self, Self::Error> {
        Cell::new(n)
    }
}

impl From<Cell> for u8 {
    fn from(c: Cell) -> u8 {
        c.0
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Ongoing,
    CrossWins,
    NoughtWins,
    Draw,
}

impl Outcome {
    pub fn is_over(self) -> bool {
        self != Outcome::Ongoing
    }

    pub fn winner(self) -> Option<Mark> {
        match self {
            Outcome::CrossWins => Some(Mark::Cross),
            Outcome::NoughtWins => Some(Mark::Nought),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Ongoing => "Ongoing",
            Outcome::CrossWins => "CrossWins",
            Outcome::NoughtWins => "NoughtWins",
            Outcome::Draw => "Draw",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The eight winning lines as zero-based indices.
pub const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Board {
    cells: [Mark; 9],
}

impl Board {
    pub const fn empty() -> Board {
        Board { cells: [Mark::Empty; 9] }
    }

    pub const fn from_marks(cells: [Mark; 9]) -> Board {
        Board { cells }
    }

    /// Builds a board from lists of occupied cell numbers. Panics on bad input;
    /// intended for fixtures.
    pub fn with_marks(crosses: &[u8], noughts: &[u8]) -> Board {
        let mut cells = [Mark::Empty; 9];
        for &c in crosses {
            cells[Cell::new(c as i64).expect("cell").index()] = Mark::Cross;
        }
        for &c in noughts {
            let i = Cell::new(c as i64).expect("cell").index();
            assert_eq!(cells[i], Mark::Empty, "cell {c} given twice");
            cells[i] = Mark::Nought;
        }
        Board { cells }
    }

    pub fn get(&self, cell: Cell) -> Mark {
        self.cells[cell.index()]
    }

    pub fn marks(&self) -> &[Mark; 9] {
        &self.cells
    }

    pub fn is_empty_cell(&self, cell: Cell) -> bool {
        self.get(cell) == Mark::Empty
    }

    pub fn count(&self, mark: Mark) -> usize {
        self.cells.iter().filter(|&&m| m == mark).count()
    }

    pub fn is_full(&self) -> bool {
        !self.cells.contains(&Mark::Empty)
    }

    /// Places `mark` at `cell`, returning the new board.
    pub fn apply_move(&self, cell: Cell, mark: Mark) -> Result<Board, GameError> {
        if mark == Mark::Empty {
            return Err(GameError::EmptyMarkRejected);
        }
        if self.outcome().is_over() {
            return Err(GameError::GameOver);
        }
        if !self.is_empty_cell(cell) {
            return Err(GameError::OccupiedCell(cell));
        }
        Ok(self.with(cell, mark))
    }

    /// Unchecked placement, used for afterstate lookahead.
    pub fn with(&self, cell: Cell, mark: Mark) -> Board {
        let mut next = *self;
        next.cells[cell.index()] = mark;
        next
    }

    pub fn line_winner(&self) -> Option<Mark> {
        LINES.iter().find_map(|&[a, b, c]| {
            let m = self.cells[a];
            (m != Mark::Empty && m == self.cells[b] && m == self.cells[c]).then_some(m)
        })
    }

    pub fn has_line(&self, mark: Mark) -> bool {
        LINES
            .iter()
            .any(|line| line.iter().all(|&i| self.cells[i] == mark))
    }

    pub fn outcome(&self) -> Outcome {
        match self.line_winner() {
            Some(Mark::Cross) => Outcome::CrossWins,
            Some(Mark::Nought) => Outcome::NoughtWins,
            _ if self.is_full() => Outcome::Draw,
            _ => Outcome::Ongoing,
        }
    }

    /// Empty cells in ascending order; empty once the game is over.
    pub fn legal_moves(&self) -> Vec<Cell> {
        if self.outcome().is_over() {
            return Vec::new();
        }
        self.empty_cells().collect()
    }

    pub fn empty_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        Cell::all().filter(|&c| self.is_empty_cell(c))
    }

    /// Side to move given who opened the game.
    pub fn side_to_move(&self, first_mover: Mark) -> Mark {
        let first = self.count(first_mover);
        let second = self.count(first_mover.opponent());
        if first == second {
            first_mover
        } else {
            first_mover.opponent()
        }
    }

    /// Swaps every Cross with a Nought and vice versa.
    pub fn swapped(&self) -> Board {
        Board {
            cells: self.cells.map(Mark::opponent),
        }
    }

    /// Canonical 9-character key over `X`, `O` and `.`, row-major.
    pub fn encode_key(&self) -> String {
        self.cells.iter().map(|m| m.symbol()).collect()
    }

    pub fn decode_key(key: &str) -> Result<Board, GameError> {
        let malformed = || GameError::MalformedKey(key.to_string());
        if key.len() != 9 {
            return Err(malformed());
        }
        let mut cells = [Mark::Empty; 9];
        for (slot, c) in cells.iter_mut().zip(key.chars()) {
            *slot = Mark::from_symbol(c).ok_or_else(malformed)?;
        }
        Ok(Board { cells })
    }

    /// Compact base-3 index in `0..3^9`.
    pub fn code(&self) -> usize {
        self.cells.iter().fold(0, |acc, m| {
            acc * 3
                + match m {
                    Mark::Empty => 0,
                    Mark::Cross => 1,
                    Mark::Nought => 2,
                }
        })
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in 0..3 {
            let line: String = (0..3)
                .map(|col| {
                    let i = row * 3 + col;
                    match self.cells[i] {
                        Mark::Empty => char::from(b'1' + i as u8),
                        m => m.symbol(),
                    }
                })
                .collect();
            writeln!(f, "{}", line)?;
        }
        Ok(())
    }
}

pub fn apply_move(board: &Board, cell: Cell, mark: Mark) -> Result<Board, GameError> {
    board.apply_move(cell, mark)
}

pub fn outcome(board: &Board) -> Outcome {
    board.outcome()
}

pub fn legal_moves(board: &Board) -> Vec<Cell> {
    board.legal_moves()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cell(n: i64) -> Cell {
        Cell::new(n).unwrap()
    }

    #[test]
    fn mark_encoding() {
        assert_eq!(Mark::Cross.value(), 1);
        assert_eq!(Mark::Nought.value(), -1);
        assert_eq!(Mark::Empty.value(), 0);
    }

    #[test]
    fn apply_move_places_single_mark() {
        let b = Board::empty().apply_move(cell(5), Mark::Cross).unwrap();
        assert_eq!(b, Board::with_marks(&[5], &[]));
        assert_eq!(b.count(Mark::Cross), 1);
        assert_eq!(b.count(Mark::Empty), 8);
    }

    #[test]
    fn apply_move_rejects_occupied_cell() {
        let b = Board::with_marks(&[5], &[]);
        assert_eq!(
            b.apply_move(cell(5), Mark::Nought),
            Err(GameError::OccupiedCell(cell(5)))
        );
    }

    #[test]
    fn apply_move_rejects_finished_game() {
        let b = Board::with_marks(&[1, 2, 3], &[4, 5]);
        for c in [6, 7, 8, 9] {
            assert_eq!(b.apply_move(cell(c), Mark::Nought), Err(GameError::GameOver));
        }
    }

    #[test]
    fn apply_move_rejects_empty_mark() {
        assert_eq!(
            Board::empty().apply_move(cell(1), Mark::Empty),
            Err(GameError::EmptyMarkRejected)
        );
    }

    #[test]
    fn apply_move_leaves_input_untouched() {
        let b = Board::with_marks(&[1], &[]);
        let _ = b.apply_move(cell(2), Mark::Nought).unwrap();
        assert_eq!(b, Board::with_marks(&[1], &[]));
    }

    #[test]
    fn outcome_examples() {
        assert_eq!(Board::with_marks(&[1, 5, 9], &[2, 3]).outcome(), Outcome::CrossWins);
        // X O X / X O O / O X X
        let draw = Board::decode_key("XOXXOOOXX").unwrap();
        assert_eq!(draw.outcome(), Outcome::Draw);
        assert_eq!(Board::empty().outcome(), Outcome::Ongoing);
        assert_eq!(Board::with_marks(&[1, 2], &[3, 5, 7]).outcome(), Outcome::NoughtWins);
    }

    #[test]
    fn legal_moves_examples() {
        assert_eq!(Board::empty().legal_moves(), Cell::all().collect::<Vec<_>>());
        let expected: Vec<Cell> = [1, 2, 3, 4, 6, 7, 8, 9].into_iter().map(cell).collect();
        assert_eq!(Board::with_marks(&[5], &[]).legal_moves(), expected);
        assert!(Board::decode_key("XOXXOOOXX").unwrap().legal_moves().is_empty());
    }

    #[test]
    fn key_examples() {
        assert_eq!(Board::empty().encode_key(), ".........");
        assert_eq!(Board::with_marks(&[1], &[5]).encode_key(), "X...O....");
        assert!(Board::decode_key("X...O...").is_err());
        assert!(Board::decode_key("X...O...Z").is_err());
    }

    #[test]
    fn cell_geometry() {
        assert_eq!(cell(1).row(), 0);
        assert_eq!(cell(1).col(), 0);
        assert_eq!(cell(6).row(), 1);
        assert_eq!(cell(6).col(), 2);
        assert!(Cell::new(0).is_err());
        assert!(Cell::new(10).is_err());
    }

    #[test]
    fn side_to_move_follows_first_mover() {
        let b = Board::with_marks(&[5], &[]);
        assert_eq!(b.side_to_move(Mark::Cross), Mark::Nought);
        let b = Board::with_marks(&[], &[5]);
        assert_eq!(b.side_to_move(Mark::Nought), Mark::Cross);
        assert_eq!(Board::empty().side_to_move(Mark::Nought), Mark::Nought);
    }

    proptest! {
        #[test]
        fn random_games_terminate_within_nine_plies(
            picks in proptest::collection::vec(0usize..9, 9),
            cross_first in any::<bool>(),
        ) {
            let mut board = Board::empty();
            let mut to_move = if cross_first { Mark::Cross } else { Mark::Nought };
            let mut plies = 0;
            while board.outcome() == Outcome::Ongoing {
                let moves = board.legal_moves();
                prop_assert!(!moves.is_empty());
                let next = board.apply_move(moves[picks[plies] % moves.len()], to_move).unwrap();
                prop_assert_eq!(next.count(Mark::Empty) + 1, board.count(Mark::Empty));
                board = next;
                let diff = board.count(Mark::Cross) as i32 - board.count(Mark::Nought) as i32;
                prop_assert!(diff.abs() <= 1);
                to_move = to_move.opponent();
                plies += 1;
            }
            prop_assert!(plies <= 9);
            prop_assert_eq!(decode(&board.encode_key()), board);
        }
    }

    fn decode(key: &str) -> Board {
        Board::decode_key(key).unwrap()
    }
}
