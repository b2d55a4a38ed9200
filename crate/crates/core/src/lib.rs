//! Core of the drone-swarm tic-tac-toe system: game rules, a minimax oracle,
//! tabular TD agents, the rule-based Improved Basic strategy, board vision,
//! a kinematic swarm simulator and a tournament harness.

pub mod game;
pub mod ib;
pub mod oracle;
pub mod rl;
pub mod rng;
pub mod sim;
pub mod tournament;
pub mod vision;

pub use game::{Board, Cell, GameError, Mark, Outcome};
