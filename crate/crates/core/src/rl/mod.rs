//! Tabular temporal-difference learning for the drone side.
//!
//! Three variants share one training loop: Q-learning and SARSA over an
//! action-value table, and a state-value method over afterstates (the board
//! right after the agent's own move). Tables always describe positions from
//! Cross's point of view; a policy asked to play Nought looks up the board
//! with marks swapped.

mod persist;
mod tables;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Board, Cell, Mark, Outcome};
use crate::rng::GameRng;

pub use persist::{
    load_policy, policy_from_json, policy_to_json, save_policy, PolicyFileError, POLICY_FORMAT,
};
pub use tables::{
    ql_update, sarsa_update, select_action, sv_update, QTable, Transition, VTable, ValueStore,
};
pub use train::{opponent_move, train, train_with_progress, RewardTrace, TraceRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RlError {
    #[error("invalid training parameters: {0}")]
    InvalidParams(String),
    #[error("illegal transition: {0}")]
    IllegalTransition(String),
    #[error("SARSA transition into a non-terminal state needs the next action")]
    MissingNextAction,
    #[error("no legal moves on this board")]
    NoLegalMoves,
    #[error("terminal reward requested for an ongoing game")]
    OngoingGame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "QL")]
    QLearning,
    #[serde(rename = "SARSA")]
    Sarsa,
    #[serde(rename = "SV")]
    StateValue,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::QLearning, Method::Sarsa, Method::StateValue];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::QLearning => "QL",
            Method::Sarsa => "SARSA",
            Method::StateValue => "SV",
        }
    }

    pub fn uses_action_values(self) -> bool {
        self != Method::StateValue
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = RlError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ql" | "q" | "qlearning" | "q-learning" => Ok(Method::QLearning),
            "sarsa" => Ok(Method::Sarsa),
            "sv" | "state-value" => Ok(Method::StateValue),
            other => Err(RlError::InvalidParams(format!("unknown method {other:?}"))),
        }
    }
}

/// Who the agent trains against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpponentSpec {
    Random,
    Minimax,
    /// Random move with probability `p_random`, otherwise a minimax-optimal move.
    MixtureRandomMinimax { p_random: f64 },
    /// Greedy play from a frozen copy of the agent's own table, refreshed
    /// every [`SNAPSHOT_INTERVAL`] episodes.
    SelfPlaySnapshot,
}

pub const SNAPSHOT_INTERVAL: u64 = 1_000;

impl Default for OpponentSpec {
    fn default() -> Self {
        OpponentSpec::MixtureRandomMinimax { p_random: 0.5 }
    }
}

impl FromStr for OpponentSpec {
    type Err = RlError;

    /// `random`, `minimax`, `self-play`, or `mixture[:p]` (default p = 0.5).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let (kind, arg) = match lower.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (lower.as_str(), None),
        };
        match (kind, arg) {
            ("random", None) => Ok(OpponentSpec::Random),
            ("minimax", None) => Ok(OpponentSpec::Minimax),
            ("self-play" | "selfplay" | "snapshot", None) => Ok(OpponentSpec::SelfPlaySnapshot),
            ("mixture", p) => {
                let p_random = match p {
                    Some(p) => p
                        .parse()
                        .map_err(|_| RlError::InvalidParams(format!("bad mixture weight {p:?}")))?,
                    None => 0.5,
                };
                Ok(OpponentSpec::MixtureRandomMinimax { p_random })
            }
            _ => Err(RlError::InvalidParams(format!("unknown opponent {s:?}"))),
        }
    }
}

/// Terminal rewards for the agent. Non-terminal steps always reward 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSchedule {
    pub win: f64,
    pub lose: f64,
    pub draw_first_mover: f64,
    pub draw_second_mover: f64,
}

impl Default for RewardSchedule {
    fn default() -> Self {
        RewardSchedule {
            win: 1.0,
            lose: -1.0,
            draw_first_mover: 0.1,
            draw_second_mover: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdParams {
    pub method: Method,
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon: f64,
    pub episodes: u64,
    pub seed: u64,
    pub opponent: OpponentSpec,
}

impl Default for TdParams {
    fn default() -> Self {
        TdParams {
            method: Method::QLearning,
            learning_rate: 0.2,
            discount: 0.9,
            epsilon: 0.3,
            episodes: 50_000,
            seed: 1,
            opponent: OpponentSpec::default(),
        }
    }
}

impl TdParams {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |msg: String| Err(RlError::InvalidParams(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning rate {} not in (0, 1]", self.learning_rate));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return bad(format!("discount {} not in [0, 1]", self.discount));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon {} not in [0, 1]", self.epsilon));
        }
        if self.episodes == 0 {
            return bad("episodes must be at least 1".into());
        }
        if let OpponentSpec::MixtureRandomMinimax { p_random } = self.opponent {
            if !(0.0..=1.0).contains(&p_random) {
                return bad(format!("mixture weight {p_random} not in [0, 1]"));
            }
        }
        Ok(())
    }
}

pub fn terminal_reward(
    outcome: Outcome,
    agent_is_cross: bool,
    agent_moved_first: bool,
    sched: &RewardSchedule,
) -> Result<f64, RlError> {
    let agent = if agent_is_cross { Mark::Cross } else { Mark::Nought };
    match outcome {
        Outcome::Ongoing => Err(RlError::OngoingGame),
        Outcome::Draw if agent_moved_first => Ok(sched.draw_first_mover),
        Outcome::Draw => Ok(sched.draw_second_mover),
        o if o.winner() == Some(agent) => Ok(sched.win),
        _ => Ok(sched.lose),
    }
}

/// A trained table together with the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub params: TdParams,
    pub rewards: RewardSchedule,
    pub store: ValueStore,
}

impl Policy {
    pub fn method(&self) -> Method {
        self.params.method
    }

    /// Greedy move for `me`, ties broken with `rng`.
    pub fn choose(&self, board: &Board, me: Mark, rng: &mut GameRng) -> Result<Cell, RlError> {
        let view = if me == Mark::Nought { board.swapped() } else { *board };
        select_action(&self.store, &view, 0.0, rng)
    }

    pub fn entry_count(&self) -> usize {
        match &self.store {
            ValueStore::Action(q) => q.len(),
            ValueStore::State(v) => v.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_schedule_defaults() {
        let s = RewardSchedule::default();
        assert_eq!((s.win, s.lose, s.draw_first_mover, s.draw_second_mover), (1.0, -1.0, 0.1, 0.5));
    }

    #[test]
    fn terminal_rewards() {
        let s = RewardSchedule::default();
        assert_eq!(terminal_reward(Outcome::CrossWins, true, true, &s), Ok(1.0));
        assert_eq!(terminal_reward(Outcome::CrossWins, true, false, &s), Ok(1.0));
        assert_eq!(terminal_reward(Outcome::Draw, true, true, &s), Ok(0.1));
        assert_eq!(terminal_reward(Outcome::Draw, true, false, &s), Ok(0.5));
        assert_eq!(terminal_reward(Outcome::NoughtWins, true, true, &s), Ok(-1.0));
        assert_eq!(terminal_reward(Outcome::NoughtWins, true, false, &s), Ok(-1.0));
        assert_eq!(terminal_reward(Outcome::NoughtWins, false, false, &s), Ok(1.0));
        assert_eq!(terminal_reward(Outcome::Ongoing, true, true, &s), Err(RlError::OngoingGame));
    }

    #[test]
    fn params_validation() {
        assert!(TdParams::default().validate().is_ok());
        let bad = [
            TdParams { learning_rate: 0.0, ..Default::default() },
            TdParams { learning_rate: 1.5, ..Default::default() },
            TdParams { discount: -0.1, ..Default::default() },
            TdParams { epsilon: 1.5, ..Default::default() },
            TdParams { epsilon: f64::NAN, ..Default::default() },
            TdParams { episodes: 0, ..Default::default() },
            TdParams {
                opponent: OpponentSpec::MixtureRandomMinimax { p_random: 2.0 },
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(matches!(p.validate(), Err(RlError::InvalidParams(_))), "{p:?}");
        }
    }

    #[test]
    fn parse_method_and_opponent() {
        assert_eq!("ql".parse::<Method>(), Ok(Method::QLearning));
        assert_eq!("SARSA".parse::<Method>(), Ok(Method::Sarsa));
        assert_eq!("sv".parse::<Method>(), Ok(Method::StateValue));
        assert!("td".parse::<Method>().is_err());
        assert_eq!("random".parse::<OpponentSpec>(), Ok(OpponentSpec::Random));
        assert_eq!(
            "mixture:0.25".parse::<OpponentSpec>(),
            Ok(OpponentSpec::MixtureRandomMinimax { p_random: 0.25 })
        );
        assert_eq!("mixture".parse::<OpponentSpec>(), Ok(OpponentSpec::default()));
    }
}
