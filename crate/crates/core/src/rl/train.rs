use std::io::{self, Write};

use rand::Rng;

use super::{
    ql_update, sarsa_update, select_action, sv_update, terminal_reward, Method, OpponentSpec,
    Policy, QTable, RewardSchedule, RlError, TdParams, Transition, VTable, ValueStore,
    SNAPSHOT_INTERVAL,
};
use crate::game::{Board, Cell, Mark, Outcome};
use crate::oracle::Solver;
use crate::rng::{stream_rng, GameRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// One-based episode number.
    pub episode: u64,
    pub reward: f64,
    pub cumulative_reward: f64,
    pub outcome: Outcome,
    pub agent_first: bool,
}

/// Per-episode terminal rewards and their running sum.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardTrace {
    rows: Vec<TraceRow>,
}

impl RewardTrace {
    pub const CSV_HEADER: &'static str = "episode,reward,cumulative_reward,outcome,agent_first";

    pub fn push(&mut self, reward: f64, outcome: Outcome, agent_first: bool) {
        let cumulative_reward = self.final_cumulative() + reward;
        self.rows.push(TraceRow {
            episode: self.rows.len() as u64 + 1,
            reward,
            cumulative_reward,
            outcome,
            agent_first,
        });
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn final_cumulative(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cumulative_reward)
    }

    pub fn mean_reward(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.final_cumulative() / self.rows.len() as f64
        }
    }

    /// Fraction of episodes ending with `outcome`.
    pub fn rate(&self, outcome: Outcome) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.outcome == outcome).count() as f64 / self.rows.len() as f64
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.episode, r.reward, r.cumulative_reward, r.outcome, r.agent_first
            )?;
        }
        Ok(())
    }
}

/// Opponent move for the training loop. `snapshot` is consulted only by
/// [`OpponentSpec::SelfPlaySnapshot`].
pub fn opponent_move(
    spec: &OpponentSpec,
    board: &Board,
    me: Mark,
    snapshot: Option<&ValueStore>,
    rng: &mut GameRng,
) -> Result<Cell, RlError> {
    let legal = board.legal_moves();
    if legal.is_empty() {
        return Err(RlError::NoLegalMoves);
    }
    let random = |rng: &mut GameRng| legal[rng.random_range(0..legal.len())];
    let optimal = |rng: &mut GameRng| {
        let best = Solver::global()
            .best_moves(board, me)
            .map_err(|e| RlError::IllegalTransition(e.to_string()))?;
        Ok(best[rng.random_range(0..best.len())])
    };
    match *spec {
        OpponentSpec::Random => Ok(random(rng)),
        OpponentSpec::Minimax => optimal(rng),
        OpponentSpec::MixtureRandomMinimax { p_random } => {
            if rng.random::<f64>() < p_random {
                Ok(random(rng))
            } else {
                optimal(rng)
            }
        }
        OpponentSpec::SelfPlaySnapshot => {
            let view = if me == Mark::Nought { board.swapped() } else { *board };
            match snapshot {
                Some(store) => select_action(store, &view, 0.0, rng),
                None => Ok(random(rng)),
            }
        }
    }
}

pub fn train(params: &TdParams, sched: &RewardSchedule) -> Result<(Policy, RewardTrace), RlError> {
    train_with_progress(params, sched, 0, |_| {})
}

/// Trains the agent as Cross, alternating the first mover each episode (the
/// agent opens on even zero-based episodes). Episode `i` draws all of its
/// randomness from stream `i` of the generator keyed by `params.seed`.
///
/// `progress` is called with the number of finished episodes every
/// `progress_every` episodes (never when 0).
pub fn train_with_progress(
    params: &TdParams,
    sched: &RewardSchedule,
    progress_every: u64,
    mut progress: impl FnMut(u64),
) -> Result<(Policy, RewardTrace), RlError> {
    params.validate()?;
    let mut learner = Learner::new(params, sched);
    let mut trace = RewardTrace::default();
    let mut snapshot: Option<ValueStore> = None;
    for episode in 0..params.episodes {
        if params.opponent == OpponentSpec::SelfPlaySnapshot && episode % SNAPSHOT_INTERVAL == 0 {
            snapshot = Some(learner.store.clone());
        }
        let mut rng = stream_rng(params.seed, episode);
        let agent_first = episode % 2 == 0;
        let (reward, outcome) = learner.episode(agent_first, snapshot.as_ref(), &mut rng)?;
        trace.push(reward, outcome, agent_first);
        if progress_every > 0 && (episode + 1) % progress_every == 0 {
            progress(episode + 1);
        }
    }
    let policy = Policy {
        params: *params,
        rewards: *sched,
        store: learner.store,
    };
    Ok((policy, trace))
}

struct Learner<'a> {
    params: &'a TdParams,
    sched: &'a RewardSchedule,
    store: ValueStore,
}

impl<'a> Learner<'a> {
    const AGENT: Mark = Mark::Cross;

    fn new(params: &'a TdParams, sched: &'a RewardSchedule) -> Self {
        let store = if params.method.uses_action_values() {
            ValueStore::Action(QTable::new())
        } else {
            ValueStore::State(VTable::new())
        };
        Learner { params, sched, store }
    }

    fn update_q(&mut self, t: Transition) -> Result<(), RlError> {
        let (alpha, gamma) = (self.params.learning_rate, self.params.discount);
        let ValueStore::Action(q) = &mut self.store else {
            unreachable!("action-value method with a state-value table")
        };
        match self.params.method {
            Method::QLearning => ql_update(q, &t, alpha, gamma)?,
            Method::Sarsa => sarsa_update(q, &t, alpha, gamma)?,
            Method::StateValue => unreachable!(),
        };
        Ok(())
    }

    fn update_v(&mut self, state: &Board, next: &Board, reward: f64) -> Result<(), RlError> {
        let (alpha, gamma) = (self.params.learning_rate, self.params.discount);
        let ValueStore::State(v) = &mut self.store else {
            unreachable!("state-value method with an action-value table")
        };
        sv_update(v, state, next, reward, alpha, gamma)?;
        Ok(())
    }

    /// Plays one game, updating after every agent action. Returns the
    /// terminal reward and outcome.
    fn episode(
        &mut self,
        agent_first: bool,
        snapshot: Option<&ValueStore>,
        rng: &mut GameRng,
    ) -> Result<(f64, Outcome), RlError> {
        let action_values = self.params.method.uses_action_values();
        let mut board = Board::empty();
        let mut to_move = if agent_first { Self::AGENT } else { Self::AGENT.opponent() };
        // Last (state, action) awaiting its bootstrap target.
        let mut pending: Option<(Board, Cell)> = None;
        // Last agent afterstate, for the state-value method.
        let mut last_after: Option<Board> = None;

        loop {
            if to_move == Self::AGENT {
                let action = select_action(&self.store, &board, self.params.epsilon, rng)?;
                if let Some((state, prev_action)) = pending.take() {
                    self.update_q(Transition {
                        state,
                        action: prev_action,
                        reward: 0.0,
                        next_state: board,
                        next_action: Some(action),
                        terminal: false,
                    })?;
                }
                let after = board.with(action, Self::AGENT);
                let outcome = after.outcome();
                let reward = if outcome.is_over() {
                    terminal_reward(outcome, true, agent_first, self.sched)?
                } else {
                    0.0
                };
                if action_values {
                    if outcome.is_over() {
                        self.update_q(Transition {
                            state: board,
                            action,
                            reward,
                            next_state: after,
                            next_action: None,
                            terminal: true,
                        })?;
                    } else {
                        pending = Some((board, action));
                    }
                } else {
                    if let Some(prev) = last_after {
                        self.update_v(&prev, &after, reward)?;
                    }
                    if outcome.is_over() {
                        if let ValueStore::State(v) = &mut self.store {
                            v.set_if_absent(&after, reward);
                        }
                    }
                    last_after = Some(after);
                }
                board = after;
                if outcome.is_over() {
                    return Ok((reward, outcome));
                }
            } else {
                let cell = opponent_move(&self.params.opponent, &board, to_move, snapshot, rng)?;
                board = board.with(cell, to_move);
                let outcome = board.outcome();
                if outcome.is_over() {
                    let reward = terminal_reward(outcome, true, agent_first, self.sched)?;
                    if let Some((state, action)) = pending.take() {
                        self.update_q(Transition {
                            state,
                            action,
                            reward,
                            next_state: board,
                            next_action: None,
                            terminal: true,
                        })?;
                    }
                    if let Some(prev) = last_after {
                        self.update_v(&prev, &board, reward)?;
                    }
                    return Ok((reward, outcome));
                }
            }
            to_move = to_move.opponent();
        }
    }
}
