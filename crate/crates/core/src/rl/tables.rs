use std::collections::HashMap;

use rand::Rng;

use super::RlError;
use crate::game::{Board, Cell, Mark};
use crate::rng::GameRng;

/// Action values for one state. Only cells with their bit set in `present`
/// hold an entry.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ActionRow {
    values: [f64; 9],
    present: u16,
}

impl ActionRow {
    const EMPTY: ActionRow = ActionRow { values: [0.0; 9], present: 0 };

    fn get(&self, cell: Cell) -> f64 {
        if self.present & (1 << cell.index()) != 0 {
            self.values[cell.index()]
        } else {
            0.0
        }
    }
}

/// Tabular action values keyed by `(state, cell)`. Missing entries read as 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QTable {
    rows: HashMap<Board, ActionRow>,
}

impl QTable {
    pub fn new() -> QTable {
        QTable::default()
    }

    pub fn get(&self, state: &Board, cell: Cell) -> f64 {
        self.rows.get(state).map_or(0.0, |row| row.get(cell))
    }

    /// Stores a value. Only legal `(state, action)` pairs are accepted.
    pub fn set(&mut self, state: &Board, cell: Cell, value: f64) -> Result<(), RlError> {
        check_legal(state, cell)?;
        let row = self.rows.entry(*state).or_insert(ActionRow::EMPTY);
        row.values[cell.index()] = value;
        row.present |= 1 << cell.index();
        Ok(())
    }

    /// Largest action value over the legal moves of `state`; 0 when the
    /// state is terminal.
    pub fn max_value(&self, state: &Board) -> f64 {
        let row = self.rows.get(state).unwrap_or(&ActionRow::EMPTY);
        state
            .legal_moves()
            .into_iter()
            .map(|c| row.get(c))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
            .unwrap_or(0.0)
    }

    /// Number of stored `(state, cell)` entries.
    pub fn len(&self) -> usize {
        self.rows.values().map(|r| r.present.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    /// All entries in unspecified order.
    pub fn entries(&self) -> impl Iterator<Item = (Board, Cell, f64)> + '_ {
        self.rows.iter().flat_map(|(board, row)| {
            Cell::all()
                .filter(move |c| row.present & (1 << c.index()) != 0)
                .map(move |c| (*board, c, row.values[c.index()]))
        })
    }
}

/// Tabular state values. Missing entries read as 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VTable {
    values: HashMap<Board, f64>,
}

impl VTable {
    pub fn new() -> VTable {
        VTable::default()
    }

    pub fn get(&self, state: &Board) -> f64 {
        self.values.get(state).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, state: &Board, value: f64) {
        self.values.insert(*state, value);
    }

    /// Records `value` only if the state has never been stored.
    pub fn set_if_absent(&mut self, state: &Board, value: f64) {
        self.values.entry(*state).or_insert(value);
    }

    pub fn contains(&self, state: &Board) -> bool {
        self.values.contains_key(state)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Board, f64)> + '_ {
        self.values.iter().map(|(b, v)| (*b, *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValueStore {
    Action(QTable),
    State(VTable),
}

/// One agent step as seen by the update rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: Board,
    pub action: Cell,
    pub reward: f64,
    pub next_state: Board,
    /// Action actually selected in `next_state`; SARSA only.
    pub next_action: Option<Cell>,
    pub terminal: bool,
}

fn check_legal(state: &Board, cell: Cell) -> Result<(), RlError> {
    if state.outcome().is_over() {
        return Err(RlError::IllegalTransition(format!(
            "state {} is terminal",
            state.encode_key()
        )));
    }
    if !state.is_empty_cell(cell) {
        return Err(RlError::IllegalTransition(format!(
            "cell {cell} is occupied in {}",
            state.encode_key()
        )));
    }
    Ok(())
}

fn check_next_state(t: &Transition) -> Result<(), RlError> {
    if !t.terminal && t.next_state.outcome().is_over() {
        return Err(RlError::IllegalTransition(format!(
            "next state {} is terminal but the transition is not",
            t.next_state.encode_key()
        )));
    }
    Ok(())
}

fn td_step(current: f64, target: f64, alpha: f64) -> f64 {
    current + alpha * (target - current)
}

/// Q-learning: bootstraps from the best next action. Returns the new value.
pub fn ql_update(q: &mut QTable, t: &Transition, alpha: f64, gamma: f64) -> Result<f64, RlError> {
    check_legal(&t.state, t.action)?;
    check_next_state(t)?;
    let next = if t.terminal { 0.0 } else { q.max_value(&t.next_state) };
    let value = td_step(q.get(&t.state, t.action), t.reward + gamma * next, alpha);
    q.set(&t.state, t.action, value)?;
    Ok(value)
}

/// SARSA: bootstraps from the action actually taken next. Returns the new value.
pub fn sarsa_update(
    q: &mut QTable,
    t: &Transition,
    alpha: f64,
    gamma: f64,
) -> Result<f64, RlError> {
    check_legal(&t.state, t.action)?;
    check_next_state(t)?;
    let next = if t.terminal {
        0.0
    } else {
        let next_action = t.next_action.ok_or(RlError::MissingNextAction)?;
        check_legal(&t.next_state, next_action)?;
        q.get(&t.next_state, next_action)
    };
    let value = td_step(q.get(&t.state, t.action), t.reward + gamma * next, alpha);
    q.set(&t.state, t.action, value)?;
    Ok(value)
}

/// TD(0) on afterstates. `next_state` is terminal when its outcome is decided,
/// in which case its value is taken as 0. Returns the new value of `state`.
pub fn sv_update(
    v: &mut VTable,
    state: &Board,
    next_state: &Board,
    reward: f64,
    alpha: f64,
    gamma: f64,
) -> Result<f64, RlError> {
    if state.outcome().is_over() {
        return Err(RlError::IllegalTransition(format!(
            "state {} is terminal",
            state.encode_key()
        )));
    }
    let extends = state
        .marks()
        .iter()
        .zip(next_state.marks())
        .all(|(a, b)| *a == Mark::Empty || a == b);
    if !extends {
        return Err(RlError::IllegalTransition(format!(
            "{} does not follow from {}",
            next_state.encode_key(),
            state.encode_key()
        )));
    }
    let next = if next_state.outcome().is_over() { 0.0 } else { v.get(next_state) };
    let value = td_step(v.get(state), reward + gamma * next, alpha);
    v.set(state, value);
    Ok(value)
}

/// Epsilon-greedy choice for Cross on `board`.
///
/// One uniform draw decides exploration (explore iff `u < epsilon`); exploring
/// picks a uniform legal cell. Otherwise the argmax over legal cells is taken,
/// scoring Q(s, a) for action tables and V(afterstate) for state tables, and
/// exact ties are broken uniformly.
pub fn select_action(
    store: &ValueStore,
    board: &Board,
    epsilon: f64,
    rng: &mut GameRng,
) -> Result<Cell, RlError> {
    let legal = board.legal_moves();
    if legal.is_empty() {
        return Err(RlError::NoLegalMoves);
    }
    let explore = rng.random::<f64>() < epsilon;
    if explore {
        return Ok(legal[rng.random_range(0..legal.len())]);
    }
    let scores: Vec<f64> = match store {
        ValueStore::Action(q) => {
            let row = q.rows.get(board).unwrap_or(&ActionRow::EMPTY);
            legal.iter().map(|&c| row.get(c)).collect()
        }
        ValueStore::State(v) => legal
            .iter()
            .map(|&c| v.get(&board.with(c, Mark::Cross)))
            .collect(),
    };
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<Cell> = legal
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s == best)
        .map(|(&c, _)| c)
        .collect();
    Ok(if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    })
}
