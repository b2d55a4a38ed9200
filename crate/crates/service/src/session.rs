//! One game between a human (always Nought) and the drone swarm (always
//! Cross). Pure game logic; the HTTP layer and the store wrap it.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use swarmplay_core::ib::IbConfig;
use swarmplay_core::rl::load_policy;
use swarmplay_core::rng::{root_rng, GameRng};
use swarmplay_core::sim::{SimConfig, Swarm, TelemetryRecord};
use swarmplay_core::tournament::Strategy;
use swarmplay_core::vision::{detect_board, diff_move, GrayImage, VisionConfig};
use swarmplay_core::{Board, Cell, Mark, Outcome};

use crate::error::ServiceError;

pub const HUMAN: Mark = Mark::Nought;
pub const DRONES: Mark = Mark::Cross;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyConfig {
    /// Greedy play from a trained policy file; the server default is used
    /// when no path is given.
    Rl {
        #[serde(default)]
        policy_path: Option<PathBuf>,
    },
    Ib(IbConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstMover {
    Human,
    Drones,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub strategy: StrategyConfig,
    pub first_mover: FirstMover,
    #[serde(default)]
    pub vision_enabled: bool,
    /// Simulator settings; the server default applies when omitted.
    #[serde(default)]
    pub sim: Option<SimConfig>,
    /// Pace the telemetry stream at 100 records per wall-clock second.
    #[serde(default)]
    pub realtime: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mover {
    Human,
    Drones,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub mover: Mover,
    pub cell: Cell,
    /// Wall-clock time of the move, milliseconds since the Unix epoch.
    pub at_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Turn {
    Human,
    Drones,
    None,
}

/// Snapshot returned by the API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub board: String,
    pub status: Outcome,
    pub turn: Turn,
    pub first_mover: FirstMover,
    pub strategy: String,
    pub vision_enabled: bool,
    pub history: Vec<HistoryEntry>,
    pub drones: Vec<TelemetryRecord>,
    /// Number of telemetry records produced so far; a stream cursor.
    pub telemetry_len: usize,
}

/// Result of a human move plus the drones' reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveOutcome {
    pub human: Cell,
    pub drones: Option<Cell>,
    /// Telemetry of the reply flight is `telemetry_from..session.telemetry_len`.
    pub telemetry_from: usize,
    pub session: SessionView,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug)]
pub struct Session {
    id: String,
    cfg: SessionConfig,
    strategy: Strategy,
    board: Board,
    history: Vec<HistoryEntry>,
    swarm: Swarm,
    rng: GameRng,
    telemetry: Vec<TelemetryRecord>,
    last_detected: Board,
}

impl Session {
    /// Builds a session and, when the drones open, plays their first move.
    pub fn new(
        id: String,
        cfg: SessionConfig,
        default_policy: Option<&Path>,
        default_sim: SimConfig,
    ) -> Result<Session, ServiceError> {
        let strategy = match &cfg.strategy {
            StrategyConfig::Rl { policy_path } => {
                let path = policy_path
                    .as_deref()
                    .or(default_policy)
                    .ok_or_else(|| ServiceError::InvalidConfig("no policy path configured".into()))?;
                Strategy::Rl(Arc::new(load_policy(path)?))
            }
            StrategyConfig::Ib(ib) => {
                if !(0.0..=1.0).contains(&ib.p_random_opening) || !(0.0..=1.0).contains(&ib.p_random_midgame) {
                    return Err(ServiceError::InvalidConfig("IB probabilities must be in [0, 1]".into()));
                }
                Strategy::Ib(*ib)
            }
        };
        let swarm = Swarm::new(cfg.sim.unwrap_or(default_sim))
            .map_err(|e| ServiceError::InvalidConfig(e.to_string()))?;
        let mut session = Session {
            id,
            rng: root_rng(cfg.seed),
            cfg,
            strategy,
            board: Board::empty(),
            history: Vec::new(),
            swarm,
            telemetry: Vec::new(),
            last_detected: Board::empty(),
        };
        if session.cfg.first_mover == FirstMover::Drones {
            session.play_drones()?;
        }
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn board(&self) -> Board {
        self.board
    }

    pub fn status(&self) -> Outcome {
        self.board.outcome()
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn telemetry(&self) -> &[TelemetryRecord] {
        &self.telemetry
    }

    pub fn is_over(&self) -> bool {
        self.status().is_over()
    }

    fn first_mark(&self) -> Mark {
        match self.cfg.first_mover {
            FirstMover::Human => HUMAN,
            FirstMover::Drones => DRONES,
        }
    }

    pub fn turn(&self) -> Turn {
        if self.is_over() {
            Turn::None
        } else if self.board.side_to_move(self.first_mark()) == HUMAN {
            Turn::Human
        } else {
            Turn::Drones
        }
    }

    fn record(&mut self, mover: Mover, cell: Cell) -> Result<(), ServiceError> {
        let mark = if mover == Mover::Human { HUMAN } else { DRONES };
        self.board = self.board.apply_move(cell, mark)?;
        self.history.push(HistoryEntry { mover, cell, at_ms: now_ms() });
        self.check_history()
    }

    /// The board must always equal the history replayed from empty.
    fn check_history(&self) -> Result<(), ServiceError> {
        let mut replay = Board::empty();
        for h in &self.history {
            let mark = if h.mover == Mover::Human { HUMAN } else { DRONES };
            replay = replay.apply_move(h.cell, mark)?;
        }
        if replay == self.board {
            Ok(())
        } else {
            Err(ServiceError::Internal("board diverged from history".into()))
        }
    }

    fn ensure_turn(&self, expected: Turn) -> Result<(), ServiceError> {
        match self.turn() {
            Turn::None => Err(ServiceError::GameOver),
            t if t == expected => Ok(()),
            Turn::Human => Err(ServiceError::OutOfTurn("drones'")),
            Turn::Drones => Err(ServiceError::OutOfTurn("human's")),
        }
    }

    /// Chooses and flies the drones' move.
    pub fn play_drones(&mut self) -> Result<Cell, ServiceError> {
        self.ensure_turn(Turn::Drones)?;
        let first = self.first_mark();
        let cell = self.strategy.choose(&self.board, DRONES, first, &mut self.rng)?;
        let log = self.swarm.run_flight(cell)?;
        self.record(Mover::Drones, cell)?;
        self.telemetry.extend(log);
        self.last_detected = self.board;
        Ok(cell)
    }

    /// Applies the human's move and, if the game goes on, the drones' reply.
    pub fn play_human(&mut self, cell: Cell) -> Result<MoveOutcome, ServiceError> {
        self.ensure_turn(Turn::Human)?;
        let telemetry_from = self.telemetry.len();
        self.record(Mover::Human, cell)?;
        self.last_detected = self.board;
        let drones = if self.is_over() { None } else { Some(self.play_drones()?) };
        Ok(MoveOutcome { human: cell, drones, telemetry_from, session: self.view() })
    }

    /// Reads the human's move off an overhead frame.
    pub fn play_image(&mut self, img: &GrayImage, vision: &VisionConfig) -> Result<MoveOutcome, ServiceError> {
        if !self.cfg.vision_enabled {
            return Err(ServiceError::VisionDisabled);
        }
        self.ensure_turn(Turn::Human)?;
        let seen = detect_board(img, vision)?;
        let cell = diff_move(&self.last_detected, &seen)?;
        self.play_human(cell)
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            board: self.board.encode_key(),
            status: self.status(),
            turn: self.turn(),
            first_mover: self.cfg.first_mover,
            strategy: self.strategy.to_string(),
            vision_enabled: self.cfg.vision_enabled,
            history: self.history.clone(),
            drones: self.swarm.snapshot(),
            telemetry_len: self.telemetry.len(),
        }
    }

    /// One-line JSON summary for experiment logs.
    pub fn transcript(&self) -> serde_json::Value {
        serde_json::json!({
            "id": self.id,
            "strategy": self.strategy.to_string(),
            "first_mover": self.cfg.first_mover,
            "seed": self.cfg.seed,
            "moves": self.history.iter().map(|h| (h.mover, h.cell)).collect::<Vec<_>>(),
            "outcome": self.status(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use swarmplay_core::sim::Phase;
    use swarmplay_core::vision::{render_board, RenderStyle};

    fn cell(n: i64) -> Cell {
        Cell::new(n).unwrap()
    }

    fn ib_cfg(first_mover: FirstMover, ib: IbConfig) -> SessionConfig {
        SessionConfig {
            strategy: StrategyConfig::Ib(ib),
            first_mover,
            vision_enabled: true,
            sim: None,
            realtime: false,
            seed: 1,
        }
    }

    fn session(cfg: SessionConfig) -> Session {
        Session::new("s".into(), cfg, None, SimConfig::default()).unwrap()
    }

    #[test]
    fn drones_first_with_forced_centre_opening() {
        let ib = IbConfig { p_random_opening: 0.0, ..Default::default() };
        let s = session(ib_cfg(FirstMover::Drones, ib));
        assert_eq!(s.board().encode_key(), "....X....");
        assert_eq!(s.turn(), Turn::Human);
        let last = s.telemetry().last().unwrap();
        assert_eq!(last.phase, Phase::Landed);
    }

    #[test]
    fn human_first_session_starts_empty() {
        let s = session(ib_cfg(FirstMover::Human, IbConfig::default()));
        let v = s.view();
        assert_eq!(v.board, ".........");
        assert_eq!(v.turn, Turn::Human);
        assert_eq!(v.status, Outcome::Ongoing);
        assert_eq!(v.telemetry_len, 0);
    }

    #[test]
    fn exchange_adds_two_history_entries() {
        let mut s = session(ib_cfg(FirstMover::Human, IbConfig::default()));
        let out = s.play_human(cell(1)).unwrap();
        let reply = out.drones.unwrap();
        assert_ne!(reply, cell(1));
        assert_eq!(out.session.history.len(), 2);
        assert_eq!(out.telemetry_from, 0);
        assert!(out.session.telemetry_len > 0);
        assert_eq!(s.board().get(reply), Mark::Cross);
    }

    #[test]
    fn turn_and_occupancy_errors() {
        let mut s = session(ib_cfg(FirstMover::Human, IbConfig::default()));
        assert!(matches!(s.play_drones(), Err(ServiceError::OutOfTurn(_))));
        let reply = s.play_human(cell(5)).unwrap().drones.unwrap();
        assert!(matches!(s.play_human(reply), Err(ServiceError::OccupiedCell(c)) if c == reply));
        assert!(matches!(s.play_human(cell(5)), Err(ServiceError::OccupiedCell(_))));
    }

    #[test]
    fn finished_game_rejects_moves() {
        // Minimax-like IB with no randomness still cannot lose; play until over.
        let ib = IbConfig { p_random_opening: 0.0, p_random_midgame: 0.0, seed: 0 };
        let mut s = session(ib_cfg(FirstMover::Drones, ib));
        while !s.is_over() {
            let free = s.board().legal_moves()[0];
            s.play_human(free).unwrap();
        }
        assert_eq!(s.turn(), Turn::None);
        assert!(matches!(s.play_human(cell(1)), Err(ServiceError::GameOver)));
        assert!(matches!(s.play_drones(), Err(ServiceError::GameOver)));
        assert!(s.transcript()["moves"].as_array().unwrap().len() >= 5);
    }

    #[test]
    fn image_move_matches_cell_move() {
        let vision = VisionConfig::default();
        let style = RenderStyle::default();
        let mut by_image = session(ib_cfg(FirstMover::Human, IbConfig::default()));
        let mut by_cell = session(ib_cfg(FirstMover::Human, IbConfig::default()));
        let frame = render_board(&by_image.board().with(cell(7), HUMAN), &style, None);
        let a = by_image.play_image(&frame, &vision).unwrap();
        let b = by_cell.play_human(cell(7)).unwrap();
        assert_eq!((a.human, a.drones), (b.human, b.drones));

        let same = render_board(&by_image.board(), &style, None);
        assert!(matches!(by_image.play_image(&same, &vision), Err(ServiceError::Vision(_))));
        let two = by_image.board().with(cell(1), HUMAN);
        let free = two.legal_moves()[0];
        let two = render_board(&two.with(free, HUMAN), &style, None);
        let err = by_image.play_image(&two, &vision).unwrap_err();
        assert_eq!(err.code(), "MultipleChanges");
    }

    #[test]
    fn image_requires_vision_flag() {
        let mut cfg = ib_cfg(FirstMover::Human, IbConfig::default());
        cfg.vision_enabled = false;
        let mut s = session(cfg);
        let frame = render_board(&Board::empty(), &RenderStyle::default(), None);
        assert!(matches!(s.play_image(&frame, &VisionConfig::default()), Err(ServiceError::VisionDisabled)));
    }

    #[test]
    fn missing_policy_is_a_load_failure() {
        let cfg = SessionConfig {
            strategy: StrategyConfig::Rl { policy_path: Some("/nonexistent/policy.json".into()) },
            ..ib_cfg(FirstMover::Human, IbConfig::default())
        };
        let err = Session::new("s".into(), cfg, None, SimConfig::default()).unwrap_err();
        assert_eq!(err.code(), "PolicyLoadFailure");
    }

    #[test]
    fn same_seed_same_transcript() {
        let play = || {
            let mut s = session(ib_cfg(FirstMover::Drones, IbConfig::default()));
            while !s.is_over() {
                let free = *s.board().legal_moves().last().unwrap();
                s.play_human(free).unwrap();
            }
            (s.history().iter().map(|h| (h.mover, h.cell)).collect::<Vec<_>>(), s.status(), s.telemetry().to_vec())
        };
        assert_eq!(play(), play());
    }
}
