//! In-memory session registry with idle expiry and optional transcript logs.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use swarmplay_core::sim::TelemetryRecord;
use swarmplay_core::vision::read_pnm;
use swarmplay_core::Cell;
use tokio::sync::watch;

use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::session::{MoveOutcome, Session, SessionConfig, SessionView};

pub const TRANSCRIPT_FILE: &str = "transcripts.ndjson";

/// Telemetry progress broadcast to stream consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub len: usize,
    /// No more records will arrive: game over or session expired.
    pub closed: bool,
}

struct Entry {
    session: Session,
    last_active: Instant,
    logged: bool,
}

pub struct SessionHandle {
    entry: Mutex<Entry>,
    progress: watch::Sender<Progress>,
}

impl SessionHandle {
    fn lock(&self) -> MutexGuard<'_, Entry> {
        self.entry.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn realtime(&self) -> bool {
        self.lock().session.config().realtime
    }

    pub fn subscribe(&self) -> watch::Receiver<Progress> {
        self.progress.subscribe()
    }

    /// Records from index `from` onwards plus whether the stream is finished.
    pub fn telemetry_since(&self, from: usize) -> (Vec<TelemetryRecord>, bool) {
        let entry = self.lock();
        let all = entry.session.telemetry();
        let records = all.get(from..).map(<[_]>::to_vec).unwrap_or_default();
        (records, *self.progress.borrow() == Progress { len: all.len(), closed: true })
    }
}

pub struct SessionStore {
    cfg: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<SessionHandle>>>,
}

impl SessionStore {
    pub fn new(cfg: ServiceConfig) -> SessionStore {
        SessionStore { cfg, sessions: Mutex::new(HashMap::new()) }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    fn map(&self) -> MutexGuard<'_, HashMap<String, Arc<SessionHandle>>> {
        self.sessions.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn len(&self) -> usize {
        self.map().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn handle(&self, id: &str) -> Result<Arc<SessionHandle>, ServiceError> {
        self.map()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn create(&self, cfg: SessionConfig) -> Result<SessionView, ServiceError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::new(id.clone(), cfg, self.cfg.policy_path.as_deref(), self.cfg.sim)?;
        let view = session.view();
        let (progress, _) = watch::channel(Progress { len: 0, closed: false });
        let handle = Arc::new(SessionHandle {
            entry: Mutex::new(Entry { session, last_active: Instant::now(), logged: false }),
            progress,
        });
        self.after_mutation(&handle, &mut handle.lock())?;
        self.map().insert(id, handle);
        Ok(view)
    }

    pub fn view(&self, id: &str) -> Result<SessionView, ServiceError> {
        let handle = self.handle(id)?;
        let mut entry = handle.lock();
        entry.last_active = Instant::now();
        Ok(entry.session.view())
    }

    fn mutate(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<MoveOutcome, ServiceError>,
    ) -> Result<MoveOutcome, ServiceError> {
        let handle = self.handle(id)?;
        let mut entry = handle.lock();
        entry.last_active = Instant::now();
        let result = f(&mut entry.session);
        self.after_mutation(&handle, &mut entry)?;
        result
    }

    pub fn submit_move(&self, id: &str, cell: Cell) -> Result<MoveOutcome, ServiceError> {
        self.mutate(id, |s| s.play_human(cell))
    }

    /// Accepts a PGM or PPM frame of the board.
    pub fn submit_image(&self, id: &str, bytes: &[u8]) -> Result<MoveOutcome, ServiceError> {
        let img = read_pnm(bytes)?;
        let vision = self.cfg.vision;
        self.mutate(id, |s| s.play_image(&img, &vision))
    }

    fn after_mutation(&self, handle: &SessionHandle, entry: &mut Entry) -> Result<(), ServiceError> {
        let over = entry.session.is_over();
        handle.progress.send_replace(Progress { len: entry.session.telemetry().len(), closed: over });
        if over && !entry.logged {
            entry.logged = true;
            self.log_transcript(&entry.session)?;
        }
        Ok(())
    }

    fn log_transcript(&self, session: &Session) -> Result<(), ServiceError> {
        let Some(dir) = &self.cfg.transcript_dir else { return Ok(()) };
        let io = |e: std::io::Error| ServiceError::Internal(format!("transcript: {e}"));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(TRANSCRIPT_FILE))
            .map_err(io)?;
        writeln!(file, "{}", session.transcript()).map_err(io)
    }

    /// Drops sessions idle for longer than the configured limit, closing
    /// their telemetry streams. Returns how many were removed.
    pub fn expire_idle(&self, now: Instant) -> usize {
        let limit = Duration::from_secs(self.cfg.session_idle_secs);
        let mut map = self.map();
        let stale: Vec<String> = map
            .iter()
            .filter(|(_, h)| now.saturating_duration_since(h.lock().last_active) >= limit)
            .map(|(id, _)| id.clone())
            .collect();
        for id in &stale {
            if let Some(h) = map.remove(id) {
                let len = h.lock().session.telemetry().len();
                h.progress.send_replace(Progress { len, closed: true });
            }
        }
        stale.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{FirstMover, StrategyConfig};
    use swarmplay_core::ib::IbConfig;

    fn ib_session(first_mover: FirstMover) -> SessionConfig {
        SessionConfig {
            strategy: StrategyConfig::Ib(IbConfig::default()),
            first_mover,
            vision_enabled: false,
            sim: None,
            realtime: false,
            seed: 3,
        }
    }

    #[test]
    fn unknown_session() {
        let store = SessionStore::new(ServiceConfig::default());
        assert!(matches!(store.view("nope"), Err(ServiceError::UnknownSession(_))));
    }

    #[test]
    fn ids_are_unique() {
        let store = SessionStore::new(ServiceConfig::default());
        let a = store.create(ib_session(FirstMover::Human)).unwrap();
        let b = store.create(ib_session(FirstMover::Human)).unwrap();
        assert_ne!(a.id, b.id);
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn idle_sessions_expire_and_close_streams() {
        let cfg = ServiceConfig { session_idle_secs: 60, ..Default::default() };
        let store = SessionStore::new(cfg);
        let v = store.create(ib_session(FirstMover::Drones)).unwrap();
        let handle = store.handle(&v.id).unwrap();
        assert_eq!(store.expire_idle(Instant::now()), 0);
        assert_eq!(store.expire_idle(Instant::now() + Duration::from_secs(61)), 1);
        assert!(store.is_empty());
        let (records, closed) = handle.telemetry_since(0);
        assert!(!records.is_empty() && closed);
    }

    #[test]
    fn finished_games_are_logged_once() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ServiceConfig { transcript_dir: Some(dir.path().into()), ..Default::default() };
        let store = SessionStore::new(cfg);
        let v = store.create(ib_session(FirstMover::Drones)).unwrap();
        let mut last = v;
        while last.turn != crate::session::Turn::None {
            let board = swarmplay_core::Board::decode_key(&last.board).unwrap();
            last = store.submit_move(&last.id, board.legal_moves()[0]).unwrap().session;
        }
        assert!(store.submit_move(&last.id, Cell::CENTER).is_err());
        let text = std::fs::read_to_string(dir.path().join(TRANSCRIPT_FILE)).unwrap();
        assert_eq!(text.lines().count(), 1);
        let line: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(line["id"], last.id.as_str());
    }
}
