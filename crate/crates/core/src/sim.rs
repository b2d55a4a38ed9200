//! Point-mass simulation of the drone fleet.
//!
//! Each Cross move sends one parked drone to a board cell: up to cruise
//! altitude above its home, across to the cell, then down onto it. Control is
//! a per-axis PD law with norm caps on acceleration and speed, integrated
//! with semi-implicit Euler at a fixed 100 Hz. Only one drone flies at a time.
//!
//! Board frame: origin at the top-left corner of the board as seen from the
//! camera, x to the right along the 1.2 m side, y down the 1.0 m side, z up.
//! Homes sit in a row just above the top edge.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::Cell;

/// Fixed control period in seconds.
pub const TICK_SECONDS: f64 = 0.01;
pub const TICKS_PER_SECOND: u64 = 100;
pub const FLEET_SIZE: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("cell {0} already holds a landed drone")]
    CellOccupied(Cell),
    #[error("another drone is still flying")]
    FlightInProgress,
    #[error("all {FLEET_SIZE} drones have been dispatched")]
    FleetExhausted,
    #[error("flight did not settle within {0} ticks")]
    ConvergenceTimeout(u64),
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
}

pub type Vec3 = [f64; 3];

fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn clamp_norm(v: Vec3, cap: f64) -> Vec3 {
    let n = norm(v);
    if n > cap {
        v.map(|c| c * cap / n)
    } else {
        v
    }
}

fn distance(a: Vec3, b: Vec3) -> f64 {
    norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Board extent along x, meters.
    pub board_width: f64,
    /// Board extent along y, meters.
    pub board_depth: f64,
    pub cruise_altitude: f64,
    pub kp: Vec3,
    pub kd: Vec3,
    pub max_speed: f64,
    pub max_accel: f64,
    /// Waypoint arrival radius.
    pub arrival_tolerance: f64,
    /// Speed below which a drone on its final waypoint counts as landed.
    pub rest_speed: f64,
    /// Per-flight tick budget before giving up.
    pub max_flight_ticks: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            board_width: 1.2,
            board_depth: 1.0,
            cruise_altitude: 0.5,
            kp: [9.0; 3],
            kd: [6.0; 3],
            max_speed: 1.5,
            max_accel: 4.0,
            arrival_tolerance: 0.02,
            rest_speed: 0.05,
            max_flight_ticks: 3_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        // NaN fails every check below.
        let positive = |v: f64| v > 0.0;
        if !(self.board_width > 0.0 && self.board_depth > 0.0) {
            return bad("board dimensions must be positive");
        }
        if !positive(self.cruise_altitude) {
            return bad("cruise altitude must be positive");
        }
        if !self.kp.iter().chain(&self.kd).all(|&k| positive(k)) {
            return bad("gains must be positive");
        }
        if !(self.max_speed > 0.0 && self.max_accel > 0.0) {
            return bad("caps must be positive");
        }
        if !(self.arrival_tolerance > 0.0 && self.rest_speed > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_flight_ticks == 0 {
            return bad("flight tick budget must be positive");
        }
        Ok(())
    }

    /// Centre of `cell` on the board plane.
    pub fn cell_center(&self, cell: Cell) -> Vec3 {
        let x = (cell.col() as f64 + 0.5) * self.board_width / 3.0;
        let y = (cell.row() as f64 + 0.5) * self.board_depth / 3.0;
        [x, y, 0.0]
    }

    /// Parking spot of drone `id` (1-based).
    pub fn home(&self, id: usize) -> Vec3 {
        let x = self.board_width * id as f64 / (FLEET_SIZE + 1) as f64;
        [x, -0.25, 0.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Idle,
    TakingOff,
    Cruising,
    Descending,
    Landed,
}

impl Phase {
    pub fn is_flying(self) -> bool {
        matches!(self, Phase::TakingOff | Phase::Cruising | Phase::Descending)
    }

    fn for_waypoint(index: usize) -> Phase {
        [Phase::TakingOff, Phase::Cruising, Phase::Descending][index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightPlan {
    pub waypoints: [Vec3; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub id: usize,
    pub position: Vec3,
    pub velocity: Vec3,
    /// Acceleration applied on the last tick.
    pub accel: Vec3,
    pub phase: Phase,
    pub home: Vec3,
    pub assigned_cell: Option<Cell>,
    plan: Option<FlightPlan>,
    next_waypoint: usize,
}

/// One drone's state at one tick; a line of the NDJSON telemetry stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub tick: u64,
    pub drone_id: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub phase: Phase,
}

impl TelemetryRecord {
    fn of(tick: u64, d: &DroneState) -> TelemetryRecord {
        let ([x, y, z], [vx, vy, vz]) = (d.position, d.velocity);
        TelemetryRecord { tick, drone_id: d.id, x, y, z, vx, vy, vz, phase: d.phase }
    }
}

/// Records produced by one tick: the drone that flew during it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Telemetry {
    pub tick: u64,
    pub records: Vec<TelemetryRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    cfg: SimConfig,
    drones: Vec<DroneState>,
    tick: u64,
}

impl Swarm {
    pub fn new(cfg: SimConfig) -> Result<Swarm, SimError> {
        cfg.validate()?;
        let drones = (1..=FLEET_SIZE)
            .map(|id| DroneState {
                id,
                position: cfg.home(id),
                velocity: [0.0; 3],
                accel: [0.0; 3],
                phase: Phase::Idle,
                home: cfg.home(id),
                assigned_cell: None,
                plan: None,
                next_waypoint: 0,
            })
            .collect();
        Ok(Swarm { cfg, drones, tick: 0 })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn drones(&self) -> &[DroneState] {
        &self.drones
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Simulated time in seconds.
    pub fn time(&self) -> f64 {
        self.tick as f64 * TICK_SECONDS
    }

    pub fn in_flight(&self) -> Option<&DroneState> {
        self.drones.iter().find(|d| d.phase.is_flying())
    }

    /// Current snapshot of every drone.
    pub fn snapshot(&self) -> Vec<TelemetryRecord> {
        self.drones.iter().map(|d| TelemetryRecord::of(self.tick, d)).collect()
    }

    pub fn dispatch(&mut self, cell: Cell) -> Result<(usize, FlightPlan), SimError> {
        if self.in_flight().is_some() {
            return Err(SimError::FlightInProgress);
        }
        if self.drones.iter().any(|d| d.phase == Phase::Landed && d.assigned_cell == Some(cell)) {
            return Err(SimError::CellOccupied(cell));
        }
        let cfg = self.cfg;
        let drone = self
            .drones
            .iter_mut()
            .find(|d| d.phase == Phase::Idle)
            .ok_or(SimError::FleetExhausted)?;
        let target = cfg.cell_center(cell);
        let h = cfg.cruise_altitude;
        let plan = FlightPlan {
            waypoints: [
                [drone.home[0], drone.home[1], h],
                [target[0], target[1], h],
                target,
            ],
        };
        drone.phase = Phase::TakingOff;
        drone.assigned_cell = Some(cell);
        drone.plan = Some(plan);
        drone.next_waypoint = 0;
        Ok((drone.id, plan))
    }

    /// Advances one tick and reports the drone that was flying, if any.
    pub fn step(&mut self) -> Telemetry {
        let cfg = self.cfg;
        self.tick += 1;
        let tick = self.tick;
        let mut records = Vec::new();
        if let Some(d) = self.drones.iter_mut().find(|d| d.phase.is_flying()) {
            let plan = d.plan.expect("flying drone has a plan");
            let wp = plan.waypoints[d.next_waypoint];
            let a = clamp_norm(
                [0, 1, 2].map(|i| cfg.kp[i] * (wp[i] - d.position[i]) - cfg.kd[i] * d.velocity[i]),
                cfg.max_accel,
            );
            let v = clamp_norm([0, 1, 2].map(|i| d.velocity[i] + a[i] * TICK_SECONDS), cfg.max_speed);
            d.accel = a;
            d.velocity = v;
            d.position = [0, 1, 2].map(|i| d.position[i] + v[i] * TICK_SECONDS);
            if distance(d.position, wp) <= cfg.arrival_tolerance {
                if d.next_waypoint < 2 {
                    d.next_waypoint += 1;
                    d.phase = Phase::for_waypoint(d.next_waypoint);
                } else if norm(d.velocity) < cfg.rest_speed {
                    d.phase = Phase::Landed;
                    d.velocity = [0.0; 3];
                    d.accel = [0.0; 3];
                }
            }
            records.push(TelemetryRecord::of(tick, d));
        }
        Telemetry { tick, records }
    }

    /// Dispatches to `cell` and steps until the drone lands.
    pub fn run_flight(&mut self, cell: Cell) -> Result<Vec<TelemetryRecord>, SimError> {
        let (id, _) = self.dispatch(cell)?;
        let mut log = Vec::new();
        for _ in 0..self.cfg.max_flight_ticks {
            log.extend(self.step().records);
            if self.drones[id - 1].phase == Phase::Landed {
                return Ok(log);
            }
        }
        Err(SimError::ConvergenceTimeout(self.cfg.max_flight_ticks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cell(n: i64) -> Cell {
        Cell::new(n).unwrap()
    }

    #[test]
    fn cell_centres_follow_board_numbering() {
        let cfg = SimConfig::default();
        let c1 = cfg.cell_center(cell(1));
        let c9 = cfg.cell_center(cell(9));
        assert!((c1[0] - 0.2).abs() < 1e-12 && (c1[1] - 1.0 / 6.0).abs() < 1e-12);
        assert!((c9[0] - 1.0).abs() < 1e-12 && (c9[1] - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(cfg.cell_center(cell(5)), [0.6, 0.5, 0.0]);
    }

    #[test]
    fn first_dispatch_uses_drone_one() {
        let mut sim = Swarm::new(SimConfig::default()).unwrap();
        let (id, plan) = sim.dispatch(cell(5)).unwrap();
        assert_eq!(id, 1);
        assert_eq!(plan.waypoints[2], sim.config().cell_center(cell(5)));
        assert_eq!(plan.waypoints[0][2], 0.5);
        assert_eq!(sim.drones()[0].phase, Phase::TakingOff);
        assert_eq!(sim.dispatch(cell(1)), Err(SimError::FlightInProgress));
    }

    #[test]
    fn hundred_ticks_is_one_second() {
        let mut sim = Swarm::new(SimConfig::default()).unwrap();
        for _ in 0..TICKS_PER_SECOND {
            sim.step();
        }
        assert_eq!(sim.tick(), 100);
        assert!((sim.time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn idle_fleet_produces_no_records() {
        let mut sim = Swarm::new(SimConfig::default()).unwrap();
        assert!(sim.step().records.is_empty());
        assert!(sim.drones().iter().all(|d| d.position == d.home));
    }

    #[test]
    fn drone_at_rest_on_target_lands_and_stays() {
        let mut sim = Swarm::new(SimConfig::default()).unwrap();
        sim.dispatch(cell(3)).unwrap();
        let target = sim.config().cell_center(cell(3));
        let d = &mut sim.drones[0];
        d.position = target;
        d.next_waypoint = 2;
        d.phase = Phase::Descending;
        let t = sim.step();
        assert_eq!(t.records[0].phase, Phase::Landed);
        assert_eq!(sim.drones()[0].position, target);
        for _ in 0..50 {
            sim.step();
        }
        assert_eq!(sim.drones()[0].position, target);
    }

    #[test]
    fn flight_settles_on_cell_within_ten_seconds() {
        let cfg = SimConfig::default();
        for n in 1..=9 {
            let mut sim = Swarm::new(cfg).unwrap();
            let log = sim.run_flight(cell(n)).unwrap();
            let d = &sim.drones()[0];
            assert_eq!(d.phase, Phase::Landed);
            assert!(distance(d.position, cfg.cell_center(cell(n))) <= cfg.arrival_tolerance);
            assert!((log.len() as f64) * TICK_SECONDS < 10.0, "cell {n}: {} ticks", log.len());
            assert_eq!(log.last().unwrap().phase, Phase::Landed);
        }
    }

    #[test]
    fn settling_fixture() {
        // Frozen default gains: drone 1 from home onto cell 1 and cell 9.
        let mut sim = Swarm::new(SimConfig::default()).unwrap();
        assert_eq!(sim.run_flight(cell(1)).unwrap().len(), 499);
        let mut sim = Swarm::new(SimConfig::default()).unwrap();
        assert_eq!(sim.run_flight(cell(9)).unwrap().len(), 559);
    }

    #[test]
    fn flight_phases_progress_in_order() {
        let mut sim = Swarm::new(SimConfig::default()).unwrap();
        let log = sim.run_flight(cell(7)).unwrap();
        let mut phases: Vec<Phase> = log.iter().map(|r| r.phase).collect();
        phases.dedup();
        assert_eq!(phases, [Phase::TakingOff, Phase::Cruising, Phase::Descending, Phase::Landed]);
        assert!(log.windows(2).all(|w| w[1].tick == w[0].tick + 1));
    }

    #[test]
    fn occupied_cell_and_fleet_limits() {
        let mut sim = Swarm::new(SimConfig::default()).unwrap();
        sim.run_flight(cell(1)).unwrap();
        assert_eq!(sim.run_flight(cell(1)), Err(SimError::CellOccupied(cell(1))));
        for n in 2..=5 {
            sim.run_flight(cell(n)).unwrap();
        }
        assert_eq!(sim.dispatch(cell(6)), Err(SimError::FleetExhausted));
    }

    #[test]
    fn tiny_budget_times_out() {
        let cfg = SimConfig { max_flight_ticks: 10, ..Default::default() };
        let mut sim = Swarm::new(cfg).unwrap();
        assert_eq!(sim.run_flight(cell(9)), Err(SimError::ConvergenceTimeout(10)));
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            SimConfig { kd: [0.0; 3], ..Default::default() },
            SimConfig { arrival_tolerance: 0.0, ..Default::default() },
            SimConfig { max_speed: -1.0, ..Default::default() },
        ] {
            assert!(matches!(Swarm::new(cfg), Err(SimError::InvalidConfig(_))));
        }
    }

    #[test]
    fn telemetry_serializes_as_flat_record() {
        let mut sim = Swarm::new(SimConfig::default()).unwrap();
        sim.dispatch(cell(2)).unwrap();
        let rec = sim.step().records[0];
        let json = serde_json::to_value(rec).unwrap();
        for key in ["tick", "drone_id", "x", "y", "z", "vx", "vy", "vz", "phase"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["phase"], "TakingOff");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn dispatch_sequences_respect_invariants(cells in Just((1..=9i64).collect::<Vec<_>>()).prop_shuffle(), n in 1usize..=5) {
            let cfg = SimConfig::default();
            let mut sim = Swarm::new(cfg).unwrap();
            for &c in &cells[..n] {
                sim.dispatch(cell(c)).unwrap();
                loop {
                    let landed: Vec<Vec3> = sim.drones().iter().filter(|d| d.phase == Phase::Landed).map(|d| d.position).collect();
                    sim.step();
                    let flying = sim.drones().iter().filter(|d| d.phase.is_flying()).count();
                    prop_assert!(flying <= 1);
                    for d in sim.drones() {
                        prop_assert!(norm(d.velocity) <= cfg.max_speed + 1e-9);
                        prop_assert!(norm(d.accel) <= cfg.max_accel + 1e-9);
                    }
                    let still: Vec<Vec3> = sim.drones().iter().filter(|d| d.phase == Phase::Landed).map(|d| d.position).collect();
                    prop_assert_eq!(&still[..landed.len()], &landed[..]);
                    if flying == 0 {
                        break;
                    }
                    prop_assert!(sim.tick() < 100_000);
                }
            }
        }
    }
}
