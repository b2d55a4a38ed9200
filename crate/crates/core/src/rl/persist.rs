//! Versioned JSON policy files.
//!
//! ```text
//! {"format": "swarmplay-policy/1", "method": "QL", "params": {...},
//!  "entries": {"X...O....": {"3": 0.25, ...}, ...}}
//! ```
//!
//! State-value policies map each key straight to a number. Keys are written in
//! sorted order so identical policies produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{Method, OpponentSpec, Policy, QTable, RewardSchedule, TdParams, VTable, ValueStore};
use crate::game::{Board, Cell};

pub const POLICY_FORMAT: &str = "swarmplay-policy/1";

#[derive(Debug, Error)]
pub enum PolicyFileError {
    #[error("policy file I/O: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported policy format {found:?}, expected {POLICY_FORMAT:?}")]
    FormatVersionMismatch { found: String },
    #[error("corrupt policy entry: {0}")]
    CorruptEntry(String),
    #[error("malformed policy document: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    learning_rate: f64,
    discount: f64,
    epsilon: f64,
    episodes: u64,
    seed: u64,
    opponent: OpponentSpec,
    rewards: RewardSchedule,
}

#[derive(Serialize)]
struct PolicyDocOut<'a, E> {
    format: &'a str,
    method: Method,
    params: ParamsDoc,
    entries: E,
}

#[derive(Deserialize)]
struct PolicyDocIn {
    method: Method,
    params: ParamsDoc,
    entries: BTreeMap<String, Value>,
}

pub fn policy_to_json(policy: &Policy) -> Result<String, PolicyFileError> {
    let p = &policy.params;
    let params = ParamsDoc {
        learning_rate: p.learning_rate,
        discount: p.discount,
        epsilon: p.epsilon,
        episodes: p.episodes,
        seed: p.seed,
        opponent: p.opponent,
        rewards: policy.rewards,
    };
    let mut text = match &policy.store {
        ValueStore::Action(q) => {
            let mut entries: BTreeMap<String, BTreeMap<u8, f64>> = BTreeMap::new();
            for (board, cell, value) in q.entries() {
                entries
                    .entry(board.encode_key())
                    .or_default()
                    .insert(cell.number(), value);
            }
            serde_json::to_string(&PolicyDocOut { format: POLICY_FORMAT, method: p.method, params, entries })?
        }
        ValueStore::State(v) => {
            let entries: BTreeMap<String, f64> =
                v.entries().map(|(b, x)| (b.encode_key(), x)).collect();
            serde_json::to_string(&PolicyDocOut { format: POLICY_FORMAT, method: p.method, params, entries })?
        }
    };
    text.push('\n');
    Ok(text)
}

pub fn policy_from_json(text: &str) -> Result<Policy, PolicyFileError> {
    let raw: Value = serde_json::from_str(text)?;
    let found = raw.get("format").and_then(Value::as_str).unwrap_or("");
    if found != POLICY_FORMAT {
        return Err(PolicyFileError::FormatVersionMismatch { found: found.to_string() });
    }
    let doc: PolicyDocIn = serde_json::from_value(raw)?;
    let corrupt = |msg: String| PolicyFileError::CorruptEntry(msg);
    let value_of = |key: &str, v: &Value| {
        v.as_f64().ok_or_else(|| corrupt(format!("value for {key:?} is not a number")))
    };

    let store = if doc.method.uses_action_values() {
        let mut q = QTable::new();
        for (key, row) in &doc.entries {
            let board = Board::decode_key(key).map_err(|e| corrupt(e.to_string()))?;
            let row = row
                .as_object()
                .ok_or_else(|| corrupt(format!("entry {key:?} is not an object")))?;
            for (cell_key, v) in row {
                let cell = cell_key
                    .parse::<i64>()
                    .ok()
                    .and_then(|n| Cell::new(n).ok())
                    .ok_or_else(|| corrupt(format!("bad cell {cell_key:?} under {key:?}")))?;
                q.set(&board, cell, value_of(key, v)?)
                    .map_err(|e| corrupt(format!("{key:?}/{cell_key}: {e}")))?;
            }
        }
        ValueStore::Action(q)
    } else {
        let mut table = VTable::new();
        for (key, v) in &doc.entries {
            let board = Board::decode_key(key).map_err(|e| corrupt(e.to_string()))?;
            table.set(&board, value_of(key, v)?);
        }
        ValueStore::State(table)
    };

    let p = doc.params;
    Ok(Policy {
        params: TdParams {
            method: doc.method,
            learning_rate: p.learning_rate,
            discount: p.discount,
            epsilon: p.epsilon,
            episodes: p.episodes,
            seed: p.seed,
            opponent: p.opponent,
        },
        rewards: p.rewards,
        store,
    })
}

pub fn save_policy(policy: &Policy, path: impl AsRef<Path>) -> Result<(), PolicyFileError> {
    fs::write(path, policy_to_json(policy)?)?;
    Ok(())
}

pub fn load_policy(path: impl AsRef<Path>) -> Result<Policy, PolicyFileError> {
    policy_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::train;

    fn trained(method: Method) -> Policy {
        let p = TdParams { method, episodes: 400, seed: 5, ..Default::default() };
        train(&p, &RewardSchedule::default()).unwrap().0
    }

    #[test]
    fn round_trip_all_methods() {
        let dir = tempfile::tempdir().unwrap();
        for method in Method::ALL {
            let policy = trained(method);
            let path = dir.path().join(format!("{method}.json"));
            save_policy(&policy, &path).unwrap();
            let loaded = load_policy(&path).unwrap();
            assert_eq!(loaded, policy);
            // Re-serializing is byte-stable.
            assert_eq!(policy_to_json(&loaded).unwrap(), fs::read_to_string(&path).unwrap());
        }
    }

    #[test]
    fn document_shape() {
        let json: Value = serde_json::from_str(&policy_to_json(&trained(Method::QLearning)).unwrap()).unwrap();
        assert_eq!(json["format"], "swarmplay-policy/1");
        assert_eq!(json["method"], "QL");
        assert_eq!(json["params"]["learning_rate"], 0.2);
        assert_eq!(json["params"]["opponent"]["kind"], "mixture_random_minimax");
        let entries = json["entries"].as_object().unwrap();
        let (key, row) = entries.iter().next().unwrap();
        assert_eq!(key.len(), 9);
        assert!(row.as_object().unwrap().keys().all(|c| c.parse::<u8>().is_ok()));

        let json: Value = serde_json::from_str(&policy_to_json(&trained(Method::StateValue)).unwrap()).unwrap();
        assert_eq!(json["method"], "SV");
        assert!(json["entries"].as_object().unwrap().values().all(Value::is_number));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let text = policy_to_json(&trained(Method::Sarsa)).unwrap();
        let text = text.replace("swarmplay-policy/1", "swarmplay-policy/9");
        assert!(matches!(
            policy_from_json(&text),
            Err(PolicyFileError::FormatVersionMismatch { found }) if found == "swarmplay-policy/9"
        ));
    }

    const HEADER: &str = r#""format":"swarmplay-policy/1","method":"QL","params":{"learning_rate":0.2,"discount":0.9,"epsilon":0.3,"episodes":1,"seed":1,"opponent":{"kind":"random"},"rewards":{"win":1.0,"lose":-1.0,"draw_first_mover":0.1,"draw_second_mover":0.5}}"#;

    #[test]
    fn malformed_state_key_is_corrupt() {
        let text = format!(r#"{{{HEADER},"entries":{{"XX?......":{{"3":0.5}}}}}}"#);
        assert!(matches!(policy_from_json(&text), Err(PolicyFileError::CorruptEntry(_))));
    }

    #[test]
    fn bad_cells_are_corrupt() {
        for row in [r#"{"10":0.5}"#, r#"{"1":0.5}"#, r#"{"2":"high"}"#] {
            let text = format!(r#"{{{HEADER},"entries":{{"X........":{row}}}}}"#);
            assert!(
                matches!(policy_from_json(&text), Err(PolicyFileError::CorruptEntry(_))),
                "{row}"
            );
        }
        let text = format!(r#"{{{HEADER},"entries":{{"X........":{{"2":0.5}}}}}}"#);
        assert!(policy_from_json(&text).is_ok());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_policy("/nonexistent/policy.json"), Err(PolicyFileError::Io(_))));
    }
}
