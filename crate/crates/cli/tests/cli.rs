use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn swarmplay(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmplay"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn play(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_swarmplay"))
        .arg("play")
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn train_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let policy = format!("p{tag}.json");
        let trace = format!("t{tag}.csv");
        let out = swarmplay(
            &["train", "--method", "sarsa", "--episodes", "3000", "--seed", "9", "--policy-out", &policy, "--trace-out", &trace],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(dir.path().join(policy)).unwrap(), std::fs::read_to_string(dir.path().join(trace)).unwrap())
    };
    let (p1, t1) = run("1");
    let (p2, t2) = run("2");
    assert_eq!(p1, p2);
    assert_eq!(t1, t2);
    let mut lines = t1.lines();
    assert_eq!(lines.next(), Some("episode,reward,cumulative_reward,outcome,agent_first"));
    assert_eq!(lines.count(), 3000);
}

#[test]
fn train_default_file_names_and_progress() {
    let dir = tempfile::tempdir().unwrap();
    let out = swarmplay(&["train", "--method", "sv", "--episodes", "20000", "--seed", "2"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.matches("for the last 10K").count(), 2);
    assert!(dir.path().join("policy-sv-2.json").exists());
    assert!(dir.path().join("trace-sv-2.csv").exists());
}

#[test]
fn train_params_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("params.toml"),
        "method = \"SARSA\"\nepisodes = 100\nepsilon = 0.1\n[opponent]\nkind = \"random\"\n",
    )
    .unwrap();
    let out = swarmplay(&["train", "--params", "params.toml", "--episodes", "50", "--policy-out", "p.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(doc["method"], "SARSA");
    assert_eq!(doc["params"]["episodes"], 50);
    assert_eq!(doc["params"]["epsilon"], 0.1);
    assert_eq!(doc["params"]["opponent"]["kind"], "random");
}

#[test]
fn train_rejects_bad_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let out = swarmplay(&["train", "--epsilon", "1.5", "--episodes", "10"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid training parameters"));
    assert!(!dir.path().join("policy-ql-1.json").exists());
}

#[test]
fn tournament_minimax_mirror_draws() {
    let dir = tempfile::tempdir().unwrap();
    let out = swarmplay(&["tournament", "--a", "minimax", "--b", "minimax", "--games", "100", "--csv", "r.csv"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv, "first_mover,a_wins,b_wins,draws,mean_plies\nA,0,0,50,9.0000\nB,0,0,50,9.0000\n");
}

#[test]
fn tournament_random_mirror_fixture() {
    // Seeded fixture; the first mover wins about twice as often as the second.
    let dir = tempfile::tempdir().unwrap();
    let out = swarmplay(
        &["tournament", "--a", "random", "--b", "random", "--games", "10000", "--seed", "1", "--csv", "r.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[1].starts_with("A,2906,1456,638,"), "{csv}");
    assert!(rows[2].starts_with("B,1462,2909,629,"), "{csv}");
}

#[test]
fn tournament_bad_policy_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = swarmplay(&["tournament", "--a", "rl:missing.json", "--b", "random"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("PolicyLoadFailure"));
    let out = swarmplay(&["tournament", "--a", "ib:2", "--b", "random"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn vision_selftest_passes_and_detects_fault_injection() {
    let dir = tempfile::tempdir().unwrap();
    let ok = swarmplay(&["vision-selftest", "--sample", "300", "--sigma", "20"], dir.path());
    assert!(ok.status.success(), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("0 mismatches"));

    let bad = swarmplay(&["vision-selftest", "--sample", "300", "--swap-bands"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let text = stdout(&bad);
    assert!(text.contains("Cross -> Circle") && text.contains("Circle -> Cross"), "{text}");
    assert!(!text.contains("Empty ->"));
}

#[test]
fn vision_selftest_reads_config_file() {
    let dir = tempfile::tempdir().unwrap();
    // Raising the empty band above the cross density hides every cross.
    std::fs::write(dir.path().join("svc.toml"), "[vision]\nempty_max = 0.2\ncross_max = 0.3\n").unwrap();
    let out = swarmplay(&["vision-selftest", "--config", "svc.toml", "--sample", "50"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("Cross -> Empty"));
}

#[test]
fn scripted_play_is_deterministic() {
    let script = "5 5 1 9 3 7 2 4 6 8\n";
    let a = play(&["--seed", "3"], script);
    let b = play(&["--seed", "3"], script);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("OccupiedCell"), "{text}");
    let last = text.lines().rev().nth(1).unwrap();
    assert!(
        ["outcome: CrossWins", "outcome: NoughtWins", "outcome: Draw"].contains(&last),
        "{text}"
    );
}

#[test]
fn play_drones_first_writes_telemetry() {
    let dir = tempfile::tempdir().unwrap();
    let tel = dir.path().join("tel.ndjson");
    let out = play(
        &["--first", "drones", "--telemetry-out", tel.to_str().unwrap()],
        "1 2 3 4 5 6 7 8 9\n",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("drones: "));
    let text = std::fs::read_to_string(tel).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["drone_id"], 1);
    assert_eq!(first["tick"], 1);
}

#[test]
fn play_reports_truncated_input() {
    let out = play(&[], "5\n");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("input ended"));
}

#[test]
fn serve_rejects_missing_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = swarmplay(&["serve", "--config", "nope.toml"], dir.path());
    assert!(!out.status.success());
}
