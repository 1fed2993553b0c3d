use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/five.adj")
}

fn nbexpr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbexpr"))
        .args(args)
        .output()
        .unwrap()
}

fn summary(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap();
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

fn run_to(dir: &Path, tag: &str, extra: &[&str]) -> (String, serde_json::Value) {
    let results = dir.join(format!("{tag}.txt"));
    let metrics = dir.join(format!("{tag}.jsonl"));
    let input = fixture();
    let mut args = vec![
        "run",
        "--input",
        input.to_str().unwrap(),
        "--results",
        results.to_str().unwrap(),
        "--metrics",
        metrics.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = nbexpr(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (std::fs::read_to_string(results).unwrap(), summary(&metrics))
}

#[test]
fn bfs_on_five_vertex_graph_single_and_three_workers() {
    let dir = tempfile::tempdir().unwrap();
    let (one, m1) = run_to(
        dir.path(),
        "k1",
        &["--algo", "bfs", "--source", "1", "--workers", "1"],
    );
    assert_eq!(one, "1\t0\n2\t1\n3\t2\n4\t1\n5\t2\n");
    assert_eq!(m1["bytes_data"], 0);
    let (three, m3) = run_to(
        dir.path(),
        "k3",
        &["--algo", "bfs", "--source", "1", "--workers", "3"],
    );
    assert_eq!(one, three);
    assert!(m3["bytes_data"].as_u64().unwrap() > 0);
}

#[test]
fn critical_sync_is_cheaper_for_color() {
    let dir = tempfile::tempdir().unwrap();
    let (c, mc) = run_to(
        dir.path(),
        "c",
        &["--algo", "color", "--workers", "3", "--sync", "critical"],
    );
    let (f, mf) = run_to(
        dir.path(),
        "f",
        &["--algo", "color", "--workers", "3", "--sync", "full"],
    );
    assert_eq!(c, f);
    assert!(mc["bytes_data"].as_u64().unwrap() < mf["bytes_data"].as_u64().unwrap());
}

#[test]
fn repeated_runs_give_identical_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--algo", "mis", "--workers", "4", "--seed", "7"];
    let (a, ma) = run_to(dir.path(), "a", &args);
    let (b, mb) = run_to(dir.path(), "b", &args);
    assert_eq!(a, b);
    for key in ["superstep_count", "bytes_data", "bytes_control", "messages"] {
        assert_eq!(ma[key], mb[key], "{key}");
    }
    let steps = |tag: &str| -> Vec<u64> {
        std::fs::read_to_string(dir.path().join(format!("{tag}.jsonl")))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
            .filter(|v| v["record"] == "superstep")
            .map(|v| v["n_change"].as_u64().unwrap())
            .collect()
    };
    assert_eq!(steps("a"), steps("b"));
}

#[test]
fn verify_passes_for_every_algorithm() {
    let input = fixture();
    for algo in ["bfs", "cc", "pr", "ppr", "core", "color", "mis", "mm", "tc"] {
        let out = nbexpr(&[
            "verify",
            "--input",
            input.to_str().unwrap(),
            "--algo",
            algo,
            "--source",
            "2",
            "--workers",
            "3",
            "--store",
            "disk",
        ]);
        assert!(
            out.status.success(),
            "{algo}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        assert!(String::from_utf8_lossy(&out.stdout).contains("pass"));
    }
}

#[test]
fn exit_codes() {
    assert_eq!(nbexpr(&["run", "--algo", "cc"]).status.code(), Some(1));
    assert_eq!(nbexpr(&["--help"]).status.code(), Some(0));
    let missing = nbexpr(&["run", "--input", "/nonexistent", "--algo", "cc"]);
    assert_eq!(missing.status.code(), Some(2));
    let input = fixture();
    let input = input.to_str().unwrap();
    assert_eq!(
        nbexpr(&["run", "--input", input, "--algo", "nope"])
            .status
            .code(),
        Some(1)
    );
    let bad_source = nbexpr(&["run", "--input", input, "--algo", "bfs", "--source", "42"]);
    assert_eq!(bad_source.status.code(), Some(3));
    let limited = nbexpr(&[
        "run",
        "--input",
        input,
        "--algo",
        "bfs",
        "--source",
        "3",
        "--max-supersteps",
        "2",
    ]);
    assert_eq!(limited.status.code(), Some(3));
}

#[test]
fn malformed_input_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1 2\n3 x\n").unwrap();
    let out = nbexpr(&["run", "--input", path.to_str().unwrap(), "--algo", "cc"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn theta_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = run_to(dir.path(), "t", &["--algo", "cc", "--theta", "4"]);
    assert_eq!(m["theta"], 4);
    let (_, m) = run_to(dir.path(), "f", &["--algo", "cc", "--theta-frac", "2"]);
    assert_eq!(m["theta"], 2);
    let (_, m) = run_to(dir.path(), "d", &["--algo", "cc"]);
    assert_eq!(m["theta"], 0);
}
