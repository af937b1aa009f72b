use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use skeledim::generators::{path, random_connected};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skeledim")).args(args).output().unwrap()
}

fn write_graph(dir: &Path, name: &str, g: &skeledim::Graph) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, g.to_dimacs_string()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stats_reports_path_width() {
    let dir = tempfile::tempdir().unwrap();
    let gr = write_graph(dir.path(), "p.gr", &path(5).unwrap());
    let out = run(&["stats", s(&gr)]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["k"], 2);
    assert_eq!(json["params"]["alpha"], "1/2");
    assert_eq!(json["roots"], 5);
}

#[test]
fn label_round_trip_and_fingerprint_check() {
    let dir = tempfile::tempdir().unwrap();
    let g = random_connected(40, 20, 9, 1).unwrap();
    let gr = write_graph(dir.path(), "g.gr", &g);
    let other = write_graph(dir.path(), "h.gr", &random_connected(40, 20, 9, 2).unwrap());
    let hub = dir.path().join("g.hub");
    assert!(run(&["label", "build", s(&gr), "--seed", "4", "-o", s(&hub)]).status.success());

    let out = run(&["label", "verify", s(&gr), s(&hub), "--exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("0 mismatches / 1600 pairs"));

    let out = run(&["label", "query", s(&hub), "3", "3"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0");

    assert_eq!(run(&["label", "verify", s(&other), s(&hub), "--exhaustive"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let gr = write_graph(dir.path(), "p.gr", &path(5).unwrap());
    let hub = dir.path().join("p.hub");
    assert!(run(&["label", "build", s(&gr), "-o", s(&hub)]).status.success());

    assert_eq!(run(&["label", "query", s(&hub), "1", "99"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["stats", s(&gr), "--alpha", "0"]).status.code(), Some(1));
    assert_eq!(run(&["stats", s(&dir.path().join("missing.gr"))]).status.code(), Some(3));

    let bad = dir.path().join("bad.gr");
    std::fs::write(&bad, "p sp 2 2\na 1 2 5\na 2 1 4\n").unwrap();
    assert_eq!(run(&["stats", s(&bad)]).status.code(), Some(3));
}

#[test]
fn grid_generation_and_study() {
    let dir = tempfile::tempdir().unwrap();
    let gr = dir.path().join("grid.gr");
    assert!(run(&["gen", "grid", "--L", "2", "-o", s(&gr)]).status.success());
    let out = run(&["stats", s(&gr)]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["k"], 6);

    let csv = dir.path().join("sep.csv");
    let out = run(&["study", "separation", "--Lmin", "2", "--Lmax", "3", "-o", s(&csv)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "L,n,k,pack_lb");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,16,6,"));
}
