use std::fs;
use std::path::Path;
use std::process::Command;

use circres::formats::{parse_cres, write_edges};
use circres::generators::BipartiteGraph;

fn run(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_circres"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

const SINGLE_CUT: &str = "p cres 3 1\nf 1 1 0\nf 2 -1 0\nf 3 0\ni 1 cut 1 1 2 3\nh 1\nh 2\ng 3\n";

#[test]
fn gen_php_complete_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(dir.path(), &["gen-php", "--complete", "5", "-o", "php"]);
    assert_eq!(code, 0);
    let (code, out) = run(
        dir.path(),
        &["check", "php.cres", "--cnf", "php.cnf", "--integral"],
    );
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("WITNESSED"));
    assert!(out.contains("integral flow"));
}

#[test]
fn gen_php_from_sparse_graph_has_width_three() {
    let dir = tempfile::tempdir().unwrap();
    let g = BipartiteGraph::circulant(7, 6, 3).unwrap();
    fs::write(dir.path().join("g.txt"), write_edges(&g)).unwrap();
    let (code, out) = run(
        dir.path(),
        &[
            "gen-php",
            "--graph",
            "g.txt",
            "-o",
            "sparse",
            "--dot",
            "sparse.dot",
        ],
    );
    assert_eq!(code, 0, "{out}");
    let (proof, _) = parse_cres(&fs::read_to_string(dir.path().join("sparse.cres")).unwrap()).unwrap();
    assert_eq!(proof.width(), 3);
    assert!(fs::read_to_string(dir.path().join("sparse.dot"))
        .unwrap()
        .starts_with("digraph"));
    assert_eq!(run(dir.path(), &["check", "sparse.cres"]).0, 0);
}

#[test]
fn gen_php_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["gen-php", "--complete", "0"]).0, 2);
    fs::write(dir.path().join("square.txt"), "p edge 2 2 2\n1 1\n2 2\n").unwrap();
    assert_eq!(run(dir.path(), &["gen-php", "--graph", "square.txt"]).0, 2);
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unsound = "p cres 4 4\nf 1 1 -1 0\nf 2 1 0\nf 3 -1 0\nf 4 0\n\
                   i 1 ax 1 1\ni 2 cut 1 2 1 2\ni 3 cut 1 1 3 3\ni 4 cut 1 2 3 4\ng 4\n";
    fs::write(dir.path().join("unsound.cres"), unsound).unwrap();
    let (code, out) = run(dir.path(), &["check", "unsound.cres"]);
    assert_eq!(code, 1);
    assert!(out.contains("NOT-WITNESSED"));

    fs::write(
        dir.path().join("bad.cres"),
        "p cres 3 1\nf 1 1 0\nf 2 -1 0\nf 3 0\ni 1 cut 1 1 2\n",
    )
    .unwrap();
    let (code, out) = run(dir.path(), &["check", "bad.cres"]);
    assert_eq!(code, 2);
    assert!(out.contains("line 5"));

    fs::write(dir.path().join("flow.cres"), format!("{SINGLE_CUT}w 1 3/0\n")).unwrap();
    let (code, out) = run(dir.path(), &["check", "flow.cres"]);
    assert_eq!(code, 2);
    assert!(out.contains("zero denominator"));

    fs::write(
        dir.path().join("wrong.cres"),
        "p cres 3 1\nf 1 1 0\nf 2 2 0\nf 3 0\ni 1 cut 1 1 2 3\ng 3\n",
    )
    .unwrap();
    assert_eq!(run(dir.path(), &["check", "wrong.cres"]).0, 2);
}

#[test]
fn check_with_goal_and_emitted_flows() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cut.cres"), SINGLE_CUT).unwrap();
    let (code, out) = run(
        dir.path(),
        &["check", "cut.cres", "--goal", "empty", "--emit-flows", "out.cres"],
    );
    assert_eq!(code, 0, "{out}");
    let (_, flow) = parse_cres(&fs::read_to_string(dir.path().join("out.cres")).unwrap()).unwrap();
    assert!(flow.is_some());
    assert_eq!(run(dir.path(), &["check", "out.cres"]).0, 0);
    assert_eq!(run(dir.path(), &["check", "cut.cres", "--goal", "1 0"]).0, 1);
}

#[test]
fn translate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cut.cres"), SINGLE_CUT).unwrap();
    let (code, out) = run(dir.path(), &["translate", "c2s", "cut.cres", "-o", "cut.sap"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("-> degree 1"));
    let (code, out) = run(dir.path(), &["translate", "s2c", "cut.sap", "-o", "back.cres"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("width 1"));
    let (code, out) = run(dir.path(), &["translate", "c2s", "back.cres", "-o", "again.sap"]);
    assert_eq!(code, 0);
    assert!(out.contains("-> degree 1"));
}

#[test]
fn translate_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.sap"), "p sap 1 1\nh 1 0\ng 0\nt 1 ; H 1\n").unwrap();
    assert_eq!(
        run(dir.path(), &["translate", "s2c", "bad.sap", "-o", "x.cres"]).0,
        2
    );
    fs::write(
        dir.path().join("taut.sap"),
        "p sap 1 1\nh 1 -1 0\ng 0\nt 1 ; B one\n",
    )
    .unwrap();
    assert_eq!(
        run(dir.path(), &["translate", "s2c", "taut.sap", "-o", "x.cres"]).0,
        2
    );
}

#[test]
fn search_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("unit.cnf"), "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let (code, out) = run(
        dir.path(),
        &["search", "unit.cnf", "--width", "1", "-o", "unit.cres"],
    );
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("constraints"));
    assert!(out.contains("wall time"));
    assert_eq!(run(dir.path(), &["check", "unit.cres"]).0, 0);

    fs::write(dir.path().join("sat.cnf"), "p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
    assert_eq!(run(dir.path(), &["search", "sat.cnf", "--width", "2"]).0, 1);

    fs::write(dir.path().join("wide.cnf"), "p cnf 3 1\n1 2 3 0\n").unwrap();
    assert_eq!(run(dir.path(), &["search", "wide.cnf", "--width", "2"]).0, 2);

    fs::write(dir.path().join("big.cnf"), "p cnf 60 1\n1 0\n").unwrap();
    let (code, out) = run(
        dir.path(),
        &["search", "big.cnf", "--width", "4", "--guard-rows", "1000"],
    );
    assert_eq!(code, 3);
    assert!(out.contains("GUARD"));
}

#[test]
fn search_sparse_php() {
    let dir = tempfile::tempdir().unwrap();
    let g = BipartiteGraph::circulant(5, 4, 3).unwrap();
    fs::write(dir.path().join("g.txt"), write_edges(&g)).unwrap();
    assert_eq!(run(dir.path(), &["gen-php", "--graph", "g.txt", "-o", "s"]).0, 0);
    let (code, out) = run(
        dir.path(),
        &["search", "s.cnf", "--width", "3", "-o", "found.cres"],
    );
    assert_eq!(code, 0, "{out}");
    assert_eq!(run(dir.path(), &["check", "found.cres", "--cnf", "s.cnf"]).0, 0);
}

#[test]
fn dimacs_header_error_names_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cnf"), "p cnf 2 3\n1 2 0\n-1 0\n").unwrap();
    let (code, out) = run(dir.path(), &["search", "bad.cnf", "--width", "2"]);
    assert_eq!(code, 2);
    assert!(out.contains("line 3"), "{out}");
}

#[test]
fn gen_random_emits_checkable_files() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "7"] {
        assert_eq!(run(dir.path(), &["gen-random", "--seed", seed, "-o", "r"]).0, 0);
        assert_eq!(run(dir.path(), &["check", "r.cres", "--cnf", "r.cnf"]).0, 0);
    }
}
