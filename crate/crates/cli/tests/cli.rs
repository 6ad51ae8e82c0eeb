use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn holl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holl"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A scratch directory holding copies of all fixtures.
fn workdir() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in [
        "adder.bench",
        "adder_locked.bench",
        "adder.keyrel",
        "adder_generated.keyrel",
        "adder_dead_lock.bench",
    ] {
        fs::copy(fixture(f), dir.path().join(f)).unwrap();
    }
    dir
}

const LOCK_ADDER: &[&str] = &[
    "lock",
    "adder.bench",
    "--latent-max",
    "5",
    "--depth",
    "1:3",
    "--count",
    "2",
    "--seed",
    "7",
];

#[test]
fn lock_writes_three_files_and_verifies() {
    let d = workdir();
    let o = holl(d.path(), LOCK_ADDER);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("CORRECT") && out.contains("SECURE"), "{out}");
    for ext in ["bench", "keyrel", "stats.json"] {
        assert!(d.path().join(format!("adder.locked.{ext}")).exists(), "{ext}");
    }
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("adder.locked.stats.json")).unwrap()).unwrap();
    assert_eq!(stats["schema"], 1);
    assert_eq!(stats["selected"].as_array().unwrap().len(), 2);

    let v = holl(
        d.path(),
        &["verify", "adder.bench", "adder.locked.bench", "adder.locked.keyrel"],
    );
    assert!(v.status.success(), "{}", stdout(&v));
}

#[test]
fn lock_is_byte_identical_across_runs() {
    let d = workdir();
    let mut runs = Vec::new();
    for prefix in ["a", "b"] {
        let mut args = LOCK_ADDER.to_vec();
        args.extend(["-o", prefix]);
        let o = holl(d.path(), &args);
        assert!(o.status.success(), "{}", stderr(&o));
        let read = |ext: &str| fs::read_to_string(d.path().join(format!("{prefix}.{ext}"))).unwrap();
        // The run header names the output prefix; compare what follows it.
        let body = |s: String| s.lines().skip(1).collect::<Vec<_>>().join("\n");
        runs.push((body(read("bench")), body(read("keyrel"))));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn lock_usage_errors_exit_2() {
    let d = workdir();
    let o = holl(d.path(), &["lock", "missing.bench"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("holl: error["), "{}", stderr(&o));
    let o = holl(d.path(), &["lock", "adder.bench", "--latent-max", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn verify_reports_fixture_verdicts() {
    let d = workdir();
    let o = holl(d.path(), &["verify", "adder.bench", "adder_locked.bench", "adder.keyrel"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "CORRECT"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("SECURE ")), "{out}");

    let o = holl(
        d.path(),
        &["verify", "adder.bench", "adder_locked.bench", "adder_generated.keyrel"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("INCORRECT 0101 expected 010 got 110"), "{}", stdout(&o));

    let o = holl(d.path(), &["verify", "adder.bench", "adder_dead_lock.bench", "adder.keyrel"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l == "TRIVIAL"), "{}", stdout(&o));
}

#[test]
fn sim_prints_table_rows() {
    let d = workdir();
    let o = holl(d.path(), &["sim", "adder.bench", "1111", "1001", "0000", "1100", "0101"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "110\n011\n000\n011\n010\n");
}

#[test]
fn sim_answers_stdin_line_by_line() {
    let d = workdir();
    let mut child = Command::new(env!("CARGO_BIN_EXE_holl"))
        .current_dir(d.path())
        .args(["sim", "adder_locked.bench", "--keyrel", "adder.keyrel"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1111\n0101\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o), "110\n010\n");
}

#[test]
fn export_sop_lists_five_cubes() {
    let d = workdir();
    let rel = "r0 = IN(x0)\nr1 = IN(x1)\nr2 = IN(x2)\nr4 = AND(r0, r1)\nr3 = OR(r4, r2)\n";
    fs::write(d.path().join("t.keyrel"), rel).unwrap();
    let o = holl(d.path(), &["export-sop", "t.keyrel", "-o", "t.pla"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let pla = fs::read_to_string(d.path().join("t.pla")).unwrap();
    let block: Vec<&str> = pla.split("# r3").nth(1).unwrap().lines().collect();
    assert!(block.contains(&".p 5"), "{pla}");
    for cube in ["001 1", "011 1", "101 1", "110 1", "111 1"] {
        assert!(block.contains(&cube), "{cube} missing from {pla}");
    }
    let o = holl(d.path(), &["export-sop", "t.keyrel", "--support-limit", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn attack_recovers_the_adder() {
    let d = workdir();
    let o = holl(
        d.path(),
        &[
            "attack",
            "adder_locked.bench",
            "--oracle",
            "bench:adder.bench",
            "--stimulus-slots",
            "3",
            "--latent-slots",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(d.path().join("adder_locked.attack.trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,t_i_ms,cumulative_ms,input_vector"));
    let n = lines.count();
    assert!((1..=16).contains(&n), "{n} iterations");
    let jsonl = fs::read_to_string(d.path().join("adder_locked.attack.trace.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), n);

    let v = holl(
        d.path(),
        &["verify", "adder.bench", "adder_locked.bench", "adder_locked.attack.keyrel"],
    );
    assert!(stdout(&v).lines().any(|l| l == "CORRECT"), "{}", stdout(&v));
}

#[test]
fn attack_through_a_command_oracle() {
    let d = workdir();
    let sim = format!(
        "cmd:{} sim adder.bench",
        env!("CARGO_BIN_EXE_holl")
    );
    let o = holl(
        d.path(),
        &[
            "attack",
            "adder_locked.bench",
            "--oracle",
            &sim,
            "--stimulus-slots",
            "3",
            "--latent-slots",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn attack_failure_modes() {
    let d = workdir();
    let o = holl(
        d.path(),
        &["attack", "adder_locked.bench", "--oracle", "cmd:while read l; do echo 1; done"],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));

    let o = holl(
        d.path(),
        &[
            "attack",
            "adder_locked.bench",
            "--oracle",
            "bench:adder.bench",
            "--time-limit",
            "1ms",
            "-o",
            "lim",
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let csv = fs::read_to_string(d.path().join("lim.trace.csv")).unwrap();
    assert!(csv.starts_with("iteration,"));

    let o = holl(
        d.path(),
        &[
            "attack",
            "adder_locked.bench",
            "--oracle",
            "bench:adder.bench",
            "--stimulus-slots",
            "3",
            "--latent-slots",
            "2",
            "--naive",
            "1111",
            "1001",
            "0000",
            "1100",
            "-o",
            "nv",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("0101"), "{}", stderr(&o));

    let o = holl(d.path(), &["attack", "adder_locked.bench", "--oracle", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_prints_dimacs_answers() {
    let d = workdir();
    fs::write(d.path().join("sat.cnf"), "p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
    fs::write(d.path().join("unsat.cnf"), "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let o = holl(d.path(), &["solve", "sat.cnf"]);
    let out = stdout(&o);
    assert!(out.contains("s SATISFIABLE") && out.contains("v -1 2 0"), "{out}");
    let o = holl(d.path(), &["solve", "unsat.cnf", "--portfolio", "3"]);
    assert!(stdout(&o).contains("s UNSATISFIABLE"));
}
