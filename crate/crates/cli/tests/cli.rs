use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn iap(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_iap"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    input.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(input);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn gen_elevator(dir: &Path, name: &str, min: &str, max: &str, passengers: &[&str]) -> PathBuf {
    let mut args = vec!["gen", "elevator", "--min", min, "--max", max];
    for p in passengers {
        args.extend(["--passenger", p]);
    }
    let out = iap(&args, None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.join(name);
    std::fs::write(&path, &out.stdout).unwrap();
    path
}

fn plan_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn generated_elevator_pipes_into_solve() {
    let gen = iap(
        &[
            "gen",
            "elevator",
            "--min",
            "0",
            "--max",
            "3",
            "--passenger",
            "3:1",
        ],
        None,
    );
    let out = iap(&["solve", "-"], Some(&stdout(&gen)));
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let plan = plan_lines(&text);
    assert_eq!(plan.len(), 8);
    assert_eq!(plan.last(), Some(&"g"));
    assert!(text.contains("# status: solved"));
}

#[test]
fn validate_reports_the_broken_bound() {
    let dir = TempDir::new().unwrap();
    let e5 = gen_elevator(dir.path(), "e5.json", "0", "3", &["1:3"]);
    let plan = dir.path().join("plan.txt");
    std::fs::write(&plan, "# l5 first\nu\nu\nu\ne(1,3)\nl(1,3)\ng\n").unwrap();
    let out = iap(
        &["validate", e5.to_str().unwrap(), plan.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&out), 12);
    let report = stdout(&out);
    assert!(
        report.contains("e(1,3)") && report.contains("register f") && report.contains("upper"),
        "{report}"
    );

    std::fs::write(&plan, "u\ne(1,3)\nu\nu\nl(1,3)\ng\n").unwrap();
    let out = iap(
        &["validate", e5.to_str().unwrap(), plan.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "valid\n");
}

#[test]
fn empty_elevator_solves_to_the_goal() {
    let dir = TempDir::new().unwrap();
    let e = gen_elevator(dir.path(), "e.json", "0", "2", &[]);
    let out = iap(&["solve", e.to_str().unwrap()], None);
    assert_eq!(code(&out), 0);
    assert_eq!(plan_lines(&stdout(&out)), ["g"]);
}

#[test]
fn exit_codes_for_unsolved_problems() {
    let dir = TempDir::new().unwrap();
    let e6 = gen_elevator(dir.path(), "e6.json", "0", "1", &["0:2"]);
    let p = e6.to_str().unwrap();
    let out = iap(&["solve", p, "--k01"], None);
    assert_eq!(code(&out), 10);
    assert!(stdout(&out).contains("proven-unsolvable"));
    assert_eq!(code(&iap(&["solve", p, "--max-iters", "2"], None)), 11);
    assert_eq!(code(&iap(&["oracle", p, "--depth", "6"], None)), 10);
}

#[test]
fn malformed_input_and_flags_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"registers\": [,]\n}\n").unwrap();
    let out = iap(&["solve", bad.to_str().unwrap()], None);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("line 2"), "{err}");
    let e = gen_elevator(dir.path(), "e.json", "0", "3", &["3:1"]);
    assert_eq!(
        code(&iap(&["solve", e.to_str().unwrap(), "--frob"], None)),
        2
    );
    assert_eq!(
        code(&iap(&["solve", e.to_str().unwrap(), "--phi", "dfs"], None)),
        2
    );
    assert_eq!(code(&iap(&["solve", "/nonexistent.json"], None)), 2);
}

#[test]
fn dot_matches_the_plan() {
    let dir = TempDir::new().unwrap();
    let e2 = gen_elevator(dir.path(), "e2.json", "0", "4", &["2:4"]);
    let dot = dir.path().join("p.dot");
    let trace = dir.path().join("t.json");
    let out = iap(
        &[
            "solve",
            e2.to_str().unwrap(),
            "--dot",
            dot.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut want: BTreeMap<String, i64> = BTreeMap::new();
    for a in plan_lines(&text) {
        *want.entry(a.to_string()).or_default() += 1;
    }
    let dot = std::fs::read_to_string(&dot).unwrap();
    assert!(dot.starts_with("digraph mvpop {") && dot.trim_end().ends_with('}'));
    let mut got: BTreeMap<String, i64> = BTreeMap::new();
    for line in dot
        .lines()
        .filter(|l| l.contains("[label=") && !l.contains("->"))
    {
        let label = line.split('"').nth(1).unwrap();
        let (name, count) = label.rsplit_once(" \u{d7}").unwrap();
        *got.entry(name.to_string()).or_default() += count.parse::<i64>().unwrap();
    }
    assert_eq!(got, want);
    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(trace.as_array().unwrap().last().unwrap()["mu"]["u"], 2);
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let e3 = gen_elevator(dir.path(), "e3.json", "0", "2", &["0:2", "2:1"]);
    let p = e3.to_str().unwrap();
    for args in [
        vec!["solve", p],
        vec!["solve", p, "--phi", "bfs"],
        vec!["encode", p, "--mu", "u=2"],
    ] {
        let a = iap(&args, None);
        let b = iap(&args, None);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn classify_and_encode() {
    let water = iap(&["gen", "water", "--i", "2"], None);
    let out = iap(&["classify", "-"], Some(&stdout(&water)));
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("k = 2\n"));
    assert!(text.contains("f ~<=filled d"));
    assert!(text.contains("d ~>=filled f"));

    let dir = TempDir::new().unwrap();
    let e5 = gen_elevator(dir.path(), "e5.json", "0", "3", &["1:3"]);
    let p = e5.to_str().unwrap();
    let full = stdout(&iap(
        &["encode", p, "--mu", "u=2", "--objective", "length"],
        None,
    ));
    assert!(full.starts_with("Minimize"));
    assert!(full.contains("P[g.0,u.1]"));
    assert!(full.contains("t["));
    let relaxed = stdout(&iap(&["encode", p, "--relaxed"], None));
    assert!(!relaxed.contains("t["));
    assert_eq!(code(&iap(&["encode", p, "--mu", "x=2"], None)), 2);
}

#[test]
fn gen_ilp_reads_a_system() {
    let dir = TempDir::new().unwrap();
    let sys = dir.path().join("s.json");
    std::fs::write(&sys, r#"{"matrix": [[1, -2]], "rhs": [-1]}"#).unwrap();
    let gen = iap(&["gen", "ilp", sys.to_str().unwrap()], None);
    assert_eq!(code(&gen), 0);
    let out = iap(&["solve", "-", "--objective", "cost"], Some(&stdout(&gen)));
    assert_eq!(code(&out), 0);
    assert_eq!(plan_lines(&stdout(&out)), ["x2", "g"]);
    std::fs::write(&sys, r#"{"matrix": [[1, 1]], "rhs": [-1]}"#).unwrap();
    let gen = iap(&["gen", "ilp", sys.to_str().unwrap()], None);
    assert_eq!(code(&iap(&["solve", "-"], Some(&stdout(&gen)))), 10);
}
