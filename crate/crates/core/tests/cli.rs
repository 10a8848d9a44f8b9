use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cc-solve");

const WEAK_TRANSITIVITY: &str = "\
atoms A B C
event AB = A | B
cond T1 = C given B
cond T2 = B given A
cond T3 = A given AB
cond Z = C given A
query p-entails premises=[T1,T2,T3] conclusion=Z
";

const HALVES: &str = "\
atoms A B C D
cond T1 = B given A
cond T2 = D given C
assess P(T1) = 1/2
assess P(T2) = 1/2
query bounds T1 & T2
";

fn write(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cc-solve-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn solve(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn weak_transitivity_file() {
    let path = write("wt.cc", WEAK_TRANSITIVITY);
    let o = solve(&[path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("p-valid: yes (forced z = 1)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn transitivity_rule_flag() {
    let o = solve(&["--rule", "transitivity"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("p-valid: no"), "{out}");
    assert!(out.contains("z = 0"), "{out}");
}

#[test]
fn bounds_of_two_halves() {
    let path = write("halves.cc", HALVES);
    let o = solve(&[path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[0, 1/2]"), "{}", stdout(&o));
}

#[test]
fn malformed_file_is_usage_error_with_no_output() {
    let path = write("bad.cc", "atoms A B\ncond T = A given\nquery coherence\n");
    let o = solve(&[path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.cc:2:"), "{err}");
}

#[test]
fn missing_file_and_no_input() {
    assert_eq!(solve(&["/nonexistent/problem.cc"]).status.code(), Some(2));
    assert_eq!(solve(&[]).status.code(), Some(2));
    assert_eq!(solve(&["--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn assert_flag_turns_incoherence_into_failure() {
    let path = write(
        "incoherent.cc",
        "atoms A B\ncond T = A given A & B\nassess P(T) = 1/3\nquery coherence\n",
    );
    let p = path.to_str().unwrap();
    let plain = solve(&[p]);
    assert_eq!(plain.status.code(), Some(0));
    assert!(stdout(&plain).contains("incoherent"));
    assert_eq!(solve(&["--assert", p]).status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let path = write("wt2.cc", WEAK_TRANSITIVITY);
    let p = path.to_str().unwrap();
    for args in [vec![p], vec!["--json", p], vec!["--json", "--seed", "7", p]] {
        let a = solve(&args);
        let b = solve(&args);
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn json_rationals_parse_back() {
    let path = write("halves2.cc", HALVES);
    let o = solve(&["--json", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let bounds = &v["results"][0];
    assert_eq!(bounds["query"], "bounds");
    assert_eq!(
        bounds["interval"]["lo"],
        serde_json::json!({"num": 0, "den": 1})
    );
    assert_eq!(
        bounds["interval"]["hi"],
        serde_json::json!({"num": 1, "den": 2})
    );
}
