use std::path::PathBuf;
use std::process::{Command, Output};

fn phispec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phispec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn problem(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../problems");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp_file(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("phispec-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn abelian_order_record() {
    let o = phispec(&["run", &problem("abelian_doubling.phi")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("order [1] = finite 3 (exact)"), "{out}");
    assert!(out.contains("order [3] = infinite (exact)"), "{out}");
}

#[test]
fn fp_spectrum_record() {
    let o = phispec(&["run", &problem("fp_integers_mod3.phi")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("spectrum = prefix 1 (exact)"));
}

#[test]
fn rotation_spectrum_record() {
    let o = phispec(&["run", &problem("abelian_rotation.phi")]);
    assert!(stdout(&o).contains("spectrum = prefix 3 (exact)"));
}

#[test]
fn every_shipped_problem_succeeds() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "phi") {
            let o = phispec(&["run", path.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stdout(&o));
            count += 1;
        }
    }
    assert!(count >= 5);
}

#[test]
fn json_records_carry_certificates() {
    let o = phispec(&["run", "--json", &problem("abelian_horizon.phi")]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["query"], "spectrum");
    assert_eq!(lines[0]["result"]["variant"], "prefix-unknown-tail");
    assert_eq!(lines[0]["certificate"], "horizon-limited");
    assert!(lines[0]["elapsed_ms"].is_number());
    assert_eq!(lines[1]["result"]["variant"], "unknown-beyond");
}

#[test]
fn flags_override_file_options() {
    let o = phispec(&["run", "--json", "--horizon", "100", &problem("abelian_horizon.phi")]);
    let first: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first["result"]["variant"], "prefix");
    assert_eq!(first["result"]["max"], 70);
    assert_eq!(first["certificate"], "exact");
}

#[test]
fn parse_errors_are_positioned() {
    let f = temp_file("bad.phi", "backend fp\ngenerators a b\nrelator a*c\n");
    let o = phispec(&["run", &f]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3, column 11"), "{err}");
}

#[test]
fn budget_errors_exit_with_two() {
    let f = temp_file(
        "budget.phi",
        "backend fp\ngenerators a b\nendo a -> a\nendo b -> b\nsubgroup a\ntarget cosets 1\nquery spectrum\n",
    );
    let o = phispec(&["run", "--coset-cap", "100", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("budget exceeded"));
}

#[test]
fn strict_mode_flag() {
    let o = phispec(&["run", "--strict-invariant-core", &problem("fp_integers_mod3.phi")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("spectrum = prefix 1 (exact)"));
}

#[test]
fn selftest_is_deterministic() {
    let a = phispec(&["selftest", "--seed", "42"]);
    let b = phispec(&["selftest", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains(" passed, 0 failed"));
}

#[test]
fn selftest_reports_corruption() {
    let o = phispec(&["selftest", "--inject-corrupt-table"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("FAIL invariant suite corrupted Z5"));
}

#[test]
fn formats_prints_the_grammar() {
    let o = phispec(&["formats"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("target cosets"));
}
