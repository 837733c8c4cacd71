mod common;

use std::process::{Command, Output};

use paradox_lab::io::SweepResult;

use common::data;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paradox-lab")).args(args).output().unwrap()
}

fn with_instance(name: &str, args: &[&str]) -> Output {
    let path = data(name);
    let mut all = vec!["--instance", path.to_str().unwrap()];
    all.extend_from_slice(args);
    run(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_concentrated() {
    let o = with_instance("and_concentrated.json", &["check", "--n", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for line in [
        "kappa1 = false",
        "kappa2 = true",
        "kappa3 = true",
        "kappa4 = false",
        "max rate = exp(-Theta(n))",
        "min rate = exp(-Theta(n))",
    ] {
        assert!(text.contains(line), "{text}");
    }
}

#[test]
fn exact_reports_fractions_and_witnesses() {
    let o = with_instance("and_uniform_skewed.json", &["exact", "--n", "3", "--precision", "rational"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("4 assignments, mode exact"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("max = ") && l.contains(" = ") && l.contains(" at ")), "{text}");
}

#[test]
fn monte_carlo_is_reproducible_from_the_command_line() {
    let args = ["mc", "--n", "7", "--trials", "3000", "--seed", "11"];
    let a = with_instance("and_uniform_skewed.json", &args);
    let b = with_instance("and_uniform_skewed.json", &args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("mode mc"));
}

#[test]
fn sweep_writes_sorted_csv_and_fit_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("identity.csv");
    let o = with_instance(
        "identity_pair.json",
        &[
            "sweep", "--n-from", "20", "--n-to", "120", "--step", "10", "--parity", "even", "--mode", "exact", "--output",
            csv.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), paradox_lab::io::CSV_HEADER);
    let table = SweepResult::read_csv(text.as_bytes()).unwrap();
    let ns: Vec<u64> = table.rows.iter().map(|r| r.n).collect();
    assert_eq!(ns, (20..=120).step_by(10).collect::<Vec<u64>>());
    for r in &table.rows {
        let scaled = r.max_est * (r.n as f64).sqrt();
        assert!((0.9..1.0).contains(&scaled), "{r:?}");
        assert!((0.0..=1.0).contains(&r.min_est));
    }
    let fit = run(&["fit", "--family", "inv-sqrt-shift", "--input", csv.to_str().unwrap(), "--column", "max"]);
    assert!(fit.status.success(), "{}", stderr(&fit));
    assert!(stdout(&fit).starts_with("max inv-sqrt-shift: a=0.96"), "{}", stdout(&fit));
}

#[test]
fn sweep_to_stdout_in_mc_mode() {
    let o = with_instance("and_concentrated.json", &["sweep", "--n-from", "3", "--n-to", "5", "--mode", "mc", "--trials", "500"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",mc")));
}

#[test]
fn polyhedra_of_split_thresholds() {
    let o = with_instance("split_thresholds.json", &["polyhedra"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("2 paradox polyhedra"));
    assert!(text.contains("H(1,0):\n  [1/4, -3/4] <= 0\n  [-13/20, 7/20] <= -1\n"), "{text}");
    assert!(text.contains("H(0,1):"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["check", "--n", "2", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["explode"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let bad = with_instance("bad_sum.json", &["exact", "--n", "2"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stderr(&bad).contains("$.distributions[1]"), "{}", stderr(&bad));

    assert_eq!(run(&["exact", "--n", "2"]).status.code(), Some(3));
    assert_eq!(run(&["--instance", "/nonexistent/x.json", "exact", "--n", "2"]).status.code(), Some(1));

    let budget = with_instance("and_uniform_skewed.json", &["exact", "--n", "300", "--budget-states", "1000"]);
    assert_eq!(budget.status.code(), Some(4));
    assert!(stderr(&budget).contains("resource budget exceeded"));
}

#[test]
fn positivity_is_a_warning_except_for_check() {
    let exact = with_instance("zero_weight.json", &["exact", "--n", "3"]);
    assert!(exact.status.success());
    assert!(stderr(&exact).contains("warning"));
    let check = with_instance("zero_weight.json", &["check", "--n", "3"]);
    assert_eq!(check.status.code(), Some(3));
    assert!(stderr(&check).contains("strictly positive"));
}
