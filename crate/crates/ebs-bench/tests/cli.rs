//! End-to-end tests of the binary: exit codes, record schemas, and
//! reproducibility of emitted bytes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ebs_bench::fit::{aggregate, fit_power_law};
use ebs_bench::records::read_records;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ebs-bench"))
}

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary must launch")
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "exit {:?}, stderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn group_reports_three_families_for_h2() {
    let h2 = data("h2_bond0750.txt");
    let out = stdout_of(&run(&["group", h2.to_str().unwrap()]));
    assert!(out.contains("groups: 3"), "{out}");
    assert!(out.contains("basis ZZ"));
    assert!(out.contains("basis YY"));
    assert!(out.contains("basis XX"));
    assert!(out.contains("hoeffding_rounds"));
}

#[test]
fn group_reports_single_family_for_single_term() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("z.txt");
    std::fs::write(&file, "1.0 Z\n").unwrap();
    let out = stdout_of(&run(&["group", file.to_str().unwrap()]));
    assert!(out.contains("groups: 1"), "{out}");
}

#[test]
fn identical_invocations_emit_identical_bytes() {
    let h2 = data("h2_bond0750.txt");
    let args = [
        "estimate",
        h2.to_str().unwrap(),
        "--epsilon",
        "0.05",
        "--trials",
        "6",
        "--seed",
        "11",
    ];
    let first = stdout_of(&run(&args));
    let second = stdout_of(&run(&args));
    assert_eq!(first, second);
    // worker count must not leak into the records
    let mut limited = args.to_vec();
    limited.extend(["--workers", "1"]);
    assert_eq!(first, stdout_of(&run(&limited)));
}

#[test]
fn different_seeds_differ() {
    let h2 = data("h2_bond0750.txt");
    let base = [
        "estimate",
        h2.to_str().unwrap(),
        "--epsilon",
        "0.05",
        "--trials",
        "3",
    ];
    let mut a = base.to_vec();
    a.extend(["--seed", "1"]);
    let mut b = base.to_vec();
    b.extend(["--seed", "2"]);
    let record_lines = |s: String| -> Vec<String> {
        s.lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_owned)
            .collect()
    };
    assert_ne!(
        record_lines(stdout_of(&run(&a))),
        record_lines(stdout_of(&run(&b)))
    );
}

#[test]
fn estimate_records_have_full_schema() {
    let h2 = data("h2_bond0750.txt");
    let out = stdout_of(&run(&[
        "estimate",
        h2.to_str().unwrap(),
        "--epsilon",
        "0.1",
        "--trials",
        "4",
        "--estimator",
        "single-shot",
    ]));
    let records = read_records(out.as_bytes()).unwrap();
    assert_eq!(records.len(), 4);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.hamiltonian, "h2_bond0750");
        assert_eq!(r.estimator, "single-shot");
        assert_eq!(r.trial, i as u64);
        assert_eq!(r.epsilon, 0.1);
        assert!(r.rounds_used >= r.samples_used);
        assert!((r.abs_error - (r.estimate - r.exact_energy).abs()).abs() < 1e-15);
        assert!(r.terminated_by == "bernstein" || r.terminated_by == "hoeffding_cap");
    }
}

#[test]
fn zero_variance_instance_is_exact_at_minimum_stop() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("z.txt");
    std::fs::write(&file, "1.0 Z\n").unwrap();
    let out = stdout_of(&run(&[
        "estimate",
        file.to_str().unwrap(),
        "--epsilon",
        "0.1",
        "--trials",
        "5",
        "--seed",
        "9",
    ]));
    let records = read_records(out.as_bytes()).unwrap();
    assert_eq!(records.len(), 5);
    for r in &records {
        assert_eq!(r.abs_error, 0.0);
        assert_eq!(r.terminated_by, "bernstein");
        // first passing check of the zero-variance schedule under cap 600
        assert_eq!(r.samples_used, 491);
        assert_eq!(r.rounds_used, 491);
    }
}

#[test]
fn sweep_covers_both_estimators_in_order() {
    let h2 = data("h2_bond0750.txt");
    let out = stdout_of(&run(&[
        "sweep",
        h2.to_str().unwrap(),
        "--epsilon",
        "0.1",
        "0.033",
        "0.01",
        "--trials",
        "4",
        "--seed",
        "5",
    ]));
    let records = read_records(out.as_bytes()).unwrap();
    assert_eq!(records.len(), 3 * 2 * 4);
    // epsilon ascending, grouped before single-shot, trials in order
    let mut index = 0;
    let one_norm = 1.5318;
    for eps in [0.01, 0.033, 0.1] {
        for estimator in ["grouped", "single-shot"] {
            for trial in 0..4 {
                let r = &records[index];
                assert!((r.epsilon - eps * one_norm).abs() < 1e-12);
                assert_eq!(r.estimator, estimator);
                assert_eq!(r.trial, trial);
                index += 1;
            }
        }
    }
}

#[test]
fn sweep_medians_do_not_increase_with_looser_targets() {
    let xy = data("xy_pairs_n4.txt");
    let out = stdout_of(&run(&[
        "sweep",
        xy.to_str().unwrap(),
        "--epsilon",
        "0.01",
        "0.033",
        "0.1",
        "--trials",
        "5",
        "--seed",
        "2",
    ]));
    let records = read_records(out.as_bytes()).unwrap();
    for curve in aggregate(&records).values() {
        // curves are epsilon-ascending (median rounds, epsilon) points
        for pair in curve.windows(2) {
            assert!(
                pair[0].0 >= pair[1].0,
                "median rounds rose from {:?} to {:?}",
                pair[0],
                pair[1]
            );
        }
    }
}

#[test]
fn sweep_absolute_flag_skips_rescaling() {
    let h2 = data("h2_bond0750.txt");
    let out = stdout_of(&run(&[
        "sweep",
        h2.to_str().unwrap(),
        "--epsilon",
        "0.1",
        "--absolute",
        "--trials",
        "2",
    ]));
    let records = read_records(out.as_bytes()).unwrap();
    assert!(records.iter().all(|r| r.epsilon == 0.1));
}

#[test]
fn fit_round_trips_through_csv() {
    let h2 = data("h2_bond0750.txt");
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        h2.to_str().unwrap(),
        "--epsilon",
        "0.2",
        "0.1",
        "0.05",
        "--trials",
        "4",
        "--seed",
        "3",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let records = read_records(std::fs::File::open(&csv_path).unwrap()).unwrap();
    let curves = aggregate(&records);
    let fit_out = stdout_of(&run(&["fit", csv_path.to_str().unwrap()]));
    for line in fit_out.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5, "row: {line}");
        let expected = fit_power_law(&curves[fields[0]]).unwrap();
        let amplitude: f64 = fields[1].parse().unwrap();
        let exponent: f64 = fields[2].parse().unwrap();
        assert!((amplitude - expected.amplitude).abs() < 1e-12);
        assert!((exponent - expected.exponent).abs() < 1e-12);
        assert_eq!(fields[4].parse::<usize>().unwrap(), expected.points);
    }
}

#[test]
fn curve_rows_are_deterministic_for_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("h2_bond0750.txt")).unwrap();
    std::fs::write(dir.path().join("a.txt"), &text).unwrap();
    std::fs::write(dir.path().join("b.txt"), &text).unwrap();
    let args = [
        "curve",
        dir.path().to_str().unwrap(),
        "--epsilon",
        "0.05",
        "--trials",
        "4",
        "--seed",
        "13",
    ];
    let first = stdout_of(&run(&args));
    assert_eq!(first, stdout_of(&run(&args)), "repeat run must be identical");

    let rows: Vec<Vec<String>> = first
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "a");
    assert_eq!(rows[1][0], "b");
    // identical contents must produce identical numbers under one seed
    assert_eq!(rows[0][1..], rows[1][1..]);
    for row in &rows {
        let median_rounds: f64 = row[3].parse().unwrap();
        let budget: f64 = row[4].parse().unwrap();
        let ratio: f64 = row[5].parse().unwrap();
        assert!((ratio - median_rounds / budget).abs() < 1e-12);
    }
}

#[test]
fn usage_errors_exit_2() {
    let h2 = data("h2_bond0750.txt");
    // --epsilon without any value
    let out = run(&["sweep", h2.to_str().unwrap(), "--epsilon"]);
    assert_eq!(out.status.code(), Some(2));
    // domain violations caught before any work
    let out = run(&["estimate", h2.to_str().unwrap(), "--delta", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["estimate", h2.to_str().unwrap(), "--epsilon", "-1.0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["estimate", h2.to_str().unwrap(), "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown subcommand
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_3() {
    let out = run(&["estimate", "/nonexistent/missing.txt"]);
    assert_eq!(out.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1.0 ZI\n0.5 QQ\n").unwrap();
    let out = run(&["estimate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn numerical_errors_exit_4() {
    // a loose target makes the Hoeffding cap too small for even ten grouped
    // samples, so schedule construction fails
    let h2 = data("h2_bond0750.txt");
    let out = run(&[
        "estimate",
        h2.to_str().unwrap(),
        "--epsilon",
        "1.0",
        "--trials",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4));

    // fitting a single sweep point is underdetermined
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("one.csv");
    let ok = run(&[
        "sweep",
        h2.to_str().unwrap(),
        "--epsilon",
        "0.1",
        "--trials",
        "2",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert!(ok.status.success());
    let out = run(&["fit", csv_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}
