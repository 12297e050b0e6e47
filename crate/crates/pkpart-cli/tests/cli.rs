//! End-to-end tests of the binary: flag grammar, output shape, exit codes,
//! and byte-level determinism.

use std::process::Command;

fn pkpart(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_pkpart"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn eppf_single_shape() {
    let (stdout, _, code) = pkpart(&[
        "eppf", "--model", "pd", "--alpha", "0.5", "--theta", "0", "--shape", "2",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"p\":5.0000000000000000e-1"), "{stdout}");
}

#[test]
fn eppf_table_contains_third() {
    let (stdout, _, code) = pkpart(&["eppf", "--model", "ewens", "--theta", "1", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"shape\":[3],\"count\":\"1\",\"p\":3.3333333333333331e-1"));
}

#[test]
fn eppf_brownian_triple_singletons() {
    let (stdout, _, code) = pkpart(&[
        "eppf", "--model", "brownian", "--lambda", "1", "--shape", "1,1,1",
    ]);
    assert_eq!(code, 0);
    // lambda^2 h_{-2}(lambda) at lambda = 1
    assert!(stdout.contains("\"p\":3.4432045758120"), "{stdout}");
}

#[test]
fn kn_laws() {
    let (stdout, _, code) = pkpart(&["kn", "--unconditional", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"exact\":[\"3/8\",\"3/8\",\"1/4\"]"));
    let (stdout, _, code) = pkpart(&["kn", "--lambda", "1", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"law\":\"brownian\""));
    let (stdout, _, code) = pkpart(&["kn", "--n", "1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("[1.0000000000000000e0]"));
}

#[test]
fn sampling_is_reproducible_and_shaped() {
    let args = [
        "sample", "--model", "pd", "--alpha", "0.5", "--theta", "0.5", "--n", "10", "--count",
        "3", "--seed", "7",
    ];
    let (a, _, code_a) = pkpart(&args);
    let (b, _, code_b) = pkpart(&args);
    assert_eq!(code_a, 0);
    assert_eq!(code_b, 0);
    assert_eq!(a, b, "identical command lines must be byte-identical");
    let lines: Vec<&str> = a.trim_end().lines().collect();
    assert_eq!(lines.len(), 4); // header + 3 partitions
    assert!(lines[0].contains("\"seed\":7"));
    assert!(lines[1].starts_with("[["));
}

#[test]
fn gem_masses_sum_below_one() {
    let (stdout, _, code) = pkpart(&[
        "sample", "--gem", "--alpha", "0.5", "--theta", "0", "--k", "5",
    ]);
    assert_eq!(code, 0);
    let line = stdout.trim_end().lines().nth(1).unwrap();
    let masses: Vec<f64> = line
        .trim_matches(['[', ']'])
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(masses.len(), 5);
    assert!(masses.iter().sum::<f64>() < 1.0);
    assert!(masses.iter().all(|&m| m > 0.0));
}

#[test]
fn kn_chain_is_monotone() {
    let (stdout, _, code) = pkpart(&["sample", "--kn-chain", "--lambda", "1", "--n", "100"]);
    assert_eq!(code, 0);
    let line = stdout.trim_end().lines().nth(1).unwrap();
    let path: Vec<u32> = line
        .trim_matches(['[', ']'])
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(path.len(), 100);
    assert_eq!(path[0], 1);
    for w in path.windows(2) {
        assert!(w[1] == w[0] || w[1] == w[0] + 1);
    }
}

#[test]
fn verify_single_check_and_csv() {
    let (stdout, _, code) = pkpart(&["verify", "--only", "hfiden"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"name\":\"hfiden\",\"status\":\"pass\""));
    // a csv row per report
    let (stdout, _, code) = pkpart(&[
        "verify", "--only", "mills-chain", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("name,status,"));
    assert!(stdout.contains("mills-chain,pass,"));
}

#[test]
fn usage_errors_exit_64() {
    let (_, _, code) = pkpart(&["eppf", "--model", "pd", "--alpha", "0.5"]);
    assert_eq!(code, 64); // --theta missing
    let (_, _, code) = pkpart(&["eppf", "--model", "nope", "--shape", "2"]);
    assert_eq!(code, 64);
    let (_, _, code) = pkpart(&["kn", "--lambda", "1", "--unconditional", "--n", "3"]);
    assert_eq!(code, 64);
    let (_, _, code) = pkpart(&["bogus"]);
    assert_eq!(code, 64);
    let (_, _, code) = pkpart(&[
        "eppf", "--model", "ewens", "--theta", "1", "--shape", "2", "--quad-tol", "1",
    ]);
    assert_eq!(code, 64);
}

#[test]
fn numerical_error_exits_2() {
    // conditioned stable far below the series floor refuses
    let (_, stderr, code) = pkpart(&[
        "eppf", "--model", "stable", "--alpha", "0.7", "--t", "0.01", "--shape", "2",
    ]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("numerical accuracy"));
}

#[test]
fn usage_error_never_writes_partial_output() {
    let dir = std::env::temp_dir().join(format!("pkpart-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.json");
    let (_, _, code) = pkpart(&[
        "eppf", "--model", "pd", "--alpha", "0.5", "--shape", "2", "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 64);
    assert!(!path.exists(), "no partial file on usage error");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn moments_both_modes() {
    let (stdout, _, code) = pkpart(&["moments", "--model", "brownian", "--lambda", "1", "--q", "1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"mu\":3.4432045758120"), "{stdout}");
    let (stdout, _, code) = pkpart(&[
        "moments", "--model", "pd", "--alpha", "0.5", "--theta", "0", "--m", "2", "--k", "1",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"value\":5.0000000000000000e-1"));
}

#[test]
fn predict_empty_partition() {
    let (stdout, _, code) = pkpart(&["predict", "--model", "ewens", "--theta", "2"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"probabilities\":[1.0000000000000000e0]"));
}

#[test]
fn gg_sampler_runs() {
    let (stdout, _, code) = pkpart(&[
        "sample", "--model", "gg", "--alpha", "0.5", "--b", "1", "--c", "0.5", "--n", "5",
        "--count", "2", "--seed", "3", "--delta", "1e-3",
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim_end().lines().count(), 3);
}
