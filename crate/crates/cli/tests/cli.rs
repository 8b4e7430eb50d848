use std::process::{Command, Output};

use ncycle::analysis::SearchResult;
use ncycle::cycle::EvaluationReport;
use serde_json::Value;

fn ncycle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncycle"))
        .args(args)
        .env("LC_ALL", "de_DE.UTF-8")
        .env("LANG", "de_DE.UTF-8")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    stdout(out)
        .split_terminator('\n')
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn table1_matches_published_rows() {
    let out = ncycle(&["table1", "--min-n", "5", "--max-n", "13"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["n", "n_minus_2", "K", "C", "K_violated", "C_violated"]);
    let expected = [
        ["5", "3", "3.6180", "2.0886"],
        ["7", "5", "5.9782", "2.0133"],
        ["9", "7", "8.1943", "2.0113"],
        ["11", "9", "10.3362", "2.0034"],
        ["13", "11", "12.4362", "2.0027"],
    ];
    for (row, want) in rows[1..].iter().zip(expected) {
        assert_eq!(&row[..4], want);
        assert_eq!(&row[4..], ["true", "true"]);
    }
    assert_eq!(rows.len(), 6);
}

#[test]
fn table1_single_row_json() {
    let out = ncycle(&["table1", "--min-n", "5", "--max-n", "5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["manifest"]["command"], "table1");
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0]["c_margin"].as_f64().unwrap() - 0.0886).abs() < 5e-5);
    assert!((rows[0]["k_margin"].as_f64().unwrap() - 0.6180).abs() < 5e-5);
}

#[test]
fn table1_rejects_even_range() {
    let out = ncycle(&["table1", "--min-n", "6", "--max-n", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
    assert_eq!(
        ncycle(&["table1", "--min-n", "9", "--max-n", "5"]).status.code(),
        Some(2)
    );
}

#[test]
fn sixcycle_reports() {
    let out = ncycle(&["sixcycle"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows[1][0], "kcbs");
    assert_eq!(rows[1][2], "3.0902");
    assert_eq!(rows[2][0], "locality6");
    assert_eq!(rows[2][3], "4.0550");

    let out = ncycle(&["sixcycle", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results[0]["per_term"].as_array().unwrap().len(), 5);
    assert_eq!(results[1]["per_term"].as_array().unwrap().len(), 6);
    let report: EvaluationReport = serde_json::from_value(results[1].clone()).unwrap();
    assert!(report.violated && (report.total.abs() - 4.055).abs() < 1e-3);
}

#[test]
fn lhv_bounds() {
    for (args, n, max) in [
        (&["lhv", "--n", "5"][..], "5", "3"),
        (&["lhv", "--n", "10"][..], "10", "8"),
        (&["lhv", "--n", "5", "--pattern", "++++-"][..], "5", "3"),
        (&["lhv", "--pattern", "--+-+++"][..], "7", "5"),
    ] {
        let out = ncycle(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let rows = csv_rows(&out);
        assert_eq!(rows[1][1], n);
        assert_eq!(rows[1][2], max);
    }
    let default = csv_rows(&ncycle(&["lhv", "--n", "5"]));
    let spelled = csv_rows(&ncycle(&["lhv", "--n", "5", "--pattern", "++++-"]));
    assert_eq!(default, spelled);
}

#[test]
fn lhv_rejects_bad_input() {
    for args in [
        &["lhv", "--n", "5", "--pattern", "+++--"][..],
        &["lhv", "--pattern", "++x+-"],
        &["lhv", "--n", "6", "--pattern", "++++-"],
        &["lhv", "--n", "3"],
        &["lhv", "--n", "25"],
        &["lhv"],
    ] {
        assert_eq!(ncycle(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn figure1_rows() {
    let out = ncycle(&["figure1", "--max-n", "17"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["n", "C", "K", "K_over_n"]);
    let n: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(n, ["5", "7", "9", "11", "13", "15", "17"]);
    assert_eq!(rows[1][1], "2.0886");
    let ratios: Vec<f64> = rows[1..].iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(ncycle(&["figure1", "--max-n", "16"]).status.code(), Some(2));
}

#[test]
fn search_regression_and_parity() {
    let out = ncycle(&["search", "--l", "5", "--regression-theorem1", "--seeds", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let result: SearchResult = serde_json::from_slice(&out.stdout).unwrap();
    assert!(result.joint_margin >= 0.0886 - 1e-4);

    let out = ncycle(&["search", "--l", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        ncycle(&["search", "--l", "5", "--menu", "B1B2,B9"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ncycle(&["search", "--regression-theorem1", "--menu", "B0,B1B2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn open_problem_search_is_labeled() {
    let out = ncycle(&["search", "--l", "5", "--seeds", "8", "--json"]);
    let code = out.status.code().unwrap();
    let v = json(&out);
    let result: SearchResult = serde_json::from_value(v["results"][0].clone()).unwrap();
    assert_eq!(result.locality_report.n, 10);
    assert_eq!(result.noncontextuality_report.n, 5);
    match code {
        0 => assert_eq!(v["results"][0]["verdict"], "joint_violation"),
        1 => {
            assert_eq!(v["results"][0]["verdict"], "inconclusive");
            assert!(String::from_utf8_lossy(&out.stderr).contains("inconclusive"));
        }
        other => panic!("exit {other}"),
    }
    assert_eq!(v["manifest"]["parameters"]["menu"], "B1B2,B2B3,B3B4,B4B0,B0");
}

#[test]
fn search_is_reproducible_across_runs() {
    let args = [
        "search",
        "--l",
        "5",
        "--seeds",
        "4",
        "--max-rounds",
        "10",
        "--seed-base",
        "17",
    ];
    let a = ncycle(&args);
    let b = ncycle(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_suite_and_self_test() {
    let out = ncycle(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(
        rows[0],
        ["identity", "kind", "statistic", "tolerance", "cases", "passed"]
    );
    assert!(rows[1..].iter().all(|r| r[5] == "true"));

    let out = ncycle(&["verify", "--max-m", "8", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["manifest"]["parameters"]["max_m"], "8");
    assert!(v["results"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    let out = ncycle(&["verify", "--self-test-negative"]);
    assert_eq!(out.status.code(), Some(1));
    let failed: Vec<_> = csv_rows(&out)[1..]
        .iter()
        .filter(|r| r[5] == "false")
        .map(|r| r[0].clone())
        .collect();
    assert_eq!(failed, ["xcs_polynomial"]);
}

#[test]
fn json_reports_round_trip() {
    for args in [
        &["table1", "--json"][..],
        &["sixcycle", "--json"],
        &["lhv", "--n", "9", "--json"],
        &["figure1", "--json"],
        &["verify", "--max-m", "6", "--json"],
        &["search", "--l", "5", "--regression-theorem1", "--seeds", "2", "--json"],
    ] {
        let out = ncycle(args);
        let first: Value = json(&out);
        let text = serde_json::to_string(&first).unwrap();
        let second: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(first, second, "{args:?}");
        assert_eq!(text, serde_json::to_string(&second).unwrap());
        let manifest = &first["manifest"];
        assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
        let ts = manifest["timestamp"].as_str().unwrap();
        assert!(ts.ends_with('Z') && ts.contains('T'), "{ts}");
    }
}

#[test]
fn csv_is_locale_independent() {
    for args in [
        &["table1"][..],
        &["sixcycle"],
        &["figure1"],
        &["lhv", "--n", "6"],
        &["verify", "--max-m", "4"],
    ] {
        let out = ncycle(args);
        let text = stdout(&out);
        assert!(!text.contains('\r'));
        assert!(text.ends_with('\n'));
        let rows = csv_rows(&out);
        let width = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == width), "{args:?}");
        let numeric = |f: &str| f.trim_start_matches('-').starts_with(|c: char| c.is_ascii_digit());
        for field in rows[1..].iter().flatten().flat_map(|f| f.split(';')) {
            assert!(field.is_ascii());
            if numeric(field) {
                assert!(field.parse::<f64>().is_ok(), "{args:?}: {field}");
            }
        }
    }
}

#[test]
fn tolerance_flag_controls_verdicts() {
    let out = ncycle(&["table1", "--min-n", "5", "--max-n", "5", "--tolerance", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(csv_rows(&out)[1][4..], ["true", "false"]);
    assert_eq!(ncycle(&["sixcycle", "--tolerance", "-1"]).status.code(), Some(2));
}
