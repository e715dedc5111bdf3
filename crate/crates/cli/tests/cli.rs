use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn validus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_validus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_reports_failures_with_exit_one() {
    let data = format!("person={}", path("person.csv"));
    let args = [
        "validate",
        "--rules",
        &path("person.rules"),
        "--schema",
        &path("person.schema"),
        "--data",
        &data,
    ];
    let out = validus(&args);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let text = stdout(&out);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let positions: Vec<usize> = ["\"rules\"", "\"entries\"", "\"findings\"", "\"summary\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(positions.is_sorted(), "{positions:?}");
    assert_eq!(report["summary"]["failed"], 1);
    assert!(stderr(&out).contains("evaluated to NA"));
}

#[test]
fn csv_report_and_strict_na() {
    let data = format!("person={}", path("person.csv"));
    let rules = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(rules.path(), "nonnegative: age >= 0\n").unwrap();
    let rules = rules.path().to_string_lossy().into_owned();
    let base = ["--rules", &rules, "--schema", &path("person.schema"), "--data", &data];

    let out = validus(&[&["validate", "--format", "csv"][..], &base].concat());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "rule,table,unit,time,result\nnonnegative,person,1,,TRUE\nnonnegative,person,2,,NA\n"
    );

    let out = validus(&[&["validate", "--strict-na"][..], &base].concat());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_and_simplify() {
    let out = validus(&[
        "analyze",
        "--rules",
        &path("income.rules"),
        "--schema",
        &path("income.schema"),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PartialInfeasibility,gender"));

    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("simple.rules");
    let log = dir.path().join("steps.log");
    let out = validus(&[
        "simplify",
        "--rules",
        &path("nonrelaxing.rules"),
        "--schema",
        &path("xy.schema"),
        "-o",
        target.to_str().unwrap(),
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&target).unwrap(), "a: y >= 0\nb: x >= 0\n");
    assert!(std::fs::read_to_string(&log).unwrap().starts_with("nonrelaxing a:"));
}

#[test]
fn infeasible_rules_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("bad.rules");
    std::fs::write(&rules, "a: x > 1\nb: x < 0\n").unwrap();
    for command in ["analyze", "simplify"] {
        let out = validus(&[
            command,
            "--rules",
            rules.to_str().unwrap(),
            "--schema",
            &path("xy.schema"),
        ]);
        assert_eq!(out.status.code(), Some(3), "{command}: {}", stderr(&out));
    }
}

#[test]
fn lint_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("lint.rules");
    std::fs::write(&rules, "t: x >= 0 or x <= 1\nc: x >= 0 and x <= -1\nok: x >= 0\n").unwrap();
    let out = validus(&[
        "lint",
        "--rules",
        rules.to_str().unwrap(),
        "--schema",
        &path("xy.schema"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let kinds: Vec<&str> = report["findings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["Tautology", "Contradiction"]);

    let out = validus(&["classify", "--rules", &path("person.rules"), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("mean_age,ssms,1"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("broken.rules");
    std::fs::write(&rules, "a: x >=\n").unwrap();
    let out = validus(&[
        "analyze",
        "--rules",
        rules.to_str().unwrap(),
        "--schema",
        &path("xy.schema"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1, column"), "{}", stderr(&out));

    let out = validus(&["analyze", "--rules", &path("person.rules")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--schema"));

    let data = format!("ghost={}", path("person.csv"));
    let out = validus(&[
        "validate",
        "--rules",
        &path("person.rules"),
        "--schema",
        &path("person.schema"),
        "--data",
        &data,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not declared"));
}
