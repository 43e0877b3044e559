mod common;

use common::*;
use proptest::prelude::*;

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn corrected_growth_reaches_four_times_initial_income() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = ecodyn(&[
        "harrod-corrected", "--mu", "0.5", "--nu-star", "10", "--t-end", "10", "--steps", "1000", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(r.headers().unwrap().get(0), Some("t"));
    let last = r.records().last().unwrap().unwrap();
    let y: f64 = last[1].parse().unwrap();
    assert!((y - 4.0).abs() <= 4e-6);
    assert!(String::from_utf8_lossy(&o.stdout).contains("forecast_horizon: 10"));
}

#[test]
fn pole_inside_horizon_is_a_numerical_failure() {
    let o = ecodyn(&["harrod-corrected", "--mu", "0.5", "--nu-star", "10", "--t-end", "25"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    let msg = stderr(&o);
    assert!(msg.starts_with("error: "), "{msg}");
    assert!(msg.contains("pole") && msg.contains("= 20"), "{msg}");
}

#[test]
fn stock_flow_equation_is_inconsistent() {
    let o = ecodyn(&["dim-check", "--relation", "K = nu*Y", "--dims", "K:$, Y:$/s, nu:1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict,inconsistent"));
    let o = ecodyn(&["dim-check", "--relation", "K = nu*Y*T", "--dims", "K:$, Y:$/s, nu:1, T:s"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict,consistent"));
}

#[test]
fn validation_errors_exit_two_and_name_the_key() {
    let cases: &[(&[&str], &str)] = &[
        (&["harrod", "--mu", "0.5", "--nu", "1", "--t-end", "1", "--bogus", "1"], "--bogus"),
        (&["harrod", "--mu", "0.5", "--t-end", "1"], "--nu"),
        (&["harrod", "--mu", "abc", "--nu", "1", "--t-end", "1"], "--mu"),
        (&["harrod", "--mu", "0.5", "--nu", "-1", "--t-end", "1"], "nu"),
        (&["scale-check", "--model", "phillips", "--mu", "0.5", "--t0-a", "1", "--t0-b", "2", "--t-end", "1"], "kappa"),
        (&["fredholm-solve", "--kernel", "sinc"], "kernel"),
        (&["leontief-static", "--matrix", "/nonexistent/a.csv", "--demand", "1"], "/nonexistent/a.csv"),
        (&["nonsense"], "nonsense"),
    ];
    for (args, key) in cases {
        let o = ecodyn(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(key), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn characteristic_lambda_is_a_numerical_failure() {
    let lambda = format!("{}", -6.0 + 4.0 * 3f64.sqrt());
    let o = ecodyn(&["fredholm-solve", "--kernel", "t-plus-eta", "--lambda", &lambda]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("characteristic"));
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = ecodyn(&["harrod-corrected", "--mu", "0.5", "--nu-star", "10", "--t-end", "25", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unwritable_destination_is_an_io_error() {
    let o = ecodyn(&["multiplier", "--mu", "0.5", "--lambda", "1", "--t-end", "1", "--out", "/nonexistent/dir/y.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/dir/y.csv"));
}

#[test]
fn default_steps_come_from_the_environment() {
    let args = ["multiplier", "--mu", "0.5", "--lambda", "1", "--t-end", "1"];
    let rows = |o: std::process::Output| String::from_utf8(o.stdout).unwrap().lines().count();
    assert_eq!(rows(ecodyn(&args)), 1002);
    let o = std::process::Command::new(bin()).args(args).env("ECODYN_DEFAULT_STEPS", "10").output().unwrap();
    assert_eq!(rows(o), 12);
    let o = std::process::Command::new(bin()).args(args).env("ECODYN_DEFAULT_STEPS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ECODYN_DEFAULT_STEPS"));
}

#[test]
fn scenario_overrides_and_json_meta() {
    let scn = scenario_dir().join("harrod_corrected.scn");
    let o = ecodyn(&["--scenario", scn.to_str().unwrap(), "--steps", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["meta"]["command"], "harrod-corrected");
    assert_eq!(doc["meta"]["params"]["steps"], 4);
    assert_eq!(doc["meta"]["params"]["nu_star"], 10.0);
    assert_eq!(doc["data"]["t"].as_array().unwrap().len(), 5);
    assert_eq!(doc["report"]["forecast_horizon"], 10.0);
}

#[test]
fn spectrum_json_has_two_characteristic_numbers() {
    let o = ecodyn(&["fredholm-spectrum", "--kernel", "t-plus-eta", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let nums = doc["report"]["characteristic_numbers"].as_array().unwrap();
    assert_eq!(nums.len(), 2);
    let mut re: Vec<f64> = nums.iter().map(|z| z[0].as_f64().unwrap()).collect();
    re.sort_by(f64::total_cmp);
    assert!((re[0] - (-6.0 - 4.0 * 3f64.sqrt())).abs() < 1e-4);
    assert!((re[1] - (-6.0 + 4.0 * 3f64.sqrt())).abs() < 1e-4);
}

#[test]
fn constant_trajectory_gives_header_plus_one_row_per_node() {
    let o = ecodyn(&["harrod", "--mu", "0", "--nu", "1", "--t-end", "1", "--steps", "2"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, "t,Y,C,S,I\n0,1,1,0,0\n0.5,1,1,0,0\n1,1,1,0,0\n");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_bit_exact(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..40)) {
        let t: Vec<f64> = (0..values.len()).map(|k| k as f64 * 0.1).collect();
        let table = ecodyn::Table::from_columns("t", t.clone(), vec![("v".into(), values.clone())]);
        let out = ecodyn::Output { command: "x".into(), params: serde_json::json!({}), table: Some(table), report: Default::default() };
        let bytes = out.to_csv().unwrap();
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let back: Vec<(f64, f64)> = r.records().map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        }).collect();
        prop_assert_eq!(back.len(), values.len());
        for ((bt, bv), (et, ev)) in back.iter().zip(t.iter().zip(&values)) {
            prop_assert_eq!(bt.to_bits(), et.to_bits());
            prop_assert_eq!(bv.to_bits(), ev.to_bits());
        }
    }
}
