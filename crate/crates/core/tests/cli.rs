use std::path::Path;
use std::process::{Command, Output};

use epiproj::io::{read_binary_vector, write_binary_vector};

fn epiproj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epiproj"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn project_l1_level_example() {
    let out = epiproj(&[
        "project",
        "--f",
        "l1",
        "--mode",
        "level",
        "--alpha",
        "1",
        "--x",
        "[-2,0.8,3,1.3]",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["branch"], "root_case");
    assert!((v["lambda_star"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    let p: Vec<f64> = serde_json::from_value(v["point"].clone()).unwrap();
    for (a, b) in p.iter().zip([0.0, 0.0, 1.0, 0.0]) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn project_neglog_epi_example() {
    let out = epiproj(&[
        "project",
        "--f",
        "neglog:n=1",
        "--mode",
        "epi",
        "--alpha",
        "-1",
        "--x",
        "[1]",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let lam = v["lambda_star"].as_f64().unwrap();
    assert!((lam - 0.634_883_181_973_691_6).abs() < 1e-12);
    assert!((v["ordinate"].as_f64().unwrap() - (lam - 1.0)).abs() < 1e-15);
}

#[test]
fn project_box_epi_domain_case() {
    let out = epiproj(&["project", "--f", "box", "--mode", "epi", "--alpha", "5", "--x", "[0]"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["branch"], "domain_case");
    assert_eq!(v["point"], serde_json::json!([0.0]));
    assert_eq!(v["lambda_star"], 0.0);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["project", "--f", "nope", "--mode", "epi", "--alpha", "0", "--x", "[1]"],
        vec!["project", "--f", "l1", "--mode", "epi", "--alpha", "0", "--x", "[1,"],
        vec![
            "project", "--f", "l1", "--mode", "sideways", "--alpha", "0", "--x", "[1]",
        ],
        vec!["project", "--f", "l1", "--mode", "epi", "--alpha", "0"],
        vec![
            "project", "--f", "negsqrt", "--mode", "epi", "--alpha", "-2", "--x", "[1]",
        ],
        vec!["bench", "--experiment", "l1ball", "--algorithms", "quicksort"],
        vec![
            "bench",
            "--experiment",
            "sumlog",
            "--algorithms",
            "sort_baseline",
            "--trials",
            "1",
        ],
    ] {
        let out = epiproj(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn solver_failure_exits_nonzero() {
    let out = epiproj(&[
        "project",
        "--f",
        "absbox:scale=2",
        "--mode",
        "epi",
        "--alpha",
        "-1",
        "--x",
        "[4]",
        "--solver",
        "newton-full",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Cycled"));

    let out = epiproj(&["project", "--f", "l1", "--mode", "level", "--alpha", "-1", "--x", "[3]"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn binary_input_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let xin = dir.path().join("x.bin");
    let json_out = dir.path().join("r.json");
    let point_out = dir.path().join("p.bin");
    write_binary_vector(std::fs::File::create(&xin).unwrap(), &[-2.0, 0.8, 3.0, 1.3]).unwrap();
    let out = epiproj(&[
        "project",
        "--f",
        "l1",
        "--mode",
        "level",
        "--alpha",
        "1",
        "--x-file",
        path_str(&xin),
        "--format",
        "binary",
        "--solver",
        "bisection-width",
        "--delta",
        "1e-12",
        "--out",
        path_str(&json_out),
        "--point-out",
        path_str(&point_out),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json_out).unwrap()).unwrap();
    assert!((v["lambda_star"].as_f64().unwrap() - 2.0).abs() < 1e-11);
    let p = read_binary_vector(std::fs::File::open(&point_out).unwrap()).unwrap();
    assert_eq!(p.len(), 4);
    assert!((p[2] - 1.0).abs() < 1e-11);

    // truncated stream
    let bytes = std::fs::read(&xin).unwrap();
    std::fs::write(&xin, &bytes[..bytes.len() - 3]).unwrap();
    let out = epiproj(&[
        "project",
        "--f",
        "l1",
        "--mode",
        "level",
        "--alpha",
        "1",
        "--x-file",
        path_str(&xin),
        "--format",
        "binary",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_records_iterates() {
    let out = epiproj(&[
        "project",
        "--f",
        "absbox:scale=2",
        "--mode",
        "epi",
        "--alpha",
        "-1",
        "--x",
        "[4]",
        "--trace",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let trace = v["solver"]["trace"].as_array().unwrap();
    assert!(!trace.is_empty());
    assert_eq!(trace[0]["lambda"], 1.0);
}

#[test]
fn bench_zero_trials_is_header_only() {
    let out = epiproj(&["bench", "--experiment", "l1ball", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("schema_version,"));
}

fn strip_timing(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols[6] = "";
            cols.join(",")
        })
        .collect()
}

#[test]
fn bench_is_deterministic_apart_from_timing() {
    let args = [
        "bench",
        "--experiment",
        "l1ball",
        "--n",
        "20",
        "--sigma",
        "0.1",
        "--trials",
        "300",
        "--seed",
        "9",
        "--algorithms",
        "newton_full,bisection_width,sort_baseline",
    ];
    let a = epiproj(&args);
    let b = epiproj(&args);
    let threaded: Vec<&str> = ["--threads", "1"].into_iter().chain(args).collect();
    let c = epiproj(&threaded);
    for o in [&a, &b, &c] {
        assert_eq!(o.status.code(), Some(0));
    }
    let a = strip_timing(&String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.len(), 4);
    assert_eq!(a, strip_timing(&String::from_utf8_lossy(&b.stdout)));
    assert_eq!(a, strip_timing(&String::from_utf8_lossy(&c.stdout)));
}

#[test]
fn bench_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = epiproj(&[
        "bench",
        "--experiment",
        "sumlog",
        "--n",
        "1",
        "--trials",
        "50",
        "--algorithms",
        "newton_full,bisection_deriv",
        "--out",
        path_str(&path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn verify_smoke_and_negative_control() {
    let out = epiproj(&["verify", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("v.json");
    let out = epiproj(&[
        "verify",
        "--trials",
        "5",
        "--corrupt-prox",
        "1.05",
        "--out",
        path_str(&report),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["schema_version"], 1);
}
