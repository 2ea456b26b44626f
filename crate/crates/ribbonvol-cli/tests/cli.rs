use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn ribbonvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ribbonvol")).args(args).env_remove("RIBBONVOL_CACHE_DIR").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn bvol_on_theta() {
    let v = json_of(&ribbonvol(&["bvol", "--gn", "1,1", "--lengths", "1,1,1"]));
    assert_eq!(v["value"], "3/8");
    assert_eq!(v["L"], serde_json::json!(["6"]));
    let v = json_of(&ribbonvol(&["bvol", "--gn", "1,1", "--lengths", "1,2,3"]));
    assert_eq!(v["value"], "1/10");
}

#[test]
fn bvol_on_quadrivalent_graph() {
    let v = json_of(&ribbonvol(&["bvol", "-g", "1", "-n", "1", "--lengths", "2,5"]));
    assert_eq!(v["value"], "1/10");
    assert_eq!(v["trivalent"], false);
}

#[test]
fn argument_errors_exit_two() {
    assert_eq!(ribbonvol(&["bvol", "--bogus"]).status.code(), Some(2));
    assert_eq!(ribbonvol(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ribbonvol(&["bvol", "--gn", "1,1", "--lengths", "1,0,1"]).status.code(), Some(2));
    assert_eq!(ribbonvol(&["lattice", "-g", "1", "-n", "2", "--lengths", "4"]).status.code(), Some(2));
    let out = ribbonvol(&["lattice", "-g", "1", "-n", "1", "--lengths", "6", "--power", "1.5", "--exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(ribbonvol(&["thresholds", "-g", "0", "-n", "2"]).status.code(), Some(2));
}

#[test]
fn computation_errors_exit_one() {
    let out = ribbonvol(&["thresholds", "-g", "1", "-n", "2", "--lengths", "3,3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resonant"));
}

#[test]
fn lattice_examples() {
    let v = json_of(&ribbonvol(&["lattice", "-g", "1", "-n", "1", "--lengths", "6", "--power", "1", "--exact"]));
    assert_eq!(v["value"], "5/16");
    assert_eq!(v["graphs"], 2);
    assert_eq!(v["metrics"], 3);
    let v = json_of(&ribbonvol(&["lattice", "-g", "1", "-n", "1", "--lengths", "5"]));
    assert_eq!(v["value"], "0");
    assert_eq!(v["empty_lattice"], true);
}

#[test]
fn enumerate_then_select_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("graphs.json");
    let out = ribbonvol(&["enumerate", "-g", "1", "-n", "1", "--out", file.to_str().unwrap()]);
    assert!(out.status.success());
    let graphs: Vec<Value> = serde_json::from_slice(&fs::read(&file).unwrap()).unwrap();
    assert_eq!(graphs.len(), 1);
    assert_eq!(graphs[0]["darts"], 6);

    let spec = format!("{}#0", file.display());
    let cones = json_of(&ribbonvol(&["cones", "--graph", &spec]));
    assert_eq!(cones["dim"], 2);
    let total: usize = cones["cones"].as_array().unwrap().iter().map(|c| c["simplices"].as_array().unwrap().len()).sum();
    assert!(total >= 1);

    let cells = json_of(&ribbonvol(&["cells", "--graph", &spec, "--lengths", "6"]));
    assert_eq!(cells.as_array().unwrap().len(), 3);
    assert_eq!(cells[0]["density"], "1");

    let bvol = json_of(&ribbonvol(&["bvol", "--graph", &spec, "--lengths", "1,1,1"]));
    assert_eq!(bvol["value"], "3/8");
    assert_eq!(ribbonvol(&["cells", "--graph", &format!("{}#5", file.display()), "--lengths", "6"]).status.code(), Some(2));
}

#[test]
fn csv_output() {
    let out = ribbonvol(&["enumerate", "-g", "1", "-n", "1", "--reduced", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,edges,vertices,automorphisms,sigma,iota,face_labels"));
    let autos: Vec<&str> = lines.map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(autos, ["6", "4"]);
}

#[test]
fn output_is_reproducible_across_worker_counts() {
    let base = ["integrate", "-g", "1", "-n", "2", "--lengths", "4,6", "--power", "1/2", "--samples", "20000", "--seed", "7"];
    let one = ribbonvol(&[&base[..], &["--workers", "1"]].concat());
    let four = ribbonvol(&[&base[..], &["--workers", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let lat = ["lattice", "-g", "1", "-n", "2", "--lengths", "8,10", "--power", "0.7"];
    let one = ribbonvol(&[&lat[..], &["--workers", "1"]].concat());
    let three = ribbonvol(&[&lat[..], &["--workers", "3"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn thresholds_report() {
    let v = json_of(&ribbonvol(&["thresholds", "-g", "1", "-n", "2", "--lengths", "3,5"]));
    assert_eq!(v["computed"], "4/3");
    assert_eq!(v["closed_form"], "4/3");
    assert_eq!(v["agree"], true);
    assert_eq!(v["witnesses"].as_array().unwrap().len(), 2);
}

#[test]
fn table_matches_golden_file() {
    let out = ribbonvol(&["table", "--max-genus", "2", "--max-boundaries", "5"]);
    let v = json_of(&out);
    let row = v.as_array().unwrap().iter().find(|r| r["genus"] == 1 && r["boundaries"] == 2).unwrap();
    assert_eq!(row["computed"], "4/3");
    let golden = include_bytes!("golden/table_g2_n5.json");
    assert_eq!(out.stdout, golden.to_vec());
}

#[test]
fn cache_directory_is_used_and_repaired() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_ribbonvol"))
            .args(["enumerate", "-g", "0", "-n", "4", "--reduced"])
            .env("RIBBONVOL_CACHE_DIR", dir.path())
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    let cached = dir.path().join("reduced-labelled-g0-n4.json");
    assert!(cached.exists());
    assert_eq!(run().stdout, first.stdout);
    fs::write(&cached, b"not json").unwrap();
    assert_eq!(run().stdout, first.stdout);
    assert_ne!(fs::read(&cached).unwrap(), b"not json");
}
