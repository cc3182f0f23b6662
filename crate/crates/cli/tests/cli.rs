// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pdn_core::{Benchmark, ScenarioConfig};
use tempfile::TempDir;

fn pdnsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdnsim")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn default_config_round_trips() {
    for b in Benchmark::ALL {
        let out = pdnsim(&["default-config", "--benchmark", b.name()]);
        assert_eq!(code(&out), 0);
        let text = String::from_utf8(out.stdout).unwrap();
        let parsed = ScenarioConfig::from_json(&text).unwrap();
        assert_eq!(parsed, ScenarioConfig::benchmark(b));
        assert_eq!(parsed.to_json() + "\n", text);
    }
}

#[test]
fn invalid_config_exits_one_and_names_the_field() {
    let dir = TempDir::new().unwrap();
    let mut c = ScenarioConfig::default();
    c.chip.width_mm = 0.0;
    let file = dir.path().join("bad.json");
    fs::write(&file, c.to_json()).unwrap();
    let out = pdnsim(&["validate", "--config", path(&file)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("chip.width_mm"));

    fs::write(&file, "{ not json").unwrap();
    assert_eq!(code(&pdnsim(&["dc", "--config", path(&file)])), 1);
}

#[test]
fn usage_errors_exit_sixty_four() {
    assert_eq!(code(&pdnsim(&["frobnicate"])), 64);
    assert_eq!(code(&pdnsim(&["sweep", "--axis", "vrm_count"])), 64);
    assert_eq!(code(&pdnsim(&["dc", "--method", "rk4"])), 64);
    assert_eq!(code(&pdnsim(&["--help"])), 0);
}

#[test]
fn unwritable_output_exits_three() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = pdnsim(&["dc", "--tiles", "4", "--out-dir", path(&blocker.join("sub"))]);
    assert_eq!(code(&out), 3);
}

#[test]
fn dc_writes_map_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = pdnsim(&["dc", "--tiles", "6", "--out-dir", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "ir_map.csv");
    assert_eq!(csv.lines().next(), Some("i,j,drop_mv"));
    assert_eq!(csv.lines().count(), 1 + 36);
    assert_eq!(read(dir.path(), "ir_map.svg").matches("<rect").count(), 36);
    let manifest = read(dir.path(), "dc.manifest.txt");
    assert!(manifest.contains("ir_map.csv") && manifest.contains("snapshot:"));
}

#[test]
fn manifest_replays_to_identical_outputs() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = ["tran", "--tiles", "5", "--t-end", "8", "--method", "be", "--out-dir", path(&a)];
    assert_eq!(code(&pdnsim(&first)), 0);
    let manifest = a.join("tran.manifest.txt");
    let replay = pdnsim(&["tran", "--config", path(&manifest), "--out-dir", path(&b)]);
    assert_eq!(code(&replay), 0, "{}", String::from_utf8_lossy(&replay.stderr));
    assert_eq!(read(&a, "waveform.csv"), read(&b, "waveform.csv"));
}

#[test]
fn decap_sweep_lowers_noise() {
    let dir = TempDir::new().unwrap();
    let out = pdnsim(&[
        "sweep",
        "--axis",
        "onchip_decap",
        "--values",
        "1,5,10,15",
        "--tiles",
        "6",
        "--t-end",
        "20",
        "--power-map",
        "uniform",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(dir.path(), "sweep.csv");
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let psn: Vec<f64> = rdr.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
    assert_eq!(psn.len(), 4);
    assert!(psn.windows(2).all(|w| w[0] > w[1]), "{psn:?}");
}

#[test]
fn failed_sweep_points_exit_two_and_keep_their_rows() {
    let dir = TempDir::new().unwrap();
    let out = pdnsim(&[
        "sweep",
        "--config",
        "/dev/null",
        "--axis",
        "vrm_gap",
        "--values",
        "1,-1",
        "--dc-only",
        "--out-dir",
        path(dir.path()),
    ]);
    // an empty file is not a scenario
    assert_eq!(code(&out), 1);

    let c = ScenarioConfig::benchmark(Benchmark::OnPackage2).with_tiles(4, 4);
    let file = dir.path().join("c.json");
    fs::write(&file, c.to_json()).unwrap();
    let out = pdnsim(&[
        "sweep",
        "--config",
        path(&file),
        "--axis",
        "vrm_gap",
        "--values",
        "1,-1",
        "--dc-only",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
    let csv = read(dir.path(), "sweep.csv");
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(2).unwrap().contains(",,"));
}

#[test]
fn heatmap_is_stable() {
    let dir = TempDir::new().unwrap();
    let run = |sub: &str| {
        let d = dir.path().join(sub);
        assert_eq!(code(&pdnsim(&["dc", "--tiles", "5", "--out-dir", path(&d)])), 0);
        read(&d, "ir_map.svg")
    };
    let svg = run("a");
    assert_eq!(svg, run("b"));
    assert!(svg.starts_with("<?xml") && svg.contains("<svg"));
    assert!(svg.contains("mV"));
}
