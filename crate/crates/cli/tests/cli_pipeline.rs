use std::fs;

use serde_json::json;

use sfs_experiment::commands::{cmd_evaluate, cmd_place, cmd_priors, cmd_selftest, selftest_passed};
use sfs_experiment::ExperimentConfig;

/// Free field, eight explicit candidates around a small disc.
fn toy(extra: serde_json::Value) -> ExperimentConfig {
    let positions: Vec<_> = (0..8)
        .map(|i| {
            let a = i as f64 * std::f64::consts::FRAC_PI_4;
            json!({"x": 1.5 * a.cos(), "y": 1.5 * a.sin()})
        })
        .collect();
    let mut doc = json!({
        "candidates": {"kind": "explicit", "positions": positions},
        "region": {"center": {"x": 0.0, "y": 0.0}, "radius": 0.3},
        "placement": {"num_sources": 2, "narrowband_hz": 500.0},
        "evaluation": {"frequencies": {"list": [500.0]}, "angles": {"list_deg": [0.0, 20.0]}, "grid_angles_deg": []},
        "baselines": {"regular_a": false, "regular_b": true}
    });
    merge(&mut doc, extra);
    let mut cfg = ExperimentConfig::from_value_with_env(doc, &[]).unwrap();
    cfg.room = None;
    cfg
}

fn merge(into: &mut serde_json::Value, from: serde_json::Value) {
    match (into, from) {
        (serde_json::Value::Object(a), serde_json::Value::Object(b)) => {
            for (k, v) in b {
                merge(a.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

#[test]
fn toy_place_writes_placement_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let placements = cmd_place(&toy(json!({})), dir.path()).unwrap();
    let proposed = &placements[0];
    assert_eq!(proposed.indices.len(), 2);
    assert_eq!(proposed.cost_trace.len(), 3);
    assert!(proposed.cost_trace.windows(2).all(|w| w[1] <= w[0]));
    let trace = fs::read_to_string(dir.path().join(format!("cost_trace_{}.csv", proposed.label))).unwrap();
    assert_eq!(trace.lines().count(), 4);
    assert!(dir.path().join("resolved_config.json").exists());
}

#[test]
fn evaluate_reuses_written_placement() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(json!({}));
    let placements = cmd_place(&cfg, dir.path()).unwrap();
    let file = dir.path().join(format!("placement_{}.csv", placements[0].label));
    let rows = cmd_evaluate(&cfg, dir.path(), Some(&file)).unwrap();
    // two angles for the loaded placement and for Regular B
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.sdr_db.is_finite()));
}

#[test]
fn empty_angle_list_gives_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(json!({"evaluation": {"angles": {"list_deg": []}}}));
    let rows = cmd_evaluate(&cfg, dir.path(), None).unwrap();
    assert!(rows.is_empty());
    assert_eq!(
        fs::read_to_string(dir.path().join("sdr.csv")).unwrap(),
        "angle_deg,freq_hz,sdr_db,method\n"
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = toy(json!({"evaluation": {"grid_angles_deg": [0.0]}}));
    let read = |d: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let mut v: Vec<_> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.is_file())
            .map(|p| (p.file_name().unwrap().to_string_lossy().to_string(), fs::read(&p).unwrap()))
            .collect();
        v.sort();
        v
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_evaluate(&cfg, a.path(), None).unwrap();
    cmd_evaluate(&cfg, b.path(), None).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(read(&a.path().join("grids")), read(&b.path().join("grids")));
}

#[test]
fn priors_written_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let written = cmd_priors(&toy(json!({})), dir.path()).unwrap();
    assert_eq!(written.len(), 2);
    assert!(written.iter().all(|p| p.exists()));
}

#[test]
fn selftest_passes() {
    let checks = cmd_selftest(3).unwrap();
    assert!(selftest_passed(&checks).is_ok(), "{checks:?}");
}

#[test]
fn resolved_config_round_trips() {
    let cfg = ExperimentConfig::default();
    let text = cfg.to_pretty_json().unwrap();
    let back = ExperimentConfig::from_value_with_env(serde_json::from_str(&text).unwrap(), &[]).unwrap();
    assert_eq!(back, cfg);
}
