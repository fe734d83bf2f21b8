use std::fs;
use std::path::{Path, PathBuf};

use harborsim_core::metrics::compute_pis;
use harborsim_core::scenario::{build_reference_scenario, load_scenario, run, ScenarioError};
use harborsim_core::study::{batch, run_seeds};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn reference_file_equals_builtin() {
    let sc = load_scenario(&scenarios().join("reference.toml")).unwrap();
    assert_eq!(sc.hash(), build_reference_scenario().hash());
}

#[test]
fn channel_transit_stays_in_deep_water() {
    let sc = load_scenario(&scenarios().join("channel.toml")).unwrap();
    let log = run(&sc).unwrap();
    let draft = sc.ego.params.draft;
    assert!(log.records.iter().all(|r| r.depth >= draft + 1.0), "ego left the dredged channel");
    let report = compute_pis(&log).unwrap();
    assert!(!report.grounded);
    for (&id, &mpd) in &report.mpd_per_target {
        assert!(mpd > sc.autonomy.cdca.safety_radius, "target {id} passed at {mpd:.1} m");
    }
    assert!(report.trigger_transitions >= 1);
    let last = log.records.last().unwrap().ego.position;
    assert!(last.distance(sc.ego.goal) < 1500.0, "ended at {last:?}");
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenarios().join("reference.toml")).unwrap();
    let bad = text.replace("cruise_speed = 10.0", "cruise_speed = \"fast\"");
    let path = dir.path().join("bad.toml");
    fs::write(&path, bad).unwrap();
    match load_scenario(&path) {
        Err(ScenarioError::Schema { field, .. }) => assert_eq!(field, "ego.cruise_speed"),
        other => panic!("{other:?}"),
    }

    let unknown = text.replace("[radar]", "[radar]\npeak_power = 3.0");
    fs::write(&path, unknown).unwrap();
    let err = load_scenario(&path).unwrap_err().to_string();
    assert!(err.contains("peak_power"), "{err}");
}

#[test]
fn grounded_start_and_unreachable_goal_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenarios().join("channel.toml")).unwrap();
    let fixture = scenarios().join("../fixtures/harbor_channel.asc");
    let text = text.replace("../fixtures/harbor_channel.asc", &fixture.display().to_string().replace('\\', "/"));

    let path = dir.path().join("aground.toml");
    fs::write(&path, text.replace("position = { x = 0.0, y = 0.0 }", "position = { x = 2400.0, y = 0.0 }")).unwrap();
    let sc = load_scenario(&path).unwrap();
    assert!(matches!(run(&sc), Err(ScenarioError::GroundingConfig { .. })));

    fs::write(&path, text.replace("goal = { x = 0.0, y = 10500.0 }", "goal = { x = 2500.0, y = 9000.0 }")).unwrap();
    let sc = load_scenario(&path).unwrap();
    assert!(matches!(run(&sc), Err(ScenarioError::GoalUnreachable { .. })));
}

#[test]
fn seeds_run_in_parallel_match_serial_runs() {
    let mut sc = build_reference_scenario();
    sc.duration = 120.0;
    let par = run_seeds(&sc, &[3, 4, 5]).unwrap();
    for out in &par {
        let serial = run(&sc.with_seed(out.seed)).unwrap();
        assert_eq!(serial.csv_string(), out.log.csv_string());
    }
}

#[test]
fn batch_covers_every_scenario_file() {
    let results = batch(&scenarios(), 2).unwrap();
    let names: Vec<&str> = results.iter().map(|(s, _)| s.name.as_str()).collect();
    assert_eq!(names, ["channel", "reference"]);
    for (sc, runs) in &results {
        let seeds: Vec<u64> = runs.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, [sc.seed, sc.seed + 1]);
    }
}
