use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn harborsim(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_harborsim")).args(args).current_dir(root()).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn run_then_recompute_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let run = stdout(&harborsim(&["run", "scenarios/reference.toml", "--seed", "3", "--out", out_dir.to_str().unwrap()]));
    assert!(run.contains("MPD V2"), "{run}");
    for f in ["log.csv", "log.json", "report.json", "scenario.toml", "timeseries.csv"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let metrics = stdout(&harborsim(&["metrics", out_dir.join("log.csv").to_str().unwrap()]));
    // same indicators whether computed live or from the file
    let pick = |s: &str| s.lines().filter(|l| l.contains("MPD") || l.contains("RMSE")).map(str::to_owned).collect::<Vec<_>>();
    assert_eq!(pick(&run), pick(&metrics));
}

#[test]
fn sweep_prints_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&harborsim(&[
        "sweep", "--weather", "ideal,severe", "--radar", "high,low", "--seeds", "1", "--out", dir.path().to_str().unwrap(),
    ]));
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("ideal") || l.starts_with("severe")).collect();
    assert_eq!(rows.len(), 4, "{text}");
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("weather,radar,seeds"));
}

#[test]
fn bad_preset_is_reported() {
    let out = Command::new(env!("CARGO_BIN_EXE_harborsim"))
        .args(["sweep", "--weather", "stormy", "--seeds", "1"])
        .current_dir(root())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stormy"));
}

#[test]
fn bathy_tools_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n).to_str().unwrap().to_owned();

    let ingest = stdout(&harborsim(&["bathy", "ingest", "fixtures/grid3x3.asc"]));
    assert!(ingest.contains("3 rows x 3 cols"), "{ingest}");
    assert!(ingest.contains("1 nodata"), "{ingest}");

    harborsim(&["bathy", "export", "fixtures/harbor_channel.asc", "--out", &d("h.r16")]);
    let back = stdout(&harborsim(&["bathy", "ingest", &d("h.r16"), "--out", &d("back.asc")]));
    assert!(back.contains("120 rows x 60 cols"), "{back}");

    let occ = stdout(&harborsim(&["bathy", "occupancy", "fixtures/grid3x3.asc", "--draft", "9.5", "--ukc", "1.0", "--out", &d("occ.asc")]));
    assert!(occ.contains("4 of 9 cells blocked"), "{occ}");
    let mask = fs::read_to_string(d("occ.asc")).unwrap();
    assert!(mask.lines().last().unwrap().trim() == "0 0 0", "{mask}");

    // two tiles cut from the fixture stitch back into it
    let full = fs::read_to_string(root().join("fixtures/grid3x3.asc")).unwrap();
    let rows: Vec<&str> = full.lines().skip(6).collect();
    let south = format!("ncols 3\nnrows 1\nxllcorner 100.0\nyllcorner 200.0\ncellsize 10.0\nnodata_value -9999\n{}\n", rows[2]);
    let north = format!("ncols 3\nnrows 2\nxllcorner 100.0\nyllcorner 210.0\ncellsize 10.0\nnodata_value -9999\n{}\n{}\n", rows[0], rows[1]);
    fs::write(d("n.asc"), north).unwrap();
    fs::write(d("s.asc"), south).unwrap();
    harborsim(&["bathy", "stitch", &d("n.asc"), &d("s.asc"), "--out", &d("st.asc")]);
    let a = stdout(&harborsim(&["bathy", "ingest", &d("st.asc")]));
    assert_eq!(a, ingest);
}
