//! Binary-level checks: subcommand round-trips and the 0/1/2 exit-code
//! contract.

use std::path::Path;
use std::process::Command;

fn affekt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affekt"))
}

fn write_small_csv_fixture(dir: &Path) {
    std::fs::write(
        dir.join("ratings.csv"),
        "subject_id,trial_id,file,valence,arousal\n1,1,t1.csv,2.0,3.0\n1,2,t2.csv,8.0,7.5\n",
    )
    .unwrap();
    for (name, scale) in [("t1.csv", 1.0f64), ("t2.csv", 2.0)] {
        let rows: Vec<String> = (1..=4)
            .map(|c| {
                (0..256)
                    .map(|i| format!("{}", scale * c as f64 * (i as f64 * 0.21).sin()))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        std::fs::write(dir.join(name), rows.join("\n")).unwrap();
    }
}

#[test]
fn convert_emits_a_loadable_dataset() {
    let input = tempfile::tempdir().unwrap();
    let output = tempfile::tempdir().unwrap();
    write_small_csv_fixture(input.path());

    let status = affekt()
        .args(["convert", "--input"])
        .arg(input.path())
        .arg("--out")
        .arg(output.path().join("ds"))
        .status()
        .unwrap();
    assert!(status.success());

    let dataset =
        affekt::signal::load_dataset(&output.path().join("ds"), affekt::signal::FORMAT_VERSION)
            .unwrap();
    assert_eq!(dataset.len(), 2);
    assert_eq!(dataset.trials()[0].0.n_samples(), 256);
}

#[test]
fn convert_exit_codes() {
    let empty = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let output = affekt()
        .args(["convert", "--input"])
        .arg(empty.path())
        .arg("--out")
        .arg(out.path().join("ds"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("no trials found"), "stderr: {stderr}");

    // Ragged trial file: exit 2 with file and line in the message.
    let input = tempfile::tempdir().unwrap();
    write_small_csv_fixture(input.path());
    let ragged = std::fs::read_to_string(input.path().join("t2.csv")).unwrap();
    let mut lines: Vec<&str> = ragged.lines().collect();
    let shorter = lines[1].rsplit_once(',').unwrap().0.to_string();
    lines[1] = &shorter;
    std::fs::write(input.path().join("t2.csv"), lines.join("\n")).unwrap();

    let output = affekt()
        .args(["convert", "--input"])
        .arg(input.path())
        .arg("--out")
        .arg(out.path().join("ds2"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("t2.csv") && stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn synth_is_byte_deterministic_and_validates_args() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let status = affekt()
            .args(["synth", "--trials", "6", "--seed", "9", "--duration-s", "8", "--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let manifest_a = std::fs::read(dir.path().join("a/manifest.json")).unwrap();
    let manifest_b = std::fs::read(dir.path().join("b/manifest.json")).unwrap();
    assert_eq!(manifest_a, manifest_b);
    let trial_a = std::fs::read(dir.path().join("a/s01_t01.dat")).unwrap();
    let trial_b = std::fs::read(dir.path().join("b/s01_t01.dat")).unwrap();
    assert_eq!(trial_a, trial_b);

    let status = affekt()
        .args(["synth", "--trials", "0", "--out"])
        .arg(dir.path().join("zero"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn run_with_missing_dataset_exits_2_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        format!(
            "[dataset]\npath = \"{}\"\n[output]\ndir = \"{}\"\n",
            dir.path().join("missing").display(),
            out_dir.display()
        ),
    )
    .unwrap();
    let output = affekt().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!out_dir.exists(), "run created output before validating config");
}

#[test]
fn restricted_grid_yields_two_cells_and_report_retabulates() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert!(affekt()
        .args(["synth", "--trials", "12", "--seed", "4", "--duration-s", "8", "--out"])
        .arg(&data)
        .status()
        .unwrap()
        .success());

    let out = dir.path().join("out");
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        format!(
            "[dataset]\npath = \"{}\"\n[output]\ndir = \"{}\"\n[pipeline]\nmethods = [\"spd\"]\nschemes = [\"bipartition\"]\nclassifiers = [\"rf\"]\nseed = 5\n[folds]\nk = 3\n[train]\nn_trees = 30\n",
            data.display(),
            out.display()
        ),
    )
    .unwrap();
    assert!(affekt().args(["run", "--config"]).arg(&config).status().unwrap().success());

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let cells = report["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2); // spd × bipartition × {valence, arousal} × rf
    assert!(cells.iter().all(|c| c["failed"] == serde_json::json!(false)));
    assert!(out.join("filter_bank.json").is_file());
    assert!(out.join("features/spd.csv").is_file());
    assert!(out.join("cells/spd_bipartition_valence_rf/roc.csv").is_file());
    assert!(out.join("cells/spd_bipartition_valence_rf/histograms.csv").is_file());

    // `report` re-tabulates the same bytes.
    let before = std::fs::read(out.join("report.csv")).unwrap();
    assert!(affekt().args(["report", "--out"]).arg(&out).status().unwrap().success());
    let after = std::fs::read(out.join("report.csv")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn failed_cells_are_recorded_and_exit_code_is_1() {
    let dir = tempfile::tempdir().unwrap();

    // Classes rated 2.0 and 5.0: bipartition drops the Medium class and
    // collapses to a single label, so bipartition cells fail while
    // tripartition cells still run.
    let recipe = dir.path().join("recipe.toml");
    std::fs::write(
        &recipe,
        "name = \"low-vs-medium\"\nduration_s = 8.0\n\n[[classes]]\nrating = 2.0\nband = \"alpha\"\nfreq_hz = 10.0\n\n[[classes]]\nrating = 5.0\nband = \"beta\"\nfreq_hz = 20.0\n",
    )
    .unwrap();
    let data = dir.path().join("data");
    assert!(affekt()
        .args(["synth", "--trials", "12", "--seed", "2", "--recipe-file"])
        .arg(&recipe)
        .arg("--out")
        .arg(&data)
        .status()
        .unwrap()
        .success());

    let out = dir.path().join("out");
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        format!(
            "[dataset]\npath = \"{}\"\n[output]\ndir = \"{}\"\n[pipeline]\nmethods = [\"hoc\"]\nclassifiers = [\"rf\"]\nseed = 5\n[folds]\nk = 3\n[train]\nn_trees = 20\n",
            data.display(),
            out.display()
        ),
    )
    .unwrap();
    let status = affekt().args(["run", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(1));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let cells = report["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    for cell in cells {
        let failed = cell["failed"].as_bool().unwrap();
        let scheme = cell["scheme"].as_str().unwrap();
        assert_eq!(failed, scheme == "bipartition", "cell {cell}");
        if failed {
            assert!(cell["error"].as_str().unwrap().contains("one label"));
        }
    }
}

#[test]
fn full_grid_with_one_classifier_populates_16_cells() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert!(affekt()
        .args(["synth", "--trials", "16", "--seed", "6", "--duration-s", "8", "--out"])
        .arg(&data)
        .status()
        .unwrap()
        .success());

    let out = dir.path().join("out");
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        format!(
            "[dataset]\npath = \"{}\"\n[output]\ndir = \"{}\"\n[pipeline]\nclassifiers = [\"rf\"]\nseed = 5\n[folds]\nk = 4\n[train]\nn_trees = 30\n",
            data.display(),
            out.display()
        ),
    )
    .unwrap();
    assert!(affekt().args(["run", "--config"]).arg(&config).status().unwrap().success());

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let cells = report["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 16); // 4 methods × 2 schemes × 2 dimensions × 1 classifier
    assert!(cells.iter().all(|c| c["failed"] == serde_json::json!(false)));
    // The config echo embeds all resolved defaults.
    assert_eq!(report["config"]["train"]["n_trees"], serde_json::json!(30));
    assert_eq!(report["config"]["folds"]["stratified"], serde_json::json!(true));
    assert_eq!(
        report["config"]["labeling"]["contiguous_boundaries"],
        serde_json::json!(false)
    );
}
