use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cogtrack_cli::commands::{classify_table, extract, load_features};
use cogtrack_cli::output::JsonTable;
use cogtrack_cli::RunConfig;

const SMALL: &str = "seed = 11
[simulate.study]
high_sessions = 5
low_sessions = 5
short_duration_s = 240
long_duration_s = 300
people_min = 4
people_max = 6
[importance]
repeats = 2
";

fn setup(dir: &Path, extra: &str) -> PathBuf {
    let out = dir.join("out");
    let cfg = format!(
        "{SMALL}{extra}\n[paths]\ntracks = {:?}\nmanifest = {:?}\noutput_dir = {:?}\n",
        out.join("tracks.jsonl"),
        out.join("manifest.toml"),
        out
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, cfg).unwrap();
    path
}

fn cogtrack(config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogtrack"))
        .arg("--config")
        .arg(config)
        .args(args)
        .env_remove("COGTRACK_SEED")
        .env_remove("COGTRACK_SET")
        .output()
        .unwrap()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn table(path: &Path) -> JsonTable {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn pipeline_tables_have_the_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), "");
    let out = dir.path().join("out");
    ok(cogtrack(&cfg, &["simulate"]));
    ok(cogtrack(&cfg, &["features"]));
    ok(cogtrack(&cfg, &["stats"]));
    ok(cogtrack(&cfg, &["classify"]));
    ok(cogtrack(&cfg, &["importance"]));

    let features = table(&out.join("features.json"));
    assert_eq!(features.columns.len(), 3 + 32);
    assert_eq!(features.rows.len(), 10);
    let stats = table(&out.join("stats.json"));
    let names: Vec<&str> = stats.rows.iter().map(|r| r[0].as_str().unwrap()).collect();
    assert_eq!(
        names,
        ["linear_path_length", "walking_speed", "direction_change", "velocity_entropy", "orientation_entropy", "levy_mu", "levy_c", "group_count"]
    );
    let classify = table(&out.join("classify.json"));
    assert_eq!(classify.rows.len(), 12);
    let models: Vec<&str> = classify.rows.iter().take(4).map(|r| r[1].as_str().unwrap()).collect();
    assert_eq!(models, ["SVM", "GBT", "LR", "Lasso"]);
    let importance = table(&out.join("importance.json"));
    assert_eq!(importance.rows.len(), 32 + 18 + 14);

    let hash = RunConfig::load(Some(&cfg), &[]).unwrap().hash();
    for name in ["features.csv", "stats.csv", "classify.csv", "importance.csv", "tracks.jsonl", "manifest.toml", "floorplan.toml"] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        assert_eq!(text.lines().next().unwrap(), format!("# config_hash: {hash}"), "{name}");
    }
    for t in [features, stats, classify, importance] {
        assert_eq!(t.config_hash, hash);
        assert_eq!(t.schema_version, 1);
    }
}

#[test]
fn reloaded_features_match_in_memory_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = setup(dir.path(), "");
    ok(cogtrack(&cfg_path, &["simulate"]));
    ok(cogtrack(&cfg_path, &["features"]));
    let config = RunConfig::load(Some(&cfg_path), &[]).unwrap();
    let memory = extract(&config).unwrap().table;
    let loaded = load_features(&config.paths.output_dir).unwrap();
    assert_eq!(loaded.rows, memory.rows);
    let a = classify_table(&config, &memory).unwrap();
    ok(cogtrack(&cfg_path, &["classify", "--format", "json"]));
    let b = table(&config.output("classify.json"));
    assert_eq!(a.to_json(&config.hash()), std::fs::read_to_string(config.output("classify.json")).unwrap());
    assert_eq!(b.rows.len(), 12);

    // the CSV form reloads to the same values
    std::fs::remove_file(config.output("features.json")).unwrap();
    ok(cogtrack(&cfg_path, &["features", "--format", "csv"]));
    assert_eq!(load_features(&config.paths.output_dir).unwrap().rows, memory.rows);
}

#[test]
fn report_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), "");
    let out = dir.path().join("out");
    ok(cogtrack(&cfg, &["simulate"]));
    let read_all = || {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    ok(cogtrack(&cfg, &["report"]));
    let first = read_all();
    assert_eq!(first.len(), 3 + 8);
    ok(cogtrack(&cfg, &["report", "--threads", "1"]));
    assert_eq!(read_all(), first);
    ok(cogtrack(&cfg, &["simulate", "--threads", "2"]));
    ok(cogtrack(&cfg, &["report"]));
    assert_eq!(read_all(), first);
}

#[test]
fn empty_tracks_exit_with_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), "");
    ok(cogtrack(&cfg, &["simulate"]));
    std::fs::write(dir.path().join("out/tracks.jsonl"), "").unwrap();
    let o = cogtrack(&cfg, &["features"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no sessions"));
}

#[test]
fn missing_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), "");
    for cmd in ["features", "stats", "classify", "importance", "report"] {
        let o = cogtrack(&cfg, &[cmd]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("missing input"));
    }
    let o = cogtrack(&dir.path().join("absent.toml"), &["features"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_configuration_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), "");
    for args in [
        &["config", "--split-deg", "0"][..],
        &["config", "--set", "features.social.dmax=2"],
        &["config", "--set", "classify.models=[]"],
        &["config", "--set", "simulate.noise.dropout=1.0"],
    ] {
        assert_eq!(cogtrack(&cfg, args).status.code(), Some(3), "{args:?}");
    }
    std::fs::write(dir.path().join("broken.toml"), "seed = [").unwrap();
    assert_eq!(cogtrack(&dir.path().join("broken.toml"), &["config"]).status.code(), Some(3));
}

#[test]
fn flags_and_environment_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), "");
    let show = |args: &[&str], env: &[(&str, &str)]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_cogtrack"));
        c.arg("--config").arg(&cfg).arg("config").args(args).env_remove("COGTRACK_SEED").env_remove("COGTRACK_SET");
        for (k, v) in env {
            c.env(k, v);
        }
        let o = ok(c.output().unwrap());
        let text = String::from_utf8(o.stdout).unwrap();
        let body = text.split_once('\n').unwrap().1.to_string();
        RunConfig::resolve(Some(&body), &[]).unwrap()
    };
    let base = show(&[], &[]);
    assert_eq!(base.seed, 11);
    assert_eq!(show(&["--seed", "4"], &[]).seed, 4);
    assert_eq!(show(&[], &[("COGTRACK_SEED", "5")]).seed, 5);
    let c = show(&[], &[("COGTRACK_SET", "features.social.d_max=1.5;classify.global_scaling=true")]);
    assert_eq!(c.features.social.d_max, 1.5);
    assert!(c.classify.global_scaling);
    let c = show(&["--d-max", "2.5", "--fencepost-correct", "--out", "elsewhere"], &[]);
    assert_eq!(c.features.social.d_max, 2.5);
    assert!(c.features.movement.fencepost_correct);
    assert_eq!(c.paths.output_dir, PathBuf::from("elsewhere"));
    assert_ne!(c.hash(), base.hash());
}

#[test]
fn csv_tracks_work_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("csv.toml");
    std::fs::write(
        &cfg,
        format!("{SMALL}\n[paths]\ntracks = {:?}\nmanifest = {:?}\noutput_dir = {:?}\n", out.join("t.csv"), out.join("m.toml"), out),
    )
    .unwrap();
    ok(cogtrack(&cfg, &["simulate"]));
    assert!(std::fs::read_to_string(out.join("t.csv")).unwrap().lines().nth(1).unwrap().starts_with("session_id,"));
    ok(cogtrack(&cfg, &["features", "--format", "json"]));
    assert_eq!(table(&out.join("features.json")).rows.len(), 10);
    assert!(!out.join("features.csv").exists());
}
