use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vowelmark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vowelmark"))
        .args(args)
        .env_remove("VOWELMARK_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn write_spec(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    p(&path).to_string()
}

fn synth(spec: &str, out: &Path, seed: &str) -> Output {
    vowelmark(&["--jobs", "1", "synth", "--spec", spec, "--out", p(out), "--seed", seed])
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&vowelmark(&["--help"])), 0);
    assert_eq!(code(&vowelmark(&["frobnicate"])), 1);
    assert_eq!(code(&vowelmark(&["--jobs", "0", "checktables"])), 1);
    assert_eq!(code(&vowelmark(&["checktables", "--tolerance", "-1"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let features = dir.path().join("features.csv");
    fs::write(&features, "participant_id,group,vowel\n").unwrap();
    let bad = vowelmark(&["compare", "--features", p(&features), "--out", p(dir.path()), "--threshold", "1.5"]);
    assert_eq!(code(&bad), 1, "{}", stderr(&bad));
    let bad = vowelmark(&["compare", "--features", p(&features), "--out", p(dir.path()), "--groupings", "xyz"]);
    assert_eq!(code(&bad), 1, "{}", stderr(&bad));
}

#[test]
fn broken_config_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("vowelmark.conf");
    fs::write(&cfg, "no.such.key = 3\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vowelmark"))
        .arg("checktables")
        .env("VOWELMARK_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("VOWELMARK_CONFIG"));
}

#[test]
fn checktables_flags_only_the_known_anomaly() {
    let out = vowelmark(&["checktables"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("mean MFCC1 VR"));
    assert_eq!(code(&vowelmark(&["checktables", "--tolerance", "0.2"])), 0);
    assert_eq!(code(&vowelmark(&["checktables", "--tolerance", "0.001"])), 3);
}

#[test]
fn empty_manifest_gives_header_only_features() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.csv");
    fs::write(&manifest, "path,participant_id,group,vowel,start_s,end_s\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = vowelmark(&["extract", "--manifest", p(&manifest), "--out", p(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("features.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].split(',').count(), 3 + 88);
}

#[test]
fn unreadable_file_names_its_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "one.json", r#"{"f0_hz": 140, "duration_s": 0.5}"#);
    assert_eq!(code(&synth(&spec, &dir.path().join("wav"), "3")), 0);
    let mut manifest = String::from("path,participant_id,group,vowel,start_s,end_s\n");
    for row in 1..=8 {
        let file = if row == 7 { "wav/missing.wav" } else { "wav/synth01_a.wav" };
        manifest.push_str(&format!("{file},p{row},neg,a,0,0.5\n"));
    }
    let path = dir.path().join("manifest.csv");
    fs::write(&path, manifest).unwrap();
    let out = vowelmark(&["extract", "--manifest", p(&path), "--out", p(&dir.path().join("out"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("row 7"), "{}", stderr(&out));
}

#[test]
fn overlapping_breaks_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "bad.json",
        r#"{"f0_hz": 120, "duration_s": 2.0, "breaks": [[0.5, 0.4], [0.7, 0.2]]}"#,
    );
    let out = synth(&spec, &dir.path().join("wav"), "0");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("invalid synth spec"), "{}", stderr(&out));
}

#[test]
fn repeated_seed_gives_identical_wavs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "cohort.json", r#"{"n_per_group": 2}"#);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        let run = synth(&spec, out, seed);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 2 * 2 * 5 + 1);
    let mut differs = false;
    for name in &names {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name:?}");
        differs |= fs::read(a.join(name)).unwrap() != fs::read(c.join(name)).unwrap();
    }
    assert!(differs);
}

#[test]
fn single_group_input_is_an_empty_group_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "one.json", r#"{"f0_hz": 120, "duration_s": 0.8}"#);
    let wav = dir.path().join("wav");
    assert_eq!(code(&synth(&spec, &wav, "1")), 0);
    let out_dir = dir.path().join("out");
    let run = vowelmark(&["extract", "--manifest", p(&wav.join("manifest.csv")), "--out", p(&out_dir)]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let run = vowelmark(&["compare", "--features", p(&out_dir.join("features.csv")), "--out", p(&out_dir)]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("empty group"), "{}", stderr(&run));
}

#[test]
fn synth_extract_compare_boxplot() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "cohort.json", r#"{"n_per_group": 3}"#);
    let wav = dir.path().join("wav");
    let run = synth(&spec, &wav, "4");
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    let out_dir = dir.path().join("out");
    let run = vowelmark(&["--jobs", "2", "extract", "--manifest", p(&wav.join("manifest.csv")), "--out", p(&out_dir)]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let features = out_dir.join("features.csv");
    let csv = fs::read_to_string(&features).unwrap();
    assert_eq!(csv.lines().count(), 1 + 30);
    assert!(csv.lines().all(|l| l.split(',').count() == 91));

    let strict = dir.path().join("strict");
    let run = vowelmark(&["compare", "--features", p(&features), "--out", p(&strict), "--threshold", "1.0"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    for label in ["a", "e", "i", "o", "u", "ie", "uo", "all"] {
        let table = fs::read_to_string(strict.join(format!("ranked_{label}.csv"))).unwrap();
        assert_eq!(table.lines().count(), 1, "{label}");
        assert!(strict.join(format!("ranked_{label}_full.csv")).exists());
    }
    assert!(strict.join("boxplots.json").exists());

    let report = dir.path().join("report");
    let run = vowelmark(&[
        "compare", "--features", p(&features), "--out", p(&report),
        "--method", "exact", "--groupings", "all,ie",
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = fs::read_to_string(report.join("ranked_all.csv")).unwrap();
    assert!(table.lines().count() > 1);
    assert!(!report.join("ranked_a.csv").exists());

    let run = vowelmark(&[
        "boxplot", "--features", p(&features), "--feature", "voiced segments per second", "--vowel", "a",
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let entries: serde_json::Value = serde_json::from_str(&stdout(&run)).unwrap();
    assert_eq!(entries.as_array().map(Vec::len), Some(2));
    let run = vowelmark(&["boxplot", "--features", p(&features), "--feature", "nonsense", "--vowel", "a"]);
    assert_eq!(code(&run), 1);
}
