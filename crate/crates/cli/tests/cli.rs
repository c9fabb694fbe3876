//! The `presym` binary end to end: exit codes, file formats and
//! reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use presym_cli::RunConfig;

const BIN: &str = env!("CARGO_BIN_EXE_presym");

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn presym(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("run.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn audit_passes_on_the_default_model() {
    let dir = scratch("audit_default");
    let out = presym(&dir, &["audit"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = fs::read_to_string(dir.join("out/audit.csv")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.split(",").nth(3) == Some("8")));
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn audit_of_the_free_model() {
    let dir = scratch("audit_free");
    let out = presym(&dir, &["audit"], Some("[model]\npreset = \"free\"\n[field]\nkind = \"zero\"\n"));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = fs::read_to_string(dir.join("out/audit_summary.csv")).unwrap();
    let closed: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("max_closedness,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(closed < 1e-8, "{closed}");
}

fn table_config(table: &Path) -> String {
    format!("[field]\nprofile = \"tabulated\"\ntable_path = {:?}\n", table.to_str().unwrap())
}

#[test]
fn audit_accepts_a_smooth_table_and_flags_a_corrupted_one() {
    let dir = scratch("audit_table");
    let out = presym(&dir, &["audit"], Some(&table_config(&data("coulomb_table.txt"))));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    // the same samples with a jump of the potential at r = 1.5
    let corrupted: String = fs::read_to_string(data("coulomb_table.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut cols = l.split_whitespace().map(|c| c.parse::<f64>().unwrap());
            let (r, phi) = (cols.next().unwrap(), cols.next().unwrap());
            format!("{r} {}\n", if r > 1.5 { phi + 0.002 } else { phi })
        })
        .collect();
    let path = dir.join("corrupted.txt");
    fs::write(&path, corrupted).unwrap();
    let out = presym(&dir, &["audit"], Some(&table_config(&path)));
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let summary = fs::read_to_string(dir.join("out/audit_summary.csv")).unwrap();
    assert!(summary.contains("passed,false"));
}

#[test]
fn relative_table_paths_follow_the_config_file() {
    let dir = scratch("relative_table");
    fs::copy(data("coulomb_table.txt"), dir.join("phi.txt")).unwrap();
    let out = presym(
        &dir,
        &["audit"],
        Some("[field]\nprofile = \"tabulated\"\ntable_path = \"phi.txt\"\n[experiment]\nn_points = 3\n"),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn oversized_steps_exit_with_step_advice() {
    let dir = scratch("big_step");
    let out = presym(&dir, &["conserve"], Some("[integration]\nh = 3.0\nn_steps = 50\n[field]\nkappa = 0.5\n"));
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("integration aborted") && err.contains("reduce integration.h"), "{err}");
}

#[test]
fn excess_drift_fails_the_conservation_run() {
    let dir = scratch("drift");
    let out = presym(&dir, &["conserve"], Some("[integration]\nn_steps = 200\n[experiment]\ndrift_bound = 1e-18\n"));
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let trajectory = fs::read_to_string(dir.join("out/trajectory.csv")).unwrap();
    let mut body = trajectory.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(body.next(), Some(presym::dynamics::TRAJECTORY_HEADER));
    assert_eq!(body.count(), 201);
}

#[test]
fn ill_conditioned_fits_exit_with_code_three() {
    let dir = scratch("tiny_family");
    let out = presym(&dir, &["spinorbit"], Some("[experiment]\nfamily_size = 1\n"));
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("ill-conditioned"));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = scratch("bad_config");
    let out = presym(&dir, &["audit"], Some("[model]\nmass = 1.0\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown field `mass`"));
    let out = presym(&dir, &["spinorbit"], Some("[field]\nkind = \"swirl\"\n"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_summary_is_flat_and_echoes_the_config() {
    let dir = scratch("json");
    let out = presym(&dir, &["bmt", "--format", "json", "--seed", "5"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(dir.join("out/bmt_summary.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let map = value.as_object().unwrap();
    assert_eq!(map["command"], "bmt");
    assert_eq!(map["seed"], 5);
    assert!(map.values().all(|v| !v.is_object() && !v.is_array()));
    let slope = map["slope_stora"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.2);
    let echoed = RunConfig::parse(map["config"].as_str().unwrap()).unwrap();
    assert_eq!(echoed.experiment.seed, 5);
    assert_eq!(echoed.output.format, "json");
}

#[test]
fn csv_header_echo_parses_back_to_the_run_config() {
    let dir = scratch("echo");
    let config = "[model]\ng = 2.4\n[experiment]\nfamily_size = 8\neps_list = [1e-2, 1e-3]\n";
    let out = presym(&dir, &["spinorbit", "--seed", "9"], Some(config));
    assert!(out.status.code().is_some(), "{}", stderr(&out));
    let table = fs::read_to_string(dir.join("out/spinorbit.csv")).unwrap();
    let echo: String = table
        .lines()
        .skip_while(|l| *l != "# config:")
        .skip(1)
        .map_while(|l| l.strip_prefix("#   "))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut expected = RunConfig::parse(config).unwrap();
    expected.experiment.seed = 9;
    assert_eq!(RunConfig::parse(&echo).unwrap(), expected);
}

#[test]
fn runs_are_byte_identical() {
    let config = "[integration]\nn_steps = 300\n[experiment]\nfamily_size = 8\nn_points = 5\n";
    for command in ["audit", "conserve", "spinorbit"] {
        let (a, b) = (scratch(&format!("det_{command}_a")), scratch(&format!("det_{command}_b")));
        for dir in [&a, &b] {
            let out = presym(dir, &[command, "--seed", "17"], Some(config));
            assert_eq!(out.status.code(), Some(0), "{command}: {}", stderr(&out));
        }
        let mut names: Vec<_> = fs::read_dir(a.join("out")).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let (x, y) = (fs::read(a.join("out").join(&name)).unwrap(), fs::read(b.join("out").join(&name)).unwrap());
            assert!(x == y, "{command}: {name:?} differs");
        }
    }
}

#[test]
fn seeds_change_the_sample() {
    let (a, b) = (scratch("seed_a"), scratch("seed_b"));
    let config = Some("[experiment]\nn_points = 3\n");
    presym(&a, &["audit", "--seed", "1"], config);
    presym(&b, &["audit", "--seed", "2"], config);
    let read = |d: &Path| fs::read_to_string(d.join("out/audit.csv")).unwrap();
    assert_ne!(read(&a), read(&b));
}
