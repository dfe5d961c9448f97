use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use torus_lab::chain::{validate_pseudo_orbit, PseudoOrbit};
use torus_lab::topology::BoxDomain;
use torus_lab::torus::rigid_translation;

const RIGID: &str = r#"
[map]
kind = "rigid"
a = 0.6180339887498949
b = 0.41421356237309515
"#;

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_torus-lab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("TORUS_LAB_OUT")
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

fn checks_with_status<'a>(r: &'a Value, status: &str) -> Vec<&'a Value> {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == status)
        .collect()
}

#[test]
fn rotation_on_rigid_translation_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{RIGID}\n[rotation]\niterations = [10000, 100, 1000]\nstarts = 4\n");
    let out = run(dir.path(), &["rotation"], &cfg);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(report(dir.path())["status"], "pass");

    let csv = fs::read_to_string(dir.path().join("out/rotation.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,estimate_1,estimate_2,bound"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let bounds: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(bounds.windows(2).all(|w| w[1] < w[0]), "{bounds:?}");
    for r in &rows {
        let n: f64 = r[0].parse().unwrap();
        let e1: f64 = r[1].parse().unwrap();
        assert!((e1 - 0.618_033_988_749_894_9).abs() <= 1.0 / n);
        // 17 significant digits
        let mantissa = r[1].split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
    }
}

#[test]
fn reports_are_deterministic() {
    let cfg = "[chain]\nm = 32\ntrials = 10\n[nonwandering]\nm = 16\nn_max = 200\n";
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        assert_eq!(
            run(d.path(), &["chain", "--seed", "9"], cfg).status.code(),
            Some(0)
        );
    }
    let read = |d: &TempDir, f: &str| fs::read(d.path().join("out").join(f)).unwrap();
    assert_eq!(read(&a, "report.json"), read(&b, "report.json"));
    assert_eq!(read(&a, "chain_pairs.csv"), read(&b, "chain_pairs.csv"));
    assert_eq!(report(a.path())["config"]["seed"], 9);
}

#[test]
fn chain_suite_on_denjoy_product_reports_wandering_boxes() {
    let dir = TempDir::new().unwrap();
    let cfg = "[map]\nkind = \"denjoy-product\"\n[chain]\nm = 128\ntrials = 20\n\
               [nonwandering]\nm = 32\nn_max = 1000\n";
    let out = run(dir.path(), &["chain"], cfg);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    let wandering = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "wandering-boxes")
        .unwrap();
    assert!(wandering["data"]["nonreturning"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_keys_and_bad_values_exit_with_3() {
    let dir = TempDir::new().unwrap();
    for cfg in [
        "seeed = 3\n",
        "[chain]\nm = 64\nepsilon = 0.0001\n",
        "[map]\nkind = \"spiral\"\n",
        "[map]\nkind = \"rigid\"\na = 0.1\n",
        "not toml at all [",
    ] {
        let out = run(dir.path(), &["rotation"], cfg);
        assert_eq!(out.status.code(), Some(3), "config {cfg:?}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_torus-lab"))
        .args(["rotation", "--config", "/nonexistent/config.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn perturbation_off_the_minimal_set_is_invalid() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["perturb"],
        "[perturb]\npoint = [0.0, 0.3]\nepsilon = 1e-13\n",
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exhausted_budgets_are_inconclusive() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "{RIGID}\n[two_jump]\npairs = 2\n[two_jump.budgets]\nconnector_samples = 1\nconnector_orbit = 1\n"
    );
    let out = run(dir.path(), &["two-jump"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    assert_eq!(r["status"], "inconclusive");
    for c in checks_with_status(&r, "inconclusive") {
        assert!(c["budget"].is_object(), "{c}");
    }
}

#[test]
fn pseudo_orbit_files_reload_and_validate() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{RIGID}\n[two_jump]\npairs = 3\n");
    let out = run(dir.path(), &["two-jump"], &cfg);
    assert_eq!(out.status.code(), Some(0));
    let f = rigid_translation(0.618_033_988_749_894_9, 0.414_213_562_373_095_15);
    for i in 0..3 {
        let path = dir
            .path()
            .join(format!("out/pseudo_orbits/pair-{i:03}.txt"));
        let po = PseudoOrbit::from_text(&fs::read_to_string(path).unwrap()).unwrap();
        let check = validate_pseudo_orbit(&f, &po);
        assert!(check.valid && check.jump_count <= 2, "{check:?}");
    }
}

#[test]
fn essential_and_nonwandering_dumps_reload() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "{RIGID}\n[essential]\nm = 16\nrandom_pairs = 20\npaths = 10\n\
         [nonwandering]\nm = 16\nn_max = 500\nexpect_wandering = false\n"
    );
    for suite in ["essential", "nonwandering"] {
        let out = run(dir.path(), &[suite], &cfg);
        assert_eq!(out.status.code(), Some(0), "{suite}");
    }
    for name in [
        "domains/cross.rle",
        "domains/hull.rle",
        "nonwandering/returning.rle",
    ] {
        let text = fs::read_to_string(dir.path().join("out").join(name)).unwrap();
        let d = BoxDomain::from_rle(&text).unwrap();
        assert_eq!(d.m(), 16, "{name}");
    }
    let returning = fs::read_to_string(dir.path().join("out/nonwandering/returning.rle")).unwrap();
    assert_eq!(
        BoxDomain::from_rle(&returning).unwrap(),
        BoxDomain::full(16)
    );
}

#[test]
fn failed_expectation_exits_with_1_and_a_witness() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{RIGID}\n[nonwandering]\nm = 16\nn_max = 500\nexpect_wandering = true\n");
    let out = run(dir.path(), &["nonwandering"], &cfg);
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path());
    for c in checks_with_status(&r, "fail") {
        assert!(c.get("witness").is_some(), "{c}");
    }
}

#[test]
fn env_var_sets_the_output_directory() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("from-env");
    let cfg = dir.path().join("config.toml");
    fs::write(
        &cfg,
        format!("{RIGID}\n[rotation]\niterations = [100]\nstarts = 2\n"),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_torus-lab"))
        .args(["rotation", "--config"])
        .arg(&cfg)
        .env("TORUS_LAB_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("report.json").exists());
}
