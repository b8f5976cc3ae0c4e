use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.conf"))
}

fn dwmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dwmix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes `text` as a config in `dir` and returns its path.
fn config(dir: &TempDir, text: &str) -> String {
    let p = dir.path().join("run.conf");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// Runs a subcommand into `dir/sub` and returns the parsed manifest.
fn run_ok(args: &[&str], dir: &TempDir, sub: &str) -> (PathBuf, Value) {
    let out = dir.path().join(sub);
    let mut all = args.to_vec();
    let out_s = out.to_string_lossy().into_owned();
    all.extend(["--out", &out_s]);
    let o = dwmix(&all);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    (out, manifest)
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn hashes(manifest: &Value) -> Vec<(String, String)> {
    manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e["file"].as_str().unwrap().into(),
                e["sha256"].as_str().unwrap().into(),
            )
        })
        .collect()
}

#[test]
fn solve_modes_default_writes_modes_and_manifest() {
    let dir = TempDir::new().unwrap();
    let (out, m) = run_ok(&["solve-modes"], &dir, "modes");
    for f in ["modes_boson.csv", "modes_fermion.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    for sp in ["boson", "fermion"] {
        assert!(m["derived"][sp]["omega"].as_f64().unwrap() > 0.0);
        assert!(m["derived"][sp]["gap_ratio"].as_f64().unwrap() > 10.0);
        assert!(m["derived"][sp]["kappa"].as_f64().unwrap() > 0.0);
        assert_eq!(m["derived"][sp]["overlap_tensor"].as_object().unwrap().len(), 5);
    }
    assert_eq!(m["derived"]["cross_overlap_tensor"].as_object().unwrap().len(), 9);
    assert_eq!(m["derived"]["basis"]["labels"].as_array().unwrap().len(), 12);
    assert_eq!(m["config"]["potential.kind"], "double_square_well");
    assert!(m["tool"]["version"].is_string());
    assert!(m["run"]["wall_time_s"].as_f64().unwrap() >= 0.0);

    for (file, hash) in hashes(&m) {
        let bytes = fs::read(out.join(&file)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), hash, "{file}");
    }
    let (header, rows) = read_csv(&out.join("modes_boson.csv"));
    assert_eq!(header, ["x_um", "psi_s", "psi_a", "psi_L", "psi_R"]);
    assert_eq!(rows.len(), 2001);
}

#[test]
fn geometry_errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o").to_string_lossy().into_owned();
    let cfg = config(
        &dir,
        "potential.well_separation_um = 5\npotential.well_width_um = 6\n",
    );
    let o = dwmix(&["solve-modes", "--config", &cfg, "--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("d > a"), "{}", stderr(&o));

    let cfg = config(&dir, "potential.well_depth = 0\n");
    let o = dwmix(&["solve-modes", "--config", &cfg, "--out", &out]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(!Path::new(&out).join("manifest.json").exists());
}

#[test]
fn zero_couplings_evolve_is_undamped_rabi() {
    let dir = TempDir::new().unwrap();
    let (out, m) = run_ok(
        &["evolve", "--config", preset("default").to_str().unwrap()],
        &dir,
        "ev",
    );
    let regimes: Value =
        serde_json::from_str(&fs::read_to_string(out.join("regimes.json")).unwrap()).unwrap();
    assert_eq!(regimes, m["results"]);
    for sp in ["boson", "fermion"] {
        let r = &regimes[sp];
        let nominal = r["nominal_period"].as_f64().unwrap();
        let period = r["period_estimate"].as_f64().unwrap();
        assert!(r["damping_estimate"].as_f64().unwrap() < 1e-3, "{sp}: {r}");
        assert!(
            (period - nominal).abs() < 0.01 * nominal,
            "{sp}: {period} vs {nominal}"
        );
    }
    let (header, rows) = read_csv(&out.join("p_rr.csv"));
    assert_eq!(header, ["tau", "p_rr_b", "p_rr_f"]);
    assert_eq!(rows.len(), 4096);
    assert_eq!(rows[0][1..], [1.0, 1.0]);
}

#[test]
fn interaction_regimes_are_distinguished() {
    let dir = TempDir::new().unwrap();
    let regimes = |name: &str| {
        let (out, _) = run_ok(
            &["evolve", "--config", preset(name).to_str().unwrap()],
            &dir,
            name,
        );
        serde_json::from_str::<Value>(&fs::read_to_string(out.join("regimes.json")).unwrap()).unwrap()
    };
    let r2 = regimes("region2");
    let r3 = regimes("region3");
    for sp in ["boson", "fermion"] {
        assert!(
            !r2[sp]["plateau_intervals"].as_array().unwrap().is_empty(),
            "{sp}"
        );
        let d2 = r2[sp]["damping_estimate"].as_f64().unwrap();
        let d3 = r3[sp]["damping_estimate"].as_f64().unwrap();
        assert!(d3 > d2, "{sp}: {d3} <= {d2}");
    }
}

#[test]
fn fidelity_map_reference_cell_and_plot() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "couplings.lambda_bb = 5e-4\n\
         sweep.plane = ff_bf\n\
         sweep.nx = 5\nsweep.ny = 5\n\
         sweep.ref_lambda_bb = 5e-4\nsweep.ref_lambda_ff = 5e-4\nsweep.ref_lambda_bf = 5e-4\n",
    );
    let (out, m) = run_ok(&["fidelity-map", "--config", &cfg, "--plot"], &dir, "fm");
    let (header, rows) = read_csv(&out.join("fidelity_map.csv"));
    assert_eq!(header, ["lambda_x", "lambda_y", "fidelity", "degenerate_flag"]);
    assert_eq!(rows.len(), 25);
    let cell = rows.iter().find(|r| r[0] == 5e-4 && r[1] == 5e-4).unwrap();
    assert!((cell[2] - 1.0).abs() < 1e-12, "{}", cell[2]);
    assert!(rows.iter().all(|r| r[2] > 0.0 && r[2] <= 1.0 + 1e-12));
    assert_eq!(m["results"]["x_axis"]["name"], "lambda_ff");
    assert_eq!(m["results"]["y_axis"]["name"], "lambda_bf");
    let script = fs::read_to_string(out.join("plot_fidelity_map.py")).unwrap();
    assert!(script.contains("fidelity_map.csv") && script.contains("pcolormesh"));
    assert!(hashes(&m).iter().any(|(f, _)| f == "plot_fidelity_map.py"));
}

#[test]
fn entropy_scan_columns_agree() {
    let dir = TempDir::new().unwrap();
    let (out, m) = run_ok(
        &[
            "entropy-scan",
            "--config",
            preset("entropy_line").to_str().unwrap(),
            "--plot",
        ],
        &dir,
        "es",
    );
    let (header, rows) = read_csv(&out.join("entropy_scan.csv"));
    assert_eq!(header, ["lambda_ff", "s_bosons", "s_fermions", "degenerate_flag"]);
    assert_eq!(rows.len(), 101);
    for r in &rows {
        assert!((r[1] - r[2]).abs() < 1e-10, "{r:?}");
    }
    assert!(out.join("single_particle_entropy.csv").exists());
    assert!(out.join("plot_entropy_scan.py").exists());
    assert!(m["results"]["max_entropy"].as_f64().unwrap() > 0.0);
}

#[test]
fn entropy_scan_needs_a_line() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o").to_string_lossy().into_owned();
    let o = dwmix(&["entropy-scan", "--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line_ff"));
}

#[test]
fn reruns_reproduce_hashes() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "couplings.lambda_bb = 5e-4\nsweep.nx = 8\nsweep.ny = 6\n");
    let (_, a) = run_ok(
        &["fidelity-map", "--config", &cfg, "--workers", "1", "--plot"],
        &dir,
        "run",
    );
    let (_, b) = run_ok(
        &["fidelity-map", "--config", &cfg, "--workers", "4", "--plot"],
        &dir,
        "run",
    );
    assert_eq!(hashes(&a), hashes(&b));
    assert_eq!(a["config"], b["config"]);
    assert_eq!(a["derived"], b["derived"]);

    let region2 = preset("region2");
    let (_, a) = run_ok(&["evolve", "--config", region2.to_str().unwrap()], &dir, "ev");
    let (_, b) = run_ok(&["evolve", "--config", region2.to_str().unwrap()], &dir, "ev");
    assert_eq!(hashes(&a), hashes(&b));
}

#[test]
fn validate_config_reports_and_rejects() {
    let o = dwmix(&["validate-config", "--config", preset("default").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = String::from_utf8_lossy(&o.stdout);
    let ratio: f64 = report
        .lines()
        .find(|l| l.starts_with("boson:"))
        .and_then(|l| l.split("= ").nth(2))
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio > 10.0, "{report}");

    let dir = TempDir::new().unwrap();
    let o = dwmix(&[
        "validate-config",
        "--config",
        &config(&dir, "couplings.lambda_bb = -1\n"),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("non-negative"), "{}", stderr(&o));

    let o = dwmix(&[
        "validate-config",
        "--config",
        &config(&dir, "couplings.lamda_bb = 1e-3\n"),
    ]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).contains("did you mean `couplings.lambda_bb`"),
        "{}",
        stderr(&o)
    );

    let o = dwmix(&[
        "validate-config",
        "--config",
        &config(&dir, "potential.well_depth = 0\n"),
    ]);
    assert_eq!(code(&o), 3);

    let o = dwmix(&["validate-config", "--config", "/nonexistent/run.conf"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn shipped_presets_validate() {
    for name in [
        "default",
        "region1",
        "region2",
        "region3",
        "phase_maps",
        "entropy_line",
    ] {
        let o = dwmix(&["validate-config", "--config", preset(name).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
    }
}

#[test]
fn fermion_basis_flag() {
    let dir = TempDir::new().unwrap();
    let (_, m) = run_ok(
        &["solve-modes", "--fermion-basis", "paper_four_state"],
        &dir,
        "p4",
    );
    assert_eq!(m["config"]["model.fermion_basis"], "paper_four_state");
    assert_eq!(m["derived"]["basis"]["tag"], "paper_four_state/sz=0");
    let labels = m["derived"]["fermion"]["basis_labels"].as_array().unwrap();
    assert!(labels.iter().any(|l| l == "LL.up_up"));

    let o = dwmix(&["validate-config", "--fermion-basis", "nope"]);
    assert_eq!(code(&o), 2);
}
