use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn exsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exsplit")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn steps_csv(path: &Path) -> Vec<(usize, f64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap(), rec[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn factor_harmonic_writes_verified_program() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = exsplit(&["factor", "--problem", "harmonic", "--t", "0.5", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let prog = json(&dir.path().join("program.json"));
    assert_eq!(prog["steps"].as_array().unwrap().len(), 3);
    let rep = json(&dir.path().join("report.json"));
    assert!(rep["flow_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(rep["passed"], true);
}

#[test]
fn near_singular_rotation_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = exsplit(&["factor", "--problem", "rotation2d", "--theta", "3.1415", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("near-singular angle"));
}

#[test]
fn rotation_split_over_steps_is_accepted() {
    let dir = TempDir::new().unwrap();
    let o = exsplit(&["factor", "--problem", "rotation2d", "--theta", "3.1415", "--steps", "2", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn schrodinger_program_carries_iteration_log() {
    let dir = TempDir::new().unwrap();
    let o = exsplit(&["factor", "--problem", "schrodinger", "--t", "0.3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let prog = json(&dir.path().join("program.json"));
    let log = prog["provenance"]["log"].as_array().expect("iteration log");
    assert!(!log.is_empty());
    let last = log.last().unwrap()["residual"].as_f64().unwrap();
    assert!(last <= 1e-10, "final iteration residual {last}");
}

#[test]
fn harmonic_ground_state_decays_at_unit_rate() {
    let dir = TempDir::new().unwrap();
    let o = exsplit(&["solve", "--problem", "harmonic", "--t", "1.0", "--steps", "10", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = steps_csv(&dir.path().join("steps.csv"));
    assert_eq!(rows.len(), 11);
    for (k, t, norm) in &rows {
        assert!((t - 0.1 * *k as f64).abs() < 1e-12);
        let ratio = norm / rows[0].2;
        assert!((ratio - (-t).exp()).abs() < 1e-8, "step {k}: {ratio}");
    }
    assert!(dir.path().join("field_final.bin").exists());
    assert!(dir.path().join("field_final.bin.json").exists());
}

#[test]
fn maxwellian_is_stationary() {
    let dir = TempDir::new().unwrap();
    let o = exsplit(&["solve", "--problem", "fokker_planck", "--t", "1.0", "--steps", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = steps_csv(&dir.path().join("steps.csv"));
    for (_, _, norm) in &rows {
        assert!((norm / rows[0].2 - 1.0).abs() < 1e-10);
    }
}

#[test]
fn zero_steps_copy_the_field() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("a");
    let o = exsplit(&["solve", "--problem", "harmonic", "--t", "0.2", "--steps", "1", "--out", first.to_str().unwrap()]);
    assert!(o.status.success());
    let init = first.join("field_final.bin");
    let cfg = dir.path().join("job.toml");
    fs::write(
        &cfg,
        format!(
            "problem = \"harmonic\"\nt_final = 0.0\nn_steps = 0\n[initial]\nkind = \"file\"\npath = {:?}\n",
            init.to_str().unwrap()
        ),
    )
    .unwrap();
    let second = dir.path().join("b");
    let o = exsplit(&["solve", "--config", cfg.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&init).unwrap(), fs::read(second.join("field_final.bin")).unwrap());
}

#[test]
fn factored_program_round_trips_through_solve() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("f");
    assert!(exsplit(&["factor", "--problem", "harmonic", "--t", "0.05", "--out", f.to_str().unwrap()]).status.success());
    let direct = dir.path().join("direct");
    let replay = dir.path().join("replay");
    let prog = f.join("program.json");
    assert!(exsplit(&["solve", "--problem", "harmonic", "--t", "0.2", "--steps", "4", "--out", direct.to_str().unwrap()]).status.success());
    let o = exsplit(&[
        "solve",
        "--problem",
        "harmonic",
        "--steps",
        "4",
        "--program",
        prog.to_str().unwrap(),
        "--out",
        replay.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(direct.join("diagnostics.csv")).unwrap(), fs::read(replay.join("diagnostics.csv")).unwrap());
    assert_eq!(fs::read(direct.join("field_final.bin")).unwrap(), fs::read(replay.join("field_final.bin")).unwrap());
}

#[test]
fn verify_reports_a_stored_program() {
    let dir = TempDir::new().unwrap();
    assert!(exsplit(&["factor", "--problem", "kfp", "--t", "0.4", "--out", dir.path().to_str().unwrap()]).status.success());
    let o = exsplit(&["verify", "--program", dir.path().join("program.json").to_str().unwrap()]);
    assert!(o.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["passed"], true);
    assert_eq!(rep["dissipative_factors_in_sp_plus"], true);
}

#[test]
fn bench_contrasts_exact_and_strang() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bench.csv");
    let o = exsplit(&["bench", "--taus", "0.2,0.1", "--csv", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["method", "t", "steps", "fft_calls", "error_vs_oracle", "wall_time"]
    );
    let rows: Vec<(String, f64)> = r.records().map(|x| x.unwrap()).map(|x| (x[0].to_string(), x[4].parse().unwrap())).collect();
    assert_eq!(rows.len(), 4);
    for (method, err) in &rows {
        match method.as_str() {
            "exact" => assert!(*err < 1e-10, "exact error {err}"),
            "strang" => assert!(*err > 1e-5, "strang error {err}"),
            other => panic!("unexpected method {other}"),
        }
    }
}

#[test]
fn bad_config_exits_with_config_code() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "problem = \"harmonic\"\nunknown_key = 1\n").unwrap();
    assert_eq!(exsplit(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(exsplit(&["factor", "--problem", "dilatation", "--lambda", "-1"]).status.code(), Some(4));
    assert_eq!(exsplit(&["factor", "--problem", "harmonic"]).status.code(), Some(4));
}
