use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fhm_core::exact::sector_ground_energy;
use fhm_core::model::HubbardParams;

fn fhm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fhm")).args(args).output().expect("spawn fhm")
}

fn run_ok(args: &[&str]) -> Output {
    let o = fhm(args);
    assert!(o.status.success(), "fhm {args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn out_arg(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn csv(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn band_rows_manifest_and_rerun_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = out_arg(tmp.path(), "a");
    let b = out_arg(tmp.path(), "b");
    run_ok(&["band", "--L", "6", "--t-primes", "0,1,2", "--out", &a]);
    run_ok(&["band", "--L", "6", "--t-primes", "0,1,2", "--out", &b]);
    let (h, rows) = csv(tmp.path().join("a/band.csv"));
    assert_eq!(h, ["t_prime", "k", "epsilon", "occupied_up", "occupied_down"]);
    assert_eq!(rows.len(), 18);
    for r in rows.iter().filter(|r| r[0] == "0.0") {
        let k: f64 = r[1].parse().unwrap();
        let e: f64 = r[2].parse().unwrap();
        assert!((e + 2.0 * k.cos()).abs() < 1e-12);
    }
    let (_, fermi) = csv(tmp.path().join("a/fermi.csv"));
    let e0: f64 = fermi[0][3].parse().unwrap();
    assert!((e0 + 8.0).abs() < 1e-12);
    for f in ["band.csv", "fermi.csv"] {
        assert_eq!(std::fs::read(tmp.path().join("a").join(f)).unwrap(), std::fs::read(tmp.path().join("b").join(f)).unwrap());
    }
    let m = manifest(&tmp.path().join("a"));
    assert_eq!(m["schema"], 1);
    assert_eq!(m["experiment"], "band");
    assert_eq!(m["config"]["L"], 6);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["files"][0]["rows"], 18);
    assert!(m["versions"]["fhm-core"].is_string());
}

#[test]
fn exact_ground_scan_matches_core() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path(), "g");
    run_ok(&["ground-scan", "--solver", "exact", "--out", &out]);
    let (h, rows) = csv(tmp.path().join("g/ground_scan_exact.csv"));
    assert_eq!(h, ["t_prime", "U", "sector_up", "sector_down", "energy", "iterations", "fidelity"]);
    assert_eq!(rows.len(), 36);
    assert!(!tmp.path().join("g/ground_scan_vqe.csv").exists());
    for r in rows.iter().step_by(7) {
        let tp: f64 = r[0].parse().unwrap();
        let u: f64 = r[1].parse().unwrap();
        let e: f64 = r[col(&h, "energy")].parse().unwrap();
        let want = sector_ground_energy(&HubbardParams::new(6, 1.0, tp, u).unwrap(), 3, 3).unwrap();
        assert!((e - want).abs() < 1e-12, "t'={tp} U={u}: {e} vs {want}");
        assert_eq!(r[col(&h, "iterations")], "");
    }
}

#[test]
fn vqe_scan_deterministic_given_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |o: &str| {
        vec!["ground-scan", "--solver", "vqe", "--U", "2", "--t-prime", "0.5", "--depth", "2", "--max-iter", "40", "--seed", "7", "--out", o]
            .into_iter()
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    let a = out_arg(tmp.path(), "a");
    let b = out_arg(tmp.path(), "b");
    for o in [&a, &b] {
        let v = args(o);
        run_ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    }
    let (h, rows) = csv(tmp.path().join("a/ground_scan_vqe.csv"));
    assert_eq!(rows.len(), 1);
    let e: f64 = rows[0][col(&h, "energy")].parse().unwrap();
    let exact = sector_ground_energy(&HubbardParams::new(6, 1.0, 0.5, 2.0).unwrap(), 3, 3).unwrap();
    assert!(e >= exact - 1e-9);
    let f: f64 = rows[0][col(&h, "fidelity")].parse().unwrap();
    assert!((0.0..=1.0 + 1e-9).contains(&f));
    for f in ["ground_scan_vqe.csv", "vqe_parameters.json"] {
        assert_eq!(std::fs::read(tmp.path().join("a").join(f)).unwrap(), std::fs::read(tmp.path().join("b").join(f)).unwrap());
    }
    assert_eq!(manifest(&tmp.path().join("a"))["config"]["vqe"]["seed"], 7);
}

#[test]
fn free_gaps() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path(), "g");
    run_ok(&["gaps", "--solver", "exact", "--U", "0", "--t-prime", "0", "--out", &out]);
    let (h, rows) = csv(tmp.path().join("g/gaps_exact.csv"));
    assert_eq!(rows.len(), 1);
    let charge: f64 = rows[0][col(&h, "charge_gap")].parse().unwrap();
    let spin: f64 = rows[0][col(&h, "spin_gap")].parse().unwrap();
    assert!((charge - 2.0).abs() < 1e-9, "{charge}");
    assert!((spin - 4.0).abs() < 1e-9, "{spin}");
}

#[test]
fn spectral_rows_and_sum_rule() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path(), "s");
    run_ok(&["spectral", "--U", "2", "--k", "0,pi", "--omega", "-10:10:0.02", "--out", &out]);
    let (h, rows) = csv(tmp.path().join("s/spectral.csv"));
    assert_eq!(h, ["t_prime", "U", "k", "omega", "A"]);
    assert_eq!(rows.len(), 2 * 1001);
    let (ph, poles) = csv(tmp.path().join("s/poles.csv"));
    for k in ["0.0", &std::f64::consts::PI.to_string()] {
        let w: f64 = poles.iter().filter(|r| r[col(&ph, "k")] == k).map(|r| r[col(&ph, "weight")].parse::<f64>().unwrap()).sum();
        assert!((w - 1.0).abs() < 1e-9, "k={k}: weight {w}");
    }
}

#[test]
fn spectral_from_qeom_writes_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path(), "q");
    run_ok(&["spectral", "--states", "qeom", "--pool", "full", "--k", "0", "--omega", "-6:6:0.1", "--out", &out]);
    let (_, rows) = csv(tmp.path().join("q/spectral.csv"));
    assert_eq!(rows.len(), 121);
    let q: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("q/qeom.json")).unwrap()).unwrap();
    assert_eq!(q["schema"], 1);
    assert_eq!(q["points"][0]["qeom"]["solutions"].as_array().unwrap().len(), 2);
}

#[test]
fn dynamics_trotter_tracks_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path(), "d");
    run_ok(&[
        "dynamics", "--U", "0.5", "--t-prime", "0.5", "--tau-max", "1", "--dt", "0.1", "--propagator", "both", "--k", "0,pi",
        "--s-omega", "0:4:0.5", "--out", &out,
    ]);
    let (h, tr) = csv(tmp.path().join("d/correlations_trotter.csv"));
    let (_, ex) = csv(tmp.path().join("d/correlations_exact.csv"));
    assert_eq!(h, ["t_prime", "U", "tau", "j", "re_C", "im_C"]);
    assert_eq!(tr.len(), 11 * 6);
    assert_eq!(ex.len(), 11 * 6);
    for (a, b) in tr.iter().zip(&ex) {
        assert_eq!(a[..4], b[..4]);
        for c in [4, 5] {
            let x: f64 = a[c].parse().unwrap();
            let y: f64 = b[c].parse().unwrap();
            assert!((x - y).abs() < 2e-2, "{a:?} vs {b:?}");
        }
    }
    let (sh, sq) = csv(tmp.path().join("d/structure_factor_trotter.csv"));
    assert_eq!(sh, ["t_prime", "U", "q", "omega", "S_zz", "S_zz_im"]);
    assert_eq!(sq.len(), 2 * 9);
}

#[test]
fn resources_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path(), "r");
    run_ok(&["resources", "--static", "20", "4", "--trotter", "20", "--out", &out]);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("r/resources.json")).unwrap()).unwrap();
    assert_eq!(r["schema"], 1);
    assert_eq!(r["static"]["gates"]["rsz"], 80);
    assert_eq!(r["trotter"]["u"], 40);
    assert_eq!(r["trotter_swap_discrepancy"]["formula"], 360);
    assert_eq!(r["trotter_swap_discrepancy"]["table"], 348);
    let (_, routes) = csv(tmp.path().join("r/routes.csv"));
    assert_eq!(routes.len(), 3);
    assert!(std::fs::read_to_string(tmp.path().join("r/resources.txt")).unwrap().contains("L=20"));
}

fn exit_code(args: &[&str]) -> i32 {
    let o = fhm(args);
    let code = o.status.code().unwrap();
    if code != 0 {
        let err: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap_or(serde_json::Value::Null);
        if code != 2 || !err.is_null() {
            assert_eq!(err["exit_code"], code, "{}", String::from_utf8_lossy(&o.stderr));
        }
    }
    code
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path(), "x");
    assert_eq!(exit_code(&["band", "--L", "3", "--out", &out]), 2);
    assert_eq!(exit_code(&["spectral", "--k", "0.3", "--out", &out]), 2);
    assert_eq!(exit_code(&["spectral", "--eta", "0", "--out", &out]), 2);
    assert_eq!(exit_code(&["dynamics", "--mode", "fixed:0", "--out", &out]), 2);
    assert_eq!(exit_code(&["dynamics", "--mode", "sideways", "--out", &out]), 2);
    assert_eq!(exit_code(&["gaps", "--L", "7", "--solver", "exact", "--out", &out]), 2);
    assert_eq!(exit_code(&["resources", "--route", "nowhere", "--out", &out]), 2);
    assert_eq!(exit_code(&["band", "--bogus"]), 2);
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"L": 6, "typo": 1}"#).unwrap();
    assert_eq!(exit_code(&["band", "--config", bad.to_str().unwrap(), "--out", &out]), 2);
    std::fs::write(&bad, r#"{"experiment": "gaps"}"#).unwrap();
    assert_eq!(exit_code(&["band", "--config", bad.to_str().unwrap(), "--out", &out]), 2);
    std::fs::write(&bad, "{").unwrap();
    assert_eq!(exit_code(&["run", "--config", bad.to_str().unwrap()]), 2);
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn unwritable_output_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("occupied");
    std::fs::write(&file, "").unwrap();
    assert_eq!(exit_code(&["band", "--out", file.to_str().unwrap()]), 3);
}

#[test]
fn run_subcommand_reads_config_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": "band", "L": 8, "t_primes": [0.0, 0.5], "sector": [4, 4]}"#).unwrap();
    let out = out_arg(tmp.path(), "r");
    run_ok(&["run", "--config", cfg.to_str().unwrap(), "--out", &out]);
    let (_, rows) = csv(tmp.path().join("r/band.csv"));
    assert_eq!(rows.len(), 16);
    let out2 = out_arg(tmp.path(), "o");
    run_ok(&["band", "--config", cfg.to_str().unwrap(), "--L", "10", "--sector", "5,5", "--out", &out2]);
    let (_, rows) = csv(tmp.path().join("o/band.csv"));
    assert_eq!(rows.len(), 20);
    assert_eq!(manifest(&tmp.path().join("o"))["config"]["L"], 10);
}
