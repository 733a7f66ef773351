//! Behavior of the installed binary: reproducibility, manifest reruns,
//! config-file layering, and exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phasecode"))
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn identical_seeds_give_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = bin()
            .args([
                "channel-sim",
                "--pits",
                "300",
                "--levels-per-theta",
                "8",
                "--seed",
                "99",
                "--out",
                sub,
                "--out-dir",
            ])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run("a.json");
    run("b.json");
    assert_eq!(read(dir.path(), "a.json"), read(dir.path(), "b.json"));
}

#[test]
fn rerun_from_manifest_reproduces_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["psd", "--scheme", "consecutive", "--window-s", "2e-7", "--gap-s", "2e-7"])
        .args(["--out", "first.csv", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let original = read(dir.path(), "first.csv");

    // Remove the artifact, then rebuild it from the manifest alone.
    std::fs::remove_file(dir.path().join("first.csv")).unwrap();
    let out = bin()
        .arg("rerun")
        .arg(dir.path().join("first.csv.manifest.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(dir.path(), "first.csv"), original);
}

#[test]
fn config_file_sets_values_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "alpha = 5\nbeta = 7\ntheta = 0.25\nout = scan.csv\n").unwrap();

    let out = bin()
        .args(["detect", "--config"])
        .arg(&cfg)
        .args(["--beta", "9", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let manifest: serde_json::Value =
        serde_json::from_slice(&read(dir.path(), "scan.csv.manifest.json")).unwrap();
    let args: Vec<&str> =
        manifest["args"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let value_of = |key: &str| {
        let i = args.iter().position(|a| *a == key).unwrap();
        args[i + 1]
    };
    assert_eq!(value_of("--alpha"), "5"); // from the file
    assert_eq!(value_of("--beta"), "9"); // flag overrides the file
    assert_eq!(value_of("--theta"), "0.25");
}

#[test]
fn invalid_parameters_exit_2_and_leave_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // theta outside [0, pi) violates the symbol precondition.
    let out = bin()
        .args(["detect", "--theta", "3.5", "--out", "bad.csv", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("theta"), "stderr: {stderr}");
    assert!(!dir.path().join("bad.csv").exists());
    assert!(!dir.path().join("bad.csv.manifest.json").exists());
}

#[test]
fn missing_seed_on_a_stochastic_command_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["channel-sim", "--pits", "10", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn below_threshold_physics_exits_3_but_keeps_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["capacity-sweep", "--nbar-min", "0.1", "--nbar-max", "0.12"])
        .args(["--points", "3", "--out", "bt.csv", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(read(dir.path(), "bt.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains("nan")));
}

#[test]
fn numerical_and_analytic_detect_paths_write_matching_scans() {
    let dir = tempfile::tempdir().unwrap();
    for (path, name) in [("analytic", "a.csv"), ("numerical", "n.csv")] {
        let out = bin()
            .args(["detect", "--transform", "plus-uf0", "--theta", "0.8"])
            .args(["--alpha", "2", "--beta", "3", "--phi-steps", "16"])
            .args(["--path", path, "--out", name, "--out-dir"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let parse = |name: &str| -> Vec<Vec<f64>> {
        String::from_utf8(read(dir.path(), name))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect()
    };
    let a = parse("a.csv");
    let n = parse("n.csv");
    assert_eq!(a.len(), 16);
    for (ra, rn) in a.iter().zip(&n) {
        for (x, y) in ra.iter().zip(rn) {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }
}

#[test]
fn snr_sweep_columns_match_the_interface() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["snr-sweep", "--alpha-min", "1", "--alpha-max", "10", "--steps", "5"])
        .args(["--squeeze-signal-db", "-3", "--out", "s.csv", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(read(dir.path(), "s.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "alpha,beta,V_a_plus,V_a_minus,V_b_plus,V_b_minus,snr,delta_theta_min,log2_l_max"
    );
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn track_files_round_trip_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["channel-sim", "--pits", "40", "--levels-per-theta", "8", "--seed", "5"])
        .args(["--noiseless", "--track-out", "t.track", "--out", "r1.json", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = bin()
        .args(["channel-sim", "--levels-per-theta", "8", "--seed", "5", "--noiseless"])
        .args(["--track-in"])
        .arg(dir.path().join("t.track"))
        .args(["--out", "r2.json", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value = serde_json::from_slice(&read(dir.path(), "r2.json")).unwrap();
    assert_eq!(report["report"]["symbol_errors"], 0);
    assert_eq!(report["report"]["decided"], 40);
}

#[test]
fn capacity_sweep_preserves_regime_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["capacity-sweep", "--nbar-min", "1", "--nbar-max", "100", "--points", "10"])
        .args(["--out", "cap.csv", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = String::from_utf8(read(dir.path(), "cap.csv")).unwrap();
    let mut by_nbar: std::collections::BTreeMap<String, std::collections::HashMap<String, f64>> =
        Default::default();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        by_nbar
            .entry(cols[0].to_string())
            .or_default()
            .insert(cols[1].to_string(), cols[2].parse().unwrap());
    }
    assert_eq!(by_nbar.len(), 10);
    for (nbar, regimes) in by_nbar {
        let coh = regimes["both_coherent"];
        let one = regimes["one_squeezed"];
        let two = regimes["both_squeezed"];
        assert!(two >= one && one >= coh, "ordering violated at n_bar {nbar}");
    }
}

#[test]
fn consecutive_psd_peaks_near_a_third_of_the_window_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["psd", "--scheme", "consecutive", "--gap-s", "0", "--window-s", "1e-6"])
        .args(["--out", "c.csv", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = String::from_utf8(read(dir.path(), "c.csv")).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].parse().unwrap(), c[1].parse().unwrap())
        })
        .collect();
    let (nut_peak, smax) = rows
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((nut_peak - 0.371).abs() < 0.01, "peak at nuT {nut_peak}");
    // Normalized so the gap-0 peak is 1.
    assert!((smax - 1.0).abs() < 1e-6, "normalized peak {smax}");
}
