use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use lindblad_calib::calibrate::{FitResult, ParameterSet, ParameterVector};
use lindblad_calib::measurement::ExperimentRecord;
use lindblad_calib::stitch::tables::{table_fits, CouplingMode};
use lindblad_calib_cli::{exit, run, DeviceConfig};
use tempfile::TempDir;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lindblad-calib").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = cli(args);
    assert_eq!(code, exit::SUCCESS, "{args:?}: {err}");
    out
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn write_config(dir: &TempDir, name: &str, cfg: &DeviceConfig) -> String {
    let path = p(dir, name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#') && !l.starts_with("t_us")).collect()
}

#[test]
fn simulate_is_reproducible() {
    let d = TempDir::new().unwrap();
    let (a, b) = (p(&d, "a.csv"), p(&d, "b.csv"));
    ok(&["simulate", "--kind", "t1", "--qubits", "2", "--seed", "7", "--out", &a]);
    ok(&["simulate", "--kind", "t1", "--qubits", "2", "--seed", "7", "--out", &b]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let stdout = ok(&["simulate", "--kind", "t1", "--qubits", "2", "--seed", "7"]);
    assert_eq!(stdout.as_bytes(), fs::read(&a).unwrap());
    ok(&["simulate", "--kind", "t1", "--qubits", "2", "--seed", "8", "--out", &b]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn default_grid_has_75_rows_per_bitstring_set() {
    let csv = ok(&["simulate", "--kind", "t2e", "--qubits", "2"]);
    assert!(csv.contains("t_us,00,01,10,11\n"));
    assert_eq!(data_rows(&csv).len(), 75);
    assert_eq!(csv.lines().filter(|l| l.starts_with("#counts")).count(), 75);
}

#[test]
fn single_shot_rows_are_one_hot() {
    let csv = ok(&["simulate", "--kind", "t2s", "--qubits", "2", "--shots", "1", "--seed", "3"]);
    for row in data_rows(&csv) {
        let vals: Vec<f64> = row.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.iter().filter(|&&v| v == 1.0).count(), 1);
        assert_eq!(vals.iter().filter(|&&v| v == 0.0).count(), 3);
    }
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let d = TempDir::new().unwrap();
    let path = p(&d, "r.csv");
    ok(&["simulate", "--kind", "t2s-hx", "--qubits", "2", "--scale", "1.3", "--seed", "5", "--out", &path]);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(ExperimentRecord::from_csv(&text).unwrap().to_csv(), text);
    let exact = ok(&["simulate", "--kind", "t1", "--shots", "0"]);
    assert_eq!(ExperimentRecord::from_csv(&exact).unwrap().to_csv(), exact);
}

#[test]
fn truth_sidecar_accompanies_record() {
    let d = TempDir::new().unwrap();
    let path = p(&d, "r.csv");
    ok(&["simulate", "--kind", "t1", "--qubits", "2", "--first-qubit", "1", "--out", &path]);
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(format!("{path}.truth.json")).unwrap()).unwrap();
    assert_eq!(side["qubits"], serde_json::json!([1, 2]));
    let t1 = side["derived"]["qubits"][0]["t1_us"].as_f64().unwrap();
    assert!((t1 - 106.95).abs() < 1e-9);
}

#[test]
fn config_problems_exit_2() {
    let d = TempDir::new().unwrap();
    let missing = p(&d, "nope.json");
    assert_eq!(cli(&["simulate", "--kind", "t1", "--config", &missing]).0, exit::CONFIG);
    let bad = p(&d, "bad.json");
    fs::write(&bad, r#"{"n_qubits": 1, "omega": [31.42]}"#).unwrap();
    assert_eq!(cli(&["simulate", "--kind", "t1", "--config", &bad]).0, exit::CONFIG);
    let short = DeviceConfig { t1_us: vec![100.0], ..DeviceConfig::default() };
    let short = write_config(&d, "short.json", &short);
    assert_eq!(cli(&["simulate", "--kind", "t1", "--config", &short]).0, exit::CONFIG);
    let negative = DeviceConfig { t1_us: vec![100.0, -1.0, 100.0], ..DeviceConfig::default() };
    let negative = write_config(&d, "neg.json", &negative);
    assert_eq!(cli(&["simulate", "--kind", "t1", "--config", &negative]).0, exit::CONFIG);
    assert_eq!(cli(&["simulate", "--kind", "t9"]).0, exit::CONFIG);
    assert_eq!(cli(&["simulate", "--kind", "t1", "--qubits", "4"]).0, exit::CONFIG);
    assert_eq!(cli(&["frobnicate"]).0, exit::CONFIG);
}

#[test]
fn ordinary_frequency_config_is_converted() {
    let d = TempDir::new().unwrap();
    let ghz = p(&d, "ghz.json");
    fs::write(&ghz, r#"{"n_qubits": 1, "omega_ghz": [5.0], "t1_us": [100.0], "temperature_mk": 40.0}"#).unwrap();
    let rad = p(&d, "rad.json");
    let omega = std::f64::consts::TAU * 5.0;
    fs::write(&rad, format!(r#"{{"n_qubits": 1, "omega_rad_per_ns": [{omega:?}], "t1_us": [100.0], "temperature_mk": 40.0}}"#)).unwrap();
    let a = ok(&["simulate", "--kind", "t2s", "--config", &ghz, "--seed", "1"]);
    let b = ok(&["simulate", "--kind", "t2s", "--config", &rad, "--seed", "1"]);
    assert_eq!(a, b);
    let both = p(&d, "both.json");
    fs::write(&both, r#"{"n_qubits": 1, "omega_ghz": [5.0], "omega_rad_per_ns": [31.4], "t1_us": [100.0]}"#).unwrap();
    assert_eq!(cli(&["simulate", "--kind", "t1", "--config", &both]).0, exit::CONFIG);
}

#[test]
fn fit_on_noiseless_data_reaches_zero_loss() {
    let d = TempDir::new().unwrap();
    let truth = DeviceConfig { t1_us: vec![105.0, 112.0, 101.45], ..DeviceConfig::default() };
    let cfg = write_config(&d, "truth.json", &truth);
    let rec = p(&d, "r.csv");
    ok(&["simulate", "--config", &cfg, "--kind", "t1", "--qubits", "2", "--shots", "0", "--out", &rec]);
    let out = p(&d, "fit.json");
    ok(&["fit", &rec, "--out", &out]);
    let fit = FitResult::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(fit.loss <= 1e-8, "{}", fit.loss);
    assert!((fit.derived.qubits[0].t1_us - 105.0).abs() < 0.1);
}

#[test]
fn fit_on_sampled_relaxation_data() {
    let d = TempDir::new().unwrap();
    let truth = DeviceConfig { temperature_mk: 47.96, ..DeviceConfig::default() };
    let cfg = write_config(&d, "truth.json", &truth);
    let rec = p(&d, "r.csv");
    ok(&["simulate", "--config", &cfg, "--kind", "t1", "--seed", "2", "--out", &rec]);
    let out = p(&d, "fit.json");
    let table_path = p(&d, "table.txt");
    let table = ok(&["fit", &rec, "--config", &cfg, "--out", &out, "--table-out", &table_path]);
    assert_eq!(fs::read_to_string(&table_path).unwrap(), table);
    let fit = FitResult::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(fit.loss > 1e-4 && fit.loss < 1e-2, "{}", fit.loss);
    assert!(table.contains("47.96"), "{table}");
    assert!(table.lines().next().unwrap().contains("T1 fit"));
}

#[test]
fn fit_rejects_mismatched_records() {
    let d = TempDir::new().unwrap();
    let (a, b) = (p(&d, "a.csv"), p(&d, "b.csv"));
    ok(&["simulate", "--kind", "t1", "--qubits", "1", "--out", &a]);
    ok(&["simulate", "--kind", "t1", "--qubits", "2", "--out", &b]);
    let (code, _, err) = cli(&["fit", &a, &b, "--out", &p(&d, "f.json")]);
    assert_eq!(code, exit::INPUT, "{err}");
    let garbage = p(&d, "g.csv");
    fs::write(&garbage, "not,a,record\n").unwrap();
    assert_eq!(cli(&["fit", &garbage, "--out", &p(&d, "f.json")]).0, exit::INPUT);
}

#[test]
fn mitigated_fit_with_calibration_runs() {
    let d = TempDir::new().unwrap();
    let noisy = DeviceConfig { readout_flip: Some(vec![0.03, 0.05, 0.02]), ..DeviceConfig::default() };
    let cfg = write_config(&d, "noisy.json", &noisy);
    let (rec, cal) = (p(&d, "r.csv"), p(&d, "cal.json"));
    ok(&["simulate", "--config", &cfg, "--kind", "t1", "--qubits", "2", "--seed", "4", "--out", &rec, "--calibration-out", &cal]);
    let fixed = ok(&["mitigate", &rec, "--confusion", &cal]);
    let mitigated = ExperimentRecord::from_csv(&fixed).unwrap();
    assert!(mitigated.mitigated);
    assert_eq!(cli(&["mitigate", &rec]).0, exit::CONFIG);
    let (raw_fit, mit_fit) = (p(&d, "raw.json"), p(&d, "mit.json"));
    ok(&["fit", &rec, "--out", &raw_fit]);
    ok(&["fit", &rec, "--confusion", &cal, "--out", &mit_fit]);
    let t1 = |path: &str| FitResult::from_json(&fs::read_to_string(path).unwrap()).unwrap().derived.qubits[1].t1_us;
    assert!((t1(&mit_fit) - 106.95).abs() < (t1(&raw_fit) - 106.95).abs());
    let flips = ok(&["mitigate", &rec, "--flips", "0.03,0.05"]);
    assert!(ExperimentRecord::from_csv(&flips).unwrap().mitigated);
    assert_eq!(cli(&["mitigate", &rec, "--flips", "0.03"]).0, exit::INPUT);
}

fn canned_file(dir: &TempDir, name: &str, fit: &FitResult) -> String {
    let path = p(dir, name);
    fs::write(&path, fit.to_json().unwrap()).unwrap();
    path
}

#[test]
fn stitch_exit_codes() {
    let d = TempDir::new().unwrap();
    let fits = table_fits(CouplingMode::Held).unwrap();
    let pair = canned_file(&d, "pair.json", &fits[3].result);
    let (code, out, _) = cli(&["stitch", &pair, &pair]);
    assert_eq!(code, exit::SUCCESS);
    assert!(out.contains("verdict: PASS"));
    let report_path = p(&d, "rep.json");
    ok(&["stitch", &pair, &pair, "--out", &report_path]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["max_spread"].as_object().unwrap().values().all(|v| v.as_f64() == Some(0.0)));

    assert_eq!(cli(&["stitch", "--canned", "held"]).0, exit::SUCCESS);
    assert_eq!(cli(&["stitch", "--canned", "refit"]).0, exit::INCONSISTENT);
    assert_eq!(cli(&["stitch", "--canned", "held", "--temperature-tol", "0.3"]).0, exit::INCONSISTENT);

    let set = fits[1].result.best_params.unpack();
    let doubled = ParameterVector::pack(&ParameterSet { gamma: vec![set.gamma[0] / 2.0], ..set }).unwrap();
    let outlier = FitResult::from_parameters(vec![1], doubled, 0.0, vec![]).unwrap();
    let outlier = canned_file(&d, "outlier.json", &outlier);
    assert_eq!(cli(&["stitch", "--canned", "held", &outlier]).0, exit::INCONSISTENT);

    let q0 = canned_file(&d, "q0.json", &fits[0].result);
    let q2 = canned_file(&d, "q2.json", &fits[2].result);
    assert_eq!(cli(&["stitch", &q0, &q2]).0, exit::INPUT);
    assert_eq!(cli(&["stitch", &q0]).0, exit::CONFIG);
}

#[test]
fn stitch_predicts_composite() {
    let d = TempDir::new().unwrap();
    let out = p(&d, "composite.json");
    ok(&["stitch", "--canned", "held", "--predict", "0,1,2", "--predict-out", &out]);
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let j = side["derived"]["couplings"][0]["j_rad_per_ns"].as_f64().unwrap();
    assert!((j - 5.87e-3).abs() < 1e-12);
    let fits = table_fits(CouplingMode::Held).unwrap();
    let q0 = canned_file(&d, "q0.json", &fits[0].result);
    let q1 = canned_file(&d, "q1.json", &fits[1].result);
    let pair = canned_file(&d, "pair.json", &fits[4].result);
    assert_eq!(cli(&["stitch", &q0, &q1, &pair, "--predict", "0,1"]).0, exit::INPUT);
}

fn count(svg: &str, class: &str) -> usize {
    svg.matches(&format!("<g class=\"{class}\"")).count()
}

#[test]
fn plot_series_and_axes() {
    let d = TempDir::new().unwrap();
    let (rec, fit, svg) = (p(&d, "r.csv"), p(&d, "f.json"), p(&d, "p.svg"));
    ok(&["simulate", "--kind", "t2e", "--qubits", "2", "--scale", "1.3", "--out", &rec]);
    ok(&["fit", &rec, "--iters", "20", "--restarts", "1", "--out", &fit]);
    ok(&["plot", &rec, "--fit", &fit, "--out", &svg]);
    let with_fit = fs::read_to_string(&svg).unwrap();
    assert_eq!((count(&with_fit, "dots"), count(&with_fit, "model")), (4, 4));
    // The axis ends at the nominal 296 us delay, not 1.3 times that.
    assert!(with_fit.contains(r#"<circle cx="630.00""#));
    assert!(!with_fit.contains(r#"<circle cx="630.01"#));

    ok(&["plot", &rec, "--fit", &fit, "--scale", "1.0", "--out", &svg]);
    let unscaled = fs::read_to_string(&svg).unwrap();
    assert_ne!(unscaled, with_fit);

    ok(&["plot", &rec, "--out", &svg]);
    let dots = fs::read_to_string(&svg).unwrap();
    assert_eq!((count(&dots, "dots"), count(&dots, "model")), (4, 0));

    let one = p(&d, "one.csv");
    ok(&["simulate", "--kind", "t1", "--out", &one]);
    assert_eq!(cli(&["plot", &one, "--fit", &fit, "--out", &svg]).0, exit::INPUT);
}

fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_lindblad-calib"))
}

fn run_binary(args: &[&str], threads: Option<&str>, dir: &Path) -> std::process::Output {
    let mut cmd = Command::new(binary());
    cmd.args(args).current_dir(dir);
    match threads {
        Some(t) => cmd.env("LINDBLAD_CALIB_THREADS", t),
        None => cmd.env_remove("LINDBLAD_CALIB_THREADS"),
    };
    cmd.output().unwrap()
}

#[test]
fn binary_exit_codes_and_thread_cap() {
    let d = TempDir::new().unwrap();
    let o = run_binary(&["simulate", "--kind", "t1", "--qubits", "2", "--out", "r.csv"], None, d.path());
    assert_eq!(o.status.code(), Some(0));
    let o = run_binary(&["simulate", "--kind", "bogus"], None, d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown experiment kind"));

    let a = run_binary(&["fit", "r.csv", "--iters", "30", "--out", "a.json"], Some("1"), d.path());
    let b = run_binary(&["fit", "r.csv", "--iters", "30", "--out", "b.json"], Some("3"), d.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fs::read(d.path().join("a.json")).unwrap(), fs::read(d.path().join("b.json")).unwrap());
}
