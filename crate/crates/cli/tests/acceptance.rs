//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if a
//! criterion outside [`UNATTAINABLE`] fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use lindblad_calib::calibrate::{adam_fit, gradient, AdamState, FitConfig, ParameterSet, ParameterVector, Slot};
use lindblad_calib::measurement::{
    apply_confusion, mitigate, sample_counts, synthesize_record, Acquisition, ConfusionMatrix, ExperimentRecord,
};
use lindblad_calib::propagator::{populations, run_experiment, ExperimentKind, TimeGrid};
use lindblad_calib::qdyn::noise::{gamma_from_relaxation_time, thermal_photon_number};
use lindblad_calib::qdyn::{DensityMatrix, HamiltonianSpec, NoiseSpec};
use lindblad_calib::stitch::tables::{claimed_set, table_fits, CouplingMode};
use lindblad_calib::stitch::{consistency_check, predict_composite, Combine, SubsystemFit, Thresholds};
use lindblad_calib_cli::{exit, run};
use tempfile::TempDir;

type Outcome = Result<String, String>;

/// Criteria whose bound no exponential relaxation can meet. They still
/// print FAIL but do not fail the run: from |1> the offset after 10 T1 is
/// (1 - p_inf) e^-10, about 4.5e-5, far above 1e-6.
const UNATTAINABLE: &[usize] = &[2];

const OMEGAS: [f64; 3] = [31_420.0, 30_470.0, 30_050.0];
const CLAIMED_T1: [f64; 3] = [100.24, 106.95, 101.45];
const CLAIMED_T: [f64; 3] = [47.96e-3, 54.20e-3, 50.30e-3];
const CLAIMED_J: [f64; 2] = [8.31, 7.42];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn max_gap<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn analytic_decay() -> Outcome {
    let gamma = 1.0 / 100.24;
    let grid = TimeGrid::default();
    let started = Instant::now();
    let spec = HamiltonianSpec::simple(&OMEGAS[..1], &[]);
    let traj = run_experiment(ExperimentKind::T1, &spec, &NoiseSpec::zero_temperature(vec![gamma]), &grid)
        .map_err(|e| e.to_string())?;
    let pops = populations(&traj).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let worst = (0..grid.n_points).map(|k| (pops[k][1] - (-gamma * grid.time(k)).exp()).abs()).fold(0.0, f64::max);
    check(
        pops.len() == 75 && worst <= 1e-6 && elapsed < Duration::from_secs(1),
        format!("max |p1 - exp(-gt)| = {worst:.2e} over {} points in {elapsed:.2?}", pops.len()),
    )
}

fn thermal_fixed_point() -> Outcome {
    let n = thermal_photon_number(OMEGAS[0], CLAIMED_T[0]).map_err(|e| e.to_string())?;
    let t1 = CLAIMED_T1[0];
    let gamma = gamma_from_relaxation_time(t1, n);
    let expected = n / (2.0 * n + 1.0);
    // Out to 20 T1 in steps of T1 / 10; index 100 is t = 10 T1.
    let grid = TimeGrid::new(0.0, t1 / 10.0, 201, 1.0).map_err(|e| e.to_string())?;
    let spec = HamiltonianSpec::simple(&OMEGAS[..1], &[]);
    let noise = NoiseSpec::new(vec![gamma], vec![CLAIMED_T[0]]);
    let mut gaps = Vec::new();
    let mut settle = Vec::new();
    for start in [0, 1] {
        let traj = lindblad_calib::propagator::evolve(&DensityMatrix::basis_state(1, start), &spec, &noise, &grid)
            .map_err(|e| e.to_string())?;
        let pops = populations(&traj).map_err(|e| e.to_string())?;
        gaps.push((pops[100][1] - expected).abs());
        let first = pops.iter().position(|row| (row[1] - expected).abs() <= 1e-6);
        settle.push(first.map_or(f64::INFINITY, |k| k as f64 / 10.0));
    }
    check(
        (n - 6.76e-3).abs() < 5e-5 && gaps.iter().all(|&g| g <= 1e-6),
        format!(
            "<n> = {n:.4e}, target p1 = {expected:.4e}; gap at 10 T1 from |0> {:.1e}, from |1> {:.1e} \
             (e^-10 of the initial offset); within 1e-6 after {:.1} T1 and {:.1} T1",
            gaps[0], gaps[1], settle[0], settle[1]
        ),
    )
}

fn cptp_sanity() -> Outcome {
    let started = Instant::now();
    let (mut trace, mut herm, mut min_eig): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    let mut steps = 0;
    for n in 1..=2 {
        let set = ParameterSet::from_device(&OMEGAS[..n], &CLAIMED_T1[..n], &CLAIMED_T[..n], &CLAIMED_J[..n - 1])
            .map_err(|e| e.to_string())?;
        let (spec, noise) = set.to_specs().map_err(|e| e.to_string())?;
        for kind in ExperimentKind::ALL {
            let traj = run_experiment(kind, &spec, &noise, &TimeGrid::default()).map_err(|e| e.to_string())?;
            for s in &traj.states {
                let tr = s.trace();
                trace = trace.max((tr.re - 1.0).abs().max(tr.im.abs()));
                herm = herm.max(s.hermiticity_defect());
                min_eig = min_eig.min(s.min_eigenvalue());
                steps += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    check(
        trace <= 1e-9 && herm <= 1e-9 && min_eig >= -1e-9 && elapsed < Duration::from_secs(30),
        format!(
            "{steps} states: trace defect {trace:.1e}, hermiticity {herm:.1e}, min eigenvalue {min_eig:.1e}, {elapsed:.2?}"
        ),
    )
}

fn factorization() -> Outcome {
    use ExperimentKind::*;
    // Two-qubit kind and what each qubit sees on its own.
    let pairs = [
        (T1, T1, T1),
        (T2Echo, T2Echo, T2Echo),
        (T2Star, T2Star, T2Star),
        (T1Excite10, T1, T1Idle),
        (T1Excite01, T1Idle, T1),
        (T1Idle, T1Idle, T1Idle),
        (T2StarHX, T2Star, T1),
        (T2StarHI, T2Star, T1Idle),
    ];
    let gammas: Vec<f64> = (0..2).map(|q| 1.0 / CLAIMED_T1[q]).collect();
    let grid = TimeGrid::default();
    let joint_spec = HamiltonianSpec::simple(&OMEGAS[..2], &[0.0]);
    let joint_noise = NoiseSpec::new(gammas.clone(), CLAIMED_T[..2].to_vec());
    let single = |q: usize, kind| {
        let spec = HamiltonianSpec::simple(&OMEGAS[q..q + 1], &[]);
        let noise = NoiseSpec::new(vec![gammas[q]], vec![CLAIMED_T[q]]);
        populations(&run_experiment(kind, &spec, &noise, &grid).unwrap()).unwrap()
    };
    let mut worst: f64 = 0.0;
    for (kind, k0, k1) in pairs {
        let joint = populations(&run_experiment(kind, &joint_spec, &joint_noise, &grid).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let (a, b) = (single(0, k0), single(1, k1));
        for t in 0..grid.n_points {
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((joint[t][2 * i + j] - a[t][i] * b[t][j]).abs());
                }
            }
        }
    }
    check(worst <= 1e-8, format!("max |p_joint - p0 x p1| = {worst:.2e} over all eight kinds"))
}

fn round_trip_calibration() -> Outcome {
    let truth = ParameterSet::from_device(&OMEGAS[..1], &CLAIMED_T1[..1], &CLAIMED_T[..1], &[]).map_err(|e| e.to_string())?;
    let (spec, noise) = truth.to_specs().map_err(|e| e.to_string())?;
    let exact = ParameterVector::pack(&truth).map_err(|e| e.to_string())?;
    let cfg = FitConfig { auto_freeze: false, ..FitConfig::default() };
    let gamma = exact.layout.index_of(Slot::Gamma { qubit: 0 }).unwrap();
    let log_t = exact.layout.index_of(Slot::LogTemperature { qubit: 0 }).unwrap();
    let (mut hits, mut worst_loss, mut slowest) = (0, 0.0f64, Duration::ZERO);
    for seed in 0..10u64 {
        let acq = Acquisition { shots: 8192, seed, confusion: None };
        let rec = synthesize_record(ExperimentKind::T1, &spec, &noise, &TimeGrid::default(), vec![0], &acq)
            .map_err(|e| e.to_string())?;
        let sign = if seed % 2 == 0 { 1.0 } else { -1.0 };
        let mut start = exact.clone();
        start.values[gamma] *= 1.0 + 0.1 * sign;
        start.values[log_t] += (1.0 - 0.1 * sign).ln();
        let started = Instant::now();
        let res = adam_fit(&start, &[rec], &cfg).map_err(|e| e.to_string())?;
        slowest = slowest.max(started.elapsed());
        let q = &res.derived.qubits[0];
        if (q.t1_us / CLAIMED_T1[0] - 1.0).abs() <= 0.05 && (q.temperature_mk / (CLAIMED_T[0] * 1e3) - 1.0).abs() <= 0.15 {
            hits += 1;
        }
        worst_loss = worst_loss.max(res.loss);
    }
    check(
        hits >= 9 && worst_loss <= 5e-3 && slowest < Duration::from_secs(120),
        format!("{hits}/10 seeds within T1 5% and T 15%, worst loss {worst_loss:.2e}, slowest fit {slowest:.2?}"),
    )
}

fn echo_fit() -> Outcome {
    let truth = ParameterSet::from_device(&OMEGAS[..2], &CLAIMED_T1[..2], &CLAIMED_T[..2], &CLAIMED_J[..1])
        .map_err(|e| e.to_string())?;
    let (spec, noise) = truth.to_specs().map_err(|e| e.to_string())?;
    let grid = TimeGrid::default().with_scale(1.3);
    let acq = Acquisition { shots: 8192, seed: 0, confusion: None };
    let rec = synthesize_record(ExperimentKind::T2Echo, &spec, &noise, &grid, vec![0, 1], &acq).map_err(|e| e.to_string())?;
    let exact = ParameterVector::pack(&truth).map_err(|e| e.to_string())?;
    let mut start = exact.clone();
    for q in 0..2 {
        let i = start.layout.index_of(Slot::Gamma { qubit: q }).unwrap();
        start.values[i] *= if q == 0 { 1.1 } else { 0.9 };
    }
    let res = adam_fit(&start, &[rec], &FitConfig::default()).map_err(|e| e.to_string())?;
    let fitted = res.best_params.unpack();
    let gamma_err = truth.gamma.iter().zip(&fitted.gamma).map(|(a, b)| ((b - a) / a).abs()).fold(0.0, f64::max);

    let mut echo_gap: f64 = 0.0;
    for n in 1..=3 {
        let spec = HamiltonianSpec::simple(&OMEGAS[..n], &vec![0.0; n - 1]);
        let traj = run_experiment(ExperimentKind::T2Echo, &spec, &NoiseSpec::noiseless(n), &grid).map_err(|e| e.to_string())?;
        for row in populations(&traj).map_err(|e| e.to_string())? {
            echo_gap = echo_gap.max((row[0] - 1.0).abs());
        }
    }
    check(
        res.loss <= 5e-2 && gamma_err <= 0.10 && echo_gap <= 1e-8,
        format!("loss {:.2e}, worst gamma error {:.2}%, noiseless echo |p0 - 1| = {echo_gap:.1e}", res.loss, gamma_err * 100.0),
    )
}

fn gradient_and_adam() -> Outcome {
    let set = ParameterSet::from_device(&OMEGAS[..1], &CLAIMED_T1[..1], &[1e-3], &[]).map_err(|e| e.to_string())?;
    let (spec, noise) = set.to_specs().map_err(|e| e.to_string())?;
    let acq = Acquisition { shots: 8192, seed: 3, confusion: None };
    let rec = synthesize_record(ExperimentKind::T1, &spec, &noise, &TimeGrid::default(), vec![0], &acq)
        .map_err(|e| e.to_string())?;
    let mut at = ParameterVector::pack(&set).map_err(|e| e.to_string())?;
    let i = at.layout.index_of(Slot::Gamma { qubit: 0 }).unwrap();
    at.values[i] *= 1.07;
    let g = at.values[i];
    // Loss is 2 sum (exp(-g t) - p1)^2 for a cold qubit: both bitstrings contribute equally.
    let closed: f64 = (0..rec.grid.n_points)
        .map(|k| {
            let t = rec.grid.evolution_time(k);
            4.0 * ((-g * t).exp() - rec.probs[k][1]) * (-t * (-g * t).exp())
        })
        .sum();
    let est = gradient(&at, std::slice::from_ref(&rec), 1e-6).map_err(|e| e.to_string())?;
    let rel = ((est.gradient[i] - closed) / closed).abs();

    let cfg = FitConfig::default();
    let grad = [0.3, -2.0, 1e-3, 0.0];
    let step = AdamState::new(grad.len(), &cfg).step(&grad, cfg.alpha);
    let hand: Vec<f64> = grad.iter().map(|&x| -cfg.alpha * x / (x.abs() + cfg.eps)).collect();
    let adam_gap = max_gap(&step, &hand);
    check(rel <= 1e-6 && adam_gap <= 1e-10, format!("gamma gradient relative error {rel:.2e}, Adam first step gap {adam_gap:.1e}"))
}

fn stitched_pipeline() -> Outcome {
    let started = Instant::now();
    let canned = consistency_check(&table_fits(CouplingMode::Held).map_err(|e| e.to_string())?, &Thresholds::default())
        .map_err(|e| e.to_string())?;

    let truth = ParameterSet::from_device(&OMEGAS, &[101.23, 108.31, 105.92], &[47.96e-3, 54.20e-3, 50.30e-3], &CLAIMED_J)
        .map_err(|e| e.to_string())?;
    let claimed = claimed_set(0, 3, 50e-3).map_err(|e| e.to_string())?;
    let grid = TimeGrid::default();
    let pair_kinds = [ExperimentKind::T1, ExperimentKind::T1Excite10, ExperimentKind::T1Excite01];
    let subsystems: [(usize, usize, &[ExperimentKind]); 5] = [
        (0, 1, &[ExperimentKind::T1]),
        (1, 1, &[ExperimentKind::T1]),
        (2, 1, &[ExperimentKind::T1]),
        (0, 2, &pair_kinds),
        (1, 2, &pair_kinds),
    ];
    let mut fits = Vec::new();
    for (s, &(first, n, kinds)) in subsystems.iter().enumerate() {
        let (spec, noise) = truth.restrict(first, n).and_then(|t| t.to_specs()).map_err(|e| e.to_string())?;
        let qubits: Vec<usize> = (first..first + n).collect();
        let records = kinds
            .iter()
            .enumerate()
            .map(|(k, &kind)| {
                let acq = Acquisition { shots: 8192, seed: (s * 10 + k) as u64, confusion: None };
                synthesize_record(kind, &spec, &noise, &grid, qubits.clone(), &acq)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let start = claimed.restrict(first, n).and_then(|c| ParameterVector::pack(&c)).map_err(|e| e.to_string())?;
        let fit = adam_fit(&start, &records, &FitConfig::default()).map_err(|e| e.to_string())?;
        fits.push(SubsystemFit::new(fit).map_err(|e| e.to_string())?);
    }
    let predicted = predict_composite(&fits, &[0, 1, 2], Combine::Mean).map_err(|e| e.to_string())?;
    let (ps, pn) = predicted.to_specs().map_err(|e| e.to_string())?;
    let (ts, tn) = truth.to_specs().map_err(|e| e.to_string())?;
    let p = populations(&run_experiment(ExperimentKind::T1, &ps, &pn, &grid).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let t = populations(&run_experiment(ExperimentKind::T1, &ts, &tn, &grid).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let worst = max_gap(p.iter().flatten(), t.iter().flatten());
    let elapsed = started.elapsed();
    check(
        canned.pass && worst <= 2e-2 && elapsed < Duration::from_secs(600),
        format!(
            "published fits {}, stitched vs direct 3-qubit max gap {worst:.2e}, {elapsed:.2?}",
            if canned.pass { "consistent" } else { "inconsistent" }
        ),
    )
}

fn mitigation() -> Outcome {
    let grid = TimeGrid::new(0.0, 1.0, 2, 1.0).map_err(|e| e.to_string())?;
    let mut exact_gap: f64 = 0.0;
    for n in 1..=3 {
        let m = ConfusionMatrix::from_flips(&[0.03, 0.05, 0.02][..n]).map_err(|e| e.to_string())?;
        let truth = simplex_point(1 << n, n);
        let noisy = apply_confusion(&truth, &m).map_err(|e| e.to_string())?;
        let rec = ExperimentRecord::exact(ExperimentKind::T1, (0..n).collect(), grid, vec![noisy; 2])
            .map_err(|e| e.to_string())?;
        let fixed = mitigate(&rec, &m).map_err(|e| e.to_string())?;
        for row in &fixed.probs {
            exact_gap = exact_gap.max(max_gap(row, &truth));
        }
    }

    let shots = 8192u64;
    let m = ConfusionMatrix::from_flips(&[0.03, 0.05]).map_err(|e| e.to_string())?;
    let (mut within, mut total) = (0usize, 0usize);
    for seed in 0..100u64 {
        let truth = simplex_point(4, seed as usize);
        let noisy = apply_confusion(&truth, &m).map_err(|e| e.to_string())?;
        let counts = (0..4)
            .map(|r| sample_counts(&noisy, shots, seed * 4 + r))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let grid = TimeGrid::new(0.0, 1.0, 4, 1.0).map_err(|e| e.to_string())?;
        let rec = ExperimentRecord::from_counts(ExperimentKind::T1, vec![0, 1], grid, counts, Some(seed))
            .map_err(|e| e.to_string())?;
        for row in &mitigate(&rec, &m).map_err(|e| e.to_string())?.probs {
            for (x, p) in row.iter().zip(&truth) {
                total += 1;
                if (x - p).abs() <= 5.0 * (p * (1.0 - p) / shots as f64).sqrt() {
                    within += 1;
                }
            }
        }
    }
    let share = within as f64 / total as f64;
    check(
        exact_gap <= 1e-10 && share >= 0.99,
        format!("exact inversion gap {exact_gap:.1e}, {within}/{total} sampled entries within 5 sigma"),
    )
}

/// Interior probability vector that varies with `salt`.
fn simplex_point(dim: usize, salt: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|i| 1.0 + ((i * 7 + salt * 3) % 5) as f64).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("lindblad-calib").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    if code == exit::SUCCESS {
        Ok(out)
    } else {
        Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)))
    }
}

/// Runs simulate, fit, stitch and plot in `dir` and returns every output.
fn workflow(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let mut outputs = Vec::new();
    outputs.push(("simulate stdout".into(), cli(&["simulate", "--kind", "t1", "--qubits", "2", "--seed", "9", "--out", &p("pair.csv")])?));
    outputs.push(("simulate single".into(), cli(&["simulate", "--kind", "t1", "--seed", "4", "--out", &p("single.csv")])?));
    outputs.push(("fit pair".into(), cli(&["fit", &p("pair.csv"), "--iters", "80", "--out", &p("pair.json")])?));
    outputs.push(("fit single".into(), cli(&["fit", &p("single.csv"), "--iters", "80", "--out", &p("single.json")])?));
    outputs.push((
        "stitch".into(),
        cli(&["stitch", &p("pair.json"), &p("single.json"), "--out", &p("report.json"), "--predict", "0,1", "--predict-out", &p("composite.json")])?,
    ));
    outputs.push(("plot".into(), cli(&["plot", &p("pair.csv"), "--fit", &p("pair.json"), "--out", &p("plot.svg")])?));
    for name in ["pair.csv", "pair.csv.truth.json", "single.csv", "pair.json", "single.json", "report.json", "composite.json", "plot.svg"] {
        outputs.push((name.into(), fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?));
    }
    Ok(outputs)
}

fn determinism() -> Outcome {
    let (a, b) = (TempDir::new().map_err(|e| e.to_string())?, TempDir::new().map_err(|e| e.to_string())?);
    let first = workflow(a.path())?;
    let second = workflow(b.path())?;
    let differing: Vec<&str> = first.iter().zip(&second).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.as_str()).collect();
    check(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} outputs byte-identical across two runs", first.len())
        } else {
            format!("differing outputs: {differing:?}")
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("analytic decay", analytic_decay),
        ("thermal fixed point", thermal_fixed_point),
        ("CPTP sanity", cptp_sanity),
        ("factorization", factorization),
        ("round-trip calibration", round_trip_calibration),
        ("echo fit", echo_fit),
        ("gradient and Adam step", gradient_and_adam),
        ("stitching", stitched_pipeline),
        ("mitigation", mitigation),
        ("determinism", determinism),
    ];
    let (mut failed, mut unexpected) = (0, 0);
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (verdict, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                if !UNATTAINABLE.contains(&(i + 1)) {
                    unexpected += 1;
                }
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {verdict} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed; known unattainable: {UNATTAINABLE:?}", criteria.len() - failed, criteria.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
