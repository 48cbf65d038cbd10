//! End-to-end acceptance checks. Each test prints one PASS or FAIL line to
//! stderr, so the verdicts stay visible under the default output capture.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::time::{Duration, Instant};

use common::{free_fall_drop, pendulum_periods, stride, verdict, worst_audit_ratio};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tendon_biped::analysis::{
    analyze, ankle_power, cost_of_transport, froude_speeds, power_amplification, AnalysisOptions,
    GaitMetrics,
};
use tendon_biped::cli::{main_with_args, Comparison};
use tendon_biped::cpg::{
    hip_phase, knee_phase, leg_reference, step_phase, CpgParams, OscillatorState,
};
use tendon_biped::dynamics::run_trial;
use tendon_biped::tendons::{JointPose, TendonNetwork};
use tendon_biped::{ConfigBundle, ConfigName};

const PRESETS: [ConfigName; 3] = [ConfigName::GasSol, ConfigName::Sol, ConfigName::Gas];

fn report(label: &str, failures: &[String], elapsed: Duration, budget: Option<Duration>) {
    let mut failures = failures.to_vec();
    if let Some(b) = budget {
        if elapsed > b {
            failures.push(format!("took {elapsed:?}, budget {b:?}"));
        }
    }
    let detail = if failures.is_empty() {
        format!("ok in {elapsed:.2?}")
    } else {
        failures.join("; ")
    };
    verdict(label, failures.is_empty(), &detail);
    assert!(failures.is_empty(), "{label}: {detail}");
}

#[test]
fn cpg_phase_warps_hit_their_breakpoints_and_stay_continuous() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for name in PRESETS {
        let p = CpgParams::preset(name);
        let (d_hip, s, d_knee) = (p.hip_duty_factor, p.hip_swing_steady, p.knee_duty_factor);
        let at_duty = hip_phase(TAU * d_hip, d_hip, s);
        if (at_duty - PI).abs() > 1e-9 {
            failures.push(format!("{name:?}: hip phase {at_duty} at end of stance"));
        }
        let at_hold = hip_phase(TAU * (1.0 - s), d_hip, s);
        if (at_hold - TAU).abs() > 1e-9 {
            failures.push(format!("{name:?}: hip phase {at_hold} at start of hold"));
        }
        // approaching the breakpoints from below gives the same values
        let below = |x: f64| x - 1e-12;
        if (hip_phase(below(TAU * d_hip), d_hip, s) - PI).abs() > 1e-9
            || (hip_phase(below(TAU * (1.0 - s)), d_hip, s) - TAU).abs() > 1e-9
        {
            failures.push(format!("{name:?}: hip warp jumps at a breakpoint"));
        }
        let n = 200_000;
        for i in 0..n {
            let phase = TAU * d_knee * i as f64 / n as f64;
            if knee_phase(phase, d_knee) != 0.0 {
                failures.push(format!("{name:?}: knee phase nonzero at {phase} in stance"));
                break;
            }
        }
        // dense sampling: steps in the references are bounded by their
        // steepest slope times the sample spacing
        let samples = 1_000_000;
        let h = TAU / samples as f64;
        let hip_slope =
            p.hip_amplitude * (1.0 / (2.0 * d_hip)).max(1.0 / (2.0 * (1.0 - d_hip - s)));
        let knee_slope = p.knee_amplitude / (2.0 * (1.0 - d_knee));
        let mut prev = leg_reference(0.0, &p);
        let mut worst = (0.0f64, 0.0f64);
        for i in 1..=samples {
            let now = leg_reference((i as f64 * h).min(TAU - 1e-15), &p);
            worst.0 = worst.0.max((now.0 - prev.0).abs() / (hip_slope * h));
            worst.1 = worst.1.max((now.1 - prev.1).abs() / (knee_slope * h));
            prev = now;
        }
        if worst.0 > 1.0 + 1e-6 || worst.1 > 1.0 + 1e-6 {
            failures.push(format!(
                "{name:?}: reference discontinuity, slope ratios {worst:?}"
            ));
        }
        // the cycle closes on itself
        let (h0, k0) = leg_reference(0.0, &p);
        let (h1, k1) = leg_reference(TAU - 1e-12, &p);
        if (h0 - h1).abs() > 1e-6 || (k0 - k1).abs() > 1e-6 {
            failures.push(format!(
                "{name:?}: references do not wrap ({h0},{k0}) vs ({h1},{k1})"
            ));
        }
    }
    report(
        "cpg phase warps",
        &failures,
        start.elapsed(),
        Some(Duration::from_secs(1)),
    );
}

#[test]
fn oscillators_lock_into_anti_phase_from_random_starts() {
    let start = Instant::now();
    let mut params = CpgParams::preset(ConfigName::GasSol);
    params.coupling_gain = 5.0;
    params.frequency = 1.0;
    params.coupling = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut state =
            OscillatorState::new(vec![rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)]);
        for _ in 0..10_000 {
            state = step_phase(&state, &params, 1e-3).unwrap();
        }
        let diff = (state.phases[1] - state.phases[0]).rem_euclid(TAU);
        worst = worst.max((diff - PI).abs());
    }
    let failures: Vec<String> = if worst < 1e-3 {
        Vec::new()
    } else {
        vec![format!("worst |ΔΦ − π| = {worst:e} rad")]
    };
    report(
        "phase locking",
        &failures,
        start.elapsed(),
        Some(Duration::from_secs(5)),
    );
}

#[test]
fn ankle_power_matches_rate_of_tendon_energy() {
    let start = Instant::now();
    let dt = 1e-3;
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..10 {
        let name = PRESETS[trial % 3];
        let bundle = ConfigBundle::preset(name);
        let network = TendonNetwork::new(bundle.tendons.clone(), bundle.model.pulley_radii);
        // smooth dorsiflexion against a moving knee, so the GAS engages and
        // releases within each trajectory
        let (a0, a1, fa) = (
            rng.gen_range(0.01..0.05),
            rng.gen_range(0.1..0.25),
            rng.gen_range(0.5..2.0),
        );
        let (k0, k1, fk) = (
            rng.gen_range(0.0..0.1),
            rng.gen_range(0.05..0.3),
            rng.gen_range(0.5..2.0),
        );
        let phase = rng.gen_range(0.0..TAU);
        let ankle = |t: f64| a0 + a1 * (0.5 - 0.5 * (TAU * fa * t).cos());
        let knee = |t: f64| k0 + k1 * (0.5 - 0.5 * (TAU * fk * t + phase).cos());
        let energy = |a: f64, k: f64| {
            let e = network.stored_energy(&JointPose {
                alpha_a: a,
                alpha_k: k,
                theta_toe: bundle.tendons.toe_rest_angle,
                omega_a: 0.0,
            });
            e.sol + e.gas
        };
        let mut sq = 0.0;
        let mut n = 0usize;
        let mut engaged = [false, false];
        for i in 1..2000 {
            let t = i as f64 * dt;
            let (a, k) = (ankle(t), knee(t));
            // rate of the angle from the trajectory itself
            let omega = (ankle(t + 1e-6) - ankle(t - 1e-6)) / 2e-6;
            let p = ankle_power(a, k, omega, &bundle.tendons, &bundle.model.pulley_radii);
            // oracle: ankle-driven change of the stored energy, knee held
            let h = 1e-6;
            let oracle = (energy(a + h, k) - energy(a - h, k)) / (2.0 * h) * omega;
            sq += (p - oracle).powi(2);
            n += 1;
            engaged[usize::from(a >= k)] = true;
        }
        let rms = (sq / n as f64).sqrt();
        if rms >= 1e-3 {
            failures.push(format!("trajectory {trial} ({name:?}): RMS {rms:e} W"));
        }
        if name != ConfigName::Sol && !(engaged[0] && engaged[1]) {
            failures.push(format!("trajectory {trial} never switched GAS engagement"));
        }
    }
    report("ankle power oracle", &failures, start.elapsed(), None);
}

#[test]
fn cost_of_transport_matches_reference_values() {
    let start = Instant::now();
    let rows = [
        ("GAS+SOL", 18.0, 2.22, 0.55, 1.50, 0.74),
        ("SOL", 17.0, 2.05, 0.57, 1.47, 0.68),
        ("GAS", 20.0, 2.05, 0.35, 2.93, 1.63),
    ];
    let mut failures = Vec::new();
    for (name, p, m, v, total, net) in rows {
        let (t, n) = cost_of_transport(p, m, v, 9.0).unwrap();
        if (t - total).abs() > 0.10 {
            failures.push(format!("{name}: total {t:.3} vs {total}"));
        }
        if (n - net).abs() > 0.08 {
            failures.push(format!("{name}: net {n:.3} vs {net}"));
        }
    }
    report("cost of transport", &failures, start.elapsed(), None);
}

/// Positive bump of height `up` over the middle of the cycle and a negative
/// bump of depth `down` earlier on, with no overlap.
fn bump_curve(n: usize, up: f64, down: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            let bump = |a: f64, b: f64| {
                if (a..b).contains(&x) {
                    (PI * (x - a) / (b - a)).sin().powi(2)
                } else {
                    0.0
                }
            };
            up * bump(0.4, 0.7) - down * bump(0.05, 0.35)
        })
        .collect()
}

#[test]
fn amplification_follows_its_definition() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (up, down, ratio) in [(27.0, 10.0, 2.7), (5.2, 1.0, 5.2), (1.0, 2.0, 0.5)] {
        let a = power_amplification(&bump_curve(1000, up, down));
        match a.ratio {
            Some(r) if (r - ratio).abs() < 1e-9 => {}
            other => failures.push(format!("expected {ratio}, got {other:?}")),
        }
    }
    if power_amplification(&bump_curve(1000, 3.0, 0.0))
        .ratio
        .is_some()
    {
        failures.push("a curve without a negative part still got a ratio".into());
    }

    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 256,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let property = runner.run(
        &(
            proptest::collection::vec(-50.0f64..50.0, 8..200),
            0.01f64..100.0,
            0usize..1000,
        ),
        |(curve, scale, shift)| {
            let base = power_amplification(&curve);
            let scaled: Vec<f64> = curve.iter().map(|v| v * scale).collect();
            let mut rotated = curve.clone();
            rotated.rotate_left(shift % curve.len());
            let (s, r) = (power_amplification(&scaled), power_amplification(&rotated));
            match (base.ratio, s.ratio, r.ratio) {
                (None, None, None) => {}
                (Some(b), Some(s), Some(r)) => {
                    prop_assert!((s - b).abs() <= 1e-9 * b);
                    prop_assert!((r - b).abs() <= 1e-12 * b);
                }
                other => prop_assert!(false, "ratio presence changed: {:?}", other),
            }
            Ok(())
        },
    );
    if let Err(e) = property {
        failures.push(format!("invariance property: {e}"));
    }
    report("amplification", &failures, start.elapsed(), None);
}

#[test]
fn steady_walking_reproduces_the_qualitative_ordering() {
    let budget = Duration::from_secs(60);
    let results: Vec<(ConfigName, Duration, Result<GaitMetrics, String>)> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = PRESETS
                .iter()
                .map(|&name| {
                    scope.spawn(move || {
                        let bundle = ConfigBundle::preset(name);
                        let start = Instant::now();
                        let outcome = run_trial(&bundle);
                        let elapsed = start.elapsed();
                        let metrics = outcome
                            .map_err(|e| e.to_string())
                            .and_then(|o| o.into_result().map_err(|e| e.to_string()))
                            .and_then(|log| {
                                analyze(&log, &bundle, &AnalysisOptions::default())
                                    .map(|r| r.metrics)
                                    .map_err(|e| e.to_string())
                            });
                        (name, elapsed, metrics)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });

    let mut failures = Vec::new();
    let mut metrics = Vec::new();
    for (name, elapsed, m) in results {
        if elapsed > budget {
            failures.push(format!("{name:?} trial took {elapsed:?}"));
        }
        match m {
            Ok(m) => {
                let _ = writeln_stderr(&format!(
                    "      {:<8} amplification {:>6} speed {:.3} m/s total CoT {:.3} peak at {:.1} %  ({elapsed:.1?})",
                    m.configuration,
                    m.amplification.map_or("-".into(), |a| format!("{a:.3}")),
                    m.speed,
                    m.total_cot,
                    m.positive_peak_timing,
                ));
                metrics.push(m);
            }
            Err(e) => failures.push(format!("{name:?}: {e}")),
        }
    }
    if metrics.len() == PRESETS.len() {
        for check in Comparison::new(metrics).unwrap().qualitative_checks() {
            let ok = check.holds == Some(true);
            let _ = writeln_stderr(&format!(
                "      [{}] {}",
                if ok { "ok" } else { "no" },
                check.description
            ));
            if !ok {
                failures.push(check.description);
            }
        }
    }
    let detail = if failures.is_empty() {
        "all orderings hold".to_string()
    } else {
        format!("{} check(s) fail: {}", failures.len(), failures.join("; "))
    };
    verdict("qualitative reproduction", failures.is_empty(), &detail);
    assert!(failures.is_empty(), "{detail}");
}

fn writeln_stderr(line: &str) -> std::io::Result<()> {
    use std::io::Write;
    writeln!(std::io::stderr(), "{line}")
}

#[test]
fn plant_agrees_with_closed_form_mechanics() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (drop, expected) = free_fall_drop();
    if ((drop - expected) / expected).abs() >= 0.01 {
        failures.push(format!("free fall {drop} m vs {expected} m"));
    }
    let (period, expected) = pendulum_periods();
    if ((period - expected) / expected).abs() >= 0.01 {
        failures.push(format!("pendulum {period} s vs {expected} s"));
    }
    let worst = worst_audit_ratio(12);
    if worst >= 0.01 {
        failures.push(format!(
            "energy residual {:.3} % of throughput",
            100.0 * worst
        ));
    }
    let coarse = stride(|_| {});
    let fine = stride(|s| s.timestep *= 0.5);
    let change = ((fine - coarse) / coarse).abs();
    if change >= 0.02 {
        failures.push(format!(
            "stride moved {:.2} % on halving the step",
            100.0 * change
        ));
    }
    report("physics sanity", &failures, start.elapsed(), None);
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                files.insert(key, std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn repeated_run_and_analyze_are_byte_identical() {
    let start = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut failures = Vec::new();
    for dir in &dirs {
        let out = dir.path().to_str().unwrap();
        let run = main_with_args([
            "tendon-biped",
            "run",
            "--preset",
            "SOL",
            "--duration",
            "30",
            "--settle-time",
            "5",
            "--out",
            out,
        ]);
        let log = dir.path().join("sol.csv");
        let report_dir = dir.path().join("sol.report");
        let analyzed = main_with_args([
            "tendon-biped",
            "analyze",
            log.to_str().unwrap(),
            "--out",
            report_dir.to_str().unwrap(),
        ]);
        if run != 0 || analyzed != 0 {
            failures.push(format!("exit codes run {run}, analyze {analyzed}"));
        }
    }
    let (a, b) = (read_tree(dirs[0].path()), read_tree(dirs[1].path()));
    for required in [
        "sol.csv",
        "sol.meta.json",
        "sol.report/metrics.json",
        "sol.report/curves.csv",
        "sol.report/coordination.csv",
    ] {
        if !a.contains_key(required) {
            failures.push(format!("missing {required}"));
        }
    }
    if a.keys().ne(b.keys()) {
        failures.push(format!(
            "file sets differ: {:?} vs {:?}",
            a.keys(),
            b.keys()
        ));
    }
    for (name, bytes) in &a {
        if b.get(name).is_some_and(|other| other != bytes) {
            failures.push(format!("{name} differs"));
        }
    }
    report("determinism", &failures, start.elapsed(), None);
}

#[test]
fn froude_test_speed_for_the_robot_leg() {
    let start = Instant::now();
    let leg = ConfigBundle::preset(ConfigName::GasSol).model.leg_length;
    let v = froude_speeds(leg).unwrap().test_speed;
    let failures: Vec<String> = if (v - 0.618).abs() <= 0.001 && leg == 0.35 {
        Vec::new()
    } else {
        vec![format!("leg {leg} m gives {v} m/s")]
    };
    report("froude speed", &failures, start.elapsed(), None);
}
