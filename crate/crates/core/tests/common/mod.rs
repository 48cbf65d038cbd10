//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::io::Write;

use tendon_biped::analysis::{analyze, AnalysisOptions};
use tendon_biped::dynamics::{
    joint_index, run_trial, Plant, SimSettings, SimState, Simulator, DOF, LEFT, RIGHT, TOE, Z,
};
use tendon_biped::morphology::RobotModel;
use tendon_biped::tendons::TendonNetwork;
use tendon_biped::{ConfigBundle, ConfigName};

pub const NO_TORQUE: [[f64; 2]; 2] = [[0.0; 2]; 2];

/// Print a verdict line past the test harness's output capture.
pub fn verdict(label: &str, ok: bool, detail: &str) {
    let word = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{word}  {label}: {detail}");
}

/// Robot hanging 1 m above the ground with every spring relaxed.
pub fn airborne_plant(settings: SimSettings) -> (Plant, SimState) {
    let bundle = ConfigBundle::preset(ConfigName::GasSol);
    let network = TendonNetwork::new(bundle.tendons.clone(), bundle.model.pulley_radii);
    let plant = Plant::new(&bundle.model, network, settings);
    let mut q = [0.0; DOF];
    q[Z] = 1.0;
    for leg in [LEFT, RIGHT] {
        q[joint_index(leg, TOE)] = bundle.tendons.toe_rest_angle.to_radians();
    }
    (plant, SimState::at_rest(q))
}

/// Trunk drop after 0.1 s of free fall, with the closed-form value.
pub fn free_fall_drop() -> (f64, f64) {
    let (plant, mut state) = airborne_plant(SimSettings::default());
    let z0 = state.q[Z];
    for _ in 0..100 {
        plant.advance(&mut state, &NO_TORQUE).unwrap();
    }
    (state.q[Z] - z0, -0.5 * 9.81 * 0.1 * 0.1)
}

/// Pivot inertia, mass times centre-of-mass distance, and hanging angle of
/// the straight left leg swung about the hip, from the segment data alone.
pub fn leg_pendulum(model: &RobotModel, hip_armature: f64) -> (f64, f64, f64) {
    let m = &model.segment_masses;
    let h = model.foot_height;
    let span = model.heel_offset + model.heel_length;
    let ankle_z = -(model.thigh_length + model.shank_length);
    let (heel, toe) = (model.heel_mass(), model.toe_mass());
    // (mass, com x, com z, inertia about own com)
    let parts = [
        (
            m.thigh,
            0.0,
            -0.5 * model.thigh_length,
            m.thigh * model.thigh_length.powi(2) / 12.0,
        ),
        (
            m.shank,
            0.0,
            -model.thigh_length - 0.5 * model.shank_length,
            m.shank * model.shank_length.powi(2) / 12.0,
        ),
        (
            heel,
            -model.heel_offset + 0.5 * span,
            ankle_z - 0.5 * h,
            heel * (span * span + h * h) / 12.0,
        ),
        (
            toe,
            model.heel_length + 0.5 * model.toe_length,
            ankle_z - h,
            toe * model.toe_length.powi(2) / 12.0,
        ),
    ];
    let mass: f64 = parts.iter().map(|p| p.0).sum();
    let cx = parts.iter().map(|p| p.0 * p.1).sum::<f64>() / mass;
    let cz = parts.iter().map(|p| p.0 * p.2).sum::<f64>() / mass;
    let inertia: f64 = parts
        .iter()
        .map(|p| p.3 + p.0 * (p.1 * p.1 + p.2 * p.2))
        .sum::<f64>()
        + hip_armature;
    let rest = -cx.atan2(-cz);
    (inertia, mass * (cx * cx + cz * cz).sqrt(), rest)
}

/// Simulated and closed-form small-swing period of the left leg with every
/// other coordinate locked.
pub fn pendulum_periods() -> (f64, f64) {
    let settings = SimSettings::default();
    let hip_armature = settings.armature[0];
    let (mut plant, mut state) = airborne_plant(settings);
    let model = RobotModel::with_total_mass(ConfigName::GasSol.total_mass()).unwrap();
    let (inertia, moment, rest) = leg_pendulum(&model, hip_armature);
    let expected = 2.0 * std::f64::consts::PI * (inertia / (9.81 * moment)).sqrt();

    let hip = joint_index(LEFT, 0);
    for i in 0..DOF {
        plant.locked[i] = i != hip;
    }
    state.q[hip] = rest + 3f64.to_radians();

    // upward crossings of the hanging angle, linearly interpolated
    let dt = plant.settings.timestep;
    let mut crossings = Vec::new();
    let mut prev = state.q[hip] - rest;
    for k in 1..=6000 {
        plant.advance(&mut state, &NO_TORQUE).unwrap();
        let now = state.q[hip] - rest;
        if prev < 0.0 && now >= 0.0 {
            crossings.push(dt * (k as f64 - now / (now - prev)));
        }
        prev = now;
    }
    assert!(
        crossings.len() >= 4,
        "only {} periods observed",
        crossings.len()
    );
    let measured = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    (measured, expected)
}

/// Worst per-cycle ratio of energy residual to energy throughput over a
/// walking trial, skipping the first two cycles.
pub fn worst_audit_ratio(cycles: usize) -> f64 {
    let bundle = ConfigBundle::preset(ConfigName::GasSol);
    let mut sim = Simulator::new(&bundle).unwrap();
    let per_cycle = (1.0 / (bundle.cpg.frequency * bundle.settings.timestep)).round() as usize;
    let mut marks = Vec::new();
    for _ in 0..=cycles {
        let state = sim.state();
        marks.push((sim.plant().energy(state).total(), state.work));
        for _ in 0..per_cycle {
            sim.step().unwrap();
        }
        assert!(!sim.has_fallen());
    }
    marks
        .windows(2)
        .skip(2)
        .map(|w| {
            let ((e0, w0), (e1, w1)) = (w[0], w[1]);
            let residual = (e1 - e0) - (w1.total() - w0.total());
            let throughput = (w1.motor_throughput - w0.motor_throughput)
                + (w1.contact - w0.contact).abs()
                + (w1.joint_limit - w0.joint_limit).abs();
            residual.abs() / throughput
        })
        .fold(0.0, f64::max)
}

/// Stride length of a 40 s GAS+SOL trial after adjusting the settings.
pub fn stride(adjust: impl FnOnce(&mut SimSettings)) -> f64 {
    let mut bundle = ConfigBundle::preset(ConfigName::GasSol);
    bundle.settings.duration = 40.0;
    bundle.settings.settle_time = 10.0;
    adjust(&mut bundle.settings);
    let log = run_trial(&bundle).unwrap().into_result().unwrap();
    analyze(&log, &bundle, &AnalysisOptions::default())
        .unwrap()
        .metrics
        .stride_length
}
