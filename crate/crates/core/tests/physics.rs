//! Plant sanity checks against closed-form mechanics.

mod common;

use common::{
    airborne_plant, free_fall_drop, pendulum_periods, stride, worst_audit_ratio, NO_TORQUE,
};
use tendon_biped::dynamics::{run_trial, SimSettings, ANKLE, HIP, KNEE, LEFT, RIGHT, X, Z};
use tendon_biped::{ConfigBundle, ConfigName};

#[test]
fn weightless_robot_at_rest_stays_put() {
    let settings = SimSettings {
        gravity: 0.0,
        ..SimSettings::default()
    };
    let (plant, mut state) = airborne_plant(settings);
    let start = state.q;
    for _ in 0..500 {
        plant.advance(&mut state, &NO_TORQUE).unwrap();
    }
    assert_eq!(state.q, start);
    assert!(state.qd.iter().all(|v| *v == 0.0));
    assert_eq!(state.work.total(), 0.0);
}

#[test]
fn free_fall_drop_after_a_tenth_of_a_second() {
    let (drop, expected) = free_fall_drop();
    assert!(
        ((drop - expected) / expected).abs() < 0.01,
        "drop {drop} m vs {expected} m"
    );
}

#[test]
fn uniform_gravity_does_not_bend_a_relaxed_chain() {
    let (plant, mut state) = airborne_plant(SimSettings::default());
    for _ in 0..100 {
        plant.advance(&mut state, &NO_TORQUE).unwrap();
    }
    for leg in [LEFT, RIGHT] {
        for j in [HIP, KNEE, ANKLE] {
            assert!(state.joint(leg, j).abs() < 1e-9);
        }
    }
    assert_eq!(state.q[X], 0.0);
}

#[test]
fn swinging_leg_matches_compound_pendulum_period() {
    let (measured, expected) = pendulum_periods();
    assert!(
        ((measured - expected) / expected).abs() < 0.01,
        "period {measured} s vs {expected} s"
    );
}

#[test]
fn locked_coordinates_do_not_move() {
    let (mut plant, mut state) = airborne_plant(SimSettings::default());
    plant.locked = [true; 10];
    let start = state.q;
    for _ in 0..50 {
        plant.advance(&mut state, &NO_TORQUE).unwrap();
    }
    assert_eq!(state.q, start);
    assert_eq!(state.q[Z], 1.0);
}

#[test]
fn energy_audit_closes_every_cycle() {
    let worst = worst_audit_ratio(12);
    assert!(
        worst < 0.01,
        "worst residual {:.3} % of throughput",
        100.0 * worst
    );
}

#[test]
fn rk4_audit_closes_too() {
    let mut bundle = ConfigBundle::preset(ConfigName::GasSol);
    bundle.settings.integrator = tendon_biped::dynamics::Integrator::Rk4;
    bundle.settings.duration = 2.0;
    bundle.settings.settle_time = 0.0;
    let (plant, mut state) = airborne_plant(bundle.settings.clone());
    state.qd[tendon_biped::dynamics::joint_index(LEFT, HIP)] = 2.0;
    let e0 = plant.energy(&state).total();
    for _ in 0..300 {
        plant
            .advance(&mut state, &[[0.5, -0.3], [0.0, 0.2]])
            .unwrap();
    }
    let residual = plant.energy(&state).total() - e0 - state.work.total();
    assert!(
        residual.abs() < 1e-3 * state.work.motor_throughput.max(1e-3),
        "residual {residual} J"
    );
    // the same settings walk
    assert!(!run_trial(&bundle).unwrap().fallen);
}

#[test]
fn halving_the_timestep_barely_moves_the_stride() {
    let coarse = stride(|_| {});
    let fine = stride(|s| s.timestep *= 0.5);
    assert!(
        ((fine - coarse) / coarse).abs() < 0.02,
        "stride {coarse} m at dt, {fine} m at dt/2"
    );
}

#[test]
fn trials_are_bit_reproducible() {
    let mut bundle = ConfigBundle::preset(ConfigName::Sol);
    bundle.settings.duration = 3.0;
    bundle.settings.settle_time = 1.0;
    let a = run_trial(&bundle).unwrap().log;
    let b = run_trial(&bundle).unwrap().log;
    let dir = tempfile::tempdir().unwrap();
    a.save(dir.path(), "a").unwrap();
    b.save(dir.path(), "b").unwrap();
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.meta.json"), read("b.meta.json"));
}
