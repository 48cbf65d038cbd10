//! Feed-forward central pattern generator.
//!
//! Each leg is one phase oscillator. The network drives the oscillators to a
//! half-cycle offset, and each phase is warped piecewise into a hip phase
//! (cosine trajectory) and a knee phase (sine trajectory). Angles at this
//! interface are degrees.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphology::ConfigName;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpgParams {
    /// Hz
    pub frequency: f64,
    pub hip_duty_factor: f64,
    pub knee_duty_factor: f64,
    /// deg
    pub hip_amplitude: f64,
    /// deg
    pub knee_amplitude: f64,
    /// deg
    pub hip_offset: f64,
    /// deg
    pub knee_offset: f64,
    /// Fraction of the cycle the hip holds at the end of swing.
    pub hip_swing_steady: f64,
    pub coupling_gain: f64,
    /// Row i holds the weights of node i's inputs.
    pub coupling: Vec<Vec<f64>>,
    /// rad
    pub desired_phase_diff: Vec<Vec<f64>>,
}

impl CpgParams {
    pub fn preset(name: ConfigName) -> Self {
        let (knee_duty, hip_amp, hip_off) = match name {
            ConfigName::GasSol | ConfigName::Custom => (0.65, 30.0, 5.0),
            ConfigName::Sol => (0.65, 30.0, 2.5),
            ConfigName::Gas => (0.60, 27.5, 2.5),
        };
        Self {
            frequency: 1.0,
            hip_duty_factor: 0.65,
            knee_duty_factor: knee_duty,
            hip_amplitude: hip_amp,
            knee_amplitude: 70.0,
            hip_offset: hip_off,
            knee_offset: 2.0,
            hip_swing_steady: 0.05,
            coupling_gain: 5.0,
            coupling: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            desired_phase_diff: vec![vec![0.0, PI], vec![PI, 0.0]],
        }
    }

    pub fn nodes(&self) -> usize {
        self.coupling.len()
    }

    /// Violations of the parameter invariants, as messages.
    pub fn check(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |f: &str, r: String| out.push((f.to_string(), r));
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            push(
                "frequency",
                format!("frequency > 0 (got {})", self.frequency),
            );
        }
        if !(self.hip_duty_factor > 0.0 && self.hip_duty_factor < 1.0) {
            push(
                "hip_duty_factor",
                format!("0 < D_hip < 1 (got {})", self.hip_duty_factor),
            );
        }
        if !(self.knee_duty_factor > 0.0 && self.knee_duty_factor < 1.0) {
            push(
                "knee_duty_factor",
                format!("0 < D_knee < 1 (got {})", self.knee_duty_factor),
            );
        }
        if !(self.hip_swing_steady >= 0.0 && self.hip_swing_steady < 1.0 - self.hip_duty_factor) {
            push(
                "hip_swing_steady",
                format!(
                    "0 ≤ hip_swing_steady < 1 − D_hip (got {})",
                    self.hip_swing_steady
                ),
            );
        }
        for (f, v) in [
            ("hip_amplitude", self.hip_amplitude),
            ("knee_amplitude", self.knee_amplitude),
            ("hip_offset", self.hip_offset),
            ("knee_offset", self.knee_offset),
            ("coupling_gain", self.coupling_gain),
        ] {
            if !v.is_finite() {
                push(f, format!("{f} finite"));
            }
        }
        let n = self.coupling.len();
        if n == 0 {
            push("coupling", "at least one oscillator node".into());
        }
        if self.coupling.iter().any(|r| r.len() != n)
            || self.desired_phase_diff.len() != n
            || self.desired_phase_diff.iter().any(|r| r.len() != n)
        {
            push(
                "coupling",
                "coupling and desired_phase_diff are square and the same size".into(),
            );
        }
        out
    }
}

/// Oscillator phases, each wrapped to [0, 2π).
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorState {
    pub phases: Vec<f64>,
    pub time: f64,
}

impl OscillatorState {
    /// Left leg at 0, right leg at π.
    pub fn anti_phase() -> Self {
        Self {
            phases: vec![0.0, PI],
            time: 0.0,
        }
    }

    pub fn new(phases: Vec<f64>) -> Self {
        Self {
            phases: phases.into_iter().map(wrap_phase).collect(),
            time: 0.0,
        }
    }
}

pub fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Right-hand side of the phase network.
pub fn phase_rates(phases: &[f64], params: &CpgParams) -> Vec<f64> {
    let omega = TAU * params.frequency;
    phases
        .iter()
        .enumerate()
        .map(|(i, &pi)| {
            let coupling: f64 = phases
                .iter()
                .enumerate()
                .map(|(j, &pj)| {
                    params.coupling_gain
                        * params.coupling[i][j]
                        * (pj - pi - params.desired_phase_diff[i][j]).sin()
                })
                .sum();
            omega + coupling
        })
        .collect()
}

/// Advance the oscillator network by one explicit Euler step of `dt`.
pub fn step_phase(state: &OscillatorState, params: &CpgParams, dt: f64) -> Result<OscillatorState> {
    if !(dt > 0.0 && dt <= 1.0 / (100.0 * params.frequency)) {
        return Err(Error::invalid(format!(
            "CPG step {dt} s must lie in (0, 1/(100·f)]"
        )));
    }
    let rates = phase_rates(&state.phases, params);
    let mut phases = Vec::with_capacity(rates.len());
    for (p, r) in state.phases.iter().zip(rates) {
        let next = p + dt * r;
        if !next.is_finite() {
            return Err(Error::SimulationFault {
                time: state.time,
                message: "non-finite oscillator phase".into(),
            });
        }
        phases.push(wrap_phase(next));
    }
    Ok(OscillatorState {
        phases,
        time: state.time + dt,
    })
}

/// Warped hip phase: stance maps onto [0, π), swing onto [π, 2π), then a
/// hold at 2π for the last `hip_swing_steady` of the cycle.
pub fn hip_phase(phase: f64, duty: f64, swing_steady: f64) -> f64 {
    if phase < TAU * duty {
        phase / (2.0 * duty)
    } else if phase < TAU * (1.0 - swing_steady) {
        (phase + TAU * (1.0 - 2.0 * duty - swing_steady)) / (2.0 * (1.0 - duty - swing_steady))
    } else {
        TAU
    }
}

/// Warped knee phase: zero while the knee is held, then [0, π] through swing.
pub fn knee_phase(phase: f64, duty: f64) -> f64 {
    if phase < TAU * duty {
        0.0
    } else {
        (phase - TAU * duty) / (2.0 * (1.0 - duty))
    }
}

pub fn hip_angle(warped: f64, params: &CpgParams) -> f64 {
    params.hip_amplitude * warped.cos() + params.hip_offset
}

pub fn knee_angle(warped: f64, params: &CpgParams) -> f64 {
    params.knee_amplitude * warped.sin() + params.knee_offset
}

/// Commanded joint angles in degrees for both legs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointReference {
    pub hip_left: f64,
    pub hip_right: f64,
    pub knee_left: f64,
    pub knee_right: f64,
}

/// Hip and knee reference for one oscillator phase.
pub fn leg_reference(phase: f64, params: &CpgParams) -> (f64, f64) {
    let hip = hip_angle(
        hip_phase(phase, params.hip_duty_factor, params.hip_swing_steady),
        params,
    );
    let knee = knee_angle(knee_phase(phase, params.knee_duty_factor), params);
    (hip, knee)
}

/// Node 0 drives the left leg, node 1 the right leg.
pub fn reference_at(state: &OscillatorState, params: &CpgParams) -> JointReference {
    let (hip_left, knee_left) = leg_reference(state.phases[0], params);
    let right = state.phases.get(1).copied().unwrap_or(state.phases[0]);
    let (hip_right, knee_right) = leg_reference(right, params);
    JointReference {
        hip_left,
        hip_right,
        knee_left,
        knee_right,
    }
}

/// One row of a trajectory dump.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    pub phase: [f64; 2],
    pub hip_warp: [f64; 2],
    pub knee_warp: [f64; 2],
    pub reference: JointReference,
}

pub const TRAJECTORY_COLUMNS: [&str; 11] = [
    "time_s",
    "phase_left_rad",
    "phase_right_rad",
    "hip_warp_left_rad",
    "hip_warp_right_rad",
    "knee_warp_left_rad",
    "knee_warp_right_rad",
    "hip_left_deg",
    "hip_right_deg",
    "knee_left_deg",
    "knee_right_deg",
];

/// Integrate the two-leg network from anti-phase and sample the commands
/// every `dt` up to `duration` (inclusive of t = 0, exclusive of the end).
pub fn trajectory(params: &CpgParams, duration: f64, dt: f64) -> Result<Vec<TrajectorySample>> {
    let issues = params.check();
    if let Some((f, r)) = issues.first() {
        return Err(Error::invalid(format!("{f}: {r}")));
    }
    if params.nodes() != 2 {
        return Err(Error::invalid("trajectory dump needs the two-leg network"));
    }
    if !(duration > 0.0) {
        return Err(Error::invalid("duration must be positive"));
    }
    let steps = (duration / dt).round() as usize;
    let mut state = OscillatorState::anti_phase();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let p = [state.phases[0], state.phases[1]];
        let hw = p.map(|x| hip_phase(x, params.hip_duty_factor, params.hip_swing_steady));
        let kw = p.map(|x| knee_phase(x, params.knee_duty_factor));
        out.push(TrajectorySample {
            time: state.time,
            phase: p,
            hip_warp: hw,
            knee_warp: kw,
            reference: reference_at(&state, params),
        });
        state = step_phase(&state, params, dt)?;
    }
    Ok(out)
}
