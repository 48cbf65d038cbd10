//! Closed-loop trial: oscillator → PD current → plant, one log row per
//! control period.

use super::motor::{motor_torque, pd_current, Joint};
use super::plant::{MotorTorques, Plant, StepDiagnostics};
use super::{joint_index, SimState, ANKLE, DOF, HIP, KNEE, TOE, Z};
use crate::config::ConfigBundle;
use crate::cpg::{reference_at, step_phase, JointReference, OscillatorState};
use crate::error::{Error, Result};
use crate::log::{TrialLog, TrialMeta};
use crate::tendons::TendonNetwork;

/// Everything observed during one control period. Values are taken at the
/// start of the period; commands are held over it.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlRecord {
    pub time: f64,
    pub phases: [f64; 2],
    pub q: [f64; DOF],
    pub qd: [f64; DOF],
    /// `[leg][hip, knee]`, deg
    pub reference: [[f64; 2]; 2],
    /// `[leg][hip, knee]`, A
    pub current: [[f64; 2]; 2],
    /// `[leg][hip, knee]`, N·m
    pub torque: MotorTorques,
    pub diagnostics: StepDiagnostics,
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub log: TrialLog,
    pub fallen: bool,
    /// Numerical fault that ended the trial, if any.
    pub fault: Option<String>,
}

impl TrialOutcome {
    /// Convert a fall or fault into an error.
    pub fn into_result(self) -> Result<TrialLog> {
        if let Some(message) = self.fault {
            return Err(Error::SimulationFault {
                time: self.log.end_time(),
                message,
            });
        }
        if self.fallen {
            return Err(Error::SimulationFault {
                time: self.log.meta.fall_time.unwrap_or(f64::NAN),
                message: "robot fell (trunk below fall height)".into(),
            });
        }
        Ok(self.log)
    }
}

fn as_pairs(r: &JointReference) -> [[f64; 2]; 2] {
    [[r.hip_left, r.knee_left], [r.hip_right, r.knee_right]]
}

/// Stepwise closed-loop simulator.
#[derive(Clone, Debug)]
pub struct Simulator {
    bundle: ConfigBundle,
    plant: Plant,
    oscillator: OscillatorState,
    state: SimState,
    previous_reference: Option<[[f64; 2]; 2]>,
    steps: u64,
}

impl Simulator {
    pub fn new(bundle: &ConfigBundle) -> Result<Self> {
        bundle.validate().into_result()?;
        let network = TendonNetwork::new(bundle.tendons.clone(), bundle.model.pulley_radii);
        let plant = Plant::new(&bundle.model, network, bundle.settings.clone());
        let oscillator = OscillatorState::anti_phase();
        let state = standing_state(&plant, bundle, &oscillator);
        Ok(Self {
            bundle: bundle.clone(),
            plant,
            oscillator,
            state,
            previous_reference: None,
            steps: 0,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn oscillator(&self) -> &OscillatorState {
        &self.oscillator
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn bundle(&self) -> &ConfigBundle {
        &self.bundle
    }

    pub fn has_fallen(&self) -> bool {
        self.state.q[Z] < self.bundle.settings.fall_height
    }

    /// Run one control period and return what was applied during it.
    pub fn step(&mut self) -> Result<ControlRecord> {
        let s = &self.bundle.settings;
        let dt = s.timestep;
        let gains = s.gains();
        let reference = as_pairs(&reference_at(&self.oscillator, &self.bundle.cpg));
        let previous = self.previous_reference.unwrap_or(reference);

        let mut current = [[0.0; 2]; 2];
        let mut torque = [[0.0; 2]; 2];
        for leg in 0..2 {
            for (slot, (joint, kind)) in [(HIP, Joint::Hip), (KNEE, Joint::Knee)]
                .into_iter()
                .enumerate()
            {
                let i = joint_index(leg, joint);
                let reference_rate = (reference[leg][slot] - previous[leg][slot]) / dt;
                let amps = pd_current(
                    reference[leg][slot],
                    self.state.q[i].to_degrees(),
                    reference_rate,
                    self.state.qd[i].to_degrees(),
                    kind,
                    &gains,
                );
                current[leg][slot] = amps;
                torque[leg][slot] = motor_torque(amps, s.torque_constant, s.torque_limit);
            }
        }

        // derive time from the step count so the log sits exactly on the grid
        let record_time = self.steps as f64 * dt;
        let q = self.state.q;
        let qd = self.state.qd;
        let phases = [self.oscillator.phases[0], self.oscillator.phases[1]];

        let diagnostics = self.plant.advance(&mut self.state, &torque)?;
        self.steps += 1;
        self.state.time = self.steps as f64 * dt;
        self.oscillator =
            step_phase(&self.oscillator, &self.bundle.cpg, dt).map_err(|e| match e {
                Error::SimulationFault { message, .. } => Error::SimulationFault {
                    time: record_time,
                    message,
                },
                other => other,
            })?;
        self.previous_reference = Some(reference);

        Ok(ControlRecord {
            time: record_time,
            phases,
            q,
            qd,
            reference,
            current,
            torque,
            diagnostics,
        })
    }
}

/// Initial pose: hips and knees at the oscillator's reference, feet as flat
/// as the ankle range allows, toes at the toe-spring rest angle, lowest
/// contact point touching the ground.
fn standing_state(plant: &Plant, bundle: &ConfigBundle, oscillator: &OscillatorState) -> SimState {
    let reference = as_pairs(&reference_at(oscillator, &bundle.cpg));
    let limits = plant.joint_limits();
    let mut q = [0.0; DOF];
    for leg in 0..2 {
        let hip = reference[leg][0].to_radians();
        let knee = reference[leg][1].to_radians();
        let (lo, hi) = limits[ANKLE];
        q[joint_index(leg, HIP)] = hip;
        q[joint_index(leg, KNEE)] = knee;
        q[joint_index(leg, ANKLE)] = (knee - hip).clamp(lo, hi);
        q[joint_index(leg, TOE)] = bundle.tendons.toe_rest_angle.to_radians();
    }
    q[Z] = plant.ground_height(&q);
    SimState::at_rest(q)
}

/// Simulate the configured trial duration. A fall or numerical fault stops
/// the trial early; the rows logged so far are kept and the outcome records
/// why it ended.
pub fn run_trial(bundle: &ConfigBundle) -> Result<TrialOutcome> {
    let mut sim = Simulator::new(bundle)?;
    let settings = &bundle.settings;
    let steps = (settings.duration / settings.timestep).round() as usize;
    let mut log = TrialLog::for_trial(steps, settings.settle_time);
    let mut fallen = false;
    let mut fault = None;
    let mut fall_time = None;

    for _ in 0..steps {
        match sim.step() {
            Ok(record) => log.push_record(&record),
            Err(Error::SimulationFault { time, message }) => {
                fault = Some(format!("t = {time:.4} s: {message}"));
                break;
            }
            Err(other) => return Err(other),
        }
        if sim.has_fallen() {
            fallen = true;
            fall_time = Some(sim.state().time);
            break;
        }
    }

    let completed = !fallen && fault.is_none();
    log.finish(TrialMeta::new(bundle, completed, fall_time, fault.clone()));
    Ok(TrialOutcome { log, fallen, fault })
}
