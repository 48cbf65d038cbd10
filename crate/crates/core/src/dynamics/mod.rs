//! Planar multibody simulation of the biped.
//!
//! Generalized coordinates are the trunk position (x forward, z up) and, per
//! leg, the relative hip, knee, ankle and toe angles. The trunk never rotates:
//! pitch is not a coordinate at all, so the boom constraint holds exactly.

mod contact;
mod kinematics;
mod motor;
mod plant;
mod trial;

pub use contact::{contact_force, ContactParams, ContactPoint, ContactState};
pub use kinematics::{BodyModel, LegFrame, PointKinematics};
pub use motor::{motor_torque, pd_current, Joint, PdGains};
pub use plant::{step, Energy, MotorTorques, Plant, StepDiagnostics, WorkLedger};
pub use trial::{run_trial, ControlRecord, Simulator, TrialOutcome};

use serde::{Deserialize, Serialize};

/// Number of generalized coordinates.
pub const DOF: usize = 10;
pub const X: usize = 0;
pub const Z: usize = 1;
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
pub const HIP: usize = 0;
pub const KNEE: usize = 1;
pub const ANKLE: usize = 2;
pub const TOE: usize = 3;

/// Index of a leg joint in the coordinate vector.
pub const fn joint_index(leg: usize, joint: usize) -> usize {
    2 + 4 * leg + joint
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    SemiImplicitEuler,
    Rk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    /// Control and logging period, s.
    pub timestep: f64,
    /// Physics sub-steps per control period.
    pub substeps: u32,
    pub integrator: Integrator,
    pub gravity: f64,
    /// N/m
    pub contact_stiffness: f64,
    /// N·s/m
    pub contact_damping: f64,
    /// N/m, stick spring of the friction model
    pub tangential_stiffness: f64,
    /// N·s/m
    pub tangential_damping: f64,
    pub friction_coefficient: f64,
    /// N·m/A
    pub torque_constant: f64,
    /// N·m
    pub torque_limit: f64,
    pub kp_hip: f64,
    pub kd_hip: f64,
    pub kp_knee: f64,
    pub kd_knee: f64,
    /// N·m/rad
    pub joint_limit_stiffness: f64,
    /// N·m·s/rad
    pub joint_limit_damping: f64,
    /// Reflected rotor inertia per joint kind (hip, knee, ankle, toe), kg·m².
    pub armature: [f64; 4],
    /// Viscous friction of the passive ankle and toe joints, N·m·s/rad.
    pub passive_damping: f64,
    /// W
    pub standby_power: f64,
    /// Ω, winding resistance for copper losses; zero disables the term.
    pub winding_resistance: f64,
    /// s
    pub duration: f64,
    /// Initial interval excluded from the steady-state window, s.
    pub settle_time: f64,
    /// Trunk height below which the trial counts as a fall, m.
    pub fall_height: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            timestep: 1e-3,
            substeps: 4,
            integrator: Integrator::SemiImplicitEuler,
            gravity: 9.81,
            contact_stiffness: 2.0e4,
            contact_damping: 200.0,
            tangential_stiffness: 2.0e4,
            tangential_damping: 40.0,
            friction_coefficient: 1.0,
            torque_constant: 0.1,
            torque_limit: 8.0,
            kp_hip: 30.0,
            kd_hip: 0.2,
            kp_knee: 15.0,
            kd_knee: 0.2,
            joint_limit_stiffness: 20.0,
            joint_limit_damping: 0.02,
            armature: [3.6e-4, 3.6e-4, 0.0, 2.0e-5],
            passive_damping: 0.05,
            standby_power: 9.0,
            winding_resistance: 0.0,
            duration: 120.0,
            settle_time: 20.0,
            fall_height: 0.2,
        }
    }
}

impl SimSettings {
    pub fn gains(&self) -> PdGains {
        PdGains {
            kp_hip: self.kp_hip,
            kd_hip: self.kd_hip,
            kp_knee: self.kp_knee,
            kd_knee: self.kd_knee,
        }
    }

    pub fn physics_dt(&self) -> f64 {
        self.timestep / self.substeps as f64
    }

    pub fn contact_params(&self) -> ContactParams {
        ContactParams {
            normal_stiffness: self.contact_stiffness,
            normal_damping: self.contact_damping,
            tangential_stiffness: self.tangential_stiffness,
            tangential_damping: self.tangential_damping,
            friction: self.friction_coefficient,
        }
    }

    pub fn check(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |f: &str, r: String| out.push((f.to_string(), r));
        if !(self.timestep.is_finite() && self.timestep > 0.0) {
            push("timestep", format!("timestep > 0 (got {})", self.timestep));
        }
        if self.substeps == 0 {
            push("substeps", "substeps ≥ 1".into());
        }
        for (f, v) in [
            ("gravity", self.gravity),
            ("contact_stiffness", self.contact_stiffness),
            ("contact_damping", self.contact_damping),
            ("tangential_stiffness", self.tangential_stiffness),
            ("tangential_damping", self.tangential_damping),
            ("friction_coefficient", self.friction_coefficient),
            ("torque_constant", self.torque_constant),
            ("torque_limit", self.torque_limit),
            ("kp_hip", self.kp_hip),
            ("kd_hip", self.kd_hip),
            ("kp_knee", self.kp_knee),
            ("kd_knee", self.kd_knee),
            ("joint_limit_stiffness", self.joint_limit_stiffness),
            ("joint_limit_damping", self.joint_limit_damping),
            ("passive_damping", self.passive_damping),
            ("standby_power", self.standby_power),
            ("winding_resistance", self.winding_resistance),
            ("settle_time", self.settle_time),
            ("fall_height", self.fall_height),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                push(f, format!("{f} ≥ 0 (got {v})"));
            }
        }
        if self.armature.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            push("armature", "armature ≥ 0".into());
        }
        // a settle time beyond the duration is allowed: the log then simply
        // has no steady-state rows
        if !(self.duration.is_finite() && self.duration > 0.0) {
            push("duration", format!("duration > 0 (got {})", self.duration));
        }
        out
    }
}

/// Full mechanical state of the robot.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub q: [f64; DOF],
    pub qd: [f64; DOF],
    /// Indexed `[leg][point]` with points heel, metatarsal, toe tip.
    pub contacts: [[ContactState; 3]; 2],
    pub time: f64,
    pub work: WorkLedger,
}

impl SimState {
    pub fn at_rest(q: [f64; DOF]) -> Self {
        Self {
            q,
            qd: [0.0; DOF],
            contacts: [[ContactState::Airborne; 3]; 2],
            time: 0.0,
            work: WorkLedger::default(),
        }
    }

    pub fn joint(&self, leg: usize, joint: usize) -> f64 {
        self.q[joint_index(leg, joint)]
    }

    pub fn joint_rate(&self, leg: usize, joint: usize) -> f64 {
        self.qd[joint_index(leg, joint)]
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qd.iter()).all(|v| v.is_finite())
    }
}
