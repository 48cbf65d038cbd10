use super::contact::{contact_force, ContactParams, ContactState};
use super::kinematics::{BodyModel, GenVector, Vec2};
use super::{joint_index, Integrator, SimSettings, SimState, ANKLE, DOF, HIP, KNEE, TOE};
use crate::error::{Error, Result};
use crate::morphology::{AngleRange, RobotModel};
use crate::tendons::{JointPose, TendonForces, TendonNetwork};

/// Any coordinate beyond this magnitude (m or rad) is treated as a blow-up.
const POSITION_BOUND: f64 = 1.0e3;
/// rad/s or m/s
const VELOCITY_BOUND: f64 = 1.0e4;

/// Applied motor torque per leg, `[hip, knee]`.
pub type MotorTorques = [[f64; 2]; 2];

/// Work done on the robot by each non-conservative source since t = 0, J.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WorkLedger {
    pub motor: f64,
    pub contact: f64,
    /// Joint stops and passive joint friction.
    pub joint_limit: f64,
    /// Σ |motor power| dt, used to scale audit residuals.
    pub motor_throughput: f64,
}

impl WorkLedger {
    pub fn total(&self) -> f64 {
        self.motor + self.contact + self.joint_limit
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
    pub spring: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential + self.spring
    }
}

/// Loads evaluated during a step, for logging.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepDiagnostics {
    /// `[leg][heel, metatarsal, toe]`, N
    pub contact_forces: [[Vec2; 3]; 2],
    pub tendons: [TendonForces; 2],
    pub limit_torques: [[f64; 4]; 2],
}

struct ForceEval {
    motor: GenVector,
    contact: GenVector,
    limit: GenVector,
    tendon: GenVector,
    contacts: [[ContactState; 3]; 2],
    diag: StepDiagnostics,
}

/// Rigid-body model plus everything that produces forces on it.
#[derive(Clone, Debug)]
pub struct Plant {
    pub body: BodyModel,
    pub tendons: TendonNetwork,
    pub settings: SimSettings,
    contact: ContactParams,
    limits: [(f64, f64); 4],
    /// Coordinates held fixed (zero velocity and acceleration).
    pub locked: [bool; DOF],
}

fn radians(range: AngleRange) -> (f64, f64) {
    (range.min.to_radians(), range.max.to_radians())
}

impl Plant {
    pub fn new(model: &RobotModel, tendons: TendonNetwork, settings: SimSettings) -> Self {
        let l = &model.joint_limits;
        Self {
            body: BodyModel::new(model, settings.armature),
            tendons,
            contact: settings.contact_params(),
            limits: [
                radians(l.hip),
                radians(l.knee),
                radians(l.ankle),
                radians(l.toe),
            ],
            settings,
            locked: [false; DOF],
        }
    }

    pub fn joint_limits(&self) -> [(f64, f64); 4] {
        self.limits
    }

    pub fn pose(state_q: &[f64; DOF], state_qd: &[f64; DOF], leg: usize) -> JointPose {
        JointPose {
            alpha_a: state_q[joint_index(leg, ANKLE)],
            alpha_k: state_q[joint_index(leg, KNEE)],
            theta_toe: state_q[joint_index(leg, TOE)].to_degrees(),
            omega_a: state_qd[joint_index(leg, ANKLE)],
        }
    }

    pub fn energy(&self, state: &SimState) -> Energy {
        let g = self.settings.gravity;
        let spring = (0..2)
            .map(|leg| {
                self.tendons
                    .stored_energy(&Self::pose(&state.q, &state.qd, leg))
                    .total()
            })
            .sum();
        Energy {
            kinetic: self.body.kinetic_energy(&state.q, &state.qd),
            potential: self.body.potential_energy(&state.q, g),
            spring,
        }
    }

    fn limit_torque(&self, joint: usize, angle: f64, rate: f64) -> f64 {
        let (lo, hi) = self.limits[joint];
        let k = self.settings.joint_limit_stiffness;
        let c = self.settings.joint_limit_damping;
        let mut tau = if angle > hi {
            (-k * (angle - hi) - c * rate).min(0.0)
        } else if angle < lo {
            (k * (lo - angle) - c * rate).max(0.0)
        } else {
            0.0
        };
        if joint == ANKLE || joint == TOE {
            tau -= self.settings.passive_damping * rate;
        }
        tau
    }

    fn forces(
        &self,
        q: &[f64; DOF],
        qd: &[f64; DOF],
        contacts: &[[ContactState; 3]; 2],
        torques: &MotorTorques,
    ) -> ForceEval {
        let mut eval = ForceEval {
            motor: GenVector::zeros(),
            contact: GenVector::zeros(),
            limit: GenVector::zeros(),
            tendon: GenVector::zeros(),
            contacts: *contacts,
            diag: StepDiagnostics::default(),
        };
        for leg in 0..2 {
            eval.motor[joint_index(leg, HIP)] = torques[leg][0];
            eval.motor[joint_index(leg, KNEE)] = torques[leg][1];

            let tf = self.tendons.forces(&Self::pose(q, qd, leg));
            eval.tendon[joint_index(leg, ANKLE)] = tf.ankle();
            eval.tendon[joint_index(leg, KNEE)] = tf.knee();
            eval.tendon[joint_index(leg, TOE)] = tf.toe();
            eval.diag.tendons[leg] = tf;

            for j in 0..4 {
                let i = joint_index(leg, j);
                let tau = self.limit_torque(j, q[i], qd[i]);
                eval.limit[i] = tau;
                eval.diag.limit_torques[leg][j] = tau;
            }

            let frame = self.body.leg_frame(q, qd, leg);
            let points = self.body.contact_points(&frame);
            for (p, point) in points.iter().enumerate() {
                let (f, next) =
                    contact_force(point.pos, point.vel, contacts[leg][p], &self.contact);
                eval.contacts[leg][p] = next;
                eval.diag.contact_forces[leg][p] = f;
                if f != Vec2::zeros() {
                    eval.contact[0] += f.x;
                    eval.contact[1] += f.y;
                    for k in 0..4 {
                        eval.contact[joint_index(leg, k)] += point.jac[k].dot(&f);
                    }
                }
            }
        }
        eval
    }

    fn accelerations(
        &self,
        q: &[f64; DOF],
        qd: &[f64; DOF],
        applied: &GenVector,
    ) -> Result<GenVector> {
        let (mut mass, bias, grav) = self.body.dynamics_terms(q, qd, self.settings.gravity);
        let mut rhs = grav + applied - bias;
        for i in 0..DOF {
            if self.locked[i] {
                for j in 0..DOF {
                    mass[(i, j)] = 0.0;
                    mass[(j, i)] = 0.0;
                }
                mass[(i, i)] = 1.0;
                rhs[i] = 0.0;
            }
        }
        let chol = mass.cholesky().ok_or_else(|| Error::SimulationFault {
            time: f64::NAN,
            message: "mass matrix lost positive definiteness".into(),
        })?;
        Ok(chol.solve(&rhs))
    }

    fn check_bounds(&self, state: &SimState) -> Result<()> {
        let bad = !state.is_finite()
            || state.q.iter().any(|v| v.abs() > POSITION_BOUND)
            || state.qd.iter().any(|v| v.abs() > VELOCITY_BOUND);
        if bad {
            return Err(Error::SimulationFault {
                time: state.time,
                message: format!(
                    "state left the numeric bound (|q| ≤ {POSITION_BOUND}, |q̇| ≤ {VELOCITY_BOUND})"
                ),
            });
        }
        Ok(())
    }

    fn semi_implicit(
        &self,
        state: &mut SimState,
        torques: &MotorTorques,
        h: f64,
    ) -> Result<StepDiagnostics> {
        let f = self.forces(&state.q, &state.qd, &state.contacts, torques);
        let applied = f.motor + f.contact + f.limit + f.tendon;
        let qdd = self
            .accelerations(&state.q, &state.qd, &applied)
            .map_err(|e| at(e, state.time))?;
        let before = GenVector::from_row_slice(&state.qd);
        for i in 0..DOF {
            if self.locked[i] {
                state.qd[i] = 0.0;
            } else {
                state.qd[i] += h * qdd[i];
            }
        }
        // M Δv = h F, so the kinetic energy change is F · h (v₀ + v₁)/2; the
        // ledger uses the same mean velocity
        let v = 0.5 * (before + GenVector::from_row_slice(&state.qd));
        let motor_power = f.motor.dot(&v);
        state.work.motor += h * motor_power;
        state.work.motor_throughput += h * f.motor.component_mul(&v).abs().sum();
        state.work.contact += h * f.contact.dot(&v);
        state.work.joint_limit += h * f.limit.dot(&v);
        for i in 0..DOF {
            state.q[i] += h * state.qd[i];
        }
        state.contacts = f.contacts;
        state.time += h;
        Ok(f.diag)
    }

    fn rk4(&self, state: &mut SimState, torques: &MotorTorques, h: f64) -> Result<StepDiagnostics> {
        let contacts = state.contacts;
        let deriv = |q: &[f64; DOF], qd: &[f64; DOF]| -> Result<(GenVector, ForceEval)> {
            let f = self.forces(q, qd, &contacts, torques);
            let applied = f.motor + f.contact + f.limit + f.tendon;
            let mut qdd = self.accelerations(q, qd, &applied)?;
            for i in 0..DOF {
                if self.locked[i] {
                    qdd[i] = 0.0;
                }
            }
            Ok((qdd, f))
        };
        let offset = |base: &[f64; DOF], d: &[f64; DOF], s: f64| {
            let mut out = *base;
            for i in 0..DOF {
                out[i] += s * d[i];
            }
            out
        };
        let powers = |f: &ForceEval, qd: &[f64; DOF]| {
            let v = GenVector::from_row_slice(qd);
            [
                f.motor.dot(&v),
                f.contact.dot(&v),
                f.limit.dot(&v),
                f.motor.component_mul(&v).abs().sum(),
            ]
        };

        let q0 = state.q;
        let v0 = state.qd;
        let (a1, f1) = deriv(&q0, &v0).map_err(|e| at(e, state.time))?;
        let a1: [f64; DOF] = a1.into();
        let q2 = offset(&q0, &v0, 0.5 * h);
        let v2 = offset(&v0, &a1, 0.5 * h);
        let (a2, f2) = deriv(&q2, &v2).map_err(|e| at(e, state.time))?;
        let a2: [f64; DOF] = a2.into();
        let q3 = offset(&q0, &v2, 0.5 * h);
        let v3 = offset(&v0, &a2, 0.5 * h);
        let (a3, f3) = deriv(&q3, &v3).map_err(|e| at(e, state.time))?;
        let a3: [f64; DOF] = a3.into();
        let q4 = offset(&q0, &v3, h);
        let v4 = offset(&v0, &a3, h);
        let (a4, f4) = deriv(&q4, &v4).map_err(|e| at(e, state.time))?;
        let a4: [f64; DOF] = a4.into();

        for i in 0..DOF {
            if self.locked[i] {
                state.qd[i] = 0.0;
                continue;
            }
            state.q[i] += h / 6.0 * (v0[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
            state.qd[i] += h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
        }
        let p: Vec<[f64; 4]> = vec![
            powers(&f1, &v0),
            powers(&f2, &v2),
            powers(&f3, &v3),
            powers(&f4, &v4),
        ];
        let simpson = |k: usize| h / 6.0 * (p[0][k] + 2.0 * p[1][k] + 2.0 * p[2][k] + p[3][k]);
        state.work.motor += simpson(0);
        state.work.contact += simpson(1);
        state.work.joint_limit += simpson(2);
        state.work.motor_throughput += simpson(3);

        // advance the friction anchors at the end point
        let end = self.forces(&state.q, &state.qd, &contacts, torques);
        state.contacts = end.contacts;
        state.time += h;
        Ok(f1.diag)
    }

    /// Advance by one physics step of length `h` with the motor torques held.
    pub fn substep(
        &self,
        state: &mut SimState,
        torques: &MotorTorques,
        h: f64,
    ) -> Result<StepDiagnostics> {
        let diag = match self.settings.integrator {
            Integrator::SemiImplicitEuler => self.semi_implicit(state, torques, h)?,
            Integrator::Rk4 => self.rk4(state, torques, h)?,
        };
        self.check_bounds(state)?;
        Ok(diag)
    }

    /// Advance by one control period (all configured sub-steps). Returns the
    /// loads seen at the start of the period.
    pub fn advance(&self, state: &mut SimState, torques: &MotorTorques) -> Result<StepDiagnostics> {
        let h = self.settings.physics_dt();
        let start_time = state.time;
        let mut first = None;
        for k in 0..self.settings.substeps {
            let d = self.substep(state, torques, h)?;
            if k == 0 {
                first = Some(d);
            }
        }
        // keep the clock on the control grid
        state.time = start_time + self.settings.timestep;
        Ok(first.unwrap_or_default())
    }

    /// Loads at the current state without stepping.
    pub fn diagnostics(&self, state: &SimState, torques: &MotorTorques) -> StepDiagnostics {
        self.forces(&state.q, &state.qd, &state.contacts, torques)
            .diag
    }

    /// Trunk height that puts the lowest contact point of `q` exactly on the
    /// ground.
    pub fn ground_height(&self, q: &[f64; DOF]) -> f64 {
        let mut probe = *q;
        probe[0] = 0.0;
        probe[1] = 0.0;
        let zero = [0.0; DOF];
        let lowest = (0..2)
            .flat_map(|leg| {
                let frame = self.body.leg_frame(&probe, &zero, leg);
                self.body.contact_points(&frame).map(|p| p.pos.y)
            })
            .fold(f64::INFINITY, f64::min);
        -lowest
    }
}

fn at(e: Error, time: f64) -> Error {
    match e {
        Error::SimulationFault { message, .. } => Error::SimulationFault { time, message },
        other => other,
    }
}

/// Advance `state` by one control period under fixed motor torques.
pub fn step(state: &SimState, torques: &MotorTorques, plant: &Plant) -> Result<SimState> {
    let mut next = state.clone();
    plant.advance(&mut next, torques)?;
    Ok(next)
}
