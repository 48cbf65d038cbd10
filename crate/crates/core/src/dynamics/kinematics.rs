//! Leg kinematics, point Jacobians and the joint-space mass matrix.
//!
//! Absolute segment angles are measured counter-clockwise with x forward and
//! z up; a segment at angle 0 hangs straight down (thigh, shank) or lies flat
//! pointing forward (foot, toe). With hip flexion, knee flexion, ankle
//! dorsiflexion and toe extension all positive:
//!
//! thigh = hip, shank = hip − knee, foot = shank + ankle, toe = foot + toe.

use nalgebra::{SMatrix, SVector, Vector2};

use super::{joint_index, DOF};
use crate::morphology::RobotModel;

pub type Vec2 = Vector2<f64>;
pub type MassMatrix = SMatrix<f64, DOF, DOF>;
pub type GenVector = SVector<f64, DOF>;

/// Sensitivity of each absolute segment angle to the leg's relative joints.
const CHAIN: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, -1.0, 0.0, 0.0],
    [1.0, -1.0, 1.0, 0.0],
    [1.0, -1.0, 1.0, 1.0],
];

fn rotate(angle: f64, v: Vec2) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Rigid body of a leg chain: a mass at `com` in the frame of chain level
/// `level`.
#[derive(Clone, Copy, Debug)]
struct LegBody {
    level: usize,
    com: Vec2,
    mass: f64,
    inertia: f64,
}

/// Constant geometry and inertia of the robot in the form the integrator
/// needs.
#[derive(Clone, Debug)]
pub struct BodyModel {
    /// Link vectors from each joint to the next, local frames.
    links: [Vec2; 4],
    bodies: [LegBody; 4],
    /// Heel, metatarsal and toe-tip contact points as (level, local offset).
    contact_points: [(usize, Vec2); 3],
    trunk_mass: f64,
    trunk_com_height: f64,
    total_mass: f64,
    armature: [f64; 4],
}

/// Position and velocity of a point together with its Jacobian with respect
/// to the leg's four joints (the trunk columns are the identity).
#[derive(Clone, Copy, Debug)]
pub struct PointKinematics {
    pub pos: Vec2,
    pub vel: Vec2,
    pub jac: [Vec2; 4],
    /// Acceleration of the point when all generalized accelerations vanish.
    pub bias: Vec2,
}

/// Evaluated chain of one leg.
#[derive(Clone, Copy, Debug)]
pub struct LegFrame {
    pub hip: Vec2,
    pub hip_vel: Vec2,
    pub angles: [f64; 4],
    pub rates: [f64; 4],
}

impl BodyModel {
    pub fn new(model: &RobotModel, armature: [f64; 4]) -> Self {
        let h = model.foot_height;
        let foot_span = model.heel_offset + model.heel_length;
        let c = &model.com_fractions;
        let m = &model.segment_masses;
        let heel_mass = model.heel_mass();
        let toe_mass = model.toe_mass();
        let rod = |mass: f64, len: f64| mass * len * len / 12.0;
        Self {
            links: [
                Vec2::new(0.0, -model.thigh_length),
                Vec2::new(0.0, -model.shank_length),
                Vec2::new(model.heel_length, -h),
                Vec2::new(model.toe_length, 0.0),
            ],
            bodies: [
                LegBody {
                    level: 0,
                    com: Vec2::new(0.0, -c.thigh * model.thigh_length),
                    mass: m.thigh,
                    inertia: rod(m.thigh, model.thigh_length),
                },
                LegBody {
                    level: 1,
                    com: Vec2::new(0.0, -c.shank * model.shank_length),
                    mass: m.shank,
                    inertia: rod(m.shank, model.shank_length),
                },
                LegBody {
                    level: 2,
                    com: Vec2::new(-model.heel_offset + c.foot * foot_span, -0.5 * h),
                    mass: heel_mass,
                    inertia: heel_mass * (foot_span * foot_span + h * h) / 12.0,
                },
                LegBody {
                    level: 3,
                    com: Vec2::new(c.toe * model.toe_length, 0.0),
                    mass: toe_mass,
                    inertia: rod(toe_mass, model.toe_length),
                },
            ],
            contact_points: [
                (2, Vec2::new(-model.heel_offset, -h)),
                (2, Vec2::new(model.heel_length, -h)),
                (3, Vec2::new(model.toe_length, 0.0)),
            ],
            trunk_mass: m.trunk,
            trunk_com_height: 0.5 * model.trunk_length,
            total_mass: m.total(),
            armature,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn leg_frame(&self, q: &[f64; DOF], qd: &[f64; DOF], leg: usize) -> LegFrame {
        let j = |k| q[joint_index(leg, k)];
        let jd = |k| qd[joint_index(leg, k)];
        let mut angles = [0.0; 4];
        let mut rates = [0.0; 4];
        for (level, row) in CHAIN.iter().enumerate() {
            angles[level] = (0..4).map(|k| row[k] * j(k)).sum();
            rates[level] = (0..4).map(|k| row[k] * jd(k)).sum();
        }
        LegFrame {
            hip: Vec2::new(q[0], q[1]),
            hip_vel: Vec2::new(qd[0], qd[1]),
            angles,
            rates,
        }
    }

    /// Kinematics of the point at `local` in the frame of chain `level`.
    pub fn point(&self, frame: &LegFrame, level: usize, local: Vec2) -> PointKinematics {
        let mut pos = frame.hip;
        let mut vel = frame.hip_vel;
        let mut jac = [Vec2::zeros(); 4];
        let mut bias = Vec2::zeros();
        #[allow(clippy::needless_range_loop)]
        for lvl in 0..=level {
            let v = if lvl < level { self.links[lvl] } else { local };
            let w = rotate(frame.angles[lvl], v);
            let wp = perp(w);
            pos += w;
            vel += frame.rates[lvl] * wp;
            bias -= frame.rates[lvl] * frame.rates[lvl] * w;
            for (k, col) in jac.iter_mut().enumerate() {
                *col += CHAIN[lvl][k] * wp;
            }
        }
        PointKinematics {
            pos,
            vel,
            jac,
            bias,
        }
    }

    /// Heel, metatarsal and toe-tip kinematics.
    pub fn contact_points(&self, frame: &LegFrame) -> [PointKinematics; 3] {
        self.contact_points
            .map(|(level, local)| self.point(frame, level, local))
    }

    /// Joint positions hip, knee, ankle, metatarsal and toe tip.
    pub fn skeleton(&self, frame: &LegFrame) -> [Vec2; 5] {
        let mut out = [frame.hip; 5];
        for level in 0..4 {
            out[level + 1] = out[level] + rotate(frame.angles[level], self.links[level]);
        }
        out
    }

    /// Mass matrix, velocity-product terms and gravity load.
    ///
    /// Returns `(M, bias, gravity)` such that `M q̈ + bias = gravity + Q_other`.
    pub fn dynamics_terms(
        &self,
        q: &[f64; DOF],
        qd: &[f64; DOF],
        g: f64,
    ) -> (MassMatrix, GenVector, GenVector) {
        let mut mass = MassMatrix::zeros();
        let mut bias = GenVector::zeros();
        let mut grav = GenVector::zeros();

        mass[(0, 0)] = self.total_mass;
        mass[(1, 1)] = self.total_mass;
        grav[1] = -self.trunk_mass * g;

        for leg in 0..2 {
            let frame = self.leg_frame(q, qd, leg);
            let base = joint_index(leg, 0);
            for body in &self.bodies {
                let p = self.point(&frame, body.level, body.com);
                let m = body.mass;
                for a in 0..4 {
                    // trunk-leg coupling
                    mass[(0, base + a)] += m * p.jac[a].x;
                    mass[(1, base + a)] += m * p.jac[a].y;
                    for b in a..4 {
                        let mut v = m * p.jac[a].dot(&p.jac[b]);
                        v += body.inertia * CHAIN[body.level][a] * CHAIN[body.level][b];
                        mass[(base + a, base + b)] += v;
                    }
                    bias[base + a] += m * p.jac[a].dot(&p.bias);
                    grav[base + a] -= m * g * p.jac[a].y;
                }
                bias[0] += m * p.bias.x;
                bias[1] += m * p.bias.y;
                grav[1] -= m * g;
            }
            for a in 0..4 {
                mass[(base + a, base + a)] += self.armature[a];
                for b in a + 1..4 {
                    mass[(base + b, base + a)] = mass[(base + a, base + b)];
                }
                mass[(base + a, 0)] = mass[(0, base + a)];
                mass[(base + a, 1)] = mass[(1, base + a)];
            }
        }
        (mass, bias, grav)
    }

    pub fn kinetic_energy(&self, q: &[f64; DOF], qd: &[f64; DOF]) -> f64 {
        let (m, _, _) = self.dynamics_terms(q, qd, 0.0);
        let v = GenVector::from_row_slice(qd);
        0.5 * v.dot(&(m * v))
    }

    pub fn potential_energy(&self, q: &[f64; DOF], g: f64) -> f64 {
        let qd = [0.0; DOF];
        let mut e = self.trunk_mass * g * (q[1] + self.trunk_com_height);
        for leg in 0..2 {
            let frame = self.leg_frame(q, &qd, leg);
            for body in &self.bodies {
                e += body.mass * g * self.point(&frame, body.level, body.com).pos.y;
            }
        }
        e
    }

    /// Whole-body centre of mass.
    pub fn center_of_mass(&self, q: &[f64; DOF]) -> Vec2 {
        let qd = [0.0; DOF];
        let mut acc = self.trunk_mass * Vec2::new(q[0], q[1] + self.trunk_com_height);
        for leg in 0..2 {
            let frame = self.leg_frame(q, &qd, leg);
            for body in &self.bodies {
                acc += body.mass * self.point(&frame, body.level, body.com).pos;
            }
        }
        acc / self.total_mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn body() -> BodyModel {
        BodyModel::new(&RobotModel::with_total_mass(2.22).unwrap(), [0.0; 4])
    }

    fn sample_q() -> [f64; DOF] {
        [0.1, 0.3, 0.4, 0.3, -0.1, 0.35, -0.2, 0.05, 0.2, 0.3]
    }

    #[test]
    fn straight_leg_geometry() {
        let b = body();
        let q = [0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let f = b.leg_frame(&q, &[0.0; DOF], 0);
        let s = b.skeleton(&f);
        assert_relative_eq!(s[1].y, 0.5 - 0.16, epsilon = 1e-12);
        assert_relative_eq!(s[2].y, 0.5 - 0.32, epsilon = 1e-12);
        assert_relative_eq!(s[3].x, 0.048, epsilon = 1e-12);
        assert_relative_eq!(s[4].x, 0.072, epsilon = 1e-12);
    }

    #[test]
    fn dorsiflexion_lifts_the_toes() {
        let b = body();
        let mut q = [0.0; DOF];
        q[1] = 0.5;
        q[joint_index(0, 2)] = 0.2;
        let f = b.leg_frame(&q, &[0.0; DOF], 0);
        let meta = b.skeleton(&f)[3];
        assert!(meta.y > 0.5 - 0.32 - b.links[2].y.abs());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let b = body();
        let q = sample_q();
        let h = 1e-7;
        for leg in 0..2 {
            for &(level, local) in &b.contact_points {
                let f = b.leg_frame(&q, &[0.0; DOF], leg);
                let p = b.point(&f, level, local);
                for k in 0..4 {
                    let mut qp = q;
                    let mut qm = q;
                    qp[joint_index(leg, k)] += h;
                    qm[joint_index(leg, k)] -= h;
                    let pp = b
                        .point(&b.leg_frame(&qp, &[0.0; DOF], leg), level, local)
                        .pos;
                    let pm = b
                        .point(&b.leg_frame(&qm, &[0.0; DOF], leg), level, local)
                        .pos;
                    let fd = (pp - pm) / (2.0 * h);
                    assert_relative_eq!(fd, p.jac[k], epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn bias_acceleration_matches_second_difference() {
        // p(t) with constant q̇: p̈ = bias
        let b = body();
        let q = sample_q();
        let qd = [0.0, 0.0, 1.5, -2.0, 3.0, 4.0, 0.7, 0.1, -1.0, 2.0];
        let h = 1e-4;
        let at = |t: f64| {
            let mut qt = q;
            for i in 0..DOF {
                qt[i] += qd[i] * t;
            }
            let f = b.leg_frame(&qt, &qd, 0);
            b.point(&f, 3, Vec2::new(0.024, 0.0))
        };
        let acc = (at(h).pos - 2.0 * at(0.0).pos + at(-h).pos) / (h * h);
        assert_relative_eq!(acc, at(0.0).bias, epsilon = 1e-5);
    }

    #[test]
    fn mass_matrix_is_symmetric_positive_definite() {
        let b = body();
        let (m, _, _) = b.dynamics_terms(&sample_q(), &[0.0; DOF], 9.81);
        assert_relative_eq!(m, m.transpose(), epsilon = 1e-14);
        assert!(m.cholesky().is_some());
        assert_relative_eq!(m[(0, 0)], 2.22, epsilon = 1e-12);
    }

    #[test]
    fn kinetic_energy_of_pure_translation() {
        let b = body();
        let mut qd = [0.0; DOF];
        qd[0] = 0.5;
        qd[1] = -0.2;
        let ke = b.kinetic_energy(&sample_q(), &qd);
        assert_relative_eq!(ke, 0.5 * 2.22 * (0.25 + 0.04), epsilon = 1e-12);
    }

    #[test]
    fn gravity_is_negative_potential_gradient() {
        let b = body();
        let q = sample_q();
        let (_, _, grav) = b.dynamics_terms(&q, &[0.0; DOF], 9.81);
        let h = 1e-6;
        for i in 0..DOF {
            let mut qp = q;
            let mut qm = q;
            qp[i] += h;
            qm[i] -= h;
            let d = (b.potential_energy(&qp, 9.81) - b.potential_energy(&qm, 9.81)) / (2.0 * h);
            assert_relative_eq!(grav[i], -d, epsilon = 1e-6);
        }
    }
}
