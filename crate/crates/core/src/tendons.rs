//! Passive spring-tendon network: monoarticular SOL, biarticular GAS, knee
//! VAS, the rotational toe spring and the swing-phase toe tendon.
//!
//! Every element is an ideal unilateral linear spring. Torques are generalized
//! forces on the relative joint coordinates (ankle dorsiflexion, knee flexion,
//! toe extension positive) and equal minus the gradient of the element's
//! stored energy.

use serde::{Deserialize, Serialize};

use crate::morphology::{PulleyRadii, TendonConfig};

/// Joint configuration seen by the tendons.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JointPose {
    /// rad, dorsiflexion positive
    pub alpha_a: f64,
    /// rad, flexion positive
    pub alpha_k: f64,
    /// deg, extension positive
    pub theta_toe: f64,
    /// rad/s
    pub omega_a: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ElementEnergy {
    pub sol: f64,
    pub gas: f64,
    pub vas: f64,
    pub toe_spring: f64,
    pub toe_tendon: f64,
}

impl ElementEnergy {
    pub fn total(&self) -> f64 {
        self.sol + self.gas + self.vas + self.toe_spring + self.toe_tendon
    }
}

/// Torques in N·m. Ankle, knee and toe torques act on the respective joint
/// coordinate; `tau_knee_toe_tendon` is the knee-side reaction of the toe
/// tendon.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TendonForces {
    pub tau_ankle_sol: f64,
    pub tau_ankle_gas: f64,
    pub tau_knee_gas: f64,
    pub tau_knee_vas: f64,
    pub tau_toe_spring: f64,
    pub tau_toe_tendon: f64,
    pub tau_knee_toe_tendon: f64,
    pub stored_energy: ElementEnergy,
}

impl TendonForces {
    pub fn ankle(&self) -> f64 {
        self.tau_ankle_sol + self.tau_ankle_gas
    }

    pub fn knee(&self) -> f64 {
        self.tau_knee_gas + self.tau_knee_vas + self.tau_knee_toe_tendon
    }

    pub fn toe(&self) -> f64 {
        self.tau_toe_spring + self.tau_toe_tendon
    }
}

/// Stiffnesses and rest angles together with the pulley radii they act on.
#[derive(Clone, Debug, PartialEq)]
pub struct TendonNetwork {
    pub config: TendonConfig,
    pub radii: PulleyRadii,
}

impl TendonNetwork {
    pub fn new(config: TendonConfig, radii: PulleyRadii) -> Self {
        Self { config, radii }
    }

    /// Elongation of the SOL spring in m, zero when slack.
    fn sol_stretch(&self, pose: &JointPose) -> f64 {
        let rest = self.config.sol_rest_angle.to_radians();
        if pose.alpha_a > rest {
            self.radii.sol_ankle * (pose.alpha_a - rest)
        } else {
            0.0
        }
    }

    /// Plantarflexing (negative) torque of SOL.
    pub fn sol_torque(&self, pose: &JointPose) -> f64 {
        -self.config.k_sol * self.radii.sol_ankle * self.sol_stretch(pose)
    }

    fn gas_stretch(&self, pose: &JointPose) -> f64 {
        let rest = self.config.gas_rest_excursion.to_radians();
        let x = self.radii.gas_ankle * (pose.alpha_a - rest) - self.radii.gas_knee * pose.alpha_k;
        x.max(0.0)
    }

    /// (ankle, knee) torques of GAS: plantarflexing at the ankle and flexing
    /// at the knee.
    pub fn gas_torques(&self, pose: &JointPose) -> (f64, f64) {
        let tension = self.config.k_gas * self.gas_stretch(pose);
        (
            -tension * self.radii.gas_ankle,
            tension * self.radii.gas_knee,
        )
    }

    fn vas_stretch(&self, alpha_k: f64) -> f64 {
        let rest = self.config.vas_rest_angle.to_radians();
        if alpha_k > rest {
            self.radii.vas_knee * (alpha_k - rest)
        } else {
            0.0
        }
    }

    /// Extending (negative) knee torque of VAS.
    pub fn vas_torque(&self, alpha_k: f64) -> f64 {
        -self.config.k_vas * self.radii.vas_knee * self.vas_stretch(alpha_k)
    }

    fn toe_spring_deflection(&self, theta_toe_deg: f64) -> f64 {
        (theta_toe_deg - self.config.toe_rest_angle)
            .max(0.0)
            .to_radians()
    }

    /// Torque resisting toe extension past the rest angle.
    pub fn toe_spring_torque(&self, theta_toe_deg: f64) -> f64 {
        -self.config.k_toe * self.toe_spring_deflection(theta_toe_deg)
    }

    fn toe_tendon_stretch(&self, alpha_k: f64, theta_toe_deg: f64) -> f64 {
        let engage = self.config.toe_tendon_engage_knee_angle.to_radians();
        if alpha_k <= engage {
            return 0.0;
        }
        let pulled = self.config.toe_tendon_knee_radius * (alpha_k - engage);
        let paid_out = self.config.toe_tendon_toe_radius
            * (theta_toe_deg - self.config.toe_rest_angle).to_radians();
        (pulled - paid_out).max(0.0)
    }

    /// (toe, knee) torques of the toe tendon. The toe torque extends the toe
    /// (lifts it); the knee reaction resists flexion.
    pub fn toe_tendon_torques(&self, alpha_k: f64, theta_toe_deg: f64) -> (f64, f64) {
        let tension = self.config.k_toe_tendon * self.toe_tendon_stretch(alpha_k, theta_toe_deg);
        (
            tension * self.config.toe_tendon_toe_radius,
            -tension * self.config.toe_tendon_knee_radius,
        )
    }

    pub fn toe_tendon_torque(&self, alpha_k: f64, theta_toe_deg: f64) -> f64 {
        self.toe_tendon_torques(alpha_k, theta_toe_deg).0
    }

    pub fn stored_energy(&self, pose: &JointPose) -> ElementEnergy {
        let half_kx2 = |k: f64, x: f64| 0.5 * k * x * x;
        ElementEnergy {
            sol: half_kx2(self.config.k_sol, self.sol_stretch(pose)),
            gas: half_kx2(self.config.k_gas, self.gas_stretch(pose)),
            vas: half_kx2(self.config.k_vas, self.vas_stretch(pose.alpha_k)),
            toe_spring: half_kx2(
                self.config.k_toe,
                self.toe_spring_deflection(pose.theta_toe),
            ),
            toe_tendon: half_kx2(
                self.config.k_toe_tendon,
                self.toe_tendon_stretch(pose.alpha_k, pose.theta_toe),
            ),
        }
    }

    pub fn forces(&self, pose: &JointPose) -> TendonForces {
        let (tau_ankle_gas, tau_knee_gas) = self.gas_torques(pose);
        let (tau_toe_tendon, tau_knee_toe_tendon) =
            self.toe_tendon_torques(pose.alpha_k, pose.theta_toe);
        TendonForces {
            tau_ankle_sol: self.sol_torque(pose),
            tau_ankle_gas,
            tau_knee_gas,
            tau_knee_vas: self.vas_torque(pose.alpha_k),
            tau_toe_spring: self.toe_spring_torque(pose.theta_toe),
            tau_toe_tendon,
            tau_knee_toe_tendon,
            stored_energy: self.stored_energy(pose),
        }
    }
}
