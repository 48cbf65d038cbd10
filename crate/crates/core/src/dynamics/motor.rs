//! Joint-level PD current control and the current-to-torque map.
//!
//! The tracking error is taken in degrees, so the gains are amperes per
//! degree and amperes per degree-per-second.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Joint {
    Hip,
    Knee,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdGains {
    pub kp_hip: f64,
    pub kd_hip: f64,
    pub kp_knee: f64,
    pub kd_knee: f64,
}

impl PdGains {
    pub fn for_joint(&self, joint: Joint) -> (f64, f64) {
        match joint {
            Joint::Hip => (self.kp_hip, self.kd_hip),
            Joint::Knee => (self.kp_knee, self.kd_knee),
        }
    }
}

/// Desired motor current in A.
///
/// `reference_rate` and `measured_rate` are in deg/s; the derivative acts on
/// the error, so a moving reference contributes feed-forward damping.
pub fn pd_current(
    reference: f64,
    measured: f64,
    reference_rate: f64,
    measured_rate: f64,
    joint: Joint,
    gains: &PdGains,
) -> f64 {
    let (kp, kd) = gains.for_joint(joint);
    kp * (reference - measured) + kd * (reference_rate - measured_rate)
}

/// Shaft torque for current `i`, saturated at ±`limit`.
pub fn motor_torque(i: f64, torque_constant: f64, limit: f64) -> f64 {
    (torque_constant * i).clamp(-limit, limit)
}
