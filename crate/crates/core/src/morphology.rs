//! Physical description of the robot and the three named tendon
//! configurations.
//!
//! Angles stored in the model are degrees (the way joint ranges are quoted);
//! everything handed to the dynamics is converted to radians at the boundary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Segment weight ratios, normalised to the foot.
pub const WEIGHT_RATIOS: SegmentRatios = SegmentRatios {
    trunk: 9.42,
    thigh: 6.68,
    shank: 1.76,
    foot: 1.00,
};

/// Segment length ratios, normalised to the foot height.
pub const LENGTH_RATIO_SHANK: f64 = 5.82;
pub const LENGTH_RATIO_TRUNK: f64 = 5.09;
pub const LENGTH_RATIO_FOOT: f64 = 3.49;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentRatios {
    pub trunk: f64,
    pub thigh: f64,
    pub shank: f64,
    pub foot: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentMasses {
    pub trunk: f64,
    pub thigh: f64,
    pub shank: f64,
    pub foot: f64,
}

impl SegmentMasses {
    /// One trunk plus two of every leg segment.
    pub fn total(&self) -> f64 {
        self.trunk + 2.0 * (self.thigh + self.shank + self.foot)
    }
}

/// Split `total_mass` over the segments of a bilaterally symmetric robot so
/// that the masses keep the given ratios.
pub fn derive_segment_masses(total_mass: f64, ratios: &SegmentRatios) -> Result<SegmentMasses> {
    if !(total_mass.is_finite() && total_mass > 0.0) {
        return Err(Error::invalid(format!(
            "total mass must be positive, got {total_mass}"
        )));
    }
    for (name, r) in [
        ("trunk", ratios.trunk),
        ("thigh", ratios.thigh),
        ("shank", ratios.shank),
        ("foot", ratios.foot),
    ] {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid(format!(
                "{name} weight ratio must be positive, got {r}"
            )));
        }
    }
    let unit = total_mass / (ratios.trunk + 2.0 * (ratios.thigh + ratios.shank + ratios.foot));
    Ok(SegmentMasses {
        trunk: ratios.trunk * unit,
        thigh: ratios.thigh * unit,
        shank: ratios.shank * unit,
        foot: ratios.foot * unit,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulleyRadii {
    pub sol_ankle: f64,
    pub gas_ankle: f64,
    pub gas_knee: f64,
    pub vas_knee: f64,
}

/// Closed angle interval in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub min: f64,
    pub max: f64,
}

impl AngleRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, deg: f64) -> bool {
        deg >= self.min && deg <= self.max
    }

    pub fn is_ordered(&self) -> bool {
        self.min < self.max
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub hip: AngleRange,
    pub knee: AngleRange,
    pub ankle: AngleRange,
    pub toe: AngleRange,
}

/// Centre-of-mass position of each leg segment as a fraction of its length,
/// measured from the proximal joint. The foot fraction runs along the rigid
/// part from the heel contact to the metatarsal joint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComFractions {
    pub thigh: f64,
    pub shank: f64,
    pub foot: f64,
    pub toe: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub thigh_length: f64,
    pub shank_length: f64,
    /// Rigid foot part, ankle to metatarsal joint.
    pub heel_length: f64,
    /// Hinged toe, metatarsal joint to tip.
    pub toe_length: f64,
    pub trunk_length: f64,
    /// Height of the ankle axis above the sole.
    pub foot_height: f64,
    /// Distance the heel contact sits behind the ankle axis.
    pub heel_offset: f64,
    pub total_mass: f64,
    pub segment_masses: SegmentMasses,
    /// Share of each foot's mass carried by the toe segment.
    pub toe_mass_fraction: f64,
    pub com_fractions: ComFractions,
    pub pulley_radii: PulleyRadii,
    pub joint_limits: JointLimits,
    pub leg_length: f64,
}

impl RobotModel {
    /// Robot geometry with segment masses derived for `total_mass`.
    pub fn with_total_mass(total_mass: f64) -> Result<Self> {
        let unit_length = 0.160 / LENGTH_RATIO_SHANK;
        Ok(Self {
            thigh_length: 0.160,
            shank_length: 0.160,
            heel_length: 0.048,
            toe_length: 0.024,
            trunk_length: LENGTH_RATIO_TRUNK * unit_length,
            foot_height: unit_length,
            heel_offset: LENGTH_RATIO_FOOT * unit_length - 0.048 - 0.024,
            total_mass,
            segment_masses: derive_segment_masses(total_mass, &WEIGHT_RATIOS)?,
            toe_mass_fraction: 0.2,
            com_fractions: ComFractions {
                thigh: 0.5,
                shank: 0.5,
                foot: 0.5,
                toe: 0.5,
            },
            pulley_radii: PulleyRadii {
                sol_ankle: 0.013,
                gas_ankle: 0.013,
                gas_knee: 0.013,
                vas_knee: 0.012,
            },
            joint_limits: JointLimits {
                hip: AngleRange::new(-40.0, 120.0),
                knee: AngleRange::new(0.0, 120.0),
                ankle: AngleRange::new(-22.0, 15.0),
                toe: AngleRange::new(15.0, 45.0),
            },
            leg_length: 0.35,
        })
    }

    /// Mass of the rigid heel part of one foot.
    pub fn heel_mass(&self) -> f64 {
        self.segment_masses.foot * (1.0 - self.toe_mass_fraction)
    }

    pub fn toe_mass(&self) -> f64 {
        self.segment_masses.foot * self.toe_mass_fraction
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConfigName {
    #[serde(rename = "GAS+SOL")]
    GasSol,
    #[serde(rename = "SOL")]
    Sol,
    #[serde(rename = "GAS")]
    Gas,
    #[serde(rename = "custom")]
    Custom,
}

impl ConfigName {
    pub const PRESETS: [ConfigName; 3] = [ConfigName::GasSol, ConfigName::Sol, ConfigName::Gas];

    pub fn as_str(self) -> &'static str {
        match self {
            ConfigName::GasSol => "GAS+SOL",
            ConfigName::Sol => "SOL",
            ConfigName::Gas => "GAS",
            ConfigName::Custom => "custom",
        }
    }

    /// Filesystem-friendly form, e.g. `gas_sol`.
    pub fn slug(self) -> &'static str {
        match self {
            ConfigName::GasSol => "gas_sol",
            ConfigName::Sol => "sol",
            ConfigName::Gas => "gas",
            ConfigName::Custom => "custom",
        }
    }

    pub fn parse_preset(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GAS+SOL" | "GAS_SOL" | "GASSOL" => Ok(ConfigName::GasSol),
            "SOL" => Ok(ConfigName::Sol),
            "GAS" => Ok(ConfigName::Gas),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }

    /// Published robot mass for the configuration.
    pub fn total_mass(self) -> f64 {
        match self {
            ConfigName::GasSol | ConfigName::Custom => 2.22,
            ConfigName::Sol | ConfigName::Gas => 2.05,
        }
    }
}

impl fmt::Display for ConfigName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TendonConfig {
    pub name: ConfigName,
    /// N/m
    pub k_sol: f64,
    /// N/m
    pub k_gas: f64,
    /// N/m
    pub k_vas: f64,
    /// N·m/rad
    pub k_toe: f64,
    /// N/m
    pub k_toe_tendon: f64,
    /// deg, ankle angle at which SOL starts to stretch.
    pub sol_rest_angle: f64,
    /// deg, value of (ankle − knee) at which GAS becomes taut.
    pub gas_rest_excursion: f64,
    /// deg
    pub vas_rest_angle: f64,
    /// deg
    pub toe_rest_angle: f64,
    /// deg, strict threshold above which the toe tendon can take load.
    pub toe_tendon_engage_knee_angle: f64,
    /// m, moment arm of the toe tendon at the knee.
    pub toe_tendon_knee_radius: f64,
    /// m, moment arm of the toe tendon at the toe joint.
    pub toe_tendon_toe_radius: f64,
}

/// 8.04 N·mm/deg expressed in N·m/rad.
pub const K_TOE_SPRING: f64 = 8.04e-3 * 180.0 / std::f64::consts::PI;

/// SOL rest angle used by the alternative "loaded from maximum plantarflexion"
/// convention.
pub const SOL_REST_MAX_PLANTARFLEXION: f64 = -22.0;

impl TendonConfig {
    pub fn preset(name: ConfigName) -> Self {
        let (k_sol, k_gas) = match name {
            ConfigName::GasSol | ConfigName::Custom => (4500.0, 1400.0),
            ConfigName::Sol => (6100.0, 0.0),
            ConfigName::Gas => (0.0, 6100.0),
        };
        Self {
            name,
            k_sol,
            k_gas,
            k_vas: 2160.0,
            k_toe: K_TOE_SPRING,
            k_toe_tendon: 60_000.0,
            sol_rest_angle: 0.0,
            gas_rest_excursion: 0.0,
            vas_rest_angle: 0.0,
            toe_rest_angle: 15.0,
            toe_tendon_engage_knee_angle: 20.0,
            toe_tendon_knee_radius: 0.003,
            toe_tendon_toe_radius: 0.005,
        }
    }
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: &str, rule: impl Into<String>) {
        self.violations.push(Violation {
            field: field.to_string(),
            rule: rule.into(),
        });
    }

    fn positive(&mut self, field: &str, value: f64) {
        if !(value.is_finite() && value > 0.0) {
            self.push(field, format!("{field} > 0 (got {value})"));
        }
    }

    fn non_negative(&mut self, field: &str, value: f64) {
        if !(value.is_finite() && value >= 0.0) {
            self.push(field, format!("{field} ≥ 0 (got {value})"));
        }
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(self.violations))
        }
    }
}

const MASS_TOLERANCE: f64 = 1e-9;

/// Check every model and tendon invariant. An empty report means valid.
pub fn validate(model: &RobotModel, tendons: &TendonConfig) -> ValidationReport {
    let mut report = ValidationReport::default();

    for (field, v) in [
        ("thigh_length", model.thigh_length),
        ("shank_length", model.shank_length),
        ("heel_length", model.heel_length),
        ("toe_length", model.toe_length),
        ("trunk_length", model.trunk_length),
        ("foot_height", model.foot_height),
        ("heel_offset", model.heel_offset),
        ("total_mass", model.total_mass),
        ("leg_length", model.leg_length),
        ("segment_masses.trunk", model.segment_masses.trunk),
        ("segment_masses.thigh", model.segment_masses.thigh),
        ("segment_masses.shank", model.segment_masses.shank),
        ("segment_masses.foot", model.segment_masses.foot),
        ("pulley_radii.sol_ankle", model.pulley_radii.sol_ankle),
        ("pulley_radii.gas_ankle", model.pulley_radii.gas_ankle),
        ("pulley_radii.gas_knee", model.pulley_radii.gas_knee),
        ("pulley_radii.vas_knee", model.pulley_radii.vas_knee),
    ] {
        report.positive(field, v);
    }

    let sum = model.segment_masses.total();
    if (sum - model.total_mass).abs() > MASS_TOLERANCE {
        report.push(
            "segment_masses",
            format!(
                "trunk + 2·(thigh + shank + foot) = total_mass (got {sum} vs {})",
                model.total_mass
            ),
        );
    }

    if !(0.0..1.0).contains(&model.toe_mass_fraction) || !(model.toe_mass_fraction > 0.0) {
        report.push("toe_mass_fraction", "0 < toe_mass_fraction < 1");
    }
    let c = &model.com_fractions;
    for (field, v) in [
        ("com_fractions.thigh", c.thigh),
        ("com_fractions.shank", c.shank),
        ("com_fractions.foot", c.foot),
        ("com_fractions.toe", c.toe),
    ] {
        if !(0.0..=1.0).contains(&v) {
            report.push(field, format!("{field} within [0, 1] (got {v})"));
        }
    }

    let limits = &model.joint_limits;
    for (field, range) in [
        ("joint_limits.hip", limits.hip),
        ("joint_limits.knee", limits.knee),
        ("joint_limits.ankle", limits.ankle),
        ("joint_limits.toe", limits.toe),
    ] {
        if !range.is_ordered() {
            report.push(
                field,
                format!(
                    "{field} range min < max (got [{}, {}])",
                    range.min, range.max
                ),
            );
        }
    }
    if limits.ankle != AngleRange::new(-22.0, 15.0) {
        report.push(
            "joint_limits.ankle",
            format!(
                "ankle range is [-22°, 15°] (got [{}, {}])",
                limits.ankle.min, limits.ankle.max
            ),
        );
    }

    for (field, v) in [
        ("k_SOL", tendons.k_sol),
        ("k_GAS", tendons.k_gas),
        ("k_VAS", tendons.k_vas),
        ("k_toe", tendons.k_toe),
        ("k_toeTendon", tendons.k_toe_tendon),
    ] {
        report.non_negative(field, v);
    }
    for (field, v) in [
        ("toe_tendon_knee_radius", tendons.toe_tendon_knee_radius),
        ("toe_tendon_toe_radius", tendons.toe_tendon_toe_radius),
    ] {
        report.positive(field, v);
    }
    for (field, v) in [
        ("sol_rest_angle", tendons.sol_rest_angle),
        ("gas_rest_excursion", tendons.gas_rest_excursion),
        ("vas_rest_angle", tendons.vas_rest_angle),
        ("toe_rest_angle", tendons.toe_rest_angle),
        (
            "toe_tendon_engage_knee_angle",
            tendons.toe_tendon_engage_knee_angle,
        ),
    ] {
        if !v.is_finite() {
            report.push(field, format!("{field} finite"));
        }
    }

    if tendons.name != ConfigName::Custom {
        let preset = TendonConfig::preset(tendons.name);
        if tendons.k_sol != preset.k_sol || tendons.k_gas != preset.k_gas {
            report.push(
                "name",
                format!(
                    "preset {} requires k_SOL = {} N/m and k_GAS = {} N/m",
                    tendons.name, preset.k_sol, preset.k_gas
                ),
            );
        }
        if (model.total_mass - tendons.name.total_mass()).abs() > MASS_TOLERANCE {
            report.push(
                "total_mass",
                format!(
                    "preset {} requires total_mass = {} kg",
                    tendons.name,
                    tendons.name.total_mass()
                ),
            );
        }
    }

    report
}
