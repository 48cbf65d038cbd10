//! Configuration files.
//!
//! A configuration is a TOML document with an optional top-level `preset`
//! key and four optional sections, `[robot]`, `[tendons]`, `[cpg]` and
//! `[sim]`. Values start from the preset (GAS+SOL when no preset is named)
//! and every key present in a section overrides it. Unknown keys are errors.
//! The full key list is documented in `docs/config.md`.
//!
//! Writing a bundle emits every key, so load → write → load is the identity.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cpg::CpgParams;
use crate::dynamics::{Integrator, SimSettings};
use crate::error::{Error, Result};
use crate::morphology::{
    derive_segment_masses, validate, AngleRange, ComFractions, ConfigName, PulleyRadii, RobotModel,
    SegmentRatios, TendonConfig, ValidationReport, WEIGHT_RATIOS,
};

/// Everything needed to run one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigBundle {
    pub model: RobotModel,
    pub tendons: TendonConfig,
    pub cpg: CpgParams,
    pub settings: SimSettings,
    /// Weight ratios the segment masses were derived from.
    pub weight_ratios: SegmentRatios,
}

impl ConfigBundle {
    pub fn preset(name: ConfigName) -> Self {
        Self {
            model: RobotModel::with_total_mass(name.total_mass())
                .expect("preset masses are positive"),
            tendons: TendonConfig::preset(name),
            cpg: CpgParams::preset(name),
            settings: SimSettings::default(),
            weight_ratios: WEIGHT_RATIOS,
        }
    }

    /// The configuration's preset name, or `Custom` once the preset
    /// stiffnesses or mass of that preset have been changed.
    pub fn name(&self) -> ConfigName {
        let name = self.tendons.name;
        if name == ConfigName::Custom {
            return name;
        }
        let published = TendonConfig::preset(name);
        let intact = self.tendons.k_sol == published.k_sol
            && self.tendons.k_gas == published.k_gas
            && self.model.total_mass == name.total_mass();
        if intact {
            name
        } else {
            ConfigName::Custom
        }
    }

    /// Every invariant of every part.
    pub fn validate(&self) -> ValidationReport {
        let mut report = validate(&self.model, &self.tendons);
        let mut extra = Vec::new();
        extra.extend(self.cpg.check());
        extra.extend(self.settings.check());
        if self.cpg.nodes() != 2 {
            extra.push((
                "coupling".into(),
                "the biped uses a two-node network".into(),
            ));
        }
        if 1.0 / (100.0 * self.cpg.frequency) < self.settings.timestep {
            extra.push((
                "timestep".into(),
                "timestep ≤ 1/(100·frequency) for the oscillator".into(),
            ));
        }
        report.merge(ValidationReport {
            violations: extra
                .into_iter()
                .map(|(field, rule)| crate::morphology::Violation { field, rule })
                .collect(),
        });
        report
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_ratios: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thigh_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shank_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heel_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toe_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trunk_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub foot_height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heel_offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leg_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toe_mass_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub com_fractions: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_sol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_gas_ankle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_gas_knee: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_vas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hip_limits: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knee_limits: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ankle_limits: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toe_limits: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TendonSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_sol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_gas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_vas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_toe: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_toe_tendon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sol_rest_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gas_rest_excursion: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vas_rest_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toe_rest_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toe_tendon_engage_knee_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toe_tendon_knee_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toe_tendon_toe_radius: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpgSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hip_duty_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knee_duty_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hip_amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knee_amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hip_offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knee_offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hip_swing_steady: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub desired_phase_diff: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestep: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substeps: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrator: Option<Integrator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gravity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contact_stiffness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contact_damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tangential_stiffness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tangential_damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub friction_coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torque_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torque_limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp_hip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kd_hip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp_knee: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kd_knee: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint_limit_stiffness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint_limit_damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub armature: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passive_damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standby_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding_resistance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settle_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fall_height: Option<f64>,
}

/// On-disk form of a configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robot: Option<RobotSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tendons: Option<TendonSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpg: Option<CpgSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
}

macro_rules! apply {
    ($section:expr, $target:expr, [$($field:ident),* $(,)?]) => {
        $(if let Some(v) = $section.$field.clone() { $target.$field = v; })*
    };
}

fn range(v: [f64; 2]) -> AngleRange {
    AngleRange::new(v[0], v[1])
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let has_content = text
            .lines()
            .map(str::trim)
            .any(|l| !l.is_empty() && !l.starts_with('#'));
        if !has_content {
            return Err(Error::Parse {
                path: origin.to_string(),
                message: "empty configuration".into(),
            });
        }
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        })
    }

    /// Expand the preset and overrides into a validated bundle.
    pub fn resolve(&self) -> Result<ConfigBundle> {
        let preset = match &self.preset {
            Some(p) => Some(ConfigName::parse_preset(p)?),
            None => None,
        };
        let base = preset.unwrap_or(ConfigName::GasSol);
        let mut bundle = ConfigBundle::preset(base);

        if let Some(r) = &self.robot {
            let model = &mut bundle.model;
            if let Some(ratios) = r.weight_ratios {
                bundle.weight_ratios = SegmentRatios {
                    trunk: ratios[0],
                    thigh: ratios[1],
                    shank: ratios[2],
                    foot: ratios[3],
                };
            }
            if let Some(m) = r.total_mass {
                model.total_mass = m;
            }
            model.segment_masses = derive_segment_masses(model.total_mass, &bundle.weight_ratios)?;
            apply!(
                r,
                model,
                [
                    thigh_length,
                    shank_length,
                    heel_length,
                    toe_length,
                    trunk_length,
                    foot_height,
                    heel_offset,
                    leg_length,
                    toe_mass_fraction
                ]
            );
            if let Some(c) = r.com_fractions {
                model.com_fractions = ComFractions {
                    thigh: c[0],
                    shank: c[1],
                    foot: c[2],
                    toe: c[3],
                };
            }
            let radii: &mut PulleyRadii = &mut model.pulley_radii;
            if let Some(v) = r.r_sol {
                radii.sol_ankle = v;
            }
            if let Some(v) = r.r_gas_ankle {
                radii.gas_ankle = v;
            }
            if let Some(v) = r.r_gas_knee {
                radii.gas_knee = v;
            }
            if let Some(v) = r.r_vas {
                radii.vas_knee = v;
            }
            let limits = &mut model.joint_limits;
            if let Some(v) = r.hip_limits {
                limits.hip = range(v);
            }
            if let Some(v) = r.knee_limits {
                limits.knee = range(v);
            }
            if let Some(v) = r.ankle_limits {
                limits.ankle = range(v);
            }
            if let Some(v) = r.toe_limits {
                limits.toe = range(v);
            }
        }

        if let Some(t) = &self.tendons {
            apply!(
                t,
                bundle.tendons,
                [
                    k_sol,
                    k_gas,
                    k_vas,
                    k_toe,
                    k_toe_tendon,
                    sol_rest_angle,
                    gas_rest_excursion,
                    vas_rest_angle,
                    toe_rest_angle,
                    toe_tendon_engage_knee_angle,
                    toe_tendon_knee_radius,
                    toe_tendon_toe_radius
                ]
            );
        }
        if let Some(c) = &self.cpg {
            apply!(
                c,
                bundle.cpg,
                [
                    frequency,
                    hip_duty_factor,
                    knee_duty_factor,
                    hip_amplitude,
                    knee_amplitude,
                    hip_offset,
                    knee_offset,
                    hip_swing_steady,
                    coupling_gain,
                    coupling,
                    desired_phase_diff
                ]
            );
        }
        if let Some(s) = &self.sim {
            apply!(
                s,
                bundle.settings,
                [
                    timestep,
                    substeps,
                    integrator,
                    gravity,
                    contact_stiffness,
                    contact_damping,
                    tangential_stiffness,
                    tangential_damping,
                    friction_coefficient,
                    torque_constant,
                    torque_limit,
                    kp_hip,
                    kd_hip,
                    kp_knee,
                    kd_knee,
                    joint_limit_stiffness,
                    joint_limit_damping,
                    armature,
                    passive_damping,
                    standby_power,
                    winding_resistance,
                    duration,
                    settle_time,
                    fall_height
                ]
            );
        }

        // a named preset only survives if its stiffnesses and mass are intact
        bundle.tendons.name = preset.unwrap_or(ConfigName::Custom);
        bundle.tendons.name = bundle.name();

        bundle.validate().into_result()?;
        Ok(bundle)
    }

    /// Fully explicit file for `bundle`.
    pub fn from_bundle(bundle: &ConfigBundle) -> Self {
        let m = &bundle.model;
        let t = &bundle.tendons;
        let c = &bundle.cpg;
        let s = &bundle.settings;
        let w = &bundle.weight_ratios;
        let lim = |r: AngleRange| Some([r.min, r.max]);
        ConfigFile {
            preset: (bundle.name() != ConfigName::Custom)
                .then(|| bundle.name().as_str().to_string()),
            robot: Some(RobotSection {
                total_mass: Some(m.total_mass),
                weight_ratios: Some([w.trunk, w.thigh, w.shank, w.foot]),
                thigh_length: Some(m.thigh_length),
                shank_length: Some(m.shank_length),
                heel_length: Some(m.heel_length),
                toe_length: Some(m.toe_length),
                trunk_length: Some(m.trunk_length),
                foot_height: Some(m.foot_height),
                heel_offset: Some(m.heel_offset),
                leg_length: Some(m.leg_length),
                toe_mass_fraction: Some(m.toe_mass_fraction),
                com_fractions: Some([
                    m.com_fractions.thigh,
                    m.com_fractions.shank,
                    m.com_fractions.foot,
                    m.com_fractions.toe,
                ]),
                r_sol: Some(m.pulley_radii.sol_ankle),
                r_gas_ankle: Some(m.pulley_radii.gas_ankle),
                r_gas_knee: Some(m.pulley_radii.gas_knee),
                r_vas: Some(m.pulley_radii.vas_knee),
                hip_limits: lim(m.joint_limits.hip),
                knee_limits: lim(m.joint_limits.knee),
                ankle_limits: lim(m.joint_limits.ankle),
                toe_limits: lim(m.joint_limits.toe),
            }),
            tendons: Some(TendonSection {
                k_sol: Some(t.k_sol),
                k_gas: Some(t.k_gas),
                k_vas: Some(t.k_vas),
                k_toe: Some(t.k_toe),
                k_toe_tendon: Some(t.k_toe_tendon),
                sol_rest_angle: Some(t.sol_rest_angle),
                gas_rest_excursion: Some(t.gas_rest_excursion),
                vas_rest_angle: Some(t.vas_rest_angle),
                toe_rest_angle: Some(t.toe_rest_angle),
                toe_tendon_engage_knee_angle: Some(t.toe_tendon_engage_knee_angle),
                toe_tendon_knee_radius: Some(t.toe_tendon_knee_radius),
                toe_tendon_toe_radius: Some(t.toe_tendon_toe_radius),
            }),
            cpg: Some(CpgSection {
                frequency: Some(c.frequency),
                hip_duty_factor: Some(c.hip_duty_factor),
                knee_duty_factor: Some(c.knee_duty_factor),
                hip_amplitude: Some(c.hip_amplitude),
                knee_amplitude: Some(c.knee_amplitude),
                hip_offset: Some(c.hip_offset),
                knee_offset: Some(c.knee_offset),
                hip_swing_steady: Some(c.hip_swing_steady),
                coupling_gain: Some(c.coupling_gain),
                coupling: Some(c.coupling.clone()),
                desired_phase_diff: Some(c.desired_phase_diff.clone()),
            }),
            sim: Some(SimSection {
                timestep: Some(s.timestep),
                substeps: Some(s.substeps),
                integrator: Some(s.integrator),
                gravity: Some(s.gravity),
                contact_stiffness: Some(s.contact_stiffness),
                contact_damping: Some(s.contact_damping),
                tangential_stiffness: Some(s.tangential_stiffness),
                tangential_damping: Some(s.tangential_damping),
                friction_coefficient: Some(s.friction_coefficient),
                torque_constant: Some(s.torque_constant),
                torque_limit: Some(s.torque_limit),
                kp_hip: Some(s.kp_hip),
                kd_hip: Some(s.kd_hip),
                kp_knee: Some(s.kp_knee),
                kd_knee: Some(s.kd_knee),
                joint_limit_stiffness: Some(s.joint_limit_stiffness),
                joint_limit_damping: Some(s.joint_limit_damping),
                armature: Some(s.armature),
                passive_damping: Some(s.passive_damping),
                standby_power: Some(s.standby_power),
                winding_resistance: Some(s.winding_resistance),
                duration: Some(s.duration),
                settle_time: Some(s.settle_time),
                fall_height: Some(s.fall_height),
            }),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config sections are plain tables")
    }
}

pub fn parse_config(text: &str, origin: &str) -> Result<ConfigBundle> {
    ConfigFile::parse(text, origin)?.resolve()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigBundle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

pub fn write_config(bundle: &ConfigBundle) -> String {
    ConfigFile::from_bundle(bundle).to_toml()
}
