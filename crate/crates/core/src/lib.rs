//! Sagittal-plane biped with SOL, GAS, VAS and toe spring-tendons, driven by a
//! coupled-oscillator pattern generator through PD current control, plus the
//! gait-energetics analysis used to compare tendon configurations.

// `!(x > 0.0)` is used on purpose: unlike `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod cpg;
pub mod dynamics;
pub mod error;
pub mod log;
pub mod morphology;
pub mod tendons;

pub use config::{load_config, ConfigBundle};
pub use error::{Error, Result};
pub use morphology::ConfigName;
