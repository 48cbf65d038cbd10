//! Gait analysis: cycle segmentation at touch-down, cycle averaging, ankle
//! power and its amplification, walking speed, cost of transport, Froude
//! speeds and knee–ankle coordination.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ConfigBundle;
use crate::error::{Error, Result};
use crate::log::{TrialLog, GENERATOR, SCHEMA_VERSION, SIDES};
use crate::morphology::PulleyRadii;
use crate::morphology::TendonConfig;

/// Gravitational acceleration used by the cost of transport, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;
/// Grid size of a normalized gait cycle.
pub const CYCLE_BINS: usize = 1000;
/// Minimum spacing between two touch-downs, s.
pub const DEBOUNCE: f64 = 0.05;
/// Contact or swing runs shorter than this are treated as chatter, s.
pub const MIN_PHASE_DURATION: f64 = 0.1;
pub const MIN_CYCLES: usize = 3;
/// Cycles averaged at most.
pub const MAX_CYCLES: usize = 100;

const CURVES_BANNER: &str = "# tendon-biped gait curves, schema ";

/// Linear interpolation of every column onto a uniform grid at `rate` Hz,
/// starting at the first timestamp.
pub fn resample_log(log: &TrialLog, rate: f64) -> Result<TrialLog> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::invalid(format!(
            "resampling rate must be positive (got {rate})"
        )));
    }
    let time = log.time();
    if time.is_empty() {
        return Err(Error::Analysis("log is empty".into()));
    }
    if let Some(k) = time.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Analysis(format!(
            "timestamps must be strictly increasing (row {} has t = {} after {})",
            k + 1,
            time[k + 1],
            time[k]
        )));
    }
    let t0 = time[0];
    let end = *time.last().unwrap();
    let n = ((end - t0) * rate + 1e-9).floor() as usize + 1;
    let grid = |k: usize| t0 + k as f64 / rate;

    let on_grid = time.len() == n
        && time
            .iter()
            .enumerate()
            .all(|(k, &t)| (t - grid(k)).abs() <= 1e-9 * (1.0 + t.abs()));
    if on_grid {
        return Ok(log.clone());
    }

    let mut data = vec![Vec::with_capacity(n); log.columns.len()];
    let mut seg = 0;
    for k in 0..n {
        let t = grid(k).min(end);
        while seg + 2 < time.len() && time[seg + 1] < t {
            seg += 1;
        }
        let (ta, tb) = (time[seg], time[(seg + 1).min(time.len() - 1)]);
        let w = if tb > ta {
            ((t - ta) / (tb - ta)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        data[0].push(t);
        for (c, out) in data.iter_mut().enumerate().skip(1) {
            let col = &log.data[c];
            let b = (seg + 1).min(col.len() - 1);
            out.push(col[seg] + w * (col[b] - col[seg]));
        }
    }
    let mut meta = log.meta.clone();
    meta.samples = n;
    TrialLog::from_columns(log.columns.clone(), data, meta)
}

/// Remove contact chatter from a swing indicator. Stance runs shorter than
/// `min_duration` become swing first (scuffs during swing), then swing runs
/// shorter than `min_duration` become stance (bounces during stance).
pub fn clean_swing(time: &[f64], swing: &[bool], min_duration: f64) -> Vec<bool> {
    let mut out = swing.to_vec();
    for target in [false, true] {
        let mut start = 0;
        while start < out.len() {
            let mut end = start;
            while end < out.len() && out[end] == out[start] {
                end += 1;
            }
            // leading and trailing runs are kept as they are: their true
            // length is unknown
            let interior = start > 0 && end < out.len();
            let duration = if end < time.len() {
                time[end] - time[start]
            } else {
                f64::INFINITY
            };
            if interior && out[start] == target && duration < min_duration {
                out[start..end].iter_mut().for_each(|v| *v = !target);
            }
            start = end;
        }
    }
    out
}

/// Touch-down sample indices.
///
/// A touch-down is the first sample at or after the end of a swing interval
/// where the ankle velocity turns from ≤ 0 to > 0. Without a swing channel
/// every such turn counts. Events closer than [`DEBOUNCE`] to the previous one
/// are dropped.
pub fn detect_touchdowns(
    time: &[f64],
    ankle_rate: &[f64],
    swing: Option<&[bool]>,
) -> Result<Vec<usize>> {
    let mut events = Vec::new();
    let mut armed = swing.is_none();
    let mut last: Option<f64> = None;
    for k in 1..ankle_rate.len() {
        if let Some(sw) = swing {
            if sw[k - 1] && !sw[k] {
                armed = true;
            }
        }
        let crossing = ankle_rate[k - 1] <= 0.0 && ankle_rate[k] > 0.0;
        if armed && crossing && last.is_none_or(|t| time[k] - t >= DEBOUNCE) {
            events.push(k);
            last = Some(time[k]);
            if swing.is_some() {
                armed = false;
            }
        }
    }
    if events.len() < MIN_CYCLES {
        return Err(Error::InsufficientCycles {
            found: events.len().saturating_sub(1),
            needed: MIN_CYCLES,
        });
    }
    Ok(events)
}

/// Mean and population standard deviation over cycles, per bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedCurve {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Value of `signal` at fractional sample position `pos`.
fn sample_at(signal: &[f64], pos: f64) -> f64 {
    let i = pos.floor() as usize;
    if i + 1 >= signal.len() {
        return signal[signal.len() - 1];
    }
    let w = pos - i as f64;
    signal[i] + w * (signal[i + 1] - signal[i])
}

/// One cycle of `signal` between samples `start` and `end`, resampled to
/// `bins` points at phases 0, 1/bins, …, (bins−1)/bins.
pub fn normalize_cycle(signal: &[f64], start: usize, end: usize, bins: usize) -> Vec<f64> {
    let span = (end - start) as f64;
    (0..bins)
        .map(|b| sample_at(signal, start as f64 + span * b as f64 / bins as f64))
        .collect()
}

/// Average the cycles delimited by consecutive `events`. The partial cycles
/// before the first and after the last event are not used.
pub fn segment_and_average(signal: &[f64], events: &[usize], bins: usize) -> Result<AveragedCurve> {
    if events.len() < 2 {
        return Err(Error::InsufficientCycles {
            found: 0,
            needed: MIN_CYCLES,
        });
    }
    let cycles: Vec<Vec<f64>> = events
        .windows(2)
        .map(|w| normalize_cycle(signal, w[0], w[1], bins))
        .collect();
    Ok(average(&cycles))
}

/// Bin-wise mean and population standard deviation.
pub fn average(cycles: &[Vec<f64>]) -> AveragedCurve {
    let n = cycles.len() as f64;
    let bins = cycles.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; bins];
    let mut std = vec![0.0; bins];
    for b in 0..bins {
        let m = cycles.iter().map(|c| c[b]).sum::<f64>() / n;
        let var = cycles.iter().map(|c| (c[b] - m).powi(2)).sum::<f64>() / n;
        mean[b] = m;
        std[b] = var.sqrt();
    }
    AveragedCurve { mean, std }
}

/// Ankle joint power from the spring model, W.
///
/// `P = ω·(k_SOL·r_SOL²·α_A + k_GAS·r_GAS²·(α_A − α_K))` while α_A ≥ α_K,
/// otherwise only the SOL term. Angles in rad, `omega_a` in rad/s.
pub fn ankle_power(
    alpha_a: f64,
    alpha_k: f64,
    omega_a: f64,
    tendons: &TendonConfig,
    radii: &PulleyRadii,
) -> f64 {
    let sol = tendons.k_sol * radii.sol_ankle.powi(2) * alpha_a;
    if alpha_a >= alpha_k {
        omega_a * (sol + tendons.k_gas * radii.gas_ankle.powi(2) * (alpha_a - alpha_k))
    } else {
        omega_a * sol
    }
}

/// Peak ratio of a power curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Amplification {
    /// max(P)/|min(P)|, absent when the curve lacks either sign.
    pub ratio: Option<f64>,
    pub positive_peak: f64,
    pub negative_peak: f64,
    /// % of the curve.
    pub positive_peak_timing: f64,
    pub negative_peak_timing: f64,
}

pub fn power_amplification(curve: &[f64]) -> Amplification {
    let n = curve.len().max(1) as f64;
    let (imax, pmax) =
        curve
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |a, (i, v)| if v > a.1 { (i, v) } else { a },
            );
    let (imin, pmin) = curve
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |a, (i, v)| if v < a.1 { (i, v) } else { a },
        );
    let ratio = (pmax > 0.0 && pmin < 0.0).then(|| pmax / pmin.abs());
    Amplification {
        ratio,
        positive_peak: pmax,
        negative_peak: pmin,
        positive_peak_timing: 100.0 * imax as f64 / n,
        negative_peak_timing: 100.0 * imin as f64 / n,
    }
}

/// Total and net positive-power cost of transport from a mean positive
/// electrical power in W.
pub fn cost_of_transport(
    mean_positive_power: f64,
    mass: f64,
    speed: f64,
    standby: f64,
) -> Result<(f64, f64)> {
    if !(speed > 0.0) {
        return Err(Error::Analysis(format!(
            "cost of transport needs a forward speed (got {speed} m/s)"
        )));
    }
    if !(mass > 0.0) {
        return Err(Error::invalid(format!(
            "mass must be positive (got {mass})"
        )));
    }
    let denominator = mass * STANDARD_GRAVITY * speed;
    Ok((
        mean_positive_power / denominator,
        (mean_positive_power - standby) / denominator,
    ))
}

/// Mean of `max(P, 0)`.
pub fn mean_positive(power: &[f64]) -> f64 {
    if power.is_empty() {
        return 0.0;
    }
    power.iter().map(|p| p.max(0.0)).sum::<f64>() / power.len() as f64
}

/// Mean of a velocity trace, m/s.
pub fn walking_speed(trunk_vx: &[f64]) -> f64 {
    if trunk_vx.is_empty() {
        return 0.0;
    }
    trunk_vx.iter().sum::<f64>() / trunk_vx.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FroudeSpeeds {
    /// Walking speed at Froude number 1, m/s.
    pub v_max: f64,
    /// Two thirds of `v_max`.
    pub transition: f64,
    /// Half the transition speed.
    pub test_speed: f64,
}

pub fn froude_speeds(leg_length: f64) -> Result<FroudeSpeeds> {
    if !(leg_length > 0.0) {
        return Err(Error::invalid(format!(
            "leg length must be positive (got {leg_length})"
        )));
    }
    let v_max = (STANDARD_GRAVITY * leg_length).sqrt();
    let transition = 2.0 / 3.0 * v_max;
    Ok(FroudeSpeeds {
        v_max,
        transition,
        test_speed: 0.5 * transition,
    })
}

/// Knee–ankle coordination loop and its markers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinationPath {
    /// `(knee, ankle)` in deg, one point per bin from touch-down.
    pub path: Vec<(f64, f64)>,
    pub touchdown: (f64, f64),
    pub toe_off: (f64, f64),
    /// Bin where the knee starts flexing in late stance.
    pub knee_onset_bin: usize,
    /// Ankle angle at that bin, deg.
    pub ankle_at_knee_onset: f64,
    /// Bin of peak stance dorsiflexion, where push-off starts.
    pub push_off_bin: usize,
    /// Knee angle at that bin, deg.
    pub knee_at_push_off: f64,
}

/// Knee flexion above its stance minimum that marks flexion onset, deg.
pub const KNEE_ONSET_THRESHOLD: f64 = 2.0;

/// Build the coordination loop from averaged knee and ankle curves (deg)
/// and the toe-off bin.
pub fn knee_ankle_phase_curve(
    knee: &[f64],
    ankle: &[f64],
    toe_off_bin: usize,
) -> Result<CoordinationPath> {
    if knee.len() != ankle.len() || knee.is_empty() {
        return Err(Error::Analysis(
            "knee and ankle curves must have the same non-zero length".into(),
        ));
    }
    let last = knee.len() - 1;
    let stance_end = toe_off_bin.min(last);
    let stance = 0..=stance_end;
    let min_bin = stance
        .clone()
        .min_by(|&a, &b| knee[a].total_cmp(&knee[b]))
        .unwrap_or(0);
    let knee_onset_bin = (min_bin..=stance_end)
        .find(|&b| knee[b] - knee[min_bin] > KNEE_ONSET_THRESHOLD)
        .unwrap_or(stance_end);
    let push_off_bin = stance
        .max_by(|&a, &b| ankle[a].total_cmp(&ankle[b]).then(b.cmp(&a)))
        .unwrap_or(0);
    Ok(CoordinationPath {
        path: knee.iter().copied().zip(ankle.iter().copied()).collect(),
        touchdown: (knee[0], ankle[0]),
        toe_off: (knee[stance_end], ankle[stance_end]),
        knee_onset_bin,
        ankle_at_knee_onset: ankle[knee_onset_bin],
        push_off_bin,
        knee_at_push_off: knee[push_off_bin],
    })
}

/// Last stance→swing transition inside each cycle, as a fraction of it.
pub fn toe_off_fractions(swing: &[bool], events: &[usize]) -> Vec<f64> {
    events
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0], w[1]);
            (a + 1..b)
                .rev()
                .find(|&k| swing[k] && !swing[k - 1])
                .map(|k| (k - a) as f64 / (b - a) as f64)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn prefix(self) -> &'static str {
        match self {
            Side::Left => SIDES[0],
            Side::Right => SIDES[1],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisOptions {
    pub rate: f64,
    pub side: Side,
    pub bins: usize,
    pub max_cycles: usize,
    /// Allowed relative deviation of a cycle from the median duration.
    pub cycle_tolerance: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            rate: 1000.0,
            side: Side::Left,
            bins: CYCLE_BINS,
            max_cycles: MAX_CYCLES,
            cycle_tolerance: 0.2,
        }
    }
}

/// Scalar metrics of an analyzed trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitMetrics {
    pub schema_version: u32,
    pub generator: String,
    pub configuration: String,
    pub side: Side,
    pub cycles: usize,
    /// s
    pub cycle_duration: f64,
    /// m/s
    pub speed: f64,
    /// m
    pub stride_length: f64,
    pub amplification: Option<f64>,
    /// W
    pub positive_peak_power: f64,
    pub negative_peak_power: f64,
    /// % gait cycle
    pub positive_peak_timing: f64,
    pub negative_peak_timing: f64,
    /// W, including standby
    pub mean_positive_power: f64,
    pub total_cot: f64,
    pub net_cot: f64,
    /// % gait cycle
    pub toe_off_timing: f64,
    /// deg
    pub ankle_at_knee_onset: f64,
    /// deg
    pub knee_at_push_off: f64,
    /// % gait cycle
    pub knee_onset_timing: f64,
    pub push_off_timing: f64,
}

/// Channels averaged over the cycle, in the order written to the curves file.
pub const CURVE_CHANNELS: [(&str, &str); 6] = [
    ("hip", "deg"),
    ("knee", "deg"),
    ("ankle", "deg"),
    ("ankle_power", "W"),
    ("ankle_tendon_power", "W"),
    ("electrical_power", "W"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct GaitReport {
    pub metrics: GaitMetrics,
    /// Same order as [`CURVE_CHANNELS`].
    pub curves: Vec<AveragedCurve>,
    pub coordination: CoordinationPath,
}

/// Per-sample electrical power: standby plus shaft power magnitude of every
/// motor, plus copper loss when a winding resistance is configured.
pub fn electrical_power(log: &TrialLog, standby: f64, resistance: f64) -> Result<Vec<f64>> {
    let mut p = vec![standby; log.rows()];
    for side in SIDES {
        for joint in ["hip", "knee"] {
            let tau = log.column(&format!("{side}_{joint}_torque"))?;
            let omega = log.column(&format!("{side}_{joint}_rate"))?;
            let current = log.column(&format!("{side}_{joint}_current"))?;
            for k in 0..p.len() {
                p[k] += (tau[k] * omega[k]).abs() + resistance * current[k] * current[k];
            }
        }
    }
    Ok(p)
}

/// Run the full pipeline on a trial log.
pub fn analyze(
    log: &TrialLog,
    bundle: &ConfigBundle,
    options: &AnalysisOptions,
) -> Result<GaitReport> {
    let log = resample_log(log, options.rate)?;
    let window = log.steady_rows();
    if window.is_empty() {
        return Err(Error::Analysis(
            "log has no steady-state window (trial too short, fell or faulted)".into(),
        ));
    }
    let cut = |name: &str| -> Result<Vec<f64>> { Ok(log.column(name)?[window.clone()].to_vec()) };
    let side = options.side.prefix();
    let time = cut("time")?;
    let hip = cut(&format!("{side}_hip"))?;
    let knee = cut(&format!("{side}_knee"))?;
    let ankle = cut(&format!("{side}_ankle"))?;
    let ankle_rate = cut(&format!("{side}_ankle_rate"))?;
    let knee_rate = cut(&format!("{side}_knee_rate"))?;
    let sol = cut(&format!("{side}_sol_torque"))?;
    let gas = cut(&format!("{side}_gas_ankle_torque"))?;
    let gas_knee = cut(&format!("{side}_gas_knee_torque"))?;
    let normal: Vec<f64> = {
        let mut total = vec![0.0; time.len()];
        for p in ["heel", "metatarsal", "toe"] {
            for (t, v) in total
                .iter_mut()
                .zip(cut(&format!("{side}_{p}_normal_force"))?)
            {
                *t += v;
            }
        }
        total
    };
    let raw_swing: Vec<bool> = normal.iter().map(|&f| f <= 0.0).collect();
    let swing = clean_swing(&time, &raw_swing, MIN_PHASE_DURATION);

    let mut events = detect_touchdowns(&time, &ankle_rate, Some(&swing))?;
    events = regular_cycles(&events, &time, options.cycle_tolerance);
    if events.len() > options.max_cycles + 1 {
        events.truncate(options.max_cycles + 1);
    }
    if events.len() < MIN_CYCLES + 1 {
        return Err(Error::InsufficientCycles {
            found: events.len().saturating_sub(1),
            needed: MIN_CYCLES,
        });
    }

    let tendons = &bundle.tendons;
    let radii = &bundle.model.pulley_radii;
    // the spring model's power is positive while the springs return energy,
    // so the ankle rate enters as a plantarflexion rate
    let power: Vec<f64> = (0..time.len())
        .map(|k| ankle_power(ankle[k], knee[k], -ankle_rate[k], tendons, radii))
        .collect();
    let tendon_power: Vec<f64> = (0..time.len())
        .map(|k| (sol[k] + gas[k]) * ankle_rate[k] + gas_knee[k] * knee_rate[k])
        .collect();
    let electric_all = electrical_power(
        &log,
        bundle.settings.standby_power,
        bundle.settings.winding_resistance,
    )?;
    let electric = electric_all[window.clone()].to_vec();

    let deg = |v: &[f64]| v.iter().map(|x| x.to_degrees()).collect::<Vec<_>>();
    let signals = [
        deg(&hip),
        deg(&knee),
        deg(&ankle),
        power.clone(),
        tendon_power,
        electric.clone(),
    ];
    let curves = signals
        .iter()
        .map(|s| segment_and_average(s, &events, options.bins))
        .collect::<Result<Vec<_>>>()?;

    let first = events[0];
    let last = *events.last().unwrap();
    let span = time[last] - time[first];
    let cycles = events.len() - 1;
    let cycle_duration = span / cycles as f64;
    let vx = cut("trunk_vx")?;
    let speed = walking_speed(&vx[first..last]);
    let mean_power = mean_positive(&electric[first..last]);
    let (total_cot, net_cot) = cost_of_transport(
        mean_power,
        bundle.model.total_mass,
        speed,
        bundle.settings.standby_power,
    )?;
    let amp = power_amplification(&curves[3].mean);

    let toe_offs = toe_off_fractions(&swing, &events);
    let toe_off = if toe_offs.is_empty() {
        f64::NAN
    } else {
        toe_offs.iter().sum::<f64>() / toe_offs.len() as f64
    };
    let bins = options.bins;
    let toe_off_bin = if toe_off.is_finite() {
        ((toe_off * bins as f64).round() as usize).min(bins - 1)
    } else {
        bins - 1
    };
    let coordination = knee_ankle_phase_curve(&curves[1].mean, &curves[2].mean, toe_off_bin)?;
    let pct = |b: usize| 100.0 * b as f64 / bins as f64;

    let metrics = GaitMetrics {
        schema_version: SCHEMA_VERSION,
        generator: GENERATOR.to_string(),
        configuration: bundle.name().as_str().to_string(),
        side: options.side,
        cycles,
        cycle_duration,
        speed,
        stride_length: speed * cycle_duration,
        amplification: amp.ratio,
        positive_peak_power: amp.positive_peak,
        negative_peak_power: amp.negative_peak,
        positive_peak_timing: amp.positive_peak_timing,
        negative_peak_timing: amp.negative_peak_timing,
        mean_positive_power: mean_power,
        total_cot,
        net_cot,
        toe_off_timing: 100.0 * toe_off,
        ankle_at_knee_onset: coordination.ankle_at_knee_onset,
        knee_at_push_off: coordination.knee_at_push_off,
        knee_onset_timing: pct(coordination.knee_onset_bin),
        push_off_timing: pct(coordination.push_off_bin),
    };
    Ok(GaitReport {
        metrics,
        curves,
        coordination,
    })
}

/// Keep the longest run of consecutive cycles whose durations stay within
/// `tolerance` of the median.
fn regular_cycles(events: &[usize], time: &[f64], tolerance: f64) -> Vec<usize> {
    if events.len() < 2 {
        return events.to_vec();
    }
    let mut durations: Vec<f64> = events.windows(2).map(|w| time[w[1]] - time[w[0]]).collect();
    let ok: Vec<bool> = {
        let mut sorted = durations.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        durations
            .drain(..)
            .map(|d| (d - median).abs() <= tolerance * median)
            .collect()
    };
    let (mut best, mut run_start) = ((0, 0), 0);
    for i in 0..=ok.len() {
        if i == ok.len() || !ok[i] {
            if i - run_start > best.1 - best.0 {
                best = (run_start, i);
            }
            run_start = i + 1;
        }
    }
    events[best.0..=best.1.min(events.len() - 1)].to_vec()
}

impl GaitReport {
    pub fn curves_csv(&self) -> String {
        let bins = self.curves.first().map_or(0, |c| c.mean.len());
        let mut out = format!("{CURVES_BANNER}{}\n", self.metrics.schema_version);
        out.push_str("phase [%]");
        for (name, unit) in CURVE_CHANNELS {
            write!(out, ",{name}_mean [{unit}],{name}_std [{unit}]").unwrap();
        }
        out.push('\n');
        for b in 0..bins {
            write!(out, "{}", 100.0 * b as f64 / bins as f64).unwrap();
            for c in &self.curves {
                write!(out, ",{},{}", c.mean[b], c.std[b]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn coordination_csv(&self) -> String {
        let mut out = format!(
            "# tendon-biped knee-ankle coordination, schema {}\n",
            self.metrics.schema_version
        );
        out.push_str("phase [%],knee [deg],ankle [deg],marker\n");
        let n = self.coordination.path.len();
        for (b, (k, a)) in self.coordination.path.iter().enumerate() {
            let marker = if b == 0 {
                "touchdown"
            } else if b == self.coordination.knee_onset_bin {
                "knee_onset"
            } else if b == self.coordination.push_off_bin {
                "push_off"
            } else if (k, a) == (&self.coordination.toe_off.0, &self.coordination.toe_off.1) {
                "toe_off"
            } else {
                ""
            };
            writeln!(out, "{},{k},{a},{marker}", 100.0 * b as f64 / n as f64).unwrap();
        }
        out
    }

    pub fn metrics_json(&self) -> String {
        serde_json::to_string_pretty(&self.metrics).expect("metrics are plain data") + "\n"
    }

    /// Write `curves.csv`, `coordination.csv` and `metrics.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("curves.csv", self.curves_csv()),
            ("coordination.csv", self.coordination_csv()),
            ("metrics.json", self.metrics_json()),
        ];
        let mut written = Vec::new();
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Read a metrics file, checking its schema version.
pub fn load_metrics(path: &Path) -> Result<GaitMetrics> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::MalformedLog {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    let version = value
        .get("schema_version")
        .cloned()
        .unwrap_or(serde_json::Value::Null);
    if version.as_u64() != Some(SCHEMA_VERSION as u64) {
        return Err(Error::SchemaMismatch {
            path: path.display().to_string(),
            expected: SCHEMA_VERSION,
            found: version.to_string(),
        });
    }
    serde_json::from_value(value).map_err(|e| Error::MalformedLog {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphology::{ConfigName, RobotModel};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn radii() -> PulleyRadii {
        RobotModel::with_total_mass(2.22).unwrap().pulley_radii
    }

    #[test]
    fn ankle_power_examples() {
        let sol = TendonConfig::preset(ConfigName::Sol);
        let gs = TendonConfig::preset(ConfigName::GasSol);
        assert_eq!(ankle_power(0.3, 0.1, 0.0, &gs, &radii()), 0.0);
        assert_relative_eq!(
            ankle_power(0.1, 0.0, 1.0, &sol, &radii()),
            0.10309,
            epsilon = 1e-5
        );
        assert_relative_eq!(
            ankle_power(0.1, 0.05, 2.0, &gs, &radii()),
            0.17576,
            epsilon = 1e-5
        );
        // below the GAS engagement only the SOL term remains
        assert_relative_eq!(
            ankle_power(0.05, 0.1, 1.0, &gs, &radii()),
            4500.0 * 0.013f64.powi(2) * 0.05,
            epsilon = 1e-12
        );
    }

    #[test]
    fn amplification_of_a_sine_is_one() {
        let curve: Vec<f64> = (0..1000)
            .map(|i| (2.0 * PI * i as f64 / 1000.0).sin())
            .collect();
        let a = power_amplification(&curve);
        assert_relative_eq!(a.ratio.unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(a.positive_peak_timing, 25.0);
        assert_relative_eq!(a.negative_peak_timing, 75.0);
    }

    #[test]
    fn amplification_needs_both_signs() {
        assert_eq!(power_amplification(&[0.0, 1.0, 2.0]).ratio, None);
    }

    #[test]
    fn froude_examples() {
        let f = froude_speeds(0.35).unwrap();
        assert_relative_eq!(f.v_max, 1.853, epsilon = 1e-3);
        assert_relative_eq!(f.transition, 1.235, epsilon = 1e-3);
        assert_relative_eq!(f.test_speed, 0.618, epsilon = 1e-3);
        assert_relative_eq!(
            froude_speeds(1.0 / 9.81).unwrap().v_max,
            1.0,
            epsilon = 1e-12
        );
        assert!(froude_speeds(0.0).is_err());
    }

    #[test]
    fn cot_examples() {
        let (total, net) = cost_of_transport(18.0, 2.22, 0.55, 9.0).unwrap();
        assert_relative_eq!(total, 1.503, epsilon = 1e-3);
        assert_relative_eq!(net, 0.751, epsilon = 1e-3);
        assert_eq!(cost_of_transport(0.0, 2.0, 0.5, 0.0).unwrap().0, 0.0);
        assert!(cost_of_transport(18.0, 2.22, 0.0, 9.0).is_err());
    }

    #[test]
    fn two_cycle_statistics() {
        let c = 0.8;
        let a = average(&[vec![1.0, 2.0], vec![1.0 + c, 2.0 + c]]);
        assert_relative_eq!(a.mean[0], 1.0 + c / 2.0);
        assert_relative_eq!(a.std[0], c / 2.0);
    }

    #[test]
    fn touchdowns_on_a_triangle_wave() {
        // ankle falls for 0.5 s then rises for 0.5 s, every second
        let time: Vec<f64> = (0..5000).map(|k| k as f64 * 1e-3).collect();
        let rate: Vec<f64> = time
            .iter()
            .map(|t| if t % 1.0 < 0.5 { -1.0 } else { 1.0 })
            .collect();
        let ev = detect_touchdowns(&time, &rate, None).unwrap();
        let at: Vec<f64> = ev.iter().map(|&k| time[k]).collect();
        assert_eq!(at.len(), 5);
        for (i, t) in at.iter().enumerate() {
            assert_relative_eq!(*t, 0.5 + i as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_ankle_has_no_touchdowns() {
        let time: Vec<f64> = (0..3000).map(|k| k as f64 * 1e-3).collect();
        let rate = vec![0.0; 3000];
        assert!(matches!(
            detect_touchdowns(&time, &rate, None),
            Err(Error::InsufficientCycles { .. })
        ));
    }

    #[test]
    fn coordination_markers() {
        let bins = 100;
        // knee held at 2° until 60 %, then a flexion bump; ankle peaks at 50 %
        let knee: Vec<f64> = (0..bins)
            .map(|b| {
                let s = b as f64 / bins as f64;
                if s < 0.6 {
                    2.0
                } else {
                    2.0 + 60.0 * ((s - 0.6) / 0.4 * PI).sin()
                }
            })
            .collect();
        let ankle: Vec<f64> = (0..bins)
            .map(|b| 10.0 - 40.0 * (b as f64 / bins as f64 - 0.5).powi(2))
            .collect();
        let c = knee_ankle_phase_curve(&knee, &ankle, 70).unwrap();
        assert_eq!(c.push_off_bin, 50);
        assert_eq!(c.knee_at_push_off, 2.0);
        assert_eq!(c.knee_onset_bin, 61);
        assert_relative_eq!(c.ankle_at_knee_onset, ankle[61]);
        assert_eq!(c.touchdown, (knee[0], ankle[0]));
    }
}
