//! Trial logs: a fixed set of named columns sampled once per control period,
//! stored as CSV with a JSON metadata sidecar.
//!
//! File layout:
//!
//! ```text
//! # tendon-biped trial log, schema 1
//! time [s],phase_left [rad],...
//! 0,0,...
//! ```
//!
//! The sidecar `<stem>.meta.json` holds the schema version, the generator
//! version and the fully resolved configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ConfigBundle, ConfigFile};
use crate::dynamics::{joint_index, ControlRecord, ANKLE, HIP, KNEE, TOE, X, Z};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const GENERATOR: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

const LOG_BANNER: &str = "# tendon-biped trial log, schema ";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    fn new(name: impl Into<String>, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.to_string(),
        }
    }

    fn header(&self) -> String {
        format!("{} [{}]", self.name, self.unit)
    }

    fn parse_header(field: &str) -> Option<Self> {
        let (name, rest) = field.split_once(" [")?;
        let unit = rest.strip_suffix(']')?;
        Some(Self::new(name, unit))
    }
}

pub const SIDES: [&str; 2] = ["left", "right"];

/// The fixed column order of a simulated trial log.
pub fn trial_columns() -> Vec<Column> {
    let mut c = vec![
        Column::new("time", "s"),
        Column::new("phase_left", "rad"),
        Column::new("phase_right", "rad"),
        Column::new("trunk_x", "m"),
        Column::new("trunk_z", "m"),
        Column::new("trunk_vx", "m/s"),
        Column::new("trunk_vz", "m/s"),
    ];
    for side in SIDES {
        for j in ["hip", "knee", "ankle", "toe"] {
            c.push(Column::new(format!("{side}_{j}"), "rad"));
        }
        for j in ["hip", "knee", "ankle", "toe"] {
            c.push(Column::new(format!("{side}_{j}_rate"), "rad/s"));
        }
        for j in ["hip", "knee"] {
            c.push(Column::new(format!("{side}_{j}_ref"), "deg"));
        }
        for j in ["hip", "knee"] {
            c.push(Column::new(format!("{side}_{j}_current"), "A"));
        }
        for j in ["hip", "knee"] {
            c.push(Column::new(format!("{side}_{j}_torque"), "N·m"));
        }
        for t in [
            "sol_torque",
            "gas_ankle_torque",
            "gas_knee_torque",
            "vas_torque",
            "toe_spring_torque",
            "toe_tendon_torque",
        ] {
            c.push(Column::new(format!("{side}_{t}"), "N·m"));
        }
        c.push(Column::new(format!("{side}_tendon_energy"), "J"));
        for p in ["heel", "metatarsal", "toe"] {
            c.push(Column::new(format!("{side}_{p}_normal_force"), "N"));
        }
        c.push(Column::new(format!("{side}_friction_force"), "N"));
    }
    c.push(Column::new("steady", "1"));
    c
}

/// Metadata sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub schema_version: u32,
    pub generator: String,
    /// Preset name or `custom`.
    pub configuration: String,
    pub config: ConfigFile,
    pub timestep: f64,
    pub duration: f64,
    /// Start of the steady-state window, s.
    pub settle_time: f64,
    pub samples: usize,
    /// Ran for the full duration without a fall or fault.
    pub completed: bool,
    pub fall_time: Option<f64>,
    pub fault: Option<String>,
}

impl TrialMeta {
    pub fn new(
        bundle: &ConfigBundle,
        completed: bool,
        fall_time: Option<f64>,
        fault: Option<String>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            generator: GENERATOR.to_string(),
            configuration: bundle.name().as_str().to_string(),
            config: ConfigFile::from_bundle(bundle),
            timestep: bundle.settings.timestep,
            duration: bundle.settings.duration,
            settle_time: bundle.settings.settle_time,
            samples: 0,
            completed,
            fall_time,
            fault,
        }
    }

    /// Resolve the embedded configuration.
    pub fn bundle(&self) -> Result<ConfigBundle> {
        self.config.resolve()
    }
}

/// Column-major table of samples.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialLog {
    pub columns: Vec<Column>,
    /// `data[column][row]`
    pub data: Vec<Vec<f64>>,
    pub meta: TrialMeta,
    settle_time: f64,
}

impl TrialLog {
    pub fn for_trial(capacity: usize, settle_time: f64) -> Self {
        let columns = trial_columns();
        let data = columns
            .iter()
            .map(|_| Vec::with_capacity(capacity))
            .collect();
        let meta = TrialMeta {
            schema_version: SCHEMA_VERSION,
            generator: GENERATOR.to_string(),
            configuration: String::new(),
            config: ConfigFile::default(),
            timestep: 0.0,
            duration: 0.0,
            settle_time,
            samples: 0,
            completed: false,
            fall_time: None,
            fault: None,
        };
        Self {
            columns,
            data,
            meta,
            settle_time,
        }
    }

    /// Build a log from explicit columns, for analysis of external data.
    pub fn from_columns(
        columns: Vec<Column>,
        data: Vec<Vec<f64>>,
        meta: TrialMeta,
    ) -> Result<Self> {
        if columns.len() != data.len() {
            return Err(Error::invalid("column count does not match data"));
        }
        let rows = data.first().map_or(0, Vec::len);
        if data.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("columns have different lengths"));
        }
        let settle_time = meta.settle_time;
        Ok(Self {
            columns,
            data,
            meta,
            settle_time,
        })
    }

    pub fn rows(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn end_time(&self) -> f64 {
        self.data
            .first()
            .and_then(|t| t.last().copied())
            .unwrap_or(0.0)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.index_of(name)
            .map(|i| self.data[i].as_slice())
            .ok_or_else(|| Error::Analysis(format!("log has no column `{name}`")))
    }

    pub fn time(&self) -> &[f64] {
        &self.data[0]
    }

    pub fn push_record(&mut self, r: &ControlRecord) {
        let mut row = Vec::with_capacity(self.columns.len());
        row.extend([
            r.time,
            r.phases[0],
            r.phases[1],
            r.q[X],
            r.q[Z],
            r.qd[X],
            r.qd[Z],
        ]);
        for leg in 0..2 {
            for j in [HIP, KNEE, ANKLE, TOE] {
                row.push(r.q[joint_index(leg, j)]);
            }
            for j in [HIP, KNEE, ANKLE, TOE] {
                row.push(r.qd[joint_index(leg, j)]);
            }
            row.extend(r.reference[leg]);
            row.extend(r.current[leg]);
            row.extend(r.torque[leg]);
            let t = &r.diagnostics.tendons[leg];
            row.extend([
                t.tau_ankle_sol,
                t.tau_ankle_gas,
                t.tau_knee_gas,
                t.tau_knee_vas,
                t.tau_toe_spring,
                t.tau_toe_tendon,
                t.stored_energy.total(),
            ]);
            let f = &r.diagnostics.contact_forces[leg];
            row.extend([f[0].y, f[1].y, f[2].y, f[0].x + f[1].x + f[2].x]);
        }
        row.push(if r.time >= self.settle_time { 1.0 } else { 0.0 });
        debug_assert_eq!(row.len(), self.columns.len());
        for (col, v) in self.data.iter_mut().zip(row) {
            col.push(v);
        }
    }

    /// Attach metadata. An incomplete trial has no steady-state window.
    pub fn finish(&mut self, mut meta: TrialMeta) {
        meta.samples = self.rows();
        if !meta.completed {
            if let Some(i) = self.index_of("steady") {
                self.data[i].iter_mut().for_each(|v| *v = 0.0);
            }
        }
        self.settle_time = meta.settle_time;
        self.meta = meta;
    }

    /// Row indices inside the steady-state window.
    pub fn steady_rows(&self) -> std::ops::Range<usize> {
        match self.column("steady") {
            Ok(flags) => {
                let start = flags.iter().position(|&v| v > 0.5).unwrap_or(flags.len());
                let end = flags
                    .iter()
                    .rposition(|&v| v > 0.5)
                    .map_or(start, |e| e + 1);
                start..end
            }
            Err(_) => {
                let start = self.time().partition_point(|&t| t < self.settle_time);
                start..self.rows()
            }
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv_to(&mut out).map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{LOG_BANNER}{}", self.meta.schema_version)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(Column::header))?;
        for row in 0..self.rows() {
            // `Display` for f64 is the shortest form that parses back to the same bits
            w.write_record(self.data.iter().map(|c| c[row].to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<(Vec<Column>, Vec<Vec<f64>>)> {
        let malformed = |message: String| Error::MalformedLog {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let (banner, body) = text
            .split_once('\n')
            .ok_or_else(|| malformed("empty file".into()))?;
        let version = banner
            .strip_prefix(LOG_BANNER)
            .ok_or_else(|| malformed("missing trial-log banner line".into()))?
            .trim();
        if version != SCHEMA_VERSION.to_string() {
            return Err(Error::SchemaMismatch {
                path: path.display().to_string(),
                expected: SCHEMA_VERSION,
                found: version.to_string(),
            });
        }
        let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| malformed(e.to_string()))?
            .clone();
        let columns = headers
            .iter()
            .map(|h| Column::parse_header(h).ok_or_else(|| malformed(format!("bad header `{h}`"))))
            .collect::<Result<Vec<_>>>()?;
        if columns.first().map(|c| c.name.as_str()) != Some("time") {
            return Err(malformed("first column must be `time`".into()));
        }
        let mut data = vec![Vec::new(); columns.len()];
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| malformed(e.to_string()))?;
            for (i, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    malformed(format!("row {}: `{field}` is not a number", line + 1))
                })?;
                data[i].push(v);
            }
        }
        Ok((columns, data))
    }

    /// Write `<dir>/<stem>.csv` and `<dir>/<stem>.meta.json`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let csv_path = dir.join(format!("{stem}.csv"));
        let meta_path = meta_path_for(&csv_path);
        self.write_csv(&csv_path)?;
        let json = serde_json::to_string_pretty(&self.meta).expect("metadata is plain data");
        std::fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))?;
        Ok((csv_path, meta_path))
    }

    /// Load a log and its sidecar.
    pub fn load(csv_path: &Path) -> Result<Self> {
        std::fs::metadata(csv_path).map_err(|e| Error::io(csv_path, e))?;
        let meta_path = meta_path_for(csv_path);
        let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: TrialMeta = serde_json::from_str(&text).map_err(|e| Error::MalformedLog {
            path: meta_path.display().to_string(),
            message: e.to_string(),
        })?;
        if meta.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                path: meta_path.display().to_string(),
                expected: SCHEMA_VERSION,
                found: meta.schema_version.to_string(),
            });
        }
        let (columns, data) = Self::read_csv(csv_path)?;
        let time = &data[0];
        if time.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::MalformedLog {
                path: csv_path.display().to_string(),
                message: "timestamps must be strictly increasing".into(),
            });
        }
        Self::from_columns(columns, data, meta)
    }
}

/// Sidecar path for a log file: `run/gas_sol.csv` → `run/gas_sol.meta.json`.
pub fn meta_path_for(csv_path: &Path) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv_path.with_file_name(format!("{stem}.meta.json"))
}
