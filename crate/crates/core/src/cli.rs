//! Command-line front end: `run`, `analyze`, `compare` and `trajectories`.
//!
//! Exit codes are 0 on success, 1 for domain errors (bad configuration, fall,
//! analysis failure, I/O) and 2 for usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{analyze, load_metrics, AnalysisOptions, GaitMetrics, GaitReport, Side};
use crate::config::{ConfigFile, CpgSection, SimSection};
use crate::cpg::{trajectory, TRAJECTORY_COLUMNS};
use crate::dynamics::run_trial;
use crate::error::{Error, Result};
use crate::log::{TrialLog, SCHEMA_VERSION};
use crate::ConfigBundle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const TRAJECTORY_BANNER: &str = "# tendon-biped cpg trajectories, schema ";

#[derive(Debug, Parser)]
#[command(
    name = "tendon-biped",
    version,
    about = "Tendon-driven biped simulator and gait analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one or more configurations and write trial logs.
    Run(RunArgs),
    /// Analyze a trial log into averaged curves and gait metrics.
    Analyze(AnalyzeArgs),
    /// Tabulate metrics of two or more analyzed trials.
    Compare(CompareArgs),
    /// Dump the commanded joint trajectories of the pattern generator.
    Trajectories(TrajectoryArgs),
}

/// Pattern-generator overrides, named after the controller parameters.
#[derive(Debug, Clone, Default, Args)]
struct CpgOverrides {
    /// Oscillator frequency, Hz.
    #[arg(long)]
    frequency: Option<f64>,
    #[arg(long)]
    hip_duty_factor: Option<f64>,
    #[arg(long)]
    knee_duty_factor: Option<f64>,
    /// deg
    #[arg(long)]
    hip_amplitude: Option<f64>,
    /// deg
    #[arg(long)]
    knee_amplitude: Option<f64>,
    /// deg
    #[arg(long)]
    hip_offset: Option<f64>,
    /// deg
    #[arg(long)]
    knee_offset: Option<f64>,
    /// Fraction of the cycle the hip holds at the end of swing.
    #[arg(long)]
    hip_swing_steady: Option<f64>,
    #[arg(long)]
    coupling_gain: Option<f64>,
}

impl CpgOverrides {
    fn merge_into(&self, section: &mut CpgSection) {
        macro_rules! set {
            ($($f:ident),*) => { $(if self.$f.is_some() { section.$f = self.$f; })* };
        }
        set!(
            frequency,
            hip_duty_factor,
            knee_duty_factor,
            hip_amplitude,
            knee_amplitude,
            hip_offset,
            knee_offset,
            hip_swing_steady,
            coupling_gain
        );
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Comma-separated presets (GAS+SOL, SOL, GAS).
    #[arg(long, value_delimiter = ',')]
    preset: Vec<String>,
    /// Configuration file; may be repeated.
    #[arg(long)]
    config: Vec<PathBuf>,
    /// Trial duration, s.
    #[arg(long)]
    duration: Option<f64>,
    /// Start of the steady-state window, s.
    #[arg(long)]
    settle_time: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Trials simulated at once (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    cpg: CpgOverrides,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Trial log (`.csv`, with its `.meta.json` sidecar alongside).
    log: PathBuf,
    /// Report directory (default: `<log stem>.report` next to the log).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "left")]
    side: SideArg,
    /// Resampling rate, Hz.
    #[arg(long, default_value_t = 1000.0)]
    rate: f64,
    #[arg(long, default_value_t = crate::analysis::MAX_CYCLES)]
    max_cycles: usize,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// `metrics.json` files or report directories containing one.
    reports: Vec<PathBuf>,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrajectoryArgs {
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of cycles to dump.
    #[arg(long, default_value_t = 1.0)]
    cycles: f64,
    /// Sampling interval, s.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cpg: CpgOverrides,
}

/// Parse `args` (including the program name), run the command and return the
/// process exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Trajectories(a) => cmd_trajectories(&a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::UnknownPreset(_) => EXIT_USAGE,
                _ => EXIT_DOMAIN,
            }
        }
    }
}

/// Write to stdout. A closed pipe (`| head`) is not an error worth reporting.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

/// File stem for a configuration's outputs.
pub fn output_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| match c {
            '+' => '-',
            c if c.is_ascii_alphanumeric() || c == '-' || c == '_' => c.to_ascii_lowercase(),
            _ => '_',
        })
        .collect()
}

struct TrialJob {
    label: String,
    bundle: ConfigBundle,
}

fn overlay(file: &mut ConfigFile, run: &RunArgs) {
    let mut cpg = file.cpg.take().unwrap_or_default();
    run.cpg.merge_into(&mut cpg);
    if cpg != CpgSection::default() {
        file.cpg = Some(cpg);
    }
    let mut sim = file.sim.take().unwrap_or_default();
    if run.duration.is_some() {
        sim.duration = run.duration;
    }
    if run.settle_time.is_some() {
        sim.settle_time = run.settle_time;
    }
    if sim != SimSection::default() {
        file.sim = Some(sim);
    }
}

fn collect_jobs(run: &RunArgs) -> Result<Vec<TrialJob>> {
    if run.preset.is_empty() && run.config.is_empty() {
        return Err(Error::invalid("give at least one --preset or --config"));
    }
    let mut jobs = Vec::new();
    for p in &run.preset {
        let name = crate::ConfigName::parse_preset(p)?;
        let mut file = ConfigFile {
            preset: Some(name.as_str().to_string()),
            ..Default::default()
        };
        overlay(&mut file, run);
        jobs.push(TrialJob {
            label: name.as_str().to_string(),
            bundle: file.resolve()?,
        });
    }
    for path in &run.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut file = ConfigFile::parse(&text, &path.display().to_string())?;
        overlay(&mut file, run);
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "config".into());
        jobs.push(TrialJob {
            label,
            bundle: file.resolve()?,
        });
    }
    let mut stems: Vec<String> = jobs.iter().map(|j| output_stem(&j.label)).collect();
    stems.sort();
    if let Some(w) = stems.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::invalid(format!(
            "two trials would write the same output `{}`",
            w[0]
        )));
    }
    Ok(jobs)
}

/// Outcome of one simulated configuration.
struct TrialReport {
    label: String,
    csv: PathBuf,
    log: std::result::Result<TrialLog, Error>,
}

fn simulate(job: &TrialJob, out: &Path) -> TrialReport {
    let csv = out.join(format!("{}.csv", output_stem(&job.label)));
    let log = run_trial(&job.bundle).and_then(|outcome| {
        outcome.log.save(out, &output_stem(&job.label))?;
        outcome.into_result()
    });
    TrialReport {
        label: job.label.clone(),
        csv,
        log,
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let jobs = collect_jobs(args)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let workers = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);

    let mut reports = Vec::with_capacity(jobs.len());
    for chunk in jobs.chunks(workers) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|job| s.spawn(|| simulate(job, &args.out)))
                .collect();
            for h in handles {
                reports.push(h.join().expect("trial worker panicked"));
            }
        });
    }

    let mut first_error = None;
    let mut text = String::new();
    for r in reports {
        match r.log {
            Ok(log) => {
                let steady = log.steady_rows().len();
                let _ = writeln!(
                    text,
                    "{}: {:.3} s simulated, {} rows ({} steady) -> {}",
                    r.label,
                    log.end_time() + log.meta.timestep,
                    log.rows(),
                    steady,
                    r.csv.display()
                );
                if steady == 0 {
                    text.push_str(
                        "  note: no steady-state rows; the trial is too short to analyze\n",
                    );
                }
            }
            Err(e) => {
                eprintln!("{}: {e} (partial log kept at {})", r.label, r.csv.display());
                first_error.get_or_insert(e);
            }
        }
    }
    emit(&text)?;
    first_error.map_or(Ok(()), Err)
}

fn default_report_dir(log: &Path) -> PathBuf {
    let stem = log
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    log.with_file_name(format!("{stem}.report"))
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let log = TrialLog::load(&args.log)?;
    let bundle = log.meta.bundle()?;
    let options = AnalysisOptions {
        rate: args.rate,
        side: match args.side {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        },
        max_cycles: args.max_cycles,
        ..AnalysisOptions::default()
    };
    let report = analyze(&log, &bundle, &options)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| default_report_dir(&args.log));
    report.save(&dir)?;
    emit(&format!(
        "{}report written to {}\n",
        summary(&report),
        dir.display()
    ))
}

fn summary(report: &GaitReport) -> String {
    let m = &report.metrics;
    let mut s = String::new();
    let _ = writeln!(s, "configuration     {}", m.configuration);
    let _ = writeln!(s, "cycles            {}", m.cycles);
    let _ = writeln!(s, "speed             {:.4} m/s", m.speed);
    let _ = writeln!(s, "amplification     {}", fmt_opt(m.amplification));
    let _ = writeln!(s, "total CoT         {:.4}", m.total_cot);
    let _ = writeln!(s, "net CoT           {:.4}", m.net_cot);
    let _ = writeln!(
        s,
        "positive peak     {:.3} W at {:.1} %",
        m.positive_peak_power, m.positive_peak_timing
    );
    let _ = writeln!(
        s,
        "negative peak     {:.3} W at {:.1} %",
        m.negative_peak_power, m.negative_peak_timing
    );
    let _ = writeln!(s, "toe-off           {:.1} %", m.toe_off_timing);
    s
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

/// Side-by-side metrics of several analyzed trials.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub reports: Vec<GaitMetrics>,
}

/// Rows of the comparison table: label and accessor.
type Row = (&'static str, fn(&GaitMetrics) -> Option<f64>);

const ROWS: [Row; 4] = [
    ("amplification", |m| m.amplification),
    ("speed_m_per_s", |m| Some(m.speed)),
    ("total_cot", |m| Some(m.total_cot)),
    ("net_cot", |m| Some(m.net_cot)),
];

/// One qualitative ordering check across configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderingCheck {
    pub description: String,
    /// `None` when a configuration it needs is absent.
    pub holds: Option<bool>,
}

impl Comparison {
    pub fn new(reports: Vec<GaitMetrics>) -> Result<Self> {
        if reports.len() < 2 {
            return Err(Error::invalid(format!(
                "compare needs at least two reports (got {})",
                reports.len()
            )));
        }
        if let Some(m) = reports.iter().find(|m| m.schema_version != SCHEMA_VERSION) {
            return Err(Error::SchemaMismatch {
                path: m.configuration.clone(),
                expected: SCHEMA_VERSION,
                found: m.schema_version.to_string(),
            });
        }
        Ok(Self { reports })
    }

    /// Difference of each report from the first, per row.
    fn delta(&self, row: &Row, i: usize) -> Option<f64> {
        Some((row.1)(&self.reports[i])? - (row.1)(&self.reports[0])?)
    }

    pub fn to_text(&self) -> String {
        let names: Vec<&str> = self
            .reports
            .iter()
            .map(|m| m.configuration.as_str())
            .collect();
        let width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(10) + 2;
        let mut s = String::new();
        let _ = write!(s, "{:<16}", "metric");
        for n in &names {
            let _ = write!(s, "{n:>width$}");
        }
        for n in names.iter().skip(1) {
            let _ = write!(s, "{:>width$}", format!("Δ{n}"));
        }
        s.push('\n');
        for row in &ROWS {
            let _ = write!(s, "{:<16}", row.0);
            for m in &self.reports {
                let _ = write!(s, "{:>width$}", fmt_opt((row.1)(m)));
            }
            for i in 1..self.reports.len() {
                let _ = write!(s, "{:>width$}", fmt_opt(self.delta(row, i)));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# tendon-biped comparison, schema {SCHEMA_VERSION}\n");
        s.push_str("metric");
        for m in &self.reports {
            let _ = write!(s, ",{}", m.configuration);
        }
        for m in self.reports.iter().skip(1) {
            let _ = write!(s, ",delta_{}", m.configuration);
        }
        s.push('\n');
        let cell = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for row in &ROWS {
            s.push_str(row.0);
            for m in &self.reports {
                let _ = write!(s, ",{}", cell((row.1)(m)));
            }
            for i in 1..self.reports.len() {
                let _ = write!(s, ",{}", cell(self.delta(row, i)));
            }
            s.push('\n');
        }
        s
    }

    fn find(&self, name: &str) -> Option<&GaitMetrics> {
        self.reports.iter().find(|m| m.configuration == name)
    }

    /// Orderings expected of the three tendon configurations.
    pub fn qualitative_checks(&self) -> Vec<OrderingCheck> {
        let both = self.find("GAS+SOL").zip(self.find("SOL"));
        let all = self
            .find("GAS+SOL")
            .zip(self.find("SOL"))
            .zip(self.find("GAS"));
        let amp = |m: &GaitMetrics| m.amplification;
        let in_window = |m: &GaitMetrics| (45.0..=65.0).contains(&m.positive_peak_timing);
        vec![
            OrderingCheck {
                description: "amplification > 1 for GAS+SOL and SOL, < 1 for GAS".into(),
                holds: all.map(|((gs, s), g)| {
                    amp(gs).is_some_and(|a| a > 1.0)
                        && amp(s).is_some_and(|a| a > 1.0)
                        && amp(g).is_some_and(|a| a < 1.0)
                }),
            },
            OrderingCheck {
                description: "amplification(SOL) > amplification(GAS+SOL)".into(),
                holds: both.map(|(gs, s)| matches!((amp(s), amp(gs)), (Some(a), Some(b)) if a > b)),
            },
            OrderingCheck {
                description: "GAS is the slowest".into(),
                holds: all.map(|((gs, s), g)| g.speed < gs.speed && g.speed < s.speed),
            },
            OrderingCheck {
                description: "GAS has the highest total CoT".into(),
                holds: all
                    .map(|((gs, s), g)| g.total_cot > gs.total_cot && g.total_cot > s.total_cot),
            },
            OrderingCheck {
                description:
                    "positive ankle-power peak of GAS+SOL and SOL within 45-65 % of the cycle"
                        .into(),
                holds: both.map(|(gs, s)| in_window(gs) && in_window(s)),
            },
        ]
    }
}

fn metrics_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("metrics.json")
    } else {
        p.to_path_buf()
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    if args.reports.len() < 2 {
        return Err(Error::invalid(format!(
            "compare needs at least two reports (got {})",
            args.reports.len()
        )));
    }
    let reports = args
        .reports
        .iter()
        .map(|p| load_metrics(&metrics_path(p)))
        .collect::<Result<Vec<_>>>()?;
    let table = Comparison::new(reports)?;
    let mut text = table.to_text();
    let checks = table.qualitative_checks();
    if checks.iter().any(|c| c.holds.is_some()) {
        text.push('\n');
        for c in checks {
            let verdict = match c.holds {
                Some(true) => "holds",
                Some(false) => "fails",
                None => "n/a",
            };
            let _ = writeln!(text, "{verdict:>6}  {}", c.description);
        }
    }
    emit(&text)?;
    if let Some(path) = &args.csv {
        std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// CSV of the commanded trajectories over `cycles` oscillator periods.
pub fn trajectories_csv(bundle: &ConfigBundle, cycles: f64, dt: f64) -> Result<String> {
    if !(cycles.is_finite() && cycles > 0.0) {
        return Err(Error::invalid(format!(
            "cycles must be positive (got {cycles})"
        )));
    }
    let duration = cycles / bundle.cpg.frequency;
    let samples = trajectory(&bundle.cpg, duration, dt)?;
    let mut s = format!("{TRAJECTORY_BANNER}{SCHEMA_VERSION}\n");
    s.push_str(&TRAJECTORY_COLUMNS.join(","));
    s.push('\n');
    for p in samples {
        let r = &p.reference;
        let row = [
            p.time,
            p.phase[0],
            p.phase[1],
            p.hip_warp[0],
            p.hip_warp[1],
            p.knee_warp[0],
            p.knee_warp[1],
            r.hip_left,
            r.hip_right,
            r.knee_left,
            r.knee_right,
        ];
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    Ok(s)
}

fn cmd_trajectories(args: &TrajectoryArgs) -> Result<()> {
    let mut file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            ConfigFile::parse(&text, &path.display().to_string())?
        }
        None => ConfigFile {
            preset: Some(args.preset.clone().unwrap_or_else(|| "GAS+SOL".into())),
            ..Default::default()
        },
    };
    let mut cpg = file.cpg.take().unwrap_or_default();
    args.cpg.merge_into(&mut cpg);
    file.cpg = Some(cpg);
    let bundle = file.resolve()?;
    let csv = trajectories_csv(&bundle, args.cycles, args.dt)?;
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| Error::io(path, e)),
        None => emit(&csv),
    }
}
