//! Standalone-vs-cluster timing experiments.
//!
//! A plan runs each environment `repetitions` times in blocks, in plan
//! order. Cluster runs bind an ephemeral local port, launch `k` workers,
//! and time the job from worker admission to result; standalone runs time
//! load, train and evaluate in one process.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::thread::{self, JoinHandle};

use parlin_core::{percent_reduction, round_half_up, summarize, CoreError, SummaryTable, TimingRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{self, exit, standalone_run, ClusterError, JobResult, JobSpec, Master};

/// Documented in every report: what a wall-clock measurement covers.
pub const TIMING_WINDOW: &str =
    "cluster: from all workers admitted to result ready (assign, load, train, evaluate); \
     standalone: load, train, evaluate";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{label} run {run}: could not launch worker {rank}: {source}")]
    Spawn {
        label: String,
        run: u32,
        rank: u32,
        #[source]
        source: io::Error,
    },

    #[error("{label} run {run}: {source}")]
    Job {
        label: String,
        run: u32,
        #[source]
        source: ClusterError,
    },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Job { source, .. } => source.exit_code(),
            BenchError::Spawn { .. } => exit::JOB_FAILURE,
            _ => exit::DATA,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub label: String,
    #[serde(rename = "workers")]
    pub worker_count: u32,
}

impl Environment {
    pub fn new(worker_count: u32) -> Self {
        Self {
            label: cluster::default_label(worker_count),
            worker_count,
        }
    }
}

/// Standalone followed by one to four workers.
pub fn standard_environments() -> Vec<Environment> {
    (0..=4).map(Environment::new).collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub environments: Vec<Environment>,
    pub repetitions: u32,
    /// Template; the worker count and label are set per environment.
    pub job: JobSpec,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(BenchError::InvalidPlan("repetitions must be at least 1".into()));
        }
        if self.environments.is_empty() {
            return Err(BenchError::InvalidPlan("no environments".into()));
        }
        for (i, env) in self.environments.iter().enumerate() {
            if self.environments[..i].iter().any(|e| e.label == env.label) {
                return Err(BenchError::InvalidPlan(format!("duplicate label `{}`", env.label)));
            }
            if (env.worker_count == 0) != (env.label == "Standalone") {
                return Err(BenchError::InvalidPlan(format!(
                    "`{}` with {} workers: only `Standalone` runs without workers",
                    env.label, env.worker_count
                )));
            }
            if env.label.is_empty() || env.label.contains([',', '"', '\n', '\r']) {
                return Err(BenchError::InvalidPlan(format!("label `{}` is not CSV-safe", env.label)));
            }
        }
        Ok(())
    }
}

/// A running worker, either a child process or an in-process thread.
pub enum WorkerHandle {
    Process(Child),
    Thread(JoinHandle<cluster::Result<()>>),
}

impl WorkerHandle {
    fn finish(self, abort: bool) {
        match self {
            WorkerHandle::Process(mut child) => {
                if abort {
                    let _ = child.kill();
                }
                let _ = child.wait();
            }
            // Threads exit on their own once the master closes or shuts down.
            WorkerHandle::Thread(handle) => {
                let _ = handle.join();
            }
        }
    }
}

pub trait WorkerLauncher {
    fn launch(&self, master: SocketAddr, rank: u32) -> io::Result<WorkerHandle>;
}

/// Starts `<exe> worker --master <addr> --rank <rank>` processes.
#[derive(Debug, Clone)]
pub struct ProcessLauncher {
    pub exe: PathBuf,
}

impl ProcessLauncher {
    pub fn new(exe: impl Into<PathBuf>) -> Self {
        Self { exe: exe.into() }
    }

    pub fn current_exe() -> io::Result<Self> {
        Ok(Self::new(std::env::current_exe()?))
    }
}

impl WorkerLauncher for ProcessLauncher {
    fn launch(&self, master: SocketAddr, rank: u32) -> io::Result<WorkerHandle> {
        Command::new(&self.exe)
            .arg("worker")
            .arg("--master")
            .arg(master.to_string())
            .arg("--rank")
            .arg(rank.to_string())
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .spawn()
            .map(WorkerHandle::Process)
    }
}

/// Runs workers as threads of the current process.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThreadLauncher;

impl WorkerLauncher for ThreadLauncher {
    fn launch(&self, master: SocketAddr, rank: u32) -> io::Result<WorkerHandle> {
        let addr = master.to_string();
        thread::Builder::new()
            .name(format!("worker-{rank}"))
            .spawn(move || cluster::worker_run(&addr, rank))
            .map(WorkerHandle::Thread)
    }
}

/// One job with `workers` workers (zero runs standalone).
pub fn run_once(job: &JobSpec, env: &Environment, run: u32, launcher: &dyn WorkerLauncher) -> Result<JobResult> {
    let job = JobSpec {
        expected_workers: env.worker_count,
        environment_label: Some(env.label.clone()),
        ..job.clone()
    };
    let job_err = |source| BenchError::Job {
        label: env.label.clone(),
        run,
        source,
    };
    if env.worker_count == 0 {
        return standalone_run(&job).map_err(job_err);
    }
    let master = Master::bind("127.0.0.1:0").map_err(|e| job_err(e.into()))?;
    let addr = master.local_addr().map_err(|e| job_err(e.into()))?;
    let mut workers = Vec::with_capacity(env.worker_count as usize);
    for rank in 0..env.worker_count {
        match launcher.launch(addr, rank) {
            Ok(w) => workers.push(w),
            Err(source) => {
                drop(master);
                workers.into_iter().for_each(|w: WorkerHandle| w.finish(true));
                return Err(BenchError::Spawn {
                    label: env.label.clone(),
                    run,
                    rank,
                    source,
                });
            }
        }
    }
    let result = master.run(&job);
    let failed = result.is_err();
    workers.into_iter().for_each(|w| w.finish(failed));
    result.map_err(job_err)
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub records: Vec<TimingRecord>,
    pub results: Vec<JobResult>,
}

/// Runs every environment `repetitions` times, in plan order and in
/// blocks. The first failure aborts the plan.
pub fn run_plan(plan: &ExperimentPlan, launcher: &dyn WorkerLauncher) -> Result<PlanOutcome> {
    plan.validate()?;
    let mut records = Vec::new();
    let mut results = Vec::new();
    for env in &plan.environments {
        for run in 1..=plan.repetitions {
            let result = run_once(&plan.job, env, run, launcher)?;
            log::info!("{} run {run}: {:.3}s, rmse {:.4}", env.label, result.wall_seconds, result.eval.rmse);
            records.push(TimingRecord {
                environment_label: env.label.clone(),
                run_index: run,
                wall_seconds: result.wall_seconds,
            });
            results.push(result);
        }
    }
    Ok(PlanOutcome { records, results })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const RECORDS_HEADER: &str = "environment,run_index,wall_seconds";

pub fn records_csv(records: &[TimingRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{},{},{}", r.environment_label, r.run_index, r.wall_seconds);
    }
    out
}

pub fn write_records(records: &[TimingRecord], path: &Path) -> Result<()> {
    write_file(path, &records_csv(records))
}

pub fn read_records(path: &Path) -> Result<Vec<TimingRecord>> {
    let text = read_file(path)?;
    let bad = |reason: String| BenchError::Parse {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    if lines.next() != Some(RECORDS_HEADER) {
        return Err(bad(format!("expected header `{RECORDS_HEADER}`")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            let [label, run, secs] = cells[..] else {
                return Err(bad(format!("line {}: expected 3 cells", i + 2)));
            };
            let run_index = run.parse().map_err(|_| bad(format!("line {}: bad run index `{run}`", i + 2)))?;
            let wall_seconds: f64 = secs
                .parse()
                .ok()
                .filter(|s: &f64| *s > 0.0 && s.is_finite())
                .ok_or_else(|| bad(format!("line {}: bad wall time `{secs}`", i + 2)))?;
            Ok(TimingRecord {
                environment_label: label.to_string(),
                run_index,
                wall_seconds,
            })
        })
        .collect()
}

/// `environment,run_1..run_R,average`, full-precision reals.
pub fn summary_csv(table: &SummaryTable) -> String {
    let width = table.max_runs();
    let mut out = String::from("environment");
    for i in 1..=width {
        let _ = write!(out, ",run_{i}");
    }
    out.push_str(",average\n");
    for row in &table.rows {
        out.push_str(&row.label);
        for i in 0..width {
            out.push(',');
            if let Some(t) = row.runs.get(i) {
                let _ = write!(out, "{t}");
            }
        }
        let _ = writeln!(out, ",{}", row.average);
    }
    out
}

/// Records back out of a `summary.csv` (run indices from column position).
pub fn parse_summary_csv(path: &Path) -> Result<Vec<TimingRecord>> {
    let text = read_file(path)?;
    let bad = |reason: String| BenchError::Parse {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    if header.len() < 2 || header[0] != "environment" || header.last() != Some(&"average") {
        return Err(bad("not a summary table".into()));
    }
    let mut records = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(bad(format!("row `{line}` has {} cells", cells.len())));
        }
        for (i, cell) in cells[1..cells.len() - 1].iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            let wall_seconds = cell.parse().map_err(|_| bad(format!("bad time `{cell}`")))?;
            records.push(TimingRecord {
                environment_label: cells[0].to_string(),
                run_index: i as u32 + 1,
                wall_seconds,
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledAverage {
    pub label: String,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub baseline: LabeledAverage,
    pub best: LabeledAverage,
    /// Unrounded.
    pub percent_reduction: f64,
    /// Half-up to two decimals.
    pub percent_reduction_display: String,
    pub averages: Vec<LabeledAverage>,
    pub timing_window: String,
}

impl Report {
    pub fn from_table(table: &SummaryTable) -> Result<Self> {
        let pick = |r: &parlin_core::SummaryRow| LabeledAverage {
            label: r.label.clone(),
            average: r.average,
        };
        let baseline = table.baseline().map(pick).ok_or(CoreError::Empty)?;
        let best = table.best().map(pick).ok_or(CoreError::Empty)?;
        let reduction = percent_reduction(baseline.average, best.average)?;
        Ok(Self {
            percent_reduction_display: format!("{:.2}", round_half_up(reduction, 2)),
            percent_reduction: reduction,
            baseline,
            best,
            averages: table.rows.iter().map(pick).collect(),
            timing_window: TIMING_WINDOW.to_string(),
        })
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart of average seconds per environment, in plan order.
pub fn scaling_svg(table: &SummaryTable) -> String {
    const W: f64 = 720.0;
    const H: f64 = 440.0;
    const LEFT: f64 = 80.0;
    const RIGHT: f64 = 30.0;
    const TOP: f64 = 50.0;
    const BOTTOM: f64 = 80.0;
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let n = table.rows.len().max(1);
    let y_max = table.rows.iter().map(|r| r.average).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE) * 1.15;
    let x_at = |i: usize| LEFT + plot_w * (i as f64 + 0.5) / n as f64;
    let y_at = |v: f64| TOP + plot_h * (1.0 - v / y_max);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="16">Average computation time per environment</text>"#,
        W / 2.0
    );
    // Axes.
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#,
        LEFT + plot_w,
        y = TOP + plot_h
    );
    for tick in 0..=4 {
        let v = y_max * tick as f64 / 4.0;
        let y = y_at(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{y}" text-anchor="middle" transform="rotate(-90 20 {y})">Average wall time (s)</text>"#,
        y = TOP + plot_h / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">Environment</text>"#,
        LEFT + plot_w / 2.0,
        H - 20.0
    );

    let points: Vec<String> = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{:.2},{:.2}", x_at(i), y_at(r.average)))
        .collect();
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="2" points="{}"/>"##,
        points.join(" ")
    );
    for (i, r) in table.rows.iter().enumerate() {
        let (x, y) = (x_at(i), y_at(r.average));
        let _ = writeln!(svg, r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#1f77b4"/>"##);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{:.2}</text>"#,
            y - 10.0,
            r.average
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 20.0,
            xml_escape(&r.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `summary.csv`, `scaling.svg` and `report.json` into `dir`.
pub fn emit_report(table: &SummaryTable, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let report = Report::from_table(table)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    let files = [
        ("summary.csv", summary_csv(table)),
        ("scaling.svg", scaling_svg(table)),
        ("report.json", json + "\n"),
    ];
    files
        .into_iter()
        .map(|(name, contents)| {
            let path = dir.join(name);
            write_file(&path, &contents).map(|()| path)
        })
        .collect()
}

/// Summarizes and renders records in one step.
pub fn render(records: &[TimingRecord], dir: &Path) -> Result<(SummaryTable, Vec<PathBuf>)> {
    let table = summarize(records)?;
    let paths = emit_report(&table, dir)?;
    Ok((table, paths))
}

/// Human-readable table with two-decimal times.
pub fn format_table(table: &SummaryTable) -> String {
    let mut out = String::new();
    let width = table.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(11);
    let _ = write!(out, "{:<width$}", "Environment");
    for i in 1..=table.max_runs() {
        let _ = write!(out, " {:>9}", format!("run {i}"));
    }
    let _ = writeln!(out, " {:>9}", "average");
    for row in &table.rows {
        let _ = write!(out, "{:<width$}", row.label);
        for t in &row.runs {
            let _ = write!(out, " {t:>9.2}");
        }
        for _ in row.runs.len()..table.max_runs() {
            let _ = write!(out, " {:>9}", "");
        }
        let _ = writeln!(out, " {:>9.2}", row.average);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> Vec<TimingRecord> {
        let rows: [(&str, [f64; 5]); 5] = [
            ("Standalone", [137.4, 128.6, 130.7, 126.7, 131.7]),
            ("Cluster_1", [123.9, 124.1, 123.7, 122.6, 123.3]),
            ("Cluster_2", [100.4, 97.5, 97.6, 95.3, 99.5]),
            ("Cluster_3", [87.1, 83.5, 87.2, 85.5, 83.7]),
            ("Cluster_4", [82.9, 74.1, 81.2, 78.9, 77.5]),
        ];
        rows.iter()
            .flat_map(|(label, times)| {
                times.iter().enumerate().map(move |(i, t)| TimingRecord {
                    environment_label: label.to_string(),
                    run_index: i as u32 + 1,
                    wall_seconds: *t,
                })
            })
            .collect()
    }

    #[test]
    fn table_one_report() {
        let dir = tempfile::tempdir().unwrap();
        let (table, paths) = render(&table1(), dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let expected = [131.02, 123.52, 98.06, 85.4, 78.92];
        for (row, want) in table.rows.iter().zip(expected) {
            assert!((row.average - want).abs() <= 1e-12 * want, "{}", row.label);
        }
        let report: Report = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(report.percent_reduction_display, "39.76");
        assert!((report.percent_reduction - 39.764_921_386_048).abs() < 1e-9);
        assert_eq!(report.baseline.label, "Standalone");
        assert_eq!(report.best.label, "Cluster_4");

        let csv = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(csv.starts_with("environment,run_1,run_2,run_3,run_4,run_5,average\n"));
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn summary_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let (table, _) = render(&table1(), dir.path()).unwrap();
        let again = summarize(&parse_summary_csv(&dir.path().join("summary.csv")).unwrap()).unwrap();
        assert_eq!(again, table);
    }

    #[test]
    fn records_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let mut records = table1();
        records[3].wall_seconds = 0.1 + 0.2;
        write_records(&records, &path).unwrap();
        assert_eq!(read_records(&path).unwrap(), records);
    }

    #[test]
    fn single_environment_chart() {
        let records = vec![TimingRecord {
            environment_label: "Standalone".into(),
            run_index: 1,
            wall_seconds: 2.5,
        }];
        let dir = tempfile::tempdir().unwrap();
        let (table, _) = render(&records, dir.path()).unwrap();
        let svg = scaling_svg(&table);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains(">2.50<"));
        let report: Report = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(report.percent_reduction_display, "0.00");
    }

    #[test]
    fn chart_has_one_annotated_point_per_environment() {
        let table = summarize(&table1()).unwrap();
        let svg = scaling_svg(&table);
        assert_eq!(svg.matches("<circle").count(), 5);
        for label in ["Standalone", "Cluster_4", "131.02", "78.92", "Environment", "Average wall time (s)"] {
            assert!(svg.contains(label), "{label}");
        }
    }

    #[test]
    fn plan_validation() {
        let job = JobSpec::new("x.csv", crate::data::CsvSchema::flight(8));
        let mut plan = ExperimentPlan {
            environments: standard_environments(),
            repetitions: 5,
            job,
        };
        assert!(plan.validate().is_ok());
        plan.repetitions = 0;
        assert!(plan.validate().is_err());
        plan.repetitions = 1;
        plan.environments.push(Environment::new(2));
        assert!(plan.validate().is_err());
        plan.environments = vec![Environment {
            label: "Solo".into(),
            worker_count: 0,
        }];
        assert!(plan.validate().is_err());
        plan.environments = vec![];
        assert!(plan.validate().is_err());
    }

    #[test]
    fn unwritable_output_dir() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("f");
        fs::write(&file, "").unwrap();
        let table = summarize(&table1()).unwrap();
        assert!(matches!(emit_report(&table, &file.join("sub")), Err(BenchError::Io { .. })));
    }
}
