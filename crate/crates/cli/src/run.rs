//! Runs a validated spec and writes its data file plus manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use atomlight::fringe::FringeCurve;
use atomlight::interferometer::{atomic_phase, fringe_scan, LoopConfig};
use atomlight::sensitivity::{destruction_sweep_at, sensitivity, steepest_phase_of, sql_benchmark_curve, SensitivityReport};
use atomlight::Error as CoreError;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::spec::{render, ExperimentSpec, OutputFormat, Preset, SpecError};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ATOMLIGHT_OUT_DIR";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("loop engine found no steady state at phi = {}", format_phis(.0))]
    NotConverged(Vec<f64>),
    #[error(transparent)]
    Simulation(CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn format_phis(phis: &[f64]) -> String {
    phis.iter().map(|p| format!("{p:.6}")).collect::<Vec<_>>().join(", ")
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotConvergedAt(phis) => RunError::NotConverged(phis),
            other => RunError::Simulation(other),
        }
    }
}

impl RunError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Spec(_) => 2,
            RunError::NotConverged(_) => 3,
            RunError::Simulation(CoreError::NotConverged { .. } | CoreError::AboveThreshold { .. }) => 3,
            RunError::Simulation(_) | RunError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format!("{v:.16e}"),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let object: Map<String, Value> = self
                .header
                .iter()
                .zip(row)
                .map(|(k, c)| {
                    let v = match c {
                        Cell::Num(v) => json!(v),
                        Cell::Text(s) => json!(s),
                    };
                    (k.clone(), v)
                })
                .collect();
            out.push_str(&Value::Object(object).to_string());
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::JsonLines => self.to_json_lines(),
        }
    }
}

/// Data plus the run details recorded in the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub config: LoopConfig,
    pub details: Map<String, Value>,
}

fn fringe_table(curve: &FringeCurve) -> Table {
    let mut table = Table::new(&["phi", "signal", "noise", "source"]);
    for k in 0..curve.len() {
        let noise = curve.noise.as_ref().map_or(f64::NAN, |n| n[k]);
        table.rows.push(vec![
            Cell::Num(curve.phi[k]),
            Cell::Num(curve.signal[k]),
            Cell::Num(noise),
            Cell::Text(curve.source.to_string()),
        ]);
    }
    table
}

const REPORT_COLUMNS: [&str; 6] = ["phi_opt", "slope", "noise_std", "delta_phi", "sql", "db_beyond_sql"];

fn report_cells(r: &SensitivityReport) -> Vec<Cell> {
    [r.phi_opt, r.slope, r.noise_std, r.delta_phi, r.sql, r.db_beyond_sql].into_iter().map(Cell::Num).collect()
}

/// Runs the simulation for `spec` without touching the filesystem.
pub fn simulate(spec: &ExperimentSpec) -> Result<Outcome, RunError> {
    spec.validate()?;
    let mut config = spec.loop_config()?;
    let grid = spec.grid.phases();
    let mut details = Map::new();
    let table = match spec.preset {
        Preset::Fringe => fringe_table(&fringe_scan(&config, &grid)?),
        Preset::CosineBenchmark => fringe_table(&sql_benchmark_curve(spec.n_flux, &grid)?),
        Preset::AtomicPhase => {
            let theta = atomic_phase(&spec.probe)?;
            config.atomic_phase += theta;
            details.insert("probe_atomic_phase".into(), json!(theta));
            fringe_table(&fringe_scan(&config, &grid)?)
        }
        Preset::Sensitivity => {
            let report = sensitivity(&fringe_scan(&config, &grid)?, spec.n_flux)?;
            details.insert("sensing_particles".into(), json!(report.sensing_particles));
            let mut table = Table::new(&REPORT_COLUMNS);
            table.rows.push(report_cells(&report));
            table
        }
        Preset::Destruction => {
            let phi = steepest_phase_of(&fringe_scan(&config, &grid)?);
            let sweep = destruction_sweep_at(&config, &spec.gains, phi)?;
            details.insert("phi".into(), json!(sweep.phi));
            let mut table = Table::new(&["g_am2", "loss", "signal_db", "noise_db"]);
            for r in &sweep.rows {
                table.rows.push([r.g_am2, r.loss, r.signal_db, r.noise_db].into_iter().map(Cell::Num).collect());
            }
            table
        }
        Preset::Sweep => {
            let mut header = vec![spec.sweep.key.as_str()];
            header.extend(REPORT_COLUMNS);
            let mut table = Table::new(&header);
            for &value in &spec.sweep.values {
                let point = spec.with_override(&spec.sweep.key, value).loop_config()?;
                let report = sensitivity(&fringe_scan(&point, &grid)?, spec.n_flux)?;
                let mut row = vec![Cell::Num(value)];
                row.extend(report_cells(&report));
                table.rows.push(row);
            }
            table
        }
    };
    Ok(Outcome { table, config, details })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub data: PathBuf,
    pub manifest: PathBuf,
}

/// Where the data file goes: the spec's `output`, resolved against
/// `out_dir` when relative, or `<out_dir>/<preset>.<ext>`.
pub fn data_path(spec: &ExperimentSpec, out_dir: &Path) -> PathBuf {
    match &spec.output {
        Some(p) => out_dir.join(p),
        None => out_dir.join(spec.default_file_name()),
    }
}

pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    data.with_file_name(name)
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    let io_err = |source| RunError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    fs::write(path, contents).map_err(io_err)
}

/// Runs `spec` and writes the data file and its manifest.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<Written, RunError> {
    let outcome = simulate(spec)?;
    let data = data_path(spec, out_dir);
    write(&data, &outcome.table.render(spec.format))?;
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let manifest = json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "data_file": data.file_name().map(|n| n.to_string_lossy().into_owned()),
        "format": spec.format.name(),
        "rows": outcome.table.rows.len(),
        "spec": render(spec),
        "resolved_config": outcome.config,
        "details": outcome.details,
        "created_unix": created,
    });
    let manifest_file = manifest_path(&data);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest values always serialize");
    write(&manifest_file, &(text + "\n"))?;
    Ok(Written { data, manifest: manifest_file })
}
