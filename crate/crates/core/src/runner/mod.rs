//! Configuration-driven execution: sweeps, result tables and run manifests.

mod config;
mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use config::{
    parse_config, preset, resolve, validate, AdiabaticConfig, Diagnostic, DynamicConfig, Format, Grid, OracleCase,
    OracleCheckConfig, OutputConfig, PointRange, Resolved, ResolvedAdiabatic, ResolvedDynamic, ResolvedOracleCheck,
    RunConfig, Scenario, StepRange, PRESETS,
};
pub use table::Table;

use crate::adiabatic::adiabatic_sweep;
use crate::kerr::{dynamic_sweep, fock_oracle, max_deviation, KerrParams, SpinMomentPlan};

/// Entries closer to zero than this fraction of the tolerance are compared
/// absolutely in the oracle check (1e-10 absolute at the default 1e-8).
pub const ORACLE_ABSOLUTE_FLOOR: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration:\n{}", list(.0))]
    Config(Vec<Diagnostic>),
    #[error("numeric failure {0}")]
    Numeric(String),
    #[error("oracle check failed: max relative deviation {worst:.3e} at {point} exceeds {tolerance:e}")]
    OracleMismatch { worst: f64, tolerance: f64, point: String },
    #[error("{0}")]
    Io(String),
}

fn list(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

impl RunError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) | Self::OracleMismatch { .. } => 3,
            Self::Io(_) => 1,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `output.format` from the config.
    pub format: Option<Format>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub table_path: PathBuf,
    pub manifest_path: PathBuf,
    pub rows: usize,
    /// Largest deviation seen by an oracle check.
    pub max_deviation: Option<f64>,
}

/// Reads, validates and runs the config at `path`.
pub fn run_file(path: &Path, options: &RunOptions) -> Result<RunSummary, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io(format!("cannot read {}: {e}", path.display())))?;
    let config = parse_config(&text).map_err(|d| RunError::Config(vec![d]))?;
    let format = options.format.unwrap_or(config.output.format);
    let target = PathBuf::from(output_path(&config.output.path, format));
    let same = |a: &Path, b: &Path| matches!((a.canonicalize(), b.canonicalize()), (Ok(x), Ok(y)) if x == y);
    if same(&target, path) {
        return Err(RunError::Io(format!(
            "output {} would overwrite the config file",
            target.display()
        )));
    }
    run(&config, options)
}

/// Runs a parsed config, writing the table and `<table>.manifest.json`.
///
/// An oracle check that exceeds its tolerance still writes its report
/// before returning [`RunError::OracleMismatch`].
pub fn run(config: &RunConfig, options: &RunOptions) -> Result<RunSummary, RunError> {
    let resolved = resolve(config).map_err(RunError::Config)?;
    let format = options.format.unwrap_or(config.output.format);
    let start = Instant::now();
    let (table, oracle) = execute(&resolved)?;
    let wall = start.elapsed().as_secs_f64();

    let output = output_path(&config.output.path, format);
    let table_path = PathBuf::from(&output);
    let manifest_path = PathBuf::from(format!("{output}.manifest.json"));
    write(&table_path, &table.render(format))?;
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "resolved": resolved,
        "output": { "path": output, "format": format },
        "rows": table.rows.len(),
        "threads": rayon::current_num_threads(),
        "wall_time_s": wall,
        "oracle_max_deviation": oracle.as_ref().map(|o| o.worst),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest is plain data");
    write(&manifest_path, &(text + "\n"))?;

    if let Some(o) = &oracle {
        if o.worst > o.tolerance {
            return Err(RunError::OracleMismatch {
                worst: o.worst,
                tolerance: o.tolerance,
                point: o.point.clone(),
            });
        }
    }
    Ok(RunSummary {
        table_path,
        manifest_path,
        rows: table.rows.len(),
        max_deviation: oracle.map(|o| o.worst),
    })
}

/// Swaps a `.csv`/`.json` extension that disagrees with `format`.
fn output_path(path: &str, format: Format) -> String {
    let p = Path::new(path);
    match p.extension().and_then(|e| e.to_str()) {
        Some("csv" | "json") => p.with_extension(format.extension()).to_string_lossy().into_owned(),
        _ => path.to_string(),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))
}

struct OracleOutcome {
    worst: f64,
    tolerance: f64,
    point: String,
}

fn execute(resolved: &Resolved) -> Result<(Table, Option<OracleOutcome>), RunError> {
    match resolved {
        Resolved::Adiabatic(a) => adiabatic_table(a).map(|t| (t, None)),
        Resolved::Dynamic(d) => dynamic_table(d).map(|t| (t, None)),
        Resolved::OracleCheck(o) => oracle_table(o).map(|(t, out)| (t, Some(out))),
    }
}

/// Results of an adiabatic run, one row per (`Ng/kappa`, `T`) pair.
pub fn adiabatic_table(a: &ResolvedAdiabatic) -> Result<Table, RunError> {
    let rows = adiabatic_sweep(a.n_atoms, &a.ng_over_kappa, &a.temperatures_nk, a.kappa_scale_nk)
        .map_err(|e| RunError::Numeric(e.to_string()))?;
    let mut table = Table::new(&["Ng_over_kappa", "T_nK", "E_HZ", "E_entropic"]);
    for r in rows {
        table.push(vec![
            Some(r.ng_over_kappa),
            Some(r.temperature_nk),
            r.e_hz,
            r.e_entropic,
        ]);
    }
    Ok(table)
}

/// Results of a dynamic run, one row per `tau`.
pub fn dynamic_table(d: &ResolvedDynamic) -> Result<Table, RunError> {
    let base = KerrParams::uniform(C64::new(d.alpha, 0.0), d.g_ratios, d.n_a, 0.0)
        .map_err(|e| RunError::Numeric(e.to_string()))?;
    let rows = dynamic_sweep(&base, &d.tau, d.phi, d.frame).map_err(|e| RunError::Numeric(e.to_string()))?;
    let mut table = Table::new(&["tau", "S_plus_dB", "S_minus_dB", "theta", "E_product", "E_sum"]);
    for r in rows {
        table.push(vec![
            Some(r.tau),
            r.squeezing.map(|s| s.plus_db),
            r.squeezing.map(|s| s.minus_db),
            Some(r.theta),
            r.product.value,
            r.sum.value,
        ]);
    }
    Ok(table)
}

#[derive(Serialize)]
struct OraclePoint {
    alpha_sq: f64,
    g: crate::kerr::GRatios,
    tau: f64,
}

fn oracle_table(o: &ResolvedOracleCheck) -> Result<(Table, OracleOutcome), RunError> {
    let plan = SpinMomentPlan::new(o.phi);
    let mut points = Vec::new();
    for case in &o.cases {
        for g in &o.g_ratio_sets {
            for &tau in &o.tau {
                points.push((case, *g, tau));
            }
        }
    }
    let deviations: Vec<f64> = points
        .par_iter()
        .map(|&(case, g, tau)| {
            let tag = |e: crate::Error| {
                RunError::Numeric(format!(
                    "at |alpha|^2 = {}, g = {:?}, tau = {tau}: {e}",
                    case.alpha_sq, g
                ))
            };
            let params = KerrParams::uniform(C64::new(case.alpha_sq.sqrt(), 0.0), g, case.n_a, tau).map_err(tag)?;
            let engine = plan.evaluate(&params).map_err(tag)?;
            let oracle = fock_oracle(&params, o.phi, case.cutoff).map_err(tag)?;
            Ok(max_deviation(&engine, &oracle, ORACLE_ABSOLUTE_FLOOR))
        })
        .collect::<Result<_, RunError>>()?;

    let mut table = Table::new(&["alpha_sq", "g11", "g22", "g12", "tau", "max_rel_deviation"]);
    let mut outcome = OracleOutcome {
        worst: 0.0,
        tolerance: o.tolerance,
        point: String::new(),
    };
    for (&(case, g, tau), &dev) in points.iter().zip(&deviations) {
        table.push(vec![
            Some(case.alpha_sq),
            Some(g.g11),
            Some(g.g22),
            Some(g.g12),
            Some(tau),
            Some(dev),
        ]);
        if dev > outcome.worst || outcome.point.is_empty() {
            outcome.worst = dev;
            outcome.point = serde_json::to_string(&OraclePoint {
                alpha_sq: case.alpha_sq,
                g,
                tau,
            })
            .unwrap_or_default();
        }
    }
    Ok((table, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_extension_follows_format() {
        assert_eq!(output_path("out/fig3.csv", Format::Json), "out/fig3.json");
        assert_eq!(output_path("fig3.json", Format::Json), "fig3.json");
        assert_eq!(output_path("table.dat", Format::Json), "table.dat");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Config(vec![]).exit_code(), 2);
        assert_eq!(RunError::Numeric(String::new()).exit_code(), 3);
        assert_eq!(RunError::Io(String::new()).exit_code(), 1);
    }

    #[test]
    fn small_adiabatic_table() {
        let a = ResolvedAdiabatic {
            n_atoms: 4,
            ng_over_kappa: vec![0.0, -1.0],
            temperatures_nk: vec![0.0, 50.0],
            kappa_scale_nk: 50.0,
        };
        let t = adiabatic_table(&a).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[1][3], None);
        assert!((t.rows[0][2].unwrap() - 0.75).abs() < 1e-9);
    }

    #[test]
    fn oracle_table_small() {
        let o = ResolvedOracleCheck {
            cases: vec![OracleCase {
                alpha_sq: 1.0,
                n_a: 2.0,
                cutoff: 25,
            }],
            tau: vec![0.5, 1.0],
            g_ratio_sets: vec![crate::kerr::GRatios::rubidium()],
            phi: std::f64::consts::FRAC_PI_2,
            tolerance: 1e-8,
        };
        let (t, out) = oracle_table(&o).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(out.worst < 1e-8, "{}", out.worst);
    }
}
