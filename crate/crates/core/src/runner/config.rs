//! Run configuration documents, their validation and the built-in presets.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::adiabatic::DEFAULT_KAPPA_SCALE_NK;
use crate::criteria::Frame;
use crate::error::{invalid, Result};
use crate::kerr::engine::MAX_ALPHA_SQ;
use crate::kerr::oracle::ORACLE_MAX_ALPHA_SQ;
use crate::kerr::{default_cutoff, GRatios};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Adiabatic,
    Dynamic,
    OracleCheck,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::Adiabatic => "adiabatic",
            Self::Dynamic => "dynamic",
            Self::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// A one-dimensional parameter grid: explicit values, a stepped range or an
/// evenly spaced range with a point count. Ranges include both ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Step(StepRange),
    Points(PointRange),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn step(start: f64, stop: f64, step: f64) -> Self {
        Self::Step(StepRange { start, stop, step })
    }

    pub fn points(start: f64, stop: f64, points: usize) -> Self {
        Self::Points(PointRange { start, stop, points })
    }

    /// Expands the grid. Stepped ranges snap to the nearest whole number of
    /// steps so that `stop` is hit despite rounding in `step`.
    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match *self {
            Self::Values(ref v) => v.clone(),
            Self::Step(StepRange { start, stop, step }) => {
                check_range(start, stop)?;
                if !(step.is_finite() && step > 0.0) {
                    return Err(invalid(format!("step must be finite and > 0, got {step}")));
                }
                let span = (stop - start) / step;
                let n = (span + 1e-9).floor();
                if n > 1e7 {
                    return Err(invalid(format!("range has {n} steps, more than 1e7")));
                }
                (0..=n as usize).map(|i| start + i as f64 * step).collect()
            }
            Self::Points(PointRange { start, stop, points }) => {
                check_range(start, stop)?;
                match points {
                    0 => Vec::new(),
                    1 => vec![start],
                    _ => {
                        let h = (stop - start) / (points - 1) as f64;
                        (0..points)
                            .map(|i| if i + 1 == points { stop } else { start + i as f64 * h })
                            .collect()
                    }
                }
            }
        };
        if values.is_empty() {
            return Err(invalid("grid is empty"));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(invalid(format!("grid value {x} is not finite")));
        }
        Ok(values)
    }
}

fn check_range(start: f64, stop: f64) -> Result<()> {
    if !start.is_finite() || !stop.is_finite() {
        return Err(invalid("range bounds must be finite"));
    }
    if stop < start {
        return Err(invalid(format!("range stop {stop} is below start {start}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdiabaticConfig {
    pub n_atoms: i64,
    pub ng_over_kappa: Grid,
    pub temperatures_nk: Grid,
    pub kappa_scale_nk: f64,
}

impl Default for AdiabaticConfig {
    fn default() -> Self {
        Self {
            n_atoms: 100,
            ng_over_kappa: Grid::step(-6.0, 2.0, 0.05),
            temperatures_nk: Grid::Values(vec![0.0, 50.0, 80.0]),
            kappa_scale_nk: DEFAULT_KAPPA_SCALE_NK,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicConfig {
    pub g_ratios: GRatios,
    /// Mean atom number per well, also the time-scale reference.
    pub n_a: f64,
    /// Real coherent amplitude per mode; `sqrt(n_a / 2)` when absent.
    pub alpha: Option<f64>,
    pub tau: Grid,
    pub phi: f64,
    pub frame: Frame,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        Self {
            g_ratios: GRatios::rubidium(),
            n_a: 200.0,
            alpha: None,
            tau: Grid::points(0.0, 0.5, 501),
            phi: FRAC_PI_2,
            frame: Frame::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleCheckConfig {
    pub alpha_sq: Vec<f64>,
    pub tau: Grid,
    pub g_ratio_sets: Vec<GRatios>,
    /// Reference atom number; `2 |alpha|^2` for each amplitude when absent.
    pub n_a: Option<f64>,
    pub phi: f64,
    /// Fock cutoff per mode; sized from `|alpha|^2` when absent.
    pub cutoff: Option<usize>,
    pub tolerance: f64,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self {
            alpha_sq: vec![1.0, 4.0, 9.0, 16.0],
            tau: Grid::Values((1..=20).map(|k| 0.5 * k as f64).collect()),
            g_ratio_sets: vec![GRatios::rubidium(), GRatios::rubidium().without_cross_coupling()],
            n_a: None,
            phi: FRAC_PI_2,
            cutoff: None,
            tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: String,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adiabatic: Option<AdiabaticConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic: Option<DynamicConfig>,
    #[serde(default, rename = "oracle-check", skip_serializing_if = "Option::is_none")]
    pub oracle_check: Option<OracleCheckConfig>,
    pub output: OutputConfig,
}

/// One validation finding, addressed by its dotted field path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
            line: None,
            column: None,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " (line {l}, column {c})")?;
        }
        Ok(())
    }
}

/// Parses a JSON config, reporting the failing field path and position.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, Diagnostic> {
    let mut de = serde_json::Deserializer::from_str(text);
    let parsed: std::result::Result<RunConfig, _> = serde_path_to_error::deserialize(&mut de);
    let config = parsed.map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        Diagnostic {
            field: if field == "." { "config".into() } else { field },
            message: strip_position(&inner),
            line: Some(inner.line()),
            column: Some(inner.column()),
        }
    })?;
    de.end().map_err(|e| Diagnostic {
        field: "config".into(),
        message: strip_position(&e),
        line: Some(e.line()),
        column: Some(e.column()),
    })?;
    Ok(config)
}

fn strip_position(e: &serde_json::Error) -> String {
    let text = e.to_string();
    match text.rfind(" at line ") {
        Some(i) => text[..i].to_string(),
        None => text,
    }
}

/// Adiabatic parameters with every default filled in and grids expanded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedAdiabatic {
    pub n_atoms: usize,
    pub ng_over_kappa: Vec<f64>,
    pub temperatures_nk: Vec<f64>,
    pub kappa_scale_nk: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedDynamic {
    pub g_ratios: GRatios,
    pub n_a: f64,
    pub alpha: f64,
    pub alpha_sq: f64,
    pub tau: Vec<f64>,
    pub phi: f64,
    pub frame: Frame,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCase {
    pub alpha_sq: f64,
    pub n_a: f64,
    pub cutoff: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedOracleCheck {
    pub cases: Vec<OracleCase>,
    pub tau: Vec<f64>,
    pub g_ratio_sets: Vec<GRatios>,
    pub phi: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "scenario")]
pub enum Resolved {
    Adiabatic(ResolvedAdiabatic),
    Dynamic(ResolvedDynamic),
    OracleCheck(ResolvedOracleCheck),
}

/// Full schema and range validation; an empty list means runnable.
pub fn validate(config: &RunConfig) -> Vec<Diagnostic> {
    resolve(config).err().unwrap_or_default()
}

/// Validates `config` and fills in every default.
pub fn resolve(config: &RunConfig) -> std::result::Result<Resolved, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let blocks = [
        (Scenario::Adiabatic, config.adiabatic.is_some()),
        (Scenario::Dynamic, config.dynamic.is_some()),
        (Scenario::OracleCheck, config.oracle_check.is_some()),
    ];
    for (scenario, present) in blocks {
        if scenario == config.scenario && !present {
            diags.push(Diagnostic::new(
                scenario.name(),
                format!("block required for scenario {}", scenario.name()),
            ));
        } else if scenario != config.scenario && present {
            diags.push(Diagnostic::new(
                scenario.name(),
                format!("block not allowed for scenario {}", config.scenario.name()),
            ));
        }
    }
    if config.output.path.trim().is_empty() {
        diags.push(Diagnostic::new("output.path", "must not be empty"));
    }

    let resolved = match config.scenario {
        Scenario::Adiabatic => config
            .adiabatic
            .as_ref()
            .and_then(|c| resolve_adiabatic(c, &mut diags))
            .map(Resolved::Adiabatic),
        Scenario::Dynamic => config
            .dynamic
            .as_ref()
            .and_then(|c| resolve_dynamic(c, &mut diags))
            .map(Resolved::Dynamic),
        Scenario::OracleCheck => config
            .oracle_check
            .as_ref()
            .and_then(|c| resolve_oracle(c, &mut diags))
            .map(Resolved::OracleCheck),
    };
    match resolved {
        Some(r) if diags.is_empty() => Ok(r),
        _ => Err(diags),
    }
}

fn grid(field: &str, g: &Grid, diags: &mut Vec<Diagnostic>) -> Option<Vec<f64>> {
    g.values()
        .map_err(|e| diags.push(Diagnostic::new(field, strip_kind(&e.to_string()))))
        .ok()
}

fn strip_kind(msg: &str) -> String {
    msg.strip_prefix("invalid argument: ").unwrap_or(msg).to_string()
}

fn finite(field: &str, x: f64, diags: &mut Vec<Diagnostic>) -> bool {
    let ok = x.is_finite();
    if !ok {
        diags.push(Diagnostic::new(field, format!("must be finite, got {x}")));
    }
    ok
}

fn g_ratios(field: &str, g: &GRatios, diags: &mut Vec<Diagnostic>) {
    if let Err(e) = g.validate() {
        diags.push(Diagnostic::new(
            field,
            format!("KerrParams invariant: {}", strip_kind(&e.to_string())),
        ));
    }
}

fn phi(field: &str, x: f64, diags: &mut Vec<Diagnostic>) {
    if finite(field, x, diags) && !(0.0..TAU).contains(&x) {
        diags.push(Diagnostic::new(
            field,
            format!("beam-splitter phase must lie in [0, 2 pi), got {x}"),
        ));
    }
}

fn resolve_adiabatic(c: &AdiabaticConfig, diags: &mut Vec<Diagnostic>) -> Option<ResolvedAdiabatic> {
    let before = diags.len();
    if c.n_atoms < 1 {
        diags.push(Diagnostic::new(
            "adiabatic.n_atoms",
            format!("FockBasis invariant: N >= 1 required, got {}", c.n_atoms),
        ));
    } else if c.n_atoms > 20_000 {
        diags.push(Diagnostic::new(
            "adiabatic.n_atoms",
            format!("N = {} exceeds the dense-diagonalization limit 20000", c.n_atoms),
        ));
    }
    let ng = grid("adiabatic.ng_over_kappa", &c.ng_over_kappa, diags);
    let temps = grid("adiabatic.temperatures_nk", &c.temperatures_nk, diags);
    if let Some(t) = temps.as_ref().and_then(|t| t.iter().find(|&&t| t < 0.0)) {
        diags.push(Diagnostic::new(
            "adiabatic.temperatures_nk",
            format!("ThermalSpec invariant: temperature must be >= 0 nK, got {t}"),
        ));
    }
    if finite("adiabatic.kappa_scale_nk", c.kappa_scale_nk, diags) && c.kappa_scale_nk <= 0.0 {
        diags.push(Diagnostic::new(
            "adiabatic.kappa_scale_nk",
            format!(
                "ThermalSpec invariant: hbar kappa / k_B must be > 0 nK, got {}",
                c.kappa_scale_nk
            ),
        ));
    }
    (diags.len() == before).then(|| ResolvedAdiabatic {
        n_atoms: c.n_atoms as usize,
        ng_over_kappa: ng.unwrap_or_default(),
        temperatures_nk: temps.unwrap_or_default(),
        kappa_scale_nk: c.kappa_scale_nk,
    })
}

fn resolve_dynamic(c: &DynamicConfig, diags: &mut Vec<Diagnostic>) -> Option<ResolvedDynamic> {
    let before = diags.len();
    g_ratios("dynamic.g_ratios", &c.g_ratios, diags);
    if finite("dynamic.n_a", c.n_a, diags) && c.n_a <= 0.0 {
        diags.push(Diagnostic::new(
            "dynamic.n_a",
            format!("KerrParams invariant: N_A must be > 0, got {}", c.n_a),
        ));
    }
    let alpha = c.alpha.unwrap_or_else(|| (c.n_a.max(0.0) / 2.0).sqrt());
    if finite("dynamic.alpha", alpha, diags) && alpha * alpha > MAX_ALPHA_SQ {
        diags.push(Diagnostic::new(
            "dynamic.alpha",
            format!(
                "KerrParams invariant: |alpha|^2 = {:e} exceeds the overflow guard {MAX_ALPHA_SQ:e}",
                alpha * alpha
            ),
        ));
    }
    let tau = grid("dynamic.tau", &c.tau, diags);
    phi("dynamic.phi", c.phi, diags);
    (diags.len() == before).then(|| ResolvedDynamic {
        g_ratios: c.g_ratios,
        n_a: c.n_a,
        alpha,
        alpha_sq: alpha * alpha,
        tau: tau.unwrap_or_default(),
        phi: c.phi,
        frame: c.frame,
    })
}

fn resolve_oracle(c: &OracleCheckConfig, diags: &mut Vec<Diagnostic>) -> Option<ResolvedOracleCheck> {
    let before = diags.len();
    if c.alpha_sq.is_empty() {
        diags.push(Diagnostic::new("oracle-check.alpha_sq", "grid is empty"));
    }
    let mut cases = Vec::new();
    for (i, &a2) in c.alpha_sq.iter().enumerate() {
        let field = format!("oracle-check.alpha_sq[{i}]");
        if !finite(&field, a2, diags) {
            continue;
        }
        if !(0.0..=ORACLE_MAX_ALPHA_SQ).contains(&a2) {
            diags.push(Diagnostic::new(
                field,
                format!("oracle requires 0 <= |alpha|^2 <= {ORACLE_MAX_ALPHA_SQ}, got {a2}"),
            ));
            continue;
        }
        let n_a = c.n_a.unwrap_or(2.0 * a2);
        let cutoff = c.cutoff.unwrap_or_else(|| default_cutoff(a2));
        let needed = a2 + 10.0 * a2.sqrt();
        if (cutoff as f64) < needed {
            diags.push(Diagnostic::new(
                "oracle-check.cutoff",
                format!("cutoff {cutoff} is below |alpha|^2 + 10 |alpha| = {needed:.1} for |alpha|^2 = {a2}"),
            ));
        }
        if n_a.is_nan() || n_a <= 0.0 {
            diags.push(Diagnostic::new(
                "oracle-check.n_a",
                format!("KerrParams invariant: N_A must be > 0, got {n_a}"),
            ));
        }
        cases.push(OracleCase {
            alpha_sq: a2,
            n_a,
            cutoff,
        });
    }
    if let Some(n_a) = c.n_a {
        finite("oracle-check.n_a", n_a, diags);
    }
    let tau = grid("oracle-check.tau", &c.tau, diags);
    if c.g_ratio_sets.is_empty() {
        diags.push(Diagnostic::new("oracle-check.g_ratio_sets", "grid is empty"));
    }
    for (i, g) in c.g_ratio_sets.iter().enumerate() {
        g_ratios(&format!("oracle-check.g_ratio_sets[{i}]"), g, diags);
    }
    phi("oracle-check.phi", c.phi, diags);
    if finite("oracle-check.tolerance", c.tolerance, diags) && c.tolerance <= 0.0 {
        diags.push(Diagnostic::new(
            "oracle-check.tolerance",
            format!("must be > 0, got {}", c.tolerance),
        ));
    }
    (diags.len() == before).then(|| ResolvedOracleCheck {
        cases,
        tau: tau.unwrap_or_default(),
        g_ratio_sets: c.g_ratio_sets.clone(),
        phi: c.phi,
        tolerance: c.tolerance,
    })
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 3] = ["fig2", "fig3", "fig4"];

pub fn preset(name: &str) -> Result<RunConfig> {
    let output = |stem: &str| OutputConfig {
        path: format!("{stem}.csv"),
        format: Format::Csv,
    };
    match name {
        "fig2" => Ok(RunConfig {
            scenario: Scenario::Adiabatic,
            adiabatic: Some(AdiabaticConfig::default()),
            dynamic: None,
            oracle_check: None,
            output: output(name),
        }),
        "fig3" | "fig4" => {
            let mut dynamic = DynamicConfig::default();
            if name == "fig4" {
                dynamic.g_ratios = dynamic.g_ratios.without_cross_coupling();
            }
            Ok(RunConfig {
                scenario: Scenario::Dynamic,
                adiabatic: None,
                dynamic: Some(dynamic),
                oracle_check: None,
                output: output(name),
            })
        }
        _ => Err(invalid(format!(
            "unknown preset {name:?}, expected one of {}",
            PRESETS.join(", ")
        ))),
    }
}
