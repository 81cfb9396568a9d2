//! Run configuration: strict JSON parsing, defaults and validation.

use std::fmt;
use std::path::Path;

use hardsphere::limits::sweep::{Experiment, SweepSetup};
use hardsphere::PressureParams;
use serde::{Deserialize, Serialize};

use crate::datum::Datum;

/// Command executed by the front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EosTable,
    SimulateEuler,
    SimulatePsystem,
    BlowupStudy,
    EpsilonSweep,
    EntropyCheck,
    CoeffCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EosTable => "eos-table",
            Command::SimulateEuler => "simulate-euler",
            Command::SimulatePsystem => "simulate-psystem",
            Command::BlowupStudy => "blowup-study",
            Command::EpsilonSweep => "epsilon-sweep",
            Command::EntropyCheck => "entropy-check",
            Command::CoeffCheck => "coeff-check",
        }
    }
}

/// Interval `[a, b]` sampled by `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl GridSpec {
    fn validate(&self, what: &str) -> Result<(), ConfigError> {
        if !(self.b > self.a) || self.n < 16 {
            return Err(ConfigError::invalid(format!("{what}: grid needs b > a and at least 16 nodes")));
        }
        Ok(())
    }
}

/// Settings of `eos-table`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EosTableConfig {
    /// Largest tabulated specific volume.
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default = "default_rows")]
    pub rows: usize,
    /// Check the energy and `theta` identities against finite differences.
    #[serde(default = "yes")]
    pub check_identities: bool,
    /// Riccati-coefficient scaling check; skipped when absent.
    #[serde(default)]
    pub regime_check: Option<RegimeCheck>,
}

/// Log-log slope of `a` along `v - 1 = eps^alpha` for each `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeCheck {
    pub gammas: Vec<f64>,
    /// Exponent `alpha`; `2/(gamma+1)` when unset.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Decades of `eps` spanned below `params.epsilon`.
    #[serde(default = "default_decades")]
    pub decades: f64,
    #[serde(default = "default_slope_tolerance")]
    pub tolerance: f64,
}

fn default_slope_tolerance() -> f64 {
    0.02
}

fn default_v_max() -> f64 {
    4.0
}
fn default_rows() -> usize {
    200
}
fn default_decades() -> f64 {
    6.0
}

impl Default for EosTableConfig {
    fn default() -> Self {
        Self { v_max: default_v_max(), rows: default_rows(), check_identities: true, regime_check: None }
    }
}

/// Boundary treatment of `simulate-euler`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpec {
    Periodic,
    ConstantExtension,
}

/// One level of a refinement study: grid size and viscosity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub n: usize,
    pub mu: f64,
}

/// Settings of `simulate-euler`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerConfig {
    pub grid: GridSpec,
    pub initial: Datum,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_euler_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_boundary")]
    pub boundary: BoundarySpec,
    #[serde(default = "yes")]
    pub domain_guard: bool,
    /// Extra runs for the invariant-region margin study.
    #[serde(default)]
    pub refinement: Vec<Level>,
    /// Compare each refinement level with the smooth solver in mass coordinates.
    #[serde(default)]
    pub frame_check: bool,
}

fn default_t_end() -> f64 {
    0.5
}
fn default_mu() -> f64 {
    1e-2
}
fn default_euler_cfl() -> f64 {
    0.4
}
fn default_snapshot_every() -> usize {
    100
}
fn default_boundary() -> BoundarySpec {
    BoundarySpec::ConstantExtension
}
fn yes() -> bool {
    true
}

/// Settings of `simulate-psystem`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsystemConfig {
    pub grid: GridSpec,
    pub initial: Datum,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_psystem_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_psystem_snapshots")]
    pub snapshot_every: usize,
    #[serde(default = "default_gradient_factor")]
    pub gradient_factor: f64,
}

fn default_psystem_cfl() -> f64 {
    0.5
}
fn default_psystem_snapshots() -> usize {
    10
}
fn default_gradient_factor() -> f64 {
    hardsphere::psystem::DEFAULT_GRADIENT_FACTOR
}

/// Expected outcome of a blow-up study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    NoBreakdown,
    GradientBlowup,
}

/// Settings of `blowup-study`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupConfig {
    pub grid: GridSpec,
    pub initial: Datum,
    #[serde(default = "default_blowup_t_end")]
    pub t_end: f64,
    /// Values of `eps`; `params.epsilon` alone when empty.
    #[serde(default)]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_psystem_snapshots")]
    pub snapshot_every: usize,
    #[serde(default = "default_gradient_factor")]
    pub gradient_factor: f64,
    #[serde(default)]
    pub expect: Option<Expectation>,
    /// For blow-up runs, require `t* >= lower bound` and a matching prediction.
    #[serde(default)]
    pub bound_checks: bool,
    /// Largest relative gap between predicted and detected times.
    #[serde(default = "default_prediction_tolerance")]
    pub prediction_tolerance: f64,
    /// Largest ratio of the maximal gradients across `eps` for smooth runs.
    #[serde(default = "default_gradient_spread")]
    pub gradient_spread: f64,
    /// Refinement sizes for the grid-convergence study of the detected time.
    #[serde(default)]
    pub refinement: Vec<usize>,
    /// Compare the refinement study with the blow-up time of a constant
    /// Riccati coefficient.
    #[serde(default)]
    pub exact_check: bool,
    #[serde(default = "default_exact_tolerance")]
    pub exact_tolerance: f64,
}

fn default_blowup_t_end() -> f64 {
    10.0
}
fn default_prediction_tolerance() -> f64 {
    0.2
}
fn default_gradient_spread() -> f64 {
    2.0
}
fn default_exact_tolerance() -> f64 {
    0.1
}

/// Settings of `epsilon-sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    pub eps_list: Vec<f64>,
    pub setup: SweepSetup,
}

/// Viscosity decade of `entropy-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationConfig {
    pub grid: GridSpec,
    pub initial: Datum,
    pub mus: Vec<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_boundary")]
    pub boundary: BoundarySpec,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_dissipation_ratio")]
    pub max_ratio: f64,
}

fn default_dissipation_ratio() -> f64 {
    10.0
}

/// Settings of `entropy-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    /// Interval of the smooth runs; sizes come from `sizes`.
    pub a: f64,
    pub b: f64,
    pub sizes: Vec<usize>,
    pub initial: Datum,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Snapshot spacing as a multiple of `dx`.
    #[serde(default = "default_snapshot_factor")]
    pub snapshot_factor: f64,
    #[serde(default = "default_min_order")]
    pub min_order: f64,
    #[serde(default)]
    pub dissipation: Option<DissipationConfig>,
}

fn default_snapshot_factor() -> f64 {
    0.4
}
fn default_min_order() -> f64 {
    1.5
}

/// Settings of `coeff-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rho_range")]
    pub rho_range: (f64, f64),
    #[serde(default = "default_eps_range")]
    pub eps_range: (f64, f64),
    #[serde(default = "default_gamma_range")]
    pub gamma_range: (f64, f64),
    #[serde(default = "default_coeff_tol")]
    pub tolerance: f64,
}

fn default_samples() -> usize {
    100
}
fn default_rho_range() -> (f64, f64) {
    (0.05, 0.95)
}
fn default_eps_range() -> (f64, f64) {
    (1e-4, 1e-1)
}
fn default_gamma_range() -> (f64, f64) {
    (1.0, 3.0)
}
fn default_coeff_tol() -> f64 {
    1e-10
}

impl Default for CoeffConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            seed: 0,
            rho_range: default_rho_range(),
            eps_range: default_eps_range(),
            gamma_range: default_gamma_range(),
            tolerance: default_coeff_tol(),
        }
    }
}

/// Fully resolved configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub params: PressureParams,
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub eos_table: Option<EosTableConfig>,
    #[serde(default)]
    pub simulate_euler: Option<EulerConfig>,
    #[serde(default)]
    pub simulate_psystem: Option<PsystemConfig>,
    #[serde(default)]
    pub blowup_study: Option<BlowupConfig>,
    #[serde(default)]
    pub epsilon_sweep: Option<SweepConfig>,
    #[serde(default)]
    pub entropy_check: Option<EntropyConfig>,
    #[serde(default)]
    pub coeff_check: Option<CoeffConfig>,
}

fn default_output() -> String {
    "out".into()
}
fn default_workers() -> usize {
    1
}

/// Parse or validation failure, rendered with location and hints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
}

impl ConfigError {
    fn invalid(message: impl Into<String>) -> Self {
        Self { message: format!("validation error: {}", message.into()) }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Levenshtein distance between two keys.
fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cur = row[j + 1];
            row[j + 1] = if ca == cb { prev } else { 1 + prev.min(cur).min(row[j]) };
            prev = cur;
        }
    }
    row[b.len()]
}

/// Closest admissible key within an edit distance of 3.
pub fn nearest_key<'a>(unknown: &str, expected: &[&'a str]) -> Option<&'a str> {
    expected
        .iter()
        .map(|k| (edit_distance(unknown, k), *k))
        .filter(|(d, _)| *d <= 3)
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k)
}

/// Extracts the backquoted names of a serde "unknown field" message.
fn unknown_field_hint(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    let end = rest.find('`')?;
    let unknown = &rest[..end];
    let expected: Vec<&str> = rest[end + 1..].split('`').skip(1).step_by(2).collect();
    nearest_key(unknown, &expected).map(|k| format!("; did you mean `{k}`?"))
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let inner = full.rsplit_once(" at line ").map(|(m, _)| m).unwrap_or(&full);
        let hint = unknown_field_hint(inner).unwrap_or_default();
        ConfigError { message: format!("parse error at line {} column {}: {inner}{hint}", e.line(), e.column()) }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { message: format!("cannot read {}: {e}", path.display()) })?;
    parse_config(&text)
}

impl RunConfig {
    /// Checks parameters and the section of the selected command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|e| ConfigError::invalid(strip_prefix(&e.to_string())))?;
        if self.workers == 0 {
            return Err(ConfigError::invalid("workers must be at least 1"));
        }
        if self.output.is_empty() {
            return Err(ConfigError::invalid("output directory must be named"));
        }
        match self.command {
            Command::EosTable => {
                let c = self.eos_table.clone().unwrap_or_default();
                if !(c.v_max > 1.0) || c.rows == 0 {
                    return Err(ConfigError::invalid("eos_table needs v_max > 1 and rows >= 1"));
                }
                if let Some(r) = &c.regime_check {
                    if r.gammas.is_empty() || r.gammas.iter().any(|g| !(*g > 1.0)) || !(r.decades >= 1.0) {
                        return Err(ConfigError::invalid("regime_check needs gammas above 1 and at least one decade"));
                    }
                }
            }
            Command::SimulateEuler => {
                let c = self.section(&self.simulate_euler, "simulate_euler")?;
                c.grid.validate("simulate_euler")?;
                if !(c.t_end > 0.0 && c.mu > 0.0) {
                    return Err(ConfigError::invalid("simulate_euler needs t_end > 0 and mu > 0"));
                }
                if c.frame_check && c.refinement.len() < 2 {
                    return Err(ConfigError::invalid("frame_check needs at least two refinement levels"));
                }
            }
            Command::SimulatePsystem => {
                let c = self.section(&self.simulate_psystem, "simulate_psystem")?;
                c.grid.validate("simulate_psystem")?;
            }
            Command::BlowupStudy => {
                let c = self.section(&self.blowup_study, "blowup_study")?;
                c.grid.validate("blowup_study")?;
                if c.eps_list.iter().any(|e| !(*e > 0.0)) {
                    return Err(ConfigError::invalid("eps_list entries must be positive"));
                }
            }
            Command::EpsilonSweep => {
                self.section(&self.epsilon_sweep, "epsilon_sweep")?;
            }
            Command::EntropyCheck => {
                let c = self.section(&self.entropy_check, "entropy_check")?;
                if c.sizes.len() < 2 || !(c.b > c.a) {
                    return Err(ConfigError::invalid("entropy_check needs b > a and at least two sizes"));
                }
            }
            Command::CoeffCheck => {
                let c = self.coeff_check.clone().unwrap_or_default();
                let (r0, r1) = c.rho_range;
                if !(r0 > 0.0 && r1 < 1.0 && r0 < r1) {
                    return Err(ConfigError::invalid("rho_range must lie inside (0, 1)"));
                }
                let (e0, e1) = c.eps_range;
                if !(e0 > 0.0 && e0 <= e1) {
                    return Err(ConfigError::invalid("eps_range must be positive and ordered"));
                }
                let (g0, g1) = c.gamma_range;
                if !(g0 >= 1.0 && g1 <= 3.0 && g0 < g1) {
                    return Err(ConfigError::invalid("gamma_range must lie inside [1, 3]"));
                }
            }
        }
        Ok(())
    }

    fn section<'a, T>(&self, s: &'a Option<T>, name: &str) -> Result<&'a T, ConfigError> {
        s.as_ref().ok_or_else(|| ConfigError::invalid(format!("command {} requires the `{name}` section", self.command.name())))
    }
}

fn strip_prefix(message: &str) -> String {
    message.strip_prefix("invalid parameters: ").unwrap_or(message).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(r#"{"command": "coeff-check", "params": {"epsilon": 0.1, "gamma": 2}}"#).unwrap();
        assert_eq!(cfg.output, "out");
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.params.kappa, 0.0);
        assert_eq!(cfg.params.gamma_tilde, 2.0);
        assert!(cfg.coeff_check.is_none());
    }

    #[test]
    fn gamma_below_one_rejected() {
        let e = parse_config(r#"{"command": "coeff-check", "params": {"epsilon": 0.1, "gamma": 0.5}}"#).unwrap_err();
        assert!(e.message.contains("gamma must exceed 1"), "{e}");
    }

    #[test]
    fn misspelled_key_suggests_fix() {
        let e = parse_config(r#"{"command": "coeff-check", "params": {"epsilon": 0.1, "gama": 2}}"#).unwrap_err();
        assert!(e.message.contains("unknown field `gama`"), "{e}");
        assert!(e.message.contains("did you mean `gamma`?"), "{e}");
        assert!(e.message.contains("line 1"), "{e}");
    }

    #[test]
    fn missing_section_is_named() {
        let e = parse_config(r#"{"command": "simulate-euler", "params": {"epsilon": 0.1, "gamma": 2}}"#).unwrap_err();
        assert!(e.message.contains("simulate_euler"), "{e}");
    }

    #[test]
    fn nearest_key_limits_distance() {
        assert_eq!(nearest_key("gama", &["epsilon", "gamma", "kappa"]), Some("gamma"));
        assert_eq!(nearest_key("zzzzzzzz", &["epsilon", "gamma"]), None);
    }
}
