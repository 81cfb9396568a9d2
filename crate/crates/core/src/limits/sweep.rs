//! Parallel sweeps over the congestion parameter `eps`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eos::PressureParams;
use crate::error::{Error, Result};
use crate::limits::diagnostics::{exclusion_residual, incompressibility_diagnostic, pressure_l1};
use crate::limits::fit::{scaling_fit, ScalingFit};
use crate::limits::profile::{build_initial, well_prepared_initial, AssumptionReport, InitialProfileSpec};
use crate::psystem::{self, BreakdownMode, SmoothConfig};
use crate::limits::transform::{eulerian_to_lagrangian_with, mass_coordinates, ToLagrangian, DEFAULT_TRANSFORM_FLOOR};
use crate::riemann::{self, EulerianState, LagrangianState, RegionBound};
use crate::trajectory::{EulerianTrajectory, LagrangianTrajectory};
use crate::viscous::{self, ViscousConfig};

/// Metric collected by [`epsilon_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Viscous Eulerian collision; `1 - max rho` over the run.
    MaxDensity,
    /// Smooth Lagrangian run; detected, predicted and lower-bound blow-up times.
    Blowup,
    /// `||eps/(v-1)^(gamma-1)||` over the space-time window.
    Exclusion,
    /// `||p(v)||_{L^1}` over the space-time window.
    PressureL1,
    /// Congested-set measure and `sup |u_x|` on it.
    Incompressibility,
}

/// Width of the congested band `{v < 1 + band}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum BandRule {
    /// `factor * (min_volume_bound - 1)`.
    VolumeBound { factor: f64 },
    /// Volumes whose singular pressure exceeds `threshold * speed^2`.
    PressureLevel { threshold: f64, speed: f64 },
}

impl Default for BandRule {
    fn default() -> Self {
        BandRule::VolumeBound { factor: 10.0 }
    }
}

impl BandRule {
    /// Band width for the initial state `state0`.
    pub fn width(&self, state0: &LagrangianState, p: &PressureParams) -> Result<f64> {
        match *self {
            BandRule::VolumeBound { factor } => {
                let bound = RegionBound::from_lagrangian(state0, p)?;
                Ok(factor * (riemann::min_volume_bound(&bound, p)? - 1.0))
            }
            BandRule::PressureLevel { threshold, speed } => {
                if !(threshold > 0.0 && speed > 0.0) {
                    return Err(Error::Config("pressure band needs positive threshold and speed".into()));
                }
                Ok((p.epsilon / (threshold * speed * speed)).powf(1.0 / p.gamma))
            }
        }
    }
}

/// Solver producing the Lagrangian trajectories of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSolver {
    /// Smooth p-system solver on the well-prepared datum.
    #[default]
    Smooth,
    /// Viscous Eulerian run of the unfiltered datum, mapped to mass coordinates
    /// centered on the total mass.
    Viscous,
}

/// Solver and analysis settings shared by every run of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSetup {
    pub profile: InitialProfileSpec,
    pub t_end: f64,
    #[serde(default)]
    pub cfl_safety: Option<f64>,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    /// Half-width `L` of the space window.
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default)]
    pub band: BandRule,
    /// Source of the Lagrangian trajectories; `MaxDensity` is always viscous.
    #[serde(default)]
    pub solver: SweepSolver,
    /// Refuse grids with `dx > guard_constant * min(eps)^(1/(gamma-1))`.
    #[serde(default = "default_guard")]
    pub guard_constant: f64,
    /// Viscosity of the Eulerian runs.
    #[serde(default = "default_viscosity")]
    pub viscosity: f64,
    #[serde(default = "default_gradient_factor")]
    pub gradient_factor: f64,
    /// Apply the boundary-reach guard to the Eulerian runs.
    #[serde(default = "yes")]
    pub domain_guard: bool,
}

fn yes() -> bool {
    true
}

fn default_snapshot_every() -> usize {
    10
}
fn default_window() -> f64 {
    1.0
}
fn default_guard() -> f64 {
    10.0
}
fn default_viscosity() -> f64 {
    5e-3
}
fn default_gradient_factor() -> f64 {
    psystem::DEFAULT_GRADIENT_FACTOR
}

impl SweepSetup {
    pub fn new(profile: InitialProfileSpec, t_end: f64) -> Self {
        Self {
            profile,
            t_end,
            cfl_safety: None,
            snapshot_every: default_snapshot_every(),
            window: default_window(),
            band: BandRule::default(),
            solver: SweepSolver::Smooth,
            guard_constant: default_guard(),
            viscosity: default_viscosity(),
            gradient_factor: default_gradient_factor(),
            domain_guard: true,
        }
    }
}

/// Metrics of one `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonRecord {
    pub epsilon: f64,
    pub max_rho: Option<f64>,
    pub min_v: Option<f64>,
    pub t_star_numeric: Option<f64>,
    pub t_star_bracket: Option<(f64, f64)>,
    pub breakdown_mode: Option<BreakdownMode>,
    pub t_star_lower_bound: Option<f64>,
    pub t_star_predicted: Option<f64>,
    pub pressure_l1: Option<f64>,
    pub exclusion_residual: Option<f64>,
    pub exclusion_residual_lq: Option<f64>,
    pub congested_measure: Option<f64>,
    pub incompressibility_sup: Option<f64>,
    pub band: Option<f64>,
    /// Final time reached by the run.
    pub t_reached: f64,
    pub assumptions: Option<AssumptionReport>,
}

impl EpsilonRecord {
    fn empty(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_rho: None,
            min_v: None,
            t_star_numeric: None,
            t_star_bracket: None,
            breakdown_mode: None,
            t_star_lower_bound: None,
            t_star_predicted: None,
            pressure_l1: None,
            exclusion_residual: None,
            exclusion_residual_lq: None,
            congested_measure: None,
            incompressibility_sup: None,
            band: None,
            t_reached: 0.0,
            assumptions: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedFit {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl NamedFit {
    fn new(name: &str, f: ScalingFit) -> Self {
        Self { name: name.into(), slope: f.slope, intercept: f.intercept, r2: f.r2 }
    }
}

/// A pass/fail flag with the observed value and the expectation it was held to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, expected: impl Into<String>, observed: f64, pass: bool) -> Self {
        Self { name: name.into(), expected: expected.into(), observed, pass }
    }
}

/// Sweep results: one record per `eps` (descending), fits and checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub records: Vec<EpsilonRecord>,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub config: serde_json::Value,
}

impl ExperimentReport {
    /// Long-format rows `(metric, epsilon, value)`.
    pub fn long_rows(&self) -> Vec<(String, f64, f64)> {
        let mut rows = Vec::new();
        for r in &self.records {
            let mut push = |name: &str, v: Option<f64>| {
                if let Some(v) = v {
                    rows.push((name.to_string(), r.epsilon, v));
                }
            };
            push("max_rho", r.max_rho);
            push("min_v", r.min_v);
            push("t_star_numeric", r.t_star_numeric);
            push("t_star_lower_bound", r.t_star_lower_bound);
            push("t_star_predicted", r.t_star_predicted);
            push("pressure_l1", r.pressure_l1);
            push("exclusion_residual", r.exclusion_residual);
            push("exclusion_residual_lq", r.exclusion_residual_lq);
            push("congested_measure", r.congested_measure);
            push("incompressibility_sup", r.incompressibility_sup);
        }
        rows
    }
}

fn check_list(eps_list: &[f64], setup: &SweepSetup, base: &PressureParams) -> Result<()> {
    if eps_list.len() < 3 {
        return Err(Error::FitTooFewPoints(eps_list.len()));
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) || eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("eps_list must be positive and strictly decreasing".into()));
    }
    let eps_min = *eps_list.last().expect("nonempty");
    let scale = setup.guard_constant * eps_min.powf(1.0 / (base.gamma - 1.0));
    if setup.profile.grid.dx > scale {
        return Err(Error::Resolution(format!(
            "dx = {} exceeds {} x min(eps)^(1/(gamma-1)) = {scale:e}",
            setup.profile.grid.dx, setup.guard_constant
        )));
    }
    Ok(())
}

fn viscous_run(setup: &SweepSetup, p: PressureParams, state0: &LagrangianState) -> Result<EulerianTrajectory> {
    let grid = setup.profile.grid;
    let rho: Vec<f64> = state0.v.iter().map(|v| 1.0 / v).collect();
    let m: Vec<f64> = rho.iter().zip(&state0.u).map(|(r, u)| r * u).collect();
    let mut cfg = ViscousConfig::new(setup.viscosity, p, grid, setup.t_end);
    if let Some(c) = setup.cfl_safety {
        cfg.cfl_safety = c;
    }
    cfg.snapshot_every = setup.snapshot_every;
    cfg.domain_guard = setup.domain_guard;
    viscous::run(&cfg, &rho, &m)
}

fn lagrangian_from_viscous(traj: &EulerianTrajectory) -> Result<LagrangianTrajectory> {
    let first: &EulerianState = &traj.first().state;
    let total = *mass_coordinates(first, 0.0, DEFAULT_TRANSFORM_FLOOR)?.last().expect("nonempty grid");
    let opts = ToLagrangian { mass_origin: -0.5 * total, ..ToLagrangian::default() };
    eulerian_to_lagrangian_with(traj, &opts)
}

fn run_one(setup: &SweepSetup, p: PressureParams, experiment: Experiment) -> Result<EpsilonRecord> {
    let mut rec = EpsilonRecord::empty(p.epsilon);
    let viscous_source = experiment == Experiment::MaxDensity || setup.solver == SweepSolver::Viscous;
    let (state0, report) = if viscous_source { build_initial(&setup.profile, &p)? } else { well_prepared_initial(&setup.profile, &p)? };
    rec.assumptions = Some(report);
    let traj = if viscous_source {
        let eul = viscous_run(setup, p, &state0)?;
        rec.t_reached = eul.last().t;
        if experiment == Experiment::MaxDensity {
            rec.max_rho = Some(eul.diagnostics.iter().map(|d| d.max_rho).fold(0.0, f64::max));
            return Ok(rec);
        }
        lagrangian_from_viscous(&eul)?
    } else {
        let mut cfg = SmoothConfig::new(p, setup.profile.grid, setup.t_end);
        if let Some(c) = setup.cfl_safety {
            cfg.cfl_safety = c;
        }
        cfg.snapshot_every = setup.snapshot_every;
        cfg.gradient_factor = setup.gradient_factor;
        let (traj, breakdown) = psystem::run_smooth(&cfg, &state0.v, &state0.u)?;
        rec.t_reached = traj.last().t;
        if let Some(b) = &breakdown {
            rec.t_star_numeric = Some(b.t_star_numeric);
            rec.t_star_bracket = Some(b.bracket);
            rec.breakdown_mode = Some(b.mode);
        }
        traj
    };
    rec.min_v = Some(traj.diagnostics.iter().map(|d| d.min_v).fold(f64::INFINITY, f64::min));
    match experiment {
        Experiment::Blowup => {
            rec.t_star_lower_bound = Some(psystem::blowup_lower_bound(&state0, &p)?.time);
            rec.t_star_predicted = Some(psystem::predict_blowup_time(&traj)?.t_star);
        }
        Experiment::Exclusion => {
            let e = exclusion_residual(&traj, setup.window, &p)?;
            rec.exclusion_residual = Some(e.l1);
            rec.exclusion_residual_lq = Some(e.lq);
        }
        Experiment::PressureL1 => rec.pressure_l1 = Some(pressure_l1(&traj, setup.window, &p)?),
        Experiment::Incompressibility => {
            let band = setup.band.width(&state0, &p)?;
            let d = incompressibility_diagnostic(&traj, band);
            rec.band = Some(band);
            rec.congested_measure = Some(d.congested_measure);
            rec.incompressibility_sup = Some(d.sup_dxu_on_congested);
        }
        Experiment::MaxDensity => unreachable!(),
    }
    Ok(rec)
}

fn fit_of(records: &[EpsilonRecord], f: impl Fn(&EpsilonRecord) -> Option<f64>) -> Result<ScalingFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records.iter().filter_map(|r| f(r).map(|y| (r.epsilon, y))).unzip();
    scaling_fit(&xs, &ys)
}

/// Runs the experiment for every `eps` of the strictly decreasing list, fits
/// the metric against `eps` in log-log scale and flags the expected behavior.
pub fn epsilon_sweep(setup: &SweepSetup, base: &PressureParams, eps_list: &[f64], experiment: Experiment) -> Result<ExperimentReport> {
    check_list(eps_list, setup, base)?;
    if experiment == Experiment::Blowup && setup.solver == SweepSolver::Viscous {
        return Err(Error::Config("blow-up sweeps need the smooth solver".into()));
    }
    let records: Vec<EpsilonRecord> = eps_list
        .par_iter()
        .map(|&eps| run_one(setup, base.with_epsilon(eps), experiment))
        .collect::<Result<Vec<_>>>()?;
    let g = base.gamma;
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    match experiment {
        Experiment::MaxDensity => {
            let f = fit_of(&records, |r| r.max_rho.map(|m| 1.0 - m))?;
            let e = 1.0 / (g - 1.0);
            checks.push(Check::new("slope of 1 - max rho", format!("{e} +/- 0.15"), f.slope, (f.slope - e).abs() <= 0.15));
            fits.push(NamedFit::new("one_minus_max_rho", f));
        }
        Experiment::Blowup => {
            let every = records.iter().all(|r| r.breakdown_mode == Some(BreakdownMode::GradientBlowup));
            checks.push(Check::new("gradient blow-up for every eps", "true", every as u8 as f64, every));
            let t_min = records.iter().map(|r| r.t_star_numeric.unwrap_or(r.t_reached)).fold(f64::INFINITY, f64::min);
            let lb_max = records.iter().filter_map(|r| r.t_star_lower_bound).fold(0.0, f64::max);
            checks.push(Check::new("min t_star / max lower bound", ">= 0.8", t_min / lb_max, t_min >= 0.8 * lb_max));
            let below = records.iter().all(|r| r.t_star_lower_bound.unwrap_or(0.0) <= r.t_star_numeric.unwrap_or(f64::INFINITY));
            checks.push(Check::new("lower bound below detected time", "true", below as u8 as f64, below));
            if let Ok(f) = fit_of(&records, |r| r.t_star_numeric) {
                fits.push(NamedFit::new("t_star_numeric", f));
            }
        }
        Experiment::Exclusion => {
            let f = fit_of(&records, |r| r.exclusion_residual)?;
            let e = 1.0 / g - 0.15;
            checks.push(Check::new("slope of exclusion residual", format!(">= {e}"), f.slope, f.slope >= e));
            fits.push(NamedFit::new("exclusion_residual", f));
            if let Ok(f) = fit_of(&records, |r| r.exclusion_residual_lq) {
                fits.push(NamedFit::new("exclusion_residual_lq", f));
            }
        }
        Experiment::PressureL1 => {
            let f = fit_of(&records, |r| r.pressure_l1)?;
            checks.push(Check::new("slope of pressure L1", "0 +/- 0.15", f.slope, f.slope.abs() <= 0.15));
            fits.push(NamedFit::new("pressure_l1", f));
        }
        Experiment::Incompressibility => {
            let sups: Vec<f64> = records.iter().map(|r| r.incompressibility_sup.unwrap_or(0.0)).collect();
            let ok = sups.windows(2).all(|w| w[1] <= 1.1 * w[0]);
            let worst = sups.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 }).fold(0.0, f64::max);
            checks.push(Check::new("sup |u_x| on congested set non-increasing", "successive ratio <= 1.1", worst, ok));
            let nonempty = records.iter().any(|r| r.congested_measure.unwrap_or(0.0) > 0.0);
            checks.push(Check::new("congested set nonempty for some eps", "true", nonempty as u8 as f64, nonempty));
            if let Ok(f) = fit_of(&records, |r| r.incompressibility_sup) {
                fits.push(NamedFit::new("incompressibility_sup", f));
            }
        }
    }
    if experiment != Experiment::Blowup && experiment != Experiment::MaxDensity {
        let reached = records.iter().all(|r| r.t_reached >= setup.t_end * (1.0 - 1e-12));
        checks.push(Check::new("every run reached t_end", "true", reached as u8 as f64, reached));
    }
    let passed = checks.iter().all(|c| c.pass);
    Ok(ExperimentReport {
        experiment,
        records,
        fits,
        checks,
        passed,
        config: serde_json::json!({ "setup": setup, "params": base, "eps_list": eps_list, "experiment": experiment }),
    })
}
