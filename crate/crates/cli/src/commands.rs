//! Execution of each command and the artifacts it writes.

use std::fmt;
use std::path::Path;

use hardsphere::entropy::{self, PairId};
use hardsphere::eos::{self, PressureParams};
use hardsphere::limits::fit::scaling_fit;
use hardsphere::limits::sweep::{epsilon_sweep, Check, ExperimentReport};
use hardsphere::limits::transform::{eulerian_to_lagrangian, lagrangian_to_eulerian};
use hardsphere::psystem::{self, BreakdownMode, SmoothConfig};
use hardsphere::riemann::{self, DatumClass, LagrangianState};
use hardsphere::trajectory::{EulerianTrajectory, LagrangianTrajectory};
use hardsphere::viscous::{self, Boundary, ViscousConfig};
use hardsphere::Grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    BlowupConfig, BoundarySpec, CoeffConfig, Command, EntropyConfig, EosTableConfig, EulerConfig, Expectation, GridSpec,
    PsystemConfig, RegimeCheck, RunConfig, SweepConfig,
};
use crate::datum::Datum;
use crate::output::{num, Artifacts, WriteError};

/// Failure of a run, mapped to exit status 2.
#[derive(Debug)]
pub enum RunError {
    Core(hardsphere::Error),
    Write(WriteError),
    Invalid(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Core(e) => write!(f, "runtime error: {e}"),
            RunError::Write(e) => write!(f, "output error: {e}"),
            RunError::Invalid(m) => write!(f, "validation error: {m}"),
        }
    }
}

impl From<hardsphere::Error> for RunError {
    fn from(e: hardsphere::Error) -> Self {
        RunError::Core(e)
    }
}

impl From<WriteError> for RunError {
    fn from(e: WriteError) -> Self {
        RunError::Write(e)
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// Verdict and human-readable summary of a finished run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub summary: Vec<String>,
}

/// Report written to `report.json` by every command.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    passed: bool,
    checks: &'a [Check],
    results: T,
    config: &'a RunConfig,
}

fn finish<T: Serialize>(art: &mut Artifacts, cfg: &RunConfig, checks: Vec<Check>, results: T) -> Result<Outcome> {
    let passed = checks.iter().all(|c| c.pass);
    art.json("report.json", &Report { command: cfg.command.name(), passed, checks: &checks, results, config: cfg })?;
    let summary = checks
        .iter()
        .map(|c| format!("{} {}: {:.6e} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.observed, c.expected))
        .collect();
    Ok(Outcome { passed, summary })
}

/// Runs the configured command and writes its artifacts under `out`.
pub fn execute(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut art = Artifacts::create(out)?;
    let outcome = match cfg.command {
        Command::EosTable => eos_table(cfg, &cfg.eos_table.clone().unwrap_or_default(), &mut art),
        Command::CoeffCheck => coeff_check(cfg, &cfg.coeff_check.clone().unwrap_or_default(), &mut art),
        Command::SimulateEuler => simulate_euler(cfg, section(&cfg.simulate_euler)?, &mut art),
        Command::SimulatePsystem => simulate_psystem(cfg, section(&cfg.simulate_psystem)?, &mut art),
        Command::BlowupStudy => blowup_study(cfg, section(&cfg.blowup_study)?, &mut art),
        Command::EpsilonSweep => sweep(cfg, section(&cfg.epsilon_sweep)?, &mut art),
        Command::EntropyCheck => entropy_check(cfg, section(&cfg.entropy_check)?, &mut art),
    }?;
    art.finish()?;
    Ok(outcome)
}

fn section<T>(s: &Option<T>) -> Result<&T> {
    s.as_ref().ok_or_else(|| RunError::Invalid("missing command section".into()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Grid on `[a, b]`: `n` cells of width `(b - a)/n` when periodic, else `n`
/// nodes including both ends.
fn make_grid(g: &GridSpec, periodic: bool) -> Grid {
    if periodic {
        Grid::new(g.a, (g.b - g.a) / g.n as f64, g.n)
    } else {
        Grid::spanning(g.a, g.b, g.n)
    }
}

fn boundary(b: BoundarySpec) -> Boundary {
    match b {
        BoundarySpec::Periodic => Boundary::Periodic,
        BoundarySpec::ConstantExtension => Boundary::ConstantExtension,
    }
}

/// Observed convergence order between two error levels; a vanishing finer
/// error counts as infinite order.
fn observed_order(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    if e1 == 0.0 {
        f64::INFINITY
    } else if e0 == 0.0 {
        f64::NEG_INFINITY
    } else {
        (e0 / e1).ln() / (h0 / h1).ln()
    }
}

fn validate_datum(d: &Datum, p: &PressureParams) -> Result<()> {
    d.validate(p).map_err(|e| RunError::Invalid(e.message.trim_start_matches("validation error: ").to_string()))
}

#[derive(Serialize)]
struct RegimeResult {
    gamma: f64,
    alpha: f64,
    slope: f64,
    expected: f64,
    r2: f64,
}

fn regime_slopes(base: &PressureParams, check: &RegimeCheck) -> Result<(Vec<RegimeResult>, Vec<Vec<String>>)> {
    let mut results = Vec::new();
    let mut rows = Vec::new();
    let steps = (2.0 * check.decades).round() as usize;
    for &gamma in &check.gammas {
        let alpha = check.alpha.unwrap_or(2.0 / (gamma + 1.0));
        let eps: Vec<f64> = (0..=steps).map(|k| base.epsilon * 10f64.powf(-0.5 * k as f64)).collect();
        let mut a = Vec::with_capacity(eps.len());
        for &e in &eps {
            let p = PressureParams { epsilon: e, gamma, ..*base };
            let gap = e.powf(alpha);
            let coeff = eos::riccati_coefficient(1.0 + gap, &p)?;
            rows.push(vec![num(gamma), num(e), num(gap), num(coeff)]);
            a.push(coeff);
        }
        let fit = scaling_fit(&eps, &a)?;
        let expected = -(1.0 + alpha * (3.0 - gamma)) / 4.0;
        results.push(RegimeResult { gamma, alpha, slope: fit.slope, expected, r2: fit.r2 });
    }
    Ok((results, rows))
}

#[derive(Serialize)]
struct EosResults {
    rows: usize,
    identity_max_rel_error: Option<f64>,
    closed_form_max_rel_error: Option<f64>,
    regimes: Vec<RegimeResult>,
}

fn eos_table(cfg: &RunConfig, c: &EosTableConfig, art: &mut Artifacts) -> Result<Outcome> {
    let p = cfg.params;
    let table = eos::eos_table(&p, c.v_max, c.rows)?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            [r.v, r.rho, r.pressure, r.singular_part, r.isentropic_part, r.dp_dv, r.d2p_dv2, r.sound_speed, r.theta, r.riccati_a]
                .iter()
                .map(|&x| num(x))
                .collect()
        })
        .collect();
    art.csv(
        "eos_table.csv",
        &["v", "rho", "pressure", "singular_part", "isentropic_part", "dp_dv", "d2p_dv2", "sound_speed", "theta", "riccati_a"],
        &rows,
    )?;
    let mut checks = Vec::new();
    let mut results = EosResults { rows: table.len(), identity_max_rel_error: None, closed_form_max_rel_error: None, regimes: Vec::new() };
    if c.check_identities {
        let mut worst = 0.0f64;
        let mut worst_closed = 0.0f64;
        for r in &table {
            let h = 1e-3 * (r.v - 1.0);
            let dtheta = richardson(|s| eos::theta_lagrangian(s, &p).unwrap_or(f64::NAN), r.v, h);
            worst = worst.max(rel(dtheta, -r.sound_speed));
            let rho = r.rho;
            let h = 1e-3 * rho.min(1.0 - rho);
            let dh = richardson(|s| eos::internal_energy(s, &p).unwrap_or(f64::NAN), rho, h);
            worst = worst.max(rel(rho * dh - eos::internal_energy(rho, &p)?, eos::pressure_eulerian(rho, &p)?));
            if p.kappa == 0.0 {
                worst_closed = worst_closed.max(rel(eos::theta_lagrangian_quadrature(r.v, &p)?, r.theta));
            }
        }
        checks.push(Check::new("identity_max_rel_error", "< 1e-8", worst, worst < 1e-8));
        results.identity_max_rel_error = Some(worst);
        if p.kappa == 0.0 {
            checks.push(Check::new("closed_form_max_rel_error", "< 1e-10", worst_closed, worst_closed < 1e-10));
            results.closed_form_max_rel_error = Some(worst_closed);
        }
    }
    if let Some(rc) = &c.regime_check {
        let (regimes, rows) = regime_slopes(&p, rc)?;
        art.csv("regimes.csv", &["gamma", "epsilon", "v_minus_1", "riccati_a"], &rows)?;
        for r in &regimes {
            let ok = (r.slope - r.expected).abs() <= rc.tolerance;
            checks.push(Check::new(&format!("slope_gamma_{}", r.gamma), format!("{:.4} ± {}", r.expected, rc.tolerance), r.slope, ok));
        }
        results.regimes = regimes;
    }
    finish(art, cfg, checks, results)
}

#[derive(Serialize)]
struct CoeffResults {
    samples: usize,
    max_rel_error: f64,
    c1_vanishes_at_gamma_3: bool,
}

fn coeff_check(cfg: &RunConfig, c: &CoeffConfig, art: &mut Artifacts) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let (le0, le1) = (c.eps_range.0.log10(), c.eps_range.1.log10());
    let mut worst = 0.0f64;
    let mut rows = Vec::with_capacity(c.samples);
    for _ in 0..c.samples {
        let rho = rng.gen_range(c.rho_range.0..c.rho_range.1);
        let eps = 10f64.powf(if le1 > le0 { rng.gen_range(le0..le1) } else { le0 });
        let gamma = rng.gen_range(c.gamma_range.0..c.gamma_range.1).max(1.0 + 1e-3);
        let r = entropy::coefficient_identities(rho, &PressureParams { epsilon: eps, gamma, ..cfg.params })?;
        worst = worst.max(r.max_rel_error);
        rows.push(
            [rho, eps, gamma, r.set.c1, r.set.c2, r.set.c3, r.c1_closed, r.c2_closed, r.c3_closed, r.max_rel_error]
                .iter()
                .map(|&x| num(x))
                .collect(),
        );
    }
    art.csv(
        "coefficients.csv",
        &["rho_bar", "epsilon", "gamma", "c1", "c2", "c3", "c1_closed", "c2_closed", "c3_closed", "max_rel_error"],
        &rows,
    )?;
    let mut c1_zero = true;
    for rho in [0.1, 0.5, 0.9] {
        let r = entropy::coefficient_identities(rho, &PressureParams { gamma: 3.0, ..cfg.params })?;
        c1_zero &= r.c1_closed == 0.0 && r.set.c1.abs() <= 1e-12 * r.set.b1.abs();
    }
    let checks = vec![
        Check::new("max_rel_error", format!("< {:e}", c.tolerance), worst, worst < c.tolerance),
        Check::new("c1_at_gamma_3", "0", if c1_zero { 0.0 } else { 1.0 }, c1_zero),
    ];
    finish(art, cfg, checks, CoeffResults { samples: c.samples, max_rel_error: worst, c1_vanishes_at_gamma_3: c1_zero })
}

fn viscous_config(cfg: &RunConfig, c: &EulerConfig, grid: Grid, mu: f64) -> ViscousConfig {
    let mut v = ViscousConfig::new(mu, cfg.params, grid, c.t_end);
    v.cfl_safety = c.cfl_safety;
    v.snapshot_every = c.snapshot_every;
    v.boundary = boundary(c.boundary);
    v.domain_guard = c.domain_guard;
    v
}

fn euler_rows(traj: &EulerianTrajectory, p: &PressureParams) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for (snap, diag) in traj.snapshots.iter().zip(&traj.diagnostics) {
        let s = &snap.state;
        let (w, z) = riemann::riemann_invariants_eulerian(s, p)?;
        for i in 0..s.grid.n {
            let u = if s.rho[i] > 0.0 { s.m[i] / s.rho[i] } else { 0.0 };
            rows.push(vec![num(snap.t), num(s.grid.x(i)), num(s.rho[i]), num(s.m[i]), num(u), num(w[i]), num(z[i]), num(diag.margin)]);
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct LevelResult {
    n: usize,
    mu: f64,
    dx: f64,
    min_margin: f64,
    deficit: f64,
    frame_l1: Option<f64>,
}

#[derive(Serialize)]
struct EulerResults {
    snapshots: usize,
    min_margin: f64,
    max_rho: f64,
    final_mass: f64,
    levels: Vec<LevelResult>,
}

/// `L^1` distance of `v` between the mapped viscous run and the smooth solver
/// over the middle half of the mass grid.
fn frame_distance(traj: &EulerianTrajectory, p: &PressureParams) -> Result<f64> {
    let lag = eulerian_to_lagrangian(traj)?;
    let s0 = &lag.first().state;
    let (smooth, _) = psystem::run_smooth(&SmoothConfig::new(*p, s0.grid, traj.meta.t_end), &s0.v, &s0.u)?;
    let (a, b) = (&lag.last().state, &smooth.last().state);
    let g = s0.grid;
    let (lo, hi) = (g.x(g.n / 4), g.x(3 * g.n / 4));
    Ok((0..g.n).filter(|&i| g.x(i) >= lo && g.x(i) <= hi).map(|i| (a.v[i] - b.v[i]).abs() * g.dx).sum())
}

fn simulate_euler(cfg: &RunConfig, c: &EulerConfig, art: &mut Artifacts) -> Result<Outcome> {
    let p = cfg.params;
    validate_datum(&c.initial, &p)?;
    let periodic = c.boundary == BoundarySpec::Periodic;
    let grid = make_grid(&c.grid, periodic);
    let (rho, m) = c.initial.eulerian(&grid, &p);
    let traj = viscous::run(&viscous_config(cfg, c, grid, c.mu), &rho, &m)?;
    art.csv("trajectory.csv", &["t", "x", "rho", "m", "u", "w", "z", "margin"], &euler_rows(&traj, &p)?)?;
    let diag_rows: Vec<Vec<String>> = traj
        .diagnostics
        .iter()
        .map(|d| {
            let mut r: Vec<String> =
                [d.t, d.margin, d.mass, d.max_rho, d.max_momentum_ratio, d.dissipation, d.left_outflow].iter().map(|&x| num(x)).collect();
            r.push(d.steps.to_string());
            r
        })
        .collect();
    art.csv(
        "diagnostics.csv",
        &["t", "margin", "mass", "max_rho", "max_momentum_ratio", "dissipation", "left_outflow", "steps"],
        &diag_rows,
    )?;
    let min_margin = traj.diagnostics.iter().map(|d| d.margin).fold(f64::INFINITY, f64::min);
    let max_rho = traj.diagnostics.iter().map(|d| d.max_rho).fold(0.0, f64::max);
    let mut checks = Vec::new();

    let runs: Vec<(Grid, f64, EulerianTrajectory)> = c
        .refinement
        .par_iter()
        .map(|lv| {
            let g = make_grid(&GridSpec { n: lv.n, ..c.grid }, periodic);
            let (rho, m) = c.initial.eulerian(&g, &p);
            viscous::run(&viscous_config(cfg, c, g, lv.mu), &rho, &m).map(|t| (g, lv.mu, t))
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut levels = Vec::new();
    for (g, mu, t) in &runs {
        let min = t.diagnostics.iter().map(|d| d.margin).fold(f64::INFINITY, f64::min);
        let frame_l1 = if c.frame_check { Some(frame_distance(t, &p)?) } else { None };
        levels.push(LevelResult { n: g.n, mu: *mu, dx: g.dx, min_margin: min, deficit: (-min).max(0.0), frame_l1 });
    }
    if !levels.is_empty() {
        let worst = levels.iter().map(|l| l.min_margin / l.dx).fold(f64::INFINITY, f64::min);
        checks.push(Check::new("margin_over_dx", ">= -5", worst, worst >= -5.0));
        let orders: Vec<f64> = levels
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                levels[i + 1..].iter().find(|b| b.mu == a.mu).map(|b| observed_order(a.deficit, b.deficit, a.dx, b.dx))
            })
            .collect();
        if !orders.is_empty() {
            let worst_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
            checks.push(Check::new("deficit_order", ">= 1", worst_order, worst_order >= 1.0));
        }
        if c.frame_check {
            let e: Vec<f64> = levels.iter().filter_map(|l| l.frame_l1).collect();
            let ratio = e.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            checks.push(Check::new("frame_l1_ratio", "< 1 (errors decrease)", ratio, ratio < 1.0));
        }
        let rows: Vec<Vec<String>> = levels
            .iter()
            .map(|l| vec![l.n.to_string(), num(l.mu), num(l.dx), num(l.min_margin), num(l.deficit), l.frame_l1.map(num).unwrap_or_default()])
            .collect();
        art.csv("refinement.csv", &["n", "mu", "dx", "min_margin", "deficit", "frame_l1"], &rows)?;
    }
    let results = EulerResults { snapshots: traj.len(), min_margin, max_rho, final_mass: traj.diagnostics.last().map_or(0.0, |d| d.mass), levels };
    finish(art, cfg, checks, results)
}

fn smooth_config(p: PressureParams, grid: Grid, t_end: f64, snapshot_every: usize, gradient_factor: f64) -> SmoothConfig {
    let mut s = SmoothConfig::new(p, grid, t_end);
    s.snapshot_every = snapshot_every;
    s.gradient_factor = gradient_factor;
    s
}

fn psystem_rows(traj: &LagrangianTrajectory, p: &PressureParams) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for snap in &traj.snapshots {
        let s = &snap.state;
        let (w, z) = riemann::riemann_invariants_lagrangian(s, p)?;
        let (y, q) = riemann::riccati_variables(s, p)?;
        for i in 0..s.grid.n {
            let a = eos::riccati_coefficient(s.v[i], p)?;
            rows.push([snap.t, s.grid.x(i), s.v[i], s.u[i], w[i], z[i], y[i], q[i], a].iter().map(|&x| num(x)).collect());
        }
    }
    Ok(rows)
}

fn lagrange_diag_rows(traj: &LagrangianTrajectory) -> Vec<Vec<String>> {
    traj.diagnostics
        .iter()
        .map(|d| [d.t, d.max_grad_v, d.max_grad_u, d.min_v, d.max_v, d.max_abs_u, d.min_y, d.min_q, d.dt].iter().map(|&x| num(x)).collect())
        .collect()
}

const LAGRANGE_DIAG_HEADER: [&str; 9] = ["t", "max_grad_v", "max_grad_u", "min_v", "max_v", "max_abs_u", "min_y", "min_q", "dt"];

/// Serializable summary of a breakdown.
#[derive(Debug, Clone, Serialize)]
struct Breakdown {
    mode: BreakdownMode,
    t_star: f64,
    x: f64,
    bracket: (f64, f64),
}

impl Breakdown {
    fn from_record(r: &psystem::BreakdownRecord, grid: &Grid) -> Self {
        Self { mode: r.mode, t_star: r.t_star_numeric, x: grid.x(r.location), bracket: r.bracket }
    }
}

#[derive(Serialize)]
struct PsystemResults {
    class: DatumClass,
    triggers: psystem::Triggers,
    outcome: String,
    breakdown: Option<Breakdown>,
    t_reached: f64,
    lower_bound: f64,
    snapshots: usize,
}

fn outcome_text(b: &Option<Breakdown>) -> String {
    match b {
        None => "no breakdown".into(),
        Some(b) => format!("{:?} at t = {}", b.mode, b.t_star),
    }
}

fn simulate_psystem(cfg: &RunConfig, c: &PsystemConfig, art: &mut Artifacts) -> Result<Outcome> {
    let p = cfg.params;
    validate_datum(&c.initial, &p)?;
    let grid = make_grid(&c.grid, false);
    let (v, u) = c.initial.lagrangian(&grid, &p);
    let mut sc = smooth_config(p, grid, c.t_end, c.snapshot_every, c.gradient_factor);
    sc.cfl_safety = c.cfl_safety;
    let state0 = LagrangianState::new(grid, v.clone(), u.clone())?;
    let triggers = psystem::triggers(&sc, &state0)?;
    let (traj, br) = psystem::run_smooth(&sc, &v, &u)?;
    art.csv("trajectory.csv", &["t", "x", "v", "u", "w", "z", "y", "q", "a_eps"], &psystem_rows(&traj, &p)?)?;
    art.csv("diagnostics.csv", &LAGRANGE_DIAG_HEADER, &lagrange_diag_rows(&traj))?;
    let breakdown = br.as_ref().map(|b| Breakdown::from_record(b, &grid));
    let results = PsystemResults {
        class: riemann::classify_initial_datum(&state0, &p)?,
        triggers,
        outcome: outcome_text(&breakdown),
        breakdown,
        t_reached: traj.last().t,
        lower_bound: psystem::blowup_lower_bound(&state0, &p)?.time,
        snapshots: traj.len(),
    };
    let mut out = finish(art, cfg, Vec::new(), &results)?;
    out.summary.push(format!("outcome: {}", results.outcome));
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
struct BlowupRecord {
    epsilon: f64,
    class: DatumClass,
    outcome: String,
    breakdown: Option<Breakdown>,
    lower_bound: f64,
    predicted: Option<f64>,
    max_gradient: f64,
    t_reached: f64,
}

#[derive(Debug, Clone, Serialize)]
struct RefinementRecord {
    n: usize,
    dx: f64,
    t_star: Option<f64>,
    reference: Option<f64>,
    rel_error: Option<f64>,
}

#[derive(Serialize)]
struct BlowupResults {
    records: Vec<BlowupRecord>,
    gradient_spread: Option<f64>,
    refinement: Vec<RefinementRecord>,
}

fn blowup_one(cfg: &RunConfig, c: &BlowupConfig, grid: Grid, eps: f64) -> Result<BlowupRecord> {
    let p = cfg.params.with_epsilon(eps);
    let (v, u) = c.initial.lagrangian(&grid, &p);
    let state0 = LagrangianState::new(grid, v.clone(), u.clone())?;
    let (traj, br) = psystem::run_smooth(&smooth_config(p, grid, c.t_end, c.snapshot_every, c.gradient_factor), &v, &u)?;
    let breakdown = br.as_ref().map(|b| Breakdown::from_record(b, &grid));
    let predicted = if breakdown.is_some() { Some(psystem::predict_blowup_time(&traj)?.t_star) } else { None };
    Ok(BlowupRecord {
        epsilon: eps,
        class: riemann::classify_initial_datum(&state0, &p)?,
        outcome: outcome_text(&breakdown),
        breakdown,
        lower_bound: psystem::blowup_lower_bound(&state0, &p)?.time,
        predicted,
        max_gradient: traj.diagnostics.iter().map(|d| d.max_grad_v.max(d.max_grad_u)).fold(0.0, f64::max),
        t_reached: traj.last().t,
    })
}

/// Blow-up time `1/max(a max(-y0, -q0))` of data whose Riccati coefficient
/// is constant, sampled on a fine copy of the grid.
fn constant_coefficient_time(c: &BlowupConfig, p: &PressureParams) -> Result<f64> {
    let grid = Grid::spanning(c.grid.a, c.grid.b, 200_001);
    let (v, u) = c.initial.lagrangian(&grid, p);
    let (y, q) = riemann::riccati_variables(&LagrangianState::new(grid, v.clone(), u)?, p)?;
    let a: Vec<f64> = v.iter().map(|&v| eos::riccati_coefficient(v, p)).collect::<hardsphere::Result<_>>()?;
    let (lo, hi) = a.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    if hi - lo > 1e-8 * hi {
        return Err(RunError::Invalid("exact_check requires a constant Riccati coefficient".into()));
    }
    let worst = (0..grid.n).map(|i| a[i] * (-y[i]).max(-q[i])).fold(0.0, f64::max);
    if !(worst > 0.0) {
        return Err(RunError::Invalid("exact_check requires compressive data".into()));
    }
    Ok(1.0 / worst)
}

fn blowup_study(cfg: &RunConfig, c: &BlowupConfig, art: &mut Artifacts) -> Result<Outcome> {
    validate_datum(&c.initial, &cfg.params)?;
    let eps_list = if c.eps_list.is_empty() { vec![cfg.params.epsilon] } else { c.eps_list.clone() };
    let grid = make_grid(&c.grid, false);
    let records: Vec<BlowupRecord> =
        eps_list.par_iter().map(|&e| blowup_one(cfg, c, grid, e)).collect::<Result<_>>()?;
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let class = match r.class {
                DatumClass::EverywhereRarefactive => "rarefactive",
                DatumClass::Compressive { .. } => "compressive",
            };
            let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
            vec![
                num(r.epsilon),
                class.into(),
                r.outcome.clone(),
                opt(r.breakdown.as_ref().map(|b| b.t_star)),
                num(r.lower_bound),
                opt(r.predicted),
                num(r.max_gradient),
                num(r.t_reached),
            ]
        })
        .collect();
    art.csv("blowup.csv", &["epsilon", "class", "outcome", "t_star", "lower_bound", "predicted", "max_gradient", "t_reached"], &rows)?;

    let mut checks = Vec::new();
    let (gmin, gmax) = records.iter().fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r.max_gradient), h.max(r.max_gradient)));
    let spread = (records.len() > 1).then(|| gmax / gmin);
    match c.expect {
        Some(Expectation::NoBreakdown) => {
            let n = records.iter().filter(|r| r.breakdown.is_none() && r.t_reached == c.t_end).count();
            checks.push(Check::new("runs_without_breakdown", format!("{}", records.len()), n as f64, n == records.len()));
            if let Some(s) = spread {
                checks.push(Check::new("gradient_spread", format!("< {}", c.gradient_spread), s, s < c.gradient_spread));
            }
        }
        Some(Expectation::GradientBlowup) => {
            let n = records.iter().filter(|r| r.breakdown.as_ref().is_some_and(|b| b.mode == BreakdownMode::GradientBlowup)).count();
            checks.push(Check::new("gradient_blowups", format!("{}", records.len()), n as f64, n == records.len()));
        }
        None => {}
    }
    if c.bound_checks {
        let mut margin = f64::INFINITY;
        let mut gap = 0.0f64;
        for r in &records {
            let t = r.breakdown.as_ref().map_or(f64::NAN, |b| b.t_star);
            margin = margin.min(t / r.lower_bound);
            gap = gap.max(r.predicted.map_or(f64::INFINITY, |x| rel(x, t)));
        }
        checks.push(Check::new("t_star_over_lower_bound", ">= 1", margin, margin >= 1.0));
        checks.push(Check::new("prediction_rel_gap", format!("<= {}", c.prediction_tolerance), gap, gap <= c.prediction_tolerance));
    }

    let reference = if c.exact_check { Some(constant_coefficient_time(c, &cfg.params)?) } else { None };
    let refinement: Vec<RefinementRecord> = c
        .refinement
        .par_iter()
        .map(|&n| {
            let g = make_grid(&GridSpec { n, ..c.grid }, false);
            let (v, u) = c.initial.lagrangian(&g, &cfg.params);
            let (_, br) = psystem::run_smooth(&smooth_config(cfg.params, g, c.t_end, c.snapshot_every, c.gradient_factor), &v, &u)?;
            let t_star = br.map(|b| b.t_star_numeric);
            let rel_error = reference.map(|r| t_star.map_or(f64::INFINITY, |t| rel(t, r)));
            Ok(RefinementRecord { n, dx: g.dx, t_star, reference, rel_error })
        })
        .collect::<Result<_>>()?;
    if !refinement.is_empty() {
        let rows: Vec<Vec<String>> = refinement
            .iter()
            .map(|r| {
                let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
                vec![r.n.to_string(), num(r.dx), opt(r.t_star), opt(r.reference), opt(r.rel_error)]
            })
            .collect();
        art.csv("refinement.csv", &["n", "dx", "t_star", "reference", "rel_error"], &rows)?;
        if reference.is_some() {
            let errs: Vec<f64> = refinement.iter().filter_map(|r| r.rel_error).collect();
            let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
            let last = errs.last().copied().unwrap_or(f64::INFINITY);
            checks.push(Check::new("errors_nonincreasing", "true", if monotone { 1.0 } else { 0.0 }, monotone));
            checks.push(Check::new("finest_rel_error", format!("<= {}", c.exact_tolerance), last, last <= c.exact_tolerance));
        }
    }
    let mut out = finish(art, cfg, checks, BlowupResults { records: records.clone(), gradient_spread: spread, refinement })?;
    for r in &records {
        out.summary.push(format!("eps {:e}: {}", r.epsilon, r.outcome));
    }
    Ok(out)
}

fn sweep(cfg: &RunConfig, c: &SweepConfig, art: &mut Artifacts) -> Result<Outcome> {
    let report: ExperimentReport = epsilon_sweep(&c.setup, &cfg.params, &c.eps_list, c.experiment)?;
    let rows: Vec<Vec<String>> = report.long_rows().into_iter().map(|(m, e, v)| vec![m, num(e), num(v)]).collect();
    art.csv("sweep.csv", &["metric", "epsilon", "value"], &rows)?;
    for (i, r) in report.records.iter().enumerate() {
        let rows: Vec<Vec<String>> =
            report.long_rows().into_iter().filter(|(_, e, _)| *e == r.epsilon).map(|(m, _, v)| vec![m, num(v)]).collect();
        art.csv(&format!("eps_{i:02}.csv"), &["metric", "value"], &rows)?;
    }
    let fits: Vec<Vec<String>> =
        report.fits.iter().map(|f| vec![f.name.clone(), num(f.slope), num(f.intercept), num(f.r2)]).collect();
    art.csv("fits.csv", &["name", "slope", "intercept", "r2"], &fits)?;
    finish(art, cfg, report.checks.clone(), &report)
}

#[derive(Serialize)]
struct EntropyResults {
    sizes: Vec<usize>,
    residuals: Vec<[f64; 4]>,
    min_order: f64,
    dissipation: Option<viscous::ViscositySweepReport>,
}

fn entropy_check(cfg: &RunConfig, c: &EntropyConfig, art: &mut Artifacts) -> Result<Outcome> {
    let p = cfg.params;
    validate_datum(&c.initial, &p)?;
    let runs: Vec<(Grid, [f64; 4])> = c
        .sizes
        .par_iter()
        .map(|&n| {
            let grid = Grid::spanning(c.a, c.b, n);
            let (v, u) = c.initial.lagrangian(&grid, &p);
            let mut sc = SmoothConfig::new(p, grid, c.t_end);
            sc.snapshot_dt = Some(c.snapshot_factor * grid.dx);
            let (traj, _) = psystem::run_smooth(&sc, &v, &u)?;
            let eul = lagrangian_to_eulerian(&traj)?;
            let mut r = [0.0; 4];
            for (k, id) in PairId::all().into_iter().enumerate() {
                r[k] = entropy::entropy_residual(&eul, id, &p)?;
            }
            Ok((grid, r))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut min_order = f64::INFINITY;
    for (i, (g, r)) in runs.iter().enumerate() {
        for k in 0..4 {
            let order = if i > 0 { observed_order(runs[i - 1].1[k], r[k], runs[i - 1].0.dx, g.dx) } else { f64::NAN };
            if i > 0 {
                min_order = min_order.min(order);
            }
            rows.push(vec![g.n.to_string(), (k + 1).to_string(), num(r[k]), if i > 0 { num(order) } else { String::new() }]);
        }
    }
    art.csv("residuals.csv", &["n", "pair", "residual", "order"], &rows)?;
    let mut checks = vec![Check::new("min_residual_order", format!(">= {}", c.min_order), min_order, min_order >= c.min_order)];
    let dissipation = match &c.dissipation {
        None => None,
        Some(d) => {
            validate_datum(&d.initial, &p)?;
            let grid = make_grid(&d.grid, d.boundary == BoundarySpec::Periodic);
            let (rho, m) = d.initial.eulerian(&grid, &p);
            let mut base = ViscousConfig::new(d.mus[0], p, grid, d.t_end);
            base.boundary = boundary(d.boundary);
            base.snapshot_every = d.snapshot_every;
            let rep = viscous::vanishing_viscosity_sweep(&base, &d.mus, &rho, &m)?;
            let rows: Vec<Vec<String>> = rep
                .records
                .iter()
                .map(|r| {
                    vec![num(r.mu), num(r.dissipation_total), num(r.mu2_grad_rho), num(r.mu2_grad_m), num(r.max_rho), num(r.min_margin)]
                })
                .collect();
            art.csv("dissipation.csv", &["mu", "dissipation_total", "mu2_grad_rho", "mu2_grad_m", "max_rho", "min_margin"], &rows)?;
            checks.push(Check::new("dissipation_ratio", format!("< {}", d.max_ratio), rep.dissipation_ratio, rep.dissipation_ratio < d.max_ratio));
            let dec = rep.mu2_gradients_decrease;
            checks.push(Check::new("mu2_gradients_decrease", "true", if dec { 1.0 } else { 0.0 }, dec));
            Some(rep)
        }
    };
    let results = EntropyResults { sizes: c.sizes.clone(), residuals: runs.iter().map(|r| r.1).collect(), min_order, dissipation };
    finish(art, cfg, checks, results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_vanishing_error_is_infinite() {
        assert_eq!(observed_order(1e-3, 0.0, 0.1, 0.05), f64::INFINITY);
        assert!((observed_order(4e-3, 1e-3, 0.1, 0.05) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_grid_excludes_right_end() {
        let g = make_grid(&GridSpec { a: 0.0, b: 1.0, n: 4 }, true);
        assert_eq!(g.dx, 0.25);
        assert_eq!(g.x_end(), 0.75);
        assert_eq!(make_grid(&GridSpec { a: 0.0, b: 1.0, n: 5 }, false).dx, 0.25);
    }
}
