//! Explicit solver for the viscous regularization
//! `rho_t + m_x = mu rho_xx`, `m_t + (m^2/rho + p(rho))_x = mu m_xx`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eos::PressureParams;
use crate::error::{Error, Result};
use crate::grid::{trapezoid, Grid};
use crate::riemann::{self, EulerianState, RegionBound};
use crate::trajectory::{EulerDiagnostics, EulerianTrajectory, RunMeta, Snapshot};

/// Density below which a cell is treated as vacuum.
pub const RHO_FLOOR: f64 = 1e-12;

/// Densities at or above `1 - CONGESTION_GAP` abort the run.
pub const CONGESTION_GAP: f64 = 1e-12;

/// Maximum number of step-size halvings after a rejected step.
pub const MAX_RETRIES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
    ConstantExtension,
}

/// Settings of a viscous run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViscousConfig {
    pub mu: f64,
    pub params: PressureParams,
    pub grid: Grid,
    pub t_end: f64,
    pub cfl_safety: f64,
    /// Steps between snapshots when `snapshot_dt` is unset.
    pub snapshot_every: usize,
    /// Exact time spacing of snapshots; the step size is shortened to land on them.
    pub snapshot_dt: Option<f64>,
    pub boundary: Boundary,
    /// Refuse runs whose initial signals could reach the boundary.
    pub domain_guard: bool,
}

impl ViscousConfig {
    pub fn new(mu: f64, params: PressureParams, grid: Grid, t_end: f64) -> Self {
        Self {
            mu,
            params,
            grid,
            t_end,
            cfl_safety: 0.4,
            snapshot_every: 100,
            snapshot_dt: None,
            boundary: Boundary::ConstantExtension,
            domain_guard: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate_weak()?;
        if !(self.mu > 0.0) {
            return Err(Error::Config("mu must be positive".into()));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::Config("cfl_safety must lie in (0, 1)".into()));
        }
        if self.grid.n < 16 {
            return Err(Error::Config("viscous grid needs at least 16 cells".into()));
        }
        if !(self.grid.dx > 0.0) || !(self.t_end > 0.0) {
            return Err(Error::Config("dx and t_end must be positive".into()));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every must be positive".into()));
        }
        if let Some(s) = self.snapshot_dt {
            if !(s > 0.0) {
                return Err(Error::Config("snapshot_dt must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Mollifier settings recorded with a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub half_width: f64,
    pub floor: f64,
}

/// Default ratio between the density floor of mollified data and `mu`.
pub const DEFAULT_FLOOR_SCALE: f64 = 1e-3;

/// Convolves the data with a normalized bump of half-width `max(3 dx, sqrt(mu))`
/// and lifts the density to at least `mu * floor_scale`.
pub fn mollify_initial(
    grid: &Grid,
    rho0: &[f64],
    m0: &[f64],
    mu: f64,
    floor_scale: f64,
) -> Result<(Vec<f64>, Vec<f64>, Mollifier)> {
    let n = grid.n;
    if rho0.len() != n || m0.len() != n {
        return Err(Error::Config("field length does not match the grid".into()));
    }
    for i in 0..n {
        if !(rho0[i] >= 0.0 && rho0[i] < 1.0) {
            return Err(Error::Domain { what: "initial density must lie in [0, 1)", value: rho0[i] });
        }
        if rho0[i] == 0.0 && m0[i] != 0.0 {
            return Err(Error::VacuumMomentum { cell: i, m: m0[i] });
        }
    }
    let half_width = (3.0 * grid.dx).max(mu.sqrt());
    let k = (half_width / grid.dx).floor() as isize;
    let mut weights: Vec<f64> = (-k..=k)
        .map(|j| {
            let r = j as f64 * grid.dx / half_width;
            if r.abs() < 1.0 {
                (-1.0 / (1.0 - r * r)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let floor = mu * floor_scale;
    let conv = |f: &[f64]| -> Vec<f64> {
        (0..n as isize)
            .map(|i| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(jj, w)| {
                        let idx = (i + jj as isize - k).clamp(0, n as isize - 1) as usize;
                        w * f[idx]
                    })
                    .sum()
            })
            .collect()
    };
    let mut rho = conv(rho0);
    let m = conv(m0);
    for r in rho.iter_mut() {
        *r = r.max(floor);
    }
    Ok((rho, m, Mollifier { half_width, floor }))
}

#[inline]
fn pressure_sound(rho: f64, p: &PressureParams) -> (f64, f64) {
    if rho <= RHO_FLOOR {
        return (0.0, 0.0);
    }
    let pr = p.epsilon * (rho / (1.0 - rho)).powf(p.gamma);
    let dp = p.gamma * pr / (rho * (1.0 - rho));
    (pr, dp.sqrt())
}

struct Workspace {
    rho: Vec<f64>,
    m: Vec<f64>,
    u: Vec<f64>,
    pr: Vec<f64>,
    c: Vec<f64>,
    flux_r: Vec<f64>,
    flux_m: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            rho: vec![0.0; n + 2],
            m: vec![0.0; n + 2],
            u: vec![0.0; n + 2],
            pr: vec![0.0; n + 2],
            c: vec![0.0; n + 2],
            flux_r: vec![0.0; n + 1],
            flux_m: vec![0.0; n + 1],
        }
    }

    /// Loads the state with one ghost cell per side and returns the largest
    /// characteristic speed.
    fn load(&mut self, st: &EulerianState, boundary: Boundary, p: &PressureParams) -> f64 {
        let n = st.grid.n;
        self.rho[1..=n].copy_from_slice(&st.rho);
        self.m[1..=n].copy_from_slice(&st.m);
        let (l, r) = match boundary {
            Boundary::Periodic => (n, 1),
            Boundary::ConstantExtension => (1, n),
        };
        self.rho[0] = self.rho[l];
        self.m[0] = self.m[l];
        self.rho[n + 1] = self.rho[r];
        self.m[n + 1] = self.m[r];
        let mut lam = 0.0f64;
        for i in 0..n + 2 {
            let rho = self.rho[i];
            let u = if rho > RHO_FLOOR { self.m[i] / rho } else { 0.0 };
            let (pr, c) = pressure_sound(rho, p);
            self.u[i] = u;
            self.pr[i] = pr;
            self.c[i] = c;
            lam = lam.max(u.abs() + c);
        }
        lam
    }

    fn fluxes(&mut self, n: usize) {
        for k in 0..=n {
            let (a, b) = (k, k + 1);
            let fa_r = self.m[a];
            let fb_r = self.m[b];
            let fa_m = self.m[a] * self.u[a] + self.pr[a];
            let fb_m = self.m[b] * self.u[b] + self.pr[b];
            let alpha = (self.u[a].abs() + self.c[a]).max(self.u[b].abs() + self.c[b]);
            self.flux_r[k] = 0.5 * (fa_r + fb_r) - 0.5 * alpha * (self.rho[b] - self.rho[a]);
            self.flux_m[k] = 0.5 * (fa_m + fb_m) - 0.5 * alpha * (self.m[b] - self.m[a]);
        }
    }
}

/// Result of a successful step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: EulerianState,
    pub dt: f64,
    /// Mass that crossed the left boundary interface (positive leftward).
    pub left_outflow: f64,
}

/// Largest stable step for the state.
pub fn stable_dt(state: &EulerianState, config: &ViscousConfig) -> f64 {
    let mut ws = Workspace::new(state.grid.n);
    let lam = ws.load(state, config.boundary, &config.params);
    stable_dt_from(lam, &config.grid, config)
}

fn stable_dt_from(lam: f64, grid: &Grid, config: &ViscousConfig) -> f64 {
    let diff = grid.dx * grid.dx / (2.0 * config.mu);
    let conv = if lam > 0.0 { grid.dx / lam } else { f64::INFINITY };
    config.cfl_safety * diff.min(conv)
}

/// One explicit Euler step of local Lax-Friedrichs convection plus centered
/// diffusion. `dt_cap` bounds the step from above; `t` labels errors.
pub fn step(state: &EulerianState, config: &ViscousConfig, t: f64, dt_cap: f64) -> Result<StepOutcome> {
    let mut ws = Workspace::new(state.grid.n);
    step_with(&mut ws, state, config, t, dt_cap)
}

fn step_with(ws: &mut Workspace, state: &EulerianState, config: &ViscousConfig, t: f64, dt_cap: f64) -> Result<StepOutcome> {
    let grid = state.grid;
    let n = grid.n;
    let lam = ws.load(state, config.boundary, &config.params);
    ws.fluxes(n);
    let mut dt = stable_dt_from(lam, &grid, config).min(dt_cap);
    let mu = config.mu;
    let mut rho = vec![0.0; n];
    let mut m = vec![0.0; n];
    for _attempt in 0..=MAX_RETRIES {
        let r = dt / grid.dx;
        let d = mu * dt / (grid.dx * grid.dx);
        let mut bad = None;
        for i in 0..n {
            let j = i + 1;
            let nr = ws.rho[j] - r * (ws.flux_r[i + 1] - ws.flux_r[i]) + d * (ws.rho[j + 1] - 2.0 * ws.rho[j] + ws.rho[j - 1]);
            let nm = ws.m[j] - r * (ws.flux_m[i + 1] - ws.flux_m[i]) + d * (ws.m[j + 1] - 2.0 * ws.m[j] + ws.m[j - 1]);
            if nr < -RHO_FLOOR || !nr.is_finite() || !nm.is_finite() {
                bad = Some(i);
                break;
            }
            if nr >= 1.0 - CONGESTION_GAP {
                return Err(Error::CongestionOverflow { t: t + dt, cell: i });
            }
            if nr <= RHO_FLOOR {
                rho[i] = nr.max(0.0);
                m[i] = 0.0;
            } else {
                rho[i] = nr;
                m[i] = nm;
            }
        }
        match bad {
            None => {
                let left_outflow = -dt * (ws.flux_r[0] - mu * (ws.rho[1] - ws.rho[0]) / grid.dx);
                return Ok(StepOutcome { state: EulerianState { grid, rho, m }, dt, left_outflow });
            }
            Some(cell) => {
                if _attempt == MAX_RETRIES {
                    return Err(Error::NonPositiveDensity { t: t + dt, cell });
                }
                dt *= 0.5;
            }
        }
    }
    unreachable!()
}

fn dissipation_rate(state: &EulerianState, mu: f64, p: &PressureParams) -> f64 {
    let n = state.grid.n;
    let dx = state.grid.dx;
    let u = state.velocity();
    let mut dens = vec![0.0; n];
    for i in 1..n - 1 {
        let r = state.rho[i];
        if r <= RHO_FLOOR {
            continue;
        }
        let rx = (state.rho[i + 1] - state.rho[i - 1]) / (2.0 * dx);
        let ux = (u[i + 1] - u[i - 1]) / (2.0 * dx);
        let (pr, _) = pressure_sound(r, p);
        let dp = p.gamma * pr / (r * (1.0 - r));
        dens[i] = mu * (dp / r * rx * rx + r * ux * ux);
    }
    trapezoid(&dens, dx)
}

pub(crate) fn diagnostics(
    state: &EulerianState,
    t: f64,
    bound: &RegionBound,
    p: &PressureParams,
    dissipation: f64,
    left_outflow: f64,
    steps: usize,
) -> Result<EulerDiagnostics> {
    let (w, z) = riemann::riemann_invariants_eulerian(state, p)?;
    let margin = riemann::invariant_margin(&w, &z, bound.big_m);
    let max_rho = state.rho.iter().cloned().fold(0.0, f64::max);
    let max_momentum_ratio = state
        .rho
        .iter()
        .zip(&state.m)
        .filter(|(r, _)| **r > RHO_FLOOR)
        .map(|(r, m)| (m / r).abs())
        .fold(0.0, f64::max);
    Ok(EulerDiagnostics { t, margin, mass: state.mass(), max_rho, max_momentum_ratio, dissipation, left_outflow, steps })
}

/// Largest initial characteristic speed.
pub fn max_wave_speed(state: &EulerianState, p: &PressureParams) -> f64 {
    state
        .rho
        .iter()
        .zip(&state.m)
        .map(|(&r, &m)| {
            let (_, c) = pressure_sound(r, p);
            let u = if r > RHO_FLOOR { m / r } else { 0.0 };
            u.abs() + c
        })
        .fold(0.0, f64::max)
}

/// Integrates the viscous system from `(rho0, m0)` to `t_end`.
pub fn run(config: &ViscousConfig, rho0: &[f64], m0: &[f64]) -> Result<EulerianTrajectory> {
    config.validate()?;
    let p = config.params;
    let state0 = EulerianState::new(config.grid, rho0.to_vec(), m0.to_vec())?;
    if config.domain_guard && config.boundary == Boundary::ConstantExtension {
        let half = 0.5 * (config.grid.x_end() - config.grid.x0);
        let reach = max_wave_speed(&state0, &p) * config.t_end;
        if reach >= 0.4 * half {
            return Err(Error::Resolution(format!(
                "initial signals travel {reach:.3} by t_end, above 0.4 x half-width {:.3}",
                0.4 * half
            )));
        }
    }
    let bound = RegionBound::from_eulerian(&state0, &p)?;
    let mut snapshots = vec![Snapshot { t: 0.0, state: state0.clone() }];
    let mut diags = vec![diagnostics(&state0, 0.0, &bound, &p, 0.0, 0.0, 0)?];
    let mut ws = Workspace::new(config.grid.n);
    let mut state = state0;
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut dissipation = 0.0;
    let mut outflow = 0.0;
    let mut next_snap = config.snapshot_dt.map(|s| s.min(config.t_end));
    let mut snap_index = 1usize;
    let tiny = 1e-12 * config.t_end;
    while t < config.t_end - tiny {
        let target = next_snap.unwrap_or(config.t_end).min(config.t_end);
        let cap = target - t;
        let rate0 = dissipation_rate(&state, config.mu, &p);
        let out = step_with(&mut ws, &state, config, t, cap)?;
        let rate1 = dissipation_rate(&out.state, config.mu, &p);
        dissipation += 0.5 * out.dt * (rate0 + rate1);
        outflow += out.left_outflow;
        t += out.dt;
        steps += 1;
        state = out.state;
        let landed = (t - target).abs() <= tiny;
        if landed {
            t = target;
        }
        let take = match next_snap {
            Some(_) => landed,
            None => steps % config.snapshot_every == 0,
        };
        let done = t >= config.t_end - tiny;
        if take || done {
            if done {
                t = config.t_end;
            }
            diags.push(diagnostics(&state, t, &bound, &p, dissipation, outflow, steps)?);
            snapshots.push(Snapshot { t, state: state.clone() });
            if let (Some(sdt), true) = (config.snapshot_dt, landed) {
                snap_index += 1;
                next_snap = Some((snap_index as f64 * sdt).min(config.t_end));
            }
        }
    }
    Ok(EulerianTrajectory {
        snapshots,
        diagnostics: diags,
        meta: RunMeta {
            params: p,
            mu: Some(config.mu),
            t_end: config.t_end,
            cfl_safety: config.cfl_safety,
            settings: serde_json::json!({
                "solver": "viscous-llf",
                "grid": config.grid,
                "boundary": config.boundary,
                "snapshot_every": config.snapshot_every,
                "snapshot_dt": config.snapshot_dt,
                "region_bound": bound,
                "rho_floor": RHO_FLOOR,
            }),
        },
    })
}

/// One row of a vanishing-viscosity sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ViscosityRecord {
    pub mu: f64,
    /// `L^1` distance of the final density to the previous (larger) viscosity.
    pub l1_diff_previous: Option<f64>,
    pub dissipation_total: f64,
    pub mu2_grad_rho: f64,
    pub mu2_grad_m: f64,
    pub max_rho: f64,
    pub min_margin: f64,
    pub mollifier: Mollifier,
}

/// Results of [`vanishing_viscosity_sweep`].
#[derive(Debug, Clone, Serialize)]
pub struct ViscositySweepReport {
    pub records: Vec<ViscosityRecord>,
    pub l1_differences_decrease: bool,
    pub dissipation_ratio: f64,
    pub mu2_gradients_decrease: bool,
}

/// Runs every viscosity on a common grid and collects Cauchy differences,
/// dissipation totals and `mu^2`-weighted gradient integrals.
pub fn vanishing_viscosity_sweep(base: &ViscousConfig, mus: &[f64], rho0: &[f64], m0: &[f64]) -> Result<ViscositySweepReport> {
    if mus.is_empty() || mus.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::Config("viscosities must be positive".into()));
    }
    if mus.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Config("viscosities must be listed in decreasing order".into()));
    }
    let mu_min = mus.iter().cloned().fold(f64::INFINITY, f64::min);
    if base.grid.dx > mu_min / 4.0 {
        return Err(Error::Resolution(format!("dx = {} exceeds min(mu)/4 = {}", base.grid.dx, mu_min / 4.0)));
    }
    let runs: Vec<Result<(EulerianTrajectory, Mollifier)>> = mus
        .par_iter()
        .map(|&mu| {
            let (r, m, moll) = mollify_initial(&base.grid, rho0, m0, mu, DEFAULT_FLOOR_SCALE)?;
            let cfg = ViscousConfig { mu, ..base.clone() };
            Ok((run(&cfg, &r, &m)?, moll))
        })
        .collect();
    let mut records = Vec::with_capacity(mus.len());
    let mut prev: Option<Vec<f64>> = None;
    for (k, res) in runs.into_iter().enumerate() {
        let (traj, moll) = res?;
        let d = crate::entropy::entropy_dissipation(&traj, &base.params)?;
        let fin = &traj.last().state;
        let l1 = prev.as_ref().map(|pr| pr.iter().zip(&fin.rho).map(|(a, b)| (a - b).abs()).sum::<f64>() * base.grid.dx);
        prev = Some(fin.rho.clone());
        records.push(ViscosityRecord {
            mu: mus[k],
            l1_diff_previous: l1,
            dissipation_total: d.total,
            mu2_grad_rho: d.mu2_grad_rho,
            mu2_grad_m: d.mu2_grad_m,
            max_rho: traj.diagnostics.iter().map(|d| d.max_rho).fold(0.0, f64::max),
            min_margin: traj.diagnostics.iter().map(|d| d.margin).fold(f64::INFINITY, f64::min),
            mollifier: moll,
        });
    }
    let diffs: Vec<f64> = records.iter().filter_map(|r| r.l1_diff_previous).collect();
    let l1_differences_decrease = diffs.windows(2).all(|w| w[1] <= w[0]);
    let tot: Vec<f64> = records.iter().map(|r| r.dissipation_total).collect();
    let dmax = tot.iter().cloned().fold(0.0, f64::max);
    let dmin = tot.iter().cloned().fold(f64::INFINITY, f64::min);
    let dissipation_ratio = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
    let mu2_gradients_decrease = records.windows(2).all(|w| w[1].mu2_grad_rho <= w[0].mu2_grad_rho && w[1].mu2_grad_m <= w[0].mu2_grad_m);
    Ok(ViscositySweepReport { records, l1_differences_decrease, dissipation_ratio, mu2_gradients_decrease })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, boundary: Boundary) -> ViscousConfig {
        let mut c = ViscousConfig::new(1e-2, PressureParams::singular(0.01, 2.0), Grid::new(0.0, 1.0 / n as f64, n), 0.05);
        c.boundary = boundary;
        c
    }

    #[test]
    fn constant_state_is_steady() {
        let c = cfg(64, Boundary::ConstantExtension);
        let s = EulerianState { grid: c.grid, rho: vec![0.4; 64], m: vec![0.1; 64] };
        let out = step(&s, &c, 0.0, 1.0).unwrap();
        for i in 0..64 {
            assert!((out.state.rho[i] - 0.4).abs() < 1e-15);
            assert!((out.state.m[i] - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_mass_conserved() {
        let c = cfg(128, Boundary::Periodic);
        let rho = c.grid.sample(|x| 0.4 + 0.2 * (2.0 * std::f64::consts::PI * x).sin());
        let m = c.grid.sample(|x| 0.1 * (2.0 * std::f64::consts::PI * x).cos());
        let mut s = EulerianState { grid: c.grid, rho, m };
        let mut mass = s.mass();
        for _ in 0..200 {
            s = step(&s, &c, 0.0, 1.0).unwrap().state;
            let now = s.mass();
            assert!((now - mass).abs() < 1e-13);
            mass = now;
        }
    }

    #[test]
    fn mollifier_properties() {
        let g = Grid::new(0.0, 0.01, 200);
        let (r, m, moll) = mollify_initial(&g, &vec![0.3; 200], &vec![0.05; 200], 1e-3, 1e-3).unwrap();
        assert!(r.iter().all(|x| (x - 0.3).abs() < 1e-15));
        assert!(m.iter().all(|x| (x - 0.05).abs() < 1e-15));
        assert!((moll.half_width - 1e-3f64.sqrt()).abs() < 1e-15);
        let rho0 = g.sample(|x| if x < 1.0 { 0.0 } else { 0.6 });
        let (r, _, moll) = mollify_initial(&g, &rho0, &vec![0.0; 200], 1e-3, 1e-3).unwrap();
        assert!(r.iter().all(|&x| x >= moll.floor && x <= 0.6 + 1e-15));
        assert!(mollify_initial(&g, &rho0, &vec![0.1; 200], 1e-3, 1e-3).is_err());
    }

    #[test]
    fn vacuum_stays_vacuum() {
        let c = cfg(32, Boundary::ConstantExtension);
        let traj = run(&c, &vec![0.0; 32], &vec![0.0; 32]).unwrap();
        for s in &traj.snapshots {
            assert!(s.state.rho.iter().chain(&s.state.m).all(|&x| x == 0.0));
        }
    }

    #[test]
    fn snapshot_times_exact() {
        let mut c = cfg(64, Boundary::Periodic);
        c.snapshot_dt = Some(0.01);
        let rho = c.grid.sample(|x| 0.4 + 0.1 * (2.0 * std::f64::consts::PI * x).sin());
        let traj = run(&c, &rho, &vec![0.0; 64]).unwrap();
        assert_eq!(traj.len(), 6);
        assert!(traj.is_uniformly_spaced(1e-9));
    }

    #[test]
    fn domain_guard_refuses_small_domains() {
        let mut c = cfg(64, Boundary::ConstantExtension);
        c.t_end = 10.0;
        let rho = vec![0.5; 64];
        assert!(matches!(run(&c, &rho, &vec![0.0; 64]), Err(Error::Resolution(_))));
    }

    #[test]
    fn sweep_rejects_coarse_grids() {
        let c = cfg(64, Boundary::Periodic);
        let r = vanishing_viscosity_sweep(&c, &[1e-2, 1e-3], &vec![0.4; 64], &vec![0.0; 64]);
        assert!(matches!(r, Err(Error::Resolution(_))));
    }
}
