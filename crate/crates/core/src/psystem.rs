//! Method-of-lines solver for the Lagrangian p-system `v_t - u_x = 0`,
//! `u_t + p(v)_x = 0`, with characteristic tracing and blow-up analysis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eos::{self, PressureParams};
use crate::error::{Error, Result};
use crate::grid::{cubic_interp, derivative, Grid};
use crate::riemann::{self, LagrangianState, RegionBound};
use crate::trajectory::{LagrangeDiagnostics, LagrangianTrajectory, RunMeta, Snapshot};

/// Default growth factor of the gradient trigger over the initial gradient.
pub const DEFAULT_GRADIENT_FACTOR: f64 = 1e6;

/// Number of cells over which the steepest resolvable front spreads.
pub const FRONT_CELLS: f64 = 8.0;

/// Relative step size below which a run reports `DtUnderflow`.
pub const DT_UNDERFLOW: f64 = 1e-12;

/// Settings of a smooth p-system run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothConfig {
    pub params: PressureParams,
    pub grid: Grid,
    pub t_end: f64,
    pub cfl_safety: f64,
    /// Absolute gradient trigger; derived from the initial data when unset.
    pub gradient_blowup_threshold: Option<f64>,
    /// Growth factor used when the threshold is derived.
    pub gradient_factor: f64,
    /// Fraction of `min_volume_bound - 1` below which `v - 1` triggers a floor violation.
    pub v_floor_margin: f64,
    /// Steps between snapshots when `snapshot_dt` is unset.
    pub snapshot_every: usize,
    /// Uniform snapshot spacing; steps are shortened to land on its multiples.
    #[serde(default)]
    pub snapshot_dt: Option<f64>,
}

impl SmoothConfig {
    pub fn new(params: PressureParams, grid: Grid, t_end: f64) -> Self {
        Self {
            params,
            grid,
            t_end,
            cfl_safety: 0.5,
            gradient_blowup_threshold: None,
            gradient_factor: DEFAULT_GRADIENT_FACTOR,
            v_floor_margin: 0.5,
            snapshot_every: 10,
            snapshot_dt: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.grid.n < 8 || !(self.grid.dx > 0.0) {
            return Err(Error::Config("p-system grid needs at least 8 points and dx > 0".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Config("cfl_safety must lie in (0, 1]".into()));
        }
        if let Some(g) = self.gradient_blowup_threshold {
            if !(g > 0.0) {
                return Err(Error::Config("gradient_blowup_threshold must be positive".into()));
            }
        }
        if !(self.gradient_factor > 1.0) {
            return Err(Error::Config("gradient_factor must exceed 1".into()));
        }
        if !(self.v_floor_margin > 0.0 && self.v_floor_margin < 1.0) {
            return Err(Error::Config("v_floor_margin must lie in (0, 1)".into()));
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BreakdownMode {
    GradientBlowup,
    FloorViolation,
    DtUnderflow,
}

/// Where and when a smooth run stopped being resolvable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownRecord {
    /// Time at which the trigger fired.
    pub t_star_numeric: f64,
    /// Grid index of the triggering cell.
    pub location: usize,
    pub mode: BreakdownMode,
    pub last_good_snapshot: Snapshot<LagrangianState>,
    /// `[last snapshot without trigger, trigger time]`.
    pub bracket: (f64, f64),
}

/// Resolved detection thresholds of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triggers {
    pub gradient: f64,
    pub v_floor: f64,
    pub initial_gradient: f64,
}

fn max_abs(f: &[f64]) -> (usize, f64) {
    f.iter().enumerate().fold((0, 0.0), |acc, (i, &x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc })
}

fn oscillation(f: &[f64]) -> f64 {
    let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Thresholds for `state0`: the gradient trigger is `gradient_factor` times the
/// initial maximal gradient, capped by the steepest front the grid resolves
/// (the larger field oscillation spread over [`FRONT_CELLS`] cells).
pub fn triggers(config: &SmoothConfig, state0: &LagrangianState) -> Result<Triggers> {
    let dx = config.grid.dx;
    let g0 = max_abs(&derivative(&state0.v, dx)).1.max(max_abs(&derivative(&state0.u, dx)).1);
    let gradient = match config.gradient_blowup_threshold {
        Some(g) => g,
        None => {
            let cap = oscillation(&state0.v).max(oscillation(&state0.u)) / (FRONT_CELLS * dx);
            let grown = config.gradient_factor * g0;
            let g = if cap > 0.0 { grown.min(cap) } else { grown };
            if g > 0.0 {
                g
            } else {
                f64::INFINITY
            }
        }
    };
    let bound = RegionBound::from_lagrangian(state0, &config.params)?;
    let vmin = riemann::min_volume_bound(&bound, &config.params)?;
    Ok(Triggers { gradient, v_floor: 1.0 + config.v_floor_margin * (vmin - 1.0), initial_gradient: g0 })
}

/// Pressure and sound speed without domain checks; `v <= 1` yields NaN.
#[inline]
fn pressure_sound(v: f64, p: &PressureParams) -> (f64, f64) {
    if v <= 1.0 {
        return (f64::NAN, f64::NAN);
    }
    let w = v - 1.0;
    let ps = p.epsilon * w.powf(-p.gamma);
    let mut pr = ps;
    let mut c2 = p.gamma * ps / w;
    if p.kappa > 0.0 {
        let pi = p.kappa * v.powf(-p.gamma_tilde);
        pr += pi;
        c2 += p.gamma_tilde * pi / v;
    }
    (pr, c2.sqrt())
}

/// Fourth-order central difference with two constant-extension ghosts per side.
fn central(f: &[f64], dx: f64, out: &mut [f64]) {
    let n = f.len();
    let at = |i: isize| f[i.clamp(0, n as isize - 1) as usize];
    let s = 1.0 / (12.0 * dx);
    for i in 0..n {
        let k = i as isize;
        out[i] = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) * s;
    }
}

struct Rhs {
    pr: Vec<f64>,
    dv: Vec<f64>,
    du: Vec<f64>,
}

impl Rhs {
    fn new(n: usize) -> Self {
        Self { pr: vec![0.0; n], dv: vec![0.0; n], du: vec![0.0; n] }
    }

    /// Writes `(v_t, u_t)`; returns false if a volume left `(1, inf)`.
    fn eval(&mut self, v: &[f64], u: &[f64], dx: f64, p: &PressureParams) -> bool {
        let mut ok = true;
        for (pr, &vi) in self.pr.iter_mut().zip(v) {
            *pr = pressure_sound(vi, p).0;
            ok &= pr.is_finite();
        }
        central(u, dx, &mut self.dv);
        central(&self.pr, dx, &mut self.du);
        self.du.iter_mut().for_each(|x| *x = -*x);
        ok
    }
}

pub(crate) fn diagnostics(state: &LagrangianState, t: f64, dt: f64, p: &PressureParams) -> LagrangeDiagnostics {
    let dx = state.grid.dx;
    let vx = derivative(&state.v, dx);
    let ux = derivative(&state.u, dx);
    let mut min_y = f64::INFINITY;
    let mut min_q = f64::INFINITY;
    for i in 0..state.grid.n {
        let c = pressure_sound(state.v[i], p).1;
        let sc = c.sqrt();
        min_y = min_y.min(sc * (ux[i] - c * vx[i]));
        min_q = min_q.min(sc * (ux[i] + c * vx[i]));
    }
    LagrangeDiagnostics {
        t,
        max_grad_v: max_abs(&vx).1,
        max_grad_u: max_abs(&ux).1,
        min_v: state.v.iter().cloned().fold(f64::INFINITY, f64::min),
        max_v: state.v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        max_abs_u: max_abs(&state.u).1,
        min_y,
        min_q,
        dt,
    }
}

/// First trigger fired by a diagnostics record, with the offending cell.
fn check(state: &LagrangianState, d: &LagrangeDiagnostics, trig: &Triggers, t_end: f64) -> Option<(BreakdownMode, usize)> {
    let finite = state.v.iter().chain(&state.u).all(|x| x.is_finite());
    if !finite || !(d.dt > DT_UNDERFLOW * t_end) {
        let cell = state.v.iter().position(|x| !x.is_finite()).unwrap_or(0);
        return Some((BreakdownMode::DtUnderflow, cell));
    }
    if d.min_v < trig.v_floor {
        let cell = state.v.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &v)| if v < a.1 { (i, v) } else { a }).0;
        return Some((BreakdownMode::FloorViolation, cell));
    }
    if d.max_grad_v.max(d.max_grad_u) > trig.gradient {
        let dx = state.grid.dx;
        let (iv, gv) = max_abs(&derivative(&state.v, dx));
        let (iu, gu) = max_abs(&derivative(&state.u, dx));
        return Some((BreakdownMode::GradientBlowup, if gv >= gu { iv } else { iu }));
    }
    None
}

fn meta(config: &SmoothConfig, trig: &Triggers) -> RunMeta {
    RunMeta {
        params: config.params,
        mu: None,
        t_end: config.t_end,
        cfl_safety: config.cfl_safety,
        settings: serde_json::json!({
            "solver": "psystem-central4-rk4",
            "grid": config.grid,
            "snapshot_every": config.snapshot_every,
            "snapshot_dt": config.snapshot_dt,
            "gradient_factor": config.gradient_factor,
            "v_floor_margin": config.v_floor_margin,
            "triggers": trig,
        }),
    }
}

/// Integrates the p-system until `t_end` or the first detection trigger.
pub fn run_smooth(config: &SmoothConfig, v0: &[f64], u0: &[f64]) -> Result<(LagrangianTrajectory, Option<BreakdownRecord>)> {
    config.validate()?;
    let p = config.params;
    let state0 = LagrangianState::new(config.grid, v0.to_vec(), u0.to_vec())?;
    if let Some(&v) = v0.iter().find(|&&v| !(v > 1.0 && v.is_finite())) {
        return Err(Error::Domain { what: "initial volume must exceed 1", value: v });
    }
    if let Some(&u) = u0.iter().find(|u| !u.is_finite()) {
        return Err(Error::Domain { what: "initial velocity must be finite", value: u });
    }
    let trig = triggers(config, &state0)?;
    let n = config.grid.n;
    let dx = config.grid.dx;
    let mut snapshots = vec![Snapshot { t: 0.0, state: state0.clone() }];
    let mut diags = vec![diagnostics(&state0, 0.0, 0.0, &p)];
    let mut v = v0.to_vec();
    let mut u = u0.to_vec();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut k = [Rhs::new(n), Rhs::new(n), Rhs::new(n), Rhs::new(n)];
    let mut vs = vec![0.0; n];
    let mut us = vec![0.0; n];
    let tiny = 1e-12 * config.t_end;
    let mut next_snap = config.snapshot_dt.map(|s| s.min(config.t_end));
    let mut snap_index = 1usize;
    while t < config.t_end - tiny {
        let target = next_snap.unwrap_or(config.t_end).min(config.t_end);
        let cmax = v.iter().map(|&x| pressure_sound(x, &p).1).fold(0.0, f64::max);
        let mut dt = if cmax.is_finite() && cmax > 0.0 { config.cfl_safety * dx / cmax } else { f64::NAN };
        if dt.is_finite() {
            dt = dt.min(target - t);
        }
        let mut ok = dt.is_finite() && dt > DT_UNDERFLOW * config.t_end;
        if ok {
            ok &= k[0].eval(&v, &u, dx, &p);
            for (stage, coef) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
                if !ok {
                    break;
                }
                for i in 0..n {
                    vs[i] = v[i] + coef * dt * k[stage - 1].dv[i];
                    us[i] = u[i] + coef * dt * k[stage - 1].du[i];
                }
                ok &= k[stage].eval(&vs, &us, dx, &p);
            }
        }
        let new_t = if dt.is_finite() { t + dt } else { t };
        if ok {
            for i in 0..n {
                v[i] += dt / 6.0 * (k[0].dv[i] + 2.0 * k[1].dv[i] + 2.0 * k[2].dv[i] + k[3].dv[i]);
                u[i] += dt / 6.0 * (k[0].du[i] + 2.0 * k[1].du[i] + 2.0 * k[2].du[i] + k[3].du[i]);
            }
        } else {
            for x in v.iter_mut() {
                *x = if *x > 1.0 { *x } else { f64::NAN };
            }
        }
        steps += 1;
        let mut time = new_t;
        let landed = (target - time).abs() <= tiny;
        if landed {
            time = target;
        }
        let state = LagrangianState { grid: config.grid, v: v.clone(), u: u.clone() };
        let d = diagnostics(&state, time, if ok { dt } else { 0.0 }, &p);
        let fired = match check(&state, &d, &trig, config.t_end) {
            None if !ok => Some((BreakdownMode::DtUnderflow, 0)),
            other => other,
        };
        t = time;
        if let Some((mode, location)) = fired {
            let last = snapshots.last().expect("initial snapshot").clone();
            let record = BreakdownRecord { t_star_numeric: t, location, mode, bracket: (last.t, t), last_good_snapshot: last };
            snapshots.push(Snapshot { t, state });
            diags.push(d);
            return Ok((LagrangianTrajectory { snapshots, diagnostics: diags, meta: meta(config, &trig) }, Some(record)));
        }
        let take = match next_snap {
            Some(_) => landed,
            None => steps % config.snapshot_every == 0,
        };
        if take || t >= config.t_end - tiny {
            snapshots.push(Snapshot { t, state });
            diags.push(d);
            if let (Some(sdt), true) = (config.snapshot_dt, landed) {
                snap_index += 1;
                next_snap = Some((snap_index as f64 * sdt).min(config.t_end));
            }
        }
    }
    Ok((LagrangianTrajectory { snapshots, diagnostics: diags, meta: meta(config, &trig) }, None))
}

/// Scans the diagnostics of a trajectory for the first detection trigger.
pub fn detect_breakdown(traj: &LagrangianTrajectory, config: &SmoothConfig) -> Result<Option<BreakdownRecord>> {
    let trig = triggers(config, &traj.first().state)?;
    for (k, (snap, d)) in traj.snapshots.iter().zip(&traj.diagnostics).enumerate().skip(1) {
        if let Some((mode, location)) = check(&snap.state, d, &trig, traj.meta.t_end) {
            let last = traj.snapshots[k - 1].clone();
            return Ok(Some(BreakdownRecord {
                t_star_numeric: snap.t,
                location,
                mode,
                bracket: (last.t, snap.t),
                last_good_snapshot: last,
            }));
        }
    }
    Ok(None)
}

/// Characteristic family: `dx/dt = +c` (carrying `w`) or `dx/dt = -c` (carrying `z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// A traced characteristic and the running integral of the Riccati coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicTrace {
    pub path: Vec<(f64, f64)>,
    pub a_integral: Vec<(f64, f64)>,
    /// The path left the interpolation range before the trajectory ended.
    pub truncated: bool,
}

/// Substeps per snapshot interval used by [`trace_characteristic`].
const TRACE_SUBSTEPS: usize = 4;

/// Integrates `dx/dt = +-c(v(t, x))` and `dA/dt = a(v(t, x))` by RK4, with `v`
/// interpolated cubically in space and linearly in time between snapshots.
pub fn trace_characteristic(traj: &LagrangianTrajectory, x_star: f64, direction: Direction) -> CharacteristicTrace {
    let p = traj.meta.params;
    let s = direction.sign();
    let grid = traj.first().state.grid;
    let field = |k: usize, theta: f64, x: f64| -> Option<(f64, f64)> {
        let a = &traj.snapshots[k].state.v;
        let b = &traj.snapshots[k + 1].state.v;
        let va = cubic_interp(&grid, a, x)?;
        let vb = cubic_interp(&grid, b, x)?;
        let v = va + theta * (vb - va);
        if !(v > 1.0) {
            return None;
        }
        let c = pressure_sound(v, &p).1;
        let (d1, d2) = eos::pressure_derivatives_lagrangian(v, &p).ok()?;
        Some((s * c, d2 / (4.0 * (-d1).powf(1.25))))
    };
    let mut path = vec![(0.0, x_star)];
    let mut a_integral = vec![(0.0, 0.0)];
    let mut x = x_star;
    let mut acc = 0.0;
    let mut truncated = false;
    if cubic_interp(&grid, &traj.first().state.v, x_star).is_none() {
        return CharacteristicTrace { path, a_integral, truncated: true };
    }
    'outer: for k in 0..traj.len().saturating_sub(1) {
        let (t0, t1) = (traj.snapshots[k].t, traj.snapshots[k + 1].t);
        let span = t1 - t0;
        if span <= 0.0 {
            continue;
        }
        let h = span / TRACE_SUBSTEPS as f64;
        for j in 0..TRACE_SUBSTEPS {
            let th = j as f64 / TRACE_SUBSTEPS as f64;
            let dth = 1.0 / TRACE_SUBSTEPS as f64;
            let stage = (|| {
                let (c1, a1) = field(k, th, x)?;
                let (c2, a2) = field(k, th + 0.5 * dth, x + 0.5 * h * c1)?;
                let (c3, a3) = field(k, th + 0.5 * dth, x + 0.5 * h * c2)?;
                let (c4, a4) = field(k, th + dth, x + h * c3)?;
                Some((h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4), h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)))
            })();
            match stage {
                Some((dx, da)) => {
                    x += dx;
                    acc += da;
                    let t = t0 + (j + 1) as f64 * h;
                    path.push((t, x));
                    a_integral.push((t, acc));
                }
                None => {
                    truncated = true;
                    break 'outer;
                }
            }
        }
    }
    CharacteristicTrace { path, a_integral, truncated }
}

/// Outcome of [`predict_blowup_time`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupPrediction {
    /// Predicted maximal time; `+inf` when no characteristic is compressive.
    pub t_star: f64,
    pub x_star: f64,
    pub direction: Option<Direction>,
    /// Riccati value at the foot of the minimizing characteristic.
    pub initial_riccati: f64,
    /// The minimizing trace ended before its threshold and the remainder was
    /// extrapolated with the last coefficient value.
    pub extrapolated: bool,
    /// Accumulated `int a` where the minimizing trace ended.
    pub accumulated: f64,
}

/// Largest number of characteristic feet examined per family.
pub const MAX_PREDICTION_FEET: usize = 256;

fn crossing(trace: &CharacteristicTrace, target: f64) -> (f64, bool, f64) {
    for w in trace.a_integral.windows(2) {
        let ((ta, aa), (tb, ab)) = (w[0], w[1]);
        if ab >= target {
            let f = if ab > aa { (target - aa) / (ab - aa) } else { 1.0 };
            return (ta + f * (tb - ta), false, target);
        }
    }
    let (tl, al) = *trace.a_integral.last().expect("trace has a start point");
    let slope = match trace.a_integral.len() {
        0 | 1 => 0.0,
        m => {
            let (tp, ap) = trace.a_integral[m - 2];
            if tl > tp {
                (al - ap) / (tl - tp)
            } else {
                0.0
            }
        }
    };
    let t = if slope > 0.0 { tl + (target - al) / slope } else { f64::INFINITY };
    (t, true, al)
}

/// Predicts the maximal smooth time: for each compressive foot `x*` the first
/// time with `int_0^t a = -1/y(0, x*)` along the forward characteristic (and
/// `-1/q(0, x*)` along the backward one), minimized over feet.
pub fn predict_blowup_time(traj: &LagrangianTrajectory) -> Result<BlowupPrediction> {
    let p = traj.meta.params;
    let s0 = &traj.first().state;
    let (y, q) = riemann::riccati_variables(s0, &p)?;
    let mut feet = Vec::new();
    for (dir, r) in [(Direction::Forward, &y), (Direction::Backward, &q)] {
        let mut idx: Vec<usize> = (2..s0.grid.n - 2).filter(|&i| r[i] < 0.0).collect();
        idx.sort_by(|&a, &b| r[a].partial_cmp(&r[b]).unwrap_or(std::cmp::Ordering::Equal));
        if idx.len() > MAX_PREDICTION_FEET {
            // Keep the most negative quarter and an even sample of the rest.
            let keep = MAX_PREDICTION_FEET / 4;
            let rest = &idx[keep..];
            let stride = rest.len() as f64 / (MAX_PREDICTION_FEET - keep) as f64;
            let mut chosen: Vec<usize> = idx[..keep].to_vec();
            chosen.extend((0..MAX_PREDICTION_FEET - keep).map(|j| rest[(j as f64 * stride) as usize]));
            idx = chosen;
        }
        feet.extend(idx.into_iter().map(|i| (dir, i, r[i])));
    }
    let none = BlowupPrediction {
        t_star: f64::INFINITY,
        x_star: f64::NAN,
        direction: None,
        initial_riccati: 0.0,
        extrapolated: false,
        accumulated: 0.0,
    };
    let best = feet
        .par_iter()
        .map(|&(dir, i, r0)| {
            let x = s0.grid.x(i);
            let trace = trace_characteristic(traj, x, dir);
            let (t, extrapolated, accumulated) = crossing(&trace, -1.0 / r0);
            BlowupPrediction { t_star: t, x_star: x, direction: Some(dir), initial_riccati: r0, extrapolated, accumulated }
        })
        .reduce(|| none, |a, b| if b.t_star < a.t_star || (b.t_star == a.t_star && b.x_star < a.x_star) { b } else { a });
    Ok(best)
}

/// Outcome of [`blowup_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    /// `eps^beta / (K2 max(-y0, -q0))`; `+inf` for rarefactive data.
    pub time: f64,
    pub beta: f64,
    /// `sup a(v) eps^beta` over the volume range `[v_lo, v_hi]`.
    pub k2: f64,
    pub v_range: (f64, f64),
    pub x_star: f64,
}

/// Samples per decade used for the supremum of the Riccati coefficient.
const SUP_SAMPLES: usize = 400;

/// Envelope constant `K2 = sup a(v) eps^beta` over `[v_lo, v_hi]`, sampled
/// logarithmically in `v - 1` and refined by golden-section search.
pub fn riccati_envelope_constant(v_lo: f64, v_hi: f64, p: &PressureParams) -> Result<f64> {
    if !(v_lo > 1.0 && v_hi >= v_lo) {
        return Err(Error::Domain { what: "envelope range must satisfy 1 < v_lo <= v_hi", value: v_lo });
    }
    let beta = eos::blowup_exponent(p.gamma);
    let (l0, l1) = ((v_lo - 1.0).ln(), (v_hi - 1.0).ln());
    let decades = ((l1 - l0) / std::f64::consts::LN_10).max(1.0);
    let m = (SUP_SAMPLES as f64 * decades) as usize + 2;
    let a = |l: f64| eos::riccati_coefficient(1.0 + l.exp(), p).unwrap_or(0.0);
    let mut best = (l0, a(l0));
    for j in 0..=m {
        let l = l0 + (l1 - l0) * j as f64 / m as f64;
        let val = a(l);
        if val > best.1 {
            best = (l, val);
        }
    }
    let h = (l1 - l0) / m as f64;
    let (mut lo, mut hi) = ((best.0 - h).max(l0), (best.0 + h).min(l1));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (c, d) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if a(c) > a(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    let sup = best.1.max(a(0.5 * (lo + hi))).max(a(l0)).max(a(l1));
    Ok(sup * p.epsilon.powf(beta))
}

/// Lower bound on the maximal smooth time of `state0`. The volume range is
/// `[min_volume_bound, 2 max v0]`.
pub fn blowup_lower_bound(state0: &LagrangianState, p: &PressureParams) -> Result<LowerBound> {
    let beta = eos::blowup_exponent(p.gamma);
    let bound = RegionBound::from_lagrangian(state0, p)?;
    let v_lo = riemann::min_volume_bound(&bound, p)?;
    let v_hi = 2.0 * state0.v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let v_lo = v_lo.min(state0.v.iter().cloned().fold(f64::INFINITY, f64::min));
    let k2 = riccati_envelope_constant(v_lo, v_hi, p)?;
    let (y, q) = riemann::riccati_variables(state0, p)?;
    let (mut worst, mut x_star) = (0.0f64, f64::NAN);
    for i in 0..state0.grid.n {
        let s = (-y[i]).max(-q[i]);
        if s > worst {
            worst = s;
            x_star = state0.grid.x(i);
        }
    }
    let time = if worst > 0.0 { p.epsilon.powf(beta) / (k2 * worst) } else { f64::INFINITY };
    Ok(LowerBound { time, beta, k2, v_range: (v_lo, v_hi), x_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn constant_run(eps: f64, t_end: f64) -> LagrangianTrajectory {
        let grid = Grid::spanning(-1.0, 1.0, 101);
        let mut cfg = SmoothConfig::new(PressureParams::singular(eps, 3.0), grid, t_end);
        cfg.snapshot_every = 5;
        let (traj, br) = run_smooth(&cfg, &vec![2.0; 101], &vec![0.0; 101]).unwrap();
        assert!(br.is_none());
        traj
    }

    #[test]
    fn constant_state_is_steady() {
        let traj = constant_run(0.03, 0.5);
        let last = &traj.last().state;
        assert!(last.v.iter().all(|&v| v == 2.0));
        assert!(last.u.iter().all(|&u| u == 0.0));
        assert_eq!(traj.last().t, 0.5);
    }

    #[test]
    fn snapshots_land_on_uniform_times() {
        let grid = Grid::spanning(-1.0, 1.0, 101);
        let mut cfg = SmoothConfig::new(PressureParams::singular(0.03, 3.0), grid, 0.5);
        cfg.snapshot_dt = Some(0.1);
        let (traj, _) = run_smooth(&cfg, &vec![2.0; 101], &vec![0.0; 101]).unwrap();
        let times = traj.times();
        assert_eq!(times.len(), 6);
        for (k, t) in times.iter().enumerate() {
            assert_relative_eq!(*t, 0.1 * k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn straight_characteristic() {
        let traj = constant_run(0.03, 1.0);
        let tr = trace_characteristic(&traj, -0.5, Direction::Forward);
        assert!(!tr.truncated);
        for &(t, x) in &tr.path {
            assert_relative_eq!(x, -0.5 + 0.3 * t, epsilon = 1e-12);
        }
        let back = trace_characteristic(&traj, -0.5, Direction::Backward);
        assert_eq!(back.path[0], tr.path[0]);
        let exit = trace_characteristic(&traj, 0.8, Direction::Forward);
        assert!(exit.truncated);
    }

    #[test]
    fn riccati_integral_slope() {
        let traj = constant_run(1.0 / 30000.0, 0.01);
        let tr = trace_characteristic(&traj, 0.0, Direction::Forward);
        for &(t, a) in &tr.a_integral {
            assert_relative_eq!(a, 10.0 * t, epsilon = 1e-9);
        }
    }

    #[test]
    fn crossing_of_constant_coefficient() {
        // int a = 20 t reaches -1/y0 = 20 at t = 1.
        let trace = CharacteristicTrace {
            path: vec![],
            a_integral: (0..=40).map(|k| (k as f64 * 0.05, 20.0 * k as f64 * 0.05)).collect(),
            truncated: false,
        };
        let (t, ext, _) = crossing(&trace, -1.0 / -0.05);
        assert_relative_eq!(t, 1.0, epsilon = 1e-12);
        assert!(!ext);
        let short = CharacteristicTrace { path: vec![], a_integral: trace.a_integral[..10].to_vec(), truncated: false };
        let (t, ext, _) = crossing(&short, 20.0);
        assert!(ext);
        assert_relative_eq!(t, 1.0, epsilon = 1e-9);
    }

    fn tanh_data(sign: f64, n: usize) -> (SmoothConfig, Vec<f64>, Vec<f64>) {
        let p = PressureParams::with_isentropic(1e-2, 2.0, 1.0, 2.0);
        let grid = Grid::spanning(-8.0, 8.0, n);
        let cfg = SmoothConfig::new(p, grid, 1.0);
        let v = vec![2.0; n];
        let u = grid.sample(|x| sign * 0.5 * x.tanh());
        (cfg, v, u)
    }

    #[test]
    fn rarefactive_runs_to_end() {
        let (cfg, v, u) = tanh_data(1.0, 801);
        let (traj, br) = run_smooth(&cfg, &v, &u).unwrap();
        assert!(br.is_none());
        assert_eq!(traj.last().t, 1.0);
        let s0 = LagrangianState::new(cfg.grid, v, u).unwrap();
        assert_eq!(blowup_lower_bound(&s0, &cfg.params).unwrap().time, f64::INFINITY);
        assert_eq!(predict_blowup_time(&traj).unwrap().t_star, f64::INFINITY);
    }

    #[test]
    fn compressive_breaks_down() {
        let (mut cfg, v, u) = tanh_data(-1.0, 801);
        cfg.t_end = 20.0;
        let (traj, br) = run_smooth(&cfg, &v, &u).unwrap();
        let br = br.expect("compressive data must break down");
        assert_eq!(br.mode, BreakdownMode::GradientBlowup);
        assert!(br.bracket.0 < br.bracket.1);
        let again = detect_breakdown(&traj, &cfg).unwrap().unwrap();
        assert_eq!(again.t_star_numeric, br.t_star_numeric);
        assert_eq!(again.mode, br.mode);
        let s0 = &traj.first().state;
        let lb = blowup_lower_bound(s0, &cfg.params).unwrap();
        assert!(lb.time <= br.t_star_numeric);
        let pred = predict_blowup_time(&traj).unwrap();
        assert!((pred.t_star - br.t_star_numeric).abs() < 0.2 * br.t_star_numeric, "{pred:?} vs {}", br.t_star_numeric);
    }

    #[test]
    fn invalid_initial_volume() {
        let grid = Grid::spanning(0.0, 1.0, 16);
        let cfg = SmoothConfig::new(PressureParams::singular(0.1, 2.0), grid, 1.0);
        assert!(run_smooth(&cfg, &vec![0.9; 16], &vec![0.0; 16]).is_err());
    }
}
