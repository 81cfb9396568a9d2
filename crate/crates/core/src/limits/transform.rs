//! Changes of frame between Eulerian and mass (Lagrangian) coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, Grid, MonotoneCubic};
use crate::psystem;
use crate::riemann::{EulerianState, LagrangianState, RegionBound};
use crate::trajectory::{EulerianTrajectory, LagrangianTrajectory, RunMeta, Snapshot};
use crate::viscous;

/// Default density below which the mass coordinate is refused.
pub const DEFAULT_TRANSFORM_FLOOR: f64 = 1e-6;

/// Options of [`eulerian_to_lagrangian_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToLagrangian {
    /// Mass coordinate of the left node at `t = 0`.
    pub mass_origin: f64,
    pub rho_floor: f64,
    /// Uniform mass grid; spans the initial mass range when unset.
    pub grid: Option<Grid>,
}

impl Default for ToLagrangian {
    fn default() -> Self {
        Self { mass_origin: 0.0, rho_floor: DEFAULT_TRANSFORM_FLOOR, grid: None }
    }
}

/// Options of [`lagrangian_to_eulerian_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToEulerian {
    /// Position of the left particle at `t = 0`.
    pub x_origin: f64,
    /// Fixed Eulerian grid; spans the initial positions when unset.
    pub grid: Option<Grid>,
}

impl Default for ToEulerian {
    fn default() -> Self {
        Self { x_origin: 0.0, grid: None }
    }
}

/// Mass coordinates of the nodes of `state`: `origin + int_{x0}^{x} rho`.
pub fn mass_coordinates(state: &EulerianState, origin: f64, floor: f64) -> Result<Vec<f64>> {
    if let Some((cell, &rho)) = state.rho.iter().enumerate().find(|(_, &r)| !(r > floor)) {
        return Err(Error::Vacuum { cell, rho });
    }
    Ok(cumulative_trapezoid(&state.rho, state.grid.dx).into_iter().map(|m| origin + m).collect())
}

/// [`eulerian_to_lagrangian_with`] with default options.
pub fn eulerian_to_lagrangian(traj: &EulerianTrajectory) -> Result<LagrangianTrajectory> {
    eulerian_to_lagrangian_with(traj, &ToLagrangian::default())
}

/// Resamples `(v, u) = (1/rho, m/rho)` onto a uniform mass grid. The label of
/// the left node is shifted by the mass that left through the left boundary.
pub fn eulerian_to_lagrangian_with(traj: &EulerianTrajectory, opts: &ToLagrangian) -> Result<LagrangianTrajectory> {
    let p = traj.meta.params;
    let first = &traj.first().state;
    let dx = first.grid.dx;
    let rho_left0 = first.rho[0];
    let mut snapshots = Vec::with_capacity(traj.len());
    let mut diags = Vec::with_capacity(traj.len());
    let mut grid = opts.grid;
    for (snap, d) in traj.snapshots.iter().zip(&traj.diagnostics) {
        let st = &snap.state;
        let shift = d.left_outflow + 0.5 * dx * (st.rho[0] - rho_left0);
        let labels = mass_coordinates(st, opts.mass_origin + shift, opts.rho_floor)?;
        let g = *grid.get_or_insert_with(|| Grid::spanning(labels[0], labels[labels.len() - 1], st.grid.n));
        let v: Vec<f64> = st.rho.iter().map(|r| 1.0 / r).collect();
        let u = st.velocity();
        let iv = MonotoneCubic::new(&labels, &v);
        let iu = MonotoneCubic::new(&labels, &u);
        let state = LagrangianState::new(g, g.sample(|x| iv.eval(x)), g.sample(|x| iu.eval(x)))?;
        diags.push(psystem::diagnostics(&state, snap.t, 0.0, &p));
        snapshots.push(Snapshot { t: snap.t, state });
    }
    Ok(LagrangianTrajectory {
        snapshots,
        diagnostics: diags,
        meta: RunMeta {
            settings: serde_json::json!({ "transform": "eulerian_to_lagrangian", "options": opts, "source": traj.meta.settings }),
            ..traj.meta.clone()
        },
    })
}

/// [`lagrangian_to_eulerian_with`] with default options.
pub fn lagrangian_to_eulerian(traj: &LagrangianTrajectory) -> Result<EulerianTrajectory> {
    lagrangian_to_eulerian_with(traj, &ToEulerian::default())
}

/// Maps each snapshot through `x = X0(t) + int v`, where the left particle
/// moves with `dX0/dt = u`, and resamples `(rho, m)` onto a fixed grid.
pub fn lagrangian_to_eulerian_with(traj: &LagrangianTrajectory, opts: &ToEulerian) -> Result<EulerianTrajectory> {
    let p = traj.meta.params;
    let mut snapshots = Vec::with_capacity(traj.len());
    let mut diags = Vec::with_capacity(traj.len());
    let mut grid = opts.grid;
    let mut x_left = opts.x_origin;
    let mut prev: Option<(f64, f64)> = None;
    let mut bound = None;
    for snap in &traj.snapshots {
        let st = &snap.state;
        if let Some((t0, u0)) = prev {
            x_left += 0.5 * (snap.t - t0) * (u0 + st.u[0]);
        }
        prev = Some((snap.t, st.u[0]));
        let xs: Vec<f64> = cumulative_trapezoid(&st.v, st.grid.dx).into_iter().map(|s| x_left + s).collect();
        let g = *grid.get_or_insert_with(|| Grid::spanning(xs[0], xs[xs.len() - 1], st.grid.n));
        let rho: Vec<f64> = st.v.iter().map(|v| 1.0 / v).collect();
        let ir = MonotoneCubic::new(&xs, &rho);
        let iu = MonotoneCubic::new(&xs, &st.u);
        let rho_e = g.sample(|x| ir.eval(x));
        let m_e: Vec<f64> = g.nodes().iter().zip(&rho_e).map(|(&x, r)| r * iu.eval(x)).collect();
        let state = EulerianState::new(g, rho_e, m_e)?;
        let b = match bound {
            Some(b) => b,
            None => *bound.insert(RegionBound::from_eulerian(&state, &p)?),
        };
        diags.push(viscous::diagnostics(&state, snap.t, &b, &p, 0.0, 0.0, 0)?);
        snapshots.push(Snapshot { t: snap.t, state });
    }
    Ok(EulerianTrajectory {
        snapshots,
        diagnostics: diags,
        meta: RunMeta {
            settings: serde_json::json!({ "transform": "lagrangian_to_eulerian", "options": opts, "source": traj.meta.settings }),
            ..traj.meta.clone()
        },
    })
}
