//! Space-time diagnostics of Lagrangian trajectories in the singular limit.

use serde::Serialize;

use crate::eos::PressureParams;
use crate::error::{Error, Result};
use crate::grid::{derivative, window_integral};
use crate::trajectory::LagrangianTrajectory;

/// Trapezoid rule over the (possibly nonuniform) snapshot times.
fn time_integral(times: &[f64], values: &[f64]) -> f64 {
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// `int_0^T int_{-L}^{L} f(v, u) dx dt` for a pointwise integrand.
fn space_time<F: Fn(f64) -> f64>(traj: &LagrangianTrajectory, half_width: f64, f: F) -> Result<f64> {
    let times = traj.times();
    let t_end = *times.last().unwrap_or(&0.0);
    let mut slices = Vec::with_capacity(traj.len());
    for s in &traj.snapshots {
        let vals: Vec<f64> = s.state.v.iter().map(|&v| f(v)).collect();
        let integral = window_integral(&s.state.grid, &vals, -half_width, half_width)
            .ok_or(Error::WindowExceedsGrid { half_width, t: t_end })?;
        slices.push(integral);
    }
    Ok(time_integral(&times, &slices))
}

fn lagrangian_pressure(v: f64, p: &PressureParams) -> f64 {
    let mut pr = p.epsilon * (v - 1.0).powf(-p.gamma);
    if p.kappa > 0.0 {
        pr += p.kappa * v.powf(-p.gamma_tilde);
    }
    pr
}

/// `||p(v)||_{L^1((0,T) x (-L,L))}` with `T` the last snapshot time.
pub fn pressure_l1(traj: &LagrangianTrajectory, half_width: f64, p: &PressureParams) -> Result<f64> {
    if !(half_width > 0.0) {
        return Err(Error::Config("window half-width must be positive".into()));
    }
    space_time(traj, half_width, |v| lagrangian_pressure(v, p))
}

/// Exclusion residual `(v - 1) p_1(v) = eps/(v-1)^(gamma-1)` in two norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExclusionResidual {
    pub l1: f64,
    /// Norm in `L^(gamma/(gamma-1))`.
    pub lq: f64,
}

/// Space-time norms of the exclusion residual over `(0, T) x (-L, L)`.
pub fn exclusion_residual(traj: &LagrangianTrajectory, half_width: f64, p: &PressureParams) -> Result<ExclusionResidual> {
    let g = p.gamma;
    let r = |v: f64| p.epsilon * (v - 1.0).powf(1.0 - g);
    let l1 = space_time(traj, half_width, r)?;
    let q = g / (g - 1.0);
    let lq = space_time(traj, half_width, |v| r(v).powf(q))?.powf(1.0 / q);
    Ok(ExclusionResidual { l1, lq })
}

/// Measure of the congested set `{v < 1 + band}` and the supremum of `|u_x|` on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Incompressibility {
    pub congested_measure: f64,
    pub sup_dxu_on_congested: f64,
}

/// Space-time measure of `{v < 1 + band}` and `sup |u_x|` over that set.
pub fn incompressibility_diagnostic(traj: &LagrangianTrajectory, band: f64) -> Incompressibility {
    let mut measures = Vec::with_capacity(traj.len());
    let mut sup = 0.0f64;
    for s in &traj.snapshots {
        let st = &s.state;
        let ux = derivative(&st.u, st.grid.dx);
        let mut count = 0usize;
        for (i, &v) in st.v.iter().enumerate() {
            if v < 1.0 + band {
                count += 1;
                sup = sup.max(ux[i].abs());
            }
        }
        measures.push(count as f64 * st.grid.dx);
    }
    Incompressibility { congested_measure: time_integral(&traj.times(), &measures), sup_dxu_on_congested: sup }
}
