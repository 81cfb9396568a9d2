//! Riemann invariants, Riccati variables, invariant regions and a priori bounds.

use serde::{Deserialize, Serialize};

use crate::eos::{self, PressureParams};
use crate::error::{Error, Result};
use crate::grid::{derivative, Grid};

/// Density and momentum sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerianState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
}

/// Specific volume and velocity sampled on a uniform mass-coordinate grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianState {
    pub grid: Grid,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

impl EulerianState {
    pub fn new(grid: Grid, rho: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.n || m.len() != grid.n {
            return Err(Error::Config("field length does not match the grid".into()));
        }
        for (i, &r) in rho.iter().enumerate() {
            if !(r >= 0.0 && r < 1.0) {
                return Err(Error::Domain { what: "density must lie in [0, 1)", value: r })
                    .map_err(|e| annotate(e, i));
            }
        }
        Ok(Self { grid, rho, m })
    }

    /// Velocity `m/rho`, zero on vacuum cells.
    pub fn velocity(&self) -> Vec<f64> {
        self.rho.iter().zip(&self.m).map(|(&r, &m)| if r > 0.0 { m / r } else { 0.0 }).collect()
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.grid.dx
    }
}

fn annotate(e: Error, _cell: usize) -> Error {
    e
}

impl LagrangianState {
    pub fn new(grid: Grid, v: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if v.len() != grid.n || u.len() != grid.n {
            return Err(Error::Config("field length does not match the grid".into()));
        }
        if let Some(&bad) = v.iter().find(|&&x| !(x > 1.0 + eos::V_GUARD)) {
            return Err(Error::Domain { what: "specific volume must exceed 1", value: bad });
        }
        Ok(Self { grid, v, u })
    }
}

/// Bound `M` defining the invariant region `{w <= M, z >= -M}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBound {
    /// Bound used by every envelope: `max(sup|w|, sup|z|)`.
    pub big_m: f64,
    /// `sup |w|` of the data the bound was computed from.
    pub w_sup: f64,
    /// `sup |z|` of the data the bound was computed from.
    pub z_sup: f64,
}

impl RegionBound {
    pub fn new(big_m: f64) -> Self {
        Self { big_m, w_sup: big_m, z_sup: big_m }
    }

    fn from_invariants(w: &[f64], z: &[f64]) -> Self {
        let w_sup = w.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let z_sup = z.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        Self { big_m: w_sup.max(z_sup), w_sup, z_sup }
    }

    pub fn from_eulerian(state: &EulerianState, p: &PressureParams) -> Result<Self> {
        let (w, z) = riemann_invariants_eulerian(state, p)?;
        Ok(Self::from_invariants(&w, &z))
    }

    pub fn from_lagrangian(state: &LagrangianState, p: &PressureParams) -> Result<Self> {
        let (w, z) = riemann_invariants_lagrangian(state, p)?;
        Ok(Self::from_invariants(&w, &z))
    }
}

/// `w = m/rho + Theta(rho)`, `z = m/rho - Theta(rho)`; zero on vacuum cells.
pub fn riemann_invariants_eulerian(state: &EulerianState, p: &PressureParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = state.grid.n;
    let mut w = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for i in 0..n {
        let (r, m) = (state.rho[i], state.m[i]);
        if r == 0.0 {
            if m != 0.0 {
                return Err(Error::VacuumMomentum { cell: i, m });
            }
            w.push(0.0);
            z.push(0.0);
            continue;
        }
        let th = eos::theta_eulerian(r, p)?;
        let u = m / r;
        w.push(u + th);
        z.push(u - th);
    }
    Ok((w, z))
}

/// `w = u + theta(v)`, `z = u - theta(v)`.
pub fn riemann_invariants_lagrangian(state: &LagrangianState, p: &PressureParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut w = Vec::with_capacity(state.grid.n);
    let mut z = Vec::with_capacity(state.grid.n);
    for (&v, &u) in state.v.iter().zip(&state.u) {
        let th = eos::theta_lagrangian(v, p)?;
        w.push(u + th);
        z.push(u - th);
    }
    Ok((w, z))
}

/// Riccati variables `y = sqrt(c) w_x`, `q = sqrt(c) z_x`.
pub fn riccati_variables(state: &LagrangianState, p: &PressureParams) -> Result<(Vec<f64>, Vec<f64>)> {
    if state.grid.n < 5 {
        return Err(Error::Config("riccati variables need at least 5 grid points".into()));
    }
    let (w, z) = riemann_invariants_lagrangian(state, p)?;
    let wx = derivative(&w, state.grid.dx);
    let zx = derivative(&z, state.grid.dx);
    let mut y = Vec::with_capacity(state.grid.n);
    let mut q = Vec::with_capacity(state.grid.n);
    for i in 0..state.grid.n {
        let sc = eos::sound_speed(state.v[i], p)?.sqrt();
        y.push(sc * wx[i]);
        q.push(sc * zx[i]);
    }
    Ok((y, q))
}

/// Membership of the sampled state in `{w <= M, z >= -M}` and the signed margin.
pub fn in_invariant_region(state: &EulerianState, bound: &RegionBound, p: &PressureParams) -> Result<(bool, f64)> {
    let (w, z) = riemann_invariants_eulerian(state, p)?;
    let m = invariant_margin(&w, &z, bound.big_m);
    Ok((m >= 0.0, m))
}

/// `min(M - max w, M + min z)`.
pub fn invariant_margin(w: &[f64], z: &[f64], big_m: f64) -> f64 {
    let wmax = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let zmin = z.iter().cloned().fold(f64::INFINITY, f64::min);
    (big_m - wmax).min(big_m + zmin)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) < 0 <= f(hi)
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest density `A` allowed by the invariant region: `Theta(A) = M`.
pub fn max_density_bound(bound: &RegionBound, p: &PressureParams) -> Result<f64> {
    // Bisect in s = -ln(1 - rho) so that the congestion gap is resolved relatively.
    let f = |s: f64| {
        let rho = -(-s).exp_m1();
        eos::theta_eulerian(rho, p).map(|t| t - bound.big_m).unwrap_or(f64::INFINITY)
    };
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::Domain { what: "region bound too large for a density ceiling", value: bound.big_m });
        }
    }
    let s = bisect(f, 0.0, hi);
    Ok(-(-s).exp_m1())
}

/// Smallest specific volume allowed by `theta(v) <= 2M`.
pub fn min_volume_bound(bound: &RegionBound, p: &PressureParams) -> Result<f64> {
    let target = 2.0 * bound.big_m;
    // Bisect in s = ln(v - 1); theta decreases in v.
    let f = |s: f64| {
        let v = 1.0 + s.exp();
        eos::theta_lagrangian(v, p).map(|t| target - t).unwrap_or(f64::NEG_INFINITY)
    };
    let mut lo = -30.0;
    while f(lo) >= 0.0 {
        lo -= 10.0;
        if lo < -32.0 * 2.0 {
            return Err(Error::Domain { what: "region bound too small for a volume floor", value: bound.big_m });
        }
    }
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi += 2.0;
        if hi > 700.0 {
            return Err(Error::Domain { what: "region bound too small for a volume floor", value: bound.big_m });
        }
    }
    Ok(1.0 + bisect(f, lo, hi).exp())
}

/// Classification of a Lagrangian datum by the signs of its invariant gradients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class")]
pub enum DatumClass {
    EverywhereRarefactive,
    Compressive { index: usize, gradient: f64 },
}

/// Tests `w_x >= -tol` and `z_x >= -tol` at every node.
pub fn classify_initial_datum(state: &LagrangianState, p: &PressureParams) -> Result<DatumClass> {
    let (w, z) = riemann_invariants_lagrangian(state, p)?;
    let wx = derivative(&w, state.grid.dx);
    let zx = derivative(&z, state.grid.dx);
    let scale = wx.iter().chain(&zx).fold(0.0f64, |a, &x| a.max(x.abs()));
    let tol = 1e-10 * scale + 1e-14;
    let mut worst = (0usize, 0.0f64);
    for i in 0..state.grid.n {
        let g = wx[i].min(zx[i]);
        if g < worst.1 {
            worst = (i, g);
        }
    }
    if worst.1 >= -tol {
        Ok(DatumClass::EverywhereRarefactive)
    } else {
        Ok(DatumClass::Compressive { index: worst.0, gradient: worst.1 })
    }
}

/// Pointwise upper bound `(v0^((3-gt)/4) + K (Y + Q) t)^(4/(3-gt))`,
/// `K = (kappa gt)^(-1/4) / 2`.
pub fn volume_upper_bound(t: f64, state0: &LagrangianState, ybar: f64, qbar: f64, p: &PressureParams) -> Result<Vec<f64>> {
    let gt = p.gamma_tilde;
    if !(gt > 1.0 && gt < 3.0) {
        return Err(Error::Domain { what: "gamma_tilde must lie in (1, 3)", value: gt });
    }
    if !(p.kappa > 0.0) {
        return Err(Error::Domain { what: "volume upper bound requires kappa > 0", value: p.kappa });
    }
    let k = 0.5 * (p.kappa * gt).powf(-0.25);
    let e = (3.0 - gt) / 4.0;
    let growth = k * (ybar + qbar) * t;
    if growth == 0.0 {
        return Ok(state0.v.clone());
    }
    Ok(state0.v.iter().map(|&v| (v.powf(e) + growth).powf(1.0 / e)).collect())
}
