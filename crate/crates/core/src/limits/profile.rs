//! Factory for well-prepared initial data of the singular limit.

use serde::{Deserialize, Serialize};

use crate::eos::{self, PressureParams};
use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, derivative, window_integral, Grid};
use crate::riemann::{self, DatumClass, LagrangianState};

/// Base specific-volume profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolumeProfile {
    /// `v = v_pm` everywhere.
    Plateau,
    /// Gaussian dip reaching `1 + eps^alpha` at `center`.
    Dip { center: f64, width: f64 },
}

/// Description of an initial datum family indexed by `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialProfileSpec {
    pub grid: Grid,
    pub volume: VolumeProfile,
    /// Exponent of the approach to congestion: `v - 1 = eps^alpha` at the dip.
    pub alpha: f64,
    /// Far-field specific volume.
    pub v_pm: f64,
    /// Amplitude `A` of the base velocity `-A tanh((x - center)/width)`;
    /// negative values give rarefactive data.
    pub compression: f64,
    #[serde(default)]
    pub compression_center: f64,
    #[serde(default = "one")]
    pub compression_width: f64,
    /// Constant of the volume floor `(v - 1)^(gamma-1) >= eps / m1`.
    #[serde(default = "one")]
    pub m1: f64,
    /// Admissible constant of the weighted compression bound.
    #[serde(default = "default_c3")]
    pub c3_target: f64,
    /// Damp compression near congestion to meet `c3_target`.
    #[serde(default = "yes")]
    pub damp: bool,
    /// Add the running variation of `theta(v0)` to the velocity so that the
    /// volume dip carries no compression.
    #[serde(default = "yes")]
    pub rarefy_dip: bool,
    /// Smallest half-window of the far-field mean condition.
    #[serde(default = "one")]
    pub ell_star: f64,
}

fn one() -> f64 {
    1.0
}

fn default_c3() -> f64 {
    2.0
}

fn yes() -> bool {
    true
}

impl InitialProfileSpec {
    pub fn plateau(grid: Grid, v_pm: f64, compression: f64) -> Self {
        Self {
            grid,
            volume: VolumeProfile::Plateau,
            alpha: 0.0,
            v_pm,
            compression,
            compression_center: 0.0,
            compression_width: 1.0,
            m1: 1.0,
            c3_target: default_c3(),
            damp: true,
            rarefy_dip: true,
            ell_star: 1.0,
        }
    }

    pub fn validate(&self, p: &PressureParams) -> Result<()> {
        if !(self.v_pm > 1.0) {
            return Err(Error::Config("v_pm must exceed 1".into()));
        }
        let amax = 1.0 / (p.gamma - 1.0);
        if !(self.alpha >= 0.0 && self.alpha <= amax + 1e-12) {
            return Err(Error::Config(format!("alpha must lie in [0, {amax}]")));
        }
        if let VolumeProfile::Dip { width, .. } = self.volume {
            if !(width > 0.0) {
                return Err(Error::Config("dip width must be positive".into()));
            }
        }
        if !(self.compression_width > 0.0) || !(self.m1 > 0.0) || !(self.c3_target > 0.0) || !(self.ell_star > 0.0) {
            return Err(Error::Config("compression_width, m1, c3_target and ell_star must be positive".into()));
        }
        if self.grid.n < 8 {
            return Err(Error::Config("profile grid needs at least 8 points".into()));
        }
        Ok(())
    }
}

/// Named hypotheses checked by [`verify_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    /// `(v - 1)^(gamma-1) >= eps / M1` and bounded `C^1` norm `M2`.
    VolumeFloor,
    /// `sqrt(c) w_x <= Y0`, `sqrt(c) z_x <= Q0`.
    RiccatiUpperBound,
    /// `(eps/(v-1)^(gamma+1))^(1/4) ([w_x]_- + [z_x]_-) <= C3 eps^beta`.
    CompressionNearCongestion,
    /// Far-field limits `v_pm` and window means `>= v_min > 1` for `l >= l*`.
    FarFieldMean,
}

impl Assumption {
    pub fn name(self) -> &'static str {
        match self {
            Assumption::VolumeFloor => "volume floor",
            Assumption::RiccatiUpperBound => "Riccati upper bound",
            Assumption::CompressionNearCongestion => "compression near congestion",
            Assumption::FarFieldMean => "far-field mean",
        }
    }
}

/// Measured constants of a datum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub epsilon: f64,
    pub m1: f64,
    pub m2: f64,
    pub y0: f64,
    pub q0: f64,
    /// `max (eps/(v-1)^(gamma+1))^(1/4) ([w_x]_- + [z_x]_-) / eps^beta`.
    pub c3: f64,
    pub ell_star: f64,
    pub v_underline: f64,
    pub far_field: (f64, f64),
    pub class: DatumClass,
    /// Nodes where the volume floor is active.
    pub floor_cells: usize,
    /// Smallest damping factor applied to the base compression.
    pub min_damping: f64,
    pub checks: Vec<(Assumption, bool)>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }
}

/// C^1 maximum that equals `max(a, b)` when `|a - b| >= delta`.
fn smooth_max(a: f64, b: f64, delta: f64) -> f64 {
    let d = a - b;
    if d >= delta {
        a
    } else if d <= -delta {
        b
    } else {
        b + (d + delta) * (d + delta) / (4.0 * delta)
    }
}

/// Factor on the total variation of `theta` added to the velocity.
const DIP_CANCELLATION: f64 = 1.1;

/// Relative tolerance of the pass/fail checks.
const CHECK_TOL: f64 = 1e-6;

/// Builds the datum of [`well_prepared_initial`] and measures its constants
/// without rejecting it.
pub fn build_initial(spec: &InitialProfileSpec, p: &PressureParams) -> Result<(LagrangianState, AssumptionReport)> {
    p.validate()?;
    spec.validate(p)?;
    let g = spec.grid;
    let eps = p.epsilon;
    let gam = p.gamma;
    let floor = (eps / spec.m1).powf(1.0 / (gam - 1.0));
    let dip_depth = eps.powf(spec.alpha);
    let v_hat = g.sample(|x| match spec.volume {
        VolumeProfile::Plateau => spec.v_pm,
        VolumeProfile::Dip { center, width } => {
            let b = (-((x - center) / width).powi(2)).exp();
            1.0 + (spec.v_pm - 1.0) * (1.0 - b) + dip_depth * b
        }
    });
    let mut floor_cells = 0;
    let v: Vec<f64> = v_hat
        .iter()
        .map(|&vh| {
            let out = smooth_max(vh, 1.0 + floor, 0.5 * floor);
            if out != vh {
                floor_cells += 1;
            }
            out
        })
        .collect();
    let theta = v.iter().map(|&x| eos::theta_lagrangian(x, p)).collect::<Result<Vec<f64>>>()?;
    let (xc, lu, amp) = (spec.compression_center, spec.compression_width, spec.compression);
    let u_hat = g.sample(|x| -amp * ((x - xc) / lu).tanh());
    let u_hat_x = g.sample(|x| -amp / lu / ((x - xc) / lu).cosh().powi(2));
    let beta = eos::blowup_exponent(gam);
    let target = spec.c3_target * eps.powf(beta);
    let mut min_damping = 1.0f64;
    let mut correction = vec![0.0; g.n];
    for i in 0..g.n {
        let mut damp = 1.0;
        if spec.damp && u_hat_x[i] < 0.0 {
            let weight = (eps / (v[i] - 1.0).powf(gam + 1.0)).powf(0.25);
            let s = 2.0 * weight * (-u_hat_x[i]);
            if s > target {
                damp = target / s;
            }
        }
        min_damping = min_damping.min(damp);
        correction[i] = (damp - 1.0) * u_hat_x[i];
    }
    // Running total variation of theta(v0): its slope dominates |theta_x|.
    let mut variation = vec![0.0; g.n];
    for i in 1..g.n {
        variation[i] = variation[i - 1] + (theta[i] - theta[i - 1]).abs();
    }
    let integral = cumulative_trapezoid(&correction, g.dx);
    let lift = if spec.rarefy_dip { DIP_CANCELLATION } else { 0.0 };
    let u: Vec<f64> = (0..g.n).map(|i| u_hat[i] + integral[i] + lift * variation[i]).collect();
    let state = LagrangianState::new(g, v, u)?;
    let mut report = verify_assumptions(&state, spec, p)?;
    report.floor_cells = floor_cells;
    report.min_damping = min_damping;
    Ok((state, report))
}

/// Builds `v0 = smooth_max(v_hat, 1 + (eps/M1)^(1/(gamma-1)))` and a velocity
/// whose negative invariant gradients are damped where `v0` is close to 1;
/// verifies the four hypotheses and rejects the datum if one fails.
pub fn well_prepared_initial(spec: &InitialProfileSpec, p: &PressureParams) -> Result<(LagrangianState, AssumptionReport)> {
    let (state, report) = build_initial(spec, p)?;
    if let Some((a, _)) = report.checks.iter().find(|c| !c.1) {
        let detail = match a {
            Assumption::VolumeFloor => format!("measured M1 = {:.4e} exceeds {:.4e}", report.m1, spec.m1),
            Assumption::CompressionNearCongestion => {
                format!("measured C3 = {:.4e} exceeds the admissible {:.4e}", report.c3, spec.c3_target)
            }
            Assumption::FarFieldMean => format!("window mean {:.6} is not above 1", report.v_underline),
            Assumption::RiccatiUpperBound => "Riccati variables are unbounded".into(),
        };
        return Err(Error::Infeasible { assumption: a.name(), detail });
    }
    Ok((state, report))
}

/// Measures the constants of the four hypotheses on a sampled datum.
pub fn verify_assumptions(state: &LagrangianState, spec: &InitialProfileSpec, p: &PressureParams) -> Result<AssumptionReport> {
    let g = state.grid;
    let eps = p.epsilon;
    let gam = p.gamma;
    let vx = derivative(&state.v, g.dx);
    let ux = derivative(&state.u, g.dx);
    let (w, z) = riemann::riemann_invariants_lagrangian(state, p)?;
    let wx = derivative(&w, g.dx);
    let zx = derivative(&z, g.dx);
    let sup = |f: &[f64]| f.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let mut m1 = 0.0f64;
    let (mut y0, mut q0, mut s_max) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0f64);
    for i in 0..g.n {
        let v = state.v[i];
        m1 = m1.max(eps / (v - 1.0).powf(gam - 1.0));
        let c = eos::sound_speed(v, p)?;
        y0 = y0.max(c.sqrt() * wx[i]);
        q0 = q0.max(c.sqrt() * zx[i]);
        let weight = (eps / (v - 1.0).powf(gam + 1.0)).powf(0.25);
        s_max = s_max.max(weight * ((-wx[i]).max(0.0) + (-zx[i]).max(0.0)));
    }
    let m2 = sup(&state.v) + sup(&state.u) + sup(&vx) + sup(&ux);
    let c3 = s_max / eps.powf(eos::blowup_exponent(gam));
    let half = 0.5 * (g.x_end() - g.x0);
    let mid = 0.5 * (g.x_end() + g.x0);
    let mut v_underline = f64::INFINITY;
    let steps = ((half - spec.ell_star) / g.dx).floor().max(0.0) as usize;
    for k in 0..=steps {
        let l = (spec.ell_star + k as f64 * g.dx).min(half);
        if let Some(total) = window_integral(&g, &state.v, mid - l, mid + l) {
            v_underline = v_underline.min(total / (2.0 * l));
        }
    }
    let far_field = (state.v[0], state.v[g.n - 1]);
    let far_ok = (far_field.0 - spec.v_pm).abs() <= 1e-6 * spec.v_pm && (far_field.1 - spec.v_pm).abs() <= 1e-6 * spec.v_pm;
    let class = riemann::classify_initial_datum(state, p)?;
    let checks = vec![
        (Assumption::VolumeFloor, m1 <= spec.m1 * (1.0 + CHECK_TOL) && m2.is_finite()),
        (Assumption::RiccatiUpperBound, y0.is_finite() && q0.is_finite()),
        (Assumption::CompressionNearCongestion, c3 <= spec.c3_target * (1.0 + 0.05)),
        (Assumption::FarFieldMean, far_ok && v_underline > 1.0 && spec.ell_star <= half),
    ];
    Ok(AssumptionReport {
        epsilon: eps,
        m1,
        m2,
        y0,
        q0,
        c3,
        ell_star: spec.ell_star,
        v_underline,
        far_field,
        class,
        floor_cells: 0,
        min_damping: 1.0,
        checks,
    })
}
