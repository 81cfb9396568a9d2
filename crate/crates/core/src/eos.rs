//! Hard-sphere equation of state in Eulerian and Lagrangian variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_power_singular, ABS_TOL};

/// Default upper limit for the singular-pressure strength in asymptotic statements.
pub const DEFAULT_EPSILON_0: f64 = 1e-2;

/// Smallest admissible distance from the congestion constraint `v = 1`.
pub const V_GUARD: f64 = 1e-14;

/// Tolerance band on the regime exponent.
pub const REGIME_TOL: f64 = 1e-9;

/// Parameters of `p(v) = eps/(v-1)^gamma + kappa/v^gamma_tilde`, or in Eulerian
/// variables `p(rho) = eps (rho/(1-rho))^gamma + kappa rho^gamma_tilde`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureParams {
    pub epsilon: f64,
    pub gamma: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_gamma_tilde")]
    pub gamma_tilde: f64,
}

fn default_gamma_tilde() -> f64 {
    2.0
}

impl PressureParams {
    /// Purely singular law (`kappa = 0`).
    pub fn singular(epsilon: f64, gamma: f64) -> Self {
        Self { epsilon, gamma, kappa: 0.0, gamma_tilde: default_gamma_tilde() }
    }

    pub fn with_isentropic(epsilon: f64, gamma: f64, kappa: f64, gamma_tilde: f64) -> Self {
        Self { epsilon, gamma, kappa, gamma_tilde }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams("epsilon must be positive".into()));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams("gamma must exceed 1".into()));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParams("kappa must be nonnegative".into()));
        }
        if self.kappa > 0.0 && !(self.gamma_tilde > 1.0 && self.gamma_tilde < 3.0) {
            return Err(Error::InvalidParams("gamma_tilde must lie in (1, 3) when kappa > 0".into()));
        }
        Ok(())
    }

    /// Validation for the weak-solution setting: `kappa = 0` and `gamma` in `(1, 3]`.
    pub fn validate_weak(&self) -> Result<()> {
        self.validate()?;
        if self.kappa != 0.0 {
            return Err(Error::InvalidParams("weak mode requires kappa = 0".into()));
        }
        if self.gamma > 3.0 {
            return Err(Error::InvalidParams("weak mode requires gamma <= 3".into()));
        }
        Ok(())
    }

    fn has_isentropic(&self) -> bool {
        self.kappa > 0.0
    }
}

/// Lagrangian pressure split into its two contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangianPressure {
    pub total: f64,
    pub singular_part: f64,
    pub isentropic_part: f64,
}

/// Regime of the specific volume relative to the congestion scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "tag")]
pub enum Regime {
    NearCongestion { alpha: f64 },
    Intermediate { alpha: f64 },
    Far,
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 0.0 && rho < 1.0) {
        return Err(Error::Domain { what: "density must lie in [0, 1)", value: rho });
    }
    Ok(())
}

fn check_v(v: f64) -> Result<()> {
    if !(v > 1.0 + V_GUARD) || !v.is_finite() {
        return Err(Error::Domain { what: "specific volume must exceed 1", value: v });
    }
    Ok(())
}

/// `p(rho) = eps (rho/(1-rho))^gamma + kappa rho^gamma_tilde`.
pub fn pressure_eulerian(rho: f64, p: &PressureParams) -> Result<f64> {
    check_rho(rho)?;
    let mut val = p.epsilon * (rho / (1.0 - rho)).powf(p.gamma);
    if p.has_isentropic() {
        val += p.kappa * rho.powf(p.gamma_tilde);
    }
    Ok(val)
}

/// `dp/drho` in Eulerian variables.
pub fn pressure_eulerian_derivative(rho: f64, p: &PressureParams) -> Result<f64> {
    check_rho(rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let g = p.gamma;
    let mut val = p.epsilon * g * rho.powf(g - 1.0) / (1.0 - rho).powf(g + 1.0);
    if p.has_isentropic() {
        val += p.kappa * p.gamma_tilde * rho.powf(p.gamma_tilde - 1.0);
    }
    Ok(val)
}

/// `d^2p/drho^2` in Eulerian variables (defined for `rho > 0`).
pub fn pressure_eulerian_second_derivative(rho: f64, p: &PressureParams) -> Result<f64> {
    check_rho(rho)?;
    if rho == 0.0 {
        return Err(Error::Domain { what: "second derivative requires positive density", value: rho });
    }
    let g = p.gamma;
    let mut val = p.epsilon * g * rho.powf(g - 2.0) * (g - 1.0 + 2.0 * rho) / (1.0 - rho).powf(g + 2.0);
    if p.has_isentropic() {
        let gt = p.gamma_tilde;
        val += p.kappa * gt * (gt - 1.0) * rho.powf(gt - 2.0);
    }
    Ok(val)
}

/// Eulerian sound speed `sqrt(p'(rho))`.
pub fn sound_speed_eulerian(rho: f64, p: &PressureParams) -> Result<f64> {
    Ok(pressure_eulerian_derivative(rho, p)?.sqrt())
}

/// `p(v) = eps/(v-1)^gamma + kappa/v^gamma_tilde`.
pub fn pressure_lagrangian(v: f64, p: &PressureParams) -> Result<LagrangianPressure> {
    check_v(v)?;
    let singular_part = p.epsilon * (v - 1.0).powf(-p.gamma);
    let isentropic_part = if p.has_isentropic() { p.kappa * v.powf(-p.gamma_tilde) } else { 0.0 };
    Ok(LagrangianPressure { total: singular_part + isentropic_part, singular_part, isentropic_part })
}

/// `(p'(v), p''(v))` in Lagrangian variables.
pub fn pressure_derivatives_lagrangian(v: f64, p: &PressureParams) -> Result<(f64, f64)> {
    check_v(v)?;
    let g = p.gamma;
    let w = v - 1.0;
    let mut d1 = -p.epsilon * g * w.powf(-(g + 1.0));
    let mut d2 = p.epsilon * g * (g + 1.0) * w.powf(-(g + 2.0));
    if p.has_isentropic() {
        let gt = p.gamma_tilde;
        d1 -= p.kappa * gt * v.powf(-(gt + 1.0));
        d2 += p.kappa * gt * (gt + 1.0) * v.powf(-(gt + 2.0));
    }
    Ok((d1, d2))
}

/// Lagrangian sound speed `c(v) = sqrt(-p'(v))`.
pub fn sound_speed(v: f64, p: &PressureParams) -> Result<f64> {
    Ok((-pressure_derivatives_lagrangian(v, p)?.0).sqrt())
}

fn sound_speed_unchecked(v: f64, p: &PressureParams) -> f64 {
    sound_speed_from_gap(v - 1.0, p)
}

/// Sound speed written in terms of the gap `r = v - 1`.
fn sound_speed_from_gap(r: f64, p: &PressureParams) -> f64 {
    let g = p.gamma;
    let mut d1 = p.epsilon * g * r.powf(-(g + 1.0));
    if p.has_isentropic() {
        d1 += p.kappa * p.gamma_tilde * (1.0 + r).powf(-(p.gamma_tilde + 1.0));
    }
    d1.sqrt()
}

/// `theta(v) = int_v^inf c(tau) dtau`, closed form when `kappa = 0`.
pub fn theta_lagrangian(v: f64, p: &PressureParams) -> Result<f64> {
    check_v(v)?;
    if !p.has_isentropic() {
        let g = p.gamma;
        return Ok((p.epsilon * g).sqrt() * (2.0 / (g - 1.0)) * (v - 1.0).powf(-(g - 1.0) / 2.0));
    }
    theta_lagrangian_quadrature(v, p)
}

/// Quadrature evaluation of `theta(v)` valid for every parameter set.
///
/// The near part `[v, 2v]` uses `tau = 1 + (v-1) e^s`; the tail `[2v, inf)` is
/// mapped onto `(0, 1]` through `tau = 2v/s` with a power substitution at `s = 0`.
pub fn theta_lagrangian_quadrature(v: f64, p: &PressureParams) -> Result<f64> {
    check_v(v)?;
    let w = v - 1.0;
    let s_max = ((2.0 * v - 1.0) / w).ln();
    let near = integrate(
        |s| {
            let r = w * s.exp();
            sound_speed_from_gap(r, p) * r
        },
        0.0,
        s_max,
        0.5 * ABS_TOL,
    )?;
    let v2 = 2.0 * v;
    let decay = if p.has_isentropic() { p.gamma_tilde.min(p.gamma) } else { p.gamma };
    let beta = (decay - 3.0) / 2.0;
    let tail = integrate_power_singular(
        |s| {
            if s <= 0.0 {
                return 0.0;
            }
            sound_speed_unchecked(v2 / s, p) * v2 / (s * s)
        },
        1.0,
        beta.max(-0.999),
        0.5 * ABS_TOL,
    )?;
    Ok(near + tail)
}

/// `Theta(rho) = int_0^rho sqrt(p'(s))/s ds`.
///
/// For `kappa = 0` the substitution `r = s/(1-s)` gives
/// `Theta = 2 sqrt(eps gamma)/(gamma-1) (rho/(1-rho))^((gamma-1)/2)`.
pub fn theta_eulerian(rho: f64, p: &PressureParams) -> Result<f64> {
    check_rho(rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    if !p.has_isentropic() {
        let g = p.gamma;
        return Ok(2.0 * (p.epsilon * g).sqrt() / (g - 1.0) * (rho / (1.0 - rho)).powf((g - 1.0) / 2.0));
    }
    theta_eulerian_quadrature(rho, p)
}

/// Quadrature evaluation of `Theta(rho)` valid for every parameter set.
pub fn theta_eulerian_quadrature(rho: f64, p: &PressureParams) -> Result<f64> {
    check_rho(rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let integrand = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let g = p.gamma;
        let mut d = p.epsilon * g * s.powf(g - 1.0) / (1.0 - s).powf(g + 1.0);
        if p.has_isentropic() {
            d += p.kappa * p.gamma_tilde * s.powf(p.gamma_tilde - 1.0);
        }
        d.sqrt() / s
    };
    let exponent = if p.has_isentropic() { p.gamma.min(p.gamma_tilde) } else { p.gamma };
    let half = 0.5 * rho;
    let lower = integrate_power_singular(integrand, half, (exponent - 3.0) / 2.0, 0.5 * ABS_TOL)?;
    let gap = 1.0 - rho;
    let s_max = ((1.0 - half) / gap).ln();
    let upper = integrate(
        |t| {
            let r = gap * t.exp();
            integrand(1.0 - r) * r
        },
        0.0,
        s_max,
        0.5 * ABS_TOL,
    )?;
    Ok(lower + upper)
}

/// Internal energy `H(rho)` with `rho H' - H = p`.
pub fn internal_energy(rho: f64, p: &PressureParams) -> Result<f64> {
    check_rho(rho)?;
    let g = p.gamma;
    let mut h = p.epsilon / (g - 1.0) * rho.powf(g) / (1.0 - rho).powf(g - 1.0);
    if p.has_isentropic() {
        h += p.kappa / (p.gamma_tilde - 1.0) * rho.powf(p.gamma_tilde);
    }
    Ok(h)
}

/// Coefficient of the Riccati equations `dy/dt = -a y^2` along the forward
/// characteristics and `dq/dt = -a q^2` along the backward ones, where
/// `y = sqrt(c) w_x`, `q = sqrt(c) z_x`.
///
/// `a = -c'/(2 c^{3/2}) = p''/(4 (-p')^{5/4})`.
pub fn riccati_coefficient(v: f64, p: &PressureParams) -> Result<f64> {
    let (d1, d2) = pressure_derivatives_lagrangian(v, p)?;
    Ok(d2 / (4.0 * (-d1).powf(1.25)))
}

/// Closed form of [`riccati_coefficient`] for `kappa = 0`.
pub fn riccati_coefficient_singular(v: f64, p: &PressureParams) -> Result<f64> {
    check_v(v)?;
    let g = p.gamma;
    Ok((g + 1.0) / (4.0 * (p.epsilon * g).powf(0.25)) * (v - 1.0).powf((g - 3.0) / 4.0))
}

/// Exponent `beta` of the blow-up time scaling `eps^beta`.
pub fn blowup_exponent(gamma: f64) -> f64 {
    if gamma < 3.0 {
        1.0 / (2.0 * (gamma - 1.0))
    } else if gamma == 3.0 {
        0.25
    } else {
        1.0 / (gamma + 1.0)
    }
}

/// Classifies `v` by the exponent `alpha` with `v - 1 = eps^alpha`.
pub fn classify_regime(v: f64, p: &PressureParams) -> Result<Regime> {
    check_v(v)?;
    let w = v - 1.0;
    let g = p.gamma;
    if w >= 1.0 || p.epsilon >= 1.0 {
        return Ok(Regime::Far);
    }
    let alpha = w.ln() / p.epsilon.ln();
    if alpha <= 1.0 / (g + 2.0) {
        return Ok(Regime::Far);
    }
    if alpha >= 1.0 / (g + 1.0) - REGIME_TOL {
        return Ok(Regime::NearCongestion { alpha });
    }
    Ok(Regime::Intermediate { alpha })
}

/// One row of the tabulated equation of state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EosRow {
    pub v: f64,
    pub rho: f64,
    pub pressure: f64,
    pub singular_part: f64,
    pub isentropic_part: f64,
    pub dp_dv: f64,
    pub d2p_dv2: f64,
    pub sound_speed: f64,
    pub theta: f64,
    pub riccati_a: f64,
}

/// Tabulates the Lagrangian equation of state on `v = 1 + (v_max - 1) s^2`
/// for `n` equispaced `s` in `(0, 1]`.
pub fn eos_table(p: &PressureParams, v_max: f64, n: usize) -> Result<Vec<EosRow>> {
    (1..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            let v = 1.0 + (v_max - 1.0) * s * s;
            let pr = pressure_lagrangian(v, p)?;
            let (d1, d2) = pressure_derivatives_lagrangian(v, p)?;
            Ok(EosRow {
                v,
                rho: 1.0 / v,
                pressure: pr.total,
                singular_part: pr.singular_part,
                isentropic_part: pr.isentropic_part,
                dp_dv: d1,
                d2p_dv2: d2,
                sound_speed: (-d1).sqrt(),
                theta: theta_lagrangian(v, p)?,
                riccati_a: riccati_coefficient(v, p)?,
            })
        })
        .collect()
}
