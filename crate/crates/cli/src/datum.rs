//! Analytic initial data sampled on a grid.

use std::f64::consts::PI;

use hardsphere::{Grid, PressureParams};
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;

/// Closed-form initial datum, given as specific volume `v` and velocity `u`
/// at position `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Datum {
    /// Uniform state.
    Constant { v: f64, u: f64 },
    /// Uniform volume with `u = speed tanh((x - center)/width)`; a negative
    /// speed compresses.
    TanhVelocity {
        v: f64,
        speed: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `rho = rho + amplitude sin(k x)`, `u = u_amplitude sin(k x + u_phase)`
    /// with `k = 2 pi / wavelength`.
    DensitySine {
        rho: f64,
        amplitude: f64,
        u_amplitude: f64,
        #[serde(default = "one")]
        wavelength: f64,
        #[serde(default)]
        u_phase: f64,
    },
    /// Gaussian bump of height `bump` on the volume, `u = speed tanh(x/speed_width)`.
    VolumeBump {
        v: f64,
        bump: f64,
        #[serde(default = "one")]
        width: f64,
        speed: f64,
        #[serde(default = "one")]
        speed_width: f64,
    },
    /// Gaussian bump of height `bump` on the density, `u = speed tanh(x/speed_width)`.
    DensityBump {
        rho: f64,
        bump: f64,
        #[serde(default = "one")]
        width: f64,
        speed: f64,
        #[serde(default = "one")]
        speed_width: f64,
    },
    /// Simple wave with `z = 0`: `theta = theta_mean - theta_amplitude tanh(x/width)`
    /// and `u = theta`. Requires `kappa = 0`.
    SimpleWave {
        theta_mean: f64,
        theta_amplitude: f64,
        #[serde(default = "one")]
        width: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Datum {
    /// Checks that the datum stays inside `v > 1`.
    pub fn validate(&self, p: &PressureParams) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError { message: format!("validation error: initial datum: {m}") });
        let positive = |w: f64| w > 0.0 && w.is_finite();
        match *self {
            Datum::Constant { v, .. } | Datum::TanhVelocity { v, .. } if !(v > 1.0) => bad("v must exceed 1"),
            Datum::TanhVelocity { width, .. } if !positive(width) => bad("width must be positive"),
            Datum::DensitySine { rho, amplitude, wavelength, .. } => {
                if !(rho - amplitude.abs() > 0.0 && rho + amplitude.abs() < 1.0) {
                    bad("density must stay inside (0, 1)")
                } else if !positive(wavelength) {
                    bad("wavelength must be positive")
                } else {
                    Ok(())
                }
            }
            Datum::VolumeBump { v, bump, width, speed_width, .. } => {
                if !(v + bump.min(0.0) > 1.0) {
                    bad("v must exceed 1")
                } else if !(positive(width) && positive(speed_width)) {
                    bad("widths must be positive")
                } else {
                    Ok(())
                }
            }
            Datum::DensityBump { rho, bump, width, speed_width, .. } => {
                if !(rho + bump.min(0.0) > 0.0 && rho + bump.max(0.0) < 1.0) {
                    bad("density must stay inside (0, 1)")
                } else if !(positive(width) && positive(speed_width)) {
                    bad("widths must be positive")
                } else {
                    Ok(())
                }
            }
            Datum::SimpleWave { theta_mean, theta_amplitude, width } => {
                if p.kappa != 0.0 {
                    bad("simple_wave requires kappa = 0")
                } else if !(theta_mean - theta_amplitude.abs() > 0.0) {
                    bad("theta must stay positive")
                } else if !positive(width) {
                    bad("width must be positive")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `(v, u)` at `x`.
    pub fn at(&self, x: f64, p: &PressureParams) -> (f64, f64) {
        match *self {
            Datum::Constant { v, u } => (v, u),
            Datum::TanhVelocity { v, speed, width, center } => (v, speed * ((x - center) / width).tanh()),
            Datum::DensitySine { rho, amplitude, u_amplitude, wavelength, u_phase } => {
                let k = 2.0 * PI / wavelength;
                (1.0 / (rho + amplitude * (k * x).sin()), u_amplitude * (k * x + u_phase).sin())
            }
            Datum::VolumeBump { v, bump, width, speed, speed_width } => {
                (v + bump * (-(x / width).powi(2)).exp(), speed * (x / speed_width).tanh())
            }
            Datum::DensityBump { rho, bump, width, speed, speed_width } => {
                (1.0 / (rho + bump * (-(x / width).powi(2)).exp()), speed * (x / speed_width).tanh())
            }
            Datum::SimpleWave { theta_mean, theta_amplitude, width } => {
                let theta = theta_mean - theta_amplitude * (x / width).tanh();
                (volume_from_theta(theta, p), theta)
            }
        }
    }

    /// Lagrangian fields `(v, u)` on `grid`.
    pub fn lagrangian(&self, grid: &Grid, p: &PressureParams) -> (Vec<f64>, Vec<f64>) {
        (0..grid.n).map(|i| self.at(grid.x(i), p)).unzip()
    }

    /// Eulerian fields `(rho, m)` on `grid`.
    pub fn eulerian(&self, grid: &Grid, p: &PressureParams) -> (Vec<f64>, Vec<f64>) {
        (0..grid.n)
            .map(|i| {
                let (v, u) = self.at(grid.x(i), p);
                (1.0 / v, u / v)
            })
            .unzip()
    }
}

/// Inverse of `theta(v) = K (v-1)^(-(gamma-1)/2)`, `K = 2 sqrt(eps gamma)/(gamma-1)`.
fn volume_from_theta(theta: f64, p: &PressureParams) -> f64 {
    let k = 2.0 * (p.epsilon * p.gamma).sqrt() / (p.gamma - 1.0);
    1.0 + (theta / k).powf(-2.0 / (p.gamma - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hardsphere::eos;

    #[test]
    fn simple_wave_inverts_theta() {
        let p = PressureParams::singular(0.02, 2.5);
        let d = Datum::SimpleWave { theta_mean: 1.5, theta_amplitude: 0.5, width: 1.0 };
        for x in [-2.0, 0.0, 0.7] {
            let (v, u) = d.at(x, &p);
            assert!((eos::theta_lagrangian(v, &p).unwrap() - u).abs() < 1e-12);
        }
    }

    #[test]
    fn eulerian_fields_match_lagrangian() {
        let p = PressureParams::singular(0.01, 2.0);
        let d = Datum::DensitySine { rho: 0.5, amplitude: 0.3, u_amplitude: 0.5, wavelength: 1.0, u_phase: 0.0 };
        let grid = Grid::new(0.0, 0.1, 10);
        let (v, u) = d.lagrangian(&grid, &p);
        let (rho, m) = d.eulerian(&grid, &p);
        for i in 0..10 {
            assert!((rho[i] * v[i] - 1.0).abs() < 1e-15);
            assert!((m[i] - rho[i] * u[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn density_outside_unit_interval_rejected() {
        let p = PressureParams::singular(0.01, 2.0);
        let d = Datum::DensityBump { rho: 0.9, bump: 0.2, width: 1.0, speed: 0.0, speed_width: 1.0 };
        assert!(d.validate(&p).is_err());
    }
}
