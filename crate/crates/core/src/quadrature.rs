//! Adaptive Gauss-Kronrod quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Default absolute tolerance for every integral in the crate.
pub const ABS_TOL: f64 = 1e-12;

const MAX_DEPTH: u32 = 60;

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Share of the requested tolerance that an interval at the depth limit may
/// still carry.
const DEPTH_LIMIT_SHARE: f64 = 1e-6;

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, root_tol: f64, depth: u32, whole: (f64, f64)) -> Result<f64> {
    let (est, err) = whole;
    if err <= tol.max(1e-15 * est.abs()) || (b - a).abs() <= 1e-15 * a.abs().max(b.abs()) {
        return Ok(est);
    }
    if depth >= MAX_DEPTH {
        if err <= DEPTH_LIMIT_SHARE * root_tol {
            return Ok(est);
        }
        return Err(Error::Integration { tol, estimate: err });
    }
    let m = 0.5 * (a + b);
    let left = kronrod15(f, a, m);
    let right = kronrod15(f, m, b);
    Ok(adapt(f, a, m, 0.5 * tol, root_tol, depth + 1, left)? + adapt(f, m, b, 0.5 * tol, root_tol, depth + 1, right)?)
}

/// Relative accuracy requested on top of the absolute tolerance.
pub const REL_TOL: f64 = 1e-14;

/// Integrates `f` over `[a, b]` to the tolerance `max(tol, REL_TOL |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = kronrod15(&f, a, b);
    let tol = tol.max(REL_TOL * whole.0.abs());
    let v = adapt(&f, a, b, tol, tol, 0, whole)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Integration { tol, estimate: f64::NAN })
    }
}

/// Integrates `f` over `[0, b]` where `f(s)` behaves like `s^beta` near 0 with `beta > -1`.
///
/// The substitution `s = b t^k`, `k = 1/(beta+1)`, turns the integrand into a
/// bounded function of `t`.
pub fn integrate_power_singular<F: Fn(f64) -> f64>(f: F, b: f64, beta: f64, tol: f64) -> Result<f64> {
    if b == 0.0 {
        return Ok(0.0);
    }
    let k = 1.0 / (beta + 1.0);
    let g = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let s = b * t.powf(k);
        f(s) * b * k * t.powf(k - 1.0)
    };
    integrate(g, 0.0, 1.0, tol)
}
