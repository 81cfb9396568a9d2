//! Uniform grids, finite-difference stencils and interpolation.

use serde::{Deserialize, Serialize};

/// Uniform 1D grid with nodes `x_i = x0 + i dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, n: usize) -> Self {
        Self { x0, dx, n }
    }

    /// Grid with `n` nodes spanning `[a, b]` inclusive.
    pub fn spanning(a: f64, b: f64, n: usize) -> Self {
        Self { x0: a, dx: (b - a) / (n - 1) as f64, n }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.n).map(|i| f(self.x(i))).collect()
    }
}

/// First derivative: 4th-order central differences in the interior, 2nd-order
/// one-sided differences on the two outermost nodes at each edge.
pub fn derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    let edge_lo = |i: usize| (-3.0 * f[i] + 4.0 * f[i + 1] - f[i + 2]) / (2.0 * dx);
    let edge_hi = |i: usize| (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * dx);
    if n < 5 {
        d[0] = edge_lo(0);
        for i in 1..n - 1 {
            d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
        }
        d[n - 1] = edge_hi(n - 1);
        return d;
    }
    d[0] = edge_lo(0);
    d[1] = edge_lo(1);
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dx);
    }
    d[n - 2] = edge_hi(n - 2);
    d[n - 1] = edge_hi(n - 1);
    d
}

/// Cumulative trapezoid integral starting at 0 on the first node.
pub fn cumulative_trapezoid(f: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Trapezoid integral of uniformly sampled data.
pub fn trapezoid(f: &[f64], dx: f64) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    dx * (inner + 0.5 * (f[0] + f[f.len() - 1]))
}

/// Integral over `[a, b]` of the piecewise-linear interpolant of uniformly
/// sampled data; `None` when the window leaves the grid.
pub fn window_integral(grid: &Grid, f: &[f64], a: f64, b: f64) -> Option<f64> {
    let tol = 1e-9 * grid.dx;
    if a > b || a < grid.x0 - tol || b > grid.x_end() + tol {
        return None;
    }
    let lerp = |x: f64| {
        let s = ((x - grid.x0) / grid.dx).clamp(0.0, (grid.n - 1) as f64);
        let i = (s.floor() as usize).min(grid.n - 2);
        let t = s - i as f64;
        f[i] * (1.0 - t) + f[i + 1] * t
    };
    let a = a.max(grid.x0);
    let b = b.min(grid.x_end());
    let first = ((a - grid.x0) / grid.dx).ceil() as usize;
    let last = ((b - grid.x0) / grid.dx).floor() as usize;
    if first > last {
        return Some(0.5 * (b - a) * (lerp(a) + lerp(b)));
    }
    let (xf, xl) = (grid.x(first), grid.x(last));
    let mut total = 0.5 * (xf - a) * (lerp(a) + f[first]) + 0.5 * (b - xl) * (f[last] + lerp(b));
    total += trapezoid(&f[first..=last], grid.dx);
    Some(total)
}

/// Four-point Lagrange (cubic) interpolation of uniformly sampled data.
/// Returns `None` outside the sampled interval.
pub fn cubic_interp(grid: &Grid, f: &[f64], x: f64) -> Option<f64> {
    let s = (x - grid.x0) / grid.dx;
    let n = grid.n;
    if !(s >= -1e-12 && s <= (n - 1) as f64 + 1e-12) {
        return None;
    }
    if n < 4 {
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        return Some(f[i] * (1.0 - t) + f[i + 1] * t);
    }
    let i = (s.floor().max(0.0) as usize).clamp(1, n - 3);
    let t = s - i as f64;
    let (a, b, c, d) = (f[i - 1], f[i], f[i + 1], f[i + 2]);
    let l0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let l1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let l2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let l3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    Some(a * l0 + b * l1 + c * l2 + d * l3)
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes) on
/// strictly increasing, possibly nonuniform, abscissae.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len();
        assert!(n >= 2 && ys.len() == n);
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self { xs: xs.to_vec(), ys: ys.to_vec(), slopes }
    }

    /// Evaluates the interpolant; values outside the data range are clamped
    /// to the end values.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = self.xs.partition_point(|&xi| xi <= x) - 1;
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}
