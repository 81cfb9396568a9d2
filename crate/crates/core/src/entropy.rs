//! Entropy-entropy flux pairs, relative pairs, residual and dissipation
//! diagnostics, and the coefficient identities of the compactness argument.

use serde::Serialize;

use crate::eos::{self, PressureParams};
use crate::error::{Error, Result};
use crate::grid::{derivative, trapezoid};
use crate::limits::fit::scaling_fit;
use crate::quadrature::{integrate_power_singular, ABS_TOL};
use crate::trajectory::EulerianTrajectory;

/// Index of one of the four entropy pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairId(u8);

impl PairId {
    pub fn new(index: u8) -> Result<Self> {
        if (1..=4).contains(&index) {
            Ok(Self(index))
        } else {
            Err(Error::Config(format!("entropy pair index must be 1..=4, got {index}")))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn all() -> [PairId; 4] {
        [PairId(1), PairId(2), PairId(3), PairId(4)]
    }
}

fn ratio(rho: f64) -> f64 {
    rho / (1.0 - rho)
}

/// `I1(rho) = int_0^rho p(s)/s^2 ds`.
pub fn pressure_integral(rho: f64, p: &PressureParams) -> Result<f64> {
    check_rho(rho)?;
    if p.kappa == 0.0 {
        let g = p.gamma;
        return Ok(p.epsilon / (g - 1.0) * ratio(rho).powf(g - 1.0));
    }
    pressure_integral_quadrature(rho, p, 1)
}

/// `I2(rho) = int_0^rho p(s)^2/s^2 ds`.
pub fn pressure_square_integral(rho: f64, p: &PressureParams) -> Result<f64> {
    check_rho(rho)?;
    if p.kappa == 0.0 {
        let g = p.gamma;
        return Ok(p.epsilon * p.epsilon / (2.0 * g - 1.0) * ratio(rho).powf(2.0 * g - 1.0));
    }
    pressure_integral_quadrature(rho, p, 2)
}

/// Quadrature for `int_0^rho p^k/s^2 ds` in the variable `r = s/(1-s)`,
/// where `ds/s^2 = dr/r^2`.
pub fn pressure_integral_quadrature(rho: f64, p: &PressureParams, power: i32) -> Result<f64> {
    check_rho(rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let r_max = ratio(rho);
    let lowest = if p.kappa > 0.0 { p.gamma.min(p.gamma_tilde) } else { p.gamma };
    let beta = power as f64 * lowest - 2.0;
    integrate_power_singular(
        |r| {
            if r <= 0.0 {
                return 0.0;
            }
            let s = r / (1.0 + r);
            let pr = p.epsilon * r.powf(p.gamma) + if p.kappa > 0.0 { p.kappa * s.powf(p.gamma_tilde) } else { 0.0 };
            pr.powi(power) / (r * r)
        },
        r_max,
        beta.max(-0.999),
        ABS_TOL,
    )
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 0.0 && rho < 1.0) {
        return Err(Error::Domain { what: "density must lie in [0, 1)", value: rho });
    }
    Ok(())
}

/// Evaluates `(eta_i, q_i)` at `(rho, m)`.
pub fn entropy_pair(id: PairId, rho: f64, m: f64, p: &PressureParams) -> Result<(f64, f64)> {
    check_rho(rho)?;
    if id.0 == 1 {
        return Ok((rho, m));
    }
    if rho == 0.0 {
        if m != 0.0 {
            return Err(Error::Domain { what: "vacuum state must carry zero momentum", value: m });
        }
        return Ok((0.0, 0.0));
    }
    let pr = eos::pressure_eulerian(rho, p)?;
    let u = m / rho;
    Ok(match id.0 {
        2 => (m, m * u + pr),
        3 => {
            let i1 = pressure_integral(rho, p)?;
            (0.5 * m * u + rho * i1, 0.5 * m * u * u + m * (pr / rho + i1))
        }
        _ => {
            let i1 = pressure_integral(rho, p)?;
            let i2 = pressure_square_integral(rho, p)?;
            (
                m * u * u + 6.0 * m * i1,
                m * u * u * u + 3.0 * m * m * (pr / (rho * rho) + 2.0 * i1 / rho) + 6.0 * (pr * i1 - i2),
            )
        }
    })
}

/// Gradient of `eta_i` with respect to `(rho, m)`.
pub fn entropy_gradient(id: PairId, rho: f64, m: f64, p: &PressureParams) -> Result<(f64, f64)> {
    check_rho(rho)?;
    if rho == 0.0 {
        return Err(Error::Domain { what: "entropy gradient requires positive density", value: rho });
    }
    let u = m / rho;
    Ok(match id.0 {
        1 => (1.0, 0.0),
        2 => (0.0, 1.0),
        3 => {
            let i1 = pressure_integral(rho, p)?;
            let pr = eos::pressure_eulerian(rho, p)?;
            (-0.5 * u * u + i1 + pr / rho, u)
        }
        _ => {
            let i1 = pressure_integral(rho, p)?;
            let pr = eos::pressure_eulerian(rho, p)?;
            (-2.0 * u * u * u + 6.0 * m * pr / (rho * rho), 3.0 * u * u + 6.0 * i1)
        }
    })
}

/// Relative pairs `(eta~_i, q~_i)(U, Ubar)`.
pub fn relative_entropy_pair(id: PairId, state: (f64, f64), reference: (f64, f64), p: &PressureParams) -> Result<(f64, f64)> {
    let (rho, m) = state;
    let (rb, mb) = reference;
    for r in [rho, rb] {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain { what: "relative pairs need densities in (0, 1)", value: r });
        }
    }
    let u = m / rho;
    let ub = mb / rb;
    let du = u - ub;
    let pr = eos::pressure_eulerian(rho, p)?;
    let pb = eos::pressure_eulerian(rb, p)?;
    Ok(match id.0 {
        1 => (rho - rb, m - mb),
        2 => (m - mb, m * u - mb * ub + pr - pb),
        3 => {
            let i1 = pressure_integral(rho, p)?;
            let i1b = pressure_integral(rb, p)?;
            let eta = 0.5 * rho * du * du + rho * i1 - rb * i1b - (i1b + pb / rb) * (rho - rb);
            let q = 0.5 * m * du * du + du * (pr - pb) + u * (rho * (i1 - i1b) - pb / rb * (rho - rb));
            (eta, q)
        }
        _ => {
            let di1 = pressure_integral(rho, p)? - pressure_integral(rb, p)?;
            let di2 = pressure_square_integral(rho, p)? - pressure_square_integral(rb, p)?;
            let cubic = du * du * (u + 2.0 * ub);
            let eta = 6.0 * m * di1 + rho * cubic - 6.0 * mb / (rb * rb) * pb * (rho - rb);
            let q = 6.0 * (m * u + pr) * di1 - 6.0 * di2 + 3.0 * pr * (u * u - ub * ub) + m * cubic
                - 6.0 * pb * mb / (rb * rb) * (m - mb);
            (eta, q)
        }
    })
}

/// Quadratic parts of `(eta~_i, q~_i)` for `i = 3, 4` in the increments
/// `a = rho - rbar`, `b = u - ubar`.
pub fn relative_pair_quadratic(id: PairId, reference: (f64, f64), a: f64, b: f64, p: &PressureParams) -> Result<(f64, f64)> {
    let (rb, ub) = reference;
    let pb = eos::pressure_eulerian(rb, p)?;
    let dp = eos::pressure_eulerian_derivative(rb, p)?;
    match id.0 {
        3 => Ok((
            0.5 * rb * b * b + 0.5 * dp / rb * a * a,
            0.5 * rb * ub * b * b + 0.5 * dp / rb * ub * a * a + dp * a * b,
        )),
        4 => {
            let s = pb + rb * ub * ub;
            Ok((
                3.0 * rb * ub * b * b + 3.0 * ub * dp / rb * a * a + 6.0 * pb / rb * a * b,
                3.0 * s * b * b + 3.0 * dp / (rb * rb) * s * a * a + 6.0 * (pb / rb + dp) * ub * a * b,
            ))
        }
        _ => Err(Error::Config("quadratic forms exist for pairs 3 and 4 only".into())),
    }
}

/// Direction of the perturbation used by [`taylor_expansion_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Perturbation {
    Mixed,
    DensityOnly,
    VelocityOnly,
}

/// Fitted order of the remainder `(eta~, q~) - quadratic form` under the
/// halving sequence `delta, delta/2, ..., delta/16`. Returns `+inf` when the
/// remainder vanishes to rounding at every level.
pub fn taylor_expansion_residual(
    id: PairId,
    reference: (f64, f64),
    delta: f64,
    direction: Perturbation,
    p: &PressureParams,
) -> Result<f64> {
    let (rb, ub) = reference;
    let (da, db) = match direction {
        Perturbation::Mixed => (0.6, -0.8),
        Perturbation::DensityOnly => (1.0, 0.0),
        Perturbation::VelocityOnly => (0.0, 1.0),
    };
    let mut hs = Vec::new();
    let mut rs = Vec::new();
    let mut all_tiny = true;
    for k in 0..5 {
        let h = delta / f64::powi(2.0, k);
        let (a, b) = (da * h, db * h);
        let rho = rb + a;
        let u = ub + b;
        let (eta, q) = relative_entropy_pair(id, (rho, rho * u), (rb, rb * ub), p)?;
        let (qe, qq) = relative_pair_quadratic(id, (rb, ub), a, b, p)?;
        let rem = (eta - qe).abs().max((q - qq).abs());
        let scale = eta.abs().max(q.abs()).max(qe.abs()).max(qq.abs());
        if rem > 1e-13 * scale.max(1e-300) + 1e-300 {
            all_tiny = false;
        }
        hs.push(h);
        rs.push(rem.max(1e-300));
    }
    if all_tiny {
        return Ok(f64::INFINITY);
    }
    Ok(scaling_fit(&hs, &rs)?.slope)
}

fn pair_fields(id: PairId, rho: &[f64], m: &[f64], p: &PressureParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut eta = Vec::with_capacity(rho.len());
    let mut q = Vec::with_capacity(rho.len());
    for (&r, &mm) in rho.iter().zip(m) {
        let mm = if r == 0.0 { 0.0 } else { mm };
        let (e, f) = entropy_pair(id, r, mm, p)?;
        eta.push(e);
        q.push(f);
    }
    Ok((eta, q))
}

/// Discrete `L^2(t, x)` norm of `d_t eta_i + d_x q_i` with centered differences
/// on the interior of the snapshot lattice.
pub fn entropy_residual(traj: &EulerianTrajectory, id: PairId, p: &PressureParams) -> Result<f64> {
    let k = traj.len();
    if k < 3 {
        return Err(Error::InsufficientSnapshots(k));
    }
    let grid = traj.first().state.grid;
    let fields = traj
        .snapshots
        .iter()
        .map(|s| pair_fields(id, &s.state.rho, &s.state.m, p))
        .collect::<Result<Vec<_>>>()?;
    let mut sum = 0.0;
    for j in 1..k - 1 {
        let dt = traj.snapshots[j + 1].t - traj.snapshots[j - 1].t;
        let (_, q) = &fields[j];
        for i in 1..grid.n - 1 {
            let eta_t = (fields[j + 1].0[i] - fields[j - 1].0[i]) / dt;
            let q_x = (q[i + 1] - q[i - 1]) / (2.0 * grid.dx);
            let r = eta_t + q_x;
            sum += r * r * grid.dx * 0.5 * dt;
        }
    }
    Ok(sum.sqrt())
}

/// Space-time integrals of the pair-3 dissipation of a viscous run.
#[derive(Debug, Clone, Serialize)]
pub struct Dissipation {
    /// `int int mu (p'/rho) rho_x^2 + mu rho u_x^2`.
    pub total: f64,
    /// Time integral of the dissipation density at every grid node.
    pub pointwise: Vec<f64>,
    /// `mu^2 int int rho_x^2`.
    pub mu2_grad_rho: f64,
    /// `mu^2 int int m_x^2`.
    pub mu2_grad_m: f64,
}

/// Dissipation of the pair `(eta_3, q_3)` integrated over the snapshots.
pub fn entropy_dissipation(traj: &EulerianTrajectory, p: &PressureParams) -> Result<Dissipation> {
    let mu = traj.meta.mu.ok_or(Error::MissingViscosity)?;
    let grid = traj.first().state.grid;
    let mut density = Vec::with_capacity(traj.len());
    let mut grad_rho = Vec::with_capacity(traj.len());
    let mut grad_m = Vec::with_capacity(traj.len());
    for s in &traj.snapshots {
        let st = &s.state;
        let u = st.velocity();
        let rx = derivative(&st.rho, grid.dx);
        let ux = derivative(&u, grid.dx);
        let mx = derivative(&st.m, grid.dx);
        let mut d = Vec::with_capacity(grid.n);
        for i in 0..grid.n {
            let r = st.rho[i];
            let val = if r > 0.0 {
                let dp = eos::pressure_eulerian_derivative(r, p)?;
                mu * (dp / r * rx[i] * rx[i] + r * ux[i] * ux[i])
            } else {
                0.0
            };
            d.push(val);
        }
        density.push(d);
        grad_rho.push(mu * mu * trapezoid(&rx.iter().map(|x| x * x).collect::<Vec<_>>(), grid.dx));
        grad_m.push(mu * mu * trapezoid(&mx.iter().map(|x| x * x).collect::<Vec<_>>(), grid.dx));
    }
    let times = traj.times();
    let time_int = |vals: &[f64]| -> f64 {
        times.windows(2).zip(vals.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
    };
    let mut pointwise = vec![0.0; grid.n];
    for (i, pw) in pointwise.iter_mut().enumerate() {
        let series: Vec<f64> = density.iter().map(|d| d[i]).collect();
        *pw = time_int(&series);
    }
    let total = trapezoid(&pointwise, grid.dx);
    Ok(Dissipation { total, pointwise, mu2_grad_rho: time_int(&grad_rho), mu2_grad_m: time_int(&grad_m) })
}

/// Coefficients of the reduction identities at a reference density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub rho_bar: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Result of comparing the composite coefficients with their closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub set: CoefficientSet,
    pub c1_closed: f64,
    pub c2_closed: f64,
    pub c3_closed: f64,
    pub max_rel_error: f64,
}

/// Builds `A1..A4`, `B1..B3` from the pressure, composes `C1..C3` and compares
/// with the closed forms.
pub fn coefficient_identities(rho_bar: f64, p: &PressureParams) -> Result<CoefficientReport> {
    p.validate_weak()?;
    if !(rho_bar > 0.0 && rho_bar < 1.0) {
        return Err(Error::Domain { what: "reference density must lie in (0, 1)", value: rho_bar });
    }
    let rb = rho_bar;
    let pr = eos::pressure_eulerian(rb, p)?;
    let d1 = eos::pressure_eulerian_derivative(rb, p)?;
    let d2 = eos::pressure_eulerian_second_derivative(rb, p)?;
    let rb2 = rb * rb;
    let rb3 = rb2 * rb;
    let a1 = (2.0 * d1 * d1 - pr * d2) / (2.0 * rb2) - d1 * pr / rb3;
    let a2 = 3.0 * pr * d2 / (2.0 * rb2);
    let a3 = 3.0 * pr / rb + 3.0 * pr * d2 / (2.0 * d1);
    let a4 = 3.0 * rb * pr / d1;
    let b1 = 1.5 * rb * pr;
    let b2 = 3.0 * pr * d1 * d1 / (2.0 * rb3);
    let b3 = 3.0 * pr * d1 / rb;
    let c1_sub = b3 * rb2 / a3;
    let c1 = b1 - c1_sub;
    let c2 = b3 * a1 / a3 + b2;
    let c3 = 2.0 * b3;

    let (e, g) = (p.epsilon, p.gamma);
    let gap = 1.0 - rb;
    let c1_closed = e * (3.0 - g) / (2.0 * (g + 1.0)) * rb.powf(g + 1.0) / gap.powf(g);
    let c2_closed = e.powi(3) * g * g * (5.0 * g + 1.0) / (2.0 * (g + 1.0)) * rb.powf(3.0 * g - 5.0) / gap.powf(3.0 * g + 2.0);
    let c3_closed = 6.0 * g * e * e * rb.powf(2.0 * (g - 1.0)) / gap.powf(2.0 * g + 1.0);

    let floor1 = 1e3 * f64::EPSILON * (b1.abs() + c1_sub.abs());
    let rel = |a: f64, b: f64, floor: f64| (a - b).abs() / b.abs().max(floor).max(f64::MIN_POSITIVE);
    let max_rel_error = rel(c1, c1_closed, floor1)
        .max(rel(c2, c2_closed, 0.0))
        .max(rel(c3, c3_closed, 0.0));
    Ok(CoefficientReport {
        set: CoefficientSet { rho_bar, a1, a2, a3, a4, b1, b2, b3, c1, c2, c3 },
        c1_closed,
        c2_closed,
        c3_closed,
        max_rel_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use approx::assert_relative_eq;

    fn pid(i: u8) -> PairId {
        PairId::new(i).unwrap()
    }

    #[test]
    fn pair_examples() {
        let p = PressureParams::singular(0.1, 2.0);
        assert_eq!(entropy_pair(pid(1), 0.3, -0.7, &p).unwrap(), (0.3, -0.7));
        let (_, q2) = entropy_pair(pid(2), 0.5, 0.25, &p).unwrap();
        assert_relative_eq!(q2, 0.225, max_relative = 1e-14);
        let (eta3, _) = entropy_pair(pid(3), 0.5, 0.0, &p).unwrap();
        let brute = integrate(|s| eos::pressure_eulerian(s, &p).unwrap() / (s * s), 0.0, 0.5, 1e-14).unwrap();
        assert_relative_eq!(eta3, 0.5 * brute, max_relative = 1e-10);
        assert!(PairId::new(5).is_err());
        assert!(entropy_pair(pid(3), 0.0, 0.1, &p).is_err());
        assert_eq!(entropy_pair(pid(4), 0.0, 0.0, &p).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn integral_closed_forms_match_quadrature() {
        for &(e, g) in &[(0.1, 2.0), (1e-3, 1.4), (0.05, 3.0)] {
            let p = PressureParams::singular(e, g);
            for &rho in &[0.05, 0.5, 0.95] {
                assert_relative_eq!(
                    pressure_integral(rho, &p).unwrap(),
                    pressure_integral_quadrature(rho, &p, 1).unwrap(),
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    pressure_square_integral(rho, &p).unwrap(),
                    pressure_integral_quadrature(rho, &p, 2).unwrap(),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn pairs_satisfy_compatibility() {
        // grad q = grad eta . Df, checked by finite differences.
        let p = PressureParams::singular(0.05, 2.5);
        let (rho, m) = (0.4, 0.13);
        let h = 1e-6;
        let pr = |r: f64| eos::pressure_eulerian(r, &p).unwrap();
        let dp = eos::pressure_eulerian_derivative(rho, &p).unwrap();
        let u = m / rho;
        for id in PairId::all() {
            let (er, em) = entropy_gradient(id, rho, m, &p).unwrap();
            let q = |r: f64, mm: f64| entropy_pair(id, r, mm, &p).unwrap().1;
            let qr = (q(rho + h, m) - q(rho - h, m)) / (2.0 * h);
            let qm = (q(rho, m + h) - q(rho, m - h)) / (2.0 * h);
            // Df = [[0, 1], [p' - u^2, 2u]]
            assert_relative_eq!(qr, em * (dp - u * u), epsilon = 1e-7, max_relative = 1e-7);
            assert_relative_eq!(qm, er + em * 2.0 * u, epsilon = 1e-7, max_relative = 1e-7);
            let _ = pr(rho);
        }
    }

    #[test]
    fn relative_pairs_vanish_at_reference_and_link() {
        let p = PressureParams::singular(0.1, 2.0);
        let r = (0.45, 0.1);
        for id in PairId::all() {
            let (e, q) = relative_entropy_pair(id, r, r, &p).unwrap();
            assert!(e.abs() < 1e-15 && q.abs() < 1e-15);
        }
        assert_eq!(relative_entropy_pair(pid(1), (0.3, 0.2), r, &p).unwrap().0, 0.3 - 0.45);
        let s = (0.6, -0.05);
        for id in [pid(3), pid(4)] {
            let (et, qt) = relative_entropy_pair(id, s, r, &p).unwrap();
            let (e, q) = entropy_pair(id, s.0, s.1, &p).unwrap();
            let (eb, qb) = entropy_pair(id, r.0, r.1, &p).unwrap();
            let (gr, gm) = entropy_gradient(id, r.0, r.1, &p).unwrap();
            let f = |rho: f64, m: f64| (m, m * m / rho + eos::pressure_eulerian(rho, &p).unwrap());
            let (f1, f2) = f(s.0, s.1);
            let (g1, g2) = f(r.0, r.1);
            assert_relative_eq!(et, e - eb - gr * (s.0 - r.0) - gm * (s.1 - r.1), epsilon = 1e-12);
            assert_relative_eq!(qt, q - qb - gr * (f1 - g1) - gm * (f2 - g2), epsilon = 1e-12);
        }
    }

    #[test]
    fn taylor_orders() {
        let p = PressureParams::singular(0.1, 2.0);
        let o = taylor_expansion_residual(pid(3), (0.5, 0.0), 1e-2, Perturbation::Mixed, &p).unwrap();
        assert!((2.8..=3.2).contains(&o), "order {o}");
        let o = taylor_expansion_residual(pid(3), (0.5, 0.0), 1e-2, Perturbation::VelocityOnly, &p).unwrap();
        assert!(o >= 3.0, "order {o}");
        for dir in [Perturbation::Mixed, Perturbation::DensityOnly, Perturbation::VelocityOnly] {
            let o = taylor_expansion_residual(pid(4), (0.4, 0.3), 1e-2, dir, &p).unwrap();
            assert!(o >= 2.8, "order {o}");
        }
    }

    #[test]
    fn coefficient_examples() {
        let p = PressureParams::singular(0.1, 2.0);
        let r = coefficient_identities(0.5, &p).unwrap();
        assert_relative_eq!(r.c3_closed, 0.96, max_relative = 1e-14);
        assert_relative_eq!(r.set.c3, 0.96, max_relative = 1e-12);
        assert!(r.max_rel_error < 1e-10);
        let r3 = coefficient_identities(0.5, &PressureParams::singular(0.1, 3.0)).unwrap();
        assert_eq!(r3.c1_closed, 0.0);
        assert!(r3.max_rel_error < 1e-10);
    }

    #[test]
    fn eta3_hessian_positive() {
        let p = PressureParams::singular(0.02, 2.0);
        let h = 1e-4;
        for &(rho, m) in &[(0.2, 0.1), (0.7, -0.3), (0.9, 0.0)] {
            let e = |r: f64, mm: f64| entropy_pair(pid(3), r, mm, &p).unwrap().0;
            let err = (e(rho + h, m) - 2.0 * e(rho, m) + e(rho - h, m)) / (h * h);
            let emm = (e(rho, m + h) - 2.0 * e(rho, m) + e(rho, m - h)) / (h * h);
            let erm = (e(rho + h, m + h) - e(rho + h, m - h) - e(rho - h, m + h) + e(rho - h, m - h)) / (4.0 * h * h);
            assert!(err > 0.0 && err * emm - erm * erm > -1e-6);
        }
    }
}
