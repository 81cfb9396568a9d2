//! Log-log least-squares fits of scaling exponents.

use serde::Serialize;

use crate::error::{Error, Result};

/// Result of an ordinary least-squares fit of `log y` against `log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits `log y = slope log x + intercept`.
pub fn scaling_fit(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    let n = xs.len().min(ys.len());
    if n < 3 {
        return Err(Error::FitTooFewPoints(n));
    }
    if let Some(&bad) = xs[..n].iter().chain(&ys[..n]).find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::FitNonPositive(bad));
    }
    let lx: Vec<f64> = xs[..n].iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys[..n].iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("fit requires distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= 1e-300 {
        1.0
    } else {
        let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        }).sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ScalingFit { slope, intercept, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let f = scaling_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_data() {
        let f = scaling_fit(&[0.1, 0.01, 0.001], &[3.0, 3.0, 3.0]).unwrap();
        assert!(f.slope.abs() < 1e-12);
    }

    #[test]
    fn noisy_square_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..12).map(|k| 10f64.powf(-(k as f64) / 3.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sqrt() * (1.0 + 0.01 * rng.gen_range(-1.0..1.0))).collect();
        let f = scaling_fit(&xs, &ys).unwrap();
        assert!((0.45..=0.55).contains(&f.slope));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert_eq!(scaling_fit(&[1.0], &[1.0]), Err(Error::FitTooFewPoints(1)));
        assert!(matches!(scaling_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]), Err(Error::FitNonPositive(_))));
    }
}
