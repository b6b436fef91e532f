//! Power-law fits in `1 + t` and the per-quantity decay verdict.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub stderr: f64,
    /// `ln C` in `v ≈ C (1+t)^slope`.
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub samples: usize,
}

/// Least squares of `ln v` against `ln(1+t)` over samples with
/// `t ∈ [window.0, window.1]`.
pub fn fit_power_law(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<PowerLawFit> {
    if times.len() != values.len() {
        return Err(Error::InvalidArgument(
            "times and values differ in length".into(),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::CannotFitLog(format!("value {v} at t = {t}")));
        }
        xs.push((1.0 + t).ln());
        ys.push(v.ln());
    }
    let n = xs.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "fit window [{}, {}] holds {n} samples, need {MIN_FIT_SAMPLES}",
            window.0, window.1
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit window has a single time".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(PowerLawFit {
        slope,
        stderr: (ssr / (nf - 2.0) / sxx).sqrt(),
        intercept,
        residual: (ssr / nf).sqrt(),
        samples: n,
    })
}

/// Decay exponent `-(ℓ+s)/2 - (3/2)(1/r - 1/p)`; the shift vanishes for
/// `r = p`.
pub fn theory_exponent(ell: f64, s: f64, r: f64, p: f64) -> f64 {
    -(ell + s) / 2.0 - 1.5 * (1.0 / r - 1.0 / p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub quantity: String,
    pub window: (f64, f64),
    pub fit: PowerLawFit,
    pub theory: f64,
    pub tolerance: f64,
    /// Torus validity window `(L/8)²/4`.
    pub validity_window: f64,
    pub within_validity: bool,
    pub pass: bool,
}

impl DecayReport {
    pub fn new(
        quantity: impl Into<String>,
        window: (f64, f64),
        fit: PowerLawFit,
        theory: f64,
        tolerance: f64,
        validity_window: f64,
    ) -> Self {
        let within_validity = window.1 <= validity_window * (1.0 + 1e-12);
        let pass = (fit.slope - theory).abs() <= tolerance && within_validity;
        Self {
            quantity: quantity.into(),
            window,
            fit,
            theory,
            tolerance,
            validity_window,
            within_validity,
            pass,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 5.0).collect();
        let v: Vec<f64> = t.iter().map(|t| 7.0 * (1.0 + t).powf(-0.75)).collect();
        let f = fit_power_law(&t, &v, (0.0, 100.0)).unwrap();
        assert!((f.slope + 0.75).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_and_errors() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let f = fit_power_law(&t, &[3.0; 10], (0.0, 10.0)).unwrap();
        assert!(f.slope.abs() < 1e-14);
        let mut bad = vec![1.0; 10];
        bad[4] = 0.0;
        assert!(matches!(
            fit_power_law(&t, &bad, (0.0, 10.0)),
            Err(Error::CannotFitLog(_))
        ));
        assert!(fit_power_law(&t, &[1.0; 10], (0.0, 3.0)).is_err());
    }

    #[test]
    fn verdict_needs_validity() {
        let fit = PowerLawFit {
            slope: -0.75,
            stderr: 0.0,
            intercept: 0.0,
            residual: 0.0,
            samples: 10,
        };
        assert!(DecayReport::new("x", (1.0, 10.0), fit, -0.75, 0.01, 20.0).pass);
        assert!(!DecayReport::new("x", (1.0, 30.0), fit, -0.75, 0.01, 20.0).pass);
        assert_eq!(theory_exponent(0.0, 1.5, 2.0, 2.0), -0.75);
    }
}
