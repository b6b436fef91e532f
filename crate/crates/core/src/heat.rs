//! Exact heat flow on the box and whole-space radial oracles.
//!
//! Radial data are described by their Fourier transform
//! `û₀(ξ) = ∫ u₀(x) e^{-iξ·x} dx` as a function of `ρ = |ξ|`. Norms on
//! `ℝ³` carry the Plancherel factor `(2π)^{-3}`:
//! `‖e^{tΔ}u₀‖²_{Ḣ^ℓ} = (2π)^{-3} 4π ∫ ρ^{2ℓ+2} e^{-2tρ²} |û₀(ρ)|² dρ`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{block_norms, BlockNorms, NormSeries};
use crate::error::{Error, Result};
use crate::harness::{fit_power_law, theory_exponent, DecayReport};
use crate::littlewood_paley::{phi, DyadicPartition, SHELL_INNER, SHELL_OUTER};
use crate::numeric::rel_diff;
use crate::quadrature::{integrate_half_line, integrate_with_error};
use crate::spectral::{GridSpec, SpectrumField};

/// `4π / (2π)³`.
const SHELL_MEASURE: f64 = 1.0 / (2.0 * PI * PI);

/// Relative accuracy requested from the oracles.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// `c ↦ e^{-D t |k|²} c`.
pub fn heat_multiplier(f: &SpectrumField, t: f64, diffusivity: f64) -> SpectrumField {
    let g = *f.grid();
    let a = diffusivity * t;
    f.map_real(|i| (-a * g.k_squared(i)).exp())
}

/// Exact solution operator of `∂_t u = Δu`.
pub fn heat_evolve(f: &SpectrumField, t: f64) -> Result<SpectrumField> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(heat_multiplier(f, t, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    /// Piecewise power law; needs positive values.
    LogLog,
}

/// Radial Fourier transform `û₀(ρ)` of the initial datum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialProfile {
    /// `A e^{-w²ρ²/2}`: the transform of a Gaussian of width `w`.
    Gaussian { amplitude: f64, width: f64 },
    /// `A ρ^a e^{-w²ρ²/2}`.
    PowerGaussian {
        amplitude: f64,
        width: f64,
        power: f64,
    },
    /// Samples; zero beyond the last one and a power law below the first.
    Tabulated {
        rho: Vec<f64>,
        values: Vec<f64>,
        rule: Interpolation,
    },
}

impl RadialProfile {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self::Gaussian { amplitude, width }
    }

    pub fn tabulated(rho: Vec<f64>, values: Vec<f64>, rule: Interpolation) -> Result<Self> {
        let p = Self::Tabulated { rho, values, rule };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("radial profile: {m}")));
        match self {
            Self::Gaussian { amplitude, width } | Self::PowerGaussian { amplitude, width, .. } => {
                if !amplitude.is_finite() || !(width.is_finite() && *width > 0.0) {
                    return bad("amplitude must be finite and width positive");
                }
                if let Self::PowerGaussian { power, .. } = self {
                    if !power.is_finite() {
                        return bad("power must be finite");
                    }
                }
            }
            Self::Tabulated { rho, values, rule } => {
                if rho.len() < 2 || rho.len() != values.len() {
                    return bad("need at least two samples of equal length");
                }
                if rho[0] <= 0.0 || rho.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("samples must be positive and increasing");
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("values must be finite");
                }
                if *rule == Interpolation::LogLog && values.iter().any(|v| *v <= 0.0) {
                    return bad("log-log interpolation needs positive values");
                }
            }
        }
        Ok(())
    }

    /// True when tabulated samples span `[lo, hi]`; analytic profiles
    /// cover everything.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        match self {
            Self::Tabulated { rho, .. } => rho[0] <= lo && *rho.last().unwrap() >= hi,
            _ => true,
        }
    }

    /// Exponent `a` with `û₀(ρ) ~ ρ^a` as `ρ → 0`.
    pub fn low_exponent(&self) -> f64 {
        match self {
            Self::Gaussian { .. } => 0.0,
            Self::PowerGaussian { power, .. } => *power,
            Self::Tabulated { rho, values, .. } => {
                if values[0] > 0.0 && values[1] > 0.0 || values[0] < 0.0 && values[1] < 0.0 {
                    (values[1] / values[0]).ln() / (rho[1] / rho[0]).ln()
                } else {
                    0.0
                }
            }
        }
    }

    /// Endpoint `s = 3/2 + a` of the `Ḃ^{-s}_{2,1}` scale for this
    /// profile's low-frequency behaviour.
    pub fn effective_s(&self) -> f64 {
        1.5 + self.low_exponent()
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match self {
            Self::Gaussian { amplitude, width } => amplitude * (-0.5 * (width * rho).powi(2)).exp(),
            Self::PowerGaussian {
                amplitude,
                width,
                power,
            } => amplitude * rho.powf(*power) * (-0.5 * (width * rho).powi(2)).exp(),
            Self::Tabulated { rho: xs, values, rule } => {
                let n = xs.len();
                if rho > xs[n - 1] {
                    return 0.0;
                }
                if rho < xs[0] {
                    return values[0] * (rho / xs[0]).powf(self.low_exponent());
                }
                let i = xs.partition_point(|&x| x <= rho).clamp(1, n - 1);
                let (x0, x1, y0, y1) = (xs[i - 1], xs[i], values[i - 1], values[i]);
                match rule {
                    Interpolation::Linear => y0 + (y1 - y0) * (rho - x0) / (x1 - x0),
                    Interpolation::LogLog => {
                        let a = (y1 / y0).ln() / (x1 / x0).ln();
                        y0 * (rho / x0).powf(a)
                    }
                }
            }
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// `‖e^{tΔ}u₀‖_{Ḣ^ℓ(ℝ³)}` by adaptive quadrature.
pub fn radial_sobolev_oracle(prof: &RadialProfile, ell: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    prof.validate()?;
    let beta = 2.0 * ell + 2.0 + 2.0 * prof.low_exponent();
    let integrand = |r: f64| {
        let u = prof.eval(r);
        if u == 0.0 {
            0.0
        } else {
            r.powf(2.0 * ell + 2.0) * (-2.0 * t * r * r).exp() * u * u
        }
    };
    let i = integrate_half_line(integrand, beta, ORACLE_TOLERANCE)?;
    Ok((SHELL_MEASURE * i).sqrt())
}

/// `‖Δ_j e^{tΔ}u₀‖²_{L²(ℝ³)}` and its quadrature error estimate.
fn block_energy(prof: &RadialProfile, j: i32, t: f64, sharpness: f64) -> Result<(f64, f64)> {
    let s = 2f64.powi(j);
    let integrand = |r: f64| {
        let w = phi(r / s, sharpness);
        let u = prof.eval(r);
        w * w * r * r * (-2.0 * t * r * r).exp() * u * u
    };
    let (i, e) = integrate_with_error(integrand, SHELL_INNER * s, SHELL_OUTER * s, ORACLE_TOLERANCE, 0.0)?;
    Ok((SHELL_MEASURE * i.max(0.0), SHELL_MEASURE * e))
}

/// `‖Δ_j e^{tΔ}u₀‖_{L²(ℝ³)}`.
pub fn radial_block_norm(prof: &RadialProfile, j: i32, t: f64, sharpness: f64) -> Result<f64> {
    let (i, e) = block_energy(prof, j, t, sharpness)?;
    if e > 1e3 * ORACLE_TOLERANCE * i {
        return Err(Error::QuadratureFailed(e));
    }
    Ok(i.sqrt())
}

/// `Σ_j 2^{jℓ} ‖Δ_j e^{tΔ}u₀‖_{L²(ℝ³)}`. With `bands = Some((lo, hi))` the
/// sum is restricted to those blocks; otherwise it runs over all of `ℤ`,
/// closing the low-frequency tail as a geometric series.
///
/// Blocks are integrated to a relative tolerance; a block whose own
/// accuracy is poor is accepted when its error is negligible against the
/// whole sum.
pub fn radial_besov_oracle(
    prof: &RadialProfile,
    ell: f64,
    p: f64,
    t: f64,
    bands: Option<(i32, i32)>,
    sharpness: f64,
) -> Result<f64> {
    if p != 2.0 {
        return Err(Error::InvalidArgument(format!(
            "radial Besov oracle is exact only for p = 2, got {p}"
        )));
    }
    check_time(t)?;
    prof.validate()?;
    let mut err_bound = 0.0;
    let mut term = |j: i32| -> Result<f64> {
        let (i, e) = block_energy(prof, j, t, sharpness)?;
        let w = 2f64.powf(j as f64 * ell);
        // |√a − √b| ≤ √|a − b|
        err_bound += w * e.sqrt().min(e / (2.0 * i.sqrt()).max(f64::MIN_POSITIVE));
        Ok(w * i.sqrt())
    };
    let mut terms = Vec::new();
    if let Some((lo, hi)) = bands {
        for j in lo..=hi {
            terms.push(term(j)?);
        }
    } else {
        // low blocks scale like 2^{j(ℓ + 3/2 + a)} once e^{-2tρ²} ≈ 1
        let rate = ell + 1.5 + prof.low_exponent();
        if !(rate > 0.0) {
            return Err(Error::DivergentIntegrand(format!(
                "Ḃ^{ell}_{{2,1}} sum diverges at low frequency (rate {rate})"
            )));
        }
        const J_LO: i32 = -80;
        const J_HI: i32 = 120;
        let mut total = 0.0;
        let mut quiet = 0;
        for j in J_LO..J_HI {
            let v = term(j)?;
            terms.push(v);
            total += v;
            if total > 0.0 && v <= 1e-17 * total && j > 0 {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
            if j == J_HI - 1 && total > 0.0 {
                return Err(Error::DivergentIntegrand(
                    "Besov sum does not converge at high frequency".into(),
                ));
            }
        }
        let q = 2f64.powf(-rate);
        terms.push(terms[0] * q / (1.0 - q));
    }
    terms.sort_by(|a, b| a.total_cmp(b));
    let total = crate::numeric::compensated_sum(terms);
    if err_bound > 1e2 * ORACLE_TOLERANCE * total {
        return Err(Error::QuadratureFailed(err_bound));
    }
    Ok(total)
}

/// Samples the radial transform on the lattice: `c(m) = û₀(|k|) / L³`
/// inside the dealiased band, zero mode excluded.
pub fn profile_spectrum(grid: &GridSpec, prof: &RadialProfile) -> Result<SpectrumField> {
    prof.validate()?;
    let vol = grid.volume();
    let mut f = SpectrumField::zeros(*grid);
    for (i, c) in f.coeffs_mut().iter_mut().enumerate().skip(1) {
        if grid.in_dealias_band(i) {
            c.re = prof.eval(grid.k_magnitude(i)) / vol;
        }
    }
    Ok(f)
}

/// Prefactor `C = max_t v(t)(1+t)^{-e}` for the bound `v ≤ C(1+t)^e`, and
/// whether `v(t)(1+t)^{-e}` is non-increasing after its maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPrefactor {
    pub exponent: f64,
    pub prefactor: f64,
    pub argmax_time: f64,
    pub tail_nonincreasing: bool,
}

pub fn bound_prefactor(times: &[f64], values: &[f64], exponent: f64) -> BoundPrefactor {
    let scaled: Vec<f64> = times
        .iter()
        .zip(values)
        .map(|(t, v)| v * (1.0 + t).powf(-exponent))
        .collect();
    let (k, c) = scaled
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
    let tail_nonincreasing = scaled[k..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    BoundPrefactor {
        exponent,
        prefactor: c,
        argmax_time: times[k],
        tail_nonincreasing,
    }
}

/// Whole-space `Ḃ^ℓ_{2,1}` norm of the heat flow at each time.
pub fn oracle_decay_series(
    prof: &RadialProfile,
    ell: f64,
    times: &[f64],
    sharpness: f64,
) -> Result<Vec<f64>> {
    times
        .par_iter()
        .map(|&t| radial_besov_oracle(prof, ell, 2.0, t, None, sharpness))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatDecayConfig {
    pub ells: Vec<f64>,
    pub p: f64,
    pub times: Vec<f64>,
    /// Decay index `s` entering `-(ℓ+s)/2`.
    pub s: f64,
    /// Defaults to `[t_end/10, min(t_end, validity window)]`.
    pub fit_window: Option<(f64, f64)>,
    pub slope_tolerance: f64,
    /// Relative increase tolerated between consecutive samples.
    pub monotone_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub ell: f64,
    pub window: (f64, f64),
    pub max_rel_diff: f64,
    pub torus: Vec<f64>,
    pub oracle: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatDecayOutcome {
    pub times: Vec<f64>,
    pub p: f64,
    /// `Ḃ^ℓ_{p,1}` series per tracked `ℓ`.
    pub series: Vec<(f64, NormSeries)>,
    /// Largest relative increase between consecutive samples, any `ℓ`.
    pub monotone_violation: f64,
    pub monotone: bool,
    pub reports: Vec<DecayReport>,
    pub oracle: Vec<OracleComparison>,
    pub validity_window: f64,
    pub effective_s: Option<f64>,
    pub warnings: Vec<String>,
}

/// Evolves `initial` exactly to each time, tracks `‖u(t)‖_{Ḃ^ℓ_{p,1}}`,
/// checks monotonicity, fits decay slopes and, for `p = 2` with a radial
/// profile, compares against the whole-space oracle on the resolved bands.
pub fn heat_decay_experiment(
    part: &DyadicPartition,
    initial: &SpectrumField,
    cfg: &HeatDecayConfig,
    profile: Option<&RadialProfile>,
) -> Result<HeatDecayOutcome> {
    let times = &cfg.times;
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    for &t in times {
        check_time(t)?;
    }
    let grid = *part.grid();
    let validity = grid.validity_window();
    let t_end = *times.last().unwrap();
    let mut warnings = Vec::new();
    if t_end > validity {
        warnings.push(format!(
            "time grid reaches t = {t_end}, beyond the validity window {validity}"
        ));
    }

    let blocks: Vec<BlockNorms> = times
        .par_iter()
        .map(|&t| block_norms(part, &heat_evolve(initial, t)?, cfg.p))
        .collect::<Result<_>>()?;

    let mut series = Vec::new();
    let mut violation = 0.0_f64;
    for &ell in &cfg.ells {
        let per = part
            .resolved()
            .map(|j| (j, blocks.iter().map(|b| b.blocks[&j]).collect()))
            .collect();
        let agg: Vec<f64> = blocks.iter().map(|b| b.besov(ell, 1.0)).collect();
        for w in agg.windows(2) {
            if w[0] > 0.0 {
                violation = violation.max((w[1] - w[0]) / w[0]);
            }
        }
        series.push((ell, NormSeries::new(cfg.p, times.clone(), per, agg)?));
    }

    let window = cfg
        .fit_window
        .unwrap_or((t_end / 10.0, t_end.min(validity)));
    let mut reports = Vec::new();
    for (ell, s) in &series {
        match fit_power_law(times, &s.aggregate, window) {
            Ok(fit) => reports.push(DecayReport::new(
                format!("u:{ell}:{}:1", cfg.p),
                window,
                fit,
                theory_exponent(*ell, cfg.s, cfg.p, cfg.p),
                cfg.slope_tolerance,
                validity,
            )),
            Err(e) => warnings.push(format!("no fit for ℓ = {ell}: {e}")),
        }
    }

    let mut oracle = Vec::new();
    if let (Some(prof), true) = (profile, cfg.p == 2.0) {
        let bands = Some((part.j_min(), part.j_max()));
        let in_window: Vec<usize> = (0..times.len())
            .filter(|&i| times[i] >= window.0 && times[i] <= window.1)
            .collect();
        for (ell, s) in &series {
            let vals: Vec<f64> = in_window
                .par_iter()
                .map(|&i| radial_besov_oracle(prof, *ell, 2.0, times[i], bands, part.sharpness()))
                .collect::<Result<_>>()?;
            let torus: Vec<f64> = in_window.iter().map(|&i| s.aggregate[i]).collect();
            let max_rel_diff = torus
                .iter()
                .zip(&vals)
                .map(|(a, b)| rel_diff(*a, *b, f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            oracle.push(OracleComparison {
                ell: *ell,
                window,
                max_rel_diff,
                torus,
                oracle: vals,
            });
        }
    }

    Ok(HeatDecayOutcome {
        times: times.clone(),
        p: cfg.p,
        series,
        monotone_violation: violation,
        monotone: violation <= cfg.monotone_slack,
        reports,
        oracle,
        validity_window: validity,
        effective_s: profile.map(|p| p.effective_s()),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_spectrum, WhiteBand};
    use num_complex::Complex64;

    #[test]
    fn evolve_identity_single_mode_and_errors() {
        let g = GridSpec::new(16, 2.0 * PI).unwrap();
        let mut f = SpectrumField::zeros(g);
        f.set_mode_pair([1, 2, 2], Complex64::new(0.5, 0.25));
        assert_eq!(heat_evolve(&f, 0.0).unwrap(), f);
        let e = heat_evolve(&f, 0.1).unwrap();
        let expect = Complex64::new(0.5, 0.25) * (-0.9f64).exp();
        assert!((e.coeff([1, 2, 2]) - expect).norm() < 1e-15);
        assert!(matches!(heat_evolve(&f, -1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn semigroup_property() {
        let g = GridSpec::new(16, 2.0 * PI).unwrap();
        let f = random_spectrum(&g, &WhiteBand::new(-1, 1), 9).unwrap();
        let a = heat_evolve(&heat_evolve(&f, 0.03).unwrap(), 0.05).unwrap();
        let b = heat_evolve(&f, 0.08).unwrap();
        assert!(a.sub(&b).coeff_norm() <= 1e-13 * f.coeff_norm());
    }

    #[test]
    fn tabulated_profile_interpolation() {
        let p = RadialProfile::tabulated(
            vec![1.0, 2.0, 4.0],
            vec![1.0, 4.0, 16.0],
            Interpolation::LogLog,
        )
        .unwrap();
        assert!((p.eval(3.0) - 9.0).abs() < 1e-12);
        assert!((p.eval(0.5) - 0.25).abs() < 1e-12);
        assert_eq!(p.eval(5.0), 0.0);
        assert!((p.low_exponent() - 2.0).abs() < 1e-12);
        assert!(RadialProfile::tabulated(vec![1.0, 1.0], vec![1.0, 1.0], Interpolation::Linear).is_err());
    }

    #[test]
    fn zero_profile_oracles() {
        let p = RadialProfile::gaussian(0.0, 1.0);
        assert_eq!(radial_sobolev_oracle(&p, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(radial_besov_oracle(&p, 0.0, 2.0, 1.0, None, 1.0).unwrap(), 0.0);
        assert!(radial_besov_oracle(&p, 0.0, 3.0, 1.0, None, 1.0).is_err());
    }

    #[test]
    fn divergent_index_rejected() {
        let p = RadialProfile::gaussian(1.0, 1.0);
        assert!(matches!(
            radial_sobolev_oracle(&p, -1.6, 1.0),
            Err(Error::DivergentIntegrand(_))
        ));
        assert!(matches!(
            radial_besov_oracle(&p, -1.5, 2.0, 1.0, None, 1.0),
            Err(Error::DivergentIntegrand(_))
        ));
    }

    #[test]
    fn prefactor_of_exact_power() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (1.0 + t).powf(-1.0)).collect();
        let b = bound_prefactor(&t, &v, -0.9);
        assert!((b.prefactor - 3.0).abs() < 1e-14);
        assert!(b.tail_nonincreasing);
    }
}
