//! Seeded random fields with a prescribed radial spectrum.
//!
//! Each law is a [`SpectrumLaw`] strategy; [`spectrum_law`] builds one
//! by name from a parameter map so that experiment configs can select it.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{inverse_transform, GridSpec, ScalarField, SpectrumField};
use crate::error::{Error, Result};

/// Radial envelope for the standard deviation of each Fourier coefficient.
pub trait SpectrumLaw: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Standard deviation of `c(m)` at wavenumber magnitude `k`.
    fn amplitude(&self, k: f64) -> f64;
}

/// Unit amplitude on the dyadic annuli `j1..=j2`:
/// `3/4 · 2^{j1} ≤ |k| ≤ 8/3 · 2^{j2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WhiteBand {
    pub j1: i32,
    pub j2: i32,
}

impl WhiteBand {
    pub fn new(j1: i32, j2: i32) -> Self {
        Self { j1, j2 }
    }
}

impl SpectrumLaw for WhiteBand {
    fn name(&self) -> &'static str {
        "white-band"
    }

    fn amplitude(&self, k: f64) -> f64 {
        let lo = 0.75 * 2f64.powi(self.j1);
        let hi = 8.0 / 3.0 * 2f64.powi(self.j2);
        if k >= lo && k <= hi {
            1.0
        } else {
            0.0
        }
    }
}

/// Per-mode variance `|k|^α` up to `k_cut`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub alpha: f64,
    pub k_cut: f64,
}

impl SpectrumLaw for PowerLaw {
    fn name(&self) -> &'static str {
        "power"
    }

    fn amplitude(&self, k: f64) -> f64 {
        if k > 0.0 && k <= self.k_cut {
            k.powf(0.5 * self.alpha)
        } else {
            0.0
        }
    }
}

/// Gaussian shell `exp(-(|k| - k0)² / (2 width²))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianBump {
    pub k0: f64,
    pub width: f64,
}

impl SpectrumLaw for GaussianBump {
    fn name(&self) -> &'static str {
        "gaussian-bump"
    }

    fn amplitude(&self, k: f64) -> f64 {
        let d = (k - self.k0) / self.width;
        let a = (-0.5 * d * d).exp();
        if a < 1e-300 {
            0.0
        } else {
            a
        }
    }
}

type LawBuilder = fn(&BTreeMap<String, f64>) -> Result<Box<dyn SpectrumLaw>>;

fn param(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::InvalidArgument(format!("missing spectrum parameter `{key}`")))
}

/// Registered spectrum laws, by config name.
pub const SPECTRUM_LAWS: &[(&str, LawBuilder)] = &[
    ("white-band", |p| {
        let j1 = param(p, "j1")?;
        let j2 = param(p, "j2")?;
        if j1.fract() != 0.0 || j2.fract() != 0.0 || j2 < j1 {
            return Err(Error::EmptyBand(format!("white-band({j1}, {j2})")));
        }
        Ok(Box::new(WhiteBand::new(j1 as i32, j2 as i32)))
    }),
    ("power", |p| {
        let k_cut = param(p, "k_cut")?;
        if !(k_cut > 0.0) {
            return Err(Error::EmptyBand(format!("power law with k_cut = {k_cut}")));
        }
        Ok(Box::new(PowerLaw {
            alpha: param(p, "alpha")?,
            k_cut,
        }))
    }),
    ("gaussian-bump", |p| {
        let width = param(p, "width")?;
        if !(width > 0.0) {
            return Err(Error::InvalidArgument(format!("bump width {width}")));
        }
        Ok(Box::new(GaussianBump {
            k0: param(p, "k0")?,
            width,
        }))
    }),
];

pub fn spectrum_law(name: &str, params: &BTreeMap<String, f64>) -> Result<Box<dyn SpectrumLaw>> {
    SPECTRUM_LAWS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
        .and_then(|(_, build)| build(params))
}

/// Mean-zero Hermitian spectrum confined to the dealiased band.
pub fn random_spectrum(
    grid: &GridSpec,
    law: &dyn SpectrumLaw,
    seed: u64,
) -> Result<SpectrumField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut populated = false;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for idx in 1..grid.len() {
        let cidx = grid.conj_index(idx);
        if cidx <= idx || !grid.in_dealias_band(idx) {
            continue;
        }
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let a = law.amplitude(grid.k_magnitude(idx));
        if a == 0.0 {
            continue;
        }
        populated = true;
        let c = Complex64::new(re * s * a, im * s * a);
        coeffs[idx] = c;
        coeffs[cidx] = c.conj();
    }
    if !populated {
        return Err(Error::EmptyBand(format!(
            "{} law has no modes on this grid",
            law.name()
        )));
    }
    Ok(SpectrumField::from_raw(*grid, coeffs))
}

pub fn random_field(grid: &GridSpec, law: &dyn SpectrumLaw, seed: u64) -> Result<ScalarField> {
    inverse_transform(&random_spectrum(grid, law, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn deterministic_per_seed() {
        let g = GridSpec::new(16, 2.0 * PI).unwrap();
        let law = WhiteBand::new(0, 2);
        let a = random_field(&g, &law, 42).unwrap();
        let b = random_field(&g, &law, 42).unwrap();
        assert_eq!(a.samples(), b.samples());
        let c = random_field(&g, &law, 43).unwrap();
        assert_ne!(a.samples(), c.samples());
        assert!(a.mean().abs() < 1e-14);
    }

    #[test]
    fn white_band_support() {
        let g = GridSpec::new(32, 2.0 * PI).unwrap();
        let s = random_spectrum(&g, &WhiteBand::new(2, 2), 1).unwrap();
        assert!(s.hermitian_defect() == 0.0);
        for (i, c) in s.coeffs().iter().enumerate() {
            if c.norm() > 0.0 {
                let k = g.k_magnitude(i);
                assert!((3.0..=32.0 / 3.0).contains(&k), "{k}");
            }
        }
    }

    #[test]
    fn empty_band_is_an_error() {
        let g = GridSpec::new(16, 2.0 * PI).unwrap();
        let err = random_spectrum(&g, &WhiteBand::new(8, 9), 0).unwrap_err();
        assert!(matches!(err, Error::EmptyBand(_)));
        let mut p = BTreeMap::new();
        p.insert("j1".to_string(), 3.0);
        p.insert("j2".to_string(), 1.0);
        assert!(spectrum_law("white-band", &p).is_err());
        assert!(matches!(
            spectrum_law("pink", &p),
            Err(Error::UnknownStrategy(_))
        ));
    }

    #[test]
    fn power_law_shell_slope() {
        // shell-binning oracle: average |c|² per integer shell, fit log-log
        let g = GridSpec::new(64, 2.0 * PI).unwrap();
        let alpha = -3.0;
        let s = random_spectrum(&g, &PowerLaw { alpha, k_cut: 20.0 }, 5).unwrap();
        let mut sum = vec![0.0; 22];
        let mut cnt = vec![0usize; 22];
        for (i, c) in s.coeffs().iter().enumerate() {
            let k = g.k_magnitude(i);
            let b = k.round() as usize;
            if (2..=20).contains(&b) && g.in_dealias_band(i) {
                sum[b] += c.norm_sqr();
                cnt[b] += 1;
            }
        }
        let pts: Vec<(f64, f64)> = (2..=20)
            .filter(|&b| cnt[b] > 0)
            .map(|b| ((b as f64).ln(), (sum[b] / cnt[b] as f64).ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope - alpha).abs() <= 0.1 * alpha.abs(), "slope {slope}");
    }

    #[test]
    fn registry_builds_every_law() {
        let mut p = BTreeMap::new();
        for (k, v) in [
            ("j1", 0.0),
            ("j2", 1.0),
            ("alpha", -2.0),
            ("k_cut", 4.0),
            ("k0", 2.0),
            ("width", 0.5),
        ] {
            p.insert(k.to_string(), v);
        }
        for (name, _) in SPECTRUM_LAWS {
            let law = spectrum_law(name, &p).unwrap();
            assert_eq!(law.name(), *name);
        }
    }
}
