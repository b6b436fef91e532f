//! Seeded initial data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FluidState;
use crate::error::{Error, Result};
use crate::spectral::{
    forward_transform, leray_project, random_spectrum, GridSpec, ScalarField, SpectrumField,
    SpectrumLaw, VectorSpectrum,
};

/// Recipe for random band-limited data: a divergence-free velocity and
/// two charge perturbations on a common background.
#[derive(Clone, Copy, Debug)]
pub struct RandomInitialData<'a> {
    pub velocity_law: &'a dyn SpectrumLaw,
    pub charge_law: &'a dyn SpectrumLaw,
    /// Target `L²` norms of `u`, `v − mean`, `w − mean`.
    pub amplitudes: [f64; 3],
    /// Common background density of both species.
    pub background: f64,
}

pub fn random_state(grid: &GridSpec, recipe: &RandomInitialData<'_>, seed: u64) -> Result<FluidState> {
    let comps: Vec<SpectrumField> = (0..3)
        .map(|l| random_spectrum(grid, recipe.velocity_law, seed.wrapping_mul(7).wrapping_add(l)))
        .collect::<Result<_>>()?;
    let [a, b, c]: [SpectrumField; 3] = comps.try_into().expect("three components");
    let u = leray_project(&VectorSpectrum::new([a, b, c])?);
    let u = u.scaled(normalizer(u.l2_norm(), recipe.amplitudes[0]));
    let charge = |k: u64, amp: f64| -> Result<SpectrumField> {
        let f = random_spectrum(grid, recipe.charge_law, seed.wrapping_mul(7).wrapping_add(k))?;
        let mut f = f.scaled(normalizer(f.l2_norm(), amp));
        f.coeffs_mut()[0] = Complex64::new(recipe.background, 0.0);
        Ok(f)
    };
    let v = charge(3, recipe.amplitudes[1])?;
    let w = charge(4, recipe.amplitudes[2])?;
    FluidState::new(u, v, w, 0.0)
}

fn normalizer(x: f64, target: f64) -> f64 {
    if x > 0.0 {
        target / x
    } else {
        0.0
    }
}

/// Localized data: Gaussian blobs of a common width, with centres drawn
/// from the seed inside the middle half of the box. Means are removed, so
/// the state carries no background charge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBlobs {
    pub width: f64,
    /// Peak velocity before projection.
    pub velocity_amplitude: f64,
    /// Peak values of `v` and `w`.
    pub charge_amplitudes: [f64; 2],
}

fn blob(grid: &GridSpec, centre: [f64; 3], width: f64) -> Result<SpectrumField> {
    let l = grid.box_length();
    let f = ScalarField::from_fn(*grid, |x| {
        let r2: f64 = (0..3)
            .map(|i| {
                let d = (x[i] - centre[i]).rem_euclid(l);
                let d = d.min(l - d);
                d * d
            })
            .sum();
        (-0.5 * r2 / (width * width)).exp()
    })?;
    Ok(forward_transform(&f).dealiased().without_mean())
}

pub fn gaussian_blob_state(grid: &GridSpec, recipe: &GaussianBlobs, seed: u64) -> Result<FluidState> {
    if !(recipe.width > 0.0 && recipe.width.is_finite()) {
        return Err(Error::InvalidArgument(format!("blob width {}", recipe.width)));
    }
    let l = grid.box_length();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centre = || -> [f64; 3] { std::array::from_fn(|_| l * rng.gen_range(0.25..0.75)) };
    let comps: Vec<SpectrumField> = (0..3)
        .map(|_| Ok(blob(grid, centre(), recipe.width)?.scaled(recipe.velocity_amplitude)))
        .collect::<Result<_>>()?;
    let [a, b, c]: [SpectrumField; 3] = comps.try_into().expect("three components");
    let u = leray_project(&VectorSpectrum::new([a, b, c])?);
    let v = blob(grid, centre(), recipe.width)?.scaled(recipe.charge_amplitudes[0]);
    let w = blob(grid, centre(), recipe.width)?.scaled(recipe.charge_amplitudes[1]);
    FluidState::new(u, v, w, 0.0)
}
