//! Periodic-box fields, Fourier transforms, differential operators, the
//! Leray projector and rectangle-rule `L^p` quadrature.
//!
//! Fourier convention: `f(x) = Σ_m c(m) e^{i k·x}` with `k = (2π/L) m` and
//! `m ∈ [-n/2, n/2)³`. Coefficients are stored in FFT order, row-major in
//! `(i0, i1, i2)`, where index `i` holds lattice value `i` for `i < n/2`
//! and `i - n` otherwise.
//!
//! Odd-order derivative multipliers vanish on the Nyquist planes
//! (`m_ℓ = -n/2`), since `i k c` is not representable there for a real
//! field. Every field produced by [`random_spectrum`] lies inside the
//! dealiased band and carries no Nyquist content.

pub(crate) mod fft;
mod random;
mod scaling;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use fft::Direction;

pub use random::{
    random_field, random_spectrum, spectrum_law, GaussianBump, PowerLaw, SpectrumLaw, WhiteBand,
    SPECTRUM_LAWS,
};
pub use scaling::{periodic_cell_view, scale_field_dyadic};

/// Hermitian defect tolerated by [`inverse_transform`], relative to the
/// largest coefficient.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Cubic periodic grid with `n` samples per axis on a box of side `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    box_length: f64,
}

impl GridSpec {
    pub fn new(n_per_axis: usize, box_length: f64) -> Result<Self> {
        if n_per_axis < 8 || !n_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_per_axis = {n_per_axis} must be a power of two >= 8"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box_length = {box_length} must be positive"
            )));
        }
        Ok(Self {
            n: n_per_axis,
            box_length,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Number of samples, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing in frequency space, `2π/L`.
    pub fn unit(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    pub fn nyquist(&self) -> f64 {
        self.unit() * (self.n / 2) as f64
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    /// Lattice integer held by FFT index `i`.
    #[inline]
    pub fn lattice(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Largest per-axis lattice index kept by the 2/3 rule: `K < n/3`.
    pub fn dealias_index(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    /// Radius of the ball inscribed in the dealiased cube.
    pub fn dealias_radius(&self) -> f64 {
        self.unit() * self.dealias_index() as f64
    }

    #[inline]
    pub fn split(&self, idx: usize) -> [usize; 3] {
        // n is a power of two
        let b = self.n.trailing_zeros();
        let mask = self.n - 1;
        [idx >> (2 * b), (idx >> b) & mask, idx & mask]
    }

    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let [a, b, c] = self.split(idx);
        [self.lattice(a), self.lattice(b), self.lattice(c)]
    }

    /// Storage index of lattice vector `m`, or `None` outside `[-n/2, n/2)³`.
    pub fn index_of(&self, m: [i64; 3]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut idx = 0usize;
        for &c in &m {
            if c < -half || c >= half {
                return None;
            }
            let i = if c < 0 { c + self.n as i64 } else { c } as usize;
            idx = idx * self.n + i;
        }
        Some(idx)
    }

    /// Index of `-m` (modulo `n`).
    #[inline]
    pub fn conj_index(&self, idx: usize) -> usize {
        let n = self.n;
        let bits = n.trailing_zeros();
        let mask = n - 1;
        let [a, b, c] = self.split(idx);
        ((((n - a) & mask) << bits | ((n - b) & mask)) << bits) | ((n - c) & mask)
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let u = self.unit();
        let m = self.mode(idx);
        [u * m[0] as f64, u * m[1] as f64, u * m[2] as f64]
    }

    /// Wavevector used by first-order derivatives; Nyquist components are 0.
    pub fn derivative_wavevector(&self, idx: usize) -> [f64; 3] {
        let half = -((self.n / 2) as i64);
        let u = self.unit();
        let m = self.mode(idx);
        let d = |c: i64| if c == half { 0.0 } else { u * c as f64 };
        [d(m[0]), d(m[1]), d(m[2])]
    }

    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let k = self.wavevector(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    #[inline]
    pub fn k_magnitude(&self, idx: usize) -> f64 {
        self.k_squared(idx).sqrt()
    }

    /// True when every component satisfies `|m_ℓ| ≤ K`.
    pub fn in_dealias_band(&self, idx: usize) -> bool {
        let k = self.dealias_index();
        self.mode(idx).iter().all(|c| c.abs() <= k)
    }

    /// Physical coordinate of sample `idx`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let [a, b, c] = self.split(idx);
        [a as f64 * h, b as f64 * h, c as f64 * h]
    }

    /// Validity window `(L/8)² / 4`: heat-kernel width `√(4t)` reaching `L/8`.
    pub fn validity_window(&self) -> f64 {
        (self.box_length / 8.0).powi(2) / 4.0
    }
}

/// Real samples on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    samples: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn from_raw(grid: GridSpec, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self { grid, samples }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_raw(grid, vec![0.0; grid.len()])
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let samples = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.samples.iter().copied()) / self.grid.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Fourier coefficients of a real field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectrumField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, coeffs })
    }

    pub(crate) fn from_raw(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at lattice vector `m` (taken modulo `n`).
    pub fn coeff(&self, m: [i64; 3]) -> Complex64 {
        let n = self.grid.n as i64;
        let w = |c: i64| c.rem_euclid(n) as usize;
        let idx = (w(m[0]) * self.grid.n + w(m[1])) * self.grid.n + w(m[2]);
        self.coeffs[idx]
    }

    /// Sets `c` at `m` and `conj(c)` at `-m`.
    pub fn set_mode_pair(&mut self, m: [i64; 3], c: Complex64) {
        let n = self.grid.n as i64;
        let w = |c: i64| c.rem_euclid(n) as usize;
        let idx = (w(m[0]) * self.grid.n + w(m[1])) * self.grid.n + w(m[2]);
        let cidx = self.grid.conj_index(idx);
        self.coeffs[idx] = c;
        self.coeffs[cidx] = c.conj();
        if idx == cidx {
            self.coeffs[idx] = Complex64::new(c.re, 0.0);
        }
    }

    /// Real part of the zero mode: the spatial mean.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// `max_m |c(m) - conj(c(-m))|` relative to `max |c|`.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for (i, c) in self.coeffs.iter().enumerate() {
            let d = (c - self.coeffs[self.grid.conj_index(i)].conj()).norm();
            worst = worst.max(d);
        }
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `(Σ |c|²)^{1/2}`.
    pub fn coeff_norm(&self) -> f64 {
        compensated_sum(self.coeffs.iter().map(|c| c.norm_sqr())).sqrt()
    }

    /// Physical `L²` norm by Parseval, `(L³ Σ |c|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.grid.volume().sqrt() * self.coeff_norm()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_raw(self.grid, self.coeffs.iter().map(|c| c * a).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub(crate) fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self::from_raw(
            self.grid,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        )
    }

    /// Multiplies each coefficient by a real multiplier of the storage index.
    pub fn map_real(&self, mult: impl Fn(usize) -> f64) -> Self {
        Self::from_raw(
            self.grid,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * mult(i))
                .collect(),
        )
    }

    /// Zeroes every mode outside the 2/3-rule cube.
    pub fn dealiased(&self) -> Self {
        let g = self.grid;
        self.map_real(|i| if g.in_dealias_band(i) { 1.0 } else { 0.0 })
    }

    /// True when all energy sits inside the 2/3-rule cube (up to roundoff).
    pub fn is_alias_free(&self) -> bool {
        self.band_excess(|i| self.grid.in_dealias_band(i)) <= 1e-14
    }

    /// Largest coefficient magnitude outside `inside`, relative to `max |c|`.
    pub(crate) fn band_excess(&self, inside: impl Fn(usize) -> bool) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| !inside(*i))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Largest `|k|` carrying a coefficient above `rel · max|c|`.
    pub fn spectral_radius(&self, rel: f64) -> f64 {
        let thr = rel * self.max_abs();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > thr)
            .map(|(i, _)| self.grid.k_magnitude(i))
            .fold(0.0, f64::max)
    }
}

/// Vector of three physical fields on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField3 {
    components: [ScalarField; 3],
}

impl VectorField3 {
    pub fn new(components: [ScalarField; 3]) -> Result<Self> {
        let g = *components[0].grid();
        if components.iter().any(|c| *c.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { components })
    }

    pub fn grid(&self) -> &GridSpec {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn component(&self, l: usize) -> &ScalarField {
        &self.components[l]
    }
}

/// Spectral form of a vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSpectrum {
    components: [SpectrumField; 3],
}

impl VectorSpectrum {
    pub fn new(components: [SpectrumField; 3]) -> Result<Self> {
        let g = *components[0].grid();
        if components.iter().any(|c| *c.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { components })
    }

    pub(crate) fn from_raw(components: [SpectrumField; 3]) -> Self {
        Self { components }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_raw([
            SpectrumField::zeros(grid),
            SpectrumField::zeros(grid),
            SpectrumField::zeros(grid),
        ])
    }

    pub fn grid(&self) -> &GridSpec {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[SpectrumField; 3] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [SpectrumField; 3] {
        &mut self.components
    }

    pub fn component(&self, l: usize) -> &SpectrumField {
        &self.components[l]
    }

    pub fn into_components(self) -> [SpectrumField; 3] {
        self.components
    }

    pub fn map(&self, f: impl Fn(&SpectrumField) -> SpectrumField) -> Self {
        Self::from_raw([
            f(&self.components[0]),
            f(&self.components[1]),
            f(&self.components[2]),
        ])
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_raw(std::array::from_fn(|l| {
            self.components[l].add(&other.components[l])
        }))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_raw(std::array::from_fn(|l| {
            self.components[l].sub(&other.components[l])
        }))
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|c| c.scaled(a))
    }

    /// `(Σ_ℓ ‖V_ℓ‖²_{L²})^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

// ---------------------------------------------------------------------------
// transforms

pub fn forward_transform(f: &ScalarField) -> SpectrumField {
    forward_real(f.grid, &f.samples)
}

/// Inverse transform; rejects spectra whose Hermitian defect exceeds
/// [`HERMITIAN_TOLERANCE`].
pub fn inverse_transform(f: &SpectrumField) -> Result<ScalarField> {
    let defect = f.hermitian_defect();
    if defect > HERMITIAN_TOLERANCE {
        return Err(Error::NonRealSpectrum { defect });
    }
    Ok(ScalarField::from_raw(f.grid, inverse_real(f)))
}

pub fn forward_vector(v: &VectorField3) -> VectorSpectrum {
    let g = *v.grid();
    let (a, b) = forward_pair(g, v.components[0].samples(), v.components[1].samples());
    let c = forward_real(g, v.components[2].samples());
    VectorSpectrum::from_raw([a, b, c])
}

pub fn inverse_vector(v: &VectorSpectrum) -> Result<VectorField3> {
    let g = *v.grid();
    for c in &v.components {
        let defect = c.hermitian_defect();
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::NonRealSpectrum { defect });
        }
    }
    let (a, b) = inverse_pair(&v.components[0], &v.components[1]);
    let c = inverse_real(&v.components[2]);
    Ok(VectorField3 {
        components: [
            ScalarField::from_raw(g, a),
            ScalarField::from_raw(g, b),
            ScalarField::from_raw(g, c),
        ],
    })
}

pub(crate) fn forward_real(grid: GridSpec, samples: &[f64]) -> SpectrumField {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft::plan(grid.n).process(&mut buf, Direction::Forward);
    let scale = 1.0 / grid.len() as f64;
    let coeffs = (0..buf.len())
        .map(|i| (buf[i] + buf[grid.conj_index(i)].conj()) * (0.5 * scale))
        .collect();
    SpectrumField::from_raw(grid, coeffs)
}

/// Two real fields through one complex transform.
pub(crate) fn forward_pair(grid: GridSpec, a: &[f64], b: &[f64]) -> (SpectrumField, SpectrumField) {
    let mut buf: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    fft::plan(grid.n).process(&mut buf, Direction::Forward);
    let scale = 0.5 / grid.len() as f64;
    let mut fa = Vec::with_capacity(buf.len());
    let mut fb = Vec::with_capacity(buf.len());
    for i in 0..buf.len() {
        let z = buf[i];
        let zc = buf[grid.conj_index(i)].conj();
        fa.push((z + zc) * scale);
        let d = (z - zc) * scale;
        fb.push(Complex64::new(d.im, -d.re));
    }
    (
        SpectrumField::from_raw(grid, fa),
        SpectrumField::from_raw(grid, fb),
    )
}

pub(crate) fn inverse_real(f: &SpectrumField) -> Vec<f64> {
    let mut buf = f.coeffs.clone();
    fft::plan(f.grid.n).process(&mut buf, Direction::Inverse);
    buf.into_iter().map(|z| z.re).collect()
}

/// Two Hermitian spectra through one complex transform.
pub(crate) fn inverse_pair(a: &SpectrumField, b: &SpectrumField) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.grid, b.grid);
    let mut buf: Vec<Complex64> = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| x + Complex64::new(-y.im, y.re))
        .collect();
    fft::plan(a.grid.n).process(&mut buf, Direction::Inverse);
    buf.into_iter().map(|z| (z.re, z.im)).unzip()
}

/// Inverse transforms of a list of spectra, paired two at a time.
pub(crate) fn inverse_many(fields: &[&SpectrumField]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    let mut chunks = fields.chunks_exact(2);
    for pair in &mut chunks {
        let (a, b) = inverse_pair(pair[0], pair[1]);
        out.push(a);
        out.push(b);
    }
    if let [last] = chunks.remainder() {
        out.push(inverse_real(last));
    }
    out
}

/// Forward transforms of a list of real sample arrays, paired two at a time.
pub(crate) fn forward_many(grid: GridSpec, fields: &[&[f64]]) -> Vec<SpectrumField> {
    let mut out = Vec::with_capacity(fields.len());
    let mut chunks = fields.chunks_exact(2);
    for pair in &mut chunks {
        let (a, b) = forward_pair(grid, pair[0], pair[1]);
        out.push(a);
        out.push(b);
    }
    if let [last] = chunks.remainder() {
        out.push(forward_real(grid, last));
    }
    out
}

// ---------------------------------------------------------------------------
// differential operators

/// `∂_ℓ` applied spectrally: multiplier `i k_ℓ`.
pub fn partial(f: &SpectrumField, axis: usize) -> SpectrumField {
    let g = f.grid;
    SpectrumField::from_raw(
        g,
        f.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = g.derivative_wavevector(i)[axis];
                Complex64::new(-k * c.im, k * c.re)
            })
            .collect(),
    )
}

pub fn gradient(f: &SpectrumField) -> VectorSpectrum {
    VectorSpectrum::from_raw(std::array::from_fn(|l| partial(f, l)))
}

pub fn divergence(v: &VectorSpectrum) -> SpectrumField {
    let g = *v.grid();
    let [a, b, c] = &v.components;
    SpectrumField::from_raw(
        g,
        (0..g.len())
            .map(|i| {
                let k = g.derivative_wavevector(i);
                let s = a.coeffs[i] * k[0] + b.coeffs[i] * k[1] + c.coeffs[i] * k[2];
                Complex64::new(-s.im, s.re)
            })
            .collect(),
    )
}

pub fn laplacian(f: &SpectrumField) -> SpectrumField {
    let g = f.grid;
    f.map_real(|i| -g.k_squared(i))
}

/// `Δ^{-1}` with the zero mode set to zero. Fails when the source has a
/// mean above `1e-12 ‖F‖`.
pub fn inverse_laplacian(f: &SpectrumField) -> Result<SpectrumField> {
    let c0 = f.coeffs[0].norm();
    if c0 > 1e-12 * f.coeff_norm() {
        return Err(Error::NonzeroMeanSource(c0));
    }
    Ok(inverse_laplacian_gauged(f))
}

/// `Δ^{-1}` ignoring the zero mode.
pub(crate) fn inverse_laplacian_gauged(f: &SpectrumField) -> SpectrumField {
    let g = f.grid;
    f.map_real(|i| if i == 0 { 0.0 } else { -1.0 / g.k_squared(i) })
}

/// `(-Δ)^{-1}` with zero-mode gauge.
pub(crate) fn inverse_neg_laplacian(f: &SpectrumField) -> SpectrumField {
    let g = f.grid;
    f.map_real(|i| if i == 0 { 0.0 } else { 1.0 / g.k_squared(i) })
}

/// Projector `I - k̃k̃ᵀ/|k̃|²` onto divergence-free fields, where `k̃` is
/// the derivative wavevector. The zero mode passes through.
pub fn leray_project(v: &VectorSpectrum) -> VectorSpectrum {
    let g = *v.grid();
    let [a, b, c] = &v.components;
    let mut out = [
        Vec::with_capacity(g.len()),
        Vec::with_capacity(g.len()),
        Vec::with_capacity(g.len()),
    ];
    for i in 0..g.len() {
        let k = g.derivative_wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let vv = [a.coeffs[i], b.coeffs[i], c.coeffs[i]];
        if k2 == 0.0 {
            for l in 0..3 {
                out[l].push(vv[l]);
            }
            continue;
        }
        let dot = (vv[0] * k[0] + vv[1] * k[1] + vv[2] * k[2]) / k2;
        for l in 0..3 {
            out[l].push(vv[l] - dot * k[l]);
        }
    }
    let [x, y, z] = out;
    VectorSpectrum::from_raw([
        SpectrumField::from_raw(g, x),
        SpectrumField::from_raw(g, y),
        SpectrumField::from_raw(g, z),
    ])
}

// ---------------------------------------------------------------------------
// quadrature and products

/// Rectangle-rule `L^p` norm; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    lp_norm_samples(&f.grid, &f.samples, p)
}

pub(crate) fn lp_norm_samples(grid: &GridSpec, samples: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(samples.iter().map(|x| x.abs()).fold(0.0, f64::max));
    }
    let dv = grid.cell_volume();
    let sum = if p == 2.0 {
        compensated_sum(samples.iter().map(|x| x * x))
    } else if p == 1.0 {
        compensated_sum(samples.iter().map(|x| x.abs()))
    } else {
        // factor out the max to keep |x|^p in range
        let scale = samples.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(0.0);
        }
        let s = compensated_sum(samples.iter().map(|x| (x.abs() / scale).powf(p)));
        return Ok(scale * (dv * s).powf(1.0 / p));
    };
    Ok((dv * sum).powf(1.0 / p))
}

/// Physical-space product of two spectra, truncated by the 2/3 rule.
/// Exact (up to roundoff) when both inputs lie in the dealiased band.
pub fn dealiased_product(f: &SpectrumField, g: &SpectrumField) -> SpectrumField {
    assert_eq!(f.grid, g.grid, "grid mismatch");
    if f.max_abs() == 0.0 || g.max_abs() == 0.0 {
        return SpectrumField::zeros(f.grid);
    }
    let (a, b) = inverse_pair(f, g);
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    forward_real(f.grid, &prod).dealiased()
}

/// Inner product `Σ_m c_f(m) conj(c_g(m))` scaled by `L³`: the `L²`
/// pairing of two real fields.
pub fn l2_inner(f: &SpectrumField, g: &SpectrumField) -> f64 {
    assert_eq!(f.grid, g.grid, "grid mismatch");
    f.grid.volume()
        * compensated_sum(
            f.coeffs
                .iter()
                .zip(&g.coeffs)
                .map(|(a, b)| (a * b.conj()).re),
        )
}
