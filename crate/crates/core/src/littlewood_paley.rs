//! Homogeneous Littlewood–Paley decomposition on the periodic lattice.
//!
//! The cutoff `χ` is the classical C^∞ step
//! `χ(ρ) = g(4/3-ρ) / (g(4/3-ρ) + g(ρ-3/4))`, `g(t) = exp(-1/(σt))` for
//! `t > 0`, and the bump is `φ(ρ) = χ(ρ/2) - χ(ρ)`, supported in
//! `[3/4, 8/3]`. Block `Δ_j` multiplies mode `k` by `φ(2^{-j}|k|)`.
//!
//! A nonzero mode meets at most two adjacent blocks, so the partition
//! precomputes, per mode, the lower block index and both weights.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{
    forward_real, gradient, inverse_pair, inverse_real, lp_norm_samples,
    GridSpec, SpectrumField,
};

pub const SHELL_INNER: f64 = 3.0 / 4.0;
pub const SHELL_OUTER: f64 = 8.0 / 3.0;
/// Cutoff transition: `χ = 1` below, `χ = 0` above.
pub const CUTOFF_INNER: f64 = 3.0 / 4.0;
pub const CUTOFF_OUTER: f64 = 4.0 / 3.0;

/// Classical step profile (`sharpness = 1`).
pub const CLASSICAL_SHARPNESS: f64 = 1.0;

#[inline]
fn smooth_ramp(t: f64, sharpness: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / (sharpness * t)).exp()
    } else {
        0.0
    }
}

/// Radial cutoff `χ(ρ)`.
pub fn chi(rho: f64, sharpness: f64) -> f64 {
    if rho <= CUTOFF_INNER {
        1.0
    } else if rho >= CUTOFF_OUTER {
        0.0
    } else {
        let a = smooth_ramp(CUTOFF_OUTER - rho, sharpness);
        let b = smooth_ramp(rho - CUTOFF_INNER, sharpness);
        a / (a + b)
    }
}

/// Radial bump `φ(ρ) = χ(ρ/2) - χ(ρ)`.
pub fn phi(rho: f64, sharpness: f64) -> f64 {
    chi(0.5 * rho, sharpness) - chi(rho, sharpness)
}

#[derive(Debug)]
struct BlockTable {
    j_lo: Vec<i32>,
    w_lo: Vec<f64>,
    w_hi: Vec<f64>,
}

/// Dyadic partition of unity bound to one grid.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: GridSpec,
    sharpness: f64,
    j_min: i32,
    j_max: i32,
    j_top: i32,
    table: Arc<BlockTable>,
}

impl PartialEq for DyadicPartition {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.sharpness == other.sharpness
    }
}

/// Builds the partition for `grid`. `j_min` is the lowest block meeting the
/// nonzero lattice, `j_max` the highest block whose shell fits inside the
/// dealiased ball. At least three resolved bands are required.
pub fn build_partition(grid: &GridSpec, sharpness: Option<f64>) -> Result<DyadicPartition> {
    let sharpness = sharpness.unwrap_or(CLASSICAL_SHARPNESS);
    if !(sharpness.is_finite() && sharpness > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "transition sharpness {sharpness}"
        )));
    }
    let unit = grid.unit();
    let shell_hi = |j: i32| SHELL_OUTER * 2f64.powi(j);
    let shell_lo = |j: i32| SHELL_INNER * 2f64.powi(j);

    let mut j_min = (unit / SHELL_OUTER).log2().floor() as i32 - 1;
    while shell_hi(j_min) <= unit {
        j_min += 1;
    }
    let radius = grid.dealias_radius();
    let mut j_max = (radius / SHELL_OUTER).log2().floor() as i32 + 1;
    while shell_hi(j_max) > radius {
        j_max -= 1;
    }
    let k_corner = unit * (grid.n() / 2) as f64 * 3f64.sqrt();
    let mut j_top = (k_corner / SHELL_INNER).log2().floor() as i32 + 1;
    while shell_lo(j_top) >= k_corner {
        j_top -= 1;
    }
    let bands = j_max - j_min + 1;
    if bands < 3 {
        return Err(Error::InsufficientResolution { bands });
    }

    let len = grid.len();
    let mut j_lo = vec![i32::MIN; len];
    let mut w_lo = vec![0.0; len];
    let mut w_hi = vec![0.0; len];
    for idx in 1..len {
        let rho = grid.k_magnitude(idx);
        // jc: 3/4·2^jc ≤ ρ < 3/4·2^{jc+1}
        let mut jc = (rho / SHELL_INNER).log2().floor() as i32;
        while shell_lo(jc) > rho {
            jc -= 1;
        }
        while shell_lo(jc + 1) <= rho {
            jc += 1;
        }
        j_lo[idx] = jc - 1;
        w_lo[idx] = phi(rho * 2f64.powi(1 - jc), sharpness);
        w_hi[idx] = phi(rho * 2f64.powi(-jc), sharpness);
    }
    Ok(DyadicPartition {
        grid: *grid,
        sharpness,
        j_min,
        j_max,
        j_top,
        table: Arc::new(BlockTable { j_lo, w_lo, w_hi }),
    })
}

impl DyadicPartition {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Highest block that meets any lattice mode.
    pub fn j_top(&self) -> i32 {
        self.j_top
    }

    pub fn resolved(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// Every block meeting the nonzero lattice.
    pub fn covering(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_top
    }

    pub fn chi(&self, rho: f64) -> f64 {
        chi(rho, self.sharpness)
    }

    pub fn phi(&self, rho: f64) -> f64 {
        phi(rho, self.sharpness)
    }

    /// Weight of mode `idx` in block `j`.
    #[inline]
    pub fn block_weight(&self, idx: usize, j: i32) -> f64 {
        let lo = self.table.j_lo[idx];
        if j == lo {
            self.table.w_lo[idx]
        } else if lo != i32::MIN && j == lo + 1 {
            self.table.w_hi[idx]
        } else {
            0.0
        }
    }

    /// Weight of mode `idx` in `S_j = Σ_{k ≤ j-1} Δ_k`.
    #[inline]
    pub fn low_weight(&self, idx: usize, j: i32) -> f64 {
        let lo = self.table.j_lo[idx];
        if lo == i32::MIN {
            0.0
        } else if lo + 1 <= j - 1 {
            self.table.w_lo[idx] + self.table.w_hi[idx]
        } else if lo == j - 1 {
            self.table.w_lo[idx]
        } else {
            0.0
        }
    }

    /// `max |Σ_j φ(2^{-j}|k|) - 1|` over the nonzero lattice modes.
    pub fn unity_defect(&self) -> f64 {
        (1..self.grid.len())
            .map(|i| match self.mode_blocks(i) {
                Some((_, a, b)) => (a + b - 1.0).abs(),
                None => 1.0,
            })
            .fold(0.0, f64::max)
    }

    /// The (at most two) blocks a mode belongs to, with weights.
    #[inline]
    pub(crate) fn mode_blocks(&self, idx: usize) -> Option<(i32, f64, f64)> {
        let lo = self.table.j_lo[idx];
        (lo != i32::MIN).then(|| (lo, self.table.w_lo[idx], self.table.w_hi[idx]))
    }

    fn check_grid(&self, f: &SpectrumField) {
        assert_eq!(self.grid, *f.grid(), "partition built for another grid");
    }

    /// `Δ_j f` for any integer `j` (zero away from the lattice).
    pub fn block(&self, f: &SpectrumField, j: i32) -> SpectrumField {
        self.check_grid(f);
        f.map_real(|i| self.block_weight(i, j))
    }

    /// `S_j f` for any integer `j`; the mean is excluded.
    pub fn low(&self, f: &SpectrumField, j: i32) -> SpectrumField {
        self.check_grid(f);
        f.map_real(|i| self.low_weight(i, j))
    }

    /// `Δ_{j-1} + Δ_j + Δ_{j+1}`.
    pub fn block_widened(&self, f: &SpectrumField, j: i32) -> SpectrumField {
        self.check_grid(f);
        f.map_real(|i| {
            self.block_weight(i, j - 1) + self.block_weight(i, j) + self.block_weight(i, j + 1)
        })
    }

    /// Sum of blocks strictly above `j_max`.
    pub fn high_residual(&self, f: &SpectrumField) -> SpectrumField {
        self.check_grid(f);
        let top = self.j_max;
        f.map_real(|i| match self.mode_blocks(i) {
            None => 0.0,
            Some((lo, a, b)) => {
                let mut w = 0.0;
                if lo > top {
                    w += a;
                }
                if lo + 1 > top {
                    w += b;
                }
                w
            }
        })
    }

    fn check_range(&self, j: i32, hi: i32) -> Result<()> {
        if j < self.j_min || j > hi {
            return Err(Error::BlockOutOfRange {
                j,
                lo: self.j_min,
                hi,
            });
        }
        Ok(())
    }
}

/// `Δ_j f := φ(2^{-j}D) f` for `j ∈ [j_min, j_max]`.
pub fn dyadic_block(p: &DyadicPartition, f: &SpectrumField, j: i32) -> Result<SpectrumField> {
    p.check_range(j, p.j_max)?;
    Ok(p.block(f, j))
}

/// `S_j f := Σ_{k ≤ j-1} Δ_k f` for `j ∈ [j_min, j_max + 1]`. Its
/// multiplier is `χ(2^{-j}|k|)` on nonzero modes.
pub fn low_cutoff(p: &DyadicPartition, f: &SpectrumField, j: i32) -> Result<SpectrumField> {
    p.check_range(j, p.j_max + 1)?;
    Ok(p.low(f, j))
}

/// Blocks over the resolved range plus the out-of-range remainders.
#[derive(Clone, Debug)]
pub struct BandDecomposition {
    pub partition: DyadicPartition,
    pub blocks: BTreeMap<i32, SpectrumField>,
    pub residual_low: SpectrumField,
    pub residual_high: SpectrumField,
}

pub fn decompose(p: &DyadicPartition, f: &SpectrumField) -> BandDecomposition {
    let blocks = p.resolved().map(|j| (j, p.block(f, j))).collect();
    BandDecomposition {
        partition: p.clone(),
        blocks,
        residual_low: p.low(f, p.j_min),
        residual_high: p.high_residual(f),
    }
}

/// Sum of all blocks and residuals; equals the input minus its mean.
pub fn reconstruct(d: &BandDecomposition) -> SpectrumField {
    let mut acc = d.residual_low.add(&d.residual_high);
    for b in d.blocks.values() {
        acc = acc.add(b);
    }
    acc
}

impl BandDecomposition {
    /// Largest coefficient of any block outside its shell, relative to the
    /// block's own largest coefficient.
    pub fn max_support_leak(&self) -> f64 {
        let g = *self.partition.grid();
        self.blocks
            .iter()
            .map(|(&j, b)| {
                let lo = SHELL_INNER * 2f64.powi(j);
                let hi = SHELL_OUTER * 2f64.powi(j);
                b.band_excess(|i| {
                    let k = g.k_magnitude(i);
                    k >= lo && k <= hi
                })
            })
            .fold(0.0, f64::max)
    }
}

/// Outcome of the almost-orthogonality scan.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalityReport {
    /// `max ‖Δ_iΔ_j f‖ / ‖f‖` over `|i - j| ≥ 2`.
    pub block_violation: f64,
    /// `max ‖Δ_i(S_{j-1}f Δ_j g)‖ / max_j ‖S_{j-1}f Δ_j g‖` over `|i - j| ≥ 5`.
    pub product_violation: f64,
    pub pairs_tested: usize,
}

/// Spectrum radius allowed for exact products: `|k| ≤ Nyquist / 3`.
pub fn alias_free_radius(grid: &GridSpec) -> f64 {
    grid.nyquist() / 3.0
}

fn confined(f: &SpectrumField, radius: f64) -> bool {
    let g = *f.grid();
    f.band_excess(|i| g.k_magnitude(i) <= radius * (1.0 + 1e-12)) <= 1e-14
}

/// Exact product of two fields whose spectra lie within `Nyquist/3`.
fn exact_product(f: &SpectrumField, g: &SpectrumField) -> SpectrumField {
    let (a, b) = inverse_pair(f, g);
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    forward_real(*f.grid(), &prod)
}

/// Checks `Δ_iΔ_j f = 0` for `|i-j| ≥ 2` and `Δ_i(S_{j-1}f Δ_j g) = 0`
/// for `|i-j| ≥ 5` over every block meeting the lattice.
pub fn check_almost_orthogonality(
    p: &DyadicPartition,
    f: &SpectrumField,
    g: &SpectrumField,
) -> Result<OrthogonalityReport> {
    let radius = alias_free_radius(p.grid());
    if !confined(f, radius) || !confined(g, radius) {
        return Err(Error::BandTooWide);
    }
    let (f, g) = (f.without_mean(), g.without_mean());
    let js: Vec<i32> = p.covering().collect();
    let fnorm = f.coeff_norm().max(f64::MIN_POSITIVE);
    let mut pairs = 0;

    let mut block_violation = 0.0_f64;
    let blocks: Vec<SpectrumField> = js.iter().map(|&j| p.block(&f, j)).collect();
    for &i in &js {
        for (b, &j) in js.iter().enumerate() {
            if (i - j).abs() >= 2 {
                let v = p.block(&blocks[b], i).coeff_norm() / fnorm;
                block_violation = block_violation.max(v);
                pairs += 1;
            }
        }
    }

    let mut product_violation = 0.0_f64;
    let mut scale = 0.0_f64;
    let mut leaks = Vec::new();
    for &j in &js {
        let prod = exact_product(&p.low(&f, j - 1), &p.block(&g, j));
        scale = scale.max(prod.coeff_norm());
        for &i in &js {
            if (i - j).abs() >= 5 {
                leaks.push(p.block(&prod, i).coeff_norm());
                pairs += 1;
            }
        }
    }
    if scale > 0.0 {
        for l in leaks {
            product_violation = product_violation.max(l / scale);
        }
    }
    Ok(OrthogonalityReport {
        block_violation,
        product_violation,
        pairs_tested: pairs,
    })
}

/// `‖ |∇Δ_j f| ‖_{L^p} / ‖Δ_j f‖_{L^p}`. For `p = 2` this lies in
/// `[3/4 · 2^j, 8/3 · 2^j]` exactly.
pub fn bernstein_ratio(p: &DyadicPartition, f: &SpectrumField, j: i32, exponent: f64) -> Result<f64> {
    let block = p.block(f, j);
    let grad = gradient(&block);
    let (gx, gy) = inverse_pair(grad.component(0), grad.component(1));
    let gz = inverse_real(grad.component(2));
    let mag: Vec<f64> = (0..gx.len())
        .map(|i| (gx[i] * gx[i] + gy[i] * gy[i] + gz[i] * gz[i]).sqrt())
        .collect();
    let grid = *f.grid();
    let num = lp_norm_samples(&grid, &mag, exponent)?;
    let den = lp_norm_samples(&grid, &inverse_real(&block), exponent)?;
    if den == 0.0 {
        return Err(Error::InvalidArgument(format!("block {j} is empty")));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_spectrum, WhiteBand};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn partition(n: usize) -> DyadicPartition {
        build_partition(&GridSpec::new(n, 2.0 * PI).unwrap(), None).unwrap()
    }

    #[test]
    fn bump_vanishes_outside_shell() {
        assert_eq!(phi(0.5, 1.0), 0.0);
        assert_eq!(phi(3.0, 1.0), 0.0);
        assert_eq!(phi(SHELL_INNER, 1.0), 0.0);
        assert_eq!(phi(SHELL_OUTER, 1.0), 0.0);
        for i in 0..10_000 {
            let rho = 0.01 + 4.0 * i as f64 / 10_000.0;
            let v = phi(rho, 1.0);
            assert!((0.0..=1.0).contains(&v));
            if !(SHELL_INNER..=SHELL_OUTER).contains(&rho) {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn partition_of_unity_by_direct_summation() {
        let p = partition(64);
        let lo = 2f64.powi(p.j_min());
        let hi = 2f64.powi(p.j_max());
        let mut worst = 0.0_f64;
        for i in 0..10_000 {
            let rho = lo * (hi / lo).powf(i as f64 / 9_999.0);
            let s: f64 = (-60..=60).map(|j| p.phi(rho * 2f64.powi(-j))).sum();
            worst = worst.max((s - 1.0).abs());
        }
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn resolved_range() {
        let p = partition(64);
        // unit = 1, dealias radius 21
        assert_eq!(p.j_min(), -1);
        assert_eq!(p.j_max(), 2);
        assert!(p.j_top() >= 4);
        let coarse = GridSpec::new(8, 2.0 * PI).unwrap();
        assert!(matches!(
            build_partition(&coarse, None),
            Err(Error::InsufficientResolution { .. })
        ));
    }

    #[test]
    fn blocks_on_single_modes() {
        let p = partition(64);
        let g = *p.grid();
        // |k| = 3 gives 2^{-1}|k| = 3/2, where φ = 1
        let mut f = SpectrumField::zeros(g);
        f.set_mode_pair([2, 2, 1], Complex64::new(1.0, 0.5));
        let b = dyadic_block(&p, &f, 1).unwrap();
        assert!(b.sub(&f).coeff_norm() < 1e-15);
        let mut hi = SpectrumField::zeros(g);
        hi.set_mode_pair([0, 16, 0], Complex64::new(1.0, 0.0)); // 2^{0+4}
        assert_eq!(dyadic_block(&p, &hi, 0).unwrap().coeff_norm(), 0.0);
        assert!(matches!(
            dyadic_block(&p, &f, p.j_max() + 1),
            Err(Error::BlockOutOfRange { .. })
        ));
    }

    #[test]
    fn low_cutoff_matches_chi() {
        let p = partition(32);
        let g = *p.grid();
        for j in p.j_min()..=p.j_max() + 1 {
            for idx in 1..g.len() {
                let closed = p.chi(g.k_magnitude(idx) * 2f64.powi(-j));
                assert!((p.low_weight(idx, j) - closed).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn telescoping_and_reconstruction() {
        let p = partition(32);
        let g = *p.grid();
        let f = random_spectrum(&g, &WhiteBand::new(-1, 2), 3).unwrap();
        for j in p.j_min()..=p.j_max() + 1 {
            let mut acc = low_cutoff(&p, &f, j).unwrap();
            for k in j..=p.j_top() {
                acc = acc.add(&p.block(&f, k));
            }
            assert!(acc.sub(&f).coeff_norm() <= 1e-12 * f.coeff_norm());
        }
        let d = decompose(&p, &f);
        let r = reconstruct(&d);
        assert!(r.sub(&f.without_mean()).coeff_norm() <= 1e-12 * f.coeff_norm());
        assert!(d.max_support_leak() <= 1e-14);
        assert_eq!(d.residual_low.coeff_norm(), 0.0);
    }

    #[test]
    fn zero_field_decomposes_to_zero() {
        let p = partition(32);
        let d = decompose(&p, &SpectrumField::zeros(*p.grid()));
        assert!(d.blocks.values().all(|b| b.coeff_norm() == 0.0));
    }

    #[test]
    fn single_shell_field_hits_few_blocks() {
        let p = partition(32);
        let g = *p.grid();
        let f = random_spectrum(&g, &WhiteBand::new(1, 1), 8).unwrap();
        let d = decompose(&p, &f);
        let nonzero = d.blocks.values().filter(|b| b.coeff_norm() > 0.0).count();
        assert!((1..=3).contains(&nonzero), "{nonzero}");
    }

    #[test]
    fn almost_orthogonality() {
        let p = partition(64);
        let g = *p.grid();
        let f = random_spectrum(&g, &WhiteBand::new(-1, 2), 1).unwrap();
        let h = random_spectrum(&g, &WhiteBand::new(-1, 2), 2).unwrap();
        let confined = |s: SpectrumField| s.map_real(|i| if g.k_magnitude(i) <= 10.0 { 1.0 } else { 0.0 });
        let (f, h) = (confined(f), confined(h));
        let r = check_almost_orthogonality(&p, &f, &h).unwrap();
        assert!(r.block_violation <= 1e-12, "{r:?}");
        assert!(r.product_violation <= 1e-12, "{r:?}");
        assert!(r.pairs_tested > 0);

        let j = 1;
        let same = p.block(&p.block(&f, j), j);
        assert!(same.coeff_norm() > 0.0);
        let far = p.block(&p.block(&f, j + 5), j);
        assert_eq!(far.coeff_norm(), 0.0);

        let wide = random_spectrum(&g, &WhiteBand::new(3, 3), 4).unwrap();
        assert!(matches!(
            check_almost_orthogonality(&p, &wide, &h),
            Err(Error::BandTooWide)
        ));
    }

    #[test]
    fn bernstein_ratio_in_shell_for_l2() {
        let p = partition(32);
        let g = *p.grid();
        let f = random_spectrum(&g, &WhiteBand::new(-1, 2), 5).unwrap();
        for j in p.resolved() {
            let r = bernstein_ratio(&p, &f, j, 2.0).unwrap();
            let s = 2f64.powi(j);
            assert!(r >= SHELL_INNER * s - 1e-12 && r <= SHELL_OUTER * s + 1e-12, "{j}: {r}");
        }
    }
}
