//! Bony's decomposition `fg = T_f g + T_g f + R(f, g)` and two exact
//! regrouping identities used by the charged-fluid nonlinearity.
//!
//! `T_f g = Σ_j S_{j-1}f Δ_j g` and `R(f, g) = Σ_j Δ_j f Δ̃_j g` with
//! `Δ̃_j = Δ_{j-1} + Δ_j + Δ_{j+1}`. Sums run over every block meeting the
//! lattice. Inputs are reduced to their mean-zero parts first.

use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, BesovIndex};
use crate::error::{Error, Result};
use crate::littlewood_paley::DyadicPartition;
use crate::spectral::{
    dealiased_product, forward_real, gradient, inverse_neg_laplacian, inverse_pair, laplacian,
    partial, SpectrumField,
};

fn require_alias_free(f: &SpectrumField) -> Result<()> {
    if f.is_alias_free() {
        Ok(())
    } else {
        Err(Error::AliasingRisk)
    }
}

/// `Σ_j a_j b_j` accumulated in physical space, then dealiased once.
fn sum_of_products(
    grid_src: &SpectrumField,
    terms: impl Iterator<Item = (SpectrumField, SpectrumField)>,
) -> SpectrumField {
    let grid = *grid_src.grid();
    let mut acc = vec![0.0; grid.len()];
    for (a, b) in terms {
        if a.max_abs() == 0.0 || b.max_abs() == 0.0 {
            continue;
        }
        let (x, y) = inverse_pair(&a, &b);
        for ((s, x), y) in acc.iter_mut().zip(&x).zip(&y) {
            *s += x * y;
        }
    }
    forward_real(grid, &acc).dealiased()
}

fn paraproduct_terms<'a>(
    part: &'a DyadicPartition,
    f: &'a SpectrumField,
    g: &'a SpectrumField,
) -> impl Iterator<Item = (SpectrumField, SpectrumField)> + 'a {
    part.covering()
        .map(move |j| (part.low(f, j - 1), part.block(g, j)))
}

fn remainder_terms<'a>(
    part: &'a DyadicPartition,
    f: &'a SpectrumField,
    g: &'a SpectrumField,
) -> impl Iterator<Item = (SpectrumField, SpectrumField)> + 'a {
    part.covering()
        .map(move |j| (part.block(f, j), part.block_widened(g, j)))
}

/// `T_f g`.
pub fn paraproduct(part: &DyadicPartition, f: &SpectrumField, g: &SpectrumField) -> Result<SpectrumField> {
    require_alias_free(f)?;
    require_alias_free(g)?;
    let (f, g) = (f.without_mean(), g.without_mean());
    Ok(sum_of_products(&f, paraproduct_terms(part, &f, &g)))
}

/// `R(f, g)`.
pub fn remainder(part: &DyadicPartition, f: &SpectrumField, g: &SpectrumField) -> Result<SpectrumField> {
    require_alias_free(f)?;
    require_alias_free(g)?;
    let (f, g) = (f.without_mean(), g.without_mean());
    Ok(sum_of_products(&f, remainder_terms(part, &f, &g)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BonySplit {
    pub t_fg: SpectrumField,
    pub t_gf: SpectrumField,
    pub remainder: SpectrumField,
    /// Dealiased product of the mean-zero parts.
    pub product: SpectrumField,
}

impl BonySplit {
    /// `‖T_f g + T_g f + R − fg‖ / ‖fg‖`.
    pub fn identity_residual(&self) -> f64 {
        let sum = self.t_fg.add(&self.t_gf).add(&self.remainder);
        let d = sum.sub(&self.product).coeff_norm();
        let scale = self.product.coeff_norm();
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }
}

pub fn bony_decompose(part: &DyadicPartition, f: &SpectrumField, g: &SpectrumField) -> Result<BonySplit> {
    require_alias_free(f)?;
    require_alias_free(g)?;
    let (f, g) = (f.without_mean(), g.without_mean());
    Ok(BonySplit {
        t_fg: sum_of_products(&f, paraproduct_terms(part, &f, &g)),
        t_gf: sum_of_products(&f, paraproduct_terms(part, &g, &f)),
        remainder: sum_of_products(&f, remainder_terms(part, &f, &g)),
        product: dealiased_product(&f, &g),
    })
}

/// Spectral support scan of the individual Bony summands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    /// `max ‖Δ_i(S_{j-1}f Δ_j g)‖ / max_j ‖S_{j-1}f Δ_j g‖` over `|i-j| ≥ 5`.
    pub paraproduct_leak: f64,
    /// Largest coefficient of `Δ_j f Δ̃_j g` beyond `|k| = 2^{j+3}`,
    /// relative to the summand's largest coefficient.
    pub remainder_leak: f64,
    /// Fraction of `‖R(f,g)‖²` carried below `3/4 · 2^{j_lo}`, where
    /// `j_lo` is the lowest block on which both inputs are nonzero.
    pub remainder_low_fraction: f64,
}

pub fn support_scan(part: &DyadicPartition, f: &SpectrumField, g: &SpectrumField) -> Result<SupportReport> {
    require_alias_free(f)?;
    require_alias_free(g)?;
    let (f, g) = (f.without_mean(), g.without_mean());
    let grid = *f.grid();
    let js: Vec<i32> = part.covering().collect();

    let mut leaks = Vec::new();
    let mut scale = 0.0_f64;
    for &j in &js {
        let term = dealiased_product(&part.low(&f, j - 1), &part.block(&g, j));
        scale = scale.max(term.coeff_norm());
        for &i in &js {
            if (i - j).abs() >= 5 {
                leaks.push(part.block(&term, i).coeff_norm());
            }
        }
    }
    let paraproduct_leak = if scale > 0.0 {
        leaks.into_iter().fold(0.0, f64::max) / scale
    } else {
        0.0
    };

    let mut remainder_leak = 0.0_f64;
    let mut j_lo = None;
    for &j in &js {
        let a = part.block(&f, j);
        let b = part.block_widened(&g, j);
        if a.max_abs() == 0.0 || b.max_abs() == 0.0 {
            continue;
        }
        if part.block(&g, j).max_abs() > 0.0 && j_lo.is_none() {
            j_lo = Some(j);
        }
        let term = dealiased_product(&a, &b);
        let radius = 2f64.powi(j + 3) * (1.0 + 1e-12);
        remainder_leak = remainder_leak.max(term.band_excess(|i| grid.k_magnitude(i) <= radius));
    }
    let rem = sum_of_products(&f, remainder_terms(part, &f, &g));
    let remainder_low_fraction = match j_lo {
        Some(j) if rem.max_abs() > 0.0 => {
            let cut = 0.75 * 2f64.powi(j);
            let low = rem.map_real(|i| if grid.k_magnitude(i) < cut { 1.0 } else { 0.0 });
            (low.coeff_norm() / rem.coeff_norm()).powi(2)
        }
        _ => 0.0,
    };
    Ok(SupportReport {
        paraproduct_leak,
        remainder_leak,
        remainder_low_fraction,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Per-component `‖lhs_m − rhs_m‖`, relative to `max_m ‖lhs_m‖`.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub lhs_norm: f64,
}

fn relative(diffs: Vec<f64>, scale: f64) -> IdentityReport {
    let residuals: Vec<f64> = diffs
        .into_iter()
        .map(|d| if scale > 0.0 { d / scale } else { d })
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    IdentityReport {
        residuals,
        max_residual,
        lhs_norm: scale,
    }
}

/// Checks, with `A = (-Δ)^{-1}v`, `B = (-Δ)^{-1}w`,
/// `v ∂_m B + w ∂_m A = -Δ(A ∂_m B) + 2∇·(A ∂_m∇B) + ∂_m(A w)`.
pub fn splitting_identity_check(v: &SpectrumField, w: &SpectrumField) -> Result<IdentityReport> {
    for f in [v, w] {
        if f.mean().abs() > 1e-12 * f.coeff_norm().max(f64::MIN_POSITIVE) {
            return Err(Error::NonzeroMeanInputs);
        }
        require_alias_free(f)?;
    }
    let a = inverse_neg_laplacian(v);
    let b = inverse_neg_laplacian(w);
    let da = gradient(&a);
    let db = gradient(&b);
    let mut lhs_norms = Vec::with_capacity(3);
    let mut diffs = Vec::with_capacity(3);
    for m in 0..3 {
        let lhs = dealiased_product(v, db.component(m)).add(&dealiased_product(w, da.component(m)));
        let t1 = laplacian(&dealiased_product(&a, db.component(m))).scaled(-1.0);
        let ddb = gradient(db.component(m));
        let mut t2 = SpectrumField::zeros(*v.grid());
        for l in 0..3 {
            t2 = t2.add(&partial(&dealiased_product(&a, ddb.component(l)), l));
        }
        let t3 = partial(&dealiased_product(&a, w), m);
        let rhs = t1.add(&t2.scaled(2.0)).add(&t3);
        lhs_norms.push(lhs.l2_norm());
        diffs.push(lhs.sub(&rhs).l2_norm());
    }
    let scale = lhs_norms.into_iter().fold(0.0, f64::max);
    Ok(relative(diffs, scale))
}

/// Checks `Δφ ∇φ = ∇·σ` with `σ_ij = ∂_iφ ∂_jφ − ½|∇φ|² δ_ij`.
pub fn lorentz_stress_check(phi: &SpectrumField) -> Result<IdentityReport> {
    require_alias_free(phi)?;
    let phi = phi.without_mean();
    let grid = *phi.grid();
    let d = gradient(&phi);
    let lap = laplacian(&phi);
    let prod = |i: usize, j: usize| dealiased_product(d.component(i), d.component(j));
    let half_sq = prod(0, 0).add(&prod(1, 1)).add(&prod(2, 2)).scaled(0.5);
    let mut lhs_norms = Vec::with_capacity(3);
    let mut diffs = Vec::with_capacity(3);
    for j in 0..3 {
        let lhs = dealiased_product(&lap, d.component(j));
        let mut div = SpectrumField::zeros(grid);
        for i in 0..3 {
            let mut s = prod(i, j);
            if i == j {
                s = s.sub(&half_sq);
            }
            div = div.add(&partial(&s, i));
        }
        lhs_norms.push(lhs.l2_norm());
        diffs.push(lhs.sub(&div).l2_norm());
    }
    let scale = lhs_norms.into_iter().fold(0.0, f64::max);
    Ok(relative(diffs, scale))
}

/// `‖fg‖_{Ḃ^{s₁+s₂-3/p₁}_{p₂,1}} / (‖f‖_{Ḃ^{s₁}_{p₁,1}} ‖g‖_{Ḃ^{s₂}_{p₂,1}})`.
pub fn product_estimate_ratio(
    part: &DyadicPartition,
    f: &SpectrumField,
    g: &SpectrumField,
    s: (f64, f64),
    p: (f64, f64),
) -> Result<f64> {
    require_alias_free(f)?;
    require_alias_free(g)?;
    let (f, g) = (f.without_mean(), g.without_mean());
    let fg = dealiased_product(&f, &g).without_mean();
    let lhs = besov_norm(part, &fg, BesovIndex::new(s.0 + s.1 - 3.0 / p.0, p.1, 1.0)?);
    let nf = besov_norm(part, &f, BesovIndex::new(s.0, p.0, 1.0)?);
    let ng = besov_norm(part, &g, BesovIndex::new(s.1, p.1, 1.0)?);
    if nf == 0.0 || ng == 0.0 {
        return Err(Error::InvalidArgument("product estimate of a zero field".into()));
    }
    Ok(lhs / (nf * ng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::build_partition;
    use crate::spectral::{random_spectrum, GridSpec, WhiteBand};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn partition(n: usize) -> DyadicPartition {
        build_partition(&GridSpec::new(n, 2.0 * PI).unwrap(), None).unwrap()
    }

    #[test]
    fn low_high_pair_is_all_paraproduct() {
        let p = partition(32);
        let g = *p.grid();
        let mut lo = SpectrumField::zeros(g);
        lo.set_mode_pair([1, 0, 0], Complex64::new(0.5, 0.0));
        let mut hi = SpectrumField::zeros(g);
        hi.set_mode_pair([0, 8, 0], Complex64::new(0.0, 0.5));
        let s = bony_decompose(&p, &lo, &hi).unwrap();
        assert!(s.t_fg.sub(&s.product).coeff_norm() < 1e-14);
        assert!(s.t_gf.coeff_norm() < 1e-15);
        assert!(s.remainder.coeff_norm() < 1e-15);
        assert!(paraproduct(&p, &hi, &lo).unwrap().coeff_norm() < 1e-15);
    }

    #[test]
    fn zero_input_gives_zero_parts() {
        let p = partition(16 * 2);
        let g = *p.grid();
        let f = random_spectrum(&g, &WhiteBand::new(0, 2), 1).unwrap();
        let s = bony_decompose(&p, &SpectrumField::zeros(g), &f).unwrap();
        for part in [&s.t_fg, &s.t_gf, &s.remainder, &s.product] {
            assert_eq!(part.coeff_norm(), 0.0);
        }
    }

    #[test]
    fn random_identity_and_supports() {
        let p = partition(32);
        let g = *p.grid();
        let f = random_spectrum(&g, &WhiteBand::new(-1, 2), 11).unwrap();
        let h = random_spectrum(&g, &WhiteBand::new(-1, 2), 12).unwrap();
        let s = bony_decompose(&p, &f, &h).unwrap();
        assert!(s.identity_residual() <= 1e-11, "{}", s.identity_residual());
        let r = support_scan(&p, &f, &h).unwrap();
        assert!(r.paraproduct_leak <= 1e-13, "{r:?}");
        assert!(r.remainder_leak <= 1e-13, "{r:?}");
        assert!(r.remainder_low_fraction > 0.0);
    }

    #[test]
    fn aliasing_risk_rejected() {
        let p = partition(32);
        let g = *p.grid();
        let mut f = SpectrumField::zeros(g);
        f.set_mode_pair([15, 0, 0], Complex64::new(1.0, 0.0));
        assert!(matches!(paraproduct(&p, &f, &f), Err(Error::AliasingRisk)));
    }

    #[test]
    fn splitting_identity_random_and_errors() {
        let g = GridSpec::new(32, 2.0 * PI).unwrap();
        let v = random_spectrum(&g, &WhiteBand::new(-1, 2), 3).unwrap();
        let w = random_spectrum(&g, &WhiteBand::new(-1, 2), 4).unwrap();
        let r = splitting_identity_check(&v, &w).unwrap();
        assert!(r.max_residual <= 1e-10, "{r:?}");
        let zero = splitting_identity_check(&SpectrumField::zeros(g), &w).unwrap();
        assert_eq!(zero.lhs_norm, 0.0);
        assert_eq!(zero.max_residual, 0.0);
        let mut biased = v.clone();
        biased.coeffs_mut()[0] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            splitting_identity_check(&biased, &w),
            Err(Error::NonzeroMeanInputs)
        ));
    }

    #[test]
    fn lorentz_stress_single_mode_and_constant() {
        let g = GridSpec::new(16, 2.0 * PI).unwrap();
        let mut phi = SpectrumField::zeros(g);
        phi.set_mode_pair([1, 2, 0], Complex64::new(0.5, 0.0));
        let r = lorentz_stress_check(&phi).unwrap();
        assert!(r.lhs_norm > 0.0);
        assert!(r.max_residual <= 1e-13, "{r:?}");
        let mut c = SpectrumField::zeros(g);
        c.coeffs_mut()[0] = Complex64::new(3.0, 0.0);
        let r = lorentz_stress_check(&c).unwrap();
        assert_eq!(r.lhs_norm, 0.0);
    }
}
