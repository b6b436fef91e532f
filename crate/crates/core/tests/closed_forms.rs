//! Comparisons against closed-form values computed outside the library.

use std::f64::consts::PI;

use num_complex::Complex64;

use besovpnp_core::besov::{besov_norm, block_norms, BesovIndex};
use besovpnp_core::heat::{heat_evolve, radial_sobolev_oracle, RadialProfile};
use besovpnp_core::littlewood_paley::build_partition;
use besovpnp_core::paraproduct::bony_decompose;
use besovpnp_core::spectral::{
    dealiased_product, divergence, gradient, inverse_laplacian, inverse_transform, laplacian,
    leray_project, lp_norm, GridSpec, ScalarField, SpectrumField, VectorSpectrum,
};

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, 2.0 * PI).unwrap()
}

fn mode(g: &GridSpec, m: [i64; 3], c: f64) -> SpectrumField {
    let mut f = SpectrumField::zeros(*g);
    f.set_mode_pair(m, Complex64::new(c, 0.0));
    f
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

// |k| = √2 lies where φ(|k|) = 1, so 2A cos(x+y) is a single full block
// and every Ḃ^s_{p,1} norm equals its L^p norm on the box.
#[test]
fn full_block_cosine_has_its_lp_norm() {
    let g = grid(32);
    let part = build_partition(&g, None).unwrap();
    let a = 0.75;
    let f = mode(&g, [1, 1, 0], a);
    let vol = (2.0 * PI).powi(3);
    // mean of cos^p over a period
    for (p, mean) in [(2.0, 0.5), (4.0, 3.0 / 8.0)] {
        let expect = 2.0 * a * (vol * mean).powf(1.0 / p);
        for s in [-1.0, 0.0, 0.5, 2.0] {
            let got = besov_norm(&part, &f, BesovIndex::new(s, p, 1.0).unwrap());
            assert!(close(got, expect, 1e-13), "p={p} s={s}: {got} vs {expect}");
        }
    }
    let sup = besov_norm(&part, &f, BesovIndex::new(0.0, f64::INFINITY, 1.0).unwrap());
    assert!(close(sup, 2.0 * a, 1e-13));
}

#[test]
fn block_norms_scale_with_weight() {
    let g = grid(32);
    let part = build_partition(&g, None).unwrap();
    // |k| = 2√2 sits fully in block 1
    let f = mode(&g, [2, 2, 0], 0.5);
    let b = block_norms(&part, &f, 2.0).unwrap();
    let l2 = (0.5 * (2.0 * PI).powi(3)).sqrt();
    assert!(close(b.blocks[&1], l2, 1e-13));
    for (j, v) in &b.blocks {
        if *j != 1 {
            assert!(*v < 1e-14, "block {j}: {v}");
        }
    }
    let s = 0.7;
    let got = b.besov(s, 1.0);
    assert!(close(got, 2f64.powf(s) * l2, 1e-13));
}

#[test]
fn calculus_on_single_modes() {
    let g = grid(16);
    // f = 2 cos(x + 2y - z)
    let f = mode(&g, [1, 2, -1], 1.0);
    let k2 = 6.0;
    let lap = laplacian(&f);
    assert!((lap.coeff([1, 2, -1]) - Complex64::new(-k2, 0.0)).norm() < 1e-14);
    let inv = inverse_laplacian(&f).unwrap();
    assert!((inv.coeff([1, 2, -1]) - Complex64::new(-1.0 / k2, 0.0)).norm() < 1e-14);
    // ∂_y f = -4 sin(x + 2y - z)
    let dy = inverse_transform(gradient(&f).component(1)).unwrap();
    let expect = ScalarField::from_fn(g, |x| -4.0 * (x[0] + 2.0 * x[1] - x[2]).sin()).unwrap();
    let err = dy
        .samples()
        .iter()
        .zip(expect.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn product_of_cosines() {
    let g = grid(16);
    // (2cos x)(2cos 2y) = 2cos(x+2y) + 2cos(x-2y)
    let p = dealiased_product(&mode(&g, [1, 0, 0], 1.0), &mode(&g, [0, 2, 0], 1.0));
    assert!((p.coeff([1, 2, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    assert!((p.coeff([1, -2, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    assert!(p.coeff([1, 0, 0]).norm() < 1e-14);
    let total: f64 = p.coeffs().iter().map(|c| c.norm_sqr()).sum();
    assert!(close(total, 4.0, 1e-13));
}

#[test]
fn leray_removes_gradients_and_keeps_curls() {
    let g = grid(16);
    let phi = mode(&g, [1, 2, 0], 0.3).add(&mode(&g, [0, 1, 3], 0.2));
    let grad = gradient(&phi);
    let proj = leray_project(&grad);
    assert!(proj.l2_norm() < 1e-14 * grad.l2_norm());

    // (sin y, sin z, sin x) is divergence-free
    let u = VectorSpectrum::new([
        mode(&g, [0, 1, 0], 0.5),
        mode(&g, [0, 0, 1], 0.5),
        mode(&g, [1, 0, 0], 0.5),
    ])
    .unwrap();
    assert!(divergence(&u).coeff_norm() < 1e-15);
    assert!(leray_project(&u).sub(&u).l2_norm() < 1e-15);
}

#[test]
fn heat_of_a_mode_decays_exactly() {
    let g = grid(16);
    let f = mode(&g, [2, 1, 1], 1.0);
    let t = 0.37;
    let e = heat_evolve(&f, t).unwrap();
    assert!(close(e.coeff([2, 1, 1]).re, (-6.0 * t).exp(), 1e-14));
    let lp = lp_norm(&inverse_transform(&e).unwrap(), 2.0).unwrap();
    assert!(close(lp, (-6.0 * t).exp() * (0.5 * (2.0 * PI).powi(3)).sqrt() * 2.0, 1e-13));
}

// ‖e^{tΔ}u₀‖²_{Ḣ^ℓ} = (2π)^{-3} 4π A² Γ(ℓ+3/2) / (2 (w²+2t)^{ℓ+3/2})
// for û₀(ρ) = A e^{-w²ρ²/2}.
#[test]
fn gaussian_sobolev_oracle_matches_gamma_formula() {
    let gamma = [PI.sqrt() / 2.0, 3.0 * PI.sqrt() / 4.0, 15.0 * PI.sqrt() / 8.0];
    let (a, w) = (1.3, 0.8);
    let prof = RadialProfile::gaussian(a, w);
    for (ell, g) in gamma.iter().enumerate() {
        for t in [0.0, 0.5, 10.0, 1e3] {
            let c = w * w + 2.0 * t;
            let exact = ((2.0 * PI).powi(-3) * 4.0 * PI * a * a * g / (2.0 * c.powf(ell as f64 + 1.5))).sqrt();
            let got = radial_sobolev_oracle(&prof, ell as f64, t).unwrap();
            assert!(close(got, exact, 1e-9), "ℓ={ell} t={t}: {got} vs {exact}");
        }
    }
}

#[test]
fn bony_pieces_of_separated_modes() {
    let g = grid(32);
    let part = build_partition(&g, None).unwrap();
    // low mode in block 0, high mode in block 3: the product is all T_f g
    let lo = mode(&g, [1, 1, 0], 1.0);
    let hi = mode(&g, [8, 8, 0], 1.0);
    let b = bony_decompose(&part, &lo, &hi).unwrap();
    let prod = b.product.coeff_norm();
    assert!(b.t_fg.sub(&b.product).coeff_norm() < 1e-13 * prod);
    assert!(b.t_gf.coeff_norm() < 1e-13 * prod);
    assert!(b.remainder.coeff_norm() < 1e-13 * prod);
}
