use std::f64::consts::PI;

use proptest::prelude::*;

use besovpnp_core::besov::{block_norms, interpolation_check};
use besovpnp_core::harness::{fit_power_law, monotonicity_scan};
use besovpnp_core::heat::heat_evolve;
use besovpnp_core::littlewood_paley::build_partition;
use besovpnp_core::solver::{
    decode_checkpoint, encode_checkpoint, random_state, PhysicalParams, RandomInitialData,
};
use besovpnp_core::spectral::{
    divergence, forward_transform, inverse_transform, leray_project, random_spectrum, GridSpec, ScalarField,
    VectorSpectrum, WhiteBand,
};

fn grid() -> GridSpec {
    GridSpec::new(16, 2.0 * PI).unwrap()
}

// the partition needs at least three bands
fn fine_grid() -> GridSpec {
    GridSpec::new(32, 2.0 * PI).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip_and_parseval(values in prop::collection::vec(-1.0f64..1.0, 16 * 16 * 16)) {
        let g = grid();
        let f = ScalarField::new(g, values).unwrap();
        let spec = forward_transform(&f);
        let back = inverse_transform(&spec).unwrap();
        let err = f.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13);
        // Riemann sum of f² against the coefficient sum
        let direct: f64 = f.samples().iter().map(|x| x * x).sum::<f64>() * g.cell_volume();
        let l2 = spec.l2_norm();
        prop_assert!((l2 * l2 - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn leray_is_an_idempotent_divergence_free_contraction(seed in any::<u64>()) {
        let g = grid();
        let law = WhiteBand::new(-1, 1);
        let c = |k| random_spectrum(&g, &law, seed.wrapping_add(k)).unwrap();
        let u = VectorSpectrum::new([c(0), c(1), c(2)]).unwrap();
        let p = leray_project(&u);
        let pp = leray_project(&p);
        prop_assert!(pp.sub(&p).l2_norm() <= 1e-14 * p.l2_norm());
        prop_assert!(p.l2_norm() <= u.l2_norm() * (1.0 + 1e-14));
        prop_assert!(divergence(&p).coeff_norm() < 1e-14 * u.l2_norm());
    }

    #[test]
    fn heat_never_increases_besov_norms(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 2.0, 3.0, f64::INFINITY]), s in -1.0f64..2.0) {
        let g = fine_grid();
        let part = build_partition(&g, None).unwrap();
        let f = random_spectrum(&g, &WhiteBand::new(-1, 2), seed).unwrap();
        let mut prev = block_norms(&part, &f, p).unwrap().besov(s, 1.0);
        for t in [0.01, 0.05, 0.2, 1.0] {
            let now = block_norms(&part, &heat_evolve(&f, t).unwrap(), p).unwrap().besov(s, 1.0);
            prop_assert!(now <= prev * (1.0 + 1e-12), "t={t}: {now} > {prev}");
            prev = now;
        }
    }

    #[test]
    fn interpolation_constant_is_one(seed in any::<u64>(), s1 in -2.0f64..0.0, gap in 0.1f64..3.0, theta in 0.0f64..=1.0, p in prop::sample::select(vec![1.0, 2.0, 4.0])) {
        let g = fine_grid();
        let part = build_partition(&g, None).unwrap();
        let f = random_spectrum(&g, &WhiteBand::new(-1, 2), seed).unwrap();
        let r = interpolation_check(&part, &f, s1, s1 + gap, theta, p).unwrap();
        prop_assert!(r.ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn exact_power_laws_fit_exactly(slope in -3.0f64..-0.1, c in 0.01f64..100.0) {
        let t: Vec<f64> = (0..40).map(|i| 0.5 * i as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| c * (1.0 + t).powf(slope)).collect();
        let fit = fit_power_law(&t, &v, (0.0, 20.0)).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-12);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-10);
        prop_assert!(fit.residual < 1e-12);
    }

    // X = e^{aY} is made monotone by any K ≥ a when Y increases
    #[test]
    fn monotonicity_scan_finds_the_growth_rate(a in 0.01f64..10.0) {
        let y: Vec<f64> = (0..30).map(|i| 0.1 * i as f64).collect();
        let x: Vec<f64> = y.iter().map(|y| (a * y).exp()).collect();
        let ks: Vec<f64> = (0..200).map(|i| 0.1 * i as f64).collect();
        let r = monotonicity_scan("x", &x, &y, &ks, 1e-12);
        let expect = ks.iter().copied().find(|&k| k >= a * (1.0 - 1e-9)).unwrap();
        prop_assert_eq!(r.minimal_k, Some(expect));
    }

    #[test]
    fn truncated_checkpoints_are_rejected(cut in 0usize..1000, seed in 0u64..50) {
        let g = GridSpec::new(8, 2.0 * PI).unwrap();
        let law = WhiteBand::new(-1, 0);
        let recipe = RandomInitialData { velocity_law: &law, charge_law: &law, amplitudes: [0.1, 0.1, 0.1], background: 1.0 };
        let state = random_state(&g, &recipe, seed).unwrap();
        let params = PhysicalParams::default();
        let mut bytes = Vec::new();
        encode_checkpoint(&mut bytes, &state, &params, 7).unwrap();
        let back = decode_checkpoint(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(&back.state, &state);
        prop_assert_eq!(back.step, 7);

        let cut = cut * bytes.len() / 1000;
        prop_assert!(decode_checkpoint(&mut &bytes[..cut]).is_err());
        let mut longer = bytes.clone();
        longer.push(0);
        prop_assert!(decode_checkpoint(&mut longer.as_slice()).is_err());
        let mut bad = bytes;
        bad[(seed as usize) % 6] ^= 0x20;
        prop_assert!(decode_checkpoint(&mut bad.as_slice()).is_err());
    }
}
