//! Seeded invariant suites for the partition, the Besov norms and the
//! exact product identities.

use num_complex::Complex64;
use serde_json::json;

use besovpnp_core::besov::{block_norms, critical_scaling_check, interpolation_check};
use besovpnp_core::littlewood_paley::{
    alias_free_radius, bernstein_ratio, build_partition, check_almost_orthogonality, decompose,
    reconstruct, DyadicPartition,
};
use besovpnp_core::paraproduct::{
    bony_decompose, lorentz_stress_check, splitting_identity_check, support_scan,
};
use besovpnp_core::spectral::{leray_project, GridSpec, SpectrumField, VectorSpectrum};

use super::{seeded_scalar, Experiment, Outcome, Verdict};
use crate::error::CliResult;
use crate::spec::ExperimentSpec;
use crate::table::Table;

fn setup(spec: &ExperimentSpec) -> CliResult<(GridSpec, DyadicPartition)> {
    let grid = spec.grid.grid()?;
    let part = build_partition(&grid, spec.grid.sharpness)?;
    Ok((grid, part))
}

fn samples(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64).collect()
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

/// Partition of unity, reconstruction, almost orthogonality and
/// Bernstein bounds on seeded pairs confined to the alias-free ball.
pub struct LpCheck;

impl Experiment for LpCheck {
    fn kind(&self) -> &'static str {
        "lp-check"
    }

    fn run(&self, spec: &ExperimentSpec) -> CliResult<Outcome> {
        let (grid, part) = setup(spec)?;
        let tol = spec.tolerances.lp;
        let radius = alias_free_radius(&grid);
        let confine = |f: SpectrumField| f.map_real(|i| if grid.k_magnitude(i) <= radius { 1.0 } else { 0.0 });
        let n = spec.initial.count;
        let (mut recon, mut leak, mut block, mut product, mut bern) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut pairs_tested = 0;
        for k in 0..n as u64 {
            let f = confine(seeded_scalar(spec, &grid, 2 * k)?);
            let g = confine(seeded_scalar(spec, &grid, 2 * k + 1)?);
            let d = decompose(&part, &f);
            let back = reconstruct(&d);
            let base = f.without_mean();
            recon.push(back.sub(&base).coeff_norm() / base.coeff_norm().max(f64::MIN_POSITIVE));
            leak.push(d.max_support_leak());
            let o = check_almost_orthogonality(&part, &f, &g)?;
            pairs_tested += o.pairs_tested;
            block.push(o.block_violation);
            product.push(o.product_violation);
            // distance of |∇Δ_j f| / (2^j ‖Δ_j f‖) from [3/4, 8/3]
            let mut worst = 0.0_f64;
            for (&j, b) in &d.blocks {
                if b.coeff_norm() <= 1e-14 * base.coeff_norm() {
                    continue;
                }
                let r = bernstein_ratio(&part, &f, j, 2.0)? / 2f64.powi(j);
                worst = worst.max(0.75 - r).max(r - 8.0 / 3.0);
            }
            bern.push(worst.max(0.0));
        }
        let mut out = Outcome::new(json!({
            "pairs": n,
            "pairs_tested": pairs_tested,
            "alias_free_radius": radius,
            "j_range": [part.j_min(), part.j_max()],
            "partition_unity_defect": part.unity_defect(),
            "note": "reconstruction is compared modulo constants; the zero mode lies outside every block",
        }));
        out.verdicts = vec![
            Verdict::at_most("partition-unity", part.unity_defect(), tol),
            Verdict::at_most("reconstruction", max(&recon), tol),
            Verdict::at_most("block-support", max(&leak), tol),
            Verdict::at_most("block-orthogonality", max(&block), tol),
            Verdict::at_most("product-orthogonality", max(&product), tol),
            Verdict::at_most("bernstein-p2", max(&bern), tol),
        ];
        out.tables.push(
            Table::new("pairs", "sample", samples(n))
                .with("reconstruction", recon)?
                .with("block_support", leak)?
                .with("block_orthogonality", block)?
                .with("product_orthogonality", product)?
                .with("bernstein_excess", bern)?,
        );
        Ok(out)
    }
}

/// Interpolation with constant one and invariance of the critical norms
/// under dyadic rescaling.
pub struct BesovNorm;

impl Experiment for BesovNorm {
    fn kind(&self) -> &'static str {
        "besov-norm"
    }

    fn run(&self, spec: &ExperimentSpec) -> CliResult<Outcome> {
        let (grid, part) = setup(spec)?;
        let idx = &spec.indices;
        let tol = &spec.tolerances;
        let n = spec.initial.count;
        let mut ss = idx.s.clone();
        ss.sort_by(f64::total_cmp);
        ss.dedup();
        let interp = !idx.theta.is_empty() && ss.len() >= 2;
        let mut ratios = Vec::new();
        let mut norms = Table::new("norms", "sample", samples(n));
        let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
        for k in 0..n as u64 {
            let f = seeded_scalar(spec, &grid, k)?;
            let mut worst = 0.0_f64;
            for &p in &idx.p {
                for (a, &s1) in ss.iter().enumerate().filter(|_| interp) {
                    for &s2 in &ss[a + 1..] {
                        for &theta in &idx.theta {
                            worst = worst.max(interpolation_check(&part, &f, s1, s2, theta, p)?.ratio);
                        }
                    }
                }
                let b = block_norms(&part, &f, p)?;
                for &s in &ss {
                    let h = crate::table::norm_header("f", s, p, 1.0);
                    match columns.iter_mut().find(|(name, _)| *name == h) {
                        Some((_, c)) => c.push(b.besov(s, 1.0)),
                        None => columns.push((h, vec![b.besov(s, 1.0)])),
                    }
                }
            }
            ratios.push(worst);
        }
        for (h, c) in columns {
            norms.push(h, c)?;
        }

        let mut scaling = Vec::new();
        let mut defects = Vec::new();
        let scale = !idx.pq.is_empty() && !idx.scales.is_empty();
        for k in (0..n as u64).filter(|_| scale) {
            let comp = |c: u64| seeded_scalar(spec, &grid, 5 * k + c);
            let u = leray_project(&VectorSpectrum::new([comp(0)?, comp(1)?, comp(2)?])?);
            let (v, w) = (comp(3)?, comp(4)?);
            let mut worst = 0.0_f64;
            for &[p, q] in &idx.pq {
                for &m in &idx.scales {
                    let r = critical_scaling_check(&part, &u, &v, &w, m, p, q)?;
                    worst = worst.max(r.max_defect);
                    if k == 0 {
                        scaling.push(json!({"p": p, "q": q, "m": m, "u": [r.u.original, r.u.rescaled],
                            "v": [r.v.original, r.v.rescaled], "w": [r.w.original, r.w.rescaled]}));
                    }
                }
            }
            defects.push(worst);
        }
        let mut out = Outcome::new(json!({
            "fields": n,
            "interpolation_max_ratio": max(&ratios),
            "scaling_max_defect": max(&defects),
            "scaling_first_sample": scaling,
            "note": "one block formula for every s, including s >= 3/p",
        }));
        out.tables.push(norms);
        let mut checks = Table::new("checks", "sample", samples(n));
        if interp {
            out.verdicts.push(Verdict::at_most("interpolation", max(&ratios), 1.0 + tol.interpolation));
            checks.push("interpolation_ratio", ratios)?;
        }
        if scale {
            out.verdicts.push(Verdict::at_most("critical-scaling", max(&defects), tol.scaling));
            checks.push("scaling_defect", defects)?;
        }
        out.tables.push(checks);
        Ok(out)
    }
}

/// Bony decomposition with support scans, the Lorentz stress identity and
/// the three-term splitting, on seeded pairs and single modes.
pub struct IdentityCheck;

fn single_mode(grid: &GridSpec, m: [i64; 3], phase: f64) -> SpectrumField {
    let mut f = SpectrumField::zeros(*grid);
    f.set_mode_pair(m, Complex64::from_polar(0.5, phase));
    f
}

impl Experiment for IdentityCheck {
    fn kind(&self) -> &'static str {
        "identity-check"
    }

    fn run(&self, spec: &ExperimentSpec) -> CliResult<Outcome> {
        let (grid, part) = setup(spec)?;
        let tol = &spec.tolerances;
        let n = spec.initial.count;
        let (mut bony, mut para, mut rem, mut low, mut stress, mut split) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for k in 0..n as u64 {
            let f = seeded_scalar(spec, &grid, 2 * k)?.without_mean();
            let g = seeded_scalar(spec, &grid, 2 * k + 1)?.without_mean();
            bony.push(bony_decompose(&part, &f, &g)?.identity_residual());
            let s = support_scan(&part, &f, &g)?;
            para.push(s.paraproduct_leak);
            rem.push(s.remainder_leak);
            low.push(s.remainder_low_fraction);
            stress.push(lorentz_stress_check(&f)?.max_residual);
            split.push(splitting_identity_check(&f, &g)?.max_residual);
        }
        let modes: [[i64; 3]; 4] = [[1, 0, 0], [1, 2, 0], [0, 1, 3], [2, 1, 1]];
        let mut single = Vec::new();
        for (i, &m) in modes.iter().enumerate() {
            let a = single_mode(&grid, m, 0.3 * i as f64);
            let b = single_mode(&grid, modes[(i + 1) % modes.len()], 1.1);
            single.push(json!({
                "mode": m,
                "stress": lorentz_stress_check(&a)?.max_residual,
                "splitting": splitting_identity_check(&a, &b)?.max_residual,
                "bony": bony_decompose(&part, &a, &b)?.identity_residual(),
            }));
        }
        let single_max = |key: &str| {
            single
                .iter()
                .map(|x| x[key].as_f64().unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max)
        };
        let mut out = Outcome::new(json!({
            "pairs": n,
            "single_modes": single,
            "remainder_low_fraction_max": max(&low),
        }));
        out.verdicts = vec![
            Verdict::at_most("bony-identity", max(&bony).max(single_max("bony")), tol.bony),
            Verdict::at_most("paraproduct-support", max(&para), tol.bony),
            Verdict::at_most("remainder-support", max(&rem), tol.bony),
            Verdict::at_most("lorentz-stress", max(&stress), tol.identity),
            Verdict::at_most("splitting", max(&split), tol.identity),
            Verdict::at_most("lorentz-stress-single-mode", single_max("stress"), tol.identity),
            Verdict::at_most("splitting-single-mode", single_max("splitting"), tol.identity),
        ];
        out.tables.push(
            Table::new("pairs", "sample", samples(n))
                .with("bony_residual", bony)?
                .with("paraproduct_leak", para)?
                .with("remainder_leak", rem)?
                .with("remainder_low_fraction", low)?
                .with("lorentz_stress", stress)?
                .with("splitting", split)?,
        );
        Ok(out)
    }
}
