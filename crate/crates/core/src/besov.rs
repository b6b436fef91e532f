//! Homogeneous Besov, Sobolev and Chemin–Lerner norms.
//!
//! `‖f‖_{Ḃ^s_{p,r}} = ‖(2^{js} ‖Δ_j f‖_{L^p})_j‖_{ℓ^r}` over the resolved
//! blocks of a [`DyadicPartition`]. Energy above `j_max` is measured and
//! returned next to the norm but never added to it.
//!
//! Vector fields use the maximum over components.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{build_partition, DyadicPartition};
use crate::numeric::compensated_sum;
use crate::spectral::{
    inverse_pair, inverse_real, lp_norm_samples, periodic_cell_view, scale_field_dyadic,
    SpectrumField, VectorSpectrum,
};

fn valid_exponent(x: f64) -> bool {
    x == f64::INFINITY || (x.is_finite() && x >= 1.0)
}

/// Index `(s, p, r)` of `Ḃ^s_{p,r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    s: f64,
    p: f64,
    r: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidArgument(format!("regularity {s}")));
        }
        for x in [p, r] {
            if !valid_exponent(x) {
                return Err(Error::InvalidExponent(x));
            }
        }
        Ok(Self { s, p, r })
    }

    /// Scaling-critical velocity index `Ḃ^{-1+3/p}_{p,1}`.
    pub fn critical_velocity(p: f64) -> Result<Self> {
        Self::new(-1.0 + 3.0 / p, p, 1.0)
    }

    /// Scaling-critical charge index `Ḃ^{-2+3/q}_{q,1}`.
    pub fn critical_charge(q: f64) -> Result<Self> {
        Self::new(-2.0 + 3.0 / q, q, 1.0)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..*self }
    }
}

/// Index of the mixed space `L̃^ρ(0,T; Ḃ^s_{p,r})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheminLernerIndex {
    rho: f64,
    besov: BesovIndex,
    horizon: f64,
}

impl CheminLernerIndex {
    pub fn new(rho: f64, besov: BesovIndex, horizon: f64) -> Result<Self> {
        if !valid_exponent(rho) {
            return Err(Error::InvalidExponent(rho));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon {horizon}")));
        }
        Ok(Self { rho, besov, horizon })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn besov(&self) -> BesovIndex {
        self.besov
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// `(Σ_j (2^{js} b_j)^r)^{1/r}`, or the supremum for `r = ∞`.
pub fn weighted_lr<'a>(blocks: impl IntoIterator<Item = (&'a i32, &'a f64)>, s: f64, r: f64) -> f64 {
    let terms: Vec<f64> = blocks
        .into_iter()
        .map(|(&j, &b)| 2f64.powf(j as f64 * s) * b)
        .collect();
    lr_sum(&terms, r)
}

fn lr_sum(terms: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return terms.iter().copied().fold(0.0, f64::max);
    }
    let scale = terms.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    if r == 1.0 {
        return compensated_sum(terms.iter().copied());
    }
    scale * compensated_sum(terms.iter().map(|t| (t / scale).powf(r))).powf(1.0 / r)
}

/// Unweighted block norms `‖Δ_j f‖_{L^p}` over the resolved range plus the
/// `L^p` norm of everything above `j_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockNorms {
    pub p: f64,
    pub blocks: BTreeMap<i32, f64>,
    pub residual_high: f64,
}

impl BlockNorms {
    pub fn besov(&self, s: f64, r: f64) -> f64 {
        weighted_lr(&self.blocks, s, r)
    }
}

/// Besov norm together with the data it was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovMeasure {
    pub index: BesovIndex,
    pub value: f64,
    pub blocks: BTreeMap<i32, f64>,
    /// `‖Σ_{j > j_max} Δ_j f‖_{L^p}`, never part of `value`.
    pub residual_high: f64,
    /// Always zero on the torus: the lattice has no modes below `j_min`.
    pub residual_low: f64,
}

/// `‖Δ_j f‖_{L^p}` for every resolved `j`. For `p = 2` this is a single
/// Parseval pass over the spectrum; otherwise each block is transformed.
pub fn block_norms(part: &DyadicPartition, f: &SpectrumField, p: f64) -> Result<BlockNorms> {
    if !valid_exponent(p) {
        return Err(Error::InvalidExponent(p));
    }
    assert_eq!(part.grid(), f.grid(), "partition built for another grid");
    if p == 2.0 {
        Ok(parseval_block_norms(part, f))
    } else {
        transformed_block_norms(part, f, p)
    }
}

fn parseval_block_norms(part: &DyadicPartition, f: &SpectrumField) -> BlockNorms {
    let (lo, hi) = (part.j_min(), part.j_max());
    let top = part.j_top();
    let width = (top - lo + 2) as usize;
    // Neumaier accumulators, one per block
    let mut sum = vec![0.0_f64; width];
    let mut comp = vec![0.0_f64; width];
    let mut add = |j: i32, x: f64| {
        if j < lo {
            return;
        }
        let i = (j - lo) as usize;
        let t = sum[i] + x;
        if sum[i].abs() >= x.abs() {
            comp[i] += (sum[i] - t) + x;
        } else {
            comp[i] += (x - t) + sum[i];
        }
        sum[i] = t;
    };
    for (idx, c) in f.coeffs().iter().enumerate() {
        if let Some((j, a, b)) = part.mode_blocks(idx) {
            let e = c.norm_sqr();
            if a != 0.0 {
                add(j, a * a * e);
            }
            if b != 0.0 {
                add(j + 1, b * b * e);
            }
        }
    }
    let vol = f.grid().volume();
    let energy: Vec<f64> = sum.iter().zip(&comp).map(|(s, c)| s + c).collect();
    let blocks = (lo..=hi)
        .map(|j| (j, (vol * energy[(j - lo) as usize]).sqrt()))
        .collect();
    // residual above j_max is a partition-of-unity sum, so measure it directly
    let residual = part.high_residual(f);
    BlockNorms {
        p: 2.0,
        blocks,
        residual_high: residual.l2_norm(),
    }
}

fn transformed_block_norms(part: &DyadicPartition, f: &SpectrumField, p: f64) -> Result<BlockNorms> {
    let grid = *f.grid();
    let js: Vec<i32> = part.resolved().collect();
    let mut blocks = BTreeMap::new();
    for pair in js.chunks(2) {
        if let [a, b] = *pair {
            let (xa, xb) = inverse_pair(&part.block(f, a), &part.block(f, b));
            blocks.insert(a, lp_norm_samples(&grid, &xa, p)?);
            blocks.insert(b, lp_norm_samples(&grid, &xb, p)?);
        } else {
            let a = pair[0];
            let x = inverse_real(&part.block(f, a));
            blocks.insert(a, lp_norm_samples(&grid, &x, p)?);
        }
    }
    let residual = inverse_real(&part.high_residual(f));
    Ok(BlockNorms {
        p,
        blocks,
        residual_high: lp_norm_samples(&grid, &residual, p)?,
    })
}

pub fn besov_measure(part: &DyadicPartition, f: &SpectrumField, idx: BesovIndex) -> BesovMeasure {
    let b = block_norms(part, f, idx.p).expect("validated exponent");
    BesovMeasure {
        index: idx,
        value: b.besov(idx.s, idx.r),
        blocks: b.blocks,
        residual_high: b.residual_high,
        residual_low: 0.0,
    }
}

pub fn besov_norm(part: &DyadicPartition, f: &SpectrumField, idx: BesovIndex) -> f64 {
    besov_measure(part, f, idx).value
}

/// Maximum of the component norms.
pub fn besov_norm_vector(part: &DyadicPartition, v: &VectorSpectrum, idx: BesovIndex) -> f64 {
    v.components()
        .iter()
        .map(|c| besov_norm(part, c, idx))
        .fold(0.0, f64::max)
}

/// `‖Λ^s f‖_{L²} = (L³ Σ_{m≠0} |k|^{2s} |c(m)|²)^{1/2}`.
pub fn sobolev_norm(f: &SpectrumField, s: f64) -> f64 {
    let g = *f.grid();
    let sum = compensated_sum(
        f.coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| g.k_squared(i).powf(s) * c.norm_sqr()),
    );
    (g.volume() * sum).sqrt()
}

/// Block norms sampled in time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub p: f64,
    pub times: Vec<f64>,
    pub per_block_norms: BTreeMap<i32, Vec<f64>>,
    pub aggregate: Vec<f64>,
}

impl NormSeries {
    pub fn new(
        p: f64,
        times: Vec<f64>,
        per_block_norms: BTreeMap<i32, Vec<f64>>,
        aggregate: Vec<f64>,
    ) -> Result<Self> {
        if !valid_exponent(p) {
            return Err(Error::InvalidExponent(p));
        }
        if times.is_empty() {
            return Err(Error::InvalidArgument("empty norm series".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "series times must be strictly increasing".into(),
            ));
        }
        let n = times.len();
        if aggregate.len() != n || per_block_norms.values().any(|v| v.len() != n) {
            return Err(Error::InvalidArgument(
                "series arrays differ in length".into(),
            ));
        }
        Ok(Self {
            p,
            times,
            per_block_norms,
            aggregate,
        })
    }

    /// Builds a series from snapshots; the aggregate uses `idx`.
    pub fn from_snapshots<'a>(
        part: &DyadicPartition,
        snapshots: impl IntoIterator<Item = (f64, &'a SpectrumField)>,
        idx: BesovIndex,
    ) -> Result<Self> {
        let mut times = Vec::new();
        let mut per: BTreeMap<i32, Vec<f64>> = part.resolved().map(|j| (j, Vec::new())).collect();
        let mut aggregate = Vec::new();
        for (t, f) in snapshots {
            let b = block_norms(part, f, idx.p)?;
            times.push(t);
            aggregate.push(b.besov(idx.s, idx.r));
            for (j, v) in b.blocks {
                per.get_mut(&j).expect("resolved block").push(v);
            }
        }
        Self::new(idx.p, times, per, aggregate)
    }

    fn check_index(&self, idx: &BesovIndex) -> Result<()> {
        if idx.p != self.p {
            return Err(Error::InvalidArgument(format!(
                "series measured in L^{} but index asks for L^{}",
                self.p, idx.p
            )));
        }
        Ok(())
    }

    /// Samples on `[t₀, T]`, with the last one interpolated at `T`.
    fn window(&self, horizon: f64) -> Result<(Vec<f64>, Vec<usize>, f64)> {
        let last = *self.times.last().expect("nonempty");
        let tol = 1e-12 * horizon.abs().max(1.0);
        if horizon > last + tol || self.times[0] > tol {
            return Err(Error::HorizonUncovered {
                requested: horizon,
                available: last,
            });
        }
        let k = self.times.partition_point(|&t| t < horizon - tol);
        let mut ts: Vec<f64> = self.times[..k].to_vec();
        let mut idx: Vec<usize> = (0..k).collect();
        // frac: weight of sample k against k-1 at T
        let frac = if k < self.times.len() && (self.times[k] - horizon).abs() > tol && k > 0 {
            (horizon - self.times[k - 1]) / (self.times[k] - self.times[k - 1])
        } else {
            1.0
        };
        ts.push(horizon.min(last));
        idx.push(k.min(self.times.len() - 1));
        Ok((ts, idx, frac))
    }

    fn resample(values: &[f64], idx: &[usize], frac: f64) -> Vec<f64> {
        let mut out: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        let n = idx.len();
        let k = idx[n - 1];
        if frac < 1.0 {
            out[n - 1] = values[k - 1] + frac * (values[k] - values[k - 1]);
        }
        out
    }
}

fn time_norm(ts: &[f64], vals: &[f64], rho: f64) -> f64 {
    if rho.is_infinite() {
        return vals.iter().copied().fold(0.0, f64::max);
    }
    let scale = vals.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let pw: Vec<f64> = vals.iter().map(|v| (v / scale).powf(rho)).collect();
    let integral = compensated_sum(
        ts.windows(2)
            .zip(pw.windows(2))
            .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1])),
    );
    scale * integral.powf(1.0 / rho)
}

/// `(Σ_j 2^{jsr} (∫₀^T ‖Δ_j f‖^ρ_{L^p} dt)^{r/ρ})^{1/r}` with trapezoid
/// time integrals.
pub fn chemin_lerner_norm(series: &NormSeries, idx: &CheminLernerIndex) -> Result<f64> {
    series.check_index(&idx.besov)?;
    let (ts, pick, frac) = series.window(idx.horizon)?;
    let per: BTreeMap<i32, f64> = series
        .per_block_norms
        .iter()
        .map(|(&j, v)| (j, time_norm(&ts, &NormSeries::resample(v, &pick, frac), idx.rho)))
        .collect();
    Ok(weighted_lr(&per, idx.besov.s, idx.besov.r))
}

/// `‖ ‖f(t)‖_{Ḃ^s_{p,r}} ‖_{L^ρ(0,T)}`, the ordinary Bochner norm.
pub fn time_lebesgue_norm(series: &NormSeries, idx: &CheminLernerIndex) -> Result<f64> {
    series.check_index(&idx.besov)?;
    let (ts, pick, frac) = series.window(idx.horizon)?;
    let n = series.times.len();
    let agg: Vec<f64> = (0..n)
        .map(|t| {
            let terms: Vec<f64> = series
                .per_block_norms
                .iter()
                .map(|(&j, v)| 2f64.powf(j as f64 * idx.besov.s) * v[t])
                .collect();
            lr_sum(&terms, idx.besov.r)
        })
        .collect();
    Ok(time_norm(&ts, &NormSeries::resample(&agg, &pick, frac), idx.rho))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; at most one for `r = 1`.
    pub ratio: f64,
}

/// Compares `‖f‖_{Ḃ^{θs₁+(1-θ)s₂}_{p,1}}` with
/// `‖f‖^θ_{Ḃ^{s₁}_{p,1}} ‖f‖^{1-θ}_{Ḃ^{s₂}_{p,1}}`.
pub fn interpolation_check(
    part: &DyadicPartition,
    f: &SpectrumField,
    s1: f64,
    s2: f64,
    theta: f64,
    p: f64,
) -> Result<InterpolationReport> {
    if !(s1 < s2) || !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "interpolation needs s1 < s2 and θ ∈ [0, 1], got ({s1}, {s2}, {theta})"
        )));
    }
    let b = block_norms(part, f, p)?;
    let s = theta * s1 + (1.0 - theta) * s2;
    let lhs = b.besov(s, 1.0);
    let rhs = b.besov(s1, 1.0).powf(theta) * b.besov(s2, 1.0).powf(1.0 - theta);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(InterpolationReport { s, lhs, rhs, ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    /// `2^{j(s-3(1/p₁-1/p₂))} ‖Δ_j f‖_{L^{p₂}} / (2^{js} ‖Δ_j f‖_{L^{p₁}})`
    /// for every nonempty block.
    pub ratios: BTreeMap<i32, f64>,
    pub max_ratio: f64,
}

pub fn embedding_check(
    part: &DyadicPartition,
    f: &SpectrumField,
    p1: f64,
    p2: f64,
    s: f64,
) -> Result<EmbeddingReport> {
    if !(p1 <= p2) {
        return Err(Error::InvalidArgument(format!(
            "embedding needs p1 <= p2, got ({p1}, {p2})"
        )));
    }
    let a = block_norms(part, f, p1)?;
    let b = block_norms(part, f, p2)?;
    let shift = 3.0 * (1.0 / p1 - 1.0 / p2);
    let floor = 1e-13 * a.blocks.values().copied().fold(0.0, f64::max);
    let ratios: BTreeMap<i32, f64> = a
        .blocks
        .iter()
        .filter(|(_, &x)| x > floor)
        .map(|(&j, &x)| {
            let jf = j as f64;
            let num = 2f64.powf(jf * (s - shift)) * b.blocks[&j];
            (j, num / (2f64.powf(jf * s) * x))
        })
        .collect();
    let max_ratio = ratios.values().copied().fold(0.0, f64::max);
    Ok(EmbeddingReport { ratios, max_ratio })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPair {
    pub original: f64,
    pub rescaled: f64,
}

impl ScalingPair {
    pub fn defect(&self) -> f64 {
        let d = (self.rescaled - self.original).abs();
        if self.original > 0.0 {
            d / self.original
        } else {
            d
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub m: i32,
    pub u: ScalingPair,
    pub v: ScalingPair,
    pub w: ScalingPair,
    pub max_defect: f64,
}

/// Norm of `f` and of `λ^a f(λ·)`, each measured over one period cell so
/// that the box volume does not enter. A spectrum on `2^m ℤ³` has period
/// `L / 2^m`.
fn scaled_pair(
    part: &DyadicPartition,
    fields: &[&SpectrumField],
    m: i32,
    a: f64,
    idx: BesovIndex,
) -> Result<ScalingPair> {
    let mut scaled = Vec::with_capacity(fields.len());
    for f in fields {
        scaled.push(scale_field_dyadic(f, m, a)?);
    }
    let cell = |f: &SpectrumField, k: u32| periodic_cell_view(f, k);
    let norm = |fs: &[SpectrumField]| -> Result<f64> {
        let p = build_partition(fs[0].grid(), Some(part.sharpness()))?;
        Ok(fs
            .iter()
            .map(|f| besov_norm(&p, f, idx))
            .fold(0.0, f64::max))
    };
    let k = m.unsigned_abs();
    let (orig, resc): (Vec<SpectrumField>, Vec<SpectrumField>) = if m >= 0 {
        (
            fields.iter().map(|f| (*f).clone()).collect(),
            scaled.iter().map(|f| cell(f, k)).collect::<Result<_>>()?,
        )
    } else {
        (
            fields.iter().map(|f| cell(f, k)).collect::<Result<_>>()?,
            scaled,
        )
    };
    Ok(ScalingPair {
        original: norm(&orig)?,
        rescaled: norm(&resc)?,
    })
}

/// Checks invariance of `‖u‖_{Ḃ^{-1+3/p}_{p,1}}` and
/// `‖(v,w)‖_{Ḃ^{-2+3/q}_{q,1}}` under `(u,v,w) ↦ (λu, λ²v, λ²w)(λ·)`.
pub fn critical_scaling_check(
    part: &DyadicPartition,
    u: &VectorSpectrum,
    v: &SpectrumField,
    w: &SpectrumField,
    m: i32,
    p: f64,
    q: f64,
) -> Result<ScalingReport> {
    let iu = BesovIndex::critical_velocity(p)?;
    let ic = BesovIndex::critical_charge(q)?;
    let comps: Vec<&SpectrumField> = u.components().iter().collect();
    let pu = scaled_pair(part, &comps, m, 1.0, iu)?;
    let pv = scaled_pair(part, &[v], m, 2.0, ic)?;
    let pw = scaled_pair(part, &[w], m, 2.0, ic)?;
    let max_defect = pu.defect().max(pv.defect()).max(pw.defect());
    Ok(ScalingReport {
        m,
        u: pu,
        v: pv,
        w: pw,
        max_defect,
    })
}
