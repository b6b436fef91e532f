//! Recorded block norms along a trajectory and the functionals `E`, `Y`,
//! `F` built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{block_norms, BlockNorms};
use crate::error::{Error, Result};
use crate::littlewood_paley::{build_partition, DyadicPartition};
use crate::numeric::{cumulative_trapezoid, log_space};
use crate::solver::{FluidState, Observer, StepDiagnostics};
use crate::spectral::SpectrumField;

/// Block norms of one state for every tracked Lebesgue exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub time: f64,
    /// Indexed like [`NormTrajectory::exponents`].
    pub u: Vec<[BlockNorms; 3]>,
    pub v: Vec<BlockNorms>,
    pub w: Vec<BlockNorms>,
    pub l2_u: f64,
    /// `L²` norms of the fluctuations `v − mean v`, `w − mean w`.
    pub l2_v: f64,
    pub l2_w: f64,
}

/// Everything later functionals need: any `(s, r)` can be evaluated from
/// the unweighted block norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormTrajectory {
    pub exponents: Vec<f64>,
    pub samples: Vec<NormSample>,
}

impl NormTrajectory {
    pub fn new(mut exponents: Vec<f64>) -> Result<Self> {
        for &p in &exponents {
            if !(p == f64::INFINITY || (p.is_finite() && p >= 1.0)) {
                return Err(Error::InvalidExponent(p));
            }
        }
        exponents.sort_by(f64::total_cmp);
        exponents.dedup();
        Ok(Self {
            exponents,
            samples: Vec::new(),
        })
    }

    pub fn record(&mut self, part: &DyadicPartition, state: &FluidState) -> Result<()> {
        let fields: Vec<&SpectrumField> = state
            .u
            .components()
            .iter()
            .chain([&state.v, &state.w])
            .collect();
        let jobs: Vec<(usize, usize)> = (0..self.exponents.len())
            .flat_map(|e| (0..5).map(move |f| (e, f)))
            .collect();
        let norms: Vec<BlockNorms> = jobs
            .par_iter()
            .map(|&(e, f)| block_norms(part, fields[f], self.exponents[e]))
            .collect::<Result<_>>()?;
        let mut it = norms.into_iter();
        let (mut u, mut v, mut w) = (Vec::new(), Vec::new(), Vec::new());
        for _ in &self.exponents {
            let mut next = || it.next().expect("five norms per exponent");
            u.push([next(), next(), next()]);
            v.push(next());
            w.push(next());
        }
        self.samples.push(NormSample {
            time: state.time,
            u,
            v,
            w,
            l2_u: state.u.l2_norm(),
            l2_v: state.v.without_mean().l2_norm(),
            l2_w: state.w.without_mean().l2_norm(),
        });
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    fn slot(&self, p: f64) -> Result<usize> {
        self.exponents
            .iter()
            .position(|&x| x == p)
            .ok_or_else(|| Error::MissingIndices(format!("no block norms recorded for p = {p}")))
    }

    /// `‖u‖_{Ḃ^s_{p,r}}` per sample, the largest over the components.
    pub fn velocity(&self, p: f64, s: f64, r: f64) -> Result<Vec<f64>> {
        let k = self.slot(p)?;
        Ok(self
            .samples
            .iter()
            .map(|x| x.u[k].iter().map(|b| b.besov(s, r)).fold(0.0, f64::max))
            .collect())
    }

    /// `‖(v, w)‖_{Ḃ^s_{q,r}} = ‖v‖ + ‖w‖` per sample.
    pub fn charges(&self, q: f64, s: f64, r: f64) -> Result<Vec<f64>> {
        let k = self.slot(q)?;
        Ok(self
            .samples
            .iter()
            .map(|x| x.v[k].besov(s, r) + x.w[k].besov(s, r))
            .collect())
    }
}

/// Observer that records block norms at every diagnostics step.
pub struct NormRecorder {
    part: DyadicPartition,
    pub trajectory: NormTrajectory,
}

impl NormRecorder {
    pub fn new(part: DyadicPartition, exponents: Vec<f64>) -> Result<Self> {
        Ok(Self {
            part,
            trajectory: NormTrajectory::new(exponents)?,
        })
    }

    pub fn for_grid(grid: &crate::spectral::GridSpec, exponents: Vec<f64>) -> Result<Self> {
        Self::new(build_partition(grid, None)?, exponents)
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.part
    }
}

impl Observer for NormRecorder {
    fn observe(&mut self, state: &FluidState, _: &StepDiagnostics) -> std::result::Result<(), String> {
        self.trajectory
            .record(&self.part, state)
            .map_err(|e| e.to_string())
    }
}

/// Index set `(p, q, r, ℓ, s)` of the functionals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalIndices {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub ell: f64,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyFunctionals {
    pub indices: FunctionalIndices,
    pub times: Vec<f64>,
    /// `‖u‖_{Ḃ^{-1+3/p}_{p,1}} + ‖(v,w)‖_{Ḃ^{-2+3/q}_{q,1}}`.
    pub e: Vec<f64>,
    /// `∫₀^t ‖u‖_{Ḃ^{1+3/p}_{p,1}} + ‖(v,w)‖_{Ḃ^{3/q}_{q,1}}`, trapezoid rule.
    pub y: Vec<f64>,
    /// `‖u‖_{Ḃ^ℓ_{r,1}} + ‖(v,w)‖_{Ḃ^{ℓ-1}_{r,1}}`.
    pub f: Vec<f64>,
}

pub fn compute_functionals(traj: &NormTrajectory, idx: FunctionalIndices) -> Result<EnergyFunctionals> {
    let FunctionalIndices { p, q, r, ell, .. } = idx;
    let add = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>();
    let times = traj.times();
    let e = add(
        traj.velocity(p, -1.0 + 3.0 / p, 1.0)?,
        traj.charges(q, -2.0 + 3.0 / q, 1.0)?,
    );
    let dissipation = add(
        traj.velocity(p, 1.0 + 3.0 / p, 1.0)?,
        traj.charges(q, 3.0 / q, 1.0)?,
    );
    let f = add(traj.velocity(r, ell, 1.0)?, traj.charges(r, ell - 1.0, 1.0)?);
    Ok(EnergyFunctionals {
        indices: idx,
        y: cumulative_trapezoid(&times, &dissipation),
        times,
        e,
        f,
    })
}

/// `0` followed by 63 log-spaced values in `[10⁻³, 10³]`.
pub fn default_k_grid() -> Vec<f64> {
    let mut k = vec![0.0];
    k.extend(log_space(1e-3, 1e3, 63));
    k
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub quantity: String,
    pub k_grid: Vec<f64>,
    pub slack: f64,
    pub passes: Vec<bool>,
    /// Smallest passing `K`, if any.
    pub minimal_k: Option<f64>,
}

/// For each `K`, whether `e^{-K Y(t)} X(t)` is non-increasing up to a
/// relative `slack` at every sample.
pub fn monotonicity_scan(
    quantity: impl Into<String>,
    values: &[f64],
    y: &[f64],
    k_grid: &[f64],
    slack: f64,
) -> MonotonicityReport {
    let tol = slack.ln_1p();
    let passes: Vec<bool> = k_grid
        .iter()
        .map(|&k| {
            values.windows(2).zip(y.windows(2)).all(|(x, y)| match (x[0] > 0.0, x[1] > 0.0) {
                (_, false) => true,
                (false, true) => false,
                _ => x[1].ln() - k * y[1] <= x[0].ln() - k * y[0] + tol,
            })
        })
        .collect();
    let minimal_k = k_grid.iter().zip(&passes).find(|(_, &p)| p).map(|(k, _)| *k);
    MonotonicityReport {
        quantity: quantity.into(),
        k_grid: k_grid.to_vec(),
        slack,
        passes,
        minimal_k,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativeNormReport {
    pub r: f64,
    pub s: f64,
    /// `‖u‖_{Ḃ^{-s}_{r,1}} + ‖(v,w)‖_{Ḃ^{-s-1}_{r,1}}` per sample.
    pub series: Vec<f64>,
    /// `sup_t series / series(0)`; zero for zero data.
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Whether `s` lies in the range `3/p − s > 3 max(0, 1/p + 1/r − 1)`.
pub fn admissible_negative_index(p: f64, r: f64, s: f64) -> bool {
    3.0 / p - s > 3.0 * (1.0 / p + 1.0 / r - 1.0).max(0.0)
}

pub fn negative_norm_preservation(
    traj: &NormTrajectory,
    r: f64,
    s: f64,
    bound: f64,
) -> Result<NegativeNormReport> {
    let a = traj.velocity(r, -s, 1.0)?;
    let b = traj.charges(r, -s - 1.0, 1.0)?;
    let series: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let first = series.first().copied().unwrap_or(0.0);
    let sup = series.iter().copied().fold(0.0, f64::max);
    let ratio = if first > 0.0 { sup / first } else { 0.0 };
    Ok(NegativeNormReport {
        r,
        s,
        series,
        ratio,
        bound,
        pass: ratio <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_growth_needs_unit_k() {
        // X = e^{Y}: e^{-KY}X is non-increasing exactly for K ≥ 1
        let y: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let x: Vec<f64> = y.iter().map(|y| y.exp()).collect();
        let grid = default_k_grid();
        let rep = monotonicity_scan("x", &x, &y, &grid, 1e-6);
        let k = rep.minimal_k.unwrap();
        let below = grid.iter().copied().filter(|&g| g < k).fold(0.0, f64::max);
        assert!(k >= 1.0 && below < 1.0, "{k}");
        // once passing, larger K pass too
        let first = rep.passes.iter().position(|&p| p).unwrap();
        assert!(rep.passes[first..].iter().all(|&p| p));
    }

    #[test]
    fn decreasing_passes_at_zero() {
        let x = [3.0, 2.0, 1.0, 0.0, 0.0];
        let rep = monotonicity_scan("x", &x, &[0.0; 5], &[0.0, 1.0], 0.0);
        assert_eq!(rep.minimal_k, Some(0.0));
        let rep = monotonicity_scan("x", &[1.0, 2.0], &[0.0, 0.0], &[0.0, 5.0], 1e-6);
        assert_eq!(rep.minimal_k, None);
    }

    #[test]
    fn grid_shape_and_admissibility() {
        let g = default_k_grid();
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1e-3).abs() < 1e-15 && (g[63] - 1e3).abs() < 1e-9);
        assert!(admissible_negative_index(2.0, 2.0, 0.5));
        assert!(!admissible_negative_index(2.0, 1.0, 0.5));
    }

    #[test]
    fn missing_exponent_is_reported() {
        let t = NormTrajectory::new(vec![2.0]).unwrap();
        assert!(matches!(t.velocity(3.0, 0.0, 1.0), Err(Error::MissingIndices(_))));
        assert!(NormTrajectory::new(vec![0.5]).is_err());
    }
}
