//! Experiment specification files (JSON). Unknown keys are rejected and
//! every omitted field gets its default, so the normalized echo fully
//! determines a run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use besovpnp_core::besov::BesovIndex;
use besovpnp_core::solver::PhysicalParams;
use besovpnp_core::spectral::GridSpec;

use crate::error::{io_at, CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: String,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub indices: IndexSets,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    /// Bundle directory; the command line `--out` wins.
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub box_length: f64,
    /// Transition sharpness of the dyadic partition; `None` is the
    /// classical cutoff.
    pub sharpness: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 32,
            box_length: 2.0 * std::f64::consts::PI,
            sharpness: None,
        }
    }
}

impl GridConfig {
    pub fn grid(&self) -> CliResult<GridSpec> {
        Ok(GridSpec::new(self.n, self.box_length)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub params: PhysicalParams,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: String,
    pub dealias: bool,
    pub diagnostics_stride: usize,
    /// Write the final state as an `NSPNP1` checkpoint.
    pub checkpoint: bool,
    /// Temporal order study on a manufactured solution.
    pub manufactured: Option<ManufacturedCheck>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            params: PhysicalParams::default(),
            dt: 0.01,
            t_end: 0.1,
            integrator: "if-rk2".into(),
            dealias: true,
            diagnostics_stride: 1,
            checkpoint: false,
            manufactured: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedCheck {
    /// Grid points per axis on the `2π` box.
    pub n: usize,
    /// Coarse step; the study also runs `dt/2`.
    pub dt: f64,
    pub t_end: f64,
}

/// Initial-data recipe: a family name, its numeric parameters and a seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialData {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    /// Number of seeded samples for the check suites.
    pub count: usize,
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            family: "white-band".into(),
            params: BTreeMap::from([("j1".to_string(), 0.0), ("j2".to_string(), 2.0)]),
            seed: 0,
            count: 4,
        }
    }
}

impl InitialData {
    pub fn param(&self, key: &str) -> CliResult<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| CliError::Spec(format!("initial.params.{key} is required for family `{}`", self.family)))
    }

    pub fn param_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexSets {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub ell: Vec<f64>,
    pub theta: Vec<f64>,
    /// `(p, q)` pairs for the critical-norm scaling check.
    pub pq: Vec<[f64; 2]>,
    /// Dyadic scale exponents `m` (`λ = 2^m`).
    pub scales: Vec<i32>,
}

impl Default for IndexSets {
    fn default() -> Self {
        Self {
            p: vec![2.0],
            q: vec![2.0],
            r: vec![2.0],
            s: vec![0.5],
            ell: vec![0.0, 1.0, 2.0],
            theta: vec![0.25, 0.5, 0.75],
            pq: vec![[2.0, 2.0]],
            scales: vec![1],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeAxis {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TimeAxis {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        if !(self.t_start >= 0.0 && self.t_end > self.t_start && self.samples >= 2) {
            return Err(CliError::Spec(format!(
                "time axis needs 0 <= t_start < t_end and at least 2 samples, got [{}, {}] x {}",
                self.t_start, self.t_end, self.samples
            )));
        }
        Ok(match self.spacing {
            Spacing::Linear => (0..self.samples)
                .map(|i| self.t_start + (self.t_end - self.t_start) * i as f64 / (self.samples - 1) as f64)
                .collect(),
            Spacing::Log => {
                if self.t_start <= 0.0 {
                    return Err(CliError::Spec("log spacing needs t_start > 0".into()));
                }
                besovpnp_core::numeric::log_space(self.t_start, self.t_end, self.samples)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGrid {
    /// Sample times on the torus.
    pub torus: TimeAxis,
    /// Sample times for the whole-space oracle, if wanted.
    pub oracle: Option<TimeAxis>,
    /// Fit window; the default depends on the experiment.
    pub fit_window: Option<[f64; 2]>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            torus: TimeAxis {
                t_start: 0.0,
                t_end: 1.0,
                samples: 11,
                spacing: Spacing::Linear,
            },
            oracle: None,
            fit_window: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Fitted slope against theory.
    pub slope: f64,
    /// Torus against whole-space oracle, relative.
    pub oracle: f64,
    /// Relative increase allowed in monotone series.
    pub monotone: f64,
    /// Partition, reconstruction and orthogonality defects.
    pub lp: f64,
    /// Exact identities, relative.
    pub identity: f64,
    /// Bony identity, relative.
    pub bony: f64,
    /// Interpolation ratio excess over one.
    pub interpolation: f64,
    /// Critical-norm scaling defect, relative.
    pub scaling: f64,
    /// Absolute drift of the charge means.
    pub mass: f64,
    /// `‖∇·u‖ / ‖∇u‖`.
    pub divergence: f64,
    /// Lower bound on the observed temporal order.
    pub order: f64,
    /// Relative gap between charge and heat-baseline slopes.
    pub baseline: f64,
    /// Regression bound on the negative-norm ratio.
    pub negative_norm: f64,
    /// Relative slack of the `e^{-KY}` monotonicity scan.
    pub monotonicity_scan: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slope: 0.03,
            oracle: 0.02,
            monotone: 1e-12,
            lp: 1e-12,
            identity: 1e-10,
            bony: 1e-11,
            interpolation: 1e-10,
            scaling: 1e-10,
            mass: 1e-12,
            divergence: 1e-10,
            order: 1.9,
            baseline: 0.15,
            negative_norm: 1.01,
            monotonicity_scan: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Experiment kind run for every seed.
    pub kind: String,
    pub seeds: Vec<u64>,
}

fn check_exponents(name: &str, xs: &[f64]) -> CliResult<()> {
    for &x in xs {
        BesovIndex::new(0.0, x, 1.0).map_err(|e| CliError::Spec(format!("indices.{name}: {e}")))?;
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn validate(&self) -> CliResult<()> {
        if !crate::experiments::KINDS.contains(&self.kind.as_str()) {
            return Err(CliError::Spec(format!(
                "kind: unknown experiment `{}` (expected one of {})",
                self.kind,
                crate::experiments::KINDS.join(", ")
            )));
        }
        self.grid.grid().map_err(|e| CliError::Spec(format!("grid: {e}")))?;
        check_exponents("p", &self.indices.p)?;
        check_exponents("q", &self.indices.q)?;
        check_exponents("r", &self.indices.r)?;
        for pq in &self.indices.pq {
            check_exponents("pq", pq)?;
        }
        for &t in &self.indices.theta {
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Spec(format!("indices.theta: {t} outside [0, 1]")));
            }
        }
        self.solver
            .params
            .validate()
            .map_err(|e| CliError::Spec(format!("solver.params: {e}")))?;
        if !(self.solver.dt > 0.0) || !(self.solver.t_end > 0.0) || self.solver.diagnostics_stride == 0 {
            return Err(CliError::Spec("solver: dt, t_end and diagnostics_stride must be positive".into()));
        }
        if self.kind == "sweep" {
            let sw = self
                .sweep
                .as_ref()
                .ok_or_else(|| CliError::Spec("sweep: section required for kind `sweep`".into()))?;
            if sw.kind == "sweep" || !crate::experiments::KINDS.contains(&sw.kind.as_str()) {
                return Err(CliError::Spec(format!("sweep.kind: cannot sweep `{}`", sw.kind)));
            }
            if sw.seeds.is_empty() {
                return Err(CliError::Spec("sweep.seeds: empty".into()));
            }
        }
        Ok(())
    }

    /// Normalized echo: defaults filled, keys sorted, 17-digit floats.
    pub fn normalized(&self) -> CliResult<String> {
        crate::format::json(self)
    }
}

pub fn parse_spec_str(text: &str) -> CliResult<ExperimentSpec> {
    let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| CliError::Spec(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

pub fn parse_spec(path: &Path) -> CliResult<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    parse_spec_str(&text)
}
