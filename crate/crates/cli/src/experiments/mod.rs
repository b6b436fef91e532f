//! Experiment kinds, looked up by name from the spec.

mod checks;
mod heat;
mod nspnp;
mod sweep;

use serde::Serialize;
use serde_json::Value;

use besovpnp_core::heat::{profile_spectrum, RadialProfile};
use besovpnp_core::solver::{
    gaussian_blob_state, random_state, FluidState, GaussianBlobs, PhysicalParams, RandomInitialData,
};
use besovpnp_core::spectral::{random_spectrum, spectrum_law, GridSpec, SpectrumField, SPECTRUM_LAWS};

use crate::error::{CliError, CliResult};
use crate::plot::{Axes, PlotSeries};
use crate::spec::ExperimentSpec;
use crate::table::Table;

pub use checks::{BesovNorm, IdentityCheck, LpCheck};
pub use heat::HeatDecay;
pub use nspnp::{NspnpDecay, NspnpSimulate};
pub use sweep::Sweep;

/// One pass/fail line of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    /// Pass when `value <= limit` (or `>=` for lower bounds).
    pub limit: f64,
    pub lower_bound: bool,
    pub pass: bool,
}

impl Verdict {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            lower_bound: false,
            pass: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            lower_bound: true,
            pass: value >= limit,
        }
    }

    /// A boolean verdict recorded as `1 ≥ 1` or `0 ≥ 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Clone, Debug)]
pub struct Plot {
    pub name: String,
    pub series: Vec<PlotSeries>,
    pub axes: Axes,
}

#[derive(Clone, Debug)]
pub struct Checkpointed {
    pub state: FluidState,
    pub params: PhysicalParams,
    pub step: u64,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    pub verdicts: Vec<Verdict>,
    pub checkpoint: Option<Checkpointed>,
    /// Sub-runs written as nested bundles.
    pub children: Vec<(String, ExperimentSpec, Outcome)>,
}

impl Outcome {
    pub fn new(report: Value) -> Self {
        Self {
            report,
            tables: Vec::new(),
            plots: Vec::new(),
            verdicts: Vec::new(),
            checkpoint: None,
            children: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass) && self.children.iter().all(|(_, _, c)| c.pass())
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

pub trait Experiment: Send + Sync {
    fn kind(&self) -> &'static str;
    fn run(&self, spec: &ExperimentSpec) -> CliResult<Outcome>;
}

pub const KINDS: &[&str] = &[
    "heat-decay",
    "nspnp-simulate",
    "nspnp-decay",
    "lp-check",
    "besov-norm",
    "identity-check",
    "sweep",
];

pub fn experiment(kind: &str) -> CliResult<Box<dyn Experiment>> {
    Ok(match kind {
        "heat-decay" => Box::new(HeatDecay),
        "nspnp-simulate" => Box::new(NspnpSimulate),
        "nspnp-decay" => Box::new(NspnpDecay),
        "lp-check" => Box::new(LpCheck),
        "besov-norm" => Box::new(BesovNorm),
        "identity-check" => Box::new(IdentityCheck),
        "sweep" => Box::new(Sweep),
        other => return Err(CliError::Spec(format!("kind: unknown experiment `{other}`"))),
    })
}

pub fn run_experiment(spec: &ExperimentSpec) -> CliResult<Outcome> {
    spec.validate()?;
    experiment(&spec.kind)?.run(spec)
}

pub(crate) fn to_value<T: Serialize>(x: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(x)?)
}

/// Scalar data for the check suites and heat runs: a radial Gaussian
/// profile or a seeded spectrum law.
pub(crate) enum ScalarData {
    Profile(RadialProfile),
    Law,
}

pub(crate) fn scalar_family(spec: &ExperimentSpec) -> CliResult<ScalarData> {
    let init = &spec.initial;
    match init.family.as_str() {
        "gaussian-profile" => Ok(ScalarData::Profile(RadialProfile::gaussian(
            init.param_or("amplitude", 1.0),
            init.param("width")?,
        ))),
        name if SPECTRUM_LAWS.iter().any(|(n, _)| *n == name) => Ok(ScalarData::Law),
        other => Err(CliError::Spec(format!(
            "initial.family: `{other}` is not a scalar family (gaussian-profile or a spectrum law)"
        ))),
    }
}

/// The `k`-th seeded scalar field of the spec.
pub(crate) fn seeded_scalar(spec: &ExperimentSpec, grid: &GridSpec, k: u64) -> CliResult<SpectrumField> {
    let init = &spec.initial;
    match scalar_family(spec)? {
        ScalarData::Profile(p) => Ok(profile_spectrum(grid, &p)?),
        ScalarData::Law => {
            let law = spectrum_law(&init.family, &init.params)?;
            Ok(random_spectrum(grid, law.as_ref(), init.seed.wrapping_add(k))?)
        }
    }
}

pub(crate) fn fluid_initial(spec: &ExperimentSpec, grid: &GridSpec) -> CliResult<FluidState> {
    let init = &spec.initial;
    match init.family.as_str() {
        "gaussian-blobs" => {
            let recipe = GaussianBlobs {
                width: init.param("width")?,
                velocity_amplitude: init.param("velocity_amplitude")?,
                charge_amplitudes: [init.param("v_amplitude")?, init.param("w_amplitude")?],
            };
            Ok(gaussian_blob_state(grid, &recipe, init.seed)?)
        }
        "random-state" => {
            let (j1, j2) = (init.param_or("j1", 0.0), init.param_or("j2", 1.0));
            let band = std::collections::BTreeMap::from([("j1".to_string(), j1), ("j2".to_string(), j2)]);
            let law = spectrum_law("white-band", &band)?;
            let recipe = RandomInitialData {
                velocity_law: law.as_ref(),
                charge_law: law.as_ref(),
                amplitudes: [
                    init.param("u_amplitude")?,
                    init.param("v_amplitude")?,
                    init.param("w_amplitude")?,
                ],
                background: init.param_or("background", 1.0),
            };
            Ok(random_state(grid, &recipe, init.seed)?)
        }
        other => Err(CliError::Spec(format!(
            "initial.family: `{other}` is not a fluid family (gaussian-blobs or random-state)"
        ))),
    }
}
