//! Decay suite for a full NSPNP run: functionals, monotonicity scan,
//! negative-norm bound and a pure-heat baseline on the same window.

use serde::{Deserialize, Serialize};

use super::fit::{fit_power_law, theory_exponent, DecayReport, PowerLawFit};
use super::functionals::{
    admissible_negative_index, compute_functionals, default_k_grid, monotonicity_scan,
    negative_norm_preservation, EnergyFunctionals, FunctionalIndices, MonotonicityReport,
    NegativeNormReport, NormRecorder, NormTrajectory,
};
use crate::error::Result;
use crate::heat::heat_multiplier;
use crate::solver::{simulate, FluidState, Observer, SolverConfig, StepDiagnostics};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySuiteConfig {
    pub indices: FunctionalIndices,
    /// `ℓ` values whose `F`-type norms get a decay report.
    pub ells: Vec<f64>,
    /// Defaults to `[t_end/10, min(t_end, validity window)]`.
    pub fit_window: Option<(f64, f64)>,
    pub slope_tolerance: f64,
    /// Allowed relative gap between the charge slope and the heat baseline.
    pub baseline_tolerance: f64,
    pub k_grid: Vec<f64>,
    pub monotone_slack: f64,
    pub negative_norm_bound: f64,
}

impl Default for DecaySuiteConfig {
    fn default() -> Self {
        Self {
            indices: FunctionalIndices {
                p: 2.0,
                q: 2.0,
                r: 2.0,
                ell: 0.0,
                s: 0.5,
            },
            ells: vec![0.0, 1.0],
            fit_window: None,
            slope_tolerance: 0.1,
            baseline_tolerance: 0.15,
            k_grid: default_k_grid(),
            monotone_slack: 1e-6,
            negative_norm_bound: 1.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub window: (f64, f64),
    /// Fit of `‖v − v̄‖_{L²} + ‖w − w̄‖_{L²}`.
    pub coupled: PowerLawFit,
    /// Fit of `‖e^{tD₁Δ}(v₀ − w₀)‖_{L²}`.
    pub heat: PowerLawFit,
    pub relative_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationSummary {
    pub max_mass_drift_v: f64,
    pub max_mass_drift_w: f64,
    pub max_divergence: f64,
    pub max_force_gap: f64,
}

impl ConservationSummary {
    pub fn from_diagnostics(d: &[StepDiagnostics]) -> Self {
        let (v0, w0) = d.first().map_or((0.0, 0.0), |x| (x.mass_v, x.mass_w));
        let max = |f: &dyn Fn(&StepDiagnostics) -> f64| d.iter().map(f).fold(0.0, f64::max);
        Self {
            max_mass_drift_v: max(&|x| (x.mass_v - v0).abs()),
            max_mass_drift_w: max(&|x| (x.mass_w - w0).abs()),
            max_divergence: max(&|x| x.div_u_norm),
            max_force_gap: max(&|x| x.force_gap),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySuiteOutcome {
    pub diagnostics: Vec<StepDiagnostics>,
    pub trajectory: NormTrajectory,
    pub functionals: EnergyFunctionals,
    /// Heat baseline `‖e^{tD₁Δ}(v₀ − w₀)‖_{L²}` at the recorded times.
    pub heat_baseline: Vec<f64>,
    /// Against the whole-space exponents; informative at desk scale.
    pub reports: Vec<DecayReport>,
    pub baseline: BaselineComparison,
    pub monotonicity_e: MonotonicityReport,
    pub monotonicity_f: MonotonicityReport,
    pub negative: NegativeNormReport,
    pub conservation: ConservationSummary,
    pub validity_window: f64,
    pub warnings: Vec<String>,
    /// Baseline agreement, a finite `K` for `E`, and the negative-norm bound.
    pub pass: bool,
}

pub fn run_decay_suite(
    initial: FluidState,
    solver: SolverConfig,
    cfg: &DecaySuiteConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<DecaySuiteOutcome> {
    let idx = cfg.indices;
    let grid = solver.grid;
    let validity = grid.validity_window();
    let mut warnings = Vec::new();
    if !admissible_negative_index(idx.p, idx.r, idx.s) {
        warnings.push(format!(
            "s = {} lies outside the admissible range for p = {}, r = {}",
            idx.s, idx.p, idx.r
        ));
    }
    let charge0 = initial.v.sub(&initial.w).without_mean();
    let d1 = solver.params.d1;
    let t_end = solver.t_end;

    let mut recorder = NormRecorder::for_grid(&grid, vec![idx.p, idx.q, idx.r, 2.0])?;
    let traj = {
        let mut all: Vec<&mut dyn Observer> = vec![&mut recorder];
        all.extend(observers.iter_mut().map(|o| &mut **o as &mut dyn Observer));
        simulate(initial, solver, &mut all)?
    };
    let trajectory = recorder.trajectory;
    let times = trajectory.times();
    let functionals = compute_functionals(&trajectory, idx)?;

    let window = cfg.fit_window.unwrap_or((t_end / 10.0, t_end.min(validity)));
    let coupled: Vec<f64> = trajectory.samples.iter().map(|s| s.l2_v + s.l2_w).collect();
    let heat_baseline: Vec<f64> = times
        .iter()
        .map(|&t| heat_multiplier(&charge0, t, d1).l2_norm())
        .collect();
    let fc = fit_power_law(&times, &coupled, window)?;
    let fh = fit_power_law(&times, &heat_baseline, window)?;
    let relative_gap = (fc.slope - fh.slope).abs() / fh.slope.abs().max(f64::MIN_POSITIVE);
    let baseline = BaselineComparison {
        window,
        coupled: fc,
        heat: fh,
        relative_gap,
        tolerance: cfg.baseline_tolerance,
        pass: relative_gap <= cfg.baseline_tolerance && window.1 <= validity * (1.0 + 1e-12),
    };

    let mut reports = Vec::new();
    let theory = |ell: f64| theory_exponent(ell, idx.s, idx.r, idx.p);
    for &ell in &cfg.ells {
        let series = [
            (format!("u:{ell}:{}:1", idx.r), trajectory.velocity(idx.r, ell, 1.0)?),
            (format!("vw:{}:{}:1", ell - 1.0, idx.r), trajectory.charges(idx.r, ell - 1.0, 1.0)?),
        ];
        for (name, vals) in series {
            match fit_power_law(&times, &vals, window) {
                Ok(fit) => reports.push(DecayReport::new(
                    name,
                    window,
                    fit,
                    theory(ell),
                    cfg.slope_tolerance,
                    validity,
                )),
                Err(e) => warnings.push(format!("no fit for {name}: {e}")),
            }
        }
    }

    let monotonicity_e = monotonicity_scan("E", &functionals.e, &functionals.y, &cfg.k_grid, cfg.monotone_slack);
    let monotonicity_f = monotonicity_scan("F", &functionals.f, &functionals.y, &cfg.k_grid, cfg.monotone_slack);
    let negative = negative_norm_preservation(&trajectory, idx.r, idx.s, cfg.negative_norm_bound)?;
    let conservation = ConservationSummary::from_diagnostics(&traj.diagnostics);
    let pass = baseline.pass && monotonicity_e.minimal_k.is_some() && negative.pass;
    Ok(DecaySuiteOutcome {
        diagnostics: traj.diagnostics,
        trajectory,
        functionals,
        heat_baseline,
        reports,
        baseline,
        monotonicity_e,
        monotonicity_f,
        negative,
        conservation,
        validity_window: validity,
        warnings,
        pass,
    })
}
