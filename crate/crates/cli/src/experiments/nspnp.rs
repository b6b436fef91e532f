use serde_json::json;

use besovpnp_core::harness::{run_decay_suite, DecaySuiteConfig, FunctionalIndices};
use besovpnp_core::solver::{
    lorentz_crosscheck, manufactured_order, simulate, Observer, SolverConfig, StepDiagnostics,
};

use super::{fluid_initial, to_value, Checkpointed, Experiment, Outcome, Plot, Verdict};
use crate::error::{CliError, CliResult};
use crate::plot::{positive_part, Axes, Guide};
use crate::spec::ExperimentSpec;
use crate::table::{norm_header, Table};

fn first(xs: &[f64], name: &str) -> CliResult<f64> {
    xs.first()
        .copied()
        .ok_or_else(|| CliError::Spec(format!("indices.{name}: needs at least one value")))
}

fn solver_config(spec: &ExperimentSpec) -> CliResult<SolverConfig> {
    let s = &spec.solver;
    let mut cfg = SolverConfig::new(spec.grid.grid()?, s.dt, s.t_end);
    cfg.params = s.params;
    cfg.integrator = s.integrator.clone();
    cfg.dealias = s.dealias;
    cfg.diagnostics_stride = s.diagnostics_stride;
    cfg.besov_pq = Some((first(&spec.indices.p, "p")?, first(&spec.indices.q, "q")?));
    Ok(cfg)
}

fn diagnostics_table(d: &[StepDiagnostics]) -> CliResult<Table> {
    let col = |f: &dyn Fn(&StepDiagnostics) -> f64| d.iter().map(f).collect::<Vec<_>>();
    Table::series("diagnostics", col(&|x| x.time))
        .with("step", col(&|x| x.step as f64))?
        .with("div_u", col(&|x| x.div_u_norm))?
        .with("mass_v", col(&|x| x.mass_v))?
        .with("mass_w", col(&|x| x.mass_w))?
        .with("l2_u", col(&|x| x.l2_u))?
        .with("l2_v", col(&|x| x.l2_v))?
        .with("l2_w", col(&|x| x.l2_w))?
        .with("min_v", col(&|x| x.min_v))?
        .with("min_w", col(&|x| x.min_w))?
        .with("critical_energy", col(&|x| x.besov_e.unwrap_or(f64::NAN)))?
        .with("cfl", col(&|x| x.cfl))?
        .with("force_gap", col(&|x| x.force_gap))
}

fn drift(d: &[StepDiagnostics], f: impl Fn(&StepDiagnostics) -> f64) -> f64 {
    let f0 = d.first().map_or(0.0, &f);
    d.iter().map(|x| (f(x) - f0).abs()).fold(0.0, f64::max)
}

fn conservation_verdicts(spec: &ExperimentSpec, d: &[StepDiagnostics]) -> Vec<Verdict> {
    let tol = &spec.tolerances;
    let max = |f: &dyn Fn(&StepDiagnostics) -> f64| d.iter().map(f).fold(0.0, f64::max);
    vec![
        Verdict::at_most("mass-drift-v", drift(d, |x| x.mass_v), tol.mass),
        Verdict::at_most("mass-drift-w", drift(d, |x| x.mass_w), tol.mass),
        Verdict::at_most("divergence", max(&|x| x.div_u_norm), tol.divergence),
        Verdict::at_most("lorentz-crosscheck", max(&|x| x.force_gap), tol.identity),
    ]
}

/// A plain run with diagnostics, an optional checkpoint and an optional
/// temporal order study.
pub struct NspnpSimulate;

impl Experiment for NspnpSimulate {
    fn kind(&self) -> &'static str {
        "nspnp-simulate"
    }

    fn run(&self, spec: &ExperimentSpec) -> CliResult<Outcome> {
        let cfg = solver_config(spec)?;
        let initial = fluid_initial(spec, &cfg.grid)?;
        let initial_gap = lorentz_crosscheck(&initial, &cfg.params)?;
        let steps = cfg.steps() as u64;
        let traj = simulate(initial, cfg, &mut [])?;
        let d = &traj.diagnostics;
        let mut out = Outcome::new(json!({}));
        out.verdicts = conservation_verdicts(spec, d);
        let order = match &spec.solver.manufactured {
            Some(m) => {
                let study = manufactured_order(m.n, spec.solver.params, &spec.solver.integrator, m.dt, m.t_end)?;
                out.verdicts.push(Verdict::at_least(
                    "manufactured-order",
                    study.observed_order,
                    spec.tolerances.order,
                ));
                Some(study)
            }
            None => None,
        };
        let times: Vec<f64> = d.iter().map(|x| x.time).collect();
        out.plots.push(Plot {
            name: "l2".into(),
            series: vec![
                positive_part("u", &times, &d.iter().map(|x| x.l2_u).collect::<Vec<_>>()),
                positive_part("v", &times, &d.iter().map(|x| x.l2_v).collect::<Vec<_>>()),
                positive_part("w", &times, &d.iter().map(|x| x.l2_w).collect::<Vec<_>>()),
            ],
            axes: Axes {
                title: "fluctuation norms".into(),
                x_label: "t".into(),
                y_label: "L2 norm".into(),
                guides: Vec::new(),
            },
        });
        out.plots.retain(|p| p.series.iter().all(|s| !s.x.is_empty()));
        out.tables.push(diagnostics_table(d)?);
        out.report = json!({
            "steps": steps,
            "final_time": traj.final_state.time,
            "initial_lorentz_gap": initial_gap,
            "final": to_value(&d.last())?,
            "manufactured": to_value(&order)?,
        });
        if spec.solver.checkpoint {
            out.checkpoint = Some(Checkpointed {
                state: traj.final_state,
                params: spec.solver.params,
                step: steps,
            });
        }
        Ok(out)
    }
}

/// Full decay suite: functionals, `K`-scan, negative norms and the heat
/// baseline.
pub struct NspnpDecay;

impl Experiment for NspnpDecay {
    fn kind(&self) -> &'static str {
        "nspnp-decay"
    }

    fn run(&self, spec: &ExperimentSpec) -> CliResult<Outcome> {
        let solver = solver_config(spec)?;
        let initial = fluid_initial(spec, &solver.grid)?;
        let idx = &spec.indices;
        let tol = &spec.tolerances;
        let indices = FunctionalIndices {
            p: first(&idx.p, "p")?,
            q: first(&idx.q, "q")?,
            r: first(&idx.r, "r")?,
            ell: first(&idx.ell, "ell")?,
            s: first(&idx.s, "s")?,
        };
        let cfg = DecaySuiteConfig {
            indices,
            ells: idx.ell.clone(),
            fit_window: spec.times.fit_window.map(|w| (w[0], w[1])),
            slope_tolerance: tol.slope,
            baseline_tolerance: tol.baseline,
            monotone_slack: tol.monotonicity_scan,
            negative_norm_bound: tol.negative_norm,
            ..DecaySuiteConfig::default()
        };
        let steps = solver.steps() as u64;
        let mut final_state = None;
        let mut keep = |s: &besovpnp_core::solver::FluidState, _: &StepDiagnostics| {
            final_state = Some(s.clone());
            Ok::<(), String>(())
        };
        let res = {
            let mut obs: [&mut dyn Observer; 1] = [&mut keep];
            run_decay_suite(initial, solver, &cfg, &mut obs)?
        };
        let d = &res.diagnostics;
        let times = res.functionals.times.clone();

        let mut out = Outcome::new(json!({}));
        out.verdicts = conservation_verdicts(spec, d);
        out.verdicts.push(Verdict::at_most(
            "baseline-slope-gap",
            res.baseline.relative_gap,
            tol.baseline,
        ));
        out.verdicts.push(Verdict::holds(
            "fit-window-within-validity",
            res.baseline.window.1 <= res.validity_window * (1.0 + 1e-12),
        ));
        out.verdicts.push(Verdict::holds(
            "energy-finite-k",
            res.monotonicity_e.minimal_k.is_some(),
        ));
        out.verdicts.push(Verdict::at_most(
            "negative-norm-ratio",
            res.negative.ratio,
            tol.negative_norm,
        ));

        let coupled: Vec<f64> = res.trajectory.samples.iter().map(|s| s.l2_v + s.l2_w).collect();
        out.tables.push(
            Table::series("functionals", times.clone())
                .with("E", res.functionals.e.clone())?
                .with("Y", res.functionals.y.clone())?
                .with("F", res.functionals.f.clone())?
                .with("negative_norm", res.negative.series.clone())?
                .with("charge_l2", coupled.clone())?
                .with("heat_baseline", res.heat_baseline.clone())?,
        );
        let mut norms = Table::series("norms", times.clone());
        for &ell in &idx.ell {
            norms.push(norm_header("u", ell, indices.r, 1.0), res.trajectory.velocity(indices.r, ell, 1.0)?)?;
            norms.push(
                norm_header("vw", ell - 1.0, indices.r, 1.0),
                res.trajectory.charges(indices.r, ell - 1.0, 1.0)?,
            )?;
        }
        out.tables.push(norms);
        out.tables.push(diagnostics_table(d)?);
        out.plots.push(Plot {
            name: "baseline".into(),
            series: vec![
                positive_part("charges", &times, &coupled),
                positive_part("heat baseline", &times, &res.heat_baseline),
            ],
            axes: Axes {
                title: "charge decay against the heat baseline".into(),
                x_label: "t".into(),
                y_label: "L2 norm".into(),
                guides: vec![Guide {
                    slope: res.baseline.heat.slope,
                    label: format!("heat slope {:.3}", res.baseline.heat.slope),
                }],
            },
        });
        out.report = json!({
            "steps": steps,
            "validity_window": res.validity_window,
            "smallness": {
                "initial_critical_energy": res.functionals.e.first(),
                "note": "empirical data size; the small-data threshold of the theory is not constructive",
            },
            "baseline": to_value(&res.baseline)?,
            "decay_reports": to_value(&res.reports)?,
            "monotonicity_e": {"minimal_k": res.monotonicity_e.minimal_k, "slack": res.monotonicity_e.slack},
            "monotonicity_f": {"minimal_k": res.monotonicity_f.minimal_k, "slack": res.monotonicity_f.slack},
            "negative_norm": {"r": res.negative.r, "s": res.negative.s, "ratio": res.negative.ratio, "bound": res.negative.bound},
            "conservation": to_value(&res.conservation)?,
            "warnings": res.warnings,
            "suite_pass": res.pass,
        });
        if spec.solver.checkpoint {
            if let Some(state) = final_state {
                out.checkpoint = Some(Checkpointed {
                    state,
                    params: spec.solver.params,
                    step: steps,
                });
            }
        }
        Ok(out)
    }
}
