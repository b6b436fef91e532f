use serde_json::json;

use besovpnp_core::harness::{fit_power_law, theory_exponent};
use besovpnp_core::heat::{bound_prefactor, heat_decay_experiment, oracle_decay_series, HeatDecayConfig};
use besovpnp_core::littlewood_paley::build_partition;

use super::{scalar_family, seeded_scalar, to_value, Experiment, Outcome, Plot, ScalarData, Verdict};
use crate::error::{CliError, CliResult};
use crate::plot::{positive_part, Axes, Guide};
use crate::spec::ExperimentSpec;
use crate::table::{norm_header, Table};

/// Exact heat flow on the grid, optionally against the whole-space
/// radial oracle.
pub struct HeatDecay;

fn guides(ells: &[f64], s: f64) -> Vec<Guide> {
    ells.iter()
        .map(|&ell| Guide {
            slope: -(ell + s) / 2.0,
            label: format!("slope {}", -(ell + s) / 2.0),
        })
        .collect()
}

impl Experiment for HeatDecay {
    fn kind(&self) -> &'static str {
        "heat-decay"
    }

    fn run(&self, spec: &ExperimentSpec) -> CliResult<Outcome> {
        let grid = spec.grid.grid()?;
        let part = build_partition(&grid, spec.grid.sharpness)?;
        let tol = &spec.tolerances;
        let ells = &spec.indices.ell;
        let profile = match scalar_family(spec)? {
            ScalarData::Profile(p) => Some(p),
            ScalarData::Law => None,
        };
        let s = match &profile {
            Some(p) => p.effective_s(),
            None => *spec
                .indices
                .s
                .first()
                .ok_or_else(|| CliError::Spec("indices.s: needs a decay index".into()))?,
        };
        let initial = seeded_scalar(spec, &grid, 0)?;
        let times = spec.times.torus.values()?;
        let fit_window = spec.times.fit_window.map(|w| (w[0], w[1]));

        let mut out = Outcome::new(json!({}));
        let mut runs = Vec::new();
        let mut slopes = Table::new("slopes", "ell", ells.clone());
        for &p in &spec.indices.p {
            let cfg = HeatDecayConfig {
                ells: ells.clone(),
                p,
                times: times.clone(),
                s,
                fit_window,
                slope_tolerance: tol.slope,
                monotone_slack: tol.monotone,
            };
            let res = heat_decay_experiment(&part, &initial, &cfg, profile.as_ref())?;
            out.verdicts.push(Verdict::at_most(
                format!("monotone:p={p}"),
                res.monotone_violation,
                tol.monotone,
            ));
            for o in &res.oracle {
                out.verdicts.push(Verdict::at_most(
                    format!("oracle-fidelity:ell={}", o.ell),
                    o.max_rel_diff,
                    tol.oracle,
                ));
            }
            let mut table = Table::series(format!("torus-p{p}"), times.clone());
            let mut plot = Vec::new();
            for (ell, series) in &res.series {
                table.push(norm_header("u", *ell, p, 1.0), series.aggregate.clone())?;
                plot.push(positive_part(format!("l={ell}"), &times, &series.aggregate));
            }
            out.tables.push(table);
            if plot.iter().any(|s| !s.x.is_empty()) {
                out.plots.push(Plot {
                    name: format!("torus-p{p}"),
                    series: plot,
                    axes: Axes {
                        title: format!("heat flow on the box, p = {p}"),
                        x_label: "t".into(),
                        y_label: "Besov norm".into(),
                        guides: guides(ells, s),
                    },
                });
            }
            let col: Vec<f64> = ells
                .iter()
                .map(|ell| {
                    res.reports
                        .iter()
                        .find(|r| r.quantity == format!("u:{ell}:{p}:1"))
                        .map_or(f64::NAN, |r| r.fit.slope)
                })
                .collect();
            slopes.push(format!("torus:p={p}"), col)?;
            runs.push(res);
        }
        slopes.push(
            "theory",
            ells.iter().map(|&ell| theory_exponent(ell, s, 2.0, 2.0)).collect(),
        )?;

        let mut oracle_report = Vec::new();
        if let (Some(axis), Some(prof)) = (&spec.times.oracle, &profile) {
            let ts = axis.values()?;
            let window = (axis.t_start, axis.t_end);
            let mut table = Table::series("oracle", ts.clone());
            let mut plot = Vec::new();
            let mut col = Vec::new();
            for &ell in ells {
                let vals = oracle_decay_series(prof, ell, &ts, part.sharpness())?;
                let fit = fit_power_law(&ts, &vals, window)?;
                let theory = -(ell + s) / 2.0;
                out.verdicts.push(Verdict::at_most(
                    format!("oracle-slope:ell={ell}"),
                    (fit.slope - theory).abs(),
                    tol.slope,
                ));
                // prefactor measured on the first half of the window (in log
                // time), bound checked on the second
                let mid = ts.partition_point(|&t| t <= (axis.t_start * axis.t_end).sqrt());
                let mut bounds = Vec::new();
                for &sb in &spec.indices.s {
                    let e = -(ell + sb) / 2.0;
                    let early = bound_prefactor(&ts[..mid], &vals[..mid], e);
                    let late = bound_prefactor(&ts[mid..], &vals[mid..], e);
                    out.verdicts.push(Verdict::at_most(
                        format!("oracle-bound:ell={ell}:s={sb}"),
                        late.prefactor / early.prefactor,
                        1.0,
                    ));
                    bounds.push(json!({"s": sb, "measured": to_value(&early)?, "later": to_value(&late)?}));
                }
                table.push(norm_header("u", ell, 2.0, 1.0), vals.clone())?;
                plot.push(positive_part(format!("l={ell}"), &ts, &vals));
                col.push(fit.slope);
                oracle_report.push(json!({
                    "ell": ell,
                    "fit": to_value(&fit)?,
                    "theory": theory,
                    "bounds": to_value(&bounds)?,
                }));
            }
            slopes.push("oracle", col)?;
            out.tables.push(table);
            out.plots.push(Plot {
                name: "oracle".into(),
                series: plot,
                axes: Axes {
                    title: "whole-space heat flow".into(),
                    x_label: "t".into(),
                    y_label: "Besov norm".into(),
                    guides: guides(ells, s),
                },
            });
        }
        out.tables.push(slopes);
        out.report = json!({
            "decay_index": s,
            "validity_window": grid.validity_window(),
            "partition_unity_defect": part.unity_defect(),
            "torus": runs
                .iter()
                .map(|r| {
                    Ok(json!({
                        "p": r.p,
                        "monotone_violation": r.monotone_violation,
                        "monotone": r.monotone,
                        "reports": to_value(&r.reports)?,
                        "oracle": r.oracle.iter().map(|o| json!({
                            "ell": o.ell,
                            "window": [o.window.0, o.window.1],
                            "max_rel_diff": o.max_rel_diff,
                        })).collect::<Vec<_>>(),
                        "warnings": r.warnings,
                    }))
                })
                .collect::<CliResult<Vec<_>>>()?,
            "oracle": oracle_report,
        });
        Ok(out)
    }
}
