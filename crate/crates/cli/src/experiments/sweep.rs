use rayon::prelude::*;
use serde_json::json;

use super::{run_experiment, Experiment, Outcome, Verdict};
use crate::error::{CliError, CliResult};
use crate::spec::ExperimentSpec;

/// Reruns one experiment kind for each listed seed; every run becomes its
/// own sub-bundle `seed-<n>`.
pub struct Sweep;

impl Experiment for Sweep {
    fn kind(&self) -> &'static str {
        "sweep"
    }

    fn run(&self, spec: &ExperimentSpec) -> CliResult<Outcome> {
        let sw = spec
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Spec("sweep: section required".into()))?;
        let children: Vec<(String, ExperimentSpec, Outcome)> = sw
            .seeds
            .par_iter()
            .map(|&seed| {
                let mut child = spec.clone();
                child.kind = sw.kind.clone();
                child.sweep = None;
                child.output = None;
                child.initial.seed = seed;
                let out = run_experiment(&child)?;
                Ok((format!("seed-{seed}"), child, out))
            })
            .collect::<CliResult<_>>()?;
        let mut out = Outcome::new(json!({
            "kind": sw.kind,
            "seeds": sw.seeds,
            "runs": children.iter().map(|(name, _, o)| json!({"bundle": name, "pass": o.pass()})).collect::<Vec<_>>(),
        }));
        out.verdicts = children
            .iter()
            .map(|(name, _, o)| Verdict::holds(name.clone(), o.pass()))
            .collect();
        out.children = children;
        Ok(out)
    }
}
