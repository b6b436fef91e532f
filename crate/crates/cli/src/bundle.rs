//! Result bundles: one directory per run, written to a temporary sibling
//! and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use besovpnp_core::solver::{encode_checkpoint, read_checkpoint};

use crate::error::{io_at, CliError, CliResult};
use crate::experiments::{Outcome, Verdict};
use crate::format::json;
use crate::plot::render_svg;
use crate::spec::{parse_spec_str, ExperimentSpec};
use crate::table::parse_csv;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    /// `serial` or `parallel`.
    pub mode: String,
    pub threads: usize,
}

impl Environment {
    pub fn current(serial: bool) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            mode: if serial { "serial" } else { "parallel" }.to_string(),
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleFiles {
    pub spec: String,
    pub report: String,
    pub csv: Vec<String>,
    pub svg: Vec<String>,
    pub checkpoint: Option<String>,
    pub bundles: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleSummary {
    pub kind: String,
    pub pass: bool,
    pub verdicts: Vec<VerdictLine>,
    pub environment: Environment,
    pub files: BundleFiles,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictLine {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub lower_bound: bool,
    pub pass: bool,
}

impl From<&Verdict> for VerdictLine {
    fn from(v: &Verdict) -> Self {
        Self {
            name: v.name.clone(),
            value: v.value,
            limit: v.limit,
            lower_bound: v.lower_bound,
            pass: v.pass,
        }
    }
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(io_at(path))
}

fn write_into(dir: &Path, spec: &ExperimentSpec, out: &Outcome, env: &Environment) -> CliResult<BundleSummary> {
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    write(&dir.join("spec.json"), &spec.normalized()?)?;
    write(&dir.join("report.json"), &json(&out.report)?)?;
    let mut csv = Vec::new();
    for t in &out.tables {
        let name = format!("{}.csv", t.name);
        write(&dir.join(&name), &t.to_csv())?;
        csv.push(name);
    }
    let mut svg = Vec::new();
    for p in &out.plots {
        let name = format!("{}.svg", p.name);
        write(&dir.join(&name), &render_svg(&p.series, &p.axes)?)?;
        svg.push(name);
    }
    let checkpoint = match &out.checkpoint {
        Some(c) => {
            let name = "final.nspnp1".to_string();
            let mut bytes = Vec::new();
            encode_checkpoint(&mut bytes, &c.state, &c.params, c.step)?;
            let path = dir.join(&name);
            fs::write(&path, bytes).map_err(io_at(&path))?;
            Some(name)
        }
        None => None,
    };
    let mut bundles = Vec::new();
    for (name, child_spec, child) in &out.children {
        write_into(&dir.join(name), child_spec, child, env)?;
        bundles.push(name.clone());
    }
    let summary = BundleSummary {
        kind: spec.kind.clone(),
        pass: out.pass(),
        verdicts: out.verdicts.iter().map(VerdictLine::from).collect(),
        environment: env.clone(),
        files: BundleFiles {
            spec: "spec.json".into(),
            report: "report.json".into(),
            csv,
            svg,
            checkpoint,
            bundles,
        },
    };
    write(&dir.join("summary.json"), &json(&summary)?)?;
    Ok(summary)
}

/// Writes the bundle to `dir`. An existing bundle there is replaced; any
/// other existing path is an error.
pub fn write_bundle(dir: &Path, spec: &ExperimentSpec, out: &Outcome, env: &Environment) -> CliResult<BundleSummary> {
    let name = dir
        .file_name()
        .ok_or_else(|| CliError::Spec(format!("output: `{}` has no directory name", dir.display())))?
        .to_string_lossy()
        .to_string();
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(io_at(&parent))?;
    let tmp = parent.join(format!(".{name}.tmp-{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(io_at(&tmp))?;
    }
    let summary = match write_into(&tmp, spec, out, env) {
        Ok(s) => s,
        Err(e) => {
            let _ = fs::remove_dir_all(&tmp);
            return Err(e);
        }
    };
    if dir.exists() {
        if !dir.join("summary.json").is_file() {
            let _ = fs::remove_dir_all(&tmp);
            return Err(CliError::Spec(format!(
                "output: `{}` exists and is not a result bundle",
                dir.display()
            )));
        }
        fs::remove_dir_all(dir).map_err(io_at(dir))?;
    }
    fs::rename(&tmp, dir).map_err(io_at(dir))?;
    Ok(summary)
}

/// Reads a bundle back and checks that every referenced file exists and
/// parses.
pub fn verify_bundle(dir: &Path) -> CliResult<BundleSummary> {
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(io_at(&p))
    };
    let summary: BundleSummary = serde_json::from_str(&read("summary.json")?)?;
    let f = &summary.files;
    parse_spec_str(&read(&f.spec)?)?;
    let _: serde_json::Value = serde_json::from_str(&read(&f.report)?)?;
    for c in &f.csv {
        parse_csv(c, &read(c)?)?;
    }
    for s in &f.svg {
        let text = read(s)?;
        if !text.starts_with("<svg") || !text.trim_end().ends_with("</svg>") {
            return Err(CliError::Plot(format!("{s}: not an svg document")));
        }
    }
    if let Some(c) = &f.checkpoint {
        read_checkpoint(&dir.join(c))?;
    }
    for b in &f.bundles {
        verify_bundle(&dir.join(b))?;
    }
    Ok(summary)
}
