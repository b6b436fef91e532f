//! Flat CSV tables. The first column is the sampling coordinate (`time`
//! for series); norm columns are headed `name:s:p:r`.

use crate::error::{CliError, CliResult};
use crate::format::float;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File stem inside the bundle.
    pub name: String,
    pub key: String,
    pub keys: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

pub fn norm_header(name: &str, s: f64, p: f64, r: f64) -> String {
    let num = |x: f64| {
        if x.is_infinite() {
            "inf".to_string()
        } else {
            format!("{x}")
        }
    };
    format!("{name}:{}:{}:{}", num(s), num(p), num(r))
}

impl Table {
    pub fn new(name: impl Into<String>, key: impl Into<String>, keys: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            key: key.into(),
            keys,
            columns: Vec::new(),
        }
    }

    pub fn series(name: impl Into<String>, times: Vec<f64>) -> Self {
        Self::new(name, "time", times)
    }

    pub fn push(&mut self, header: impl Into<String>, values: Vec<f64>) -> CliResult<()> {
        let header = header.into();
        if values.len() != self.keys.len() {
            return Err(CliError::Spec(format!(
                "column `{header}` has {} rows, table `{}` has {}",
                values.len(),
                self.name,
                self.keys.len()
            )));
        }
        self.columns.push((header, values));
        Ok(())
    }

    pub fn with(mut self, header: impl Into<String>, values: Vec<f64>) -> CliResult<Self> {
        self.push(header, values)?;
        Ok(self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.key);
        for (h, _) in &self.columns {
            out.push(',');
            out.push_str(h);
        }
        out.push('\n');
        for (i, k) in self.keys.iter().enumerate() {
            out.push_str(&float(*k));
            for (_, c) in &self.columns {
                out.push(',');
                out.push_str(&float(c[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Parses a table written by [`Table::to_csv`].
pub fn parse_csv(name: &str, text: &str) -> CliResult<Table> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::Spec(format!("{name}: empty csv")))?;
    let mut heads = header.split(',');
    let key = heads.next().unwrap_or_default().to_string();
    let names: Vec<String> = heads.map(str::to_string).collect();
    let mut keys = Vec::new();
    let mut cols = vec![Vec::new(); names.len()];
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() + 1 {
            return Err(CliError::Spec(format!("{name}: row {row} has {} cells", cells.len())));
        }
        let num = |c: &str| {
            c.parse::<f64>()
                .map_err(|e| CliError::Spec(format!("{name}: row {row}: `{c}`: {e}")))
        };
        keys.push(num(cells[0])?);
        for (c, cell) in cols.iter_mut().zip(&cells[1..]) {
            c.push(num(cell)?);
        }
    }
    Ok(Table {
        name: name.to_string(),
        key,
        keys,
        columns: names.into_iter().zip(cols).collect(),
    })
}
