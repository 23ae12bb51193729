//! On-disk formats: field files (JSON) and time series (CSV).
//!
//! A field file holds one real scalar on the periodic grid:
//!
//! ```json
//! {"format": "stirmix-field", "version": 1, "dim": 2, "n": 64, "time": 0.0,
//!  "values": [ ... n^dim numbers, last axis fastest ... ]}
//! ```
//!
//! The time series CSV has one row per recorded step and the columns
//! `time,h_neg1,l2,grad_lp_<p>...,cost_<p>...,log_grad`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stirmix_core::norms::{MixRecord, MixTimeSeries};
use stirmix_core::{GridSpec, ScalarField};

use crate::error::{CliError, Result};

pub const FIELD_FORMAT: &str = "stirmix-field";
pub const FIELD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub values: Vec<f64>,
}

impl FieldFile {
    pub fn from_field(f: &ScalarField, time: Option<f64>) -> Self {
        Self {
            format: FIELD_FORMAT.to_string(),
            version: FIELD_VERSION,
            dim: f.grid().dim(),
            n: f.grid().n(),
            time,
            values: f.values().into_owned(),
        }
    }

    pub fn to_field(&self) -> std::result::Result<ScalarField, String> {
        if self.format != FIELD_FORMAT {
            return Err(format!("unexpected format tag {:?}", self.format));
        }
        if self.version != FIELD_VERSION {
            return Err(format!("unsupported version {}", self.version));
        }
        let grid = GridSpec::new(self.dim, self.n).map_err(|e| e.to_string())?;
        ScalarField::from_values(grid, self.values.clone()).map_err(|e| e.to_string())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    write_text(path, &text)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

pub fn write_field(path: &Path, f: &ScalarField, time: Option<f64>) -> Result<()> {
    let mut text = serde_json::to_string(&FieldFile::from_field(f, time)).expect("serialisable");
    text.push('\n');
    write_text(path, &text)
}

pub fn read_field(path: &Path) -> Result<(ScalarField, Option<f64>)> {
    let text = read_text(path)?;
    let parse_err = |msg: String| CliError::Parse {
        path: path.to_path_buf(),
        msg,
    };
    let file: FieldFile = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
    let field = file.to_field().map_err(parse_err)?;
    Ok((field, file.time))
}

fn p_label(p: f64) -> String {
    format!("{p}")
}

pub fn timeseries_header(p_list: &[f64]) -> String {
    let mut cols = vec!["time".to_string(), "h_neg1".into(), "l2".into()];
    cols.extend(p_list.iter().map(|&p| format!("grad_lp_{}", p_label(p))));
    cols.extend(p_list.iter().map(|&p| format!("cost_{}", p_label(p))));
    cols.push("log_grad".into());
    cols.join(",")
}

pub fn timeseries_csv(series: &MixTimeSeries) -> String {
    let mut out = timeseries_header(&series.p_list);
    out.push('\n');
    for r in &series.records {
        write!(out, "{:e},{:e},{:e}", r.time, r.h_neg1, r.l2).unwrap();
        for g in &r.grad_lp {
            write!(out, ",{g:e}").unwrap();
        }
        for c in &r.cost {
            write!(out, ",{c:e}").unwrap();
        }
        writeln!(out, ",{:e}", r.log_grad).unwrap();
    }
    out
}

pub fn parse_timeseries(text: &str, path: &Path) -> Result<MixTimeSeries> {
    let err = |msg: String| CliError::Parse {
        path: path.to_path_buf(),
        msg,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let p_list: Vec<f64> = cols
        .iter()
        .filter_map(|c| c.strip_prefix("grad_lp_"))
        .map(|p| p.parse::<f64>().map_err(|e| err(format!("column {c}: {e}", c = p))))
        .collect::<Result<_>>()?;
    if header != timeseries_header(&p_list) {
        return Err(err(format!("unexpected header {header:?}")));
    }
    let np = p_list.len();
    let mut series = MixTimeSeries::new(p_list);
    for (line_no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(format!("line {}: {e}", line_no + 2)))?;
        if vals.len() != cols.len() {
            return Err(err(format!("line {}: expected {} fields", line_no + 2, cols.len())));
        }
        series
            .push(MixRecord {
                time: vals[0],
                h_neg1: vals[1],
                l2: vals[2],
                grad_lp: vals[3..3 + np].to_vec(),
                cost: vals[3 + np..3 + 2 * np].to_vec(),
                log_grad: vals[3 + 2 * np],
                degenerate: false,
            })
            .map_err(|e| err(format!("line {}: {e}", line_no + 2)))?;
    }
    Ok(series)
}
