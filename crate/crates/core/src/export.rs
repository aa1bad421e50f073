//! CSV / JSON emission of landscapes, training runs and property reports.
//! Output is a pure function of the artifact, so repeated emission is
//! byte-identical.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::landscape::LandscapeGrid;
use crate::trainer::RunRecord;
use crate::verification::PropertyReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config {
                field: "format",
                detail: format!("expected `csv` or `json`, got `{other}`"),
            }),
        }
    }
}

impl Format {
    /// Guesses from a file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    Landscape(&'a LandscapeGrid),
    Run(&'a RunRecord),
    Reports(&'a [PropertyReport]),
}

/// Formats like C's `%.9g`.
pub fn sig9(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Serialize)]
struct LandscapeJson<'a> {
    objective: &'a str,
    vocab_size: usize,
    normalization: &'static str,
    p_grid: &'a [f64],
    h_grid: &'a [f64],
    cells: &'a [Vec<Option<f64>>],
}

/// Pretty JSON with a trailing newline.
pub fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn csv<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render(artifact: Artifact<'_>, format: Format) -> Result<String> {
    match (artifact, format) {
        (Artifact::Landscape(g), Format::Csv) => {
            let mut rows = g.feasible_cells();
            rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            csv(
                &["p", "entropy", "magnitude"],
                rows.into_iter().map(|(p, h, m)| [sig9(p), sig9(h), sig9(m)]),
            )
        }
        (Artifact::Landscape(g), Format::Json) => json(&LandscapeJson {
            objective: &g.objective,
            vocab_size: g.vocab_size,
            normalization: "per_grid",
            p_grid: &g.p_grid,
            h_grid: &g.h_grid,
            cells: &g.cells,
        }),
        (Artifact::Run(r), Format::Csv) => csv(
            &["step", "mean_target_p", "mean_alpha"],
            r.mean_target_p
                .iter()
                .zip(&r.mean_alpha)
                .enumerate()
                .map(|(i, (p, a))| [i.to_string(), sig9(*p), sig9(*a)]),
        ),
        (Artifact::Run(r), Format::Json) => json(r),
        (Artifact::Reports(reports), Format::Csv) => csv(
            &["name", "passed", "max_error", "detail"],
            reports.iter().map(|r| {
                [r.name.clone(), r.passed.to_string(), sig9(r.max_error), r.detail.clone()]
            }),
        ),
        (Artifact::Reports(reports), Format::Json) => json(&reports),
    }
}

pub fn emit(artifact: Artifact<'_>, path: impl AsRef<Path>, format: Format) -> Result<()> {
    fs::write(path, render(artifact, format)?)?;
    Ok(())
}
