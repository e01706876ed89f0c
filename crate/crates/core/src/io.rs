//! Dataset CSV format.
//!
//! ```text
//! # grid=midpoint p=50
//! x_1,x_2,…,x_50,y
//! 0.1234,…,0.5
//! ```
//!
//! Predictor columns are the values of `X_i` at the midpoints of a `p`-point
//! grid on [0,1]. Data sampled elsewhere has to be resampled before use.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::estimators::{parse_f64, Dataset};
use crate::grid::{Grid, GridFunction};

pub fn grid_metadata(grid: Grid) -> String {
    format!("# grid=midpoint p={}", grid.len())
}

fn parse_metadata(line: &str) -> Result<Grid> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Format("missing `# grid=midpoint p=<p>` metadata line".into()))?;
    let mut kind = None;
    let mut p = None;
    for tok in body.split_whitespace() {
        match tok.split_once('=') {
            Some(("grid", v)) => kind = Some(v),
            Some(("p", v)) => {
                p = Some(
                    v.parse::<usize>()
                        .map_err(|_| Error::Format(format!("bad grid size `{v}`")))?,
                )
            }
            _ => {}
        }
    }
    match (kind, p) {
        (Some("midpoint"), Some(p)) => Grid::new(p).map_err(|e| Error::Format(e.to_string())),
        (Some(other), Some(_)) => Err(Error::Format(format!("unsupported grid `{other}`"))),
        _ => Err(Error::Format(format!("incomplete grid metadata `{line}`"))),
    }
}

pub fn write_dataset_csv(data: &Dataset) -> String {
    let p = data.grid().len();
    let mut out = grid_metadata(data.grid());
    out.push('\n');
    let header: Vec<String> = (1..=p)
        .map(|i| format!("x_{i}"))
        .chain(["y".to_string()])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (x, y) in data.x().iter().zip(data.y()) {
        for v in x.values() {
            let _ = write!(out, "{v:.16e},");
        }
        let _ = writeln!(out, "{y:.16e}");
    }
    out
}

/// Predictor rows, and responses when the file has a `y` column.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub grid: Grid,
    pub x: Vec<GridFunction>,
    pub y: Option<Vec<f64>>,
}

/// Reads a CSV with or without the trailing `y` column.
pub fn read_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, meta) = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))?;
    let grid = parse_metadata(meta.trim())?;
    let p = grid.len();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("missing header row".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let has_y = match names.len() {
        n if n == p + 1 && names[p] == "y" => true,
        n if n == p => false,
        n => {
            return Err(Error::Format(format!(
                "header has {n} columns, expected {p} predictors (plus optional y)"
            )))
        }
    };
    for (i, name) in names.iter().take(p).enumerate() {
        if *name != format!("x_{}", i + 1) {
            return Err(Error::Format(format!("unexpected column name `{name}`")));
        }
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (lineno, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != names.len() {
            return Err(Error::Format(format!(
                "line {}: {} cells, expected {}",
                lineno + 1,
                cells.len(),
                names.len()
            )));
        }
        let vals = cells
            .iter()
            .map(|c| parse_f64(c))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        if has_y {
            y.push(vals[p]);
        }
        x.push(GridFunction::new(grid, vals[..p].to_vec())?);
    }
    Ok(CsvTable {
        grid,
        x,
        y: has_y.then_some(y),
    })
}

/// Reads a training dataset; the `y` column is required.
pub fn read_dataset_csv(text: &str) -> Result<Dataset> {
    let table = read_csv(text)?;
    let y = table
        .y
        .ok_or_else(|| Error::Format("dataset has no `y` column".into()))?;
    Dataset::new(table.x, y)
}
