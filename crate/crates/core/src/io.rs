//! Sample ingestion and export.
//!
//! CSV layout for a functional sample: the first row holds the grid points,
//! each subsequent row one observation. Scalar predictors live in a separate
//! CSV with one row per observation. The JSON mirror carries the fields
//! `grid`, `rows` and `scalars` in a single document.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Grid, HilbertPoint, Sample};

/// JSON document mirroring the CSV layout.
#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
pub struct SampleDoc {
    #[serde(default)]
    pub grid: Vec<f64>,
    #[serde(default)]
    pub rows: Vec<Vec<f64>>,
    #[serde(default)]
    pub scalars: Vec<Vec<f64>>,
}

impl SampleDoc {
    /// Assemble a sample: a functional component from `grid`/`rows`, a
    /// Euclidean component from `scalars`, or their direct sum.
    pub fn into_sample(self) -> Result<Sample> {
        let has_functional = !self.grid.is_empty() || !self.rows.is_empty();
        let has_scalars = !self.scalars.is_empty();
        if has_functional && has_scalars && self.rows.len() != self.scalars.len() {
            return Err(Error::Validation(format!(
                "row counts differ: {} functional rows vs {} scalar rows",
                self.rows.len(),
                self.scalars.len()
            )));
        }
        let grid = if has_functional {
            if self.rows.is_empty() {
                return Err(Error::Validation("grid given but no rows".into()));
            }
            Some(Arc::new(Grid::from_points(self.grid)?))
        } else {
            None
        };
        let n = if has_functional {
            self.rows.len()
        } else {
            self.scalars.len()
        };
        if n == 0 {
            return Err(Error::Validation("document contains no observations".into()));
        }
        let mut elements = Vec::with_capacity(n);
        for i in 0..n {
            let mut parts = Vec::new();
            if let Some(grid) = &grid {
                let row = &self.rows[i];
                if row.len() != grid.len() {
                    return Err(Error::Validation(format!(
                        "row {i} has {} values but the grid has {} points",
                        row.len(),
                        grid.len()
                    )));
                }
                parts.push((grid.clone(), row.clone()));
            }
            let scalars = if has_scalars {
                let row = &self.scalars[i];
                if row.len() != self.scalars[0].len() {
                    return Err(Error::Validation(format!(
                        "scalar row {i} has {} values, expected {}",
                        row.len(),
                        self.scalars[0].len()
                    )));
                }
                row.clone()
            } else {
                Vec::new()
            };
            elements.push(HilbertPoint::direct_sum(parts, scalars)?);
        }
        Sample::new(elements)
    }

    /// Render a sample with at most one functional component.
    pub fn from_sample(sample: &Sample) -> Result<Self> {
        let template = sample.element(0);
        if template.functional_parts().len() > 1 {
            return Err(Error::Domain(
                "samples with several functional components have no flat document form".into(),
            ));
        }
        let mut doc = SampleDoc::default();
        if let Some(part) = template.functional_parts().first() {
            doc.grid = part.grid().points().to_vec();
            doc.rows = sample
                .elements()
                .iter()
                .map(|e| e.functional_parts()[0].values().to_vec())
                .collect();
        }
        if !template.scalar_part().is_empty() {
            doc.scalars = sample.elements().iter().map(|e| e.scalar_part().to_vec()).collect();
        }
        Ok(doc)
    }
}

fn io_err(path: &str) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_string(),
        source,
    }
}

/// Parse a numeric CSV as (1-based line number, values) records.
fn parse_numeric_csv(path: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut values = Vec::new();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.to_string(),
                line: idx + 1,
                message: format!("invalid numeric field `{}`", field.trim()),
            })?;
            values.push(v);
        }
        out.push((idx + 1, values));
    }
    Ok(out)
}

fn render_row(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Read a functional sample: first row = grid points, every other row one
/// observation on that grid.
pub fn read_functional_csv(path: &str) -> Result<Sample> {
    let records = parse_numeric_csv(path)?;
    if records.len() < 2 {
        return Err(Error::Parse {
            path: path.to_string(),
            line: records.last().map_or(1, |(l, _)| *l),
            message: "need a grid row and at least one observation row".into(),
        });
    }
    let grid = Arc::new(Grid::from_points(records[0].1.clone()).map_err(|e| Error::Parse {
        path: path.to_string(),
        line: records[0].0,
        message: e.to_string(),
    })?);
    let mut elements = Vec::with_capacity(records.len() - 1);
    for (line, values) in &records[1..] {
        if values.len() != grid.len() {
            return Err(Error::Parse {
                path: path.to_string(),
                line: *line,
                message: format!(
                    "row has {} values but the grid has {} points",
                    values.len(),
                    grid.len()
                ),
            });
        }
        elements.push(HilbertPoint::functional(grid.clone(), values.clone())?);
    }
    Sample::new(elements)
}

/// Write a functional sample in the layout read by [`read_functional_csv`].
pub fn write_functional_csv(sample: &Sample, path: &str) -> Result<()> {
    let template = sample.element(0);
    if template.functional_parts().len() != 1 || !template.scalar_part().is_empty() {
        return Err(Error::Domain(
            "functional CSV export needs exactly one functional component".into(),
        ));
    }
    let grid = template.functional_parts()[0].grid();
    let mut out = String::new();
    out.push_str(&render_row(grid.points()));
    out.push('\n');
    for e in sample.elements() {
        out.push_str(&render_row(e.functional_parts()[0].values()));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// Read a numeric CSV whose rows may have different lengths (e.g. activity
/// trajectories with different wear times).
pub fn read_ragged_csv(path: &str) -> Result<Vec<Vec<f64>>> {
    Ok(parse_numeric_csv(path)?.into_iter().map(|(_, v)| v).collect())
}

/// Read scalar observations: one row per observation, equal lengths.
pub fn read_scalar_csv(path: &str) -> Result<Vec<Vec<f64>>> {
    let records = parse_numeric_csv(path)?;
    if records.is_empty() {
        return Err(Error::Parse {
            path: path.to_string(),
            line: 1,
            message: "file contains no observations".into(),
        });
    }
    let width = records[0].1.len();
    for (line, values) in &records {
        if values.len() != width {
            return Err(Error::Parse {
                path: path.to_string(),
                line: *line,
                message: format!("row has {} values, expected {width}", values.len()),
            });
        }
    }
    Ok(records.into_iter().map(|(_, v)| v).collect())
}

/// Write scalar observations, one row each.
pub fn write_scalar_csv(rows: &[Vec<f64>], path: &str) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&render_row(row));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// Read the JSON mirror document into a sample.
pub fn read_sample_json(path: &str) -> Result<Sample> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let doc: SampleDoc = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    doc.into_sample()
}

/// Write the JSON mirror document of a sample.
pub fn write_sample_json(sample: &Sample, path: &str) -> Result<()> {
    let doc = SampleDoc::from_sample(sample)?;
    let text = serde_json::to_string(&doc).expect("document serializes");
    std::fs::write(path, text).map_err(io_err(path))
}
