//! Serialization: row-major matrix CSV, the JSON graph envelope, and the
//! 17-significant-digit float formatting that keeps round trips bit-stable.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SymmetricGraph;

/// Formats with 17 significant digits, enough for f64 round trips to be
/// bit-exact.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Row-major CSV without header; one matrix row per line.
pub fn matrix_to_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|e| Error::Format {
                    detail: format!("bad float {cell:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format {
            detail: "ragged csv rows".to_string(),
        });
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, ncols), flat).map_err(|e| Error::Format {
        detail: e.to_string(),
    })
}

pub fn vector_to_csv(v: &Array1<f64>) -> String {
    let mut out = String::new();
    for &x in v.iter() {
        out.push_str(&format_f64(x));
        out.push('\n');
    }
    out
}

pub fn vector_from_csv(text: &str) -> Result<Array1<f64>> {
    let mut vals = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        vals.push(line.parse::<f64>().map_err(|e| Error::Format {
            detail: format!("bad float {line:?}: {e}"),
        })?);
    }
    Ok(Array1::from_vec(vals))
}

/// JSON envelope for a [`SymmetricGraph`]: `{n, mass_normalized, rows}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphEnvelope {
    pub n: usize,
    pub mass_normalized: bool,
    pub rows: Vec<Vec<f64>>,
}

pub fn graph_to_json(g: &SymmetricGraph) -> Result<String> {
    let rows = g
        .weights()
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    let envelope = GraphEnvelope {
        n: g.n(),
        mass_normalized: g.mass_normalized(),
        rows,
    };
    Ok(serde_json::to_string_pretty(&envelope)?)
}

pub fn graph_from_json(text: &str) -> Result<SymmetricGraph> {
    let envelope: GraphEnvelope = serde_json::from_str(text)?;
    if envelope.rows.len() != envelope.n || envelope.rows.iter().any(|r| r.len() != envelope.n) {
        return Err(Error::Format {
            detail: "envelope rows do not match n".to_string(),
        });
    }
    let flat: Vec<f64> = envelope.rows.into_iter().flatten().collect();
    let weights = Array2::from_shape_vec((envelope.n, envelope.n), flat).map_err(|e| {
        Error::Format {
            detail: e.to_string(),
        }
    })?;
    SymmetricGraph::from_raw(weights, envelope.mass_normalized)
}

pub fn graph_to_csv(g: &SymmetricGraph) -> String {
    matrix_to_csv(g.weights())
}
