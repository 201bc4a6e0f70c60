//! Correspondence analysis of the (city, year) x sector revenue matrix:
//! principal coordinates, inertia decomposition, per-city temporal
//! trajectories, and a nearest-sector specialisation summary.
//!
//! With P = N/n, row masses r = P1 and column masses c = P'1, the
//! standardized residuals S_ij = (P_ij - r_i c_j) / sqrt(r_i c_j) are
//! decomposed by SVD; row principal coordinates are F = Dr^-1/2 U Sigma and
//! column ones G = Dc^-1/2 V Sigma. Total inertia equals chi-square(N)/n.

mod jacobi;
pub mod svg;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::metrics::{SectorCode, SectorMatrix};

/// Separator between city and year in stacked row labels.
const LABEL_SEP: char = '@';

/// Nonnegative contingency matrix with row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyInput {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl ContingencyInput {
    /// Stack a sector matrix into CA input; row labels are "city@year".
    pub fn from_sector_matrix(matrix: &SectorMatrix) -> Self {
        Self {
            row_labels: matrix
                .rows
                .iter()
                .map(|(city, year)| format!("{city}{LABEL_SEP}{year}"))
                .collect(),
            col_labels: SectorCode::ALL
                .iter()
                .map(|s| s.letter().to_string())
                .collect(),
            matrix: matrix.cells.iter().map(|row| row.to_vec()).collect(),
        }
    }
}

/// Split a stacked row label back into (city, year).
pub fn parse_row_label(label: &str) -> Option<(String, i32)> {
    let (city, year) = label.rsplit_once(LABEL_SEP)?;
    Some((city.to_string(), year.parse().ok()?))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CaError {
    #[error("DEGENERATE: {0}")]
    Degenerate(String),
    #[error("INVALID_INPUT: {0}")]
    InvalidInput(String),
}

/// Result of a correspondence analysis. Coordinates cover the kept (non
/// zero-sum) rows and columns only; dropped labels are recorded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaResult {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub dropped_rows: Vec<String>,
    pub dropped_cols: Vec<String>,
    pub row_masses: Vec<f64>,
    pub col_masses: Vec<f64>,
    /// Descending; dims = rank of the standardized residual matrix.
    pub singular_values: Vec<f64>,
    /// Squared singular values.
    pub principal_inertias: Vec<f64>,
    /// Share of total inertia per dimension.
    pub explained: Vec<f64>,
    pub total_inertia: f64,
    /// rows x dims.
    pub row_coords: Vec<Vec<f64>>,
    /// cols x dims.
    pub col_coords: Vec<Vec<f64>>,
}

impl CaResult {
    pub fn dims(&self) -> usize {
        self.singular_values.len()
    }

    /// First two principal coordinates of a kept row, zero-padded when the
    /// decomposition has fewer than two dimensions.
    pub fn row_point2(&self, row: usize) -> (f64, f64) {
        point2(&self.row_coords[row])
    }

    pub fn col_point2(&self, col: usize) -> (f64, f64) {
        point2(&self.col_coords[col])
    }

    /// Percentage of inertia explained by a dimension (0-based), 0 when the
    /// dimension does not exist.
    pub fn explained_pct(&self, dim: usize) -> f64 {
        self.explained.get(dim).copied().unwrap_or(0.0) * 100.0
    }
}

fn point2(coords: &[f64]) -> (f64, f64) {
    (
        coords.first().copied().unwrap_or(0.0),
        coords.get(1).copied().unwrap_or(0.0),
    )
}

/// Run the decomposition. Zero-sum rows and columns are dropped first and
/// recorded; fewer than 2 nonzero rows or columns is degenerate.
pub fn correspondence_analysis(input: &ContingencyInput) -> Result<CaResult, CaError> {
    let n_rows = input.row_labels.len();
    let n_cols = input.col_labels.len();
    if input.matrix.len() != n_rows || input.matrix.iter().any(|r| r.len() != n_cols) {
        return Err(CaError::InvalidInput(
            "matrix shape does not match labels".to_string(),
        ));
    }
    for row in &input.matrix {
        for &v in row {
            if !v.is_finite() {
                return Err(CaError::InvalidInput("non-finite cell".to_string()));
            }
            if v < 0.0 {
                return Err(CaError::InvalidInput("negative cell".to_string()));
            }
        }
    }

    let row_sums: Vec<f64> = input.matrix.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..n_cols)
        .map(|j| input.matrix.iter().map(|r| r[j]).sum())
        .collect();

    let kept_rows: Vec<usize> = (0..n_rows).filter(|&i| row_sums[i] > 0.0).collect();
    let kept_cols: Vec<usize> = (0..n_cols).filter(|&j| col_sums[j] > 0.0).collect();
    let dropped_rows: Vec<String> = (0..n_rows)
        .filter(|i| row_sums[*i] <= 0.0)
        .map(|i| input.row_labels[i].clone())
        .collect();
    let dropped_cols: Vec<String> = (0..n_cols)
        .filter(|j| col_sums[*j] <= 0.0)
        .map(|j| input.col_labels[j].clone())
        .collect();

    if kept_rows.len() < 2 || kept_cols.len() < 2 {
        return Err(CaError::Degenerate(format!(
            "need at least 2 nonzero rows and columns, have {}x{}",
            kept_rows.len(),
            kept_cols.len()
        )));
    }

    let nr = kept_rows.len();
    let nc = kept_cols.len();
    let grand_total: f64 = kept_rows.iter().map(|&i| row_sums[i]).sum();
    let row_masses: Vec<f64> = kept_rows
        .iter()
        .map(|&i| row_sums[i] / grand_total)
        .collect();
    let col_masses: Vec<f64> = kept_cols
        .iter()
        .map(|&j| col_sums[j] / grand_total)
        .collect();

    let residuals: Vec<Vec<f64>> = (0..nr)
        .map(|i| {
            (0..nc)
                .map(|j| {
                    let p = input.matrix[kept_rows[i]][kept_cols[j]] / grand_total;
                    let expected = row_masses[i] * col_masses[j];
                    (p - expected) / expected.sqrt()
                })
                .collect()
        })
        .collect();

    let decomposition = jacobi::svd(&residuals);
    let sigma = &decomposition.sigma;

    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let tol = 1e-10 * sigma_max.max(1.0);
    let max_dims = nr.min(nc) - 1;
    let dims = sigma
        .iter()
        .take(max_dims)
        .take_while(|&&s| s > tol)
        .count();

    let mut singular_values = Vec::with_capacity(dims);
    let mut row_coords = vec![Vec::with_capacity(dims); nr];
    let mut col_coords = vec![Vec::with_capacity(dims); nc];
    for k in 0..dims {
        let s = sigma[k];
        singular_values.push(s);

        let mut g: Vec<f64> = (0..nc)
            .map(|j| decomposition.v[k][j] * s / col_masses[j].sqrt())
            .collect();
        let mut f: Vec<f64> = (0..nr)
            .map(|i| decomposition.u[k][i] * s / row_masses[i].sqrt())
            .collect();

        // Sign convention: the column coordinate of largest magnitude is
        // nonnegative; ties resolve to the lowest column index.
        let anchor = (0..nc)
            .max_by(|&a, &b| {
                g[a].abs()
                    .partial_cmp(&g[b].abs())
                    .expect("finite coords")
                    .then(b.cmp(&a))
            })
            .expect("nc >= 2");
        if g[anchor] < 0.0 {
            for v in g.iter_mut() {
                *v = -*v;
            }
            for v in f.iter_mut() {
                *v = -*v;
            }
        }

        for (i, coords) in row_coords.iter_mut().enumerate() {
            coords.push(f[i]);
        }
        for (j, coords) in col_coords.iter_mut().enumerate() {
            coords.push(g[j]);
        }
    }

    let principal_inertias: Vec<f64> = singular_values.iter().map(|s| s * s).collect();
    let total_inertia: f64 = principal_inertias.iter().sum();
    let explained: Vec<f64> = if total_inertia > 0.0 {
        principal_inertias
            .iter()
            .map(|l| l / total_inertia)
            .collect()
    } else {
        vec![0.0; principal_inertias.len()]
    };

    Ok(CaResult {
        row_labels: kept_rows
            .iter()
            .map(|&i| input.row_labels[i].clone())
            .collect(),
        col_labels: kept_cols
            .iter()
            .map(|&j| input.col_labels[j].clone())
            .collect(),
        dropped_rows,
        dropped_cols,
        row_masses,
        col_masses,
        singular_values,
        principal_inertias,
        explained,
        total_inertia,
        row_coords,
        col_coords,
    })
}

/// A city's ordered path through the principal plane across years.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub city: String,
    /// (year, dim-1, dim-2), years strictly increasing.
    pub points: Vec<(i32, f64, f64)>,
}

/// Per-city trajectories from a stacked CA result. Requested cities absent
/// from the row labels are skipped and reported.
pub fn trajectories(
    result: &CaResult,
    cities: &BTreeSet<String>,
) -> Result<(Vec<Trajectory>, Vec<String>), CaError> {
    let mut parsed = Vec::with_capacity(result.row_labels.len());
    for label in &result.row_labels {
        let (city, year) = parse_row_label(label).ok_or_else(|| {
            CaError::InvalidInput(format!("row label '{label}' is not city{LABEL_SEP}year"))
        })?;
        parsed.push((city, year));
    }

    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for city in cities {
        let mut points: Vec<(i32, f64, f64)> = parsed
            .iter()
            .enumerate()
            .filter(|(_, (c, _))| c == city)
            .map(|(i, (_, year))| {
                let (x, y) = result.row_point2(i);
                (*year, x, y)
            })
            .collect();
        if points.is_empty() {
            skipped.push(city.clone());
            continue;
        }
        points.sort_by_key(|(year, _, _)| *year);
        out.push(Trajectory {
            city: city.clone(),
            points,
        });
    }
    Ok((out, skipped))
}

/// Nearest column points per row point in the 2-d principal plane; a
/// reproducible proxy for reading specialisations off the map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowNeighbors {
    pub row_label: String,
    /// (column label, Euclidean distance), nearest first.
    pub neighbors: Vec<(String, f64)>,
}

pub fn ca_report(result: &CaResult, top_m: usize) -> Vec<RowNeighbors> {
    let col_points: Vec<(f64, f64)> = (0..result.col_labels.len())
        .map(|j| result.col_point2(j))
        .collect();
    result
        .row_labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let (rx, ry) = result.row_point2(i);
            let mut neighbors: Vec<(String, f64)> = col_points
                .iter()
                .zip(&result.col_labels)
                .map(|((cx, cy), col)| {
                    let d = ((rx - cx).powi(2) + (ry - cy).powi(2)).sqrt();
                    (col.clone(), d)
                })
                .collect();
            neighbors.sort_by(|a, b| {
                a.1.partial_cmp(&b.1)
                    .expect("finite distance")
                    .then(a.0.cmp(&b.0))
            });
            neighbors.truncate(top_m);
            RowNeighbors {
                row_label: label.clone(),
                neighbors,
            }
        })
        .collect()
}

/// Coordinates CSV: label,kind=row|col,dim1,dim2,mass,inertia_share.
pub fn coordinates_csv(result: &CaResult) -> String {
    let mut out = String::from("label,kind,dim1,dim2,mass,inertia_share\n");
    let total = result.total_inertia;
    for (i, label) in result.row_labels.iter().enumerate() {
        let (x, y) = result.row_point2(i);
        let inertia = point_inertia(result.row_masses[i], &result.row_coords[i]);
        let share = if total > 0.0 { inertia / total } else { 0.0 };
        out.push_str(&format!(
            "{label},row,{x},{y},{},{share}\n",
            result.row_masses[i]
        ));
    }
    for (j, label) in result.col_labels.iter().enumerate() {
        let (x, y) = result.col_point2(j);
        let inertia = point_inertia(result.col_masses[j], &result.col_coords[j]);
        let share = if total > 0.0 { inertia / total } else { 0.0 };
        out.push_str(&format!(
            "{label},col,{x},{y},{},{share}\n",
            result.col_masses[j]
        ));
    }
    out
}

// A point's contribution to total inertia: mass x squared distance from the
// centroid across all dimensions.
fn point_inertia(mass: f64, coords: &[f64]) -> f64 {
    mass * coords.iter().map(|c| c * c).sum::<f64>()
}
