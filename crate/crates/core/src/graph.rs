//! Core graph representations: symmetric edge-weight matrices, degree
//! normalization Ā = D^{-1/2} A D^{-1/2}, and a dense symmetric
//! eigendecomposition (cyclic Jacobi) used as the spectral oracle everywhere
//! else in the crate.

use ndarray::{Array1, Array2};

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Symmetric nonnegative edge-weight matrix over `n` vertices.
///
/// `mass_normalized` marks graphs whose total edge mass sums to one, i.e.
/// whose weights are joint probabilities of positive pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricGraph {
    n: usize,
    weights: Array2<f64>,
    mass_normalized: bool,
}

/// Outcome of a validation pass over a [`SymmetricGraph`].
///
/// Report-only: defects are measured, never clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// max |a_ij - a_ji|
    pub symmetry_defect: f64,
    /// magnitude of the most negative entry (0 if none)
    pub negativity_defect: f64,
    /// |sum - 1| when the graph claims mass normalization
    pub mass_defect: Option<f64>,
    pub passes: bool,
}

impl SymmetricGraph {
    /// Validating constructor; rejects matrices violating the invariants.
    pub fn new(weights: Array2<f64>, mass_normalized: bool) -> Result<Self> {
        let g = Self::from_raw(weights, mass_normalized)?;
        let report = validate_graph(&g, &Tolerances::DEFAULT);
        if !report.passes {
            if report.symmetry_defect > Tolerances::DEFAULT.symmetry {
                return Err(Error::Asymmetric {
                    defect: report.symmetry_defect,
                });
            }
            if report.negativity_defect > 0.0 {
                let (row, col, value) = most_negative(&g.weights);
                return Err(Error::NegativeEntry { row, col, value });
            }
            return Err(Error::MassNotNormalized {
                sum: g.weights.sum(),
            });
        }
        Ok(g)
    }

    /// Shape-checked constructor that skips invariant validation, so that
    /// defective matrices can still be inspected through [`validate_graph`].
    pub fn from_raw(weights: Array2<f64>, mass_normalized: bool) -> Result<Self> {
        let (rows, cols) = weights.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows > Tolerances::DEFAULT.max_n {
            return Err(Error::MatrixTooLarge {
                n: rows,
                cap: Tolerances::DEFAULT.max_n,
            });
        }
        Ok(Self {
            n: rows,
            weights,
            mass_normalized,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn mass_normalized(&self) -> bool {
        self.mass_normalized
    }

    /// Total edge mass.
    pub fn total_mass(&self) -> f64 {
        self.weights.sum()
    }
}

fn most_negative(m: &Array2<f64>) -> (usize, usize, f64) {
    let mut worst = (0, 0, 0.0);
    for ((i, j), &v) in m.indexed_iter() {
        if v < worst.2 {
            worst = (i, j, v);
        }
    }
    worst
}

/// Measure symmetry, nonnegativity and (optionally) mass defects.
pub fn validate_graph(g: &SymmetricGraph, tol: &Tolerances) -> ValidationReport {
    let n = g.n;
    let mut symmetry_defect = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            symmetry_defect = symmetry_defect.max((g.weights[[i, j]] - g.weights[[j, i]]).abs());
        }
    }
    let mut negativity_defect = 0.0f64;
    for &v in g.weights.iter() {
        if v < 0.0 {
            negativity_defect = negativity_defect.max(-v);
        }
    }
    let mass_defect = if g.mass_normalized {
        Some((g.weights.sum() - 1.0).abs())
    } else {
        None
    };
    let passes = symmetry_defect <= tol.symmetry
        && negativity_defect == 0.0
        && mass_defect.map_or(true, |d| d <= tol.mass);
    ValidationReport {
        symmetry_defect,
        negativity_defect,
        mass_defect,
        passes,
    }
}

/// Vertex degrees w_x = Σ_{x'} w_{xx'}; all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector {
    values: Array1<f64>,
}

impl DegreeVector {
    /// Wraps a raw degree vector, rejecting nonpositive entries.
    pub fn new(values: Array1<f64>) -> Result<Self> {
        for (index, &degree) in values.iter().enumerate() {
            if degree <= 0.0 {
                return Err(Error::ZeroDegree { index, degree });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Row sums of the weight matrix.
pub fn degrees(g: &SymmetricGraph) -> Result<DegreeVector> {
    let sums = g
        .weights
        .rows()
        .into_iter()
        .map(|row| row.sum())
        .collect::<Array1<f64>>();
    DegreeVector::new(sums)
}

/// Degree-normalized adjacency Ā = D^{-1/2} A D^{-1/2} together with the
/// degrees it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGraph {
    n: usize,
    matrix: Array2<f64>,
    source_degrees: DegreeVector,
}

impl NormalizedGraph {
    /// Assemble from parts that are already normalized (mixtures, closed
    /// forms). The caller owns the claim that `matrix` is a valid normalized
    /// adjacency for the given degrees.
    pub fn from_parts(matrix: Array2<f64>, source_degrees: DegreeVector) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if source_degrees.len() != rows {
            return Err(Error::DimensionMismatch {
                detail: format!("matrix is {rows}x{cols} but degrees has {}", source_degrees.len()),
            });
        }
        Ok(Self {
            n: rows,
            matrix,
            source_degrees,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn source_degrees(&self) -> &DegreeVector {
        &self.source_degrees
    }
}

/// Ā[i][j] = w_ij / sqrt(w_i w_j).
pub fn normalize(g: &SymmetricGraph) -> Result<NormalizedGraph> {
    let d = degrees(g)?;
    let inv_sqrt: Array1<f64> = d.values().mapv(|w| 1.0 / w.sqrt());
    let n = g.n;
    let mut matrix = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            matrix[[i, j]] = g.weights[[i, j]] * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    NormalizedGraph::from_parts(matrix, d)
}

/// Exact max_i w_i / min_j w_j. Callers needing a strict bound add
/// [`Tolerances::rho_slack`] on top.
pub fn degree_ratio(d: &DegreeVector) -> f64 {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &w in d.values().iter() {
        min = min.min(w);
        max = max.max(w);
    }
    max / min
}

/// Full eigendecomposition of a symmetric matrix: eigenvalues in descending
/// order, orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Array1<f64>,
    vectors: Array2<f64>,
}

impl Spectrum {
    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// ν_j with 1-based index j, clamped at the range edges: indices below 1
    /// read the top eigenvalue, indices above n read 0. Keeps the interlacing
    /// formulas total.
    pub fn value_clamped(&self, index: isize) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        if index < 1 {
            self.values[0]
        } else if index as usize > self.values.len() {
            0.0
        } else {
            self.values[index as usize - 1]
        }
    }

    /// V diag(values) Vᵀ.
    pub fn reconstruct(&self) -> Array2<f64> {
        let scaled = &self.vectors * &self.values.view().insert_axis(ndarray::Axis(0));
        scaled.dot(&self.vectors.t())
    }
}

/// Cyclic Jacobi eigendecomposition.
///
/// Contract: input symmetric within `eigh_input_symmetry`; converged when the
/// off-diagonal Frobenius mass drops below `eigh_offdiag_rel * ||m||_F`;
/// rotation cap `eigh_rotation_cap_factor * n^2`; eigenvalues descending;
/// each eigenvector's first component with magnitude above `eigh_sign` made
/// positive.
pub fn eigh(m: &Array2<f64>) -> Result<Spectrum> {
    eigh_with(m, &Tolerances::DEFAULT)
}

pub fn eigh_with(m: &Array2<f64>, tol: &Tolerances) -> Result<Spectrum> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows > tol.max_n {
        return Err(Error::MatrixTooLarge {
            n: rows,
            cap: tol.max_n,
        });
    }
    let n = rows;
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            defect = defect.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    if defect > tol.eigh_input_symmetry {
        return Err(Error::Asymmetric { defect });
    }
    if n == 0 {
        return Ok(Spectrum {
            values: Array1::zeros(0),
            vectors: Array2::zeros((0, 0)),
        });
    }

    let frob = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let off_target = tol.eigh_offdiag_rel * frob;
    let rotation_cap = tol.eigh_rotation_cap_factor * n * n;

    let mut a = m.clone();
    // Work on the exactly symmetric part so roundoff asymmetry cannot drift.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = s;
            a[[j, i]] = s;
        }
    }
    let mut v: Array2<f64> = Array2::eye(n);
    let mut rotations = 0usize;

    loop {
        let off = off_diagonal_norm(&a);
        if off <= off_target {
            break;
        }
        if rotations > rotation_cap {
            return Err(Error::NoConvergence { rotations });
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                // Skip rotations that cannot move the off-diagonal mass.
                if apq.abs() <= off_target / (n as f64 * n as f64) {
                    continue;
                }
                rotations += 1;
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[[p, p]] = app - t * apq;
                a[[q, q]] = aqq + t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[[i, p]];
                        let aiq = a[[i, q]];
                        a[[i, p]] = aip - s * (aiq + tau * aip);
                        a[[i, q]] = aiq + s * (aip - tau * aiq);
                        a[[p, i]] = a[[i, p]];
                        a[[q, i]] = a[[i, q]];
                    }
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = vip - s * (viq + tau * vip);
                    v[[i, q]] = viq + s * (vip - tau * viq);
                }
            }
        }
    }

    // Sort descending by eigenvalue; stable so degenerate blocks keep the
    // rotation order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[[j, j]]
            .partial_cmp(&a[[i, i]])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut values = Array1::zeros(n);
    let mut vectors = Array2::zeros((n, n));
    for (slot, &idx) in order.iter().enumerate() {
        values[slot] = a[[idx, idx]];
        let mut flip = 1.0;
        for i in 0..n {
            if v[[i, idx]].abs() > tol.eigh_sign {
                if v[[i, idx]] < 0.0 {
                    flip = -1.0;
                }
                break;
            }
        }
        for i in 0..n {
            vectors[[i, slot]] = flip * v[[i, idx]];
        }
    }

    Ok(Spectrum { values, vectors })
}

fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[[i, j]] * a[[i, j]];
            }
        }
    }
    sum.sqrt()
}

/// Frobenius norm.
pub fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Frobenius norm of the difference.
pub fn frobenius_distance(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
