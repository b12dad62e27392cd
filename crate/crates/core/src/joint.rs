//! Joint training of feature and label objectives: the convex combination of
//! factorization losses, its constant offset c₀(θ), and the mixed similarity
//! graph (1−θ)Ā₀ + θĀ* it factorizes.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{frobenius, NormalizedGraph, SymmetricGraph};
use crate::spectral::FactorMatrix;

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::ThetaOutOfRange { theta });
    }
    Ok(())
}

fn check_dims(a0: &NormalizedGraph, a_star: &NormalizedGraph) -> Result<()> {
    if a0.n() != a_star.n() {
        return Err(Error::DimensionMismatch {
            detail: format!("feature graph has {} vertices, label graph {}", a0.n(), a_star.n()),
        });
    }
    Ok(())
}

/// (1−θ)Ā₀ + θĀ*, entrywise. The result carries the feature graph's source
/// degrees: the embedding map f(x) = w_x^{-1/2} u_x always uses the
/// augmentation-graph marginals, while the label side's own normalization is
/// already baked into Ā*. The mixture itself is not re-normalized.
pub fn mix_graphs(
    a0: &NormalizedGraph,
    a_star: &NormalizedGraph,
    theta: f64,
) -> Result<NormalizedGraph> {
    check_theta(theta)?;
    check_dims(a0, a_star)?;
    let matrix = a0.matrix() * (1.0 - theta) + a_star.matrix() * theta;
    NormalizedGraph::from_parts(matrix, a0.source_degrees().clone())
}

/// (1−θ)‖Ā₀ − FFᵀ‖² + θ‖Ā* − FFᵀ‖².
pub fn joint_factorization_loss(
    fm: &FactorMatrix,
    a0: &NormalizedGraph,
    a_star: &NormalizedGraph,
    theta: f64,
) -> Result<f64> {
    check_theta(theta)?;
    check_dims(a0, a_star)?;
    let l0 = crate::spectral::factorization_loss(fm, a0)?;
    let l1 = crate::spectral::factorization_loss(fm, a_star)?;
    Ok((1.0 - theta) * l0 + theta * l1)
}

/// c₀(θ) = (1−θ)‖Ā₀‖² + θ‖Ā*‖² − ‖(1−θ)Ā₀ + θĀ*‖²; the F-independent gap
/// between the joint loss and the mixed-graph loss, always ≥ 0.
pub fn c0_constant(a0: &NormalizedGraph, a_star: &NormalizedGraph, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    check_dims(a0, a_star)?;
    let mix = mix_graphs(a0, a_star, theta)?;
    let sq = |m: &Array2<f64>| frobenius(m).powi(2);
    Ok((1.0 - theta) * sq(a0.matrix()) + theta * sq(a_star.matrix()) - sq(mix.matrix()))
}

/// Mass-scale weights of the mixed graph: (1−θ)·w_ij + θ·√(w_i w_j)·Ā*_ij,
/// where w is the raw augmentation graph and Ā* the normalized label graph.
/// This is the edge distribution positive pairs are drawn from under joint
/// training, and the weighting behind the labeling disagreement mass.
pub fn mixed_edge_mass(
    a0: &SymmetricGraph,
    a_star: &NormalizedGraph,
    theta: f64,
) -> Result<SymmetricGraph> {
    check_theta(theta)?;
    if a0.n() != a_star.n() {
        return Err(Error::DimensionMismatch {
            detail: format!("feature graph has {} vertices, label graph {}", a0.n(), a_star.n()),
        });
    }
    let d = crate::graph::degrees(a0)?;
    let sqrt_d: Vec<f64> = d.values().iter().map(|w| w.sqrt()).collect();
    let n = a0.n();
    let mut weights = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            weights[[i, j]] = (1.0 - theta) * a0.weights()[[i, j]]
                + theta * sqrt_d[i] * sqrt_d[j] * a_star.matrix()[[i, j]];
        }
    }
    SymmetricGraph::from_raw(weights, false)
}
