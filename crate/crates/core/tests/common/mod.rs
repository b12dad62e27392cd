//! Shared generators for the oracle batteries. Everything is seeded; a test
//! battery is a pure function of its seed.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use speclab::graph::{DegreeVector, NormalizedGraph};
use speclab::PosteriorMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dense symmetric matrix with entries in [-scale, scale].
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-scale..scale);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    m
}

/// Random permutation of 0..n.
pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Class-balanced posterior matrix with n_L = per_class * r rows: tiles of a
/// doubly-stochastic r×r block (average of random permutation matrices) with
/// shuffled row order. Column sums are exactly n_L/r up to roundoff.
pub fn balanced_posteriors(rng: &mut ChaCha8Rng, r: usize, per_class: usize) -> PosteriorMatrix {
    let mixtures = rng.gen_range(1..=4);
    let mut block = Array2::zeros((r, r));
    for _ in 0..mixtures {
        let p = random_permutation(rng, r);
        for (i, &j) in p.iter().enumerate() {
            block[[i, j]] += 1.0 / mixtures as f64;
        }
    }
    let n_l = per_class * r;
    let mut eta = Array2::zeros((n_l, r));
    for copy in 0..per_class {
        for i in 0..r {
            for j in 0..r {
                eta[[copy * r + i, j]] = block[[i, j]];
            }
        }
    }
    let order = random_permutation(rng, n_l);
    let mut shuffled = Array2::zeros((n_l, r));
    for (new_row, &old_row) in order.iter().enumerate() {
        for j in 0..r {
            shuffled[[new_row, j]] = eta[[old_row, j]];
        }
    }
    PosteriorMatrix::new(shuffled).expect("rows are probability vectors")
}

/// Deterministic class-balanced posteriors (one-hot, per_class per class,
/// interleaved).
pub fn balanced_hard_posteriors(r: usize, per_class: usize) -> PosteriorMatrix {
    let labels: Vec<usize> = (0..per_class * r).map(|i| i % r).collect();
    PosteriorMatrix::deterministic(&labels, r).expect("labels in range")
}

/// PSD normalized-graph stand-in with a prescribed descending spectrum:
/// M = VΛVᵀ with V the eigenvectors of a random symmetric matrix, unit
/// degrees attached.
pub fn graph_with_spectrum(rng: &mut ChaCha8Rng, spectrum: &[f64]) -> NormalizedGraph {
    let n = spectrum.len();
    let basis = speclab::eigh(&random_symmetric(rng, n, 1.0)).expect("symmetric");
    let v = basis.vectors();
    let lambda = Array1::from_vec(spectrum.to_vec());
    let scaled = v * &lambda.view().insert_axis(ndarray::Axis(0));
    let m = scaled.dot(&v.t());
    NormalizedGraph::from_parts(m, DegreeVector::new(Array1::ones(n)).unwrap()).unwrap()
}

/// Admissible noise grid of `count` values in [0, (r−1)/r).
pub fn gamma_grid(r: usize, count: usize) -> Vec<f64> {
    let max = (r as f64 - 1.0) / r as f64;
    (0..count)
        .map(|i| max * i as f64 / count as f64 * 0.98)
        .collect()
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want} (tol {tol})"
    );
}
