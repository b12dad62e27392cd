//! The spectral contrastive objective, its matrix-factorization form
//! ‖Ā − FFᵀ‖_F², exact minimizers via truncated eigendecomposition, and a
//! monotone gradient-descent trainer on the factor matrix.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::graph::{eigh, DegreeVector, NormalizedGraph, SymmetricGraph};

/// n×k factor matrix F whose rows are u_x = w_x^{1/2} f(x); the embedding is
/// recovered as f(x) = w_x^{-1/2} u_x through the stored degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    n: usize,
    k: usize,
    f: Array2<f64>,
    degrees: DegreeVector,
}

impl FactorMatrix {
    pub fn new(f: Array2<f64>, degrees: DegreeVector) -> Result<Self> {
        let (n, k) = f.dim();
        if degrees.len() != n {
            return Err(Error::DimensionMismatch {
                detail: format!("factor has {n} rows, degrees {}", degrees.len()),
            });
        }
        if k > n {
            return Err(Error::DimensionMismatch {
                detail: format!("embedding dimension {k} exceeds vertex count {n}"),
            });
        }
        Ok(Self { n, k, f, degrees })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn factor(&self) -> &Array2<f64> {
        &self.f
    }

    pub fn degrees(&self) -> &DegreeVector {
        &self.degrees
    }

    /// Embedding rows f(x) = w_x^{-1/2} u_x.
    pub fn embeddings(&self) -> Array2<f64> {
        let mut e = self.f.clone();
        for (i, mut row) in e.rows_mut().into_iter().enumerate() {
            let scale = 1.0 / self.degrees.values()[i].sqrt();
            row.mapv_inplace(|v| v * scale);
        }
        e
    }

    /// FFᵀ; all comparisons between factorizations go through this product.
    pub fn gram(&self) -> Array2<f64> {
        self.f.dot(&self.f.t())
    }
}

/// Trainer configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub step_size: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// pair draws for the sampled loss estimator
    pub batch_pairs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            step_size: 0.5,
            max_iters: 50_000,
            grad_tol: 1e-7,
            batch_pairs: 4096,
            seed: 0,
        }
    }
}

/// Checkpoint metadata stored next to a factor CSV.
#[derive(Debug, Serialize, Deserialize)]
pub struct FactorCheckpoint {
    pub n: usize,
    pub k: usize,
    pub loss: f64,
    pub iters: usize,
    pub seed: u64,
}

/// Population spectral contrastive loss
/// −2 Σ w_{xx'} f(x)ᵀf(x') + Σ w_x w_{x'} (f(x)ᵀf(x'))²,
/// with positive pairs weighted by edge mass and independent pairs by the
/// product of marginals.
pub fn population_loss(fm: &FactorMatrix, g: &SymmetricGraph) -> Result<f64> {
    if g.n() != fm.n {
        return Err(Error::DimensionMismatch {
            detail: format!("graph has {} vertices, factor {}", g.n(), fm.n),
        });
    }
    if !g.mass_normalized() {
        return Err(Error::ConfigInvalid {
            reason: "population loss needs a mass-normalized graph".to_string(),
        });
    }
    let emb = fm.embeddings();
    let degrees = fm.degrees.values();
    let n = fm.n;
    let mut positive = 0.0;
    let mut independent = 0.0;
    for x in 0..n {
        for xp in 0..n {
            let dot = emb.row(x).dot(&emb.row(xp));
            positive += g.weights()[[x, xp]] * dot;
            independent += degrees[x] * degrees[xp] * dot * dot;
        }
    }
    Ok(-2.0 * positive + independent)
}

/// ‖Ā − FFᵀ‖_F².
pub fn factorization_loss(fm: &FactorMatrix, ng: &NormalizedGraph) -> Result<f64> {
    if ng.n() != fm.n {
        return Err(Error::DimensionMismatch {
            detail: format!("graph has {} vertices, factor {}", ng.n(), fm.n),
        });
    }
    let residual = ng.matrix() - &fm.gram();
    Ok(residual.iter().map(|v| v * v).sum())
}

/// ‖Ā − FFᵀ‖² − population loss; equals ‖Ā‖_F² independently of F.
pub fn loss_gap(fm: &FactorMatrix, g: &SymmetricGraph) -> Result<f64> {
    let ng = crate::graph::normalize(g)?;
    Ok(factorization_loss(fm, &ng)? - population_loss(fm, g)?)
}

/// Exact rank-k minimizer of the factorization loss:
/// F = V_k diag(sqrt(max(λ_i, 0))). Negative eigenvalues are clamped to 0,
/// which only absorbs roundoff on the PSD graphs produced here.
pub fn top_k_factor(ng: &NormalizedGraph, k: usize) -> Result<FactorMatrix> {
    let n = ng.n();
    if k == 0 || k > n {
        return Err(Error::DimensionMismatch {
            detail: format!("k={k} outside [1, {n}]"),
        });
    }
    let spectrum = eigh(ng.matrix())?;
    let mut f = Array2::zeros((n, k));
    for j in 0..k {
        let scale = spectrum.values()[j].max(0.0).sqrt();
        for i in 0..n {
            f[[i, j]] = scale * spectrum.vectors()[[i, j]];
        }
    }
    FactorMatrix::new(f, ng.source_degrees().clone())
}

/// ∇_F ‖Ā − FFᵀ‖² = −4 (Ā − FFᵀ) F.
pub fn factorization_gradient(fm: &FactorMatrix, ng: &NormalizedGraph) -> Result<Array2<f64>> {
    if ng.n() != fm.n {
        return Err(Error::DimensionMismatch {
            detail: format!("graph has {} vertices, factor {}", ng.n(), fm.n),
        });
    }
    let residual = ng.matrix() - &fm.gram();
    Ok(residual.dot(&fm.f) * -4.0)
}

/// Gradient-descent training summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub factor: FactorMatrix,
    pub loss: f64,
    pub iters: usize,
    pub grad_norm: f64,
}

/// Full-gradient descent on the factorization loss with backtracking halving
/// (factor 0.5, at most 30 halvings per step). Initialization is i.i.d.
/// uniform on [−1/√(nk), 1/√(nk)] from the seed.
pub fn train_factor(ng: &NormalizedGraph, k: usize, cfg: &TrainConfig) -> Result<TrainReport> {
    if cfg.step_size <= 0.0 || cfg.grad_tol <= 0.0 {
        return Err(Error::ConfigInvalid {
            reason: "step_size and grad_tol must be positive".to_string(),
        });
    }
    let n = ng.n();
    if k == 0 || k > n {
        return Err(Error::DimensionMismatch {
            detail: format!("k={k} outside [1, {n}]"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = 1.0 / ((n * k) as f64).sqrt();
    let init: Vec<f64> = (0..n * k).map(|_| rng.gen_range(-bound..bound)).collect();
    let mut f = Array2::from_shape_vec((n, k), init).expect("shape");

    let mut fm = FactorMatrix::new(f.clone(), ng.source_degrees().clone())?;
    let mut loss = factorization_loss(&fm, ng)?;
    let mut increases = 0usize;
    let mut iters = 0usize;
    let mut grad_norm = f64::INFINITY;

    while iters < cfg.max_iters {
        let grad = factorization_gradient(&fm, ng)?;
        grad_norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad_norm <= cfg.grad_tol {
            break;
        }
        let mut step = cfg.step_size;
        let mut accepted = false;
        for _ in 0..=30 {
            let candidate = &f - &(&grad * step);
            let cand_fm = FactorMatrix::new(candidate.clone(), ng.source_degrees().clone())?;
            let cand_loss = factorization_loss(&cand_fm, ng)?;
            if cand_loss <= loss {
                f = candidate;
                fm = cand_fm;
                loss = cand_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iters += 1;
        if accepted {
            increases = 0;
        } else {
            increases += 1;
            if increases >= 50 {
                return Err(Error::Diverged { iters });
            }
        }
    }

    Ok(TrainReport {
        factor: fm,
        loss,
        iters,
        grad_norm,
    })
}

/// Monte-Carlo estimator of the population loss: positives drawn with
/// probability proportional to edge weights, independents from the degree
/// marginal. Fully determined by the config seed.
pub fn sampled_loss_estimate(
    g: &SymmetricGraph,
    fm: &FactorMatrix,
    cfg: &TrainConfig,
) -> Result<f64> {
    if g.n() != fm.n {
        return Err(Error::DimensionMismatch {
            detail: format!("graph has {} vertices, factor {}", g.n(), fm.n),
        });
    }
    let n = g.n();
    let total_mass = g.total_mass();
    if total_mass < Tolerances::DEFAULT.sampler_mass_min {
        return Err(Error::SamplerUnderflow { mass: total_mass });
    }
    // Cumulative tables for exact categorical sampling.
    let mut edge_cdf = Vec::with_capacity(n * n);
    let mut acc = 0.0;
    for x in 0..n {
        for xp in 0..n {
            acc += g.weights()[[x, xp]];
            edge_cdf.push(acc);
        }
    }
    let edge_total = acc;
    let mut degree_cdf = Vec::with_capacity(n);
    let mut dacc = 0.0;
    for x in 0..n {
        dacc += g
            .weights()
            .row(x)
            .sum();
        degree_cdf.push(dacc);
    }
    let degree_total = dacc;

    let emb = fm.embeddings();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draws = cfg.batch_pairs.max(1);
    let mut positive = 0.0;
    let mut independent = 0.0;
    for _ in 0..draws {
        let u = rng.gen::<f64>() * edge_total;
        let idx = partition_point(&edge_cdf, u);
        let (x, xp) = (idx / n, idx % n);
        positive += emb.row(x).dot(&emb.row(xp));

        let ui = rng.gen::<f64>() * degree_total;
        let i = partition_point(&degree_cdf, ui);
        let uj = rng.gen::<f64>() * degree_total;
        let j = partition_point(&degree_cdf, uj);
        let dot = emb.row(i).dot(&emb.row(j));
        independent += dot * dot;
    }
    Ok(-2.0 * positive / draws as f64 + independent / draws as f64)
}

fn partition_point(cdf: &[f64], u: f64) -> usize {
    match cdf.binary_search_by(|probe| probe.partial_cmp(&u).unwrap()) {
        Ok(i) | Err(i) => i.min(cdf.len() - 1),
    }
}
