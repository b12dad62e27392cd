//! Downstream linear probing on frozen embeddings and the exact population
//! error quantities: per-augmentation error, the per-natural vote error, and
//! the label-recovery constants (δ_u, δ_s) of a labeling function.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::graph::eigh;
use crate::spectral::FactorMatrix;
use crate::synth::World;

/// Weights of the downstream linear classifier (k×r).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    b: Array2<f64>,
    frobenius_norm: f64,
}

impl LinearProbe {
    pub fn new(b: Array2<f64>) -> Self {
        let frobenius_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self { b, frobenius_norm }
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.b
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm
    }
}

/// Exact error quantities of one embedding/probe pair on a world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_aug_error: f64,
    pub natural_vote_error: f64,
    pub delta_u: f64,
    pub delta_s: f64,
    pub probe_norm: f64,
    pub theorem_norm_cap: f64,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Fit the marginal-weighted ridge probe:
/// B minimizes Σ_x w_x ‖Bᵀf(x) − onehot(y(parent(x)))‖² + ridge‖B‖².
/// Clean labels only; noise reaches the probe solely through the embedding.
pub fn fit_probe(fm: &FactorMatrix, w: &World, ridge: f64) -> Result<LinearProbe> {
    if fm.n() != w.n() {
        return Err(Error::DimensionMismatch {
            detail: format!("factor has {} rows, world {}", fm.n(), w.n()),
        });
    }
    let k = fm.k();
    let r = w.config.r;
    let emb = fm.embeddings();
    let marginals = crate::graph::degrees(&w.aug_graph)?;

    let mut gram = Array2::zeros((k, k));
    let mut cross = Array2::zeros((k, r));
    for x in 0..w.n() {
        let m = marginals.values()[x];
        let f = emb.row(x);
        let y = w.label_of_aug(x);
        for a in 0..k {
            for b in 0..k {
                gram[[a, b]] += m * f[a] * f[b];
            }
            cross[[a, y]] += m * f[a];
        }
    }
    for a in 0..k {
        gram[[a, a]] += ridge;
    }

    let spectrum = eigh(&gram)?;
    let eigs = spectrum.values();
    let lambda_max = eigs[0].abs();
    let lambda_min = eigs[eigs.len() - 1].abs();
    let condition = if lambda_min == 0.0 {
        f64::INFINITY
    } else {
        lambda_max / lambda_min
    };
    if condition > Tolerances::DEFAULT.probe_condition {
        return Err(Error::SingularSystem { condition });
    }
    // B = V diag(1/λ) Vᵀ C
    let vt_c = spectrum.vectors().t().dot(&cross);
    let mut scaled = vt_c;
    for (i, mut row) in scaled.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| v / eigs[i]);
    }
    let b = spectrum.vectors().dot(&scaled);
    Ok(LinearProbe::new(b))
}

/// Per-point class predictions argmax_c (Bᵀ f(x))_c, ties toward the
/// smallest class index.
pub fn predictions(fm: &FactorMatrix, probe: &LinearProbe) -> Vec<usize> {
    let scores = fm.embeddings().dot(probe.weights());
    scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0usize;
            for (c, &s) in row.iter().enumerate() {
                if s > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Exact per-augmentation error
/// Σ_x̄ P(x̄) Σ_x A(x|x̄)·1[pred(x) ≠ y(x̄)].
pub fn per_aug_error(fm: &FactorMatrix, probe: &LinearProbe, w: &World) -> f64 {
    let preds = predictions(fm, probe);
    labeling_error(w, &preds)
}

/// Per-augmentation error of an arbitrary labeling of the augmented points.
pub fn labeling_error(w: &World, labels: &[usize]) -> f64 {
    let mut err = 0.0;
    for nat in 0..w.naturals() {
        let p = w.natural_priors[nat];
        let y = w.label_of_natural[nat];
        for x in 0..w.n() {
            if labels[x] != y {
                err += p * w.aug_dist[[nat, x]];
            }
        }
    }
    err
}

/// Per-natural vote predictions: argmax_c Σ_x A(x|x̄)·1[pred(x) = c], ties
/// toward the smallest class index.
pub fn natural_vote_predict(fm: &FactorMatrix, probe: &LinearProbe, w: &World) -> Vec<usize> {
    let preds = predictions(fm, probe);
    let r = w.config.r;
    let mut votes = Vec::with_capacity(w.naturals());
    for nat in 0..w.naturals() {
        let mut mass = Array1::<f64>::zeros(r);
        for x in 0..w.n() {
            mass[preds[x]] += w.aug_dist[[nat, x]];
        }
        let mut best = 0usize;
        for c in 0..r {
            if mass[c] > mass[best] {
                best = c;
            }
        }
        votes.push(best);
    }
    votes
}

/// P(x̄)-weighted error of the vote predictor.
pub fn natural_vote_error(fm: &FactorMatrix, probe: &LinearProbe, w: &World) -> f64 {
    let votes = natural_vote_predict(fm, probe, w);
    let mut err = 0.0;
    for nat in 0..w.naturals() {
        if votes[nat] != w.label_of_natural[nat] {
            err += w.natural_priors[nat];
        }
    }
    err
}

/// Tightest constants of a labeling function:
/// δ_u = Σ_{x̄,x} P(x̄)A(x|x̄)·1[ŷ(x) ≠ y(x̄)],
/// δ_s = (1/n_L) Σ_{labeled i} Σ_ℓ η_ℓ(x_i)·1[ŷ(x_i) ≠ ℓ].
pub fn label_recovery_errors(w: &World, labels: &[usize]) -> (f64, f64) {
    let delta_u = labeling_error(w, labels);
    let n_l = w.layout.n_l;
    let delta_s = if n_l == 0 {
        0.0
    } else {
        let mut sum = 0.0;
        for i in 0..n_l {
            for l in 0..w.config.r {
                if labels[i] != l {
                    sum += w.posteriors.eta()[[i, l]];
                }
            }
        }
        sum / n_l as f64
    };
    (delta_u, delta_s)
}
