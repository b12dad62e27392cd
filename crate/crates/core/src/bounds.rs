//! Closed-form spectral predictions and downstream error bounds: the noisy
//! label-graph spectrum, interlacing intervals for the mixed graph, the
//! semi-supervised and noisy-label population bounds, the noise-rate
//! threshold separating the optimal endpoints, the finite-sample bound, and
//! the labeling disagreement mass they all control.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NormalizedGraph, Spectrum, SymmetricGraph};
use crate::labels::{NoiseModel, SemiSupervisedLayout};

/// ν_j with 1-based index, clamped at the edges: j < 1 reads the top
/// eigenvalue, j > n reads 0.
fn nu_at(values: &Array1<f64>, index: isize) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    if index < 1 {
        values[0]
    } else if index as usize > values.len() {
        0.0
    } else {
        values[index as usize - 1]
    }
}

/// Predicted spectrum of the normalized semi-supervised noisy label graph,
/// given the spectrum of the clean labeled block: n_U + 1 eigenvalues equal
/// to 1, then α·μ_j for the remaining labeled directions.
pub fn predict_label_spectrum(
    mu: &Spectrum,
    nm: &NoiseModel,
    layout: &SemiSupervisedLayout,
) -> Result<Vec<f64>> {
    if mu.len() != layout.n_l {
        return Err(Error::DimensionMismatch {
            detail: format!("spectrum has {} entries, layout labels {}", mu.len(), layout.n_l),
        });
    }
    if layout.n_l > 0 {
        let defect = (mu.values()[0] - 1.0).abs();
        if defect > 1e-8 {
            // Class balance forces the top labeled eigenvalue to be exactly 1.
            return Err(Error::NotClassBalanced { defect });
        }
    }
    let mut predicted = vec![1.0; layout.n_u + 1];
    for j in 1..layout.n_l {
        predicted.push(nm.alpha() * mu.values()[j]);
    }
    if layout.n_l == 0 {
        predicted.truncate(layout.n_u);
        if layout.n_u == 0 {
            predicted.clear();
        }
    }
    Ok(predicted)
}

/// Deterministic-scenario specialization: {1 ×(n_U+1), α ×(r−1), 0 ×rest}.
pub fn deterministic_label_spectrum(nm: &NoiseModel, layout: &SemiSupervisedLayout) -> Vec<f64> {
    let n = layout.n();
    let mut predicted = Vec::with_capacity(n);
    for _ in 0..(layout.n_u + 1).min(n) {
        predicted.push(1.0);
    }
    for _ in 0..(nm.r() - 1).min(n.saturating_sub(predicted.len())) {
        predicted.push(nm.alpha());
    }
    while predicted.len() < n {
        predicted.push(0.0);
    }
    predicted
}

/// Interlacing interval for λ_{k+1} of (1−θ)Ā₀ + θĀ* in the deterministic
/// label scenario. `nu` is the spectrum of Ā₀ (length n), `mu` the spectrum
/// of the clean labeled block (length n_L).
pub fn mixed_spectrum_bounds(
    nu: &Spectrum,
    mu: &Spectrum,
    nm: &NoiseModel,
    layout: &SemiSupervisedLayout,
    theta: f64,
    k: usize,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::ThetaOutOfRange { theta });
    }
    let n = layout.n();
    if nu.len() != n {
        return Err(Error::DimensionMismatch {
            detail: format!("feature spectrum has {} entries, layout {}", nu.len(), n),
        });
    }
    if k + 1 > n {
        return Err(Error::IndexOutOfRange { index: k + 1, len: n });
    }
    // Deterministic scenario gate: the labeled block carries r eigenvalues at
    // 1 and the rest at 0.
    let r = nm.r();
    for (j, &m) in mu.values().iter().enumerate() {
        let expect = if j < r { 1.0 } else { 0.0 };
        if (m - expect).abs() > 1e-8 {
            return Err(Error::ConfigInvalid {
                reason: format!(
                    "labeled spectrum entry {j} is {m}, not the deterministic value {expect}"
                ),
            });
        }
    }

    let nu_v = nu.values();
    let alpha = nm.alpha();
    let n_l = layout.n_l as isize;
    let n_u = layout.n_u;
    let ki = k as isize;
    let ri = r as isize;
    // Lower-bound ν indices stay >= k+1 (the remaining mass is a plain Weyl
    // term there).
    let low = |idx: isize| nu_at(nu_v, idx.max(ki + 1));

    let (lower, upper) = if k <= n_u {
        let lower = (theta + (1.0 - theta) * low(n_l + ki))
            .max((1.0 - theta) * low(ki + 1))
            .max(theta * alpha + (1.0 - theta) * low(n_l + ki + 1 - ri));
        let upper = theta + (1.0 - theta) * nu_at(nu_v, ki + 1);
        (lower, upper)
    } else if k < n_u + r {
        let lower = ((1.0 - theta) * low(ki + 1))
            .max(theta * alpha + (1.0 - theta) * low(n_l + ki + 1 - ri));
        let upper = (theta + (1.0 - theta) * nu_at(nu_v, ki + 1))
            .min(theta * alpha + (1.0 - theta) * nu_at(nu_v, ki - n_u as isize));
        (lower, upper)
    } else {
        let lower = (1.0 - theta) * low(ki + 1);
        let upper = (theta + (1.0 - theta) * nu_at(nu_v, ki + 1))
            .min(theta * alpha + (1.0 - theta) * nu_at(nu_v, ki - n_u as isize))
            .min((1.0 - theta) * nu_at(nu_v, ki + 1 - ri - n_u as isize));
        (lower, upper)
    };
    Ok((lower, upper))
}

/// Inputs shared by the population bounds. `nu` holds the eigenvalues of Ā₀
/// in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub delta_u: f64,
    pub delta_s: f64,
    pub rho: f64,
    pub nu: Vec<f64>,
    pub k: usize,
    pub theta: f64,
    pub alpha: f64,
    pub r: usize,
    pub n_l: usize,
    pub n_u: usize,
}

impl BoundInputs {
    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta,
            ..self.clone()
        }
    }

    /// Soft-contract notes; the δ ordering is recommended, not required.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.delta_s > self.delta_u {
            w.push(format!(
                "delta_s {} exceeds delta_u {}; the ordering delta_s <= delta_u is the expected regime",
                self.delta_s, self.delta_u
            ));
        }
        w
    }

    fn nu_array(&self) -> Array1<f64> {
        Array1::from_vec(self.nu.clone())
    }
}

/// Which λ-candidate attained the minimum; ties resolve in term order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActiveTerm {
    /// θ + (1−θ)ν_{k+1}
    Term1,
    /// θα + (1−θ)ν_k
    Term2,
    /// (1−θ)ν_{k+1−r}
    Term3,
}

impl std::fmt::Display for ActiveTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ActiveTerm::Term1 => write!(f, "term1"),
            ActiveTerm::Term2 => write!(f, "term2"),
            ActiveTerm::Term3 => write!(f, "term3"),
        }
    }
}

/// The three λ-candidates of the noisy-label bound at embedding dimension k.
pub fn lambda_candidates(nu: &Array1<f64>, theta: f64, alpha: f64, k: usize, r: usize) -> [f64; 3] {
    let ki = k as isize;
    [
        theta + (1.0 - theta) * nu_at(nu, ki + 1),
        theta * alpha + (1.0 - theta) * nu_at(nu, ki),
        (1.0 - theta) * nu_at(nu, ki + 1 - r as isize),
    ]
}

/// λ(ν; θ, α) = min of the three candidates, with the attaining term.
pub fn lambda_mix(nu: &Array1<f64>, theta: f64, alpha: f64, k: usize, r: usize) -> (f64, ActiveTerm) {
    let c = lambda_candidates(nu, theta, alpha, k, r);
    let mut best = (c[0], ActiveTerm::Term1);
    if c[1] < best.0 {
        best = (c[1], ActiveTerm::Term2);
    }
    if c[2] < best.0 {
        best = (c[2], ActiveTerm::Term3);
    }
    best
}

/// Numerator core 2δ_u + [α(1+ρ)δ_s − 2δ_u + (1−α)]θ of the population
/// bounds; also the closed-form cap on the labeling disagreement mass.
pub fn disagreement_mass_bound(bi: &BoundInputs) -> f64 {
    2.0 * bi.delta_u
        + (bi.alpha * (1.0 + bi.rho) * bi.delta_s - 2.0 * bi.delta_u + (1.0 - bi.alpha)) * bi.theta
}

/// Evaluated bound together with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub active_term: ActiveTerm,
    pub inputs: BoundInputs,
    pub warnings: Vec<String>,
}

impl BoundReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

const DENOM_TOL: f64 = 1e-12;

/// Semi-supervised population bound (clean labels, k ≤ n_U):
/// 2[2δ_u + ((1+ρ)δ_s − 2δ_u)θ] / (1 − θ − (1−θ)ν_{k+1}) + 8δ_u.
pub fn semi_supervised_bound(bi: &BoundInputs) -> Result<BoundReport> {
    if (bi.alpha - 1.0).abs() > 1e-12 {
        return Err(Error::ConfigInvalid {
            reason: format!("semi-supervised bound needs alpha = 1, got {}", bi.alpha),
        });
    }
    if bi.k > bi.n_u {
        return Err(Error::ConfigInvalid {
            reason: format!("semi-supervised bound needs k <= n_U, got k={} n_U={}", bi.k, bi.n_u),
        });
    }
    let nu = bi.nu_array();
    let nu_k1 = nu_at(&nu, bi.k as isize + 1);
    let denominator = 1.0 - bi.theta - (1.0 - bi.theta) * nu_k1;
    if denominator <= DENOM_TOL {
        return Err(Error::DegenerateDenominator { value: denominator });
    }
    let numerator = 2.0 * disagreement_mass_bound(bi);
    let value = numerator / denominator + 8.0 * bi.delta_u;
    Ok(BoundReport {
        value,
        active_term: ActiveTerm::Term1,
        inputs: bi.clone(),
        warnings: bi.warnings(),
    })
}

/// Noisy-label population bound (n_U = 0, k > r):
/// 2[2δ_u + (α(1+ρ)δ_s − 2δ_u + (1−α))θ] / (1 − λ(ν; θ, α)) + 8δ_u.
pub fn noisy_label_bound(bi: &BoundInputs) -> Result<BoundReport> {
    if bi.n_u != 0 {
        return Err(Error::ConfigInvalid {
            reason: format!("noisy-label bound is the n_U = 0 path, got n_U = {}", bi.n_u),
        });
    }
    if bi.k <= bi.r {
        return Err(Error::ConfigInvalid {
            reason: format!("noisy-label bound needs k > r, got k={} r={}", bi.k, bi.r),
        });
    }
    let nu = bi.nu_array();
    let (lambda, active_term) = lambda_mix(&nu, bi.theta, bi.alpha, bi.k, bi.r);
    let denominator = 1.0 - lambda;
    if denominator <= DENOM_TOL {
        return Err(Error::DegenerateDenominator { value: denominator });
    }
    let value = 2.0 * disagreement_mass_bound(bi) / denominator + 8.0 * bi.delta_u;
    Ok(BoundReport {
        value,
        active_term,
        inputs: bi.clone(),
        warnings: bi.warnings(),
    })
}

/// Noise rate below which the supervised endpoint (θ = 1) wins:
/// ((r−1)/r)·(1 − sqrt((1 − ν_{k+1} − 2δ_u) / ((1 − (1+ρ)δ_s)(1 − ν_{k+1})))).
pub fn gamma_threshold(bi: &BoundInputs) -> Result<f64> {
    let nu = bi.nu_array();
    let nu_k1 = nu_at(&nu, bi.k as isize + 1);
    let supervised_slack = 1.0 - (1.0 + bi.rho) * bi.delta_s;
    if supervised_slack <= 0.0 {
        return Err(Error::UndefinedThreshold {
            radicand: supervised_slack,
        });
    }
    let denom = supervised_slack * (1.0 - nu_k1);
    if denom <= 0.0 {
        return Err(Error::UndefinedThreshold { radicand: denom });
    }
    let radicand = (1.0 - nu_k1 - 2.0 * bi.delta_u) / denom;
    if radicand < 0.0 {
        return Err(Error::UndefinedThreshold { radicand });
    }
    let rf = bi.r as f64;
    Ok((rf - 1.0) / rf * (1.0 - radicand.sqrt()))
}

/// Grid scan of the noisy-label bound over θ.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointScan {
    pub theta_star: f64,
    /// (θ, bound value) pairs in ascending θ order
    pub values: Vec<(f64, f64)>,
    /// set when an interior θ beats both endpoints by more than 1e-12
    pub interior_violation: Option<(f64, f64)>,
}

/// Evaluate the noisy-label bound across a θ grid containing both endpoints;
/// ties resolve toward the smaller θ, so a constant bound reports θ* = 0.
pub fn endpoint_scan(bi: &BoundInputs, theta_grid: &[f64]) -> Result<EndpointScan> {
    let mut grid: Vec<f64> = theta_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if grid.first() != Some(&0.0) || grid.last() != Some(&1.0) {
        return Err(Error::ConfigInvalid {
            reason: "theta grid must contain both endpoints 0 and 1".to_string(),
        });
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &theta in &grid {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::ThetaOutOfRange { theta });
        }
        let value = noisy_label_bound(&bi.with_theta(theta))?.value;
        values.push((theta, value));
        if best.map_or(true, |(_, v)| value < v) {
            best = Some((theta, value));
        }
    }
    let (theta_star, best_value) = best.expect("non-empty grid");
    let endpoint_min = values
        .first()
        .unwrap()
        .1
        .min(values.last().unwrap().1);
    let interior_violation = if theta_star != 0.0
        && theta_star != 1.0
        && endpoint_min - best_value > 1e-12
    {
        Some((theta_star, endpoint_min - best_value))
    } else {
        None
    };
    Ok(EndpointScan {
        theta_star,
        values,
        interior_violation,
    })
}

/// Finite-sample inputs: Rademacher complexity, the sup-norm bound κ, the
/// failure probability ε, sample size n, and optional constants c₁, c₂
/// (defaults k²κ²+kκ and kκ²+k²κ⁴).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSampleInputs {
    pub rademacher: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub n: usize,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

impl FiniteSampleInputs {
    fn resolved_c1(&self, k: usize) -> f64 {
        let kf = k as f64;
        self.c1
            .unwrap_or(kf * kf * self.kappa * self.kappa + kf * self.kappa)
    }

    fn resolved_c2(&self, k: usize) -> f64 {
        let kf = k as f64;
        self.c2.unwrap_or(
            kf * self.kappa * self.kappa + kf * kf * self.kappa.powi(4),
        )
    }

    /// sqrt(log(2/ε)/n) + ε, with ε = 0 as the exact population limit.
    fn deviation(&self) -> f64 {
        if self.epsilon > 0.0 {
            ((2.0 / self.epsilon).ln() / self.n as f64).sqrt() + self.epsilon
        } else {
            0.0
        }
    }
}

/// Finite-sample evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSampleReport {
    pub value: f64,
    pub best_k_prime: usize,
    pub approx_term: f64,
    pub sample_term: f64,
    pub inputs: BoundInputs,
    pub warnings: Vec<String>,
}

/// Admissible k′ range per the eigen-gap requirement: 1 ..= k+1−r.
pub fn full_k_prime_range(bi: &BoundInputs) -> Result<(usize, usize)> {
    if bi.k + 1 <= bi.r {
        return Err(Error::EmptyKRange { lo: 1, hi: 0 });
    }
    Ok((1, bi.k + 1 - bi.r))
}

/// Finite-sample bound: minimum over k′ of
/// 2φ̂/(1−λ(ν;θ,α,k′+1)) + 4k′[c₁R̂ + c₂(sqrt(log(2/ε)/n)+ε)]/((1−θ)ν_{k′} − λ(ν;θ,α,k+1))²,
/// plus 8δ_u. k′ entries with degenerate denominators are skipped.
pub fn finite_sample_bound(
    bi: &BoundInputs,
    fsi: &FiniteSampleInputs,
    k_prime_range: (usize, usize),
) -> Result<FiniteSampleReport> {
    let (full_lo, full_hi) = full_k_prime_range(bi)?;
    let (lo, hi) = k_prime_range;
    if lo < full_lo || hi > full_hi || lo > hi {
        return Err(Error::EmptyKRange { lo, hi });
    }
    let nu = bi.nu_array();
    let (lambda_k1, _) = lambda_mix(&nu, bi.theta, bi.alpha, bi.k, bi.r);
    let numerator = 2.0 * disagreement_mass_bound(bi);
    let noise = fsi.resolved_c1(bi.k) * fsi.rademacher + fsi.resolved_c2(bi.k) * fsi.deviation();

    let mut best: Option<(f64, usize, f64, f64)> = None;
    let mut worst_denominator = f64::INFINITY;
    for k_prime in lo..=hi {
        let (lambda_kp, _) = lambda_mix(&nu, bi.theta, bi.alpha, k_prime, bi.r);
        let approx_denominator = 1.0 - lambda_kp;
        let gap = (1.0 - bi.theta) * nu_at(&nu, k_prime as isize) - lambda_k1;
        worst_denominator = worst_denominator.min(approx_denominator).min(gap);
        if approx_denominator <= DENOM_TOL || gap <= DENOM_TOL {
            continue;
        }
        let approx_term = numerator / approx_denominator;
        let sample_term = 4.0 * k_prime as f64 * noise / (gap * gap);
        let total = approx_term + sample_term;
        if best.map_or(true, |(v, _, _, _)| total < v) {
            best = Some((total, k_prime, approx_term, sample_term));
        }
    }
    match best {
        Some((total, best_k_prime, approx_term, sample_term)) => Ok(FiniteSampleReport {
            value: total + 8.0 * bi.delta_u,
            best_k_prime,
            approx_term,
            sample_term,
            inputs: bi.clone(),
            warnings: bi.warnings(),
        }),
        None => Err(Error::DegenerateDenominator {
            value: worst_denominator,
        }),
    }
}

/// Exact disagreement mass of a labeling over the mixed graph at mass scale:
/// Σ_{i,j} [(1−θ)w_ij + θ√(w_i w_j)Ā*_ij]·1[ŷ(x_i) ≠ ŷ(x_j)].
pub fn disagreement_mass(
    a0: &SymmetricGraph,
    a_star: &NormalizedGraph,
    theta: f64,
    labels: &[usize],
) -> Result<f64> {
    if labels.len() != a0.n() {
        return Err(Error::DimensionMismatch {
            detail: format!("{} labels for {} vertices", labels.len(), a0.n()),
        });
    }
    let mixed = crate::joint::mixed_edge_mass(a0, a_star, theta)?;
    let n = a0.n();
    let mut mass = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] != labels[j] {
                mass += mixed.weights()[[i, j]];
            }
        }
    }
    Ok(mass)
}

/// Probe-norm cap of the noisy-label bound: 1/((1−θ)ν_k), infinite when the
/// denominator vanishes.
pub fn probe_norm_cap(nu: &[f64], theta: f64, k: usize) -> f64 {
    let nu = Array1::from_vec(nu.to_vec());
    let denom = (1.0 - theta) * nu_at(&nu, k as isize);
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::eigh;
    use crate::labels::{
        closed_form_semi_graph, make_noise_model, PosteriorMatrix,
    };
    use ndarray::Array2;

    fn tiny_inputs() -> BoundInputs {
        BoundInputs {
            delta_u: 0.05,
            delta_s: 0.02,
            rho: 1.0,
            nu: vec![1.0, 0.8, 0.6, 0.5, 0.3, 0.1, 0.05, 0.0],
            k: 4,
            theta: 0.0,
            alpha: 0.64,
            r: 2,
            n_l: 8,
            n_u: 0,
        }
    }

    #[test]
    fn predicted_spectrum_tiny() {
        let y = PosteriorMatrix::deterministic(&[0, 0, 1, 1], 2).unwrap();
        let nm = make_noise_model(2, 0.25).unwrap();
        let layout = SemiSupervisedLayout::new(4, 0);
        let a_l = closed_form_semi_graph(&y, &make_noise_model(2, 0.0).unwrap(), &layout).unwrap();
        let mu = eigh(a_l.matrix()).unwrap();
        let predicted = predict_label_spectrum(&mu, &nm, &layout).unwrap();
        let expect = [1.0, 0.25, 0.0, 0.0];
        for (p, e) in predicted.iter().zip(expect.iter()) {
            assert!((p - e).abs() < 1e-10, "{p} vs {e}");
        }
        assert_eq!(
            deterministic_label_spectrum(&nm, &layout),
            vec![1.0, 0.25, 0.0, 0.0]
        );
    }

    #[test]
    fn predicted_spectrum_identity_cases() {
        let nm = make_noise_model(2, 0.0).unwrap();
        // No labels at all: the graph is the identity on the unlabeled block.
        let layout = SemiSupervisedLayout::new(0, 3);
        let empty = eigh(&Array2::zeros((0, 0))).unwrap();
        let predicted = predict_label_spectrum(&empty, &nm, &layout).unwrap();
        assert_eq!(predicted, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn lambda_mix_theta_endpoints() {
        let bi = tiny_inputs();
        let nu = Array1::from_vec(bi.nu.clone());
        let (l0, t0) = lambda_mix(&nu, 0.0, bi.alpha, bi.k, bi.r);
        assert_eq!(l0, bi.nu[4]);
        assert_eq!(t0, ActiveTerm::Term1);
        let (l1, t1) = lambda_mix(&nu, 1.0, bi.alpha, bi.k, bi.r);
        assert_eq!(l1, 0.0);
        assert_eq!(t1, ActiveTerm::Term3);
    }

    #[test]
    fn noisy_bound_unsupervised_endpoint() {
        let mut bi = tiny_inputs();
        bi.nu = vec![1.0, 0.9, 0.8, 0.7, 0.5, 0.5, 0.2, 0.0];
        bi.k = 4;
        bi.theta = 0.0;
        let report = noisy_label_bound(&bi).unwrap();
        // 4·0.05/(1−0.5) + 8·0.05 = 0.8
        assert!((report.value - 0.8).abs() < 1e-12);
    }

    #[test]
    fn noisy_bound_supervised_clean_endpoint() {
        let mut bi = tiny_inputs();
        bi.theta = 1.0;
        bi.alpha = 1.0;
        bi.delta_s = 0.02;
        bi.delta_u = 0.05;
        bi.rho = 1.0;
        let report = noisy_label_bound(&bi).unwrap();
        // 2(1+ρ)δ_s + 8δ_u = 0.08 + 0.4
        assert!((report.value - 0.48).abs() < 1e-12);
        assert!(report.value >= 8.0 * bi.delta_u);
    }

    #[test]
    fn noisy_bound_rejects_bad_shapes() {
        let mut bi = tiny_inputs();
        bi.n_u = 2;
        assert!(noisy_label_bound(&bi).is_err());
        let mut bi = tiny_inputs();
        bi.k = 2;
        assert!(noisy_label_bound(&bi).is_err());
    }

    #[test]
    fn semi_bound_examples() {
        let bi = BoundInputs {
            delta_u: 0.05,
            delta_s: 0.02,
            rho: 1.0,
            nu: vec![1.0, 0.9, 0.5, 0.3, 0.2, 0.1],
            k: 1,
            theta: 0.0,
            alpha: 1.0,
            r: 2,
            n_l: 2,
            n_u: 4,
        };
        // ν_{k+1} = 0.9 at k=1: 4·0.05/(1−0.9·1... ) — use k=2 for ν=0.5.
        let bi = BoundInputs { k: 2, ..bi };
        let report = semi_supervised_bound(&bi).unwrap();
        assert!((report.value - (4.0 * 0.05 / 0.5 + 0.4)).abs() < 1e-12);

        // Perfect recovery: bound collapses to zero.
        let zero = BoundInputs {
            delta_u: 0.0,
            delta_s: 0.0,
            ..bi.clone()
        };
        assert_eq!(semi_supervised_bound(&zero).unwrap().value, 0.0);

        // θ → 1 degenerates the denominator.
        let at_one = bi.with_theta(1.0);
        assert!(matches!(
            semi_supervised_bound(&at_one),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn gamma_threshold_arithmetic() {
        let bi = BoundInputs {
            delta_u: 0.05,
            delta_s: 0.02,
            rho: 1.0,
            nu: vec![1.0; 5].into_iter().chain(vec![0.5; 10]).collect(),
            k: 12,
            theta: 0.0,
            alpha: 1.0,
            r: 10,
            n_l: 15,
            n_u: 0,
        };
        // Exact arithmetic: 0.9·(1 − sqrt(0.4/0.48)).
        let expect = 0.9 * (1.0 - (0.4f64 / 0.48).sqrt());
        let got = gamma_threshold(&bi).unwrap();
        assert!((got - expect).abs() < 1e-15);
        assert!((got - 0.07841616374225084).abs() < 1e-12);

        let perfect = BoundInputs {
            delta_u: 0.0,
            delta_s: 0.0,
            ..bi.clone()
        };
        assert_eq!(gamma_threshold(&perfect).unwrap(), 0.0);

        // Radicand above one: negative threshold, θ=0 wins for every γ.
        let skewed = BoundInputs {
            delta_u: 0.0,
            delta_s: 0.3,
            ..bi.clone()
        };
        assert!(gamma_threshold(&skewed).unwrap() < 0.0);

        // Radicand below zero.
        let hopeless = BoundInputs {
            delta_u: 0.4,
            ..bi
        };
        assert!(matches!(
            gamma_threshold(&hopeless),
            Err(Error::UndefinedThreshold { .. })
        ));
    }

    #[test]
    fn endpoint_scan_tie_breaks_to_zero() {
        let bi = BoundInputs {
            delta_u: 0.0,
            delta_s: 0.0,
            rho: 1.0,
            nu: vec![1.0, 0.5, 0.4, 0.3, 0.2, 0.0],
            k: 4,
            theta: 0.0,
            alpha: 1.0,
            r: 2,
            n_l: 6,
            n_u: 0,
        };
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let scan = endpoint_scan(&bi, &grid).unwrap();
        assert_eq!(scan.theta_star, 0.0);
        assert!(scan.values.iter().all(|&(_, v)| v == 0.0));
        assert!(scan.interior_violation.is_none());
    }

    #[test]
    fn endpoint_scan_requires_endpoints() {
        let bi = tiny_inputs();
        assert!(endpoint_scan(&bi, &[0.2, 0.4]).is_err());
    }

    #[test]
    fn finite_sample_reduces_to_population() {
        let bi = tiny_inputs();
        let fsi = FiniteSampleInputs {
            rademacher: 0.0,
            kappa: 1.0,
            epsilon: 0.0,
            n: 100,
            c1: None,
            c2: None,
        };
        let range = full_k_prime_range(&bi).unwrap();
        let report = finite_sample_bound(&bi, &fsi, range).unwrap();
        // Sample term vanishes; the value is the population formula
        // minimized over k'.
        let nu = Array1::from_vec(bi.nu.clone());
        let numerator = 2.0 * disagreement_mass_bound(&bi);
        let mut best = f64::INFINITY;
        for k_prime in range.0..=range.1 {
            let (lambda, _) = lambda_mix(&nu, bi.theta, bi.alpha, k_prime, bi.r);
            best = best.min(numerator / (1.0 - lambda));
        }
        assert!((report.value - (best + 8.0 * bi.delta_u)).abs() < 1e-12);
        assert_eq!(report.sample_term, 0.0);
    }

    #[test]
    fn finite_sample_monotone_terms() {
        let bi = BoundInputs {
            delta_u: 0.05,
            delta_s: 0.02,
            rho: 1.2,
            nu: vec![1.0, 0.9, 0.75, 0.6, 0.45, 0.3, 0.15, 0.05],
            k: 6,
            theta: 0.4,
            alpha: 0.5,
            r: 2,
            n_l: 8,
            n_u: 0,
        };
        let fsi = FiniteSampleInputs {
            rademacher: 0.01,
            kappa: 1.0,
            epsilon: 0.05,
            n: 5000,
            c1: None,
            c2: None,
        };
        let (lo, hi) = full_k_prime_range(&bi).unwrap();
        let mut prev_approx = f64::INFINITY;
        let mut prev_sample = 0.0f64;
        let mut checked = 0;
        for k_prime in lo..=hi {
            // The gap can reach exactly zero at the k' edge; that entry is
            // degenerate by contract.
            let Ok(report) = finite_sample_bound(&bi, &fsi, (k_prime, k_prime)) else {
                assert_eq!(k_prime, hi);
                break;
            };
            assert!(report.approx_term <= prev_approx + 1e-12);
            assert!(report.sample_term >= prev_sample - 1e-12);
            prev_approx = report.approx_term;
            prev_sample = report.sample_term;
            checked += 1;
        }
        assert!(checked >= 3);
    }

    #[test]
    fn finite_sample_flags_degenerate_gap() {
        let mut bi = tiny_inputs();
        // Flat spectrum at the top: (1−θ)ν_{k'} equals λ(k+1) and the gap
        // collapses.
        bi.nu = vec![1.0; 8];
        bi.theta = 0.0;
        let fsi = FiniteSampleInputs {
            rademacher: 0.0,
            kappa: 1.0,
            epsilon: 0.0,
            n: 10,
            c1: None,
            c2: None,
        };
        let range = full_k_prime_range(&bi).unwrap();
        assert!(matches!(
            finite_sample_bound(&bi, &fsi, range),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn empty_k_range_rejected() {
        let mut bi = tiny_inputs();
        bi.k = 1;
        bi.r = 2;
        assert!(matches!(
            full_k_prime_range(&bi),
            Err(Error::EmptyKRange { .. })
        ));
    }

    #[test]
    fn probe_cap_behaviour() {
        let nu = vec![1.0, 0.5, 0.25];
        assert_eq!(probe_norm_cap(&nu, 0.0, 2), 2.0);
        assert_eq!(probe_norm_cap(&nu, 1.0, 2), f64::INFINITY);
    }
}
