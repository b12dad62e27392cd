//! Label-similarity machinery: class posterior matrices, symmetric-noise
//! transition matrices T with their (α, β) coefficients, and the label graphs
//! Y Yᵀ / Y T² Yᵀ together with their degree-normalized closed form for
//! class-balanced data.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::graph::{DegreeVector, NormalizedGraph, SymmetricGraph};

/// n_L × r matrix of class posteriors; each row is a probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    n_l: usize,
    r: usize,
    eta: Array2<f64>,
}

impl PosteriorMatrix {
    pub fn new(eta: Array2<f64>) -> Result<Self> {
        let (n_l, r) = eta.dim();
        for (i, row) in eta.rows().into_iter().enumerate() {
            let sum: f64 = row.sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Format {
                    detail: format!("posterior row {i} sums to {sum:.17}"),
                });
            }
            for &v in row.iter() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Format {
                        detail: format!("posterior entry {v} outside [0, 1] in row {i}"),
                    });
                }
            }
        }
        Ok(Self { n_l, r, eta })
    }

    /// One-hot posteriors from hard labels.
    pub fn deterministic(labels: &[usize], r: usize) -> Result<Self> {
        let mut eta = Array2::zeros((labels.len(), r));
        for (i, &y) in labels.iter().enumerate() {
            if y >= r {
                return Err(Error::Format {
                    detail: format!("label {y} out of range for {r} classes"),
                });
            }
            eta[[i, y]] = 1.0;
        }
        Self::new(eta)
    }

    pub fn n_l(&self) -> usize {
        self.n_l
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn eta(&self) -> &Array2<f64> {
        &self.eta
    }

    /// Soft class counts n_ℓ (column sums).
    pub fn class_counts(&self) -> Array1<f64> {
        let mut counts = Array1::zeros(self.r);
        for row in self.eta.rows() {
            for (l, &v) in row.iter().enumerate() {
                counts[l] += v;
            }
        }
        counts
    }

    /// Largest |n_ℓ − n_L/r| over classes.
    pub fn balance_defect(&self) -> f64 {
        let target = self.n_l as f64 / self.r as f64;
        self.class_counts()
            .iter()
            .map(|&c| (c - target).abs())
            .fold(0.0, f64::max)
    }

    /// Column sums equal n_L/r within the class-balance tolerance.
    pub fn is_class_balanced(&self) -> bool {
        self.balance_defect() <= Tolerances::DEFAULT.class_balance
    }

    /// Hard labels via row argmax (ties toward the smallest class index).
    pub fn argmax_labels(&self) -> Vec<usize> {
        self.eta
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }

    /// CSV with a header row of class ids.
    pub fn to_csv(&self) -> String {
        let header: Vec<String> = (0..self.r).map(|j| j.to_string()).collect();
        let mut out = header.join(",");
        out.push('\n');
        out.push_str(&crate::io::matrix_to_csv(&self.eta));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format {
            detail: "empty posterior csv".to_string(),
        })?;
        let r = header.split(',').count();
        let body: String = lines.collect::<Vec<&str>>().join("\n");
        let eta = crate::io::matrix_from_csv(&body)?;
        if eta.ncols() != r {
            return Err(Error::Format {
                detail: format!("header lists {r} classes but rows have {}", eta.ncols()),
            });
        }
        Self::new(eta)
    }
}

/// Symmetric label-noise model: transition matrix T with 1−γ on the diagonal
/// and γ/(r−1) off it, plus the derived coefficients
/// α = (1 − rγ/(r−1))² and β = (γ/(r−1))(2 − rγ/(r−1)).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    r: usize,
    gamma: f64,
    t: Array2<f64>,
    alpha: f64,
    beta: f64,
}

/// JSON form of a [`NoiseModel`] (`{r, gamma, alpha, beta}`).
#[derive(Debug, Serialize, Deserialize)]
pub struct NoiseModelRecord {
    pub r: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
}

pub fn make_noise_model(r: usize, gamma: f64) -> Result<NoiseModel> {
    if r < 2 {
        return Err(Error::ConfigInvalid {
            reason: format!("need at least 2 classes, got {r}"),
        });
    }
    let max = (r as f64 - 1.0) / r as f64;
    if !(0.0..max).contains(&gamma) {
        return Err(Error::NoiseRateOutOfRange { gamma, max });
    }
    let rf = r as f64;
    let off = gamma / (rf - 1.0);
    let mut t = Array2::from_elem((r, r), off);
    for i in 0..r {
        t[[i, i]] = 1.0 - gamma;
    }
    let shrink = 1.0 - rf * gamma / (rf - 1.0);
    let alpha = shrink * shrink;
    let beta = off * (2.0 - rf * gamma / (rf - 1.0));
    Ok(NoiseModel {
        r,
        gamma,
        t,
        alpha,
        beta,
    })
}

impl NoiseModel {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn transition(&self) -> &Array2<f64> {
        &self.t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// T² as the closed form α·I + β·11ᵀ.
    pub fn t_squared_closed_form(&self) -> Array2<f64> {
        let mut m = Array2::from_elem((self.r, self.r), self.beta);
        for i in 0..self.r {
            m[[i, i]] += self.alpha;
        }
        m
    }

    pub fn record(&self) -> NoiseModelRecord {
        NoiseModelRecord {
            r: self.r,
            gamma: self.gamma,
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.record())?)
    }
}

/// Labeled/unlabeled split; labeled indices are 0..n_L−1 by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiSupervisedLayout {
    pub n_l: usize,
    pub n_u: usize,
}

impl SemiSupervisedLayout {
    pub fn new(n_l: usize, n_u: usize) -> Self {
        Self { n_l, n_u }
    }

    pub fn n(&self) -> usize {
        self.n_l + self.n_u
    }
}

/// Ỹ = Y·T for an arbitrary row-stochastic transition matrix.
pub fn apply_transition(y: &PosteriorMatrix, t: &Array2<f64>) -> Result<PosteriorMatrix> {
    if t.nrows() != y.r || t.ncols() != y.r {
        return Err(Error::DimensionMismatch {
            detail: format!(
                "transition is {}x{} but posteriors have {} classes",
                t.nrows(),
                t.ncols(),
                y.r
            ),
        });
    }
    PosteriorMatrix::new(y.eta.dot(t))
}

/// Ỹ = Y·T under the symmetric noise model.
pub fn apply_noise(y: &PosteriorMatrix, nm: &NoiseModel) -> Result<PosteriorMatrix> {
    apply_transition(y, &nm.t)
}

/// Seeded hard-label noise realization: each row's label is redrawn from the
/// corresponding row of T. Output rows are one-hot.
///
/// This is the experimental counterpart of [`apply_noise`]: the analytic
/// Ỹ = Y·T is a population object, while training runs corrupt concrete
/// labels.
pub fn sample_noisy_labels(y: &PosteriorMatrix, nm: &NoiseModel, seed: u64) -> Result<PosteriorMatrix> {
    if y.r != nm.r {
        return Err(Error::DimensionMismatch {
            detail: format!("posteriors have {} classes, noise model {}", y.r, nm.r),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clean = y.argmax_labels();
    let mut flipped = Vec::with_capacity(clean.len());
    for &label in &clean {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = nm.r - 1;
        for j in 0..nm.r {
            acc += nm.t[[label, j]];
            if u < acc {
                chosen = j;
                break;
            }
        }
        flipped.push(chosen);
    }
    PosteriorMatrix::deterministic(&flipped, nm.r)
}

/// A_L = Y Yᵀ: edge weight is the probability both points carry the same
/// class.
pub fn label_graph(y: &PosteriorMatrix) -> SymmetricGraph {
    let weights = y.eta.dot(&y.eta.t());
    SymmetricGraph::from_raw(weights, false).expect("square by construction")
}

/// A*_L = Y T² Yᵀ: label graph of the noisy posteriors.
pub fn noisy_label_graph(y: &PosteriorMatrix, nm: &NoiseModel) -> Result<SymmetricGraph> {
    if y.r != nm.r {
        return Err(Error::DimensionMismatch {
            detail: format!("posteriors have {} classes, noise model {}", y.r, nm.r),
        });
    }
    let t2 = nm.t.dot(&nm.t);
    let weights: Array2<f64> = y.eta.dot(&t2).dot(&y.eta.t());
    Ok(SymmetricGraph::from_raw(weights, false).expect("square by construction"))
}

/// Block graph of the semi-supervised sample: Y T² Yᵀ on the labeled block,
/// identity on the unlabeled block, zero in between.
pub fn semi_block_graph(
    y: &PosteriorMatrix,
    nm: &NoiseModel,
    layout: &SemiSupervisedLayout,
) -> Result<SymmetricGraph> {
    if layout.n_l != y.n_l {
        return Err(Error::DimensionMismatch {
            detail: format!("layout says {} labeled, posteriors have {}", layout.n_l, y.n_l),
        });
    }
    let labeled = noisy_label_graph(y, nm)?;
    let n = layout.n();
    let mut weights = Array2::zeros((n, n));
    for i in 0..layout.n_l {
        for j in 0..layout.n_l {
            weights[[i, j]] = labeled.weights()[[i, j]];
        }
    }
    for i in layout.n_l..n {
        weights[[i, i]] = 1.0;
    }
    Ok(SymmetricGraph::from_raw(weights, false).expect("square by construction"))
}

/// Degree-normalize a semi-supervised block graph using the labeled-block
/// degree formula d_i = α Σ_ℓ η_ℓ(x_i) n_ℓ + n_L β; unlabeled degrees are 1.
pub fn normalize_label_block(
    a_star: &SymmetricGraph,
    y: &PosteriorMatrix,
    nm: &NoiseModel,
) -> Result<NormalizedGraph> {
    let n = a_star.n();
    if n < y.n_l {
        return Err(Error::DimensionMismatch {
            detail: format!("block graph has {n} vertices, posteriors {}", y.n_l),
        });
    }
    let counts = y.class_counts();
    let n_l = y.n_l as f64;
    let mut degree_values = Array1::ones(n);
    for i in 0..y.n_l {
        let mut d = 0.0;
        for l in 0..y.r {
            d += y.eta[[i, l]] * counts[l];
        }
        degree_values[i] = nm.alpha * d + n_l * nm.beta;
    }
    let degrees = DegreeVector::new(degree_values)?;
    let inv_sqrt: Array1<f64> = degrees.values().mapv(|w| 1.0 / w.sqrt());
    let mut matrix = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            matrix[[i, j]] = a_star.weights()[[i, j]] * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    NormalizedGraph::from_parts(matrix, degrees)
}

/// Ā* assembled directly from (α, β) for class-balanced labeled data:
/// α Ā_L + β (r/n_L) 11ᵀ on the labeled block, identity on the unlabeled
/// block. Never forms T².
pub fn closed_form_semi_graph(
    y: &PosteriorMatrix,
    nm: &NoiseModel,
    layout: &SemiSupervisedLayout,
) -> Result<NormalizedGraph> {
    if layout.n_l != y.n_l {
        return Err(Error::DimensionMismatch {
            detail: format!("layout says {} labeled, posteriors have {}", layout.n_l, y.n_l),
        });
    }
    let defect = y.balance_defect();
    if defect > Tolerances::DEFAULT.class_balance {
        return Err(Error::NotClassBalanced { defect });
    }
    let n = layout.n();
    let n_l = y.n_l;
    let scale = y.r as f64 / n_l.max(1) as f64;
    let a_l = label_graph(y);
    let mut matrix = Array2::zeros((n, n));
    for i in 0..n_l {
        for j in 0..n_l {
            // Ā_L = (r/n_L) A_L under class balance.
            matrix[[i, j]] = nm.alpha * scale * a_l.weights()[[i, j]] + nm.beta * scale;
        }
    }
    for i in n_l..n {
        matrix[[i, i]] = 1.0;
    }
    // Balanced labeled degrees are exactly n_L/r; unlabeled degrees 1.
    let mut degree_values = Array1::ones(n);
    let balanced = n_l as f64 / y.r as f64;
    for i in 0..n_l {
        degree_values[i] = balanced;
    }
    NormalizedGraph::from_parts(matrix, DegreeVector::new(degree_values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;
    use ndarray::array;

    /// Four labeled points, two classes, hard labels (0, 0, 1, 1), γ = 0.25.
    pub fn tiny() -> (PosteriorMatrix, NoiseModel) {
        let y = PosteriorMatrix::deterministic(&[0, 0, 1, 1], 2).unwrap();
        let nm = make_noise_model(2, 0.25).unwrap();
        (y, nm)
    }

    #[test]
    fn noise_model_identity_at_zero() {
        let nm = make_noise_model(2, 0.0).unwrap();
        assert_eq!(nm.transition(), &Array2::<f64>::eye(2));
        assert_eq!(nm.alpha(), 1.0);
        assert_eq!(nm.beta(), 0.0);
    }

    #[test]
    fn noise_model_quarter() {
        let nm = make_noise_model(2, 0.25).unwrap();
        assert_eq!(nm.transition(), &array![[0.75, 0.25], [0.25, 0.75]]);
        assert!((nm.alpha() - 0.25).abs() < 1e-15);
        assert!((nm.beta() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn noise_model_rejects_boundary() {
        assert!(matches!(
            make_noise_model(2, 0.5),
            Err(Error::NoiseRateOutOfRange { .. })
        ));
        assert!(make_noise_model(2, -0.1).is_err());
        assert!(make_noise_model(1, 0.0).is_err());
    }

    #[test]
    fn alpha_plus_r_beta_is_one() {
        for r in 2..=10usize {
            for step in 0..20 {
                let gamma = (r as f64 - 1.0) / r as f64 * step as f64 / 20.0;
                let nm = make_noise_model(r, gamma).unwrap();
                assert!(
                    (nm.alpha() + r as f64 * nm.beta() - 1.0).abs() <= 1e-12,
                    "r={r} gamma={gamma}"
                );
            }
        }
    }

    #[test]
    fn alpha_decreases_beta_increases() {
        for r in [2usize, 3, 7] {
            let mut prev_alpha = f64::INFINITY;
            let mut prev_beta = f64::NEG_INFINITY;
            for step in 0..30 {
                let gamma = (r as f64 - 1.0) / r as f64 * step as f64 / 30.0;
                let nm = make_noise_model(r, gamma).unwrap();
                assert!(nm.alpha() < prev_alpha);
                assert!(nm.beta() > prev_beta);
                prev_alpha = nm.alpha();
                prev_beta = nm.beta();
            }
        }
    }

    #[test]
    fn t_squared_matches_closed_form() {
        for (r, gamma) in [(2usize, 0.25), (3, 0.4), (10, 0.85)] {
            let nm = make_noise_model(r, gamma).unwrap();
            let direct = nm.transition().dot(nm.transition());
            let closed = nm.t_squared_closed_form();
            assert!(graph::frobenius_distance(&direct, &closed) <= 1e-12);
        }
    }

    #[test]
    fn apply_noise_examples() {
        let (y, _) = tiny();
        let clean = make_noise_model(2, 0.0).unwrap();
        assert_eq!(apply_noise(&y, &clean).unwrap().eta(), y.eta());

        let nm = make_noise_model(2, 0.25).unwrap();
        let one_hot = PosteriorMatrix::deterministic(&[0], 2).unwrap();
        let noisy = apply_noise(&one_hot, &nm).unwrap();
        assert_eq!(noisy.eta(), &array![[0.75, 0.25]]);

        let uniform = PosteriorMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let still = apply_noise(&uniform, &nm).unwrap();
        assert!(graph::frobenius_distance(still.eta(), uniform.eta()) < 1e-15);
    }

    #[test]
    fn label_graph_examples() {
        let (y, _) = tiny();
        let g = label_graph(&y);
        let expect = array![
            [1.0, 1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 1.0],
            [0.0, 0.0, 1.0, 1.0]
        ];
        assert_eq!(g.weights(), &expect);

        let single = PosteriorMatrix::new(array![[0.6, 0.4]]).unwrap();
        let g = label_graph(&single);
        assert!((g.weights()[[0, 0]] - 0.52).abs() < 1e-15);

        let eye = PosteriorMatrix::deterministic(&[0, 1], 2).unwrap();
        assert_eq!(label_graph(&eye).weights(), &Array2::<f64>::eye(2));
    }

    #[test]
    fn noisy_label_graph_tiny_entries() {
        let (y, nm) = tiny();
        let g = noisy_label_graph(&y, &nm).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i < 2) == (j < 2) { 0.625 } else { 0.375 };
                assert!((g.weights()[[i, j]] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn noisy_label_graph_uniform_posteriors() {
        let uniform = PosteriorMatrix::new(Array2::from_elem((3, 2), 0.5)).unwrap();
        let nm = make_noise_model(2, 0.3).unwrap();
        let g = noisy_label_graph(&uniform, &nm).unwrap();
        for &v in g.weights().iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn semi_block_graph_shapes() {
        let (y, nm) = tiny();
        let no_unlabeled = SemiSupervisedLayout::new(4, 0);
        let g = semi_block_graph(&y, &nm, &no_unlabeled).unwrap();
        assert_eq!(
            g.weights(),
            noisy_label_graph(&y, &nm).unwrap().weights()
        );

        let empty = PosteriorMatrix::new(Array2::zeros((0, 2))).unwrap();
        let all_unlabeled = SemiSupervisedLayout::new(0, 3);
        let g = semi_block_graph(&empty, &nm, &all_unlabeled).unwrap();
        assert_eq!(g.weights(), &Array2::<f64>::eye(3));

        let with_two = SemiSupervisedLayout::new(4, 2);
        let g = semi_block_graph(&y, &nm, &with_two).unwrap();
        assert_eq!(g.n(), 6);
        assert!((g.weights()[[0, 0]] - 0.625).abs() < 1e-15);
        assert_eq!(g.weights()[[4, 4]], 1.0);
        assert_eq!(g.weights()[[0, 4]], 0.0);
    }

    #[test]
    fn normalize_label_block_tiny() {
        let (y, nm) = tiny();
        let layout = SemiSupervisedLayout::new(4, 0);
        let block = semi_block_graph(&y, &nm, &layout).unwrap();
        let ng = normalize_label_block(&block, &y, &nm).unwrap();
        for &d in ng.source_degrees().values().iter() {
            assert!((d - 2.0).abs() < 1e-15);
        }
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i < 2) == (j < 2) { 0.3125 } else { 0.1875 };
                assert!((ng.matrix()[[i, j]] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn normalize_label_block_clean_deterministic() {
        let (y, _) = tiny();
        let clean = make_noise_model(2, 0.0).unwrap();
        let layout = SemiSupervisedLayout::new(4, 0);
        let block = semi_block_graph(&y, &clean, &layout).unwrap();
        let ng = normalize_label_block(&block, &y, &clean).unwrap();
        // Entries r/n_L = 0.5 inside class blocks.
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i < 2) == (j < 2) { 0.5 } else { 0.0 };
                assert!((ng.matrix()[[i, j]] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_matches_direct_normalization() {
        let (y, nm) = tiny();
        let layout = SemiSupervisedLayout::new(4, 2);
        let closed = closed_form_semi_graph(&y, &nm, &layout).unwrap();
        let direct =
            normalize_label_block(&semi_block_graph(&y, &nm, &layout).unwrap(), &y, &nm).unwrap();
        assert!(graph::frobenius_distance(closed.matrix(), direct.matrix()) <= 1e-12);
        assert!((closed.matrix()[[0, 0]] - 0.3125).abs() < 1e-15);
        assert!((closed.matrix()[[0, 2]] - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn closed_form_clean_is_block_of_label_graph() {
        let (y, _) = tiny();
        let clean = make_noise_model(2, 0.0).unwrap();
        let layout = SemiSupervisedLayout::new(4, 1);
        let closed = closed_form_semi_graph(&y, &clean, &layout).unwrap();
        assert!((closed.matrix()[[0, 1]] - 0.5).abs() < 1e-15);
        assert_eq!(closed.matrix()[[4, 4]], 1.0);
    }

    #[test]
    fn closed_form_rejects_imbalance() {
        let y = PosteriorMatrix::deterministic(&[0, 0, 0, 1], 2).unwrap();
        let nm = make_noise_model(2, 0.1).unwrap();
        let layout = SemiSupervisedLayout::new(4, 0);
        assert!(matches!(
            closed_form_semi_graph(&y, &nm, &layout),
            Err(Error::NotClassBalanced { .. })
        ));
    }

    #[test]
    fn sampled_noise_is_seeded_and_matches_rate() {
        let labels = vec![0usize; 4000];
        let y = PosteriorMatrix::deterministic(&labels, 4).unwrap();
        let nm = make_noise_model(4, 0.3).unwrap();
        let a = sample_noisy_labels(&y, &nm, 99).unwrap();
        let b = sample_noisy_labels(&y, &nm, 99).unwrap();
        assert_eq!(a.eta(), b.eta());
        let flipped = a
            .argmax_labels()
            .iter()
            .filter(|&&l| l != 0)
            .count() as f64
            / 4000.0;
        assert!((flipped - 0.3).abs() < 0.03, "flip rate {flipped}");
    }

    #[test]
    fn posterior_csv_round_trip() {
        let (y, _) = tiny();
        let text = y.to_csv();
        let back = PosteriorMatrix::from_csv(&text).unwrap();
        assert_eq!(y.eta(), back.eta());
    }
}
