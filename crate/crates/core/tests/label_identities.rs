//! Label-graph identity batteries: noise commutation, the class-balanced
//! closed form against direct normalization, and degree formulas.

mod common;

use common::{balanced_hard_posteriors, balanced_posteriors, gamma_grid, rng};
use rand::Rng;
use speclab::graph::frobenius_distance;
use speclab::labels::normalize_label_block;
use speclab::{
    apply_noise, closed_form_semi_graph, label_graph, make_noise_model, noisy_label_graph,
    semi_block_graph, PosteriorMatrix, SemiSupervisedLayout,
};

/// Random posteriors without any balance requirement.
fn random_posteriors(rng: &mut rand_chacha::ChaCha8Rng, n_l: usize, r: usize) -> PosteriorMatrix {
    let mut eta = ndarray::Array2::zeros((n_l, r));
    for i in 0..n_l {
        let mut row: Vec<f64> = (0..r).map(|_| rng.gen_range(0.01..1.0)).collect();
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= sum);
        // Renormalize exactly: push the residual onto the largest entry.
        let resid = 1.0 - row.iter().sum::<f64>();
        let argmax = (0..r).max_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap()).unwrap();
        row[argmax] += resid;
        for (j, v) in row.into_iter().enumerate() {
            eta[[i, j]] = v;
        }
    }
    PosteriorMatrix::new(eta).unwrap()
}

#[test]
fn noise_commutation_100_random_posteriors() {
    let mut rng = rng(0x1AB);
    for case in 0..100 {
        let r = rng.gen_range(2..=10);
        let n_l = rng.gen_range(r..=200.min(r * 20));
        let gamma = rng.gen_range(0.0..(r as f64 - 1.0) / r as f64 * 0.99);
        let y = random_posteriors(&mut rng, n_l, r);
        let nm = make_noise_model(r, gamma).unwrap();
        let direct = noisy_label_graph(&y, &nm).unwrap();
        let via_noise = label_graph(&apply_noise(&y, &nm).unwrap());
        let dist = frobenius_distance(direct.weights(), via_noise.weights());
        assert!(dist <= 1e-11, "case {case}: commutation defect {dist}");
    }
}

#[test]
fn closed_form_battery_class_balanced() {
    let mut rng = rng(0x1AC);
    for case in 0..60 {
        let r = rng.gen_range(2..=10);
        let per_class = rng.gen_range(1..=20.min(200 / r));
        let n_u = rng.gen_range(0..=10);
        let y = if case % 3 == 0 {
            balanced_hard_posteriors(r, per_class)
        } else {
            balanced_posteriors(&mut rng, r, per_class)
        };
        let layout = SemiSupervisedLayout::new(y.n_l(), n_u);
        for gamma in gamma_grid(r, 7) {
            let nm = make_noise_model(r, gamma).unwrap();
            let closed = closed_form_semi_graph(&y, &nm, &layout).unwrap();
            let direct = normalize_label_block(
                &semi_block_graph(&y, &nm, &layout).unwrap(),
                &y,
                &nm,
            )
            .unwrap();
            let dist = frobenius_distance(closed.matrix(), direct.matrix());
            assert!(
                dist <= 1e-10,
                "case {case} gamma {gamma}: closed-form defect {dist}"
            );
        }
    }
}

#[test]
fn balanced_label_block_has_uniform_degrees() {
    // With class balance the labeled degrees collapse to n_L/r, so the
    // normalized label graph is row-stochastic up to the n_L/r scale.
    let mut rng = rng(0x1AD);
    for _ in 0..20 {
        let r = rng.gen_range(2..=6);
        let per_class = rng.gen_range(1..=8);
        let y = balanced_posteriors(&mut rng, r, per_class);
        let g = label_graph(&y);
        let target = y.n_l() as f64 / r as f64;
        for row in g.weights().rows() {
            assert!((row.sum() - target).abs() <= 1e-9);
        }
    }
}

#[test]
fn soft_and_hard_counts_agree_on_deterministic_posteriors() {
    let y = balanced_hard_posteriors(3, 4);
    let counts = y.class_counts();
    for &c in counts.iter() {
        assert_eq!(c, 4.0);
    }
}
