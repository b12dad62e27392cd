//! Numerical laboratory for spectral contrastive learning on similarity
//! graphs under weak supervision: label graphs under symmetric noise, mixed
//! feature/label graphs for joint training, exact spectral minimizers,
//! eigenvalue predictions, and downstream error bounds, all verified against
//! brute-force oracles at desk scale.

pub mod bounds;
pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod joint;
pub mod labels;
pub mod spectral;
pub mod synth;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use graph::{
    degree_ratio, degrees, eigh, normalize, validate_graph, DegreeVector, NormalizedGraph,
    Spectrum, SymmetricGraph, ValidationReport,
};
pub use labels::{
    apply_noise, apply_transition, closed_form_semi_graph, label_graph, make_noise_model,
    noisy_label_graph, normalize_label_block, sample_noisy_labels, semi_block_graph, NoiseModel,
    PosteriorMatrix, SemiSupervisedLayout,
};
pub use spectral::{
    factorization_gradient, factorization_loss, loss_gap, population_loss, sampled_loss_estimate,
    top_k_factor, train_factor, FactorMatrix, TrainConfig, TrainReport,
};
pub use synth::{bayes_labeler, gen_block_world, load_world, save_world, ScenarioConfig, World};
