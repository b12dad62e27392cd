//! Synthetic desk-scale worlds: natural points with block-structured
//! augmentation distributions, the induced augmentation graph
//! w_{xx'} = Σ_x̄ P(x̄) A(x|x̄) A(x'|x̄), ground-truth labels, and a
//! class-stratified labeled prefix.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::SymmetricGraph;
use crate::labels::{PosteriorMatrix, SemiSupervisedLayout};

/// Generator configuration. The world is a pure function of this record;
/// the seed is carried along for consumers that derive randomness from it
/// (noise realizations, trainer initialization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// class count r
    pub r: usize,
    /// naturals per class (N = r * naturals_per_class)
    pub naturals_per_class: usize,
    /// dedicated augmented points per natural (m)
    pub augs_per_natural: usize,
    /// p_in: probability mass shared across same-class augmented points
    pub intra_class_overlap: f64,
    /// p_out: probability mass shared across other-class augmented points
    pub inter_class_overlap: f64,
    /// π_ℓ; uniform by default
    pub class_priors: Vec<f64>,
    /// fraction of augmented points in the labeled prefix
    pub labeled_fraction: f64,
    /// noise rate attached to this scenario
    pub gamma: f64,
}

impl ScenarioConfig {
    /// Uniform-prior config with the given structure.
    pub fn uniform(
        seed: u64,
        r: usize,
        naturals_per_class: usize,
        augs_per_natural: usize,
        p_in: f64,
        p_out: f64,
        labeled_fraction: f64,
        gamma: f64,
    ) -> Self {
        Self {
            seed,
            r,
            naturals_per_class,
            augs_per_natural,
            intra_class_overlap: p_in,
            inter_class_overlap: p_out,
            class_priors: vec![1.0 / r as f64; r],
            labeled_fraction,
            gamma,
        }
    }

    pub fn naturals(&self) -> usize {
        self.r * self.naturals_per_class
    }

    pub fn augmented(&self) -> usize {
        self.naturals() * self.augs_per_natural
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::ConfigInvalid { reason });
        if self.r < 2 {
            return fail(format!("need at least 2 classes, got {}", self.r));
        }
        if self.naturals_per_class == 0 || self.augs_per_natural == 0 {
            return fail("counts must be >= 1".to_string());
        }
        if !(0.0..=1.0).contains(&self.intra_class_overlap)
            || !(0.0..=1.0).contains(&self.inter_class_overlap)
        {
            return fail("overlaps must lie in [0, 1]".to_string());
        }
        if self.inter_class_overlap > self.intra_class_overlap {
            return fail(format!(
                "p_out {} exceeds p_in {}",
                self.inter_class_overlap, self.intra_class_overlap
            ));
        }
        if self.intra_class_overlap + self.inter_class_overlap > 1.0 {
            return fail("p_in + p_out exceeds 1".to_string());
        }
        if self.class_priors.len() != self.r {
            return fail("class_priors length differs from r".to_string());
        }
        if self.class_priors.iter().any(|&p| p < 0.0) {
            return fail("negative class prior".to_string());
        }
        let prior_sum: f64 = self.class_priors.iter().sum();
        if (prior_sum - 1.0).abs() > 1e-12 {
            return fail(format!("class priors sum to {prior_sum}"));
        }
        if !(0.0..=1.0).contains(&self.labeled_fraction) {
            return fail("labeled_fraction must lie in [0, 1]".to_string());
        }
        let gamma_max = (self.r as f64 - 1.0) / self.r as f64;
        if !(0.0..gamma_max).contains(&self.gamma) {
            return fail(format!("gamma {} outside [0, {gamma_max})", self.gamma));
        }
        Ok(())
    }
}

/// A fully explicit world: augmentation graph, generator distributions,
/// parentage, labels and the labeled prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub config: ScenarioConfig,
    /// mass-normalized augmentation graph over n = N·m points
    pub aug_graph: SymmetricGraph,
    /// natural parent of each augmented point
    pub natural_of: Vec<usize>,
    /// class of each natural point
    pub label_of_natural: Vec<usize>,
    /// N×n; row x̄ is the augmentation distribution A(·|x̄)
    pub aug_dist: Array2<f64>,
    /// prior P(x̄) of each natural point
    pub natural_priors: Array1<f64>,
    /// one-hot posteriors of the labeled prefix
    pub posteriors: PosteriorMatrix,
    pub layout: SemiSupervisedLayout,
}

impl World {
    pub fn n(&self) -> usize {
        self.aug_graph.n()
    }

    pub fn naturals(&self) -> usize {
        self.label_of_natural.len()
    }

    /// True class of an augmented point's parent.
    pub fn label_of_aug(&self, x: usize) -> usize {
        self.label_of_natural[self.natural_of[x]]
    }
}

/// Build the block world: each natural spreads (1−p_in−p_out) uniformly over
/// its own m slots, p_in uniformly over same-class slots of other naturals,
/// p_out uniformly over other-class slots. Naturals are interleaved by class
/// (natural i has class i mod r) so any prefix of whole class-rounds is
/// balanced.
pub fn gen_block_world(cfg: &ScenarioConfig) -> Result<World> {
    cfg.validate()?;
    let r = cfg.r;
    let n_naturals = cfg.naturals();
    let m = cfg.augs_per_natural;
    let n = cfg.augmented();

    let label_of_natural: Vec<usize> = (0..n_naturals).map(|i| i % r).collect();
    let natural_of: Vec<usize> = (0..n).map(|x| x / m).collect();

    let p_in = cfg.intra_class_overlap;
    let p_out = cfg.inter_class_overlap;

    let mut aug_dist = Array2::zeros((n_naturals, n));
    for nat in 0..n_naturals {
        let class = label_of_natural[nat];
        let same_class_other_slots = (cfg.naturals_per_class - 1) * m;
        let other_class_slots = (n_naturals - cfg.naturals_per_class) * m;
        // Empty share targets fold back into the dedicated slots so the row
        // stays a probability vector.
        let mut own_mass = 1.0 - p_in - p_out;
        let mut in_mass = p_in;
        let mut out_mass = p_out;
        if same_class_other_slots == 0 {
            own_mass += in_mass;
            in_mass = 0.0;
        }
        if other_class_slots == 0 {
            own_mass += out_mass;
            out_mass = 0.0;
        }
        for x in 0..n {
            let parent = natural_of[x];
            let w = if parent == nat {
                own_mass / m as f64
            } else if label_of_natural[parent] == class {
                in_mass / same_class_other_slots as f64
            } else {
                out_mass / other_class_slots as f64
            };
            aug_dist[[nat, x]] = w;
        }
    }

    let natural_priors: Array1<f64> = (0..n_naturals)
        .map(|nat| cfg.class_priors[label_of_natural[nat]] / cfg.naturals_per_class as f64)
        .collect();

    // w = Σ_x̄ P(x̄) a_x̄ a_x̄ᵀ
    let mut weights = Array2::zeros((n, n));
    for nat in 0..n_naturals {
        let p = natural_priors[nat];
        let row = aug_dist.row(nat);
        for x in 0..n {
            let ax = row[x];
            if ax == 0.0 {
                continue;
            }
            for xp in 0..n {
                weights[[x, xp]] += p * ax * row[xp];
            }
        }
    }
    let aug_graph = SymmetricGraph::new(weights, true)?;

    // Labeled prefix: whole naturals, rounded to full class-rounds.
    let n_l = labeled_prefix_len(cfg);
    let labeled_labels: Vec<usize> = (0..n_l).map(|x| label_of_natural[natural_of[x]]).collect();
    let posteriors = PosteriorMatrix::deterministic(&labeled_labels, r)?;
    let layout = SemiSupervisedLayout::new(n_l, n - n_l);

    Ok(World {
        config: cfg.clone(),
        aug_graph,
        natural_of,
        label_of_natural,
        aug_dist,
        natural_priors,
        posteriors,
        layout,
    })
}

/// Number of labeled augmented points: ⌈labeled_fraction·n⌉ rounded to the
/// nearest multiple of r·m (whole class-rounds of naturals), clamped to
/// [r·m, n] when the fraction is positive.
fn labeled_prefix_len(cfg: &ScenarioConfig) -> usize {
    if cfg.labeled_fraction == 0.0 {
        return 0;
    }
    let n = cfg.augmented();
    let round = cfg.r * cfg.augs_per_natural;
    let target = (cfg.labeled_fraction * n as f64).ceil() as usize;
    let rounds = ((target as f64 / round as f64).round() as usize).max(1);
    (rounds * round).min(n)
}

/// Most-likely-parent labeler: ŷ(x) = label of argmax_x̄ P(x̄)·A(x|x̄),
/// ties broken toward the lowest natural index.
pub fn bayes_labeler(w: &World) -> Vec<usize> {
    let n = w.n();
    let mut labels = Vec::with_capacity(n);
    for x in 0..n {
        let mut best_nat = 0usize;
        let mut best_mass = f64::NEG_INFINITY;
        for nat in 0..w.naturals() {
            let mass = w.natural_priors[nat] * w.aug_dist[[nat, x]];
            if mass > best_mass {
                best_mass = mass;
                best_nat = nat;
            }
        }
        labels.push(w.label_of_natural[best_nat]);
    }
    labels
}

/// JSON manifest stored alongside the world CSV files.
#[derive(Debug, Serialize, Deserialize)]
pub struct WorldManifest {
    pub schema_version: u32,
    pub config: ScenarioConfig,
    pub n: usize,
    pub naturals: usize,
    pub content_hash: String,
}

pub const WORLD_SCHEMA_VERSION: u32 = 1;

fn world_csv_files(w: &World) -> Vec<(&'static str, String)> {
    let mut labels_csv = String::from("aug,natural,label\n");
    for x in 0..w.n() {
        let nat = w.natural_of[x];
        labels_csv.push_str(&format!("{x},{nat},{}\n", w.label_of_natural[nat]));
    }
    let layout_csv = format!("n_l,n_u\n{},{}\n", w.layout.n_l, w.layout.n_u);
    vec![
        ("aug_graph.csv", crate::io::graph_to_csv(&w.aug_graph)),
        ("aug_dist.csv", crate::io::matrix_to_csv(&w.aug_dist)),
        ("labels.csv", labels_csv),
        ("layout.csv", layout_csv),
    ]
}

fn content_hash(files: &[(&'static str, String)]) -> String {
    let mut hasher = Sha256::new();
    for (name, body) in files {
        hasher.update(name.as_bytes());
        hasher.update([0u8]);
        hasher.update(body.as_bytes());
    }
    format!("{:x}", hasher.finalize())
}

/// Write the world as a directory of CSV files plus a JSON manifest.
pub fn save_world(w: &World, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let files = world_csv_files(w);
    for (name, body) in &files {
        std::fs::write(dir.join(name), body)?;
    }
    let manifest = WorldManifest {
        schema_version: WORLD_SCHEMA_VERSION,
        config: w.config.clone(),
        n: w.n(),
        naturals: w.naturals(),
        content_hash: content_hash(&files),
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// Rebuild a world from a saved directory, verifying the content hash.
pub fn load_world(dir: &std::path::Path) -> Result<World> {
    let manifest: WorldManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let world = gen_block_world(&manifest.config)?;
    let files = world_csv_files(&world);
    let hash = content_hash(&files);
    if hash != manifest.content_hash {
        return Err(Error::Format {
            detail: format!(
                "content hash mismatch: manifest {} vs regenerated {hash}",
                manifest.content_hash
            ),
        });
    }
    // Cross-check the stored aug graph byte-for-byte against the regenerated
    // one; the generator is the source of truth.
    let stored = std::fs::read_to_string(dir.join("aug_graph.csv"))?;
    if stored != crate::io::graph_to_csv(&world.aug_graph) {
        return Err(Error::Format {
            detail: "stored aug_graph.csv differs from regenerated world".to_string(),
        });
    }
    Ok(world)
}
