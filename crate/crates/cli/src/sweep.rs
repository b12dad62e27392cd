//! Batch experiment driver: for every (replicate, γ, θ, k) cell it builds
//! the feature and label graphs, mixes, solves the rank-k factor exactly,
//! evaluates the linear probe, and attaches the population bound. Completed
//! cells are journaled so interrupted sweeps resume without recomputation
//! and the final CSVs are byte-identical either way.
//!
//! γ enters the experiment path the way the training runs do it: the clean
//! labels are corrupted by a seeded hard flip per (replicate, γ), and the
//! supervised graph is built from those realized labels. The bound column
//! stays on the analytic path (noise enters through α).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use speclab::bounds::{noisy_label_bound, probe_norm_cap, ActiveTerm, BoundInputs};
use speclab::error::{Error, Result};
use speclab::eval::{fit_probe, label_recovery_errors, natural_vote_error, per_aug_error};
use speclab::graph::{degree_ratio, degrees, eigh, normalize};
use speclab::joint::mix_graphs;
use speclab::{
    bayes_labeler, gen_block_world, make_noise_model, sample_noisy_labels, semi_block_graph,
    top_k_factor, ScenarioConfig, Tolerances,
};

use crate::seed::{noise_seed, world_seed};

pub const SWEEP_SCHEMA_VERSION: u32 = 1;

/// Sweep definition; JSON field names match this struct exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub scenario: ScenarioConfig,
    pub theta_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub k_grid: Vec<usize>,
    pub master_seed: u64,
    pub replicates: usize,
    pub output_dir: PathBuf,
    /// Probe regularization; the norm control the downstream theorems put on
    /// the linear classifier. Defaults to 0.05.
    #[serde(default = "default_probe_ridge")]
    pub probe_ridge: f64,
}

fn default_probe_ridge() -> f64 {
    0.05
}

impl SweepConfig {
    /// Sorted, deduplicated θ grid with the endpoints 0 and 1 injected.
    pub fn normalized_theta_grid(&self) -> Vec<f64> {
        let mut grid = self.theta_grid.clone();
        grid.push(0.0);
        grid.push(1.0);
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        grid
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::ConfigInvalid { reason });
        self.scenario.validate()?;
        if self.replicates == 0 {
            return fail("replicates must be >= 1".to_string());
        }
        if self.gamma_grid.is_empty() || self.k_grid.is_empty() {
            return fail("gamma_grid and k_grid must be non-empty".to_string());
        }
        let gamma_max = (self.scenario.r as f64 - 1.0) / self.scenario.r as f64;
        for &gamma in &self.gamma_grid {
            if !(0.0..gamma_max).contains(&gamma) {
                return fail(format!("gamma {gamma} outside [0, {gamma_max})"));
            }
        }
        for &theta in &self.theta_grid {
            if !(0.0..=1.0).contains(&theta) {
                return fail(format!("theta {theta} outside [0, 1]"));
            }
        }
        let n = self.scenario.augmented();
        for &k in &self.k_grid {
            if k == 0 || k > n {
                return fail(format!("k {k} outside [1, {n}]"));
            }
        }
        Ok(())
    }
}

/// One evaluated sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub replicate: usize,
    pub seed: u64,
    pub gamma: f64,
    pub theta: f64,
    pub k: usize,
    pub error: f64,
    pub vote_error: f64,
    pub delta_u: f64,
    pub delta_s: f64,
    pub probe_norm: f64,
    pub norm_cap: f64,
    pub bound: Option<f64>,
    pub gate: Option<bool>,
    pub active_term: Option<ActiveTerm>,
}

pub const RESULTS_HEADER: &str = "replicate,seed,gamma,theta,k,error,vote_error,delta_u,delta_s,probe_norm,norm_cap,bound,gate,active_term";

impl CellRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.replicate,
            self.seed,
            self.gamma,
            self.theta,
            self.k,
            self.error,
            self.vote_error,
            self.delta_u,
            self.delta_s,
            self.probe_norm,
            self.norm_cap,
            self.bound.map_or(String::new(), |b| b.to_string()),
            self.gate.map_or(String::new(), |g| g.to_string()),
            self.active_term.map_or(String::new(), |t| t.to_string()),
        )
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 14 {
            return Err(Error::Format {
                detail: format!("expected 14 cells, got {}", cells.len()),
            });
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Format {
                detail: format!("bad float {s:?}: {e}"),
            })
        };
        let parse_u = |s: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|e| Error::Format {
                detail: format!("bad integer {s:?}: {e}"),
            })
        };
        Ok(CellRow {
            replicate: parse_u(cells[0])?,
            seed: cells[1].parse::<u64>().map_err(|e| Error::Format {
                detail: format!("bad seed: {e}"),
            })?,
            gamma: parse_f(cells[2])?,
            theta: parse_f(cells[3])?,
            k: parse_u(cells[4])?,
            error: parse_f(cells[5])?,
            vote_error: parse_f(cells[6])?,
            delta_u: parse_f(cells[7])?,
            delta_s: parse_f(cells[8])?,
            probe_norm: parse_f(cells[9])?,
            norm_cap: parse_f(cells[10])?,
            bound: if cells[11].is_empty() {
                None
            } else {
                Some(parse_f(cells[11])?)
            },
            gate: if cells[12].is_empty() {
                None
            } else {
                Some(cells[12] == "true")
            },
            active_term: match cells[13] {
                "" => None,
                "term1" => Some(ActiveTerm::Term1),
                "term2" => Some(ActiveTerm::Term2),
                "term3" => Some(ActiveTerm::Term3),
                other => {
                    return Err(Error::Format {
                        detail: format!("bad active term {other:?}"),
                    })
                }
            },
        })
    }
}

/// Aggregate per (γ, k) across replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub gamma: f64,
    pub k: usize,
    /// mean over replicates of the per-replicate arg-min θ
    pub best_theta: f64,
    pub error_theta0: f64,
    pub error_theta1: f64,
    pub min_over_grid: f64,
    /// mean over replicates of min_θ(error) − min(error(0), error(1));
    /// non-positive by construction, near zero when endpoints win
    pub baseline_gap: f64,
}

pub const SUMMARY_HEADER: &str =
    "gamma,k,best_theta,error_theta0,error_theta1,min_over_grid,baseline_gap";

impl SummaryRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.gamma,
            self.k,
            self.best_theta,
            self.error_theta0,
            self.error_theta1,
            self.min_over_grid,
            self.baseline_gap
        )
    }
}

#[derive(Debug, Clone)]
pub struct SweepResults {
    pub config: SweepConfig,
    pub theta_grid: Vec<f64>,
    pub rows: Vec<CellRow>,
    pub summary: Vec<SummaryRow>,
}

type CellKey = (usize, usize, usize, usize);

fn cells_log_path(dir: &Path) -> PathBuf {
    dir.join("cells.log")
}

fn load_journal(dir: &Path) -> Result<BTreeMap<CellKey, CellRow>> {
    let path = cells_log_path(dir);
    let mut cells = BTreeMap::new();
    if !path.exists() {
        return Ok(cells);
    }
    let text = std::fs::read_to_string(&path)?;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((key_part, row_part)) = line.split_once('|') else {
            // Torn write at the journal tail; drop it and recompute.
            continue;
        };
        let idx: Vec<&str> = key_part.split(',').collect();
        if idx.len() != 4 {
            continue;
        }
        let parse = |s: &str| s.parse::<usize>().ok();
        let (Some(a), Some(b), Some(c), Some(d)) =
            (parse(idx[0]), parse(idx[1]), parse(idx[2]), parse(idx[3]))
        else {
            continue;
        };
        if let Ok(row) = CellRow::from_csv_line(row_part) {
            cells.insert((a, b, c, d), row);
        }
    }
    Ok(cells)
}

/// Run (or resume) a sweep. Every cell is journaled to `cells.log` as soon as
/// it is computed; the final CSVs are assembled in canonical cell order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResults> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let theta_grid = cfg.normalized_theta_grid();
    let mut cells = load_journal(&cfg.output_dir)?;
    let mut journal = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(cells_log_path(&cfg.output_dir))?;

    let ridge = cfg.probe_ridge;
    if ridge <= 0.0 {
        return Err(Error::ConfigInvalid {
            reason: format!("probe_ridge must be positive, got {ridge}"),
        });
    }
    for replicate in 0..cfg.replicates {
        let all_done = (0..cfg.gamma_grid.len()).all(|gi| {
            (0..theta_grid.len()).all(|ti| {
                (0..cfg.k_grid.len()).all(|ki| cells.contains_key(&(replicate, gi, ti, ki)))
            })
        });
        if all_done {
            continue;
        }

        let seed = world_seed(cfg.master_seed, replicate);
        let scenario = ScenarioConfig {
            seed,
            ..cfg.scenario.clone()
        };
        let world = gen_block_world(&scenario)?;
        let a0 = normalize(&world.aug_graph)?;
        let nu = eigh(a0.matrix())?;
        let nu_values: Vec<f64> = nu.values().to_vec();
        let labels = bayes_labeler(&world);
        let (delta_u, delta_s) = label_recovery_errors(&world, &labels);
        let rho = degree_ratio(&degrees(&world.aug_graph)?) + Tolerances::DEFAULT.rho_slack;
        let clean_nm = make_noise_model(world.config.r, 0.0)?;

        for (gi, &gamma) in cfg.gamma_grid.iter().enumerate() {
            let nm = make_noise_model(world.config.r, gamma)?;
            // Noise corrupts the label of the natural datum; augmented views
            // inherit the flipped label from their parent.
            let natural_posteriors = speclab::PosteriorMatrix::deterministic(
                &world.label_of_natural,
                world.config.r,
            )?;
            let flipped = sample_noisy_labels(
                &natural_posteriors,
                &nm,
                noise_seed(cfg.master_seed, replicate, gi),
            )?
            .argmax_labels();
            let observed_labels: Vec<usize> = (0..world.layout.n_l)
                .map(|x| flipped[world.natural_of[x]])
                .collect();
            let realized =
                speclab::PosteriorMatrix::deterministic(&observed_labels, world.config.r)?;
            // Realized hard labels already carry the noise; the block graph
            // uses the identity transition.
            let observed_block = semi_block_graph(&realized, &clean_nm, &world.layout)?;
            let a_star = normalize(&observed_block)?;

            for (ti, &theta) in theta_grid.iter().enumerate() {
                let mix = mix_graphs(&a0, &a_star, theta)?;
                for (ki, &k) in cfg.k_grid.iter().enumerate() {
                    let key = (replicate, gi, ti, ki);
                    if cells.contains_key(&key) {
                        continue;
                    }
                    let fm = top_k_factor(&mix, k)?;
                    let probe = fit_probe(&fm, &world, ridge)?;
                    let error = per_aug_error(&fm, &probe, &world);
                    let vote_error = natural_vote_error(&fm, &probe, &world);
                    let norm_cap = probe_norm_cap(&nu_values, theta, k);

                    let bi = BoundInputs {
                        delta_u,
                        delta_s,
                        rho,
                        nu: nu_values.clone(),
                        k,
                        theta,
                        alpha: nm.alpha(),
                        r: world.config.r,
                        n_l: world.layout.n_l,
                        n_u: world.layout.n_u,
                    };
                    let (bound, active_term) = match noisy_label_bound(&bi) {
                        Ok(report) => (Some(report.value), Some(report.active_term)),
                        Err(_) => (None, None),
                    };
                    let gate = bound.map(|_| probe.frobenius_norm() <= norm_cap);

                    let row = CellRow {
                        replicate,
                        seed,
                        gamma,
                        theta,
                        k,
                        error,
                        vote_error,
                        delta_u,
                        delta_s,
                        probe_norm: probe.frobenius_norm(),
                        norm_cap,
                        bound,
                        gate,
                        active_term,
                    };
                    writeln!(
                        journal,
                        "{},{},{},{}|{}",
                        key.0,
                        key.1,
                        key.2,
                        key.3,
                        row.to_csv_line()
                    )?;
                    journal.flush()?;
                    cells.insert(key, row);
                }
            }
        }
    }

    // Canonical order: BTreeMap iteration is (replicate, γ, θ, k).
    let rows: Vec<CellRow> = cells.into_values().collect();
    let summary = summarize(cfg, &theta_grid, &rows);
    let results = SweepResults {
        config: cfg.clone(),
        theta_grid,
        rows,
        summary,
    };
    write_outputs(&results)?;
    Ok(results)
}

fn summarize(cfg: &SweepConfig, theta_grid: &[f64], rows: &[CellRow]) -> Vec<SummaryRow> {
    let mut summary = Vec::new();
    for &gamma in &cfg.gamma_grid {
        for &k in &cfg.k_grid {
            let mut best_thetas = Vec::new();
            let mut e0s = Vec::new();
            let mut e1s = Vec::new();
            let mut mins = Vec::new();
            let mut gaps = Vec::new();
            for replicate in 0..cfg.replicates {
                let curve: Vec<(f64, f64)> = theta_grid
                    .iter()
                    .filter_map(|&theta| {
                        rows.iter()
                            .find(|r| {
                                r.replicate == replicate
                                    && r.gamma == gamma
                                    && r.k == k
                                    && r.theta == theta
                            })
                            .map(|r| (theta, r.error))
                    })
                    .collect();
                if curve.len() != theta_grid.len() {
                    continue;
                }
                // Exact ties report the largest minimizing θ: the most
                // label-weighted training that still attains the best error.
                let mut best = curve[0];
                for &(theta, e) in &curve {
                    if e <= best.1 {
                        best = (theta, e);
                    }
                }
                let e0 = curve.first().unwrap().1;
                let e1 = curve.last().unwrap().1;
                best_thetas.push(best.0);
                e0s.push(e0);
                e1s.push(e1);
                mins.push(best.1);
                gaps.push(best.1 - e0.min(e1));
            }
            if best_thetas.is_empty() {
                continue;
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            summary.push(SummaryRow {
                gamma,
                k,
                best_theta: mean(&best_thetas),
                error_theta0: mean(&e0s),
                error_theta1: mean(&e1s),
                min_over_grid: mean(&mins),
                baseline_gap: mean(&gaps),
            });
        }
    }
    summary
}

/// Run manifest written next to the result CSVs.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub config: SweepConfig,
    pub content_hashes: BTreeMap<String, String>,
    pub elapsed_ms: u128,
}

fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("{:x}", hasher.finalize())
}

pub fn results_csv(results: &SweepResults) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for row in &results.rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn summary_csv(results: &SweepResults) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in &results.summary {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

fn write_outputs(results: &SweepResults) -> Result<()> {
    let start = std::time::Instant::now();
    let dir = &results.config.output_dir;
    let results_text = results_csv(results);
    let summary_text = summary_csv(results);
    std::fs::write(dir.join("results.csv"), &results_text)?;
    std::fs::write(dir.join("summary.csv"), &summary_text)?;
    let plots = crate::plot::emit_plot_data(results, &dir.join("plots"))?;

    let mut content_hashes = BTreeMap::new();
    content_hashes.insert("results.csv".to_string(), sha256_hex(&results_text));
    content_hashes.insert("summary.csv".to_string(), sha256_hex(&summary_text));
    for (name, text) in plots {
        content_hashes.insert(format!("plots/{name}"), sha256_hex(&text));
    }
    let manifest = RunManifest {
        schema_version: SWEEP_SCHEMA_VERSION,
        config: results.config.clone(),
        content_hashes,
        elapsed_ms: start.elapsed().as_millis(),
    };
    std::fs::write(
        dir.join("run_manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}
