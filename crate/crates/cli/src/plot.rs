//! Plot-ready CSV emission: error-vs-γ curves at the endpoints with the
//! winner and the joint best, the optimal-θ migration, and the k sweep.

use std::path::Path;

use speclab::error::Result;

use crate::sweep::{CellRow, SweepResults};

pub const ERROR_VS_GAMMA_HEADER: &str =
    "k,gamma,error_theta0,error_theta1,winner,joint_best,bound_theta0,bound_theta1";
pub const BEST_THETA_HEADER: &str = "k,gamma,mean_best_theta";
pub const K_SWEEP_HEADER: &str = "gamma,theta,k,mean_error";

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn rows_at<'a>(
    rows: &'a [CellRow],
    gamma: f64,
    k: usize,
    theta: f64,
) -> impl Iterator<Item = &'a CellRow> {
    rows.iter()
        .filter(move |r| r.gamma == gamma && r.k == k && r.theta == theta)
}

/// Build the plot CSV set; returns (name, contents) pairs and writes them
/// under `dir`.
pub fn emit_plot_data(results: &SweepResults, dir: &Path) -> Result<Vec<(String, String)>> {
    std::fs::create_dir_all(dir)?;
    let cfg = &results.config;
    let theta_grid = &results.theta_grid;
    let rows = &results.rows;

    let mut error_vs_gamma = String::from(ERROR_VS_GAMMA_HEADER);
    error_vs_gamma.push('\n');
    let mut best_theta = String::from(BEST_THETA_HEADER);
    best_theta.push('\n');
    for &k in &cfg.k_grid {
        for &gamma in &cfg.gamma_grid {
            let e0: Vec<f64> = rows_at(rows, gamma, k, 0.0).map(|r| r.error).collect();
            let e1: Vec<f64> = rows_at(rows, gamma, k, 1.0).map(|r| r.error).collect();
            let b0: Vec<f64> = rows_at(rows, gamma, k, 0.0)
                .filter_map(|r| r.bound)
                .collect();
            let b1: Vec<f64> = rows_at(rows, gamma, k, 1.0)
                .filter_map(|r| r.bound)
                .collect();
            // Per-replicate joint best and arg-min θ.
            let mut joint_bests = Vec::new();
            let mut best_thetas = Vec::new();
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
                // Same tie convention as the summary: largest minimizing θ.
                let mut best = curve[0];
                for &(theta, e) in &curve {
                    if e <= best.1 {
                        best = (theta, e);
                    }
                }
                joint_bests.push(best.1);
                best_thetas.push(best.0);
            }
            let (Some(me0), Some(me1)) = (mean(&e0), mean(&e1)) else {
                continue;
            };
            error_vs_gamma.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                k,
                gamma,
                me0,
                me1,
                me0.min(me1),
                fmt_opt(mean(&joint_bests)),
                fmt_opt(mean(&b0)),
                fmt_opt(mean(&b1)),
            ));
            if let Some(mbt) = mean(&best_thetas) {
                best_theta.push_str(&format!("{k},{gamma},{mbt}\n"));
            }
        }
    }

    let mut k_sweep = String::from(K_SWEEP_HEADER);
    k_sweep.push('\n');
    for &gamma in &cfg.gamma_grid {
        for &theta in theta_grid {
            for &k in &cfg.k_grid {
                let errors: Vec<f64> = rows_at(rows, gamma, k, theta).map(|r| r.error).collect();
                if let Some(me) = mean(&errors) {
                    k_sweep.push_str(&format!("{gamma},{theta},{k},{me}\n"));
                }
            }
        }
    }

    let files = vec![
        ("fig_error_vs_gamma.csv".to_string(), error_vs_gamma),
        ("fig_best_theta_vs_gamma.csv".to_string(), best_theta),
        ("table_k_sweep.csv".to_string(), k_sweep),
    ];
    for (name, text) in &files {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(files)
}
