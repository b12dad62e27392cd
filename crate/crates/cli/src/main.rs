//! Command-line front end: world generation, eigendecomposition, graph
//! mixing, factor training, linear-probe evaluation, bound evaluation, and
//! full sweeps.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use speclab::bounds::{finite_sample_bound, full_k_prime_range, noisy_label_bound, BoundInputs,
    FiniteSampleInputs};
use speclab::eval::{fit_probe, natural_vote_error, per_aug_error, EvalReport};
use speclab::graph::{eigh, normalize};
use speclab::io::{matrix_from_csv, matrix_to_csv, vector_to_csv};
use speclab::joint::mix_graphs;
use speclab::spectral::FactorCheckpoint;
use speclab::{
    bayes_labeler, gen_block_world, load_world, make_noise_model, sample_noisy_labels,
    save_world, semi_block_graph, top_k_factor, train_factor, ScenarioConfig, TrainConfig,
};
use speclab_cli::sweep::{run_sweep, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(name = "speclab", about = "Spectral laboratory for weakly supervised similarity graphs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world from a scenario config.
    Generate {
        /// Scenario config JSON
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the world files
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Eigendecompose the normalized adjacency of a graph envelope.
    Eigen {
        /// Graph JSON envelope {n, mass_normalized, rows}
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Decompose the raw weights instead of the normalized adjacency
        #[arg(long)]
        raw: bool,
    },
    /// Mix two normalized matrices: (1−θ)·A + θ·B, entrywise.
    Mix {
        /// CSV of the feature matrix
        #[arg(long)]
        a0: PathBuf,
        /// CSV of the label matrix
        #[arg(long)]
        a_star: PathBuf,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a rank-k factor on the normalized adjacency of a graph.
    Train {
        /// Graph JSON envelope
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (factor.csv + checkpoint.json)
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate linear probing on a stored world at one (γ, θ, k) cell.
    Evaluate {
        /// World directory produced by `generate`
        #[arg(long)]
        world: PathBuf,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        k: usize,
        /// Seed for the noise realization
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output JSON report
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the population bound (and optionally the finite-sample one).
    Bound {
        /// BoundInputs JSON
        #[arg(long)]
        config: PathBuf,
        /// Optional FiniteSampleInputs JSON
        #[arg(long)]
        finite: Option<PathBuf>,
        /// θ grid for batch CSV output (comma-separated); single evaluation
        /// when omitted
        #[arg(long)]
        theta_grid: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Run a full sweep from a sweep config.
    Sweep {
        /// SweepConfig JSON
        #[arg(long)]
        config: PathBuf,
        /// Override the config output_dir
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the master seed
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Generate { config, out, seed } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut scenario: ScenarioConfig = serde_json::from_str(&text)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            let world = gen_block_world(&scenario)?;
            save_world(&world, &out)?;
            println!("world with n={} written to {}", world.n(), out.display());
        }
        Command::Eigen {
            graph,
            out,
            format,
            raw,
        } => {
            let g = speclab::io::graph_from_json(&std::fs::read_to_string(&graph)?)?;
            let spectrum = if raw {
                eigh(g.weights())?
            } else {
                eigh(normalize(&g)?.matrix())?
            };
            std::fs::create_dir_all(&out)?;
            match format {
                OutputFormat::Csv => {
                    std::fs::write(out.join("values.csv"), vector_to_csv(spectrum.values()))?;
                    std::fs::write(out.join("vectors.csv"), matrix_to_csv(spectrum.vectors()))?;
                }
                OutputFormat::Json => {
                    let payload = serde_json::json!({
                        "values": spectrum.values().to_vec(),
                    });
                    std::fs::write(
                        out.join("values.json"),
                        serde_json::to_string_pretty(&payload)?,
                    )?;
                    std::fs::write(out.join("vectors.csv"), matrix_to_csv(spectrum.vectors()))?;
                }
            }
            println!("spectrum written to {}", out.display());
        }
        Command::Mix {
            a0,
            a_star,
            theta,
            out,
        } => {
            let m0 = matrix_from_csv(&std::fs::read_to_string(&a0)?)?;
            let m1 = matrix_from_csv(&std::fs::read_to_string(&a_star)?)?;
            if m0.dim() != m1.dim() {
                bail!("matrix shapes differ: {:?} vs {:?}", m0.dim(), m1.dim());
            }
            if !(0.0..=1.0).contains(&theta) {
                bail!("theta {theta} outside [0, 1]");
            }
            let mixed = &m0 * (1.0 - theta) + &m1 * theta;
            std::fs::write(&out, matrix_to_csv(&mixed))?;
            println!("mixed matrix written to {}", out.display());
        }
        Command::Train { graph, k, seed, out } => {
            let g = speclab::io::graph_from_json(&std::fs::read_to_string(&graph)?)?;
            let ng = normalize(&g)?;
            let cfg = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            let report = train_factor(&ng, k, &cfg)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("factor.csv"), matrix_to_csv(report.factor.factor()))?;
            let checkpoint = FactorCheckpoint {
                n: report.factor.n(),
                k: report.factor.k(),
                loss: report.loss,
                iters: report.iters,
                seed,
            };
            std::fs::write(
                out.join("checkpoint.json"),
                serde_json::to_string_pretty(&checkpoint)?,
            )?;
            println!(
                "factor trained: loss {:.3e} after {} iterations",
                report.loss, report.iters
            );
        }
        Command::Evaluate {
            world,
            gamma,
            theta,
            k,
            seed,
            out,
        } => {
            let world = load_world(&world)?;
            let nm = make_noise_model(world.config.r, gamma)?;
            let clean = make_noise_model(world.config.r, 0.0)?;
            let realized = sample_noisy_labels(&world.posteriors, &nm, seed)?;
            let observed = semi_block_graph(&realized, &clean, &world.layout)?;
            let a_star = normalize(&observed)?;
            let a0 = normalize(&world.aug_graph)?;
            let nu = eigh(a0.matrix())?;
            let mix = mix_graphs(&a0, &a_star, theta)?;
            let fm = top_k_factor(&mix, k)?;
            let probe = fit_probe(&fm, &world, speclab::Tolerances::DEFAULT.ridge_default)?;
            let labels = bayes_labeler(&world);
            let (delta_u, delta_s) = speclab::eval::label_recovery_errors(&world, &labels);
            let report = EvalReport {
                per_aug_error: per_aug_error(&fm, &probe, &world),
                natural_vote_error: natural_vote_error(&fm, &probe, &world),
                delta_u,
                delta_s,
                probe_norm: probe.frobenius_norm(),
                theorem_norm_cap: speclab::bounds::probe_norm_cap(nu.values().as_slice().unwrap(), theta, k),
            };
            std::fs::write(&out, report.to_json()?)?;
            println!("evaluation written to {}", out.display());
        }
        Command::Bound {
            config,
            finite,
            theta_grid,
            out,
            format,
        } => {
            let bi: BoundInputs = serde_json::from_str(&std::fs::read_to_string(&config)?)?;
            let fsi: Option<FiniteSampleInputs> = match finite {
                Some(path) => Some(serde_json::from_str(&std::fs::read_to_string(&path)?)?),
                None => None,
            };
            let evaluate = |bi: &BoundInputs| -> anyhow::Result<(f64, String)> {
                match &fsi {
                    Some(fsi) => {
                        let range = full_k_prime_range(bi)?;
                        let report = finite_sample_bound(bi, fsi, range)?;
                        Ok((report.value, format!("k'={}", report.best_k_prime)))
                    }
                    None => {
                        let report = noisy_label_bound(bi)?;
                        Ok((report.value, report.active_term.to_string()))
                    }
                }
            };
            // γ recovered from α for reporting.
            let rf = bi.r as f64;
            let gamma = (rf - 1.0) / rf * (1.0 - bi.alpha.sqrt());
            match theta_grid {
                Some(grid) => {
                    let thetas: Vec<f64> = grid
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .context("parsing theta grid")?;
                    let mut csv = String::from("theta,gamma,k,bound,active_term\n");
                    for theta in thetas {
                        let (value, term) = evaluate(&bi.with_theta(theta))?;
                        csv.push_str(&format!("{theta},{gamma},{},{value},{term}\n", bi.k));
                    }
                    std::fs::write(&out, csv)?;
                }
                None => match format {
                    OutputFormat::Json => {
                        if let Some(fsi) = &fsi {
                            let range = full_k_prime_range(&bi)?;
                            let report = finite_sample_bound(&bi, fsi, range)?;
                            std::fs::write(&out, serde_json::to_string_pretty(&report)?)?;
                        } else {
                            let report = noisy_label_bound(&bi)?;
                            std::fs::write(&out, report.to_json()?)?;
                        }
                    }
                    OutputFormat::Csv => {
                        let (value, term) = evaluate(&bi)?;
                        let mut csv = String::from("theta,gamma,k,bound,active_term\n");
                        csv.push_str(&format!("{},{gamma},{},{value},{term}\n", bi.theta, bi.k));
                        std::fs::write(&out, csv)?;
                    }
                },
            }
            println!("bound written to {}", out.display());
        }
        Command::Sweep { config, out, seed } => {
            let mut cfg: SweepConfig = serde_json::from_str(&std::fs::read_to_string(&config)?)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            let results = run_sweep(&cfg)?;
            println!(
                "sweep complete: {} cells, {} summary rows, outputs in {}",
                results.rows.len(),
                results.summary.len(),
                cfg.output_dir.display()
            );
        }
    }
    Ok(())
}
