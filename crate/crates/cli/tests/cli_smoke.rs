//! End-to-end smoke tests of the binary's subcommands.

use std::path::Path;
use std::process::Command;

fn speclab_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_speclab"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const SCENARIO: &str = r#"{
  "seed": 3,
  "r": 2,
  "naturals_per_class": 2,
  "augs_per_natural": 2,
  "intra_class_overlap": 0.2,
  "inter_class_overlap": 0.1,
  "class_priors": [0.5, 0.5],
  "labeled_fraction": 1.0,
  "gamma": 0.1
}"#;

#[test]
fn generate_eigen_train_evaluate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    write(&scenario, SCENARIO);

    let world_dir = dir.path().join("world");
    let out = speclab_bin()
        .args(["generate", "--config"])
        .arg(&scenario)
        .arg("--out")
        .arg(&world_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(world_dir.join("manifest.json").exists());
    assert!(world_dir.join("aug_graph.csv").exists());

    // Eigen on the stored graph envelope.
    let graph_json = {
        let world = speclab::load_world(&world_dir).unwrap();
        speclab::io::graph_to_json(&world.aug_graph).unwrap()
    };
    let graph_path = dir.path().join("graph.json");
    write(&graph_path, &graph_json);
    let eigen_dir = dir.path().join("eigen");
    let out = speclab_bin()
        .args(["eigen", "--graph"])
        .arg(&graph_path)
        .arg("--out")
        .arg(&eigen_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let values = std::fs::read_to_string(eigen_dir.join("values.csv")).unwrap();
    let top: f64 = values.lines().next().unwrap().parse().unwrap();
    assert!((top - 1.0).abs() < 1e-8);

    let train_dir = dir.path().join("train");
    let out = speclab_bin()
        .args(["train", "--graph"])
        .arg(&graph_path)
        .args(["--k", "3", "--seed", "4", "--out"])
        .arg(&train_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(train_dir.join("factor.csv").exists());
    let checkpoint: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(train_dir.join("checkpoint.json")).unwrap())
            .unwrap();
    assert_eq!(checkpoint["k"], 3);

    let eval_path = dir.path().join("eval.json");
    let out = speclab_bin()
        .args(["evaluate", "--world"])
        .arg(&world_dir)
        .args(["--gamma", "0.2", "--theta", "0.5", "--k", "3", "--out"])
        .arg(&eval_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&eval_path).unwrap()).unwrap();
    let e = report["per_aug_error"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&e));
}

#[test]
fn mix_and_bound_commands() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write(&a, "1.0,0.0\n0.0,1.0\n");
    write(&b, "0.0,1.0\n1.0,0.0\n");
    let mixed = dir.path().join("mix.csv");
    let out = speclab_bin()
        .args(["mix", "--a0"])
        .arg(&a)
        .arg("--a-star")
        .arg(&b)
        .args(["--theta", "0.25", "--out"])
        .arg(&mixed)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = speclab::io::matrix_from_csv(&std::fs::read_to_string(&mixed).unwrap()).unwrap();
    assert!((m[[0, 0]] - 0.75).abs() < 1e-15);
    assert!((m[[0, 1]] - 0.25).abs() < 1e-15);

    let bi = dir.path().join("bound.json");
    write(
        &bi,
        r#"{
          "delta_u": 0.05, "delta_s": 0.02, "rho": 1.0,
          "nu": [1.0, 0.9, 0.8, 0.7, 0.5, 0.5, 0.2, 0.0],
          "k": 4, "theta": 0.0, "alpha": 1.0, "r": 2, "n_l": 8, "n_u": 0
        }"#,
    );
    let report_path = dir.path().join("report.json");
    let out = speclab_bin()
        .args(["bound", "--config"])
        .arg(&bi)
        .arg("--out")
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    // 4·0.05/(1−0.5) + 0.4 = 0.8 at θ=0.
    assert!((report["value"].as_f64().unwrap() - 0.8).abs() < 1e-12);

    // Batch over a θ grid.
    let csv_path = dir.path().join("grid.csv");
    let out = speclab_bin()
        .args(["bound", "--config"])
        .arg(&bi)
        .args(["--theta-grid", "0,0.5,1", "--out"])
        .arg(&csv_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("theta,gamma,k,bound,active_term"));
}

#[test]
fn sweep_command_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    write(
        &cfg,
        &format!(
            r#"{{
              "scenario": {SCENARIO},
              "theta_grid": [0.5],
              "gamma_grid": [0.0, 0.2],
              "k_grid": [3],
              "master_seed": 1,
              "replicates": 1,
              "output_dir": "{}"
            }}"#,
            dir.path().join("out").display()
        ),
    );
    let out = speclab_bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/results.csv").exists());
    assert!(dir.path().join("out/run_manifest.json").exists());
    assert!(dir.path().join("out/plots/fig_error_vs_gamma.csv").exists());
}
