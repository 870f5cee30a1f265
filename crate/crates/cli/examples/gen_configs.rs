//! Scratch generator for the shipped reproduction configs.

use qbayes_cli::config::*;
use std::f64::consts::PI;

fn base(
    kind: &str,
    n: usize,
    d: usize,
    theta_max: f64,
    m_train: u64,
    hidden: Vec<usize>,
    epochs: usize,
    batch: usize,
    prefix: &str,
) -> RunConfig {
    RunConfig {
        model: ModelSection {
            kind: kind.into(),
            n_qubits: n,
            epsilon: None,
            chi_t: None,
            noise_sigma_sq: None,
        },
        grid: GridSection { d, theta_min: 0.0, theta_max },
        training: TrainingSection {
            allocation: "uniform".into(),
            step_cut: None,
            weights: None,
            m_train,
            hidden,
            epochs,
            batch_size: batch,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon_adam: 1e-8,
            seed: 2024,
        },
        evaluation: EvaluationSection {
            theta_true: vec![0.6 * PI],
            m_values: vec![10, 50, 100],
            n_trials: 1000,
            base_seed: 501,
            likelihood_source: None,
            backend: None,
        },
        output: OutputSection { dir: format!("out/{prefix}"), prefix: prefix.into() },
    }
}

fn main() {
    std::fs::create_dir_all("configs").unwrap();
    let write = |name: &str, cfg: &RunConfig| {
        let path = format!("configs/{name}.toml");
        std::fs::write(&path, cfg.to_toml()).unwrap();
        println!("wrote {path}");
    };

    // Single-qubit reference run.
    let fig2 = base("qubit", 1, 100, PI, 100_000, vec![4], 5, 128, "fig2");
    write("fig2", &fig2);

    // Prior-recovery runs on the 40-point grid.
    let mut flat = base("qubit", 1, 40, PI, 40_000, vec![4], 10, 128, "fig3_flat");
    flat.evaluation.m_values = vec![10];
    flat.evaluation.n_trials = 100;
    write("fig3_flat", &flat);

    let mut step = flat.clone();
    step.training.allocation = "step".into();
    step.training.step_cut = Some(20);
    step.output = OutputSection { dir: "out/fig3_step".into(), prefix: "fig3_step".into() };
    write("fig3_step", &step);

    let mut smooth = flat.clone();
    smooth.training.allocation = "custom".into();
    let grid_points: Vec<f64> = (0..40).map(|j| PI * j as f64 / 39.0).collect();
    smooth.training.weights = Some(
        grid_points
            .iter()
            .map(|&t| (-(t - PI / 2.0).powi(2) / (2.0 * 0.55 * 0.55)).exp())
            .collect(),
    );
    smooth.output = OutputSection { dir: "out/fig3_smooth".into(), prefix: "fig3_smooth".into() };
    write("fig3_smooth", &smooth);

    // N = 10 bound-saturation runs.
    let mut css = base("css", 10, 1000, PI, 1_000_000, vec![8], 20, 32, "fig4_css");
    css.evaluation.theta_true = vec![0.3 * PI];
    css.evaluation.m_values = vec![1, 10, 100, 1000];
    write("fig4_css", &css);

    let mut tfs = base("tfs", 10, 1000, PI / 2.0, 1_000_000, vec![32, 32], 30, 128, "fig4_tfs");
    tfs.evaluation.theta_true = vec![0.3 * PI];
    tfs.evaluation.m_values = vec![1, 10, 100, 1000];
    write("fig4_tfs", &tfs);

    let mut dtfs = tfs.clone();
    dtfs.model.kind = "depolarized_tfs".into();
    dtfs.model.epsilon = Some(0.1);
    dtfs.output = OutputSection { dir: "out/fig4_dtfs".into(), prefix: "fig4_dtfs".into() };
    write("fig4_dtfs", &dtfs);

    // N = 50 over-squeezed comparison runs.
    let delta = PI / 1999.0;
    let sweep: Vec<f64> = (0..17).map(|s| (0.10 + 0.05 * s as f64) * PI + delta / 3.0).collect();
    let mut fig5 = base(
        "oat",
        50,
        2000,
        PI,
        1_000_000,
        vec![256, 256, 256],
        60,
        1024,
        "fig5",
    );
    fig5.model.chi_t = Some(0.3 * PI);
    fig5.evaluation.theta_true = sweep.clone();
    fig5.evaluation.m_values = vec![200];
    write("fig5", &fig5);

    let mut fig5_noise = fig5.clone();
    fig5_noise.model.noise_sigma_sq = Some(0.25);
    fig5_noise.output =
        OutputSection { dir: "out/fig5_noise".into(), prefix: "fig5_noise".into() };
    write("fig5_noise", &fig5_noise);

    // Small end-to-end smoke recipe.
    let mut smoke = base("qubit", 1, 40, PI, 8_000, vec![4], 3, 64, "smoke");
    smoke.evaluation.m_values = vec![5, 20];
    smoke.evaluation.n_trials = 25;
    write("smoke", &smoke);
}
