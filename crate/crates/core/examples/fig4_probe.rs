//! Scratch diagnostics for the N = 10 bound-saturation pipeline.

use qbayes::*;
use std::f64::consts::PI;
use std::time::Instant;

fn run_case(
    name: &str,
    kind: StateKind,
    theta_max: f64,
    hidden: Vec<usize>,
    epochs: usize,
    batch: usize,
) {
    let n = 10usize;
    let theta_true = 0.3 * PI;
    let t0 = Instant::now;
    let start = t0();
    let model = LikelihoodModel::from_kind(kind, n, None).unwrap();
    let grid = ThetaGrid::new(1000, 0.0, theta_max).unwrap();
    let alloc = allocate(&grid, &AllocationShape::Uniform, 1_000_000).unwrap();
    let ts = generate_training_set(&model, &grid, &alloc, 0x40).unwrap();
    let gen_t = start.elapsed();

    let t = t0();
    let cfg = NetworkConfig::for_outcomes(hidden, 1000, ts.outcomes()).unwrap();
    let trained = train(init(cfg, 100), &ts, &TrainSpec::new(epochs, batch, 200)).unwrap();
    let train_t = t.elapsed();

    let t = t0();
    let table = SingleShotTable::from_network(
        &trained.network,
        model.outcomes(),
        &grid,
        &LikelihoodSource::ExactModel(&model),
    )
    .unwrap();
    let (estimator, ext) = BayesEstimator::from_table(table).unwrap();
    let prior_t = t.elapsed();

    let t = t0();
    let summary = run_trials(
        &model,
        Backend::Network(&estimator),
        &TrialConfig {
            theta_true,
            m_values: vec![100, 1000],
            n_trials: 1000,
            base_seed: 0xF164,
        },
    )
    .unwrap();
    let trial_t = t.elapsed();

    println!(
        "{name}: gen {gen_t:?} train {train_t:?} (loss {:.4} -> {:.4}) prior {prior_t:?} (res {:.1e}) trials {trial_t:?}",
        trained.epoch_loss.first().unwrap(),
        trained.epoch_loss.last().unwrap(),
        ext.residual
    );
    for cell in &summary.cells {
        let m = cell.m as f64;
        let sql = 1.0 / (m * n as f64);
        let crb = 1.0 / (m * n as f64 * (n as f64 / 2.0 + 1.0));
        println!(
            "  m={}: var {:.4e} (var/sql {:.3}, var/crb {:.3}) bias {:.3e} (2dt {:.3e}) mse {:.4e} fails {}",
            cell.m,
            cell.mean_variance,
            cell.mean_variance / sql,
            cell.mean_variance / crb,
            cell.mean_bias,
            2.0 * grid.delta(),
            cell.mean_mse,
            cell.n_failed
        );
    }
    println!("  total {:?}", start.elapsed());
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let (epochs_css, batch_css) = if args.len() > 2 {
        (args[1].parse().unwrap(), args[2].parse().unwrap())
    } else {
        (20, 32)
    };
    let (epochs_tfs, batch_tfs) = if args.len() > 4 {
        (args[3].parse().unwrap(), args[4].parse().unwrap())
    } else {
        (30, 128)
    };
    run_case("css", StateKind::Css, PI, vec![8], epochs_css, batch_css);
    run_case("tfs", StateKind::Tfs, PI / 2.0, vec![32, 32], epochs_tfs, batch_tfs);
    run_case(
        "dtfs",
        StateKind::DepolarizedTfs { epsilon: 0.1 },
        PI / 2.0,
        vec![32, 32],
        epochs_tfs,
        batch_tfs,
    );
}
