//! Scratch: why does the CSS network posterior variance inflate at m = 1000?

use qbayes::*;
use std::f64::consts::PI;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(20);
    let batch: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(32);
    let lr: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.001);
    let hidden: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(8);

    let n = 10usize;
    let theta_true = 0.3 * PI;
    let model = LikelihoodModel::from_kind(StateKind::Css, n, None).unwrap();
    let grid = ThetaGrid::new(1000, 0.0, PI).unwrap();
    let alloc = allocate(&grid, &AllocationShape::Uniform, 1_000_000).unwrap();
    let ts = generate_training_set(&model, &grid, &alloc, 0x40).unwrap();

    // Entropy floor: mean cross-entropy of the exact flat-prior posterior
    // table under the training distribution.
    let exact = SingleShotTable::from_model(&model, &grid).unwrap();
    let dt = grid.delta();
    let mut floor = 0.0;
    for j in 0..grid.len() {
        let probs = model.likelihood(grid.point(j));
        for (mu, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                floor -= p * (exact.posterior_row(mu)[j] * dt).ln() / grid.len() as f64;
            }
        }
    }
    println!("exact-table cross-entropy floor: {floor:.4}");

    let fine_epochs: usize = std::env::args()
        .nth(5)
        .map(|s| s.parse().unwrap())
        .unwrap_or(0);
    let fine_lr: f64 = std::env::args()
        .nth(6)
        .map(|s| s.parse().unwrap())
        .unwrap_or(1e-5);

    let t = Instant::now();
    let cfg = NetworkConfig::for_outcomes(vec![hidden], 1000, ts.outcomes()).unwrap();
    let mut spec = TrainSpec::new(epochs, batch, 200);
    spec.adam.step_size = lr;
    let mut trained = train(init(cfg, 100), &ts, &spec).unwrap();
    if fine_epochs > 0 {
        let mut fine = TrainSpec::new(fine_epochs, batch, 201);
        fine.adam.step_size = fine_lr;
        let polished = train(trained.network, &ts, &fine).unwrap();
        println!("fine-tune loss: {:?}", polished.epoch_loss);
        trained.network = polished.network;
    }
    println!(
        "train({epochs}+{fine_epochs} epochs, batch {batch}, lr {lr}/{fine_lr}, hidden {hidden}): {:?}; loss {:.4} -> {:.4}",
        t.elapsed(),
        trained.epoch_loss.first().unwrap(),
        trained.epoch_loss.last().unwrap()
    );

    let table = SingleShotTable::from_network(
        &trained.network,
        model.outcomes(),
        &grid,
        &LikelihoodSource::ExactModel(&model),
    )
    .unwrap();
    for mu in 0..=n {
        let l1: f64 = table
            .posterior_row(mu)
            .iter()
            .zip(exact.posterior_row(mu))
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * dt;
        print!("L1[{mu}]={l1:.3} ");
    }
    println!();

    let (estimator, _) = BayesEstimator::from_table(table).unwrap();
    let oracle = OracleEstimator::new(&model, GridDistribution::flat(grid));
    for (name, backend) in [
        ("network", Backend::Network(&estimator)),
        ("oracle", Backend::ExactOracle(&oracle)),
    ] {
        let summary = run_trials(
            &model,
            backend,
            &TrialConfig {
                theta_true,
                m_values: vec![100, 1000],
                n_trials: 1000,
                base_seed: 0xF164,
            },
        )
        .unwrap();
        for cell in &summary.cells {
            let sql = 1.0 / (cell.m as f64 * n as f64);
            println!(
                "  {name} m={}: var/sql {:.3} bias {:.3e} mse/sql {:.3}",
                cell.m,
                cell.mean_variance / sql,
                cell.mean_bias,
                cell.mean_mse / sql
            );
        }
    }
}
