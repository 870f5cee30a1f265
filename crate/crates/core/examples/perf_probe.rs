//! Scratch timing probe for the heavy pipeline stages.

use qbayes::*;
use std::f64::consts::PI;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let model =
        LikelihoodModel::from_kind(StateKind::Oat { chi_t: 0.3 * PI }, 50, None).unwrap();
    let grid = ThetaGrid::new(2000, 0.0, PI).unwrap();
    println!("model+grid: {:?}", t0.elapsed());

    let t = Instant::now();
    let alloc = allocate(&grid, &AllocationShape::Uniform, 500 * 2000).unwrap();
    let ts = generate_training_set(&model, &grid, &alloc, 42).unwrap();
    println!("dataset 1e6: {:?}", t.elapsed());

    let cfg = NetworkConfig::for_outcomes(vec![256, 256, 256], 2000, model.outcomes()).unwrap();
    let net = init(cfg, 1);
    let t = Instant::now();
    let out = train(net, &ts, &TrainSpec::new(2, 1024, 9)).unwrap();
    println!("train 2 epochs: {:?} loss={:?}", t.elapsed(), out.epoch_loss);

    let t = Instant::now();
    let table = SingleShotTable::from_network(
        &out.network,
        model.outcomes(),
        &grid,
        &LikelihoodSource::ExactModel(&model),
    )
    .unwrap();
    let (est, ext) = BayesEstimator::from_table(table).unwrap();
    println!(
        "table+prior: {:?} residual={:.2e} iters={}",
        t.elapsed(),
        ext.residual,
        ext.iterations
    );

    let t = Instant::now();
    let trials = TrialConfig {
        theta_true: 0.6 * PI,
        m_values: vec![200],
        n_trials: 1000,
        base_seed: 3,
    };
    let summary = run_trials(&model, Backend::Network(&est), &trials).unwrap();
    println!(
        "1000 trials m=200: {:?} mse={:.3e}",
        t.elapsed(),
        summary.cells[0].mean_mse
    );

    let t = Instant::now();
    let freqs = empirical_frequencies(&ts);
    let cal = calibrate(&freqs, model.outcomes(), &grid).unwrap();
    println!("calibrate: {:?}", t.elapsed());
    let t = Instant::now();
    let summary = run_trials(&model, Backend::Calibration(&cal), &trials).unwrap();
    println!(
        "1000 cal trials m=200: {:?} mse={:.3e} failed={}",
        t.elapsed(),
        summary.cells[0].mean_mse,
        summary.cells[0].n_failed
    );

    let t = Instant::now();
    let oracle = OracleEstimator::new(&model, GridDistribution::flat(grid));
    let summary = run_trials(&model, Backend::ExactOracle(&oracle), &trials).unwrap();
    println!(
        "1000 oracle trials m=200: {:?} mse={:.3e}",
        t.elapsed(),
        summary.cells[0].mean_mse
    );
    println!("total: {:?}", t0.elapsed());
}
