//! End-to-end pipeline tests: artifact round trips through files, and
//! bit-level agreement between thread counts.

use qbayes::*;
use std::f64::consts::PI;

fn qubit_pipeline(seed: u64) -> (LikelihoodModel, ThetaGrid, TrainingSet) {
    let model = LikelihoodModel::qubit();
    let grid = ThetaGrid::new(40, 0.0, PI).unwrap();
    let alloc = allocate(&grid, &AllocationShape::Uniform, 200 * 40).unwrap();
    let ts = generate_training_set(&model, &grid, &alloc, seed).unwrap();
    (model, grid, ts)
}

#[test]
fn full_pipeline_survives_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (model, grid, ts) = qubit_pipeline(11);

    // Data set through its text format.
    let ts_path = dir.path().join("qubit.train.txt");
    ts.save(&ts_path).unwrap();
    let ts = TrainingSet::load(&ts_path).unwrap();
    let reloaded_model = LikelihoodModel::from_descriptor(ts.descriptor().unwrap()).unwrap();
    assert_eq!(reloaded_model.outcomes(), model.outcomes());

    // Train, checkpoint, reload.
    let cfg = NetworkConfig::for_outcomes(vec![4], 40, ts.outcomes()).unwrap();
    let trained = train(init(cfg, 7), &ts, &TrainSpec::new(6, 128, 3)).unwrap();
    let ckpt = dir.path().join("qubit.qbnet");
    let meta = CheckpointMeta { seed: 7, epochs_trained: 6, tool_version: "test".into() };
    save_checkpoint(&ckpt, &trained.network, &meta).unwrap();
    let (net, _) = load_checkpoint(&ckpt).unwrap();
    assert_eq!(net.params_flat(), trained.network.params_flat());

    // Posterior pipeline from the reloaded network.
    let table = SingleShotTable::from_network(
        &net,
        model.outcomes(),
        &grid,
        &LikelihoodSource::ExactModel(&model),
    )
    .unwrap();
    let (estimator, extraction) = BayesEstimator::from_table(table).unwrap();
    assert!(extraction.residual <= 1e-9);

    let seq: Vec<usize> = sample_sequence(&model, 0.6 * PI, 50, 99)
        .iter()
        .map(|&x| x as usize)
        .collect();
    let post = estimator.posterior(&seq).unwrap();
    let (theta_hat, _) = map_estimate(&post);
    assert!(theta_hat > 0.0 && theta_hat < PI);

    // Posterior export and CSV emission.
    let mut two_col = Vec::new();
    post.write_two_column(&mut two_col).unwrap();
    let text = String::from_utf8(two_col).unwrap();
    assert_eq!(text.lines().count(), 40);

    let summary = run_trials(
        &model,
        Backend::Network(&estimator),
        &TrialConfig { theta_true: 0.6 * PI, m_values: vec![10, 50], n_trials: 20, base_seed: 5 },
    )
    .unwrap();
    let csv = summaries_to_csv(&[summary], &model.descriptor().unwrap());
    assert!(csv.starts_with("backend,state_kind,N,"));
    assert_eq!(csv.lines().count(), 1 + 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let model =
                LikelihoodModel::from_kind(StateKind::Oat { chi_t: 0.3 * PI }, 20, None).unwrap();
            let grid = ThetaGrid::new(150, 0.0, PI).unwrap();
            let alloc = allocate(&grid, &AllocationShape::Uniform, 20 * 150).unwrap();
            let ts = generate_training_set(&model, &grid, &alloc, 42).unwrap();
            let cfg = NetworkConfig::for_outcomes(vec![48, 48], 150, ts.outcomes()).unwrap();
            let trained = train(init(cfg, 5), &ts, &TrainSpec::new(2, 64, 8)).unwrap();
            let table = SingleShotTable::from_network(
                &trained.network,
                model.outcomes(),
                &grid,
                &LikelihoodSource::ExactModel(&model),
            )
            .unwrap();
            let (est, ext) = BayesEstimator::from_table(table).unwrap();
            let summary = run_trials(
                &model,
                Backend::Network(&est),
                &TrialConfig {
                    theta_true: 0.37 * PI,
                    m_values: vec![25],
                    n_trials: 40,
                    base_seed: 1,
                },
            )
            .unwrap();
            (
                trained.network.params_flat(),
                trained.epoch_loss,
                ext.prior.values().to_vec(),
                summary,
            )
        })
    };
    let single = run(1);
    let multi = run(4);
    // Bitwise equality of everything downstream.
    assert_eq!(single.0.len(), multi.0.len());
    for (a, b) in single.0.iter().zip(&multi.0) {
        assert_eq!(a.to_bits(), b.to_bits(), "weights differ between thread counts");
    }
    for (a, b) in single.1.iter().zip(&multi.1) {
        assert_eq!(a.to_bits(), b.to_bits(), "losses differ between thread counts");
    }
    for (a, b) in single.2.iter().zip(&multi.2) {
        assert_eq!(a.to_bits(), b.to_bits(), "prior differs between thread counts");
    }
    assert_eq!(single.3, multi.3);
}

#[test]
fn detection_noise_flows_through_the_pipeline() {
    let noisy = LikelihoodModel::from_kind(
        StateKind::Tfs,
        10,
        Some(DetectionNoise { sigma_sq: 0.25 }),
    )
    .unwrap();
    let clean = LikelihoodModel::from_kind(StateKind::Tfs, 10, None).unwrap();
    // Noise lowers the Fisher information.
    let f_noisy = fisher_information(&noisy, 0.3 * PI, 1e-4).value;
    let f_clean = fisher_information(&clean, 0.3 * PI, 1e-4).value;
    assert!(f_noisy < f_clean, "{f_noisy} !< {f_clean}");

    // And the sampled data reflect the blurred distribution.
    let grid = ThetaGrid::new(30, 0.0, PI / 2.0).unwrap();
    let alloc = allocate(&grid, &AllocationShape::Uniform, 3000).unwrap();
    let ts = generate_training_set(&noisy, &grid, &alloc, 8).unwrap();
    assert_eq!(ts.descriptor().unwrap().noise_sigma_sq, Some(0.25));
}
