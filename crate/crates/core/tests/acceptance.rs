//! Acceptance suite: one test per release criterion. Each test prints a
//! single `ACCEPTANCE <n> [PASS|FAIL]` line (visible with `--nocapture`) and
//! fails the build if its checks or runtime budget are violated.
//!
//! Heavy pipelines (the N = 50 over-squeezed runs) are built once in shared
//! statics; criteria 5 and 6 both read them.

use qbayes::*;
use std::f64::consts::PI;
use std::sync::LazyLock;
use std::time::Instant;

fn finish(id: usize, name: &str, started: Instant, budget_s: f64, mut failures: Vec<String>) {
    let elapsed = started.elapsed().as_secs_f64();
    if elapsed > budget_s {
        failures.push(format!("runtime {elapsed:.1}s exceeded budget {budget_s}s"));
    }
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {id} [{status}] {name} ({elapsed:.1}s)");
    assert!(failures.is_empty(), "criterion {id} failed:\n  {}", failures.join("\n  "));
}

fn check(failures: &mut Vec<String>, ok: bool, msg: String) {
    if !ok {
        failures.push(msg);
    }
}

fn as_indices(seq: &[u32]) -> Vec<usize> {
    seq.iter().map(|&x| x as usize).collect()
}

// ---------------------------------------------------------------------------
// Shared pipelines
// ---------------------------------------------------------------------------

struct QubitPipeline {
    model: LikelihoodModel,
    grid: ThetaGrid,
    estimator: BayesEstimator,
}

/// Single-qubit reference run: d = 100 grid on [0, pi], one hidden layer of 4,
/// 10^3 measurements per grid point, 5 epochs at mini-batch 128.
static QUBIT_PIPELINE: LazyLock<QubitPipeline> = LazyLock::new(|| {
    let model = LikelihoodModel::qubit();
    let grid = ThetaGrid::new(100, 0.0, PI).unwrap();
    let alloc = allocate(&grid, &AllocationShape::Uniform, 1000 * 100).unwrap();
    let ts = generate_training_set(&model, &grid, &alloc, 0xF1602).unwrap();
    let cfg = NetworkConfig::for_outcomes(vec![4], 100, ts.outcomes()).unwrap();
    let trained = train(init(cfg, 2024), &ts, &TrainSpec::new(5, 128, 77)).unwrap();
    let table = SingleShotTable::from_network(
        &trained.network,
        model.outcomes(),
        &grid,
        &LikelihoodSource::ExactModel(&model),
    )
    .unwrap();
    let (estimator, _) = BayesEstimator::from_table(table).unwrap();
    QubitPipeline { model, grid, estimator }
});

struct SweepCell {
    theta: f64,
    network_mse: f64,
    calibration_mse: f64,
    oracle_mse: f64,
}

struct OverSqueezedRun {
    cells: Vec<SweepCell>,
}

/// N = 50 one-axis-twisted pipeline behind Fig.-5-scale settings: d = 2000,
/// 500 measurements per grid point, 3 x 256 network trained 60 epochs at
/// batch 1024, then a 17-point off-grid phase sweep at m = 200 with 10^3
/// trials per point for all three backends on shared sequences.
fn over_squeezed_run(noise: Option<DetectionNoise>) -> OverSqueezedRun {
    let model = LikelihoodModel::from_kind(StateKind::Oat { chi_t: 0.3 * PI }, 50, noise).unwrap();
    let grid = ThetaGrid::new(2000, 0.0, PI).unwrap();
    let alloc = allocate(&grid, &AllocationShape::Uniform, 500 * 2000).unwrap();
    let ts = generate_training_set(&model, &grid, &alloc, 0xF165).unwrap();

    let cfg = NetworkConfig::for_outcomes(vec![256, 256, 256], 2000, ts.outcomes()).unwrap();
    let trained = train(init(cfg, 31), &ts, &TrainSpec::new(60, 1024, 67)).unwrap();
    let table = SingleShotTable::from_network(
        &trained.network,
        model.outcomes(),
        &grid,
        &LikelihoodSource::ExactModel(&model),
    )
    .unwrap();
    let (estimator, _) = BayesEstimator::from_table(table).unwrap();

    let freqs = empirical_frequencies(&ts);
    let cal = calibrate(&freqs, model.outcomes(), &grid).unwrap();
    let oracle = OracleEstimator::new(&model, GridDistribution::flat(grid));

    // Off-grid sweep: the dtheta/3 offset keeps every point strictly between
    // training grid points.
    let thetas: Vec<f64> = (0..17)
        .map(|s| (0.10 + 0.05 * s as f64) * PI + grid.delta() / 3.0)
        .collect();
    let backends = [
        Backend::Network(&estimator),
        Backend::Calibration(&cal),
        Backend::ExactOracle(&oracle),
    ];
    let summaries =
        compare_backends(&model, &backends, &thetas, &[200], 1000, 0xBEEF).unwrap();
    let mse_of = |backend: &str, theta: f64| -> f64 {
        summaries
            .iter()
            .find(|s| s.backend == backend && s.theta_true == theta)
            .expect("summary row present")
            .cells[0]
            .mean_mse
    };
    let cells = thetas
        .iter()
        .map(|&theta| SweepCell {
            theta,
            network_mse: mse_of("network", theta),
            calibration_mse: mse_of("calibration", theta),
            oracle_mse: mse_of("oracle", theta),
        })
        .collect();
    OverSqueezedRun { cells }
}

static OVER_SQUEEZED_CLEAN: LazyLock<OverSqueezedRun> =
    LazyLock::new(|| over_squeezed_run(None));
static OVER_SQUEEZED_NOISY: LazyLock<OverSqueezedRun> =
    LazyLock::new(|| over_squeezed_run(Some(DetectionNoise { sigma_sq: 0.25 })));

fn advantage_fraction(run: &OverSqueezedRun) -> (usize, usize) {
    let wins = run
        .cells
        .iter()
        .filter(|c| {
            (c.network_mse - c.oracle_mse).abs() < (c.calibration_mse - c.oracle_mse).abs()
        })
        .count();
    (wins, run.cells.len())
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

/// Criterion 1: the trained single-qubit network's single-shot posteriors are
/// within L1 distance 0.15 of the exact posteriors for both outcomes.
#[test]
fn criterion_1_qubit_single_shot_posteriors() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let p = &*QUBIT_PIPELINE;
    let exact = SingleShotTable::from_model(&p.model, &p.grid).unwrap();
    let dt = p.grid.delta();
    for mu in 0..2 {
        let l1: f64 = p
            .estimator
            .table()
            .posterior_row(mu)
            .iter()
            .zip(exact.posterior_row(mu))
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * dt;
        check(
            &mut failures,
            l1 <= 0.15,
            format!("outcome {mu}: L1(network, exact) = {l1:.4} > 0.15"),
        );
    }
    finish(1, "qubit single-shot posterior", started, 60.0, failures);
}

/// Criterion 2: asymptotic efficiency of the qubit network at m = 50,
/// theta_true = 0.6 pi over 10^3 trials: mean posterior variance in
/// [0.8, 1.3] x (1/50) and the mean MAP estimate within 2 dtheta of truth.
#[test]
fn criterion_2_qubit_asymptotic_efficiency() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let p = &*QUBIT_PIPELINE;
    let cfg = TrialConfig {
        theta_true: 0.6 * PI,
        m_values: vec![50],
        n_trials: 1000,
        base_seed: 0xAB50,
    };
    let summary = run_trials(&p.model, Backend::Network(&p.estimator), &cfg).unwrap();
    let cell = &summary.cells[0];
    let crb = 1.0 / 50.0;
    let ratio = cell.mean_variance / crb;
    check(
        &mut failures,
        (0.8..=1.3).contains(&ratio),
        format!("mean variance / CRB = {ratio:.3} outside [0.8, 1.3]"),
    );
    let bias_limit = 2.0 * p.grid.delta();
    check(
        &mut failures,
        cell.mean_bias.abs() <= bias_limit,
        format!("mean bias {:.3e} exceeds 2 dtheta = {bias_limit:.3e}", cell.mean_bias),
    );
    finish(2, "qubit asymptotic efficiency", started, 120.0, failures);
}

/// Criterion 3: the extracted prior reproduces flat, step and smooth
/// training allocations (L1 <= 0.1; flat case max relative deviation <= 5%),
/// with fixed-point residual <= 1e-9.
#[test]
fn criterion_3_prior_recovery() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let model = LikelihoodModel::qubit();
    let grid = ThetaGrid::new(40, 0.0, PI).unwrap();
    let m_train = 40_000;

    let smooth_weights: Vec<f64> = grid
        .points()
        .iter()
        .map(|&t| (-(t - PI / 2.0).powi(2) / (2.0 * 0.55 * 0.55)).exp())
        .collect();
    let cases: Vec<(&str, AllocationShape)> = vec![
        ("flat", AllocationShape::Uniform),
        ("step", AllocationShape::Step { cut_index: 20 }),
        ("smooth", AllocationShape::Custom { weights: smooth_weights }),
    ];

    for (i, (name, shape)) in cases.into_iter().enumerate() {
        let case_start = Instant::now();
        let alloc = allocate(&grid, &shape, m_train).unwrap();
        let ts = generate_training_set(&model, &grid, &alloc, 0x30 + i as u64).unwrap();
        let cfg = NetworkConfig::for_outcomes(vec![4], 40, ts.outcomes()).unwrap();
        let trained = train(init(cfg, 5 + i as u64), &ts, &TrainSpec::new(10, 128, 11)).unwrap();
        let table = SingleShotTable::from_network(
            &trained.network,
            model.outcomes(),
            &grid,
            &LikelihoodSource::ExactModel(&model),
        )
        .unwrap();
        let extraction = extract_prior(&table).unwrap();
        check(
            &mut failures,
            extraction.residual <= 1e-9,
            format!("{name}: residual {:.2e} > 1e-9", extraction.residual),
        );
        let target = GridDistribution::new(grid, alloc.density(&grid)).unwrap();
        let l1 = extraction.prior.l1_distance(&target);
        check(&mut failures, l1 <= 0.1, format!("{name}: L1 = {l1:.4} > 0.1"));
        if name == "flat" {
            let max_rel = extraction
                .prior
                .values()
                .iter()
                .zip(target.values())
                .map(|(p, q)| ((p - q) / q).abs())
                .fold(0.0f64, f64::max);
            check(
                &mut failures,
                max_rel <= 0.05,
                format!("flat: max relative deviation {max_rel:.4} > 0.05"),
            );
        }
        check(
            &mut failures,
            case_start.elapsed().as_secs_f64() <= 120.0,
            format!("{name}: case exceeded its 2-minute budget"),
        );
    }
    finish(3, "prior recovery (flat/step/smooth)", started, 360.0, failures);
}

/// Criterion 4: N = 10 bound saturation at theta_true = 0.3 pi: the CSS
/// network's mean posterior variance is within 30% of the SQL and the TFS
/// network's within 30% of its Cramer-Rao bound for m in {100, 1000}; the
/// depolarized TFS sits between TFS-CRB and SQL; all biases within 2 dtheta.
#[test]
fn criterion_4_bound_saturation() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let theta_true = 0.3 * PI;
    let n: usize = 10;

    struct StateCase {
        name: &'static str,
        kind: StateKind,
        theta_max: f64,
        hidden: Vec<usize>,
        epochs: usize,
        batch: usize,
    }
    let cases = [
        StateCase {
            name: "css",
            kind: StateKind::Css,
            theta_max: PI,
            hidden: vec![8],
            epochs: 20,
            batch: 32,
        },
        StateCase {
            name: "tfs",
            kind: StateKind::Tfs,
            theta_max: PI / 2.0,
            hidden: vec![32, 32],
            epochs: 30,
            batch: 128,
        },
        StateCase {
            name: "dtfs",
            kind: StateKind::DepolarizedTfs { epsilon: 0.1 },
            theta_max: PI / 2.0,
            hidden: vec![32, 32],
            epochs: 30,
            batch: 128,
        },
    ];

    for (i, case) in cases.iter().enumerate() {
        let model = LikelihoodModel::from_kind(case.kind, n, None).unwrap();
        let grid = ThetaGrid::new(1000, 0.0, case.theta_max).unwrap();
        let alloc = allocate(&grid, &AllocationShape::Uniform, 1000 * 1000).unwrap();
        let ts = generate_training_set(&model, &grid, &alloc, 0x40 + i as u64).unwrap();
        let cfg = NetworkConfig::for_outcomes(case.hidden.clone(), 1000, ts.outcomes()).unwrap();
        let trained = train(
            init(cfg, 100 + i as u64),
            &ts,
            &TrainSpec::new(case.epochs, case.batch, 200 + i as u64),
        )
        .unwrap();
        let table = SingleShotTable::from_network(
            &trained.network,
            model.outcomes(),
            &grid,
            &LikelihoodSource::ExactModel(&model),
        )
        .unwrap();
        let (estimator, _) = BayesEstimator::from_table(table).unwrap();
        let summary = run_trials(
            &model,
            Backend::Network(&estimator),
            &TrialConfig {
                theta_true,
                m_values: vec![100, 1000],
                n_trials: 1000,
                base_seed: 0xF164 + i as u64,
            },
        )
        .unwrap();

        for cell in &summary.cells {
            let m = cell.m as f64;
            let sql = 1.0 / (m * n as f64);
            let tfs_crb = 1.0 / (m * n as f64 * (n as f64 / 2.0 + 1.0));
            match case.name {
                "css" => check(
                    &mut failures,
                    (cell.mean_variance - sql).abs() <= 0.3 * sql,
                    format!(
                        "css m={}: variance {:.3e} not within 30% of SQL {:.3e}",
                        cell.m, cell.mean_variance, sql
                    ),
                ),
                "tfs" => check(
                    &mut failures,
                    (cell.mean_variance - tfs_crb).abs() <= 0.3 * tfs_crb,
                    format!(
                        "tfs m={}: variance {:.3e} not within 30% of CRB {:.3e}",
                        cell.m, cell.mean_variance, tfs_crb
                    ),
                ),
                _ => check(
                    &mut failures,
                    cell.mean_variance >= tfs_crb && cell.mean_variance <= sql,
                    format!(
                        "dtfs m={}: variance {:.3e} outside [CRB {:.3e}, SQL {:.3e}]",
                        cell.m, cell.mean_variance, tfs_crb, sql
                    ),
                ),
            }
            let bias_limit = 2.0 * grid.delta();
            check(
                &mut failures,
                cell.mean_bias.abs() <= bias_limit,
                format!(
                    "{} m={}: |bias| {:.3e} > 2 dtheta {:.3e}",
                    case.name, cell.m, cell.mean_bias, bias_limit
                ),
            );
        }
    }
    finish(4, "N=10 bound saturation", started, 900.0, failures);
}

/// Criterion 5: for the N = 50 over-squeezed state with limited calibration
/// data, the network posterior MSE tracks the exact-Bayes MSE more closely
/// than the calibration baseline on at least 70% of an off-grid phase sweep
/// at m = 200.
#[test]
fn criterion_5_network_vs_calibration() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let run = &*OVER_SQUEEZED_CLEAN;
    let (wins, total) = advantage_fraction(run);
    check(
        &mut failures,
        (wins as f64) / (total as f64) >= 0.70,
        format!("network closer to oracle on {wins}/{total} sweep points (< 70%)"),
    );
    finish(5, "network vs calibration advantage", started, 3600.0, failures);
}

/// Criterion 6: with detection noise (variance 0.25) the same >= 70%
/// advantage holds, and the blur degrades both backends' sweep-averaged MSE
/// relative to the noiseless run.
#[test]
fn criterion_6_detection_noise_robustness() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let clean = &*OVER_SQUEEZED_CLEAN;
    let noisy = &*OVER_SQUEEZED_NOISY;
    let (wins, total) = advantage_fraction(noisy);
    check(
        &mut failures,
        (wins as f64) / (total as f64) >= 0.70,
        format!("network closer to oracle on {wins}/{total} noisy sweep points (< 70%)"),
    );
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let net_clean = mean(&clean.cells.iter().map(|c| c.network_mse).collect::<Vec<_>>());
    let net_noisy = mean(&noisy.cells.iter().map(|c| c.network_mse).collect::<Vec<_>>());
    let cal_clean = mean(&clean.cells.iter().map(|c| c.calibration_mse).collect::<Vec<_>>());
    let cal_noisy = mean(&noisy.cells.iter().map(|c| c.calibration_mse).collect::<Vec<_>>());
    check(
        &mut failures,
        net_noisy > net_clean,
        format!("network MSE not degraded by noise: {net_noisy:.4e} <= {net_clean:.4e}"),
    );
    check(
        &mut failures,
        cal_noisy > cal_clean,
        format!("calibration MSE not degraded by noise: {cal_noisy:.4e} <= {cal_clean:.4e}"),
    );
    finish(6, "detection-noise robustness", started, 3600.0, failures);
}

/// Criterion 7: the always-runnable property suite.
#[test]
fn criterion_7_property_suite() {
    let started = Instant::now();
    let mut failures = Vec::new();

    // Backprop vs central finite differences, relative error <= 1e-4.
    {
        let cfg = NetworkConfig::new(vec![4], 6, (2.0, 0.0)).unwrap();
        let net = init(cfg, 9);
        let batch: Vec<(f64, usize)> = vec![(-0.5, 0), (0.5, 5), (0.5, 2), (-0.25, 3)];
        let grads = gradient(&net, &batch).flatten();
        let params = net.params_flat();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for k in 0..params.len() {
            let mut p = params.clone();
            p[k] += h;
            let mut plus = net.clone();
            plus.set_params_flat(&p).unwrap();
            p[k] -= 2.0 * h;
            let mut minus = net.clone();
            minus.set_params_flat(&p).unwrap();
            let fd = (loss(&plus, &batch) - loss(&minus, &batch)) / (2.0 * h);
            let scale = fd.abs().max(grads[k].abs()).max(1e-8);
            worst = worst.max((fd - grads[k]).abs() / scale);
        }
        check(&mut failures, worst <= 1e-4, format!("gradient check: rel err {worst:.2e} > 1e-4"));
    }

    // Rotation orthogonality within 1e-10 for N in {1, 2, 10, 50}.
    for n in [1usize, 2, 10, 50] {
        let rotor = SpinRotor::new(n);
        let r = rotor.rotation(1.234);
        let mut worst: f64 = 0.0;
        for a in 0..=n {
            for b in 0..=n {
                let mut dot = 0.0;
                for k in 0..=n {
                    dot += r[(a, k)] * r[(b, k)];
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - expect).abs());
            }
        }
        check(&mut failures, worst <= 1e-10, format!("orthogonality N={n}: {worst:.2e}"));
    }

    // Likelihood normalization within 1e-10 on a 101-point scan.
    let models = [
        LikelihoodModel::qubit(),
        LikelihoodModel::from_kind(StateKind::Css, 10, None).unwrap(),
        LikelihoodModel::from_kind(StateKind::Tfs, 10, None).unwrap(),
        LikelihoodModel::from_kind(StateKind::DepolarizedTfs { epsilon: 0.1 }, 10, None).unwrap(),
        LikelihoodModel::from_kind(
            StateKind::Oat { chi_t: 0.3 * PI },
            50,
            Some(DetectionNoise { sigma_sq: 0.25 }),
        )
        .unwrap(),
    ];
    for (i, model) in models.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for k in 0..=100 {
            let probs = model.likelihood(PI * k as f64 / 100.0);
            worst = worst.max((probs.iter().sum::<f64>() - 1.0).abs());
        }
        check(&mut failures, worst <= 1e-10, format!("normalization model {i}: {worst:.2e}"));
    }

    // Fisher information reference values {1, 10, 60}.
    let f = fisher_information(&LikelihoodModel::qubit(), 0.6 * PI, 1e-4).value;
    check(&mut failures, (f - 1.0).abs() <= 1e-6, format!("qubit F = {f}"));
    let f = fisher_information(
        &LikelihoodModel::from_kind(StateKind::Css, 10, None).unwrap(),
        0.3 * PI,
        1e-4,
    )
    .value;
    check(&mut failures, (f - 10.0).abs() <= 1e-4, format!("CSS F = {f}"));
    let f = fisher_information(
        &LikelihoodModel::from_kind(StateKind::Tfs, 10, None).unwrap(),
        0.3 * PI,
        1e-4,
    )
    .value;
    check(&mut failures, (f - 60.0).abs() <= 1e-3, format!("TFS F = {f}"));

    // Sequential consistency and permutation invariance within 1e-10.
    {
        let model = LikelihoodModel::qubit();
        let grid = ThetaGrid::new(80, 0.0, PI).unwrap();
        let table = SingleShotTable::from_model(&model, &grid).unwrap();
        let (est, _) = BayesEstimator::from_table(table).unwrap();
        let m1 = [1usize, 0, 1, 0, 0, 0, 1];
        let m2 = [0usize, 1, 0, 0];
        let joint: Vec<usize> = m1.iter().chain(&m2).copied().collect();
        let direct = est.posterior(&joint).unwrap();
        let stage = est.posterior(&m1).unwrap();
        let chained = est.posterior_from(&stage, &m2).unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in direct.values().iter().zip(chained.values()) {
            worst = worst.max((a - b).abs());
        }
        check(&mut failures, worst <= 1e-10, format!("sequential consistency: {worst:.2e}"));

        let mut reversed = joint.clone();
        reversed.reverse();
        let perm = est.posterior(&reversed).unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in direct.values().iter().zip(perm.values()) {
            worst = worst.max((a - b).abs());
        }
        check(&mut failures, worst <= 1e-10, format!("permutation invariance: {worst:.2e}"));
    }

    // Log-space composition equals a directly multiplied linear-space
    // posterior at m = 20.
    {
        let model = LikelihoodModel::qubit();
        let grid = ThetaGrid::new(64, 0.0, PI).unwrap();
        let prior = GridDistribution::flat(grid);
        let seq = as_indices(&sample_sequence(&model, 0.6 * PI, 20, 4242));
        let log_space = exact_posterior(&model, &prior, &seq).unwrap();
        // Independent linear-space oracle.
        let mut weights: Vec<f64> = prior.values().to_vec();
        for &mu in &seq {
            for (j, w) in weights.iter_mut().enumerate() {
                *w *= model.likelihood(grid.point(j))[mu];
            }
        }
        let total: f64 = weights.iter().sum::<f64>() * grid.delta();
        let mut worst: f64 = 0.0;
        for (w, &l) in weights.iter().zip(log_space.values()) {
            worst = worst.max((w / total - l).abs());
        }
        check(&mut failures, worst <= 1e-10, format!("log vs linear space: {worst:.2e}"));
    }

    // Bit-exact determinism of training and trials under fixed seeds.
    {
        let model = LikelihoodModel::qubit();
        let grid = ThetaGrid::new(30, 0.0, PI).unwrap();
        let alloc = allocate(&grid, &AllocationShape::Uniform, 3000).unwrap();
        let ts = generate_training_set(&model, &grid, &alloc, 51).unwrap();
        let cfg = NetworkConfig::for_outcomes(vec![4], 30, ts.outcomes()).unwrap();
        let spec = TrainSpec::new(3, 64, 13);
        let a = train(init(cfg.clone(), 1), &ts, &spec).unwrap();
        let b = train(init(cfg, 1), &ts, &spec).unwrap();
        let identical = a
            .network
            .params_flat()
            .iter()
            .zip(b.network.params_flat())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        check(&mut failures, identical, "training is not bit-deterministic".into());

        let oracle = OracleEstimator::new(&model, GridDistribution::flat(grid));
        let tcfg = TrialConfig {
            theta_true: 0.6 * PI,
            m_values: vec![10],
            n_trials: 32,
            base_seed: 3,
        };
        let s1 = run_trials(&model, Backend::ExactOracle(&oracle), &tcfg).unwrap();
        let s2 = run_trials(&model, Backend::ExactOracle(&oracle), &tcfg).unwrap();
        check(&mut failures, s1 == s2, "trials are not deterministic".into());
    }

    finish(7, "property suite", started, 60.0, failures);
}
