//! Subcommand implementations: the thin orchestration layer over the library.

use crate::config::{BackendKind, RunConfig, SourceKind};
use crate::error::{CliError, CliResult};
use qbayes::{
    calibrate, calibration_posterior, empirical_frequencies, generate_training_set,
    load_checkpoint, map_estimate, posterior_mse, posterior_variance, sample_sequence,
    save_checkpoint, summaries_to_csv, train, Backend, BayesEstimator, CalibratedLikelihood,
    CheckpointMeta, DenseNetwork, GridDistribution, LikelihoodModel, LikelihoodSource,
    NetworkConfig, OracleEstimator, SingleShotTable, ThetaGrid, TrainingSet, TrialConfig,
    TrialSummary,
};
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn guard_overwrite(path: &Path, overwrite: bool) -> CliResult<()> {
    if path.exists() && !overwrite {
        return Err(CliError::Data(format!(
            "{} already exists; pass --overwrite to replace it",
            path.display()
        )));
    }
    Ok(())
}

fn write_sidecar(artifact: &Path, meta: serde_json::Value) -> CliResult<()> {
    let path = artifact.with_extension(format!(
        "{}.meta.json",
        artifact.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    let text = serde_json::to_string_pretty(&meta)
        .map_err(|e| CliError::Data(format!("metadata encoding: {e}")))?;
    std::fs::write(&path, text)?;
    Ok(())
}

fn metadata_comments(cfg: &RunConfig, seeds: &[(&str, u64)]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# tool_version: {TOOL_VERSION}\n"));
    out.push_str(&format!("# config_hash: {}\n", cfg.hash()));
    for (name, value) in seeds {
        out.push_str(&format!("# {name}: {value}\n"));
    }
    out
}

fn effective_root_seed(cfg: &RunConfig, seed_flag: Option<u64>) -> u64 {
    seed_flag.unwrap_or(cfg.training.seed)
}

fn default_path(cfg: &RunConfig, dir: &Path, flag: &Option<PathBuf>, suffix: &str) -> PathBuf {
    flag.clone().unwrap_or_else(|| cfg.artifact(dir, suffix))
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

pub fn gen_data(
    cfg: &RunConfig,
    out: Option<&Path>,
    seed_flag: Option<u64>,
    overwrite: bool,
) -> CliResult<()> {
    let model = cfg.build_model()?;
    let grid = cfg.build_grid()?;
    let shape = cfg.allocation_shape()?;
    let alloc = qbayes::allocate(&grid, &shape, cfg.training.m_train)
        .map_err(|e| CliError::Config(format!("training allocation: {e}")))?;
    let root = effective_root_seed(cfg, seed_flag);
    let data_seed = cfg.data_seed(root);

    let dir = cfg.out_dir(out);
    std::fs::create_dir_all(&dir)?;
    let path = cfg.artifact(&dir, "train.txt");
    guard_overwrite(&path, overwrite)?;

    let ts = generate_training_set(&model, &grid, &alloc, data_seed)?;
    ts.save(&path)?;
    write_sidecar(
        &path,
        json!({
            "tool_version": TOOL_VERSION,
            "config_hash": cfg.hash(),
            "command": "gen-data",
            "model": model.descriptor(),
            "root_seed": root,
            "data_seed": data_seed,
            "m_train": ts.len(),
            "counts_per_label": ts.per_label_counts(),
        }),
    )?;
    println!(
        "wrote {} ({} records over {} grid points)",
        path.display(),
        ts.len(),
        grid.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

pub fn cmd_train(
    cfg: &RunConfig,
    dataset: &Option<PathBuf>,
    out: Option<&Path>,
    seed_flag: Option<u64>,
    overwrite: bool,
) -> CliResult<()> {
    let grid = cfg.build_grid()?;
    let dir = cfg.out_dir(out);
    let ts_path = default_path(cfg, &dir, dataset, "train.txt");
    let ts = TrainingSet::load(&ts_path)?;
    if ts.grid() != &grid {
        return Err(CliError::Data(format!(
            "dataset grid ({} points on [{}, {}]) differs from the config grid",
            ts.grid().len(),
            ts.grid().theta_min(),
            ts.grid().theta_max()
        )));
    }
    let root = effective_root_seed(cfg, seed_flag);
    let net_cfg = NetworkConfig::for_outcomes(cfg.training.hidden.clone(), grid.len(), ts.outcomes())
        .map_err(|e| CliError::Config(format!("training.hidden: {e}")))?;
    let spec = cfg.train_spec(root);
    let init_seed = cfg.init_seed(root);

    std::fs::create_dir_all(&dir)?;
    let ckpt_path = cfg.artifact(&dir, "qbnet");
    let loss_path = cfg.artifact(&dir, "loss.csv");
    guard_overwrite(&ckpt_path, overwrite)?;
    guard_overwrite(&loss_path, overwrite)?;

    let outcome = train(qbayes::init(net_cfg, init_seed), &ts, &spec)?;
    let meta = CheckpointMeta {
        seed: init_seed,
        epochs_trained: cfg.training.epochs as u32,
        tool_version: TOOL_VERSION.to_string(),
    };
    save_checkpoint(&ckpt_path, &outcome.network, &meta)?;

    let mut loss_csv = metadata_comments(cfg, &[("root_seed", root), ("init_seed", init_seed)]);
    loss_csv.push_str("epoch,mean_loss\n");
    for (epoch, loss) in outcome.epoch_loss.iter().enumerate() {
        loss_csv.push_str(&format!("{},{}\n", epoch + 1, loss));
    }
    std::fs::write(&loss_path, loss_csv)?;
    write_sidecar(
        &ckpt_path,
        json!({
            "tool_version": TOOL_VERSION,
            "config_hash": cfg.hash(),
            "command": "train",
            "root_seed": root,
            "init_seed": init_seed,
            "batch_seed": spec.seed,
            "epochs": cfg.training.epochs,
            "final_loss": outcome.epoch_loss.last(),
        }),
    )?;
    println!(
        "wrote {} (final epoch loss {:.5})",
        ckpt_path.display(),
        outcome.epoch_loss.last().unwrap()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// prior
// ---------------------------------------------------------------------------

fn load_network(cfg: &RunConfig, dir: &Path, flag: &Option<PathBuf>) -> CliResult<DenseNetwork> {
    let path = default_path(cfg, dir, flag, "qbnet");
    let (net, _) = load_checkpoint(&path)?;
    Ok(net)
}

fn build_table(
    cfg: &RunConfig,
    model: &LikelihoodModel,
    grid: &ThetaGrid,
    net: &DenseNetwork,
    source: SourceKind,
    dir: &Path,
    dataset: &Option<PathBuf>,
) -> CliResult<SingleShotTable> {
    match source {
        SourceKind::Exact => Ok(SingleShotTable::from_network(
            net,
            model.outcomes(),
            grid,
            &LikelihoodSource::ExactModel(model),
        )?),
        SourceKind::Empirical => {
            let ts_path = default_path(cfg, dir, dataset, "train.txt");
            let ts = TrainingSet::load(&ts_path)?;
            if ts.grid() != grid {
                return Err(CliError::Data("dataset grid differs from the config grid".into()));
            }
            let freqs = empirical_frequencies(&ts);
            Ok(SingleShotTable::from_network(
                net,
                model.outcomes(),
                grid,
                &LikelihoodSource::EmpiricalFrequencies(&freqs),
            )?)
        }
    }
}

pub fn cmd_prior(
    cfg: &RunConfig,
    checkpoint: &Option<PathBuf>,
    dataset: &Option<PathBuf>,
    source_flag: Option<&str>,
    out: Option<&Path>,
    overwrite: bool,
) -> CliResult<()> {
    let model = cfg.build_model()?;
    let grid = cfg.build_grid()?;
    let dir = cfg.out_dir(out);
    let source = match source_flag {
        Some("exact") => SourceKind::Exact,
        Some("empirical") => SourceKind::Empirical,
        Some(other) => {
            return Err(CliError::Config(format!(
                "--likelihood-source `{other}` (exact|empirical)"
            )))
        }
        None => cfg.likelihood_source()?,
    };
    let net = load_network(cfg, &dir, checkpoint)?;
    let table = build_table(cfg, &model, &grid, &net, source, &dir, dataset)?;
    let extraction = qbayes::extract_prior(&table)?;

    std::fs::create_dir_all(&dir)?;
    let path = cfg.artifact(&dir, "prior.txt");
    guard_overwrite(&path, overwrite)?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    write!(file, "{}", metadata_comments(cfg, &[]))?;
    writeln!(file, "# residual: {:e}", extraction.residual)?;
    writeln!(file, "# iterations: {}", extraction.iterations)?;
    writeln!(file, "# columns: theta density")?;
    extraction.prior.write_two_column(&mut file)?;
    file.flush()?;
    write_sidecar(
        &path,
        json!({
            "tool_version": TOOL_VERSION,
            "config_hash": cfg.hash(),
            "command": "prior",
            "residual": extraction.residual,
            "iterations": extraction.iterations,
            "likelihood_source": match source { SourceKind::Exact => "exact", SourceKind::Empirical => "empirical" },
            "likelihood_warnings": table.likelihood_warnings(),
        }),
    )?;
    println!(
        "wrote {} (residual {:.3e} after {} iterations)",
        path.display(),
        extraction.residual,
        extraction.iterations
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

fn load_prior_file(path: &Path, grid: &ThetaGrid) -> CliResult<GridDistribution> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let _theta = parts.next();
        let density: f64 = parts
            .next()
            .ok_or_else(|| CliError::Data(format!("malformed prior line `{line}`")))?
            .parse()
            .map_err(|e| CliError::Data(format!("bad density in `{line}`: {e}")))?;
        values.push(density);
    }
    Ok(GridDistribution::new(*grid, values)?)
}

fn parse_sequence_file(path: &Path, model: &LikelihoodModel) -> CliResult<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    let mut seq = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line
            .parse()
            .map_err(|e| CliError::Data(format!("bad outcome value `{line}`: {e}")))?;
        let idx = model.outcomes().index_of(value).ok_or_else(|| {
            CliError::Data(format!("outcome {value} is not in the model's outcome set"))
        })?;
        seq.push(idx);
    }
    Ok(seq)
}

pub struct EstimateArgs {
    pub checkpoint: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    pub prior: Option<PathBuf>,
    pub sequence: Option<PathBuf>,
    pub theta_true: Option<f64>,
    pub m: Option<usize>,
    pub posterior_out: Option<PathBuf>,
}

pub fn cmd_estimate(
    cfg: &RunConfig,
    args: &EstimateArgs,
    out: Option<&Path>,
    seed_flag: Option<u64>,
    overwrite: bool,
) -> CliResult<()> {
    let model = cfg.build_model()?;
    let grid = cfg.build_grid()?;
    let dir = cfg.out_dir(out);

    let sequence: Vec<usize> = match (&args.sequence, args.theta_true, args.m) {
        (Some(path), _, _) => parse_sequence_file(path, &model)?,
        (None, Some(theta), Some(m)) => {
            let seed = seed_flag.unwrap_or(cfg.evaluation.base_seed);
            sample_sequence(&model, theta, m, seed)
                .iter()
                .map(|&x| x as usize)
                .collect()
        }
        (None, None, None) => Vec::new(),
        _ => {
            return Err(CliError::Config(
                "estimate needs either --sequence FILE or both --theta-true and --m".into(),
            ))
        }
    };

    let (backend_name, posterior) = if let Some(cal_path) = &args.calibration {
        let cal = CalibratedLikelihood::load(cal_path)?;
        ("calibration", calibration_posterior(&cal, &sequence)?.dist)
    } else {
        let net = load_network(cfg, &dir, &args.checkpoint)?;
        let table = build_table(cfg, &model, &grid, &net, cfg.likelihood_source()?, &dir, &None)?;
        let prior = match &args.prior {
            Some(path) => load_prior_file(path, &grid)?,
            None => qbayes::extract_prior(&table)?.prior,
        };
        let estimator = BayesEstimator::new(table, prior)?;
        ("network", estimator.posterior(&sequence)?)
    };

    let (theta_hat, _) = map_estimate(&posterior);
    let variance = posterior_variance(&posterior, theta_hat);
    let mse = args.theta_true.map(|theta| posterior_mse(&posterior, theta));

    let mut report = String::new();
    report.push_str(&metadata_comments(cfg, &[]));
    report.push_str(&format!("backend: {backend_name}\n"));
    report.push_str(&format!("sequence_length: {}\n", sequence.len()));
    report.push_str(&format!("theta_hat: {theta_hat}\n"));
    report.push_str(&format!("posterior_variance: {variance}\n"));
    if let Some(mse) = mse {
        report.push_str(&format!("posterior_mse: {mse}\n"));
    }
    print!("{report}");

    std::fs::create_dir_all(&dir)?;
    let report_path = cfg.artifact(&dir, "estimate.txt");
    guard_overwrite(&report_path, overwrite)?;
    std::fs::write(&report_path, &report)?;
    if let Some(post_path) = &args.posterior_out {
        guard_overwrite(post_path, overwrite)?;
        let mut file = std::io::BufWriter::new(std::fs::File::create(post_path)?);
        write!(file, "{}", metadata_comments(cfg, &[]))?;
        writeln!(file, "# columns: theta density")?;
        posterior.write_two_column(&mut file)?;
        file.flush()?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate / compare
// ---------------------------------------------------------------------------

fn run_summaries(
    cfg: &RunConfig,
    model: &LikelihoodModel,
    backend: Backend,
    base_seed: u64,
) -> CliResult<Vec<TrialSummary>> {
    let mut summaries = Vec::new();
    for &theta in &cfg.evaluation.theta_true {
        let trial_cfg = TrialConfig {
            theta_true: theta,
            m_values: cfg.evaluation.m_values.clone(),
            n_trials: cfg.evaluation.n_trials,
            base_seed,
        };
        summaries.push(qbayes::run_trials(model, backend, &trial_cfg)?);
    }
    Ok(summaries)
}

fn write_summary_csv(
    cfg: &RunConfig,
    path: &Path,
    summaries: &[TrialSummary],
    base_seed: u64,
) -> CliResult<()> {
    let mut text = metadata_comments(cfg, &[("base_seed", base_seed)]);
    text.push_str(&summaries_to_csv(summaries, &cfg.descriptor()?));
    std::fs::write(path, text)?;
    Ok(())
}

pub fn cmd_evaluate(
    cfg: &RunConfig,
    checkpoint: &Option<PathBuf>,
    dataset: &Option<PathBuf>,
    out: Option<&Path>,
    seed_flag: Option<u64>,
    overwrite: bool,
) -> CliResult<()> {
    let model = cfg.build_model()?;
    let grid = cfg.build_grid()?;
    let dir = cfg.out_dir(out);
    let base_seed = seed_flag.unwrap_or(cfg.evaluation.base_seed);
    std::fs::create_dir_all(&dir)?;
    let path = cfg.artifact(&dir, "eval.csv");
    guard_overwrite(&path, overwrite)?;

    let summaries = match cfg.backend_kind()? {
        BackendKind::Network => {
            let net = load_network(cfg, &dir, checkpoint)?;
            let table =
                build_table(cfg, &model, &grid, &net, cfg.likelihood_source()?, &dir, dataset)?;
            let (estimator, _) = BayesEstimator::from_table(table)?;
            run_summaries(cfg, &model, Backend::Network(&estimator), base_seed)?
        }
        BackendKind::Calibration => {
            let ts_path = default_path(cfg, &dir, dataset, "train.txt");
            let ts = TrainingSet::load(&ts_path)?;
            let freqs = empirical_frequencies(&ts);
            let cal = calibrate(&freqs, model.outcomes(), &grid)?;
            run_summaries(cfg, &model, Backend::Calibration(&cal), base_seed)?
        }
        BackendKind::Oracle => {
            let oracle = OracleEstimator::new(&model, GridDistribution::flat(grid));
            run_summaries(cfg, &model, Backend::ExactOracle(&oracle), base_seed)?
        }
    };
    write_summary_csv(cfg, &path, &summaries, base_seed)?;
    write_sidecar(
        &path,
        json!({
            "tool_version": TOOL_VERSION,
            "config_hash": cfg.hash(),
            "command": "evaluate",
            "base_seed": base_seed,
            "rows": summaries.iter().map(|s| s.cells.len()).sum::<usize>(),
        }),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_compare(
    cfg: &RunConfig,
    checkpoint: &Option<PathBuf>,
    dataset: &Option<PathBuf>,
    out: Option<&Path>,
    seed_flag: Option<u64>,
    overwrite: bool,
) -> CliResult<()> {
    let model = cfg.build_model()?;
    let grid = cfg.build_grid()?;
    let dir = cfg.out_dir(out);
    let base_seed = seed_flag.unwrap_or(cfg.evaluation.base_seed);
    std::fs::create_dir_all(&dir)?;
    let csv_path = cfg.artifact(&dir, "compare.csv");
    let cal_path = cfg.artifact(&dir, "calibration.txt");
    guard_overwrite(&csv_path, overwrite)?;
    guard_overwrite(&cal_path, overwrite)?;

    let ts_path = default_path(cfg, &dir, dataset, "train.txt");
    let ts = TrainingSet::load(&ts_path)?;
    if ts.grid() != &grid {
        return Err(CliError::Data("dataset grid differs from the config grid".into()));
    }
    let net = load_network(cfg, &dir, checkpoint)?;
    let table = build_table(cfg, &model, &grid, &net, cfg.likelihood_source()?, &dir, dataset)?;
    let (estimator, _) = BayesEstimator::from_table(table)?;
    let freqs = empirical_frequencies(&ts);
    let cal = calibrate(&freqs, model.outcomes(), &grid)?;
    let oracle = OracleEstimator::new(&model, GridDistribution::flat(grid));

    let backends = [
        Backend::Network(&estimator),
        Backend::Calibration(&cal),
        Backend::ExactOracle(&oracle),
    ];
    let summaries = qbayes::compare_backends(
        &model,
        &backends,
        &cfg.evaluation.theta_true,
        &cfg.evaluation.m_values,
        cfg.evaluation.n_trials,
        base_seed,
    )?;
    write_summary_csv(cfg, &csv_path, &summaries, base_seed)?;
    cal.save(&cal_path)?;
    write_sidecar(
        &csv_path,
        json!({
            "tool_version": TOOL_VERSION,
            "config_hash": cfg.hash(),
            "command": "compare",
            "base_seed": base_seed,
            "backends": ["network", "calibration", "oracle"],
        }),
    )?;
    println!("wrote {} and {}", csv_path.display(), cal_path.display());
    Ok(())
}
