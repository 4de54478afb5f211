//! Command implementations behind the `pup` binary. Every command writes a
//! `manifest_<command>.json` next to its outputs.

mod config;

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde_json::json;

pub use config::RunConfig;

use crate::dataset::{cwtp_profiles, load_dataset, write_catalog, write_interactions, Dataset};
use crate::error::{PupError, Result};
use crate::evaluation::{
    entropy_groups, evaluate, evaluate_by_entropy_group, generate_synthetic, write_text,
    MetricsReport, Protocol, SyntheticConfig,
};
use crate::model::{fit, TrainedModel, Variant};
use crate::training::checkpoint::Checkpoint;
use crate::training::write_loss_history;

/// Width of the CWTP entropy histogram bins, in nats.
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.1;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| PupError::io(dir, e))
}

fn write_manifest(
    config: &RunConfig,
    command: &str,
    started: Instant,
    artifacts: &[PathBuf],
) -> Result<PathBuf> {
    let echo: serde_json::Map<String, serde_json::Value> = config
        .echo()
        .into_iter()
        .map(|(k, v)| (k, serde_json::Value::String(v)))
        .collect();
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.train.seed,
        "duration_secs": started.elapsed().as_secs_f64(),
        "config": echo,
        "artifacts": artifacts.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    let path = config.out.join(format!("manifest_{command}.json"));
    write_text(&path, &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(path)
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| PupError::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn load_prepared(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| PupError::io(path, e))?;
    let dataset: Dataset = serde_json::from_str(&text)?;
    dataset.validate()?;
    Ok(dataset)
}

/// Indexes, quantizes and splits the raw CSVs into `<out>/dataset.json`.
pub fn cmd_prepare(config: &RunConfig) -> Result<PathBuf> {
    let started = Instant::now();
    let missing = |what: &str| PupError::InvalidArgument(format!("{what} path not configured"));
    let interactions = config
        .interactions
        .as_ref()
        .ok_or_else(|| missing("interactions"))?;
    let catalog = config.catalog.as_ref().ok_or_else(|| missing("catalog"))?;
    let (rows, entries) = load_dataset(interactions, catalog)?;
    let dataset = Dataset::build(
        &rows,
        &entries,
        config.price_levels,
        config.quantizer,
        Default::default(),
    )?;
    ensure_dir(&config.out)?;
    let path = config.dataset_path();
    write_text(&path, &(serde_json::to_string(&dataset)? + "\n"))?;
    info!(
        "prepared {} users, {} items, {} train / {} validation / {} test",
        dataset.user_count(),
        dataset.item_count(),
        dataset.train.len(),
        dataset.validation.len(),
        dataset.test.len()
    );
    write_manifest(config, "prepare", started, std::slice::from_ref(&path))?;
    Ok(path)
}

// Division by the inverse keeps decimal widths exact, e.g. 0.3 not 0.30000000000000004.
fn edge(bin: usize, width: f64) -> f64 {
    bin as f64 / (1.0 / width)
}

/// Histogram of entropies: `(bin_start, bin_end, count)` with fixed-width
/// bins from 0 up to the bin holding the largest value.
pub fn entropy_histogram(entropies: &[f64], width: f64) -> Vec<(f64, f64, usize)> {
    if entropies.is_empty() {
        return Vec::new();
    }
    let max = entropies.iter().copied().fold(0.0, f64::max);
    let bins = (max / width).floor() as usize + 1;
    let mut counts = vec![0usize; bins];
    for &e in entropies {
        counts[((e / width).floor() as usize).min(bins - 1)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (edge(b, width), edge(b + 1, width), c))
        .collect()
}

/// Per-user CWTP entropy JSON lines plus a histogram CSV.
pub fn cmd_analyze_cwtp(config: &RunConfig) -> Result<(PathBuf, PathBuf)> {
    let started = Instant::now();
    let dataset = load_prepared(&config.dataset_path())?;
    ensure_dir(&config.out)?;
    if dataset.train.is_empty() {
        warn!("training split is empty; the entropy report is empty");
    }
    let profiles: Vec<_> = cwtp_profiles(&dataset).into_iter().flatten().collect();
    let mut lines = String::new();
    for p in &profiles {
        let line = json!({
            "user": dataset.user_ids[p.user],
            "entropy": p.entropy,
            "num_categories": p.cwtp.len(),
        });
        lines.push_str(&serde_json::to_string(&line)?);
        lines.push('\n');
    }
    let report = config.out.join("cwtp_entropy.jsonl");
    write_text(&report, &lines)?;

    let entropies: Vec<f64> = profiles.iter().map(|p| p.entropy).collect();
    let mut csv = String::from("bin_start,bin_end,count\n");
    for (lo, hi, c) in entropy_histogram(&entropies, HISTOGRAM_BIN_WIDTH) {
        csv.push_str(&format!("{lo},{hi},{c}\n"));
    }
    let hist = config.out.join("cwtp_histogram.csv");
    write_text(&hist, &csv)?;
    write_manifest(
        config,
        "analyze-cwtp",
        started,
        &[report.clone(), hist.clone()],
    )?;
    Ok((report, hist))
}

/// Trains the configured variant; writes the checkpoint and loss history.
pub fn cmd_train(config: &RunConfig) -> Result<PathBuf> {
    let started = Instant::now();
    let dataset = load_prepared(&config.dataset_path())?;
    ensure_dir(&config.out)?;
    let (model, history) = with_threads(config.threads, || {
        fit(&dataset, config.variant, &config.train)
    })??;
    let checkpoint = Checkpoint {
        variant: config.variant,
        seed: config.train.seed,
        config: config.model_echo(),
        tensors: model.tensors(),
    };
    let ckpt_path = config.checkpoint_path();
    checkpoint.save(&ckpt_path)?;
    let loss_path = config.out.join("loss_history.csv");
    write_loss_history(&loss_path, &history)?;
    if let (Some(first), Some(last)) = (history.first(), history.last()) {
        info!(
            "loss {:.4} -> {:.4} over {} epochs",
            first.mean_loss,
            last.mean_loss,
            history.len()
        );
    }
    write_manifest(config, "train", started, &[ckpt_path.clone(), loss_path])?;
    Ok(ckpt_path)
}

fn load_model(config: &RunConfig, dataset: &Dataset) -> Result<TrainedModel> {
    let path = config.checkpoint_path();
    let checkpoint = Checkpoint::load(&path)?;
    if checkpoint.variant != config.variant {
        return Err(PupError::InvalidArgument(format!(
            "checkpoint {} holds variant {} but the run is configured for {}",
            path.display(),
            checkpoint.variant,
            config.variant
        )));
    }
    let mut model_config = RunConfig::default();
    for (k, v) in &checkpoint.config {
        model_config.apply(k, v)?;
    }
    TrainedModel::from_checkpoint(dataset, &checkpoint, &model_config.train)
}

fn write_report(
    config: &RunConfig,
    dataset: &Dataset,
    report: &MetricsReport,
    suffix: &str,
    group_of: &dyn Fn(usize) -> String,
) -> Result<Vec<PathBuf>> {
    let metrics = config.out.join(format!("metrics_{suffix}.jsonl"));
    write_text(&metrics, &report.to_json_lines())?;
    let per_user = config.out.join(format!("per_user_{suffix}.csv"));
    let body = String::from("user_id,K,recall,ndcg,entropy_group\n")
        + &report.per_user_csv_rows(dataset, group_of);
    write_text(&per_user, &body)?;
    Ok(vec![metrics, per_user])
}

fn run_protocols(
    config: &RunConfig,
    protocols: &[Protocol],
    command: &str,
) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let dataset = load_prepared(&config.dataset_path())?;
    let model = load_model(config, &dataset)?;
    ensure_dir(&config.out)?;
    let groups = entropy_groups(&dataset, config.entropy_threshold);
    let group_of = |u: usize| groups[u].map_or_else(|| "none".to_string(), |g| g.to_string());

    let mut artifacts = Vec::new();
    with_threads(config.threads, || -> Result<()> {
        let scorer = model.scorer()?;
        for &protocol in protocols {
            let report = evaluate(&scorer, &dataset, &config.ks, protocol)?;
            info!("{protocol}: {} users evaluated", report.users_evaluated);
            artifacts.extend(write_report(
                config,
                &dataset,
                &report,
                &protocol.to_string(),
                &group_of,
            )?);
            if protocol == Protocol::Standard {
                let by_group = evaluate_by_entropy_group(
                    &scorer,
                    &dataset,
                    &config.ks,
                    config.entropy_threshold,
                )?;
                for (name, r) in [
                    ("consistent", &by_group.consistent),
                    ("inconsistent", &by_group.inconsistent),
                ] {
                    let path = config.out.join(format!("metrics_standard_{name}.jsonl"));
                    write_text(&path, &r.to_json_lines())?;
                    artifacts.push(path);
                }
            }
        }
        Ok(())
    })??;
    write_manifest(config, command, started, &artifacts)?;
    Ok(artifacts)
}

/// Evaluates the checkpoint under the configured protocol.
pub fn cmd_evaluate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    run_protocols(config, &[config.protocol], "evaluate")
}

/// Evaluates the checkpoint under both cold-start protocols.
pub fn cmd_coldstart_eval(config: &RunConfig) -> Result<Vec<PathBuf>> {
    run_protocols(config, &[Protocol::Cir, Protocol::Ucir], "coldstart-eval")
}

/// Writes planted-band synthetic `interactions.csv` and `catalog.csv`.
pub fn cmd_synth(
    config: &RunConfig,
    users: usize,
    items: usize,
    categories: usize,
) -> Result<(PathBuf, PathBuf)> {
    let started = Instant::now();
    let data = generate_synthetic(&SyntheticConfig::new(
        users,
        items,
        categories,
        config.price_levels,
        config.train.seed,
    ))?;
    ensure_dir(&config.out)?;
    let inter = config.out.join("interactions.csv");
    let cat = config.out.join("catalog.csv");
    write_interactions(&inter, &data.interactions)?;
    write_catalog(&cat, &data.catalog)?;
    write_manifest(config, "synth", started, &[inter.clone(), cat.clone()])?;
    Ok((inter, cat))
}

pub fn variant_names() -> String {
    Variant::ALL
        .iter()
        .map(|v| v.tag())
        .collect::<Vec<_>>()
        .join("|")
}
