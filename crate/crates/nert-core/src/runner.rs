//! End-to-end run execution: dataset assembly, optional normalization,
//! training, evaluation at the best and final checkpoints, and the
//! self-describing run directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coords::CoordinateConfig;
use crate::dataset::SignalDataset;
use crate::error::Result;
use crate::eval::{config_hash, evaluate, export_traces, write_loss_csv, EvalResult, RunReport};
use crate::ingest::{apply_block_protocol, apply_drop_ratio, load_csv, BlockLayout, Normalizer};
use crate::models::{Model, ModelSpec};
use crate::synthetic::{make_benchmark, make_periodic_series, BenchmarkConfig};
use crate::train::{train, TrainConfig, TrainReport};

/// Where the signal comes from and how it is masked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DataSelector {
    /// Closed-form or ODE benchmark by name.
    Benchmark { name: String, config: BenchmarkConfig },
    /// Synthetic hourly sum-of-sinusoids series under the block protocol.
    PeriodicSeries {
        points: usize,
        series_seed: u64,
        layout: BlockLayout,
        active_blocks: usize,
    },
    /// CSV file under the block protocol.
    CsvBlocks {
        path: PathBuf,
        layout: BlockLayout,
        active_blocks: usize,
    },
    /// CSV file under the random drop-ratio protocol.
    CsvDrop { path: PathBuf, ratio: f64, mask_seed: u64 },
}

impl DataSelector {
    pub fn dataset_label(&self) -> String {
        match self {
            DataSelector::Benchmark { name, .. } => name.clone(),
            DataSelector::PeriodicSeries { .. } => "periodic-series".into(),
            DataSelector::CsvBlocks { path, .. } | DataSelector::CsvDrop { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "csv".into()),
        }
    }

    pub fn blocks(&self) -> Option<usize> {
        match self {
            DataSelector::PeriodicSeries { active_blocks, .. }
            | DataSelector::CsvBlocks { active_blocks, .. } => Some(*active_blocks),
            _ => None,
        }
    }

    pub fn drop_ratio(&self) -> Option<f64> {
        match self {
            DataSelector::CsvDrop { ratio, .. } => Some(*ratio),
            _ => None,
        }
    }

    pub fn load(&self, coord: &CoordinateConfig) -> Result<SignalDataset> {
        match self {
            DataSelector::Benchmark { name, config } => make_benchmark(name, config),
            DataSelector::PeriodicSeries { points, series_seed, layout, active_blocks } => {
                let series = make_periodic_series(*points, *series_seed);
                apply_block_protocol(&series, layout, *active_blocks, coord)
            }
            DataSelector::CsvBlocks { path, layout, active_blocks } => {
                let series = load_csv(path)?;
                apply_block_protocol(&series, layout, *active_blocks, coord)
            }
            DataSelector::CsvDrop { path, ratio, mask_seed } => {
                let series = load_csv(path)?;
                apply_drop_ratio(&series, *ratio, *mask_seed, coord)
            }
        }
    }
}

/// The full, reproducible description of one training run. Serialized into
/// `manifest.json`; re-running from the manifest reproduces the metrics
/// bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub run_name: String,
    pub model: ModelSpec,
    pub train: TrainConfig,
    pub data: DataSelector,
    pub coord: CoordinateConfig,
    /// Z-score targets over train cells before training.
    pub normalize: bool,
    /// Report MSE in raw units (inverse transform before the error) rather
    /// than normalized units.
    #[serde(default)]
    pub eval_raw_units: bool,
}

impl RunConfig {
    /// Hash of the manifest with every seed field cleared, so replicates of
    /// one configuration across seeds share a hash.
    pub fn config_hash(&self) -> Result<String> {
        let mut unseeded = self.clone();
        unseeded.train.seed = 0;
        match &mut unseeded.model {
            ModelSpec::Nert(s) => s.seed = 0,
            ModelSpec::Siren(s) => s.seed = 0,
            ModelSpec::Ffn(s) => s.seed = 0,
        }
        unseeded.run_name = String::new();
        Ok(config_hash(&serde_json::to_string(&unseeded)?))
    }

    pub fn seed(&self) -> u64 {
        self.train.seed
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    pub train_report: TrainReport,
    /// Model holding the best-checkpoint parameters.
    pub model: Model,
    pub dataset: SignalDataset,
    pub normalizer: Option<Normalizer>,
}

/// Execute a run; when `out_dir` is given, write the self-describing run
/// directory (manifest.json, report.json, loss.csv, checkpoint.json,
/// checkpoint-final.json, traces/).
pub fn execute(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<RunOutcome> {
    let mut dataset = cfg.data.load(&cfg.coord)?;
    let normalizer = if cfg.normalize {
        let norm = Normalizer::fit(&dataset)?;
        norm.apply(&mut dataset);
        Some(norm)
    } else {
        None
    };

    let mut model = cfg.model.build()?;
    let train_report = train(&mut model, &dataset, &cfg.train)?;

    let inverse = if cfg.eval_raw_units { normalizer.as_ref() } else { None };
    model.params_mut().restore(&train_report.final_params);
    let metrics_final = evaluate(&model, &dataset, inverse)?;
    model.params_mut().restore(&train_report.best_params);
    let metrics = evaluate(&model, &dataset, inverse)?;

    let report = RunReport {
        run_name: cfg.run_name.clone(),
        config_hash: cfg.config_hash()?,
        seed: cfg.seed(),
        model_kind: cfg.model.kind(),
        dataset: cfg.data.dataset_label(),
        blocks: cfg.data.blocks(),
        drop_ratio: cfg.data.drop_ratio(),
        epochs: cfg.train.epochs,
        best_epoch: train_report.best_epoch,
        best_val_mse: train_report.best_val_mse,
        wall_secs: train_report.wall_secs,
        metrics,
        metrics_final,
    };

    if let Some(dir) = out_dir {
        write_run_dir(dir, cfg, &report, &train_report, &model, &dataset)?;
    }

    Ok(RunOutcome { report, train_report, model, dataset, normalizer })
}

fn write_run_dir(
    dir: &Path,
    cfg: &RunConfig,
    report: &RunReport,
    train_report: &TrainReport,
    best_model: &Model,
    dataset: &SignalDataset,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(cfg)?)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    write_loss_csv(dir, train_report)?;
    best_model.save_checkpoint(&dir.join("checkpoint.json"))?;
    {
        let mut final_model = cfg.model.build()?;
        final_model.params_mut().restore(&train_report.final_params);
        final_model.save_checkpoint(&dir.join("checkpoint-final.json"))?;
    }
    export_traces(best_model, dataset, dir)?;
    Ok(())
}

pub fn read_report(dir: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(dir.join("report.json"))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_manifest(dir: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(dir.join("manifest.json"))?;
    Ok(serde_json::from_str(&text)?)
}

/// Re-evaluate a stored checkpoint against its manifest's dataset.
pub fn evaluate_run(dir: &Path) -> Result<EvalResult> {
    let cfg = read_manifest(dir)?;
    let mut dataset = cfg.data.load(&cfg.coord)?;
    let normalizer = if cfg.normalize {
        let norm = Normalizer::fit(&dataset)?;
        norm.apply(&mut dataset);
        Some(norm)
    } else {
        None
    };
    let model = Model::load_checkpoint(&dir.join("checkpoint.json"))?;
    let inverse = if cfg.eval_raw_units { normalizer.as_ref() } else { None };
    evaluate(&model, &dataset, inverse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::NertSpec;

    fn tiny_cfg(seed: u64) -> RunConfig {
        RunConfig {
            run_name: format!("tiny-{seed}"),
            model: ModelSpec::Nert(NertSpec {
                dim_psi_t: 4,
                dim_psi_f: 4,
                dim_psi_fourier: 6,
                dim_hidden_period: 6,
                dim_hidden_scale: 6,
                seed,
                ..Default::default()
            }),
            train: TrainConfig { epochs: 20, seed, ..Default::default() },
            data: DataSelector::Benchmark {
                name: "sine50".into(),
                config: BenchmarkConfig {
                    sine_points: 60,
                    validation_fraction: 0.1,
                    ..Default::default()
                },
            },
            coord: CoordinateConfig::default(),
            normalize: false,
            eval_raw_units: false,
        }
    }

    #[test]
    fn run_dir_is_self_describing_and_reproducible() {
        let dir = std::env::temp_dir().join("nert-runner-test");
        let _ = std::fs::remove_dir_all(&dir);
        let cfg = tiny_cfg(3);
        let outcome = execute(&cfg, Some(&dir)).unwrap();

        for file in ["manifest.json", "report.json", "loss.csv", "checkpoint.json"] {
            assert!(dir.join(file).exists(), "{file} missing");
        }
        assert!(dir.join("traces/y.csv").exists());

        // Re-running from the written manifest reproduces metrics bit-exactly.
        let manifest = read_manifest(&dir).unwrap();
        let again = execute(&manifest, None).unwrap();
        assert_eq!(outcome.report.metrics, again.report.metrics);
        assert_eq!(outcome.train_report.train_loss, again.train_report.train_loss);

        // Stored checkpoint re-evaluates to the stored metrics.
        let metrics = evaluate_run(&dir).unwrap();
        assert_eq!(metrics, outcome.report.metrics);
    }

    #[test]
    fn config_hash_ignores_seed_but_not_structure() {
        let a = tiny_cfg(0);
        let b = tiny_cfg(7);
        assert_eq!(a.config_hash().unwrap(), b.config_hash().unwrap());
        let mut c = tiny_cfg(0);
        c.train.epochs = 21;
        assert_ne!(a.config_hash().unwrap(), c.config_hash().unwrap());
    }
}
