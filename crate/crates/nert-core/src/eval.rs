//! Role-wise MSE metrics, trace export, and multi-seed aggregation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Role, SignalDataset, UNOBSERVED_CODE};
use crate::error::{Error, Result};
use crate::ingest::Normalizer;
use crate::models::{Model, ModelKind};
use crate::train::TrainReport;

/// Forecasting windows reported when a dataset has an extrapolation suffix.
pub const HORIZONS: &[usize] = &[96, 192, 336, 720];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub train_mse: Option<f64>,
    pub validation_mse: Option<f64>,
    pub interp_mse: Option<f64>,
    pub extrap_mse: Option<f64>,
    pub per_feature: Vec<FeatureMse>,
    /// Horizon-sliced extrapolation MSE; `n` counts rows past the forecast
    /// boundary, and slices nest (the n=96 cells are a subset of n=192).
    pub horizons: Vec<HorizonMse>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMse {
    pub feature: String,
    pub train_mse: Option<f64>,
    pub validation_mse: Option<f64>,
    pub interp_mse: Option<f64>,
    pub extrap_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonMse {
    pub n: usize,
    pub mse: f64,
}

impl EvalResult {
    pub fn for_role(&self, role: Role) -> Option<f64> {
        match role {
            Role::Train => self.train_mse,
            Role::Validation => self.validation_mse,
            Role::TestInterp => self.interp_mse,
            Role::TestExtrap => self.extrap_mse,
        }
    }
}

struct Accum {
    sum: f64,
    count: usize,
}

impl Accum {
    fn new() -> Self {
        Accum { sum: 0.0, count: 0 }
    }
    fn push(&mut self, err: f64) {
        self.sum += err * err;
        self.count += 1;
    }
    fn mse(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

/// One forward pass over every coordinate; squared errors grouped by role
/// and feature over observed cells. When `inverse` is given, predictions and
/// targets are mapped back to raw units before the error is taken.
pub fn evaluate(
    model: &Model,
    ds: &SignalDataset,
    inverse: Option<&Normalizer>,
) -> Result<EvalResult> {
    let batch = ds.batch_all();
    let pred = model.predict(&batch)?;
    Ok(metrics_from_predictions(ds, &batch.cells, &pred.pred, inverse))
}

/// Group squared errors of precomputed predictions by role and feature;
/// the modulated models route their adapted forward passes through here.
pub fn metrics_from_predictions(
    ds: &SignalDataset,
    cells: &[(usize, usize)],
    preds: &[f64],
    inverse: Option<&Normalizer>,
) -> EvalResult {
    let m = ds.m();
    let mut by_role = [Accum::new(), Accum::new(), Accum::new(), Accum::new()];
    let mut by_feature: Vec<[Accum; 4]> = (0..m)
        .map(|_| [Accum::new(), Accum::new(), Accum::new(), Accum::new()])
        .collect();

    for (row, &(i, j)) in cells.iter().enumerate() {
        let k = ds.idx(i, j);
        if !ds.observed[k] {
            continue;
        }
        let (mut p, mut t) = (preds[row], ds.targets[k]);
        if let Some(norm) = inverse {
            p = norm.inverse_value(j, p);
            t = norm.inverse_value(j, t);
        }
        let err = p - t;
        let slot = ds.roles[k].code() as usize;
        by_role[slot].push(err);
        by_feature[j][slot].push(err);
    }

    let horizons = horizon_slices(ds, cells, preds, inverse);

    EvalResult {
        train_mse: by_role[0].mse(),
        validation_mse: by_role[1].mse(),
        interp_mse: by_role[2].mse(),
        extrap_mse: by_role[3].mse(),
        per_feature: ds
            .feature_names
            .iter()
            .zip(by_feature)
            .map(|(name, acc)| FeatureMse {
                feature: name.clone(),
                train_mse: acc[0].mse(),
                validation_mse: acc[1].mse(),
                interp_mse: acc[2].mse(),
                extrap_mse: acc[3].mse(),
            })
            .collect(),
        horizons,
    }
}

/// MSE over the first `n` rows past the forecast boundary, for each window
/// size that has data. A single set of predictions serves every window.
fn horizon_slices(
    ds: &SignalDataset,
    cells: &[(usize, usize)],
    preds: &[f64],
    inverse: Option<&Normalizer>,
) -> Vec<HorizonMse> {
    let boundary = (0..ds.n()).find(|&i| {
        (0..ds.m()).any(|j| {
            let k = ds.idx(i, j);
            ds.observed[k] && ds.roles[k] == Role::TestExtrap
        })
    });
    let Some(boundary) = boundary else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for &n in HORIZONS {
        let mut acc = Accum::new();
        for (row, &(i, j)) in cells.iter().enumerate() {
            let k = ds.idx(i, j);
            if !ds.observed[k] || ds.roles[k] != Role::TestExtrap {
                continue;
            }
            if i >= boundary && i < boundary + n {
                let (mut p, mut t) = (preds[row], ds.targets[k]);
                if let Some(norm) = inverse {
                    p = norm.inverse_value(j, p);
                    t = norm.inverse_value(j, t);
                }
                acc.push(p - t);
            }
        }
        if let Some(mse) = acc.mse() {
            out.push(HorizonMse { n, mse });
        }
    }
    out
}

// ── Trace export ────────────────────────────────────────────────────

/// Write one `traces/<feature>.csv` per feature with columns
/// `t,target,pred,period,scale,role`. The factor columns stay empty for
/// models without a factored decoder; unobserved targets are left blank.
pub fn export_traces(model: &Model, ds: &SignalDataset, dir: &Path) -> Result<()> {
    let traces_dir = dir.join("traces");
    std::fs::create_dir_all(&traces_dir)?;
    let batch = ds.batch_all();
    let pred = model.predict(&batch)?;
    let axis = ds.axis.scalar_axis();
    let m = ds.m();

    for j in 0..m {
        let mut out = String::from("t,target,pred,period,scale,role\n");
        for (row, &(i, jj)) in batch.cells.iter().enumerate() {
            if jj != j {
                continue;
            }
            let k = ds.idx(i, j);
            out.push_str(&format!("{}", axis[i]));
            out.push(',');
            if ds.observed[k] {
                out.push_str(&format!("{}", ds.targets[k]));
            }
            out.push_str(&format!(",{}", pred.pred[row]));
            out.push(',');
            if let Some(period) = &pred.period {
                out.push_str(&format!("{}", period[row]));
            }
            out.push(',');
            if let Some(scale) = &pred.scale {
                out.push_str(&format!("{}", scale[row]));
            }
            let code = if ds.observed[k] { ds.roles[k].code() } else { UNOBSERVED_CODE };
            out.push_str(&format!(",{code}\n"));
        }
        let stem = sanitize_filename(&ds.feature_names[j]);
        std::fs::write(traces_dir.join(format!("{stem}.csv")), out)?;
    }
    Ok(())
}

fn sanitize_filename(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Per-epoch `loss.csv`: `epoch,train_loss,val_mse` (validation column empty
/// when the dataset has no validation split).
pub fn write_loss_csv(dir: &Path, report: &TrainReport) -> Result<()> {
    let mut out = String::from("epoch,train_loss,val_mse\n");
    for (e, loss) in report.train_loss.iter().enumerate() {
        out.push_str(&format!("{e},{loss}"));
        out.push(',');
        if let Some(v) = report.val_mse.get(e) {
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    std::fs::write(dir.join("loss.csv"), out)?;
    Ok(())
}

// ── Run reports and aggregation ─────────────────────────────────────

/// Everything a finished run records about itself; `report.json` in the run
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_name: String,
    /// Hash of the run manifest with the seed field cleared, so seed
    /// replicates of one configuration share a hash.
    pub config_hash: String,
    pub seed: u64,
    pub model_kind: ModelKind,
    pub dataset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_ratio: Option<f64>,
    pub epochs: usize,
    pub best_epoch: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_val_mse: Option<f64>,
    pub wall_secs: f64,
    /// Metrics at the best-validation checkpoint.
    pub metrics: EvalResult,
    /// Metrics at the final epoch, for the last-epoch view.
    pub metrics_final: EvalResult,
}

/// Mean and (n-1) standard deviation of each metric over seed replicates of
/// one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub config_hash: String,
    pub runs: usize,
    /// Set when only one run backs the summary (std is then 0 by fiat).
    pub single_run: bool,
    pub metrics: Vec<MetricStat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub metric: String,
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn aggregate_runs(reports: &[RunReport]) -> Result<AggregateSummary> {
    if reports.is_empty() {
        return Err(Error::config("nothing to aggregate"));
    }
    let hash = &reports[0].config_hash;
    if reports.iter().any(|r| &r.config_hash != hash) {
        return Err(Error::config("aggregate over mixed configurations"));
    }
    let mut metrics = Vec::new();
    let fields: [(&str, fn(&EvalResult) -> Option<f64>); 4] = [
        ("train_mse", |e| e.train_mse),
        ("validation_mse", |e| e.validation_mse),
        ("interp_mse", |e| e.interp_mse),
        ("extrap_mse", |e| e.extrap_mse),
    ];
    for (name, get) in fields {
        let values: Vec<f64> = reports.iter().filter_map(|r| get(&r.metrics)).collect();
        if values.len() == reports.len() {
            let (mean, std) = mean_std(&values);
            metrics.push(MetricStat { metric: name.to_string(), mean, std });
        }
    }
    for &n in HORIZONS {
        let values: Vec<f64> = reports
            .iter()
            .filter_map(|r| r.metrics.horizons.iter().find(|h| h.n == n).map(|h| h.mse))
            .collect();
        if values.len() == reports.len() && !values.is_empty() {
            let (mean, std) = mean_std(&values);
            metrics.push(MetricStat { metric: format!("extrap_mse_n{n}"), mean, std });
        }
    }
    Ok(AggregateSummary {
        config_hash: hash.clone(),
        runs: reports.len(),
        single_run: reports.len() == 1,
        metrics,
    })
}

pub fn write_summary_csv(path: &Path, summary: &AggregateSummary) -> Result<()> {
    let mut out = String::from("metric,mean,std,runs\n");
    for m in &summary.metrics {
        out.push_str(&format!("{},{},{},{}\n", m.metric, m.mean, m.std, summary.runs));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Side-by-side comparison across run groups: rows are
/// (dataset, blocks/drop) sorted, columns are models, with mean +- std of
/// interpolation and extrapolation MSE.
pub fn compare_table(reports: &[RunReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::config("no runs to compare"));
    }
    let dataset = &reports[0].dataset;
    if reports.iter().any(|r| &r.dataset != dataset && r.dataset != reports[0].dataset) {
        // Different datasets are allowed; they become separate rows.
    }
    use std::collections::BTreeMap;
    type Key = (String, Option<usize>, String);
    let mut groups: BTreeMap<Key, Vec<&RunReport>> = BTreeMap::new();
    for r in reports {
        let model = format!("{:?}", r.model_kind).to_lowercase();
        groups.entry((r.dataset.clone(), r.blocks, model)).or_default().push(r);
    }
    let mut out = String::from("dataset,blocks,model,interp_mean,interp_std,extrap_mean,extrap_std,seeds\n");
    for ((dataset, blocks, model), rs) in groups {
        let interp: Vec<f64> = rs.iter().filter_map(|r| r.metrics.interp_mse).collect();
        let extrap: Vec<f64> = rs.iter().filter_map(|r| r.metrics.extrap_mse).collect();
        let fmt = |vals: &[f64]| {
            if vals.is_empty() {
                (String::from(""), String::from(""))
            } else {
                let (mean, std) = mean_std(vals);
                (format!("{mean:.6}"), format!("{std:.6}"))
            }
        };
        let (im, is) = fmt(&interp);
        let (em, es) = fmt(&extrap);
        let blocks_s = blocks.map(|b| b.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{dataset},{blocks_s},{model},{im},{is},{em},{es},{}\n",
            rs.len()
        ));
    }
    Ok(out)
}

/// Stable FNV-1a hex digest over the canonical JSON of a manifest. Used to
/// detect when runs share a configuration.
pub fn config_hash(canonical_json: &str) -> String {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for b in canonical_json.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    format!("{hash:016x}")
}
