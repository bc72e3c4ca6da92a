//! CSV ingestion and the masking protocols that turn a raw series into a
//! role-annotated dataset: fixed-length missing blocks for the periodic
//! task and random cell drops for the long-term imputation task.
//!
//! CSV format: header `timestamp,<f1>,...,<fM>`, ISO-8601 or integer-index
//! timestamps, UTF-8, empty cell = missing value.

use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::coords::{CoordinateConfig, CoordinateSet, TimeAxis};
use crate::dataset::{Role, SignalDataset, UNOBSERVED_CODE};
use crate::error::{Error, Result};
use crate::rng::Rng;

// ── Raw series ──────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct RawSeries {
    pub axis: TimeAxis,
    /// N x M, row-major; NaN marks a missing observation.
    pub values: Vec<f64>,
    pub feature_names: Vec<String>,
}

impl RawSeries {
    pub fn n(&self) -> usize {
        self.axis.len()
    }

    pub fn m(&self) -> usize {
        self.feature_names.len()
    }
}

fn parse_stamp(text: &str) -> Option<NaiveDateTime> {
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"] {
        if let Ok(s) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(s);
        }
    }
    chrono::NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

pub fn load_csv(path: &Path) -> Result<RawSeries> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<RawSeries> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    let mut cols = header.split(',');
    let first = cols.next().unwrap_or("").trim();
    if !first.eq_ignore_ascii_case("timestamp") && !first.eq_ignore_ascii_case("t") {
        return Err(Error::Parse {
            line: 1,
            msg: format!("first header column must be 'timestamp', got '{first}'"),
        });
    }
    let feature_names: Vec<String> = cols.map(|c| c.trim().to_string()).collect();
    if feature_names.is_empty() {
        return Err(Error::Parse { line: 1, msg: "no feature columns".into() });
    }
    let m = feature_names.len();

    let mut numeric: Vec<f64> = Vec::new();
    let mut stamps: Vec<NaiveDateTime> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut use_stamps: Option<bool> = None;

    for (i, raw_line) in lines {
        let line_no = i + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let ts_text = fields.next().unwrap_or("").trim();
        if use_stamps.is_none() {
            if ts_text.parse::<f64>().is_ok() {
                use_stamps = Some(false);
            } else if parse_stamp(ts_text).is_some() {
                use_stamps = Some(true);
            } else {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unparseable timestamp '{ts_text}'"),
                });
            }
        }
        if use_stamps == Some(true) {
            let stamp = parse_stamp(ts_text).ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("unparseable timestamp '{ts_text}'"),
            })?;
            if let Some(prev) = stamps.last() {
                if stamp <= *prev {
                    return Err(Error::Order(format!(
                        "timestamp at line {line_no} is not strictly increasing"
                    )));
                }
            }
            stamps.push(stamp);
        } else {
            let t: f64 = ts_text.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("unparseable index '{ts_text}'"),
            })?;
            if let Some(prev) = numeric.last() {
                if t <= *prev {
                    return Err(Error::Order(format!(
                        "timestamp at line {line_no} is not strictly increasing"
                    )));
                }
            }
            numeric.push(t);
        }
        let mut count = 0;
        for field in fields {
            let cell = field.trim();
            if cell.is_empty() {
                values.push(f64::NAN);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("unparseable value '{cell}'"),
                })?;
                values.push(v);
            }
            count += 1;
        }
        if count != m {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {m} value columns, got {count}"),
            });
        }
    }
    let axis = if use_stamps == Some(true) {
        TimeAxis::Stamps(stamps)
    } else {
        TimeAxis::Index(numeric)
    };
    if axis.is_empty() {
        return Err(Error::degenerate("csv contains no data rows"));
    }
    Ok(RawSeries { axis, values, feature_names })
}

/// Serialize a dataset (or raw series) back to the shared CSV format.
pub fn write_csv(
    path: &Path,
    axis: &TimeAxis,
    values: &[f64],
    feature_names: &[String],
) -> Result<()> {
    let m = feature_names.len();
    let n = axis.len();
    let mut out = String::new();
    out.push_str("timestamp");
    for f in feature_names {
        out.push(',');
        out.push_str(f);
    }
    out.push('\n');
    let stamps = match axis {
        TimeAxis::Stamps(s) => Some(s),
        _ => None,
    };
    let scalar = axis.scalar_axis();
    for i in 0..n {
        match stamps {
            Some(s) => out.push_str(&s[i].format("%Y-%m-%d %H:%M:%S").to_string()),
            None => out.push_str(&format!("{}", scalar[i])),
        }
        for j in 0..m {
            out.push(',');
            let v = values[i * m + j];
            if v.is_finite() {
                out.push_str(&format!("{v}"));
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Role-code CSV with the same shape as the data: 0 train, 1 validation,
/// 2 interp-test, 3 extrap-test, 4 unobserved.
pub fn write_role_csv(path: &Path, ds: &SignalDataset) -> Result<()> {
    let mut out = String::new();
    out.push_str("timestamp");
    for f in &ds.feature_names {
        out.push(',');
        out.push_str(f);
    }
    out.push('\n');
    let scalar = ds.axis.scalar_axis();
    for i in 0..ds.n() {
        out.push_str(&format!("{}", scalar[i]));
        for j in 0..ds.m() {
            let k = ds.idx(i, j);
            let code = if ds.observed[k] { ds.roles[k].code() } else { UNOBSERVED_CODE };
            out.push_str(&format!(",{code}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

// ── Block protocol ──────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockRole {
    Train,
    InterpTest,
    ExtrapTest,
    Validation,
}

/// Partition of the series prefix into fixed-length contiguous blocks.
/// Extrapolation blocks occupy the suffix and exactly one block is held out
/// for validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub block_length: usize,
    pub blocks: Vec<BlockRole>,
}

impl BlockLayout {
    /// 12 blocks of 500 points: interpolation test blocks at positions
    /// 3, 5, 7, the validation block at 8, extrapolation test blocks 9-11.
    pub fn default_12() -> Self {
        use BlockRole::*;
        BlockLayout {
            block_length: 500,
            blocks: vec![
                Train, Train, Train, InterpTest, Train, InterpTest, Train, InterpTest,
                Validation, ExtrapTest, ExtrapTest, ExtrapTest,
            ],
        }
    }

    pub fn with_block_length(mut self, len: usize) -> Self {
        self.block_length = len;
        self
    }

    pub fn total_points(&self) -> usize {
        self.block_length * self.blocks.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_length == 0 || self.blocks.is_empty() {
            return Err(Error::config("block layout is empty"));
        }
        let validations = self.blocks.iter().filter(|b| **b == BlockRole::Validation).count();
        if validations != 1 {
            return Err(Error::config(format!(
                "layout needs exactly one validation block, got {validations}"
            )));
        }
        // Extrapolation blocks must form the suffix.
        let first_extrap = self.blocks.iter().position(|b| *b == BlockRole::ExtrapTest);
        if let Some(first) = first_extrap {
            if self.blocks[first..].iter().any(|b| *b != BlockRole::ExtrapTest) {
                return Err(Error::config(
                    "extrapolation blocks must occupy the suffix of the layout",
                ));
            }
        }
        Ok(())
    }
}

/// Assign roles per the block layout. `active_blocks = k` keeps the first k
/// interpolation test blocks and the last k extrapolation test blocks (so
/// test blocks stay beyond the training range); the remaining test blocks
/// revert to the train role.
pub fn apply_block_protocol(
    series: &RawSeries,
    layout: &BlockLayout,
    active_blocks: usize,
    coord_cfg: &CoordinateConfig,
) -> Result<SignalDataset> {
    layout.validate()?;
    let needed = layout.total_points();
    if series.n() < needed {
        return Err(Error::config(format!(
            "series has {} points but the layout needs {needed}",
            series.n()
        )));
    }
    let interp_total = layout.blocks.iter().filter(|b| **b == BlockRole::InterpTest).count();
    let extrap_total = layout.blocks.iter().filter(|b| **b == BlockRole::ExtrapTest).count();
    if active_blocks == 0 || active_blocks > interp_total || active_blocks > extrap_total {
        return Err(Error::config(format!(
            "active block count {active_blocks} outside 1..={} interp / {} extrap",
            interp_total, extrap_total
        )));
    }

    let m = series.m();
    let n = needed;
    let mut roles = vec![Role::Train; n * m];
    let mut interp_seen = 0usize;
    let mut extrap_seen = 0usize;
    for (b, kind) in layout.blocks.iter().enumerate() {
        let role = match kind {
            BlockRole::Train => Role::Train,
            BlockRole::Validation => Role::Validation,
            BlockRole::InterpTest => {
                interp_seen += 1;
                if interp_seen <= active_blocks {
                    Role::TestInterp
                } else {
                    Role::Train
                }
            }
            BlockRole::ExtrapTest => {
                extrap_seen += 1;
                // Last k extrapolation blocks stay active.
                if extrap_seen > extrap_total - active_blocks {
                    Role::TestExtrap
                } else {
                    Role::Train
                }
            }
        };
        for i in b * layout.block_length..(b + 1) * layout.block_length {
            for j in 0..m {
                roles[i * m + j] = role;
            }
        }
    }

    let axis = truncate_axis(&series.axis, n);
    let values = series.values[..n * m].to_vec();
    let observed: Vec<bool> = values.iter().map(|v| v.is_finite()).collect();
    let train_rows: Vec<bool> = (0..n)
        .map(|i| (0..m).any(|j| roles[i * m + j] == Role::Train && observed[i * m + j]))
        .collect();
    let coords = CoordinateSet::build(&axis, m, coord_cfg, Some(&train_rows))?;
    let ds = SignalDataset {
        name: "block-protocol".into(),
        coords,
        axis,
        targets: values,
        roles,
        observed,
        feature_names: series.feature_names.clone(),
    };
    ds.validate()?;
    Ok(ds)
}

fn truncate_axis(axis: &TimeAxis, n: usize) -> TimeAxis {
    match axis {
        TimeAxis::Index(v) => TimeAxis::Index(v[..n].to_vec()),
        TimeAxis::Stamps(v) => TimeAxis::Stamps(v[..n].to_vec()),
        TimeAxis::Spatial { data, dim } => TimeAxis::Spatial {
            data: data[..n * dim].to_vec(),
            dim: *dim,
        },
    }
}

// ── Drop-ratio protocol ─────────────────────────────────────────────

/// Move a seeded uniform sample of `ratio * observed` cells to the
/// interp-test role, then hold out a seeded 10% of the remaining train
/// cells for validation.
pub fn apply_drop_ratio(
    series: &RawSeries,
    ratio: f64,
    seed: u64,
    coord_cfg: &CoordinateConfig,
) -> Result<SignalDataset> {
    if !(0.0..1.0).contains(&ratio) || ratio == 0.0 {
        return Err(Error::config(format!("drop ratio must be in (0,1), got {ratio}")));
    }
    let n = series.n();
    let m = series.m();
    let observed: Vec<bool> = series.values.iter().map(|v| v.is_finite()).collect();
    let observed_cells: Vec<usize> = (0..n * m).filter(|&k| observed[k]).collect();
    let drop_count = ((observed_cells.len() as f64) * ratio).round() as usize;
    if drop_count >= observed_cells.len() {
        return Err(Error::config("drop ratio leaves no training cells"));
    }

    let mut roles = vec![Role::Train; n * m];
    let mut rng = Rng::new(seed).derive("drop-mask");
    let dropped = rng.sample_indices(observed_cells.len(), drop_count);
    for &pick in &dropped {
        roles[observed_cells[pick]] = Role::TestInterp;
    }
    // Validation holdout: 10% of what remains in the train role.
    let train_cells: Vec<usize> = observed_cells
        .iter()
        .copied()
        .filter(|&k| roles[k] == Role::Train)
        .collect();
    let val_count = ((train_cells.len() as f64) * 0.10).round() as usize;
    if val_count > 0 && val_count < train_cells.len() {
        let mut vrng = Rng::new(seed).derive("drop-validation");
        for pick in vrng.sample_indices(train_cells.len(), val_count) {
            roles[train_cells[pick]] = Role::Validation;
        }
    }
    if !roles
        .iter()
        .zip(&observed)
        .any(|(r, o)| *r == Role::Train && *o)
    {
        return Err(Error::config("drop ratio leaves no training cells"));
    }

    let train_rows: Vec<bool> = (0..n)
        .map(|i| (0..m).any(|j| roles[i * m + j] == Role::Train && observed[i * m + j]))
        .collect();
    let coords = CoordinateSet::build(&series.axis, m, coord_cfg, Some(&train_rows))?;
    let ds = SignalDataset {
        name: "drop-ratio".into(),
        coords,
        axis: series.axis.clone(),
        targets: series.values.clone(),
        roles,
        observed,
        feature_names: series.feature_names.clone(),
    };
    ds.validate()?;
    Ok(ds)
}

// ── Normalization ───────────────────────────────────────────────────

/// Per-feature z-score statistics measured on train-role cells only, so
/// test cells never leak into the transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn fit(ds: &SignalDataset) -> Result<Normalizer> {
        let m = ds.m();
        let mut mean = vec![0.0; m];
        let mut std = vec![0.0; m];
        for j in 0..m {
            let mut xs = Vec::new();
            for i in 0..ds.n() {
                let k = ds.idx(i, j);
                if ds.observed[k] && ds.roles[k] == Role::Train {
                    xs.push(ds.targets[k]);
                }
            }
            if xs.len() < 2 {
                return Err(Error::degenerate(format!(
                    "feature {j} has fewer than two observed train cells"
                )));
            }
            let mu = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64;
            if var == 0.0 {
                return Err(Error::degenerate(format!(
                    "feature {j} has zero variance on the training cells"
                )));
            }
            mean[j] = mu;
            std[j] = var.sqrt();
        }
        Ok(Normalizer { mean, std })
    }

    /// Normalize the dataset's targets in place.
    pub fn apply(&self, ds: &mut SignalDataset) {
        let m = ds.m();
        for i in 0..ds.n() {
            for j in 0..m {
                let k = i * m + j;
                if ds.targets[k].is_finite() {
                    ds.targets[k] = (ds.targets[k] - self.mean[j]) / self.std[j];
                }
            }
        }
    }

    pub fn normalize_value(&self, j: usize, v: f64) -> f64 {
        (v - self.mean[j]) / self.std[j]
    }

    pub fn inverse_value(&self, j: usize, v: f64) -> f64 {
        v * self.std[j] + self.mean[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_csv(n: usize, m: usize) -> String {
        let mut text = String::from("timestamp");
        for j in 0..m {
            text.push_str(&format!(",f{j}"));
        }
        text.push('\n');
        for i in 0..n {
            text.push_str(&format!("{i}"));
            for j in 0..m {
                text.push_str(&format!(",{}", (i * m + j) as f64 * 0.1));
            }
            text.push('\n');
        }
        text
    }

    #[test]
    fn parse_basic_shape() {
        let rs = parse_csv(&series_csv(3, 2)).unwrap();
        assert_eq!(rs.n(), 3);
        assert_eq!(rs.m(), 2);
        assert_eq!(rs.feature_names, vec!["f0", "f1"]);
    }

    #[test]
    fn empty_cell_becomes_nan() {
        let text = "timestamp,a,b\n0,1.0,\n1,,2.0\n";
        let rs = parse_csv(text).unwrap();
        assert!(rs.values[1].is_nan());
        assert!(rs.values[2].is_nan());
        assert_eq!(rs.values[3], 2.0);
    }

    #[test]
    fn duplicate_timestamp_is_order_error() {
        let text = "timestamp,a\n0,1.0\n0,2.0\n";
        assert!(matches!(parse_csv(text), Err(Error::Order(_))));
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let text = "timestamp,a\n0,1.0\n1,zzz\n";
        match parse_csv(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn iso_timestamps_parse() {
        let text = "timestamp,a\n2012-01-01 00:00:00,1.0\n2012-01-01 01:00:00,2.0\n";
        let rs = parse_csv(text).unwrap();
        assert!(matches!(rs.axis, TimeAxis::Stamps(_)));
    }

    fn block_series(n: usize) -> RawSeries {
        parse_csv(&series_csv(n, 1)).unwrap()
    }

    #[test]
    fn block_protocol_counts() {
        let layout = BlockLayout::default_12().with_block_length(50);
        let series = block_series(600);
        for k in 1..=3 {
            let ds = apply_block_protocol(&series, &layout, k, &CoordinateConfig::default()).unwrap();
            assert_eq!(ds.n(), 600);
            assert_eq!(ds.count_role(Role::TestInterp), 50 * k);
            assert_eq!(ds.count_role(Role::TestExtrap), 50 * k);
            assert_eq!(ds.count_role(Role::Validation), 50);
            assert_eq!(
                ds.count_role(Role::Train),
                600 - 50 * k - 50 * k - 50
            );
        }
    }

    #[test]
    fn active_extrap_blocks_are_the_suffix() {
        let layout = BlockLayout::default_12().with_block_length(10);
        let series = block_series(120);
        let ds = apply_block_protocol(&series, &layout, 1, &CoordinateConfig::default()).unwrap();
        // With one active block, rows 110..120 are extrapolation test and
        // everything between the last train row and them is train again.
        for i in 0..110 {
            assert_ne!(ds.role(i, 0), Role::TestExtrap, "row {i}");
        }
        for i in 110..120 {
            assert_eq!(ds.role(i, 0), Role::TestExtrap);
        }
    }

    #[test]
    fn validation_block_never_trains() {
        let layout = BlockLayout::default_12().with_block_length(10);
        let series = block_series(120);
        for k in 1..=3 {
            let ds = apply_block_protocol(&series, &layout, k, &CoordinateConfig::default()).unwrap();
            for i in 80..90 {
                assert_eq!(ds.role(i, 0), Role::Validation);
            }
        }
    }

    #[test]
    fn short_series_is_config_error() {
        let layout = BlockLayout::default_12();
        let series = block_series(100);
        assert!(matches!(
            apply_block_protocol(&series, &layout, 1, &CoordinateConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn drop_ratio_exact_counts_and_determinism() {
        let series = parse_csv(&series_csv(100, 7)).unwrap();
        let a = apply_drop_ratio(&series, 0.5, 11, &CoordinateConfig::default()).unwrap();
        assert_eq!(a.count_role(Role::TestInterp), 350);
        // validation = 10% of the 350 remaining train cells
        assert_eq!(a.count_role(Role::Validation), 35);
        assert_eq!(a.count_role(Role::Train), 315);
        let b = apply_drop_ratio(&series, 0.5, 11, &CoordinateConfig::default()).unwrap();
        assert_eq!(a.roles, b.roles);
        let c = apply_drop_ratio(&series, 0.5, 12, &CoordinateConfig::default()).unwrap();
        assert_ne!(a.roles, c.roles);
    }

    #[test]
    fn drop_ratio_rejects_degenerate_ratios() {
        let series = parse_csv(&series_csv(10, 1)).unwrap();
        assert!(apply_drop_ratio(&series, 0.0, 0, &CoordinateConfig::default()).is_err());
        assert!(apply_drop_ratio(&series, 1.0, 0, &CoordinateConfig::default()).is_err());
    }

    #[test]
    fn missing_cells_stay_unobserved() {
        let text = "timestamp,a,b\n0,1.0,\n1,2.0,3.0\n2,,4.0\n3,5.0,6.0\n4,1.5,2.5\n";
        let series = parse_csv(text).unwrap();
        let ds = apply_drop_ratio(&series, 0.3, 0, &CoordinateConfig::default()).unwrap();
        assert!(!ds.is_observed(0, 1));
        assert!(!ds.is_observed(2, 0));
        // Unobserved cells never carry a test role assignment that counts.
        assert_eq!(
            ds.count_role(Role::TestInterp)
                + ds.count_role(Role::Train)
                + ds.count_role(Role::Validation),
            8
        );
    }

    #[test]
    fn normalizer_round_trip_and_train_only_stats() {
        let series = parse_csv(&series_csv(50, 2)).unwrap();
        let mut ds = apply_drop_ratio(&series, 0.3, 5, &CoordinateConfig::default()).unwrap();
        let norm = Normalizer::fit(&ds).unwrap();
        let before = ds.targets.clone();
        norm.apply(&mut ds);
        for j in 0..2 {
            for i in 0..50 {
                let k = ds.idx(i, j);
                let back = norm.inverse_value(j, ds.targets[k]);
                assert!((back - before[k]).abs() < 1e-10);
            }
        }
        // Train-cell mean is zero after normalization.
        for j in 0..2 {
            let mut acc = 0.0;
            let mut cnt = 0;
            for i in 0..50 {
                let k = ds.idx(i, j);
                if ds.roles[k] == Role::Train && ds.observed[k] {
                    acc += ds.targets[k];
                    cnt += 1;
                }
            }
            assert!((acc / cnt as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn normalizer_uses_train_stats_not_full_series() {
        // Craft a series whose test cells have a shifted mean; fitting on
        // the full series would give different statistics.
        let mut text = String::from("timestamp,a\n");
        for i in 0..40 {
            // Alternate so both train and test regions see variance.
            let v = if i % 2 == 0 { 1.0 } else { 2.0 };
            text.push_str(&format!("{i},{v}\n"));
        }
        let series = parse_csv(&text).unwrap();
        let mut ds = apply_drop_ratio(&series, 0.4, 3, &CoordinateConfig::default()).unwrap();
        // Shift every test target by +100 (leakage bait).
        for k in 0..ds.targets.len() {
            if ds.roles[k] == Role::TestInterp {
                ds.targets[k] += 100.0;
            }
        }
        let norm = Normalizer::fit(&ds).unwrap();
        // Stats must reflect only the 1/2 alternation, not the +100 shift.
        assert!(norm.mean[0] < 3.0, "mean {}", norm.mean[0]);
        assert!(norm.std[0] < 2.0, "std {}", norm.std[0]);
    }

    #[test]
    fn zero_variance_feature_is_degenerate() {
        let mut text = String::from("timestamp,a\n");
        for i in 0..20 {
            text.push_str(&format!("{i},5.0\n"));
        }
        let series = parse_csv(&text).unwrap();
        let ds = apply_drop_ratio(&series, 0.2, 0, &CoordinateConfig::default()).unwrap();
        assert!(matches!(Normalizer::fit(&ds), Err(Error::Degenerate(_))));
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let dir = std::env::temp_dir().join("nert-ingest-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.csv");
        let rs = parse_csv(&series_csv(10, 3)).unwrap();
        write_csv(&path, &rs.axis, &rs.values, &rs.feature_names).unwrap();
        let back = load_csv(&path).unwrap();
        assert_eq!(back.values, rs.values);
        assert_eq!(back.feature_names, rs.feature_names);
    }
}
