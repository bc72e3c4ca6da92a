//! Spatio-temporal coordinate construction: min-max scaled temporal (or
//! spatial) components plus one-hot feature coordinates.
//!
//! Scaling ranges are always measured on the training region only, so test
//! coordinates may land outside `[smin, smax]`; extrapolation depends on
//! exactly that.

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ── Primitive ops ───────────────────────────────────────────────────

/// One-hot feature coordinate: a single 1 at position `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCoord {
    pub onehot: Vec<f64>,
    pub index: usize,
}

pub fn onehot(j: usize, m: usize) -> Result<FeatureCoord> {
    if j >= m {
        return Err(Error::Index(format!("feature index {j} out of {m}")));
    }
    let mut v = vec![0.0; m];
    v[j] = 1.0;
    Ok(FeatureCoord { onehot: v, index: j })
}

/// Linear map of `[vmin, vmax]` onto `[smin, smax]`; defined (by linearity)
/// for values outside the source range.
pub fn minmax_scale(v: f64, vmin: f64, vmax: f64, smin: f64, smax: f64) -> Result<f64> {
    if vmax <= vmin {
        return Err(Error::degenerate(format!(
            "minmax range [{vmin}, {vmax}] is empty"
        )));
    }
    Ok(smin + (v - vmin) / (vmax - vmin) * (smax - smin))
}

pub fn minmax_unscale(s: f64, vmin: f64, vmax: f64, smin: f64, smax: f64) -> Result<f64> {
    if smax <= smin {
        return Err(Error::degenerate(format!(
            "minmax target range [{smin}, {smax}] is empty"
        )));
    }
    Ok(vmin + (s - smin) / (smax - smin) * (vmax - vmin))
}

// ── Calendar decomposition ──────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalendarField {
    Year,
    Month,
    Day,
    Weekday,
    Hour,
    Minute,
    YearFraction,
    WeekOfYear,
}

impl CalendarField {
    pub fn extract(self, stamp: NaiveDateTime) -> f64 {
        match self {
            CalendarField::Year => stamp.year() as f64,
            CalendarField::Month => stamp.month() as f64,
            CalendarField::Day => stamp.day() as f64,
            CalendarField::Weekday => stamp.weekday().num_days_from_monday() as f64,
            CalendarField::Hour => stamp.hour() as f64,
            CalendarField::Minute => stamp.minute() as f64,
            CalendarField::YearFraction => {
                let days_in_year = if stamp.date().leap_year() { 366.0 } else { 365.0 };
                let day_fraction = (stamp.num_seconds_from_midnight() as f64) / 86_400.0;
                ((stamp.ordinal() - 1) as f64 + day_fraction) / days_in_year
            }
            CalendarField::WeekOfYear => stamp.iso_week().week() as f64,
        }
    }
}

/// Default field sets; the paper never enumerates them, so these are the
/// documented defaults for hourly and weekly data.
pub fn default_hourly_fields() -> Vec<CalendarField> {
    vec![
        CalendarField::Month,
        CalendarField::Day,
        CalendarField::Weekday,
        CalendarField::Hour,
    ]
}

pub fn default_weekly_fields() -> Vec<CalendarField> {
    vec![CalendarField::YearFraction, CalendarField::WeekOfYear]
}

/// A temporal coordinate vector of length `D_ct`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalCoord {
    pub components: Vec<f64>,
}

// ── Coordinate sets ─────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoordMode {
    #[default]
    Scalar,
    Calendar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateConfig {
    pub mode: CoordMode,
    #[serde(default)]
    pub fields: Vec<CalendarField>,
    pub smin: f64,
    pub smax: f64,
}

impl Default for CoordinateConfig {
    fn default() -> Self {
        CoordinateConfig {
            mode: CoordMode::Scalar,
            fields: Vec::new(),
            smin: 0.0,
            smax: 1.0,
        }
    }
}

/// Observed raw range of one temporal component over the training region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentScale {
    pub vmin: f64,
    pub vmax: f64,
}

/// The raw axis a coordinate set is built from.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeAxis {
    /// Plain numeric axis (integer index or 1-D spatial coordinate).
    Index(Vec<f64>),
    /// Calendar timestamps.
    Stamps(Vec<NaiveDateTime>),
    /// Raw D-dimensional coordinates, row-major (e.g. (x, y) collocation
    /// points of a 2-D PDE).
    Spatial { data: Vec<f64>, dim: usize },
}

impl TimeAxis {
    pub fn len(&self) -> usize {
        match self {
            TimeAxis::Index(v) => v.len(),
            TimeAxis::Stamps(v) => v.len(),
            TimeAxis::Spatial { data, dim } => {
                if *dim == 0 {
                    0
                } else {
                    data.len() / dim
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Representative scalar axis for export and horizon slicing: the first
    /// raw component (or the row index for calendar stamps).
    pub fn scalar_axis(&self) -> Vec<f64> {
        match self {
            TimeAxis::Index(v) => v.clone(),
            TimeAxis::Stamps(v) => (0..v.len()).map(|i| i as f64).collect(),
            TimeAxis::Spatial { data, dim } => data.iter().step_by(*dim).copied().collect(),
        }
    }

    /// Expand into the raw N x D component matrix the scaler operates on.
    fn raw_components(&self, cfg: &CoordinateConfig) -> Result<(Vec<f64>, usize)> {
        match (self, cfg.mode) {
            (TimeAxis::Index(v), CoordMode::Scalar) => Ok((v.clone(), 1)),
            (TimeAxis::Index(_), CoordMode::Calendar) => Err(Error::config(
                "calendar coordinates need timestamped data, got a numeric index",
            )),
            (TimeAxis::Stamps(v), CoordMode::Scalar) => {
                let origin = v[0];
                Ok((
                    v.iter()
                        .map(|s| (*s - origin).num_seconds() as f64)
                        .collect(),
                    1,
                ))
            }
            (TimeAxis::Stamps(v), CoordMode::Calendar) => {
                if cfg.fields.is_empty() {
                    return Err(Error::config("calendar mode requires at least one field"));
                }
                let d = cfg.fields.len();
                let mut out = Vec::with_capacity(v.len() * d);
                for s in v {
                    for f in &cfg.fields {
                        out.push(f.extract(*s));
                    }
                }
                Ok((out, d))
            }
            (TimeAxis::Spatial { data, dim }, CoordMode::Scalar) => Ok((data.clone(), *dim)),
            (TimeAxis::Spatial { .. }, CoordMode::Calendar) => Err(Error::config(
                "calendar coordinates are undefined for spatial axes",
            )),
        }
    }
}

/// Scaled temporal coordinates plus one-hot feature coordinates and the
/// metadata needed to map any raw input deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateSet {
    pub n: usize,
    pub m: usize,
    pub d_ct: usize,
    temporal: Vec<f64>, // N x D, scaled
    onehots: Vec<f64>,  // M x M identity
    pub scales: Vec<ComponentScale>,
    pub config: CoordinateConfig,
}

impl CoordinateSet {
    /// Build from a raw axis. `train_rows`, when given, restricts the
    /// min/max measurement to training rows; test rows then scale outside
    /// `[smin, smax]` by linearity.
    pub fn build(
        axis: &TimeAxis,
        m: usize,
        cfg: &CoordinateConfig,
        train_rows: Option<&[bool]>,
    ) -> Result<Self> {
        if axis.is_empty() {
            return Err(Error::degenerate("cannot build coordinates from an empty axis"));
        }
        if m == 0 {
            return Err(Error::degenerate("feature count must be at least 1"));
        }
        let n = axis.len();
        if let Some(mask) = train_rows {
            if mask.len() != n {
                return Err(Error::dim("train row mask length mismatch"));
            }
            if !mask.iter().any(|&t| t) {
                return Err(Error::degenerate("no training rows to compute scaling from"));
            }
        }
        let (raw, d) = axis.raw_components(cfg)?;
        let mut scales = Vec::with_capacity(d);
        for c in 0..d {
            let mut vmin = f64::INFINITY;
            let mut vmax = f64::NEG_INFINITY;
            for i in 0..n {
                if train_rows.map_or(true, |mask| mask[i]) {
                    let v = raw[i * d + c];
                    vmin = vmin.min(v);
                    vmax = vmax.max(v);
                }
            }
            if vmax <= vmin {
                return Err(Error::degenerate(format!(
                    "temporal component {c} is constant over the training range"
                )));
            }
            scales.push(ComponentScale { vmin, vmax });
        }
        let mut temporal = Vec::with_capacity(n * d);
        for i in 0..n {
            for c in 0..d {
                let s = &scales[c];
                temporal.push(minmax_scale(raw[i * d + c], s.vmin, s.vmax, cfg.smin, cfg.smax)?);
            }
        }
        let mut onehots = vec![0.0; m * m];
        for j in 0..m {
            onehots[j * m + j] = 1.0;
        }
        Ok(CoordinateSet {
            n,
            m,
            d_ct: d,
            temporal,
            onehots,
            scales,
            config: cfg.clone(),
        })
    }

    pub fn temporal_row(&self, i: usize) -> &[f64] {
        &self.temporal[i * self.d_ct..(i + 1) * self.d_ct]
    }

    pub fn onehot_row(&self, j: usize) -> &[f64] {
        &self.onehots[j * self.m..(j + 1) * self.m]
    }

    /// Map raw component values through the stored scaling. Out-of-range
    /// inputs extrapolate linearly.
    pub fn map_raw(&self, raw: &[f64]) -> Result<TemporalCoord> {
        if raw.len() != self.d_ct {
            return Err(Error::dim(format!(
                "expected {} raw components, got {}",
                self.d_ct,
                raw.len()
            )));
        }
        let mut components = Vec::with_capacity(self.d_ct);
        for (c, v) in raw.iter().enumerate() {
            let s = &self.scales[c];
            components.push(minmax_scale(*v, s.vmin, s.vmax, self.config.smin, self.config.smax)?);
        }
        Ok(TemporalCoord { components })
    }

    /// Map a calendar timestamp (calendar mode only).
    pub fn map_stamp(&self, stamp: NaiveDateTime) -> Result<TemporalCoord> {
        if self.config.mode != CoordMode::Calendar {
            return Err(Error::config("map_stamp requires calendar mode"));
        }
        let raw: Vec<f64> = self.config.fields.iter().map(|f| f.extract(stamp)).collect();
        self.map_raw(&raw)
    }
}

/// Scale a timestamp into a temporal coordinate using training-range
/// min/max per calendar field.
pub fn calendar_coord(
    stamp: NaiveDateTime,
    fields: &[CalendarField],
    scales: &[ComponentScale],
    smin: f64,
    smax: f64,
) -> Result<TemporalCoord> {
    if fields.len() != scales.len() {
        return Err(Error::dim("fields and scales length mismatch"));
    }
    let mut components = Vec::with_capacity(fields.len());
    for (f, s) in fields.iter().zip(scales) {
        components.push(minmax_scale(f.extract(stamp), s.vmin, s.vmax, smin, smax)?);
    }
    Ok(TemporalCoord { components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    #[test]
    fn onehot_basic() {
        assert_eq!(onehot(0, 3).unwrap().onehot, vec![1.0, 0.0, 0.0]);
        assert_eq!(onehot(2, 3).unwrap().onehot, vec![0.0, 0.0, 1.0]);
        assert_eq!(onehot(0, 1).unwrap().onehot, vec![1.0]);
        assert!(onehot(3, 3).is_err());
        // sum is always one
        for j in 0..5 {
            let s: f64 = onehot(j, 5).unwrap().onehot.iter().sum();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn minmax_endpoints_midpoint_extrapolation() {
        assert_eq!(minmax_scale(5.0, 0.0, 10.0, 0.0, 1.0).unwrap(), 0.5);
        assert_eq!(minmax_scale(0.0, 0.0, 10.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(minmax_scale(10.0, 0.0, 10.0, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(minmax_scale(15.0, 0.0, 10.0, 0.0, 1.0).unwrap(), 1.5);
        assert!(minmax_scale(1.0, 3.0, 3.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn minmax_round_trip() {
        for i in 0..100 {
            let v = -7.0 + i as f64 * 0.37;
            let s = minmax_scale(v, -5.0, 12.0, 0.0, 100.0).unwrap();
            let back = minmax_unscale(s, -5.0, 12.0, 0.0, 100.0).unwrap();
            assert!((back - v).abs() < 1e-12);
        }
    }

    #[test]
    fn calendar_single_hour_field() {
        let fields = [CalendarField::Hour];
        let scales = [ComponentScale { vmin: 0.0, vmax: 23.0 }];
        let stamp = NaiveDate::from_ymd_opt(2020, 6, 1)
            .unwrap()
            .and_hms_opt(12, 0, 0)
            .unwrap();
        let c = calendar_coord(stamp, &fields, &scales, 0.0, 1.0).unwrap();
        assert!((c.components[0] - 12.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn calendar_three_fields_gives_length_three() {
        let fields = [CalendarField::Month, CalendarField::Day, CalendarField::Hour];
        let scales = [
            ComponentScale { vmin: 1.0, vmax: 12.0 },
            ComponentScale { vmin: 1.0, vmax: 31.0 },
            ComponentScale { vmin: 0.0, vmax: 23.0 },
        ];
        let stamp = NaiveDate::from_ymd_opt(2021, 3, 15)
            .unwrap()
            .and_hms_opt(8, 0, 0)
            .unwrap();
        let c = calendar_coord(stamp, &fields, &scales, 0.0, 1.0).unwrap();
        assert_eq!(c.components.len(), 3);
    }

    #[test]
    fn unseen_future_year_scales_above_smax() {
        let fields = [CalendarField::Year];
        let scales = [ComponentScale { vmin: 2012.0, vmax: 2014.0 }];
        let stamp = NaiveDate::from_ymd_opt(2016, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        let c = calendar_coord(stamp, &fields, &scales, 0.0, 1.0).unwrap();
        assert!(c.components[0] > 1.0);
    }

    #[test]
    fn build_scalar_evenly_spaced() {
        let axis = TimeAxis::Index(vec![0.0, 1.0, 2.0]);
        let cfg = CoordinateConfig::default();
        let cs = CoordinateSet::build(&axis, 1, &cfg, None).unwrap();
        assert_eq!(cs.temporal_row(0), &[0.0]);
        assert_eq!(cs.temporal_row(1), &[0.5]);
        assert_eq!(cs.temporal_row(2), &[1.0]);
    }

    #[test]
    fn build_seven_features() {
        let axis = TimeAxis::Index(vec![0.0, 1.0]);
        let cs = CoordinateSet::build(&axis, 7, &CoordinateConfig::default(), None).unwrap();
        assert_eq!(cs.m, 7);
        for j in 0..7 {
            let row = cs.onehot_row(j);
            assert_eq!(row.len(), 7);
            assert_eq!(row.iter().sum::<f64>(), 1.0);
            assert_eq!(row[j], 1.0);
        }
    }

    #[test]
    fn build_spatial_2d() {
        // 2x2 grid over [1,2]^2
        let mut data = Vec::new();
        for x in [1.0, 2.0] {
            for y in [1.0, 2.0] {
                data.push(x);
                data.push(y);
            }
        }
        let axis = TimeAxis::Spatial { data, dim: 2 };
        let cs = CoordinateSet::build(&axis, 1, &CoordinateConfig::default(), None).unwrap();
        assert_eq!(cs.d_ct, 2);
        assert_eq!(cs.m, 1);
        assert_eq!(cs.temporal_row(0), &[0.0, 0.0]);
        assert_eq!(cs.temporal_row(3), &[1.0, 1.0]);
    }

    #[test]
    fn train_only_scaling_pushes_test_outside_range() {
        let axis = TimeAxis::Index((0..10).map(|i| i as f64).collect());
        let train: Vec<bool> = (0..10).map(|i| i < 7).collect();
        let cs = CoordinateSet::build(&axis, 1, &CoordinateConfig::default(), Some(&train)).unwrap();
        // train max index 6 maps to 1.0; index 9 extrapolates beyond
        assert!((cs.temporal_row(6)[0] - 1.0).abs() < 1e-15);
        assert!(cs.temporal_row(9)[0] > 1.0);
    }

    #[test]
    fn monotone_axis_gives_monotone_first_component() {
        let axis = TimeAxis::Index(vec![0.0, 0.5, 0.7, 2.0, 5.0]);
        let cs = CoordinateSet::build(&axis, 1, &CoordinateConfig::default(), None).unwrap();
        for i in 1..5 {
            assert!(cs.temporal_row(i)[0] > cs.temporal_row(i - 1)[0]);
        }
    }

    #[test]
    fn empty_axis_is_degenerate() {
        let axis = TimeAxis::Index(vec![]);
        assert!(CoordinateSet::build(&axis, 1, &CoordinateConfig::default(), None).is_err());
    }
}
