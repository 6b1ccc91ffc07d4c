//! Shared domain types: calendar-indexed series, spike sets, confusion
//! counts and per-method detection results.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar month, `YYYY-MM`; serialized in that form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    /// 1..=12
    pub month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Input(format!("month {month} out of range 1..=12")));
        }
        Ok(Self { year, month })
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(o: i64) -> Self {
        Self {
            year: o.div_euclid(12) as i32,
            month: (o.rem_euclid(12) + 1) as u8,
        }
    }

    /// The month `k` months after `self`.
    pub fn plus(self, k: i64) -> Self {
        Self::from_ordinal(self.ordinal() + k)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: YearMonth) -> i64 {
        other.ordinal() - self.ordinal()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| Error::Input(format!("expected YYYY-MM, got '{s}'")))?;
        if y.len() != 4 || m.len() != 2 {
            return Err(Error::Input(format!("expected YYYY-MM, got '{s}'")));
        }
        let year = y
            .parse::<i32>()
            .map_err(|_| Error::Input(format!("bad year in '{s}'")))?;
        let month = m
            .parse::<u8>()
            .map_err(|_| Error::Input(format!("bad month in '{s}'")))?;
        Self::new(year, month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Equally spaced observations starting at a calendar origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    origin: YearMonth,
    period_label: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, origin: YearMonth, period_label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("time series must have at least one value".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite value at index {i}")));
        }
        Ok(Self {
            values,
            origin,
            period_label: period_label.into(),
        })
    }

    /// Monthly series with an arbitrary origin (January 2000); for
    /// simulation and tests where calendar labels do not matter.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, YearMonth { year: 2000, month: 1 }, "monthly")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin(&self) -> YearMonth {
        self.origin
    }

    pub fn period_label(&self) -> &str {
        &self.period_label
    }

    /// Calendar month of index `i`.
    pub fn month_at(&self, i: usize) -> YearMonth {
        self.origin.plus(i as i64)
    }

    /// Same calendar and label, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, self.origin, self.period_label.clone())
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

/// Strictly increasing set of 0-based time indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpikeSet(Vec<usize>);

impl SpikeSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a set from arbitrary indices (sorted, deduplicated) and
    /// checks that every index is below `n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::Input(format!("spike index {last} out of range for length {n}")));
            }
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl FromIterator<usize> for SpikeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// tp / (tp + fn); `None` when no spikes were inserted.
    pub fn sensitivity(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    /// tn / (tn + fp); `None` when every point is a spike.
    pub fn specificity(&self) -> Option<f64> {
        let d = self.tn + self.fp;
        (d > 0).then(|| self.tn as f64 / d as f64)
    }
}

/// Exact-index scoring of detected spikes against inserted ones.
pub fn score(inserted: &SpikeSet, detected: &SpikeSet, n: usize) -> Result<ConfusionCounts> {
    for set in [inserted, detected] {
        if let Some(m) = set.max() {
            if m >= n {
                return Err(Error::Input(format!("spike index {m} out of range for length {n}")));
            }
        }
    }
    let tp = inserted.indices().iter().filter(|&&i| detected.contains(i)).count();
    let fp = detected.len() - tp;
    let fn_ = inserted.len() - tp;
    Ok(ConfusionCounts {
        tp,
        fp,
        fn_,
        tn: n - tp - fp - fn_,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Arima,
    Kalman,
    Wavelet,
    #[serde(rename = "ao")]
    AoDetect,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Arima, Method::Kalman, Method::Wavelet, Method::AoDetect];

    pub fn name(self) -> &'static str {
        match self {
            Method::Arima => "arima",
            Method::Kalman => "kalman",
            Method::Wavelet => "wavelet",
            Method::AoDetect => "ao",
        }
    }

    /// Whether the method flags points by thresholding residuals at
    /// `k` standard deviations.
    pub fn is_residual_threshold(self) -> bool {
        !matches!(self, Method::AoDetect)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arima" => Ok(Method::Arima),
            "kalman" => Ok(Method::Kalman),
            "wavelet" | "wavelets" => Ok(Method::Wavelet),
            "ao" | "aodetect" | "ao_detect" | "outlier" => Ok(Method::AoDetect),
            other => Err(Error::Input(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub method: Method,
    pub spikes: SpikeSet,
    pub fitted: Vec<f64>,
    /// Residual-threshold methods: the thresholded residuals. Outlier
    /// detection: the final likelihood-ratio statistics.
    pub residuals: Vec<f64>,
    /// Realized cutoff in the units of `residuals`.
    pub threshold_value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with an `n - 1` denominator (0 for length 1).
pub(crate) fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

pub(crate) fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

pub(crate) fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation about the median (unscaled).
pub(crate) fn mad(x: &[f64]) -> f64 {
    let m = median(x);
    let dev: Vec<f64> = x.iter().map(|v| (v - m).abs()).collect();
    median(&dev)
}

/// One-sided `k`-SD rule shared by the residual-threshold detectors.
///
/// Returns the realized cutoff and the flagged indices. A residual vector
/// whose spread is at rounding level relative to `scale` flags nothing.
pub(crate) fn upper_threshold(residuals: &[f64], k_sd: f64, scale: f64) -> (f64, SpikeSet) {
    let sd = std_dev(residuals);
    let cutoff = k_sd * sd;
    if !(sd > 1e-10 * scale.abs().max(1.0)) || !cutoff.is_finite() {
        return (cutoff, SpikeSet::empty());
    }
    let spikes = residuals
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > cutoff)
        .map(|(i, _)| i)
        .collect();
    (cutoff, spikes)
}
