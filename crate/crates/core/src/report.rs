//! Running detectors on observed series and writing their output: a spike
//! report listing flagged calendar months per series and method, and
//! per-point plot data.

use serde::{Deserialize, Serialize};

use crate::ao_detect::{detect_spikes_ao_fitted, AoDetectOptions};
use crate::arima::{detect_spikes_arima_fitted, select_order, ArimaDetectOptions, ArimaModel};
use crate::error::{Error, Result};
use crate::kalman::{detect_spikes_kalman_fitted, KalmanDetectOptions};
use crate::series::{DetectionResult, Method, TimeSeries, YearMonth};
use crate::wavelet::{detect_spikes_wavelet_with, WaveletDetectOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectSettings {
    pub threshold_k: f64,
    pub critical_value: f64,
}

impl Default for DetectSettings {
    fn default() -> Self {
        Self {
            threshold_k: 2.0,
            critical_value: 3.0,
        }
    }
}

/// Runs each method on `series`. Order selection happens at most once and
/// is shared by the model-based methods.
pub fn run_methods(
    series: &TimeSeries,
    methods: &[Method],
    settings: &DetectSettings,
) -> Vec<(Method, Result<DetectionResult>)> {
    let mut model: Option<std::result::Result<ArimaModel, String>> = None;
    let k_sd = settings.threshold_k;
    methods
        .iter()
        .map(|&method| {
            if method == Method::Wavelet {
                let r = detect_spikes_wavelet_with(
                    series,
                    &WaveletDetectOptions {
                        k_sd,
                        ..Default::default()
                    },
                );
                return (method, r);
            }
            let m = model
                .get_or_insert_with(|| select_order(series).map(|r| r.model).map_err(|e| e.to_string()))
                .clone();
            let m = match m {
                Ok(m) => m,
                Err(e) => return (method, Err(Error::Model(format!("order selection failed: {e}")))),
            };
            let r = match method {
                Method::Arima => detect_spikes_arima_fitted(
                    series,
                    &m,
                    &ArimaDetectOptions {
                        k_sd,
                        ..Default::default()
                    },
                ),
                Method::Kalman => detect_spikes_kalman_fitted(
                    series,
                    &m,
                    &KalmanDetectOptions {
                        k_sd,
                        ..Default::default()
                    },
                ),
                Method::AoDetect => detect_spikes_ao_fitted(
                    series,
                    &m,
                    &AoDetectOptions {
                        critical_value: settings.critical_value,
                        ..Default::default()
                    },
                ),
                Method::Wavelet => unreachable!(),
            };
            (method, r)
        })
        .collect()
}

/// One line of the spike report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeReportRow {
    pub series: String,
    pub method: Method,
    pub months: Vec<YearMonth>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SpikeReportRow {
    pub fn new(series: &str, ts: &TimeSeries, result: &DetectionResult) -> Self {
        Self {
            series: series.to_string(),
            method: result.method,
            months: result.spikes.indices().iter().map(|&i| ts.month_at(i)).collect(),
            warnings: result.warnings.clone(),
        }
    }
}

fn csv_string(f: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    f(&mut w).map_err(|e| Error::Input(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
}

/// `series,method,months` with months joined by ", ".
pub fn spike_report_csv(rows: &[SpikeReportRow]) -> Result<String> {
    csv_string(|w| {
        w.write_record(["series", "method", "months"])?;
        for r in rows {
            let months: Vec<String> = r.months.iter().map(|m| m.to_string()).collect();
            w.write_record([r.series.as_str(), r.method.name(), &months.join(", ")])?;
        }
        Ok(())
    })
}

pub fn spike_report_json(rows: &[SpikeReportRow]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows).map_err(|e| Error::Input(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// One row per time point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub time: YearMonth,
    pub observed: f64,
    pub fitted: f64,
    pub residual: f64,
    pub spike_flag: u8,
}

pub fn plot_points(series: &TimeSeries, result: &DetectionResult) -> Vec<PlotPoint> {
    series
        .values()
        .iter()
        .enumerate()
        .map(|(i, &observed)| PlotPoint {
            time: series.month_at(i),
            observed,
            fitted: result.fitted[i],
            residual: result.residuals[i],
            spike_flag: u8::from(result.spikes.contains(i)),
        })
        .collect()
}

pub fn plot_data_csv(points: &[PlotPoint]) -> Result<String> {
    csv_string(|w| {
        w.write_record(["time", "observed", "fitted", "residual", "spike_flag"])?;
        for p in points {
            w.write_record([
                p.time.to_string(),
                p.observed.to_string(),
                p.fitted.to_string(),
                p.residual.to_string(),
                p.spike_flag.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn plot_data_json(points: &[PlotPoint]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(points).map_err(|e| Error::Input(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
