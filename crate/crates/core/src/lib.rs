//! Spike detection for short, equally spaced time series.
//!
//! Four detectors are provided, each returning a [`DetectionResult`]:
//!
//! * [`arima::detect_spikes_arima`]: one-step ARIMA residuals above `k` SDs.
//! * [`kalman::detect_spikes_kalman`]: standardized smoothed observation
//!   disturbances of the ARIMA model in state-space form with measurement noise.
//! * [`wavelet::detect_spikes_wavelet`]: residuals from a soft-thresholded
//!   discrete wavelet reconstruction.
//! * [`ao_detect::detect_spikes_ao`]: iterative additive-outlier search with
//!   likelihood-ratio statistics and model re-estimation.
//!
//! [`simlab`] runs Monte-Carlo comparisons of the detectors on simulated
//! series with inserted spikes; [`ingest`] turns monthly count/population
//! tables into rate series.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod ao_detect;
pub mod arima;
pub mod error;
pub mod ingest;
pub mod kalman;
pub(crate) mod optim;
pub mod report;
pub mod series;
pub mod simlab;
pub mod wavelet;

pub use error::{Error, Result};
pub use series::{score, ConfusionCounts, DetectionResult, Method, SpikeSet, TimeSeries, YearMonth};
