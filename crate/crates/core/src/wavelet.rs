//! Orthonormal discrete wavelet transform by Mallat's pyramid algorithm,
//! soft thresholding of detail coefficients, and wavelet-residual spike
//! detection.
//!
//! Series are padded to the next power of two by half-sample symmetric
//! reflection; filtering inside the pyramid is periodic on the padded
//! signal, which keeps the transform exactly orthonormal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{median, upper_threshold, DetectionResult, Method, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletFilter {
    Haar,
    /// Daubechies filter with two vanishing moments (four taps).
    #[default]
    Daubechies4,
}

impl WaveletFilter {
    fn lowpass(self) -> Vec<f64> {
        match self {
            WaveletFilter::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            WaveletFilter::Daubechies4 => {
                let s3 = 3f64.sqrt();
                let c = 4.0 * 2f64.sqrt();
                vec![(1.0 + s3) / c, (3.0 + s3) / c, (3.0 - s3) / c, (1.0 - s3) / c]
            }
        }
    }

    /// Quadrature mirror: g_i = (-1)^i h_{L-1-i}.
    fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|i| if i % 2 == 0 { h[l - 1 - i] } else { -h[l - 1 - i] })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDecomposition {
    pub filter: WaveletFilter,
    /// J, with a padded length of 2^J.
    pub levels: usize,
    /// `detail[j]` holds the 2^j coefficients of level j (j = J-1 finest).
    pub detail: Vec<Vec<f64>>,
    /// Coarsest scaling coefficient.
    pub approx: Vec<f64>,
    pub original_length: usize,
}

impl WaveletDecomposition {
    pub fn padded_length(&self) -> usize {
        1 << self.levels
    }

    pub fn finest_detail(&self) -> &[f64] {
        self.detail.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn energy(&self) -> f64 {
        self.approx
            .iter()
            .chain(self.detail.iter().flatten())
            .map(|c| c * c)
            .sum()
    }
}

/// Extends `x` to the next power of two by mirroring its tail:
/// `x[n+k] = x[n-1-k]`.
pub fn reflect_pad(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let target = n.next_power_of_two();
    let mut out = x.to_vec();
    for k in 0..target - n {
        out.push(x[n - 1 - (k % n)]);
    }
    out
}

fn analysis_step(x: &[f64], h: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let len = x.len();
    let half = len / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
            let v = x[(2 * k + i) % len];
            a[k] += hi * v;
            d[k] += gi * v;
        }
    }
    (a, d)
}

fn synthesis_step(a: &[f64], d: &[f64], h: &[f64], g: &[f64]) -> Vec<f64> {
    let len = 2 * a.len();
    let mut x = vec![0.0; len];
    for k in 0..a.len() {
        for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
            x[(2 * k + i) % len] += hi * a[k] + gi * d[k];
        }
    }
    x
}

pub fn dwt(series: &TimeSeries, filter: WaveletFilter) -> Result<WaveletDecomposition> {
    dwt_values(series.values(), filter)
}

/// Full-depth pyramid decomposition of `x` (padded to 2^J).
pub fn dwt_values(x: &[f64], filter: WaveletFilter) -> Result<WaveletDecomposition> {
    if x.len() < 2 {
        return Err(Error::Input(format!(
            "wavelet transform needs at least 2 values, got {}",
            x.len()
        )));
    }
    let (h, g) = (filter.lowpass(), filter.highpass());
    let mut approx = reflect_pad(x);
    let levels = approx.len().trailing_zeros() as usize;
    let mut detail = vec![Vec::new(); levels];
    for j in (0..levels).rev() {
        let (a, d) = analysis_step(&approx, &h, &g);
        detail[j] = d;
        approx = a;
    }
    Ok(WaveletDecomposition {
        filter,
        levels,
        detail,
        approx,
        original_length: x.len(),
    })
}

/// Replaces every detail coefficient `b` by `sign(b) max(|b| - λ, 0)`.
pub fn soft_threshold(dec: &WaveletDecomposition, lambda: f64) -> Result<WaveletDecomposition> {
    if !(lambda >= 0.0) {
        return Err(Error::Input(format!("threshold must be non-negative, got {lambda}")));
    }
    let mut out = dec.clone();
    for b in out.detail.iter_mut().flatten() {
        *b = b.signum() * (b.abs() - lambda).max(0.0);
    }
    Ok(out)
}

pub fn idwt(dec: &WaveletDecomposition) -> Result<TimeSeries> {
    TimeSeries::from_values(idwt_values(dec)?)
}

/// Inverse pyramid, truncated back to the original length.
pub fn idwt_values(dec: &WaveletDecomposition) -> Result<Vec<f64>> {
    let ok = dec.approx.len() == 1
        && dec.detail.len() == dec.levels
        && dec.detail.iter().enumerate().all(|(j, d)| d.len() == 1 << j)
        && dec.original_length <= dec.padded_length()
        && dec.original_length >= 1;
    if !ok {
        return Err(Error::Input("inconsistent wavelet coefficient counts".into()));
    }
    let (h, g) = (dec.filter.lowpass(), dec.filter.highpass());
    let mut approx = dec.approx.clone();
    for d in &dec.detail {
        approx = synthesis_step(&approx, d, &h, &g);
    }
    approx.truncate(dec.original_length);
    Ok(approx)
}

/// Threshold applied to the detail coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdPolicy {
    /// σ̂ √(2 ln N), σ̂ = median(|finest details|) / 0.6745.
    Universal,
    Fixed(f64),
}

/// Noise scale from the finest detail level. Falls back to the root mean
/// square when more than half the coefficients are zero up to rounding.
pub fn noise_scale(dec: &WaveletDecomposition) -> f64 {
    let finest: Vec<f64> = dec.finest_detail().iter().map(|v| v.abs()).collect();
    if finest.is_empty() {
        return 0.0;
    }
    let mad = median(&finest) / 0.6745;
    let rms = (finest.iter().map(|v| v * v).sum::<f64>() / finest.len() as f64).sqrt();
    if mad > 1e-8 * rms {
        mad
    } else {
        rms
    }
}

pub fn universal_threshold(dec: &WaveletDecomposition) -> f64 {
    noise_scale(dec) * (2.0 * (dec.padded_length() as f64).ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletDetectOptions {
    pub k_sd: f64,
    pub filter: WaveletFilter,
    pub threshold: ThresholdPolicy,
}

impl Default for WaveletDetectOptions {
    fn default() -> Self {
        Self {
            k_sd: 2.0,
            filter: WaveletFilter::Daubechies4,
            threshold: ThresholdPolicy::Universal,
        }
    }
}

/// Wavelet smoothing by soft thresholding; points whose residual from the
/// smooth exceeds `k_sd` residual SDs are spikes.
pub fn detect_spikes_wavelet(series: &TimeSeries, k_sd: f64) -> Result<DetectionResult> {
    detect_spikes_wavelet_with(
        series,
        &WaveletDetectOptions {
            k_sd,
            ..Default::default()
        },
    )
}

pub fn detect_spikes_wavelet_with(series: &TimeSeries, opts: &WaveletDetectOptions) -> Result<DetectionResult> {
    let y = series.values();
    if y.len() < 8 {
        return Err(Error::Input(format!(
            "wavelet detection needs at least 8 values, got {}",
            y.len()
        )));
    }
    let dec = dwt_values(y, opts.filter)?;
    let lambda = match opts.threshold {
        ThresholdPolicy::Universal => universal_threshold(&dec),
        ThresholdPolicy::Fixed(l) => l,
    };
    let fitted = idwt_values(&soft_threshold(&dec, lambda)?)?;
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let (threshold_value, spikes) = upper_threshold(&residuals, opts.k_sd, series.mean());
    Ok(DetectionResult {
        method: Method::Wavelet,
        spikes,
        fitted,
        residuals,
        threshold_value,
        warnings: vec![],
    })
}
