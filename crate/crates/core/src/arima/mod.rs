//! ARIMA(p,d,q) models: representation, simulation, exact Gaussian
//! likelihood, maximum-likelihood fitting, stepwise AIC order selection and
//! residual-threshold spike detection.
//!
//! Coefficients follow the convention
//!
//! ```text
//! φ(B) (1 - B)^d (y_t - μ) = θ(B) ε_t
//! φ(B) = 1 - φ₁B - … - φ_pB^p,   θ(B) = 1 - θ₁B - … - θ_qB^q
//! ```
//!
//! so a displayed `+ ε_t - 0.95 ε_{t-1}` corresponds to `θ₁ = 0.95`. The
//! mean `μ` applies to the differenced series and is only used when `d = 0`.

mod fit;
mod select;

pub use fit::{fit, fit_with, FitOptions, FitReport};
pub use select::{kpss_statistic, ndiffs, select_order, select_order_with, SelectionOptions, KPSS_CRITICAL_5PCT};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kalman;
use crate::series::{upper_threshold, DetectionResult, Method, TimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub ar: Vec<f64>,
    pub d: usize,
    pub ma: Vec<f64>,
    /// Mean of the d-times differenced series; ignored unless `include_mean`.
    pub mean: f64,
    pub include_mean: bool,
    pub sigma2: f64,
}

impl ArimaModel {
    pub fn new(ar: Vec<f64>, d: usize, ma: Vec<f64>, mean: f64, sigma2: f64) -> Result<Self> {
        let m = Self {
            ar,
            d,
            ma,
            include_mean: mean != 0.0,
            mean,
            sigma2,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn white_noise(mean: f64, sigma2: f64) -> Self {
        Self {
            ar: vec![],
            d: 0,
            ma: vec![],
            mean,
            include_mean: true,
            sigma2,
        }
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    pub fn q(&self) -> usize {
        self.ma.len()
    }

    pub fn effective_mean(&self) -> f64 {
        if self.include_mean {
            self.mean
        } else {
            0.0
        }
    }

    /// Number of estimated parameters counted by AIC.
    pub fn n_params(&self) -> usize {
        self.p() + self.q() + usize::from(self.include_mean) + 1
    }

    pub fn is_stationary(&self) -> bool {
        coeffs_to_pacf(&self.ar).is_some()
    }

    pub fn is_invertible(&self) -> bool {
        coeffs_to_pacf(&self.ma).is_some()
    }

    /// Smallest modulus among the roots of φ(B) and θ(B); infinite for
    /// white noise.
    pub fn min_root_modulus(&self) -> f64 {
        min_root_modulus(&self.ar).min(min_root_modulus(&self.ma))
    }

    pub fn validate(&self) -> Result<()> {
        if self.ar.iter().chain(&self.ma).any(|c| !c.is_finite()) || !self.mean.is_finite() {
            return Err(Error::Model("non-finite coefficient".into()));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(Error::Model(format!(
                "innovation variance must be positive, got {}",
                self.sigma2
            )));
        }
        if !self.is_stationary() {
            return Err(Error::Model(format!("AR polynomial {:?} is not stationary", self.ar)));
        }
        if !self.is_invertible() {
            return Err(Error::Model(format!("MA polynomial {:?} is not invertible", self.ma)));
        }
        Ok(())
    }

    /// Stationary variance of the differenced series (the process variance
    /// itself when `d = 0`).
    pub fn stationary_variance(&self) -> Result<f64> {
        Ok(self.autocovariances(1)?[0])
    }

    /// Autocovariances γ₀..γ_{max_lag} of the stationary ARMA part.
    pub fn autocovariances(&self, max_lag: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let ssm = kalman::arma_state_space(&self.ar, &self.ma, self.sigma2)?;
        // Cov(α_{t+k}, α_t) = T^k P, observation picks element (0,0).
        let mut cov = ssm.p1.clone();
        let mut out = Vec::with_capacity(max_lag + 1);
        for _ in 0..=max_lag {
            out.push(cov[(0, 0)]);
            cov = &ssm.t * cov;
        }
        Ok(out)
    }

    /// Simulates `n` observations with Gaussian innovations.
    ///
    /// The stationary part discards a burn-in of `max(200, 10(p+q+1))`
    /// draws. When `d > 0` it is summed `d` times and the level series is
    /// anchored so that cumulative sums start from `start_level`; for
    /// `d = 0` the level is the model mean and `start_level` is unused.
    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, start_level: f64, rng: &mut R) -> Result<Vec<f64>> {
        self.validate()?;
        if n == 0 {
            return Err(Error::Input("simulation length must be at least 1".into()));
        }
        let (p, q) = (self.p(), self.q());
        let burn = 200usize.max(10 * (p + q + 1));
        let total = burn + n;
        let sigma = self.sigma2.sqrt();
        let mu = self.effective_mean();
        let e: Vec<f64> = (0..total)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut w = vec![0.0; total];
        for t in 0..total {
            let mut x = e[t];
            for (i, phi) in self.ar.iter().enumerate() {
                if t > i {
                    x += phi * w[t - i - 1];
                }
            }
            for (j, theta) in self.ma.iter().enumerate() {
                if t > j {
                    x -= theta * e[t - j - 1];
                }
            }
            w[t] = x;
        }
        let mut out: Vec<f64> = w[burn..].iter().map(|v| v + mu).collect();
        for level in 0..self.d {
            let anchor = if level + 1 == self.d { start_level } else { 0.0 };
            let mut acc = anchor;
            for v in out.iter_mut() {
                acc += *v;
                *v = acc;
            }
        }
        Ok(out)
    }
}

/// Levinson-Durbin map from partial autocorrelations in (-1, 1) to the
/// coefficients of a stationary polynomial `1 - c₁B - … - c_kB^k`.
pub(crate) fn pacf_to_coeffs(r: &[f64]) -> Vec<f64> {
    let mut c: Vec<f64> = Vec::with_capacity(r.len());
    for (k, &rk) in r.iter().enumerate() {
        let prev = c.clone();
        for j in 0..k {
            c[j] = prev[j] - rk * prev[k - 1 - j];
        }
        c.push(rk);
    }
    c
}

/// Inverse of [`pacf_to_coeffs`]; `None` when the polynomial has a root on
/// or inside the unit circle.
pub(crate) fn coeffs_to_pacf(c: &[f64]) -> Option<Vec<f64>> {
    let mut cur = c.to_vec();
    let mut r = vec![0.0; c.len()];
    for k in (0..c.len()).rev() {
        let rk = cur[k];
        if !(rk.abs() < 1.0) {
            return None;
        }
        r[k] = rk;
        let denom = 1.0 - rk * rk;
        let prev: Vec<f64> = (0..k).map(|j| (cur[j] + rk * cur[k - 1 - j]) / denom).collect();
        cur = prev;
    }
    Some(r)
}

/// Smallest root modulus of `1 - c₁B - … - c_kB^k`, via the eigenvalues
/// of its companion matrix (roots are their reciprocals).
fn min_root_modulus(c: &[f64]) -> f64 {
    let k = match c.iter().rposition(|v| *v != 0.0) {
        Some(i) => i + 1,
        None => return f64::INFINITY,
    };
    let mut comp = nalgebra::DMatrix::zeros(k, k);
    for i in 0..k {
        comp[(0, i)] = c[i];
    }
    for i in 1..k {
        comp[(i, i - 1)] = 1.0;
    }
    let largest = comp
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    1.0 / largest
}

/// Applies `(1 - B)^d`.
pub fn difference(y: &[f64], d: usize) -> Vec<f64> {
    let mut w = y.to_vec();
    for _ in 0..d {
        w = w.windows(2).map(|p| p[1] - p[0]).collect();
    }
    w
}

/// Exact Gaussian log-likelihood of the series under `model`.
///
/// The series is differenced `d` times and mean-corrected, then run
/// through the Kalman filter on the ARMA state-space form with the
/// stationary (Lyapunov) initial covariance.
pub fn loglikelihood(model: &ArimaModel, series: &TimeSeries) -> Result<f64> {
    model.validate()?;
    let w = centered_differences(model, series.values())?;
    let inn = kalman::arma_innovations(&model.ar, &model.ma, &w, false)?;
    Ok(inn.loglik(model.sigma2))
}

pub(crate) fn centered_differences(model: &ArimaModel, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() <= model.d {
        return Err(Error::Input(format!(
            "series of length {} leaves no observations after {} differences",
            y.len(),
            model.d
        )));
    }
    let mu = model.effective_mean();
    Ok(difference(y, model.d).into_iter().map(|v| v - mu).collect())
}

/// One-step-ahead prediction errors of the model on the original time axis.
#[derive(Debug, Clone)]
pub struct OneStepResiduals {
    /// Raw innovations `y_t - ŷ_{t|t-1}`; zero for the first `d` points.
    pub raw: Vec<f64>,
    /// Innovations divided by their predictive standard deviation.
    pub standardized: Vec<f64>,
    pub fitted: Vec<f64>,
}

pub fn one_step_residuals(model: &ArimaModel, y: &[f64]) -> Result<OneStepResiduals> {
    model.validate()?;
    let w = centered_differences(model, y)?;
    let inn = kalman::arma_innovations(&model.ar, &model.ma, &w, true)?;
    let n = y.len();
    let d = model.d;
    let mut raw = vec![0.0; n];
    let mut standardized = vec![0.0; n];
    for (k, (v, f)) in inn.v.iter().zip(&inn.f).enumerate() {
        raw[k + d] = *v;
        standardized[k + d] = v / (f * model.sigma2).sqrt();
    }
    let fitted = y.iter().zip(&raw).map(|(a, b)| a - b).collect();
    Ok(OneStepResiduals {
        raw,
        standardized,
        fitted,
    })
}

/// Which one-step residual scale the ARIMA detector thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualScale {
    #[default]
    Standardized,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArimaDetectOptions {
    pub k_sd: f64,
    pub residuals: ResidualScale,
    pub selection: SelectionOptions,
}

impl Default for ArimaDetectOptions {
    fn default() -> Self {
        Self {
            k_sd: 2.0,
            residuals: ResidualScale::Standardized,
            selection: SelectionOptions::default(),
        }
    }
}

/// Selects and fits an ARIMA model, then flags points whose one-step
/// residual exceeds `k_sd` residual standard deviations (upward only).
pub fn detect_spikes_arima(series: &TimeSeries, k_sd: f64) -> Result<DetectionResult> {
    let opts = ArimaDetectOptions {
        k_sd,
        ..Default::default()
    };
    let fit = select_order_with(series, &opts.selection)?;
    detect_spikes_arima_fitted(series, &fit.model, &opts)
}

/// Detection step for an already selected model.
pub fn detect_spikes_arima_fitted(
    series: &TimeSeries,
    model: &ArimaModel,
    opts: &ArimaDetectOptions,
) -> Result<DetectionResult> {
    let res = one_step_residuals(model, series.values())?;
    let residuals = match opts.residuals {
        ResidualScale::Standardized => res.standardized,
        ResidualScale::Raw => res.raw,
    };
    let scale = match opts.residuals {
        ResidualScale::Standardized => 1.0,
        ResidualScale::Raw => series.mean(),
    };
    let (threshold_value, spikes) = upper_threshold(&residuals, opts.k_sd, scale);
    Ok(DetectionResult {
        method: Method::Arima,
        spikes,
        fitted: res.fitted,
        residuals,
        threshold_value,
        warnings: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pacf_round_trip() {
        let r = [0.5, -0.3, 0.2];
        let c = pacf_to_coeffs(&r);
        let back = coeffs_to_pacf(&c).unwrap();
        for (a, b) in r.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(coeffs_to_pacf(&[1.0]).is_none());
        assert!(coeffs_to_pacf(&[0.5, 0.6]).is_none()); // 1 - .5B - .6B² has a root at ~0.94
    }

    #[test]
    fn root_modulus() {
        let m = ArimaModel::new(vec![0.5], 0, vec![], 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(m.min_root_modulus(), 2.0, epsilon = 1e-10);
        // 1 - 0.8481B + 0.1436B² - 0.3572B³ + 0.6178B⁴
        let oak = ArimaModel::new(
            vec![0.8481, -0.1436, 0.3572, -0.6178],
            1,
            vec![1.6616, -0.7814],
            0.0,
            1.0,
        )
        .unwrap();
        assert_abs_diff_eq!(oak.min_root_modulus(), 1.04239319, epsilon = 1e-6);
        assert!(ArimaModel::white_noise(0.0, 1.0).min_root_modulus().is_infinite());
    }

    #[test]
    fn validation_errors() {
        assert!(ArimaModel::new(vec![1.2], 0, vec![], 0.0, 1.0).is_err());
        assert!(ArimaModel::new(vec![], 0, vec![1.5], 0.0, 1.0).is_err());
        assert!(ArimaModel::new(vec![0.5], 0, vec![], 0.0, 0.0).is_err());
        assert!(ArimaModel::new(vec![0.5], 0, vec![0.3], 0.0, 1.0).is_ok());
    }

    #[test]
    fn ar1_autocovariance_closed_form() {
        let m = ArimaModel::new(vec![0.5], 0, vec![], 0.0, 1.0).unwrap();
        let g = m.autocovariances(3).unwrap();
        assert_abs_diff_eq!(g[0], 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[2], 0.25 * 4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn white_noise_loglik_at_zero() {
        let m = ArimaModel::white_noise(0.0, 1.0);
        let s = TimeSeries::from_values(vec![0.0, 0.0, 0.0]).unwrap();
        let ll = loglikelihood(&m, &s).unwrap();
        assert_abs_diff_eq!(ll, 3.0 * (-0.5 * (2.0 * std::f64::consts::PI).ln()), epsilon = 1e-12);
        assert_abs_diff_eq!(ll, -2.756815599614018, epsilon = 1e-12);
    }

    #[test]
    fn loglik_empty_effective_sample_errors() {
        let m = ArimaModel::new(vec![], 1, vec![0.3], 0.0, 1.0).unwrap();
        let s = TimeSeries::from_values(vec![1.0]).unwrap();
        assert!(loglikelihood(&m, &s).is_err());
    }

    #[test]
    fn simulate_white_noise_uncorrelated() {
        let m = ArimaModel::white_noise(0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = m.simulate(10_000, 0.0, &mut rng).unwrap();
        let mu = crate::series::mean(&x);
        let num: f64 = x.windows(2).map(|w| (w[0] - mu) * (w[1] - mu)).sum();
        let den: f64 = x.iter().map(|v| (v - mu) * (v - mu)).sum();
        assert!((num / den).abs() < 0.03, "lag-1 acf {}", num / den);
    }

    #[test]
    fn simulate_ar1_variance() {
        let m = ArimaModel::new(vec![0.5], 0, vec![], 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = m.simulate(200_000, 0.0, &mut rng).unwrap();
        let v = crate::series::variance(&x);
        assert!((v / (4.0 / 3.0) - 1.0).abs() < 0.03, "variance {v}");
    }

    #[test]
    fn simulate_los_angeles_moments() {
        // σ chosen so the stationary SD is 3.40: σ² = 3.40² (1 - φ²)
        let phi: f64 = 0.436;
        let m = ArimaModel::new(vec![phi], 0, vec![], 35.53, 3.40f64.powi(2) * (1.0 - phi * phi)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = m.simulate(10_000, 0.0, &mut rng).unwrap();
        assert!((crate::series::mean(&x) - 35.53).abs() < 0.5);
        assert!((crate::series::std_dev(&x) - 3.40).abs() < 0.3);
    }

    #[test]
    fn simulate_integrated_is_anchored() {
        let m = ArimaModel::new(vec![], 1, vec![0.794], 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = m.simulate(50, 73.59, &mut rng).unwrap();
        assert_eq!(x.len(), 50);
        assert!((x[0] - 73.59).abs() < 10.0);
    }

    #[test]
    fn difference_orders() {
        assert_eq!(difference(&[1.0, 4.0, 9.0, 16.0], 1), vec![3.0, 5.0, 7.0]);
        assert_eq!(difference(&[1.0, 4.0, 9.0, 16.0], 2), vec![2.0, 2.0]);
    }

    #[test]
    fn infinite_threshold_flags_nothing() {
        let m = ArimaModel::new(vec![0.4], 0, vec![], 10.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut y = m.simulate(96, 0.0, &mut rng).unwrap();
        y[30] += 20.0;
        let s = TimeSeries::from_values(y).unwrap();
        let opts = ArimaDetectOptions {
            k_sd: f64::INFINITY,
            ..Default::default()
        };
        let r = detect_spikes_arima_fitted(&s, &m, &opts).unwrap();
        assert!(r.spikes.is_empty());
        let opts = ArimaDetectOptions {
            k_sd: 2.0,
            ..Default::default()
        };
        let r = detect_spikes_arima_fitted(&s, &m, &opts).unwrap();
        assert!(r.spikes.contains(30));
        for &i in r.spikes.indices() {
            assert!(r.residuals[i] > r.threshold_value);
        }
    }
}
