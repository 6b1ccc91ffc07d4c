use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{coeffs_to_pacf, difference, pacf_to_coeffs, ArimaModel};
use crate::error::{Error, Result};
use crate::kalman::arma_innovations;
use crate::optim::{bfgs, BfgsOptions};
use crate::series::{mean, std_dev, variance, TimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ArimaModel,
    pub loglik: f64,
    pub aic: f64,
    /// Observations entering the likelihood (after differencing).
    pub n_effective: usize,
}

impl FitReport {
    fn new(model: ArimaModel, loglik: f64, n_effective: usize) -> Self {
        let aic = -2.0 * loglik + 2.0 * model.n_params() as f64;
        Self {
            model,
            loglik,
            aic,
            n_effective,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub bfgs: BfgsOptions,
    /// Extra attempts from jittered starting points after a non-converged run.
    pub restarts: usize,
    pub jitter_seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            bfgs: BfgsOptions::default(),
            restarts: 3,
            jitter_seed: 0x5eed,
        }
    }
}

/// Exact maximum-likelihood fit of an ARIMA(p,d,q) model.
pub fn fit(series: &TimeSeries, p: usize, d: usize, q: usize, include_mean: bool) -> Result<FitReport> {
    fit_with(series.values(), p, d, q, include_mean, &FitOptions::default())
}

/// Sample partial autocorrelations up to `k` by Durbin-Levinson.
fn sample_pacf(w: &[f64], k: usize) -> Vec<f64> {
    let n = w.len();
    let mu = mean(w);
    let c0: f64 = w.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64;
    if k == 0 || c0 <= 0.0 {
        return vec![0.0; k];
    }
    let rho: Vec<f64> = (0..=k)
        .map(|lag| {
            if lag >= n {
                return 0.0;
            }
            (0..n - lag).map(|t| (w[t] - mu) * (w[t + lag] - mu)).sum::<f64>() / n as f64 / c0
        })
        .collect();
    let mut phi: Vec<f64> = Vec::new();
    let mut out = Vec::with_capacity(k);
    for j in 1..=k {
        let num = rho[j] - (0..j - 1).map(|i| phi[i] * rho[j - 1 - i]).sum::<f64>();
        let den = 1.0 - (0..j - 1).map(|i| phi[i] * rho[i + 1]).sum::<f64>();
        let r = if den.abs() > 1e-12 { num / den } else { 0.0 };
        let prev = phi.clone();
        for i in 0..j - 1 {
            phi[i] = prev[i] - r * prev[j - 2 - i];
        }
        phi.push(r);
        out.push(r);
    }
    out
}

struct Layout {
    p: usize,
    q: usize,
    mean: bool,
    center: f64,
    scale: f64,
}

impl Layout {
    fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let ar_r: Vec<f64> = x[..self.p].iter().map(|v| v.tanh()).collect();
        let ma_r: Vec<f64> = x[self.p..self.p + self.q].iter().map(|v| v.tanh()).collect();
        let mu = if self.mean {
            self.center + self.scale * x[self.p + self.q]
        } else {
            0.0
        };
        (pacf_to_coeffs(&ar_r), pacf_to_coeffs(&ma_r), mu)
    }
}

/// Like [`fit`] on raw values, with explicit optimizer settings.
///
/// Optimization runs over unconstrained parameters: AR and MA polynomials
/// are reached through their partial autocorrelations (`tanh` then
/// Levinson-Durbin), so every trial point is stationary and invertible. The
/// innovation variance is profiled out of the likelihood.
pub fn fit_with(y: &[f64], p: usize, d: usize, q: usize, include_mean: bool, opts: &FitOptions) -> Result<FitReport> {
    if y.len() <= d {
        return Err(Error::Input(format!("length {} too short for d={d}", y.len())));
    }
    let w = difference(y, d);
    let n = w.len();
    let k = p + q + usize::from(include_mean);
    if n <= p + q || n < 2 {
        return Err(Error::Input(format!(
            "{n} observations after differencing are too few for ARMA({p},{q})"
        )));
    }
    let wbar = mean(&w);
    let var_w = variance(&w);
    if !(var_w > 1e-14 * (1.0 + wbar * wbar)) {
        return Err(Error::DegenerateVariance(
            "series is constant after differencing".into(),
        ));
    }

    let layout = Layout {
        p,
        q,
        mean: include_mean,
        center: wbar,
        scale: std_dev(&w).max(1e-8 * wbar.abs().max(1.0)),
    };
    let mut wc = vec![0.0; n];
    let mut objective = |x: &[f64]| -> f64 {
        let (ar, ma, mu) = layout.unpack(x);
        for (dst, src) in wc.iter_mut().zip(&w) {
            *dst = src - mu;
        }
        match arma_innovations(&ar, &ma, &wc, false) {
            Ok(inn) if inn.sum_sq > 0.0 => 0.5 * (inn.sum_sq / n as f64).ln() + 0.5 * inn.sum_log_f / n as f64,
            _ => f64::INFINITY,
        }
    };

    let mut x0 = vec![0.0; k];
    for (i, r) in sample_pacf(&w, p).into_iter().enumerate() {
        x0[i] = r.clamp(-0.9, 0.9).atanh();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.jitter_seed);
    let mut best: Option<crate::optim::Minimum> = None;
    for attempt in 0..=opts.restarts {
        let start: Vec<f64> = if attempt == 0 {
            x0.clone()
        } else {
            x0.iter()
                .map(|v| v + 0.5 * rng.sample::<f64, _>(StandardNormal))
                .collect()
        };
        let m = bfgs(&mut objective, &start, opts.bfgs);
        let better = best.as_ref().is_none_or(|b| m.value < b.value);
        let converged = m.converged;
        if better {
            best = Some(m);
        }
        if converged && best.as_ref().is_some_and(|b| b.converged) {
            break;
        }
    }
    let best = best.expect("at least one attempt");
    if !best.converged || !best.value.is_finite() {
        return Err(Error::Convergence {
            iterations: best.iterations,
            best_point: best.x,
            best_value: best.value,
        });
    }

    let (ar, ma, mu) = layout.unpack(&best.x);
    let wc: Vec<f64> = w.iter().map(|v| v - mu).collect();
    let inn = arma_innovations(&ar, &ma, &wc, false)?;
    let sigma2 = inn.sigma2_hat();
    if !(sigma2 > 1e-12 * var_w.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateVariance(format!(
            "fitted innovation variance {sigma2:e}"
        )));
    }
    let model = ArimaModel {
        ar,
        d,
        ma,
        mean: mu,
        include_mean,
        sigma2,
    };
    // Guard against tanh saturating to exactly ±1.
    if coeffs_to_pacf(&model.ar).is_none() || coeffs_to_pacf(&model.ma).is_none() {
        return Err(Error::Model(
            "fit reached the stationarity/invertibility boundary".into(),
        ));
    }
    let loglik = inn.loglik(sigma2);
    Ok(FitReport::new(model, loglik, n))
}
