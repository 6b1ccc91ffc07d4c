//! Iterative additive-outlier (AO) detection.
//!
//! For an ARIMA model written as a pure autoregression
//! `π(B) = φ(B)(1-B)^d / θ(B) = 1 - Σ π_i B^i`, an AO of size ω at time T
//! leaves the residual pattern `ε_T = ω`, `ε_{T+i} = -ω π_i`. The least
//! squares estimate of ω from the residuals is
//!
//! ```text
//! ω̂_T = ρ²_T (ε̂_T - Σ_{i=1}^{n-T} π_i ε̂_{T+i}),   ρ²_T = 1 / (1 + Σ_{i=1}^{n-T} π_i²)
//! ```
//!
//! and `λ_T = ω̂_T / (ρ_T σ̂)` is its likelihood-ratio statistic. Note the
//! `+` in `ρ²`: it is the variance of ω̂ in units of σ², so `ρ² ≤ 1`.
//!
//! Detection alternates an inner search (take the largest `|λ_t|`, remove
//! its effect from the residuals, repeat) with joint re-estimation of the
//! ARIMA parameters and every known ω, until a pass finds nothing new.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::arima::{
    centered_differences, difference, fit_with, one_step_residuals, select_order_with, ArimaModel, FitOptions,
    SelectionOptions,
};
use crate::error::{Error, Result};
use crate::kalman::arma_innovations;
use crate::series::{mad, std_dev, DetectionResult, Method, SpikeSet, TimeSeries};

/// π_1..π_{n-1} of the model's autoregressive representation, with the
/// differencing factor multiplied into the AR polynomial.
pub fn pi_weights(model: &ArimaModel, n: usize) -> Result<Vec<f64>> {
    if !model.is_invertible() {
        return Err(Error::Model("π weights need an invertible MA polynomial".into()));
    }
    // coefficients of φ(B)(1-B)^d as a power series, a_0 = 1
    let mut a = vec![1.0];
    a.extend(model.ar.iter().map(|v| -v));
    for _ in 0..model.d {
        let mut next = vec![0.0; a.len() + 1];
        for (i, v) in a.iter().enumerate() {
            next[i] += v;
            next[i + 1] -= v;
        }
        a = next;
    }
    // θ(B) c(B) = a(B), θ(B) = 1 - Σ θ_j B^j
    let len = n.max(1);
    let mut c = vec![0.0; len];
    c[0] = 1.0;
    for k in 1..len {
        let mut v = a.get(k).copied().unwrap_or(0.0);
        for (j, th) in model.ma.iter().enumerate() {
            if j < k {
                v += th * c[k - j - 1];
            }
        }
        c[k] = v;
    }
    Ok(c[1..].iter().map(|v| -v).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnownOutlier {
    pub index: usize,
    pub omega: f64,
}

/// Everything the statistics depend on during one detection pass.
#[derive(Debug, Clone)]
pub struct AoState {
    pub model: ArimaModel,
    pub pi_weights: Vec<f64>,
    /// Current (possibly adjusted) residuals.
    pub residuals: Vec<f64>,
    pub sigma_hat: f64,
    pub known_outliers: Vec<KnownOutlier>,
    /// Residuals before this index are undefined (lost to differencing)
    /// and take no part in estimation or search.
    pub first_valid: usize,
}

impl AoState {
    pub fn new(model: ArimaModel, residuals: Vec<f64>, scale: ScaleEstimate) -> Result<Self> {
        let pi_weights = pi_weights(&model, residuals.len())?;
        let first_valid = model.d.min(residuals.len());
        let sigma_hat = residual_scale(&residuals[first_valid..], scale);
        Ok(Self {
            model,
            pi_weights,
            residuals,
            sigma_hat,
            known_outliers: Vec::new(),
            first_valid,
        })
    }

    /// Removes the effect of an AO of size `omega` at `index` from the
    /// residuals: `ε̃_t = ε̂_t - ω π(B) I(t = T)` for `t ≥ T`.
    pub fn remove_outlier(&mut self, index: usize, omega: f64) {
        self.residuals[index] -= omega;
        for (i, r) in self.residuals[index + 1..].iter_mut().enumerate() {
            *r += omega * self.pi_weights[i];
        }
        self.known_outliers.push(KnownOutlier { index, omega });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoStatistics {
    pub lambda: Vec<f64>,
    pub omega: Vec<f64>,
    pub rho2: Vec<f64>,
}

pub fn ao_statistics(state: &AoState) -> AoStatistics {
    let e = &state.residuals;
    let pi = &state.pi_weights;
    let n = e.len();
    let mut out = AoStatistics {
        lambda: vec![0.0; n],
        omega: vec![0.0; n],
        rho2: vec![1.0; n],
    };
    for t in state.first_valid..n {
        let mut ss = 0.0;
        let mut cross = 0.0;
        for i in 1..n - t {
            ss += pi[i - 1] * pi[i - 1];
            cross += pi[i - 1] * e[t + i];
        }
        let rho2 = 1.0 / (1.0 + ss);
        let omega = rho2 * (e[t] - cross);
        out.rho2[t] = rho2;
        out.omega[t] = omega;
        out.lambda[t] = if state.sigma_hat > 0.0 {
            omega / (rho2.sqrt() * state.sigma_hat)
        } else {
            0.0
        };
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleEstimate {
    /// MAD / 0.6745, falling back to the SD when the MAD is zero.
    #[default]
    Robust,
    Raw,
}

pub fn residual_scale(residuals: &[f64], scale: ScaleEstimate) -> f64 {
    if residuals.len() < 2 {
        return 0.0;
    }
    let sd = std_dev(residuals);
    match scale {
        ScaleEstimate::Raw => sd,
        ScaleEstimate::Robust => {
            let m = mad(residuals) / 0.6745;
            if m > 1e-12 * sd {
                m
            } else {
                sd
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoDetectOptions {
    pub critical_value: f64,
    pub scale: ScaleEstimate,
    pub max_outer_iterations: usize,
    /// At most `n * max_outlier_fraction` outliers are recorded.
    pub max_outlier_fraction: f64,
    /// Alternations of ARIMA refit and ω regression per outer iteration.
    pub reestimation_rounds: usize,
    pub selection: SelectionOptions,
}

impl Default for AoDetectOptions {
    fn default() -> Self {
        Self {
            critical_value: 3.0,
            scale: ScaleEstimate::Robust,
            max_outer_iterations: 10,
            max_outlier_fraction: 0.2,
            reestimation_rounds: 2,
            selection: SelectionOptions::default(),
        }
    }
}

pub fn detect_spikes_ao(series: &TimeSeries, critical_value: f64) -> Result<DetectionResult> {
    detect_spikes_ao_with(
        series,
        &AoDetectOptions {
            critical_value,
            ..Default::default()
        },
    )
}

pub fn detect_spikes_ao_with(series: &TimeSeries, opts: &AoDetectOptions) -> Result<DetectionResult> {
    let fit = select_order_with(series, &opts.selection)?;
    detect_spikes_ao_fitted(series, &fit.model, opts)
}

/// Runs the search starting from an already selected model. Orders stay
/// fixed; only parameters are re-estimated.
///
/// `residuals` in the result are the λ statistics of the observed series
/// under the final model, and `threshold_value` is the critical value.
/// Outliers of either sign are removed during the search, but only those
/// with a positive final ω are reported as spikes.
pub fn detect_spikes_ao_fitted(
    series: &TimeSeries,
    model: &ArimaModel,
    opts: &AoDetectOptions,
) -> Result<DetectionResult> {
    if !(opts.critical_value > 0.0) {
        return Err(Error::Input(format!(
            "critical value must be positive, got {}",
            opts.critical_value
        )));
    }
    let y = series.values();
    let n = y.len();
    let cap = ((n as f64 * opts.max_outlier_fraction).floor() as usize).max(1);
    let tiny = 1e-10 * y.iter().fold(1.0f64, |m, v| m.max(v.abs()));

    let mut model = model.clone();
    let mut known: Vec<KnownOutlier> = Vec::new();
    let mut adjusted = y.to_vec();
    let mut warnings = Vec::new();
    let mut converged = false;

    for _ in 0..opts.max_outer_iterations {
        let res = one_step_residuals(&model, &adjusted)?;
        let mut state = AoState::new(model.clone(), res.raw, opts.scale)?;
        let before = known.len();
        while known.len() < cap && state.sigma_hat > tiny {
            let stats = ao_statistics(&state);
            let best = (state.first_valid..n)
                .filter(|t| !known.iter().any(|k| k.index == *t))
                .max_by(|&a, &b| stats.lambda[a].abs().total_cmp(&stats.lambda[b].abs()));
            let Some(t) = best else { break };
            if !(stats.lambda[t].abs() > opts.critical_value) {
                break;
            }
            let omega = stats.omega[t];
            state.remove_outlier(t, omega);
            state.sigma_hat = residual_scale(&state.residuals[state.first_valid..], opts.scale);
            known.push(KnownOutlier { index: t, omega });
        }
        if known.len() == before {
            converged = true;
            break;
        }
        if known.len() >= cap {
            warnings.push(format!("stopped at the cap of {cap} outliers"));
        }
        reestimate(y, &mut model, &mut known, opts, &mut warnings);
        adjusted = y.to_vec();
        for k in &known {
            adjusted[k.index] -= k.omega;
        }
        if known.len() >= cap {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "outlier search truncated after {} outer iterations",
            opts.max_outer_iterations
        ));
    }

    let fitted = one_step_residuals(&model, &adjusted)?.fitted;
    let observed = AoState::new(model.clone(), one_step_residuals(&model, y)?.raw, opts.scale)?;
    let lambda = ao_statistics(&observed).lambda;
    known.sort_by_key(|k| k.index);
    let spikes = SpikeSet::new(known.iter().filter(|k| k.omega > 0.0).map(|k| k.index).collect(), n)?;
    Ok(DetectionResult {
        method: Method::AoDetect,
        spikes,
        fitted,
        residuals: lambda,
        threshold_value: opts.critical_value,
        warnings,
    })
}

/// Alternates an ARIMA refit on the outlier-adjusted series with a GLS
/// regression of the observed series' innovations on the innovations of
/// the outlier indicators. A refit failure keeps the current parameters.
fn reestimate(
    y: &[f64],
    model: &mut ArimaModel,
    known: &mut [KnownOutlier],
    opts: &AoDetectOptions,
    warnings: &mut Vec<String>,
) {
    let fit_opts: FitOptions = opts.selection.fit;
    for _ in 0..opts.reestimation_rounds {
        let mut adjusted = y.to_vec();
        for k in known.iter() {
            adjusted[k.index] -= k.omega;
        }
        match fit_with(&adjusted, model.p(), model.d, model.q(), model.include_mean, &fit_opts) {
            Ok(r) => *model = r.model,
            // the known outliers explain all variation
            Err(Error::DegenerateVariance(_)) => return,
            Err(e) => {
                warnings.push(format!("parameter re-estimation failed, keeping previous fit: {e}"));
                return;
            }
        }
        match outlier_regression(model, y, known) {
            Ok(omegas) => {
                for (k, w) in known.iter_mut().zip(omegas) {
                    k.omega = w;
                }
            }
            Err(e) => {
                warnings.push(format!("outlier effect regression failed: {e}"));
                return;
            }
        }
    }
}

/// GLS estimates of every known ω given the model.
fn outlier_regression(model: &ArimaModel, y: &[f64], known: &[KnownOutlier]) -> Result<Vec<f64>> {
    let standardized = |w: &[f64]| -> Result<Vec<f64>> {
        let inn = arma_innovations(&model.ar, &model.ma, w, true)?;
        Ok(inn.v.iter().zip(&inn.f).map(|(v, f)| v / f.sqrt()).collect())
    };
    let e = standardized(&centered_differences(model, y)?)?;
    let m = e.len();
    let mut x = DMatrix::zeros(m, known.len());
    for (j, k) in known.iter().enumerate() {
        let mut ind = vec![0.0; y.len()];
        ind[k.index] = 1.0;
        let col = standardized(&difference(&ind, model.d))?;
        x.set_column(j, &DVector::from_vec(col));
    }
    let xtx = x.transpose() * &x;
    let xte = x.transpose() * DVector::from_vec(e);
    let sol = xtx
        .cholesky()
        .ok_or_else(|| Error::Model("outlier regressors are collinear".into()))?
        .solve(&xte);
    Ok(sol.iter().copied().collect())
}
