//! Linear Gaussian state-space models with a scalar observation:
//!
//! ```text
//! y_t     = c + Z α_t + ε_t,        ε_t ~ N(0, H)
//! α_{t+1} = T α_t + R η_t,          η_t ~ N(0, Q)
//! α_1     ~ N(a1, P1)
//! ```
//!
//! Provides the ARIMA-to-state-space conversion, the Kalman filter, the
//! fixed-interval state and disturbance smoother, and Kalman-smoother
//! spike detection. System matrices are time-invariant.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::arima::{select_order_with, ArimaModel, SelectionOptions};
use crate::error::{Error, Result};
use crate::optim::golden_section;
use crate::series::{upper_threshold, variance, DetectionResult, Method, TimeSeries};

/// Innovation variances at or below this are treated as zero.
const F_FLOOR: f64 = 1e-12;
const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub t: DMatrix<f64>,
    /// Observation row, stored as a column vector.
    pub z: DVector<f64>,
    pub r: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub h: f64,
    pub a1: DVector<f64>,
    pub p1: DMatrix<f64>,
    /// Observation intercept `c`.
    pub intercept: f64,
    /// Leading observations whose likelihood terms depend on the large
    /// finite variance given to nonstationary state components.
    pub n_diffuse: usize,
}

impl StateSpaceModel {
    pub fn state_dim(&self) -> usize {
        self.t.nrows()
    }

    fn check(&self) -> Result<()> {
        let m = self.state_dim();
        let ok = self.t.ncols() == m
            && self.z.len() == m
            && self.r.nrows() == m
            && self.r.ncols() == self.q.nrows()
            && self.q.is_square()
            && self.a1.len() == m
            && self.p1.shape() == (m, m);
        if !ok {
            return Err(Error::Input("inconsistent state-space dimensions".into()));
        }
        if !(self.h >= 0.0) {
            return Err(Error::Model(format!(
                "observation variance must be >= 0, got {}",
                self.h
            )));
        }
        Ok(())
    }
}

/// Solves `P = T P Tᵀ + W` for a stable `T`.
pub fn solve_lyapunov(t: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = t.nrows();
    let kron = t.kronecker(t);
    let a = DMatrix::<f64>::identity(m * m, m * m) - kron;
    let b = DVector::from_column_slice(w.as_slice());
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Model("transition matrix has a unit eigenvalue".into()))?;
    let p = DMatrix::from_column_slice(m, m, x.as_slice());
    Ok((&p + p.transpose()) * 0.5)
}

fn arma_dim(p: usize, q: usize) -> usize {
    p.max(q + 1)
}

/// Companion-form state space for a zero-mean stationary ARMA(p,q) with
/// `m = max(p, q+1)`, exact stationary initialization and `H = 0`.
pub(crate) fn arma_state_space(ar: &[f64], ma: &[f64], sigma2: f64) -> Result<StateSpaceModel> {
    let m = arma_dim(ar.len(), ma.len());
    let mut t = DMatrix::zeros(m, m);
    for (i, phi) in ar.iter().enumerate() {
        t[(i, 0)] = *phi;
    }
    for i in 0..m - 1 {
        t[(i, i + 1)] = 1.0;
    }
    let mut r = DMatrix::zeros(m, 1);
    r[(0, 0)] = 1.0;
    for (j, theta) in ma.iter().enumerate() {
        r[(j + 1, 0)] = -theta;
    }
    let q = DMatrix::from_element(1, 1, sigma2);
    let p1 = solve_lyapunov(&t, &(&r * &q * r.transpose()))?;
    let mut z = DVector::zeros(m);
    z[0] = 1.0;
    Ok(StateSpaceModel {
        t,
        z,
        r,
        q,
        h: 0.0,
        a1: DVector::zeros(m),
        p1,
        intercept: 0.0,
        n_diffuse: 0,
    })
}

/// State-space form of an ARIMA model observed with additional noise of
/// variance `obs_noise`.
///
/// For `d > 0` the state is augmented with `d` integration components
/// holding `Δ^k y_{t-1}`, k = 0..d-1; they start at zero with variance
/// `diffuse_variance`.
pub fn to_state_space(model: &ArimaModel, obs_noise: f64, diffuse_variance: f64) -> Result<StateSpaceModel> {
    model.validate()?;
    if !model.is_stationary() && model.d == 0 {
        return Err(Error::Model("non-stationary ARMA model".into()));
    }
    let mut base = arma_state_space(&model.ar, &model.ma, model.sigma2)?;
    base.h = obs_noise;
    base.intercept = model.effective_mean();
    let d = model.d;
    if d == 0 {
        return Ok(base);
    }
    let ma_dim = base.state_dim();
    let m = d + ma_dim;
    let mut t = DMatrix::zeros(m, m);
    for k in 0..d {
        // Δ^k y_t = Σ_{j>=k} Δ^j y_{t-1} + w_t
        for j in k..d {
            t[(k, j)] = 1.0;
        }
        t[(k, d)] = 1.0;
    }
    t.view_mut((d, d), (ma_dim, ma_dim)).copy_from(&base.t);
    let mut r = DMatrix::zeros(m, 1);
    r.view_mut((d, 0), (ma_dim, 1)).copy_from(&base.r);
    let mut z = DVector::zeros(m);
    for k in 0..=d {
        z[k] = 1.0;
    }
    let mut p1 = DMatrix::zeros(m, m);
    for k in 0..d {
        p1[(k, k)] = diffuse_variance;
    }
    p1.view_mut((d, d), (ma_dim, ma_dim)).copy_from(&base.p1);
    Ok(StateSpaceModel {
        t,
        z,
        r,
        q: base.q,
        h: obs_noise,
        a1: DVector::zeros(m),
        p1,
        // a drift term is never used with differencing
        intercept: 0.0,
        n_diffuse: d,
    })
}

#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// Predicted state means a_t.
    pub a: Vec<DVector<f64>>,
    /// Predicted state covariances P_t.
    pub p: Vec<DMatrix<f64>>,
    pub v: Vec<f64>,
    pub f: Vec<f64>,
    pub k: Vec<DVector<f64>>,
    /// Steps where F_t fell to zero with a consistent observation; the
    /// observation carries no information and is skipped.
    pub skipped: Vec<bool>,
    pub loglik: f64,
}

impl FilterOutput {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Filtered mean a_{t|t} = a_t + P_t Zᵀ F_t⁻¹ v_t.
    pub fn filtered_mean(&self, ssm: &StateSpaceModel, t: usize) -> DVector<f64> {
        if self.skipped[t] {
            return self.a[t].clone();
        }
        &self.a[t] + (&self.p[t] * &ssm.z) * (self.v[t] / self.f[t])
    }

    /// Filtered covariance P_{t|t} = P_t - P_t Zᵀ F_t⁻¹ Z P_t.
    pub fn filtered_cov(&self, ssm: &StateSpaceModel, t: usize) -> DMatrix<f64> {
        if self.skipped[t] {
            return self.p[t].clone();
        }
        let pz = &self.p[t] * &ssm.z;
        &self.p[t] - &pz * pz.transpose() / self.f[t]
    }

    /// Log-likelihood without the first `skip` prediction-error terms.
    pub fn loglik_from(&self, skip: usize) -> f64 {
        (skip..self.len())
            .filter(|&t| !self.skipped[t])
            .map(|t| -0.5 * (LN_2PI + self.f[t].ln() + self.v[t] * self.v[t] / self.f[t]))
            .sum()
    }
}

/// Runs the Kalman filter over `y`.
pub fn filter(ssm: &StateSpaceModel, series: &TimeSeries) -> Result<FilterOutput> {
    filter_values(ssm, series.values())
}

pub fn filter_values(ssm: &StateSpaceModel, y: &[f64]) -> Result<FilterOutput> {
    ssm.check()?;
    let n = y.len();
    let rqr = &ssm.r * &ssm.q * ssm.r.transpose();
    let mut out = FilterOutput {
        a: Vec::with_capacity(n),
        p: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        f: Vec::with_capacity(n),
        k: Vec::with_capacity(n),
        skipped: Vec::with_capacity(n),
        loglik: 0.0,
    };
    let mut a = ssm.a1.clone();
    let mut p = ssm.p1.clone();
    for (t, &yt) in y.iter().enumerate() {
        let v = yt - ssm.intercept - ssm.z.dot(&a);
        let pz = &p * &ssm.z;
        let f = ssm.z.dot(&pz) + ssm.h;
        let (a_next, p_next, k, skipped) = if f <= F_FLOOR {
            if v.abs() > 1e-8 * (1.0 + yt.abs()) {
                return Err(Error::FilterDegenerate { t, f });
            }
            let k = DVector::zeros(a.len());
            (&ssm.t * &a, &ssm.t * &p * ssm.t.transpose() + &rqr, k, true)
        } else {
            let k = &ssm.t * &pz / f;
            let att = &a + &pz * (v / f);
            let a_next = &ssm.t * att;
            let l = &ssm.t - &k * ssm.z.transpose();
            let p_next = &ssm.t * &p * l.transpose() + &rqr;
            out.loglik += -0.5 * (LN_2PI + f.ln() + v * v / f);
            (a_next, p_next, k, false)
        };
        out.a.push(a);
        out.p.push(p);
        out.v.push(v);
        out.f.push(f);
        out.k.push(k);
        out.skipped.push(skipped);
        a = a_next;
        p = (&p_next + p_next.transpose()) * 0.5;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SmootherOutput {
    pub alpha_hat: Vec<DVector<f64>>,
    /// Smoothed state covariances V_t.
    pub v: Vec<DMatrix<f64>>,
    /// `r[t]` holds r_{t-1}, the weighted sum of innovations from t onward.
    pub r: Vec<DVector<f64>>,
    /// `n[t]` holds N_{t-1}.
    pub n: Vec<DMatrix<f64>>,
    /// Smoothing errors u_t = F_t⁻¹ v_t - K_tᵀ r_t.
    pub u: Vec<f64>,
    /// Var(u_t) = F_t⁻¹ + K_tᵀ N_t K_t.
    pub d: Vec<f64>,
    /// Smoothed observation disturbances H u_t.
    pub eps_hat: Vec<f64>,
    /// Var(ε̂_t) = H² D_t, the standardizing variance of auxiliary residuals.
    pub eps_hat_var: Vec<f64>,
    /// Smoothed state disturbances Q Rᵀ r_t.
    pub eta_hat: Vec<DVector<f64>>,
}

impl SmootherOutput {
    /// Auxiliary observation residuals u_t / √D_t (equal to ε̂_t / √Var(ε̂_t)
    /// whenever H > 0).
    pub fn standardized_obs_residuals(&self) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.d)
            .map(|(u, d)| if *d > 0.0 { u / d.sqrt() } else { 0.0 })
            .collect()
    }

    /// Smoothed signal c + Z α̂_t.
    pub fn signal(&self, ssm: &StateSpaceModel) -> Vec<f64> {
        self.alpha_hat.iter().map(|a| ssm.intercept + ssm.z.dot(a)).collect()
    }
}

/// Fixed-interval smoother: backward recursions for r_t and N_t, smoothed
/// states and their variances, and disturbance smoothing.
pub fn smooth(ssm: &StateSpaceModel, fo: &FilterOutput) -> Result<SmootherOutput> {
    ssm.check()?;
    let n = fo.len();
    if fo.a.len() != n || fo.p.len() != n || fo.f.len() != n || fo.k.len() != n {
        return Err(Error::Input("filter output has mismatched lengths".into()));
    }
    let m = ssm.state_dim();
    if fo.a.first().is_some_and(|a| a.len() != m) {
        return Err(Error::Input("filter output does not match the model dimension".into()));
    }
    let qr = &ssm.q * ssm.r.transpose();
    let zzt = &ssm.z * ssm.z.transpose();
    let mut r = DVector::zeros(m);
    let mut nmat = DMatrix::zeros(m, m);
    let mut out = SmootherOutput {
        alpha_hat: vec![DVector::zeros(m); n],
        v: vec![DMatrix::zeros(m, m); n],
        r: vec![DVector::zeros(m); n],
        n: vec![DMatrix::zeros(m, m); n],
        u: vec![0.0; n],
        d: vec![0.0; n],
        eps_hat: vec![0.0; n],
        eps_hat_var: vec![0.0; n],
        eta_hat: vec![DVector::zeros(ssm.q.nrows()); n],
    };
    for t in (0..n).rev() {
        out.eta_hat[t] = &qr * &r;
        let (r_prev, n_prev, u, d) = if fo.skipped[t] {
            let r_prev = ssm.t.transpose() * &r;
            let n_prev = ssm.t.transpose() * &nmat * &ssm.t;
            (r_prev, n_prev, 0.0, 0.0)
        } else {
            let finv = 1.0 / fo.f[t];
            let k = &fo.k[t];
            let l = &ssm.t - k * ssm.z.transpose();
            let u = finv * fo.v[t] - k.dot(&r);
            let d = finv + (k.transpose() * &nmat * k)[(0, 0)];
            let r_prev = &ssm.z * (finv * fo.v[t]) + l.transpose() * &r;
            let n_prev = &zzt * finv + l.transpose() * &nmat * &l;
            (r_prev, n_prev, u, d)
        };
        let pt = &fo.p[t];
        out.alpha_hat[t] = &fo.a[t] + pt * &r_prev;
        let vt = pt - pt * &n_prev * pt;
        out.v[t] = (&vt + vt.transpose()) * 0.5;
        out.u[t] = u;
        out.d[t] = d;
        out.eps_hat[t] = ssm.h * u;
        out.eps_hat_var[t] = ssm.h * ssm.h * d;
        r = r_prev;
        nmat = (&n_prev + n_prev.transpose()) * 0.5;
        out.r[t] = r.clone();
        out.n[t] = nmat.clone();
    }
    Ok(out)
}

/// Prediction errors of a zero-mean stationary ARMA model with unit
/// innovation variance.
///
/// This is the likelihood hot path used by ARIMA fitting; it exploits the
/// companion structure (Z = e₁, H = 0) and stops updating the covariance
/// once it reaches its steady state.
#[derive(Debug, Clone)]
pub(crate) struct ArmaInnovations {
    pub v: Vec<f64>,
    pub f: Vec<f64>,
    /// Σ v_t² / F_t
    pub sum_sq: f64,
    /// Σ log F_t
    pub sum_log_f: f64,
    pub n: usize,
}

impl ArmaInnovations {
    /// Log-likelihood at innovation variance `sigma2`.
    pub fn loglik(&self, sigma2: f64) -> f64 {
        let n = self.n as f64;
        -0.5 * (n * LN_2PI + n * sigma2.ln() + self.sum_log_f + self.sum_sq / sigma2)
    }

    /// Maximum-likelihood innovation variance.
    pub fn sigma2_hat(&self) -> f64 {
        self.sum_sq / self.n as f64
    }
}

pub(crate) fn arma_innovations(ar: &[f64], ma: &[f64], w: &[f64], store: bool) -> Result<ArmaInnovations> {
    let p = ar.len();
    let m = arma_dim(p, ma.len());
    let ssm = arma_state_space(ar, ma, 1.0)?;
    // row-major copies
    let mut pm = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            pm[i * m + j] = ssm.p1[(i, j)];
        }
    }
    let mut rv = vec![0.0; m];
    rv[0] = 1.0;
    for (j, th) in ma.iter().enumerate() {
        rv[j + 1] = -th;
    }
    let phi = |i: usize| if i < p { ar[i] } else { 0.0 };

    let mut a = vec![0.0; m];
    let mut att = vec![0.0; m];
    let mut col = vec![0.0; m];
    let mut x = vec![0.0; m * m];
    let mut pn = vec![0.0; m * m];
    let mut steady = false;
    let mut out = ArmaInnovations {
        v: Vec::with_capacity(if store { w.len() } else { 0 }),
        f: Vec::with_capacity(if store { w.len() } else { 0 }),
        sum_sq: 0.0,
        sum_log_f: 0.0,
        n: w.len(),
    };
    for (t, &y) in w.iter().enumerate() {
        let v = y - a[0];
        let f = pm[0];
        if !(f > F_FLOOR) {
            return Err(Error::FilterDegenerate { t, f });
        }
        out.sum_sq += v * v / f;
        out.sum_log_f += f.ln();
        if store {
            out.v.push(v);
            out.f.push(f);
        }
        for i in 0..m {
            col[i] = pm[i * m];
            att[i] = a[i] + col[i] * v / f;
        }
        for i in 0..m {
            a[i] = phi(i) * att[0] + if i + 1 < m { att[i + 1] } else { 0.0 };
        }
        if steady {
            continue;
        }
        // P_{t|t} = P - c cᵀ / F, then T P_{t|t} Tᵀ + R Rᵀ
        for i in 0..m {
            for j in 0..m {
                pm[i * m + j] -= col[i] * col[j] / f;
            }
        }
        for i in 0..m {
            for j in 0..m {
                let below = if i + 1 < m { pm[(i + 1) * m + j] } else { 0.0 };
                x[i * m + j] = phi(i) * pm[j] + below;
            }
        }
        let mut delta = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let right = if j + 1 < m { x[i * m + j + 1] } else { 0.0 };
                let val = phi(j) * x[i * m] + right + rv[i] * rv[j];
                pn[i * m + j] = val;
            }
        }
        // pm holds P_{t|t}; recover P_t = P_{t|t} + c cᵀ / F for the
        // steady-state check
        for i in 0..m {
            for j in 0..m {
                let prev = pm[i * m + j] + col[i] * col[j] / f;
                delta = delta.max((pn[i * m + j] - prev).abs());
            }
        }
        std::mem::swap(&mut pm, &mut pn);
        if delta < 1e-14 {
            steady = true;
        }
    }
    Ok(out)
}

/// Which standardized residual the Kalman detector thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KalmanResidual {
    /// Smoothed observation disturbances, standardized.
    #[default]
    Auxiliary,
    /// One-step innovations v_t / √F_t.
    Innovations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanDetectOptions {
    pub k_sd: f64,
    pub residual: KalmanResidual,
    /// Lower bound on H as a fraction of the series variance.
    pub min_obs_noise_fraction: f64,
    /// Large finite variance for integration components, as a multiple of
    /// the series variance.
    pub diffuse_factor: f64,
    pub selection: SelectionOptions,
}

impl Default for KalmanDetectOptions {
    fn default() -> Self {
        Self {
            k_sd: 2.0,
            residual: KalmanResidual::Auxiliary,
            min_obs_noise_fraction: 1e-6,
            diffuse_factor: 1e7,
            selection: SelectionOptions::default(),
        }
    }
}

/// Maximizes the state-space likelihood over the observation variance H
/// alone, with the ARIMA signal parameters held fixed.
pub fn estimate_obs_noise(model: &ArimaModel, y: &[f64], opts: &KalmanDetectOptions) -> Result<f64> {
    let var = variance(y);
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance("series has zero variance".into()));
    }
    let lo = (opts.min_obs_noise_fraction * var).ln();
    let hi = var.ln();
    let mut base = to_state_space(model, 0.0, opts.diffuse_factor * var)?;
    let skip = base.n_diffuse;
    let mut objective = |log_h: f64| {
        base.h = log_h.exp();
        match filter_values(&base, y) {
            Ok(fo) => -fo.loglik_from(skip),
            Err(_) => f64::INFINITY,
        }
    };
    let (best, value) = golden_section(&mut objective, lo, hi, 1e-3);
    if !value.is_finite() {
        return Err(Error::FilterDegenerate { t: 0, f: 0.0 });
    }
    Ok(best.exp())
}

/// Selects and fits an ARIMA model by AIC, smooths the series through
/// its state-space form with estimated observation noise, and flags
/// points whose standardized residual exceeds `k_sd` residual SDs.
pub fn detect_spikes_kalman(series: &TimeSeries, k_sd: f64) -> Result<DetectionResult> {
    let opts = KalmanDetectOptions {
        k_sd,
        ..Default::default()
    };
    let fit = select_order_with(series, &opts.selection)?;
    detect_spikes_kalman_fitted(series, &fit.model, &opts)
}

pub fn detect_spikes_kalman_fitted(
    series: &TimeSeries,
    model: &ArimaModel,
    opts: &KalmanDetectOptions,
) -> Result<DetectionResult> {
    let y = series.values();
    let h = estimate_obs_noise(model, y, opts)?;
    let ssm = to_state_space(model, h, opts.diffuse_factor * variance(y))?;
    let fo = filter_values(&ssm, y)?;
    let so = smooth(&ssm, &fo)?;
    let mut residuals = match opts.residual {
        KalmanResidual::Auxiliary => so.standardized_obs_residuals(),
        KalmanResidual::Innovations => {
            fo.v.iter()
                .zip(&fo.f)
                .map(|(v, f)| if *f > F_FLOOR { v / f.sqrt() } else { 0.0 })
                .collect()
        }
    };
    // Residuals of the diffuse start carry no information.
    for r in residuals.iter_mut().take(ssm.n_diffuse) {
        *r = 0.0;
    }
    let (threshold_value, spikes) = upper_threshold(&residuals, opts.k_sd, 1.0);
    Ok(DetectionResult {
        method: Method::Kalman,
        spikes,
        fitted: so.signal(&ssm),
        residuals,
        threshold_value,
        warnings: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn local_level(q: f64, h: f64, a1: f64, p1: f64) -> StateSpaceModel {
        StateSpaceModel {
            t: DMatrix::from_element(1, 1, 1.0),
            z: DVector::from_element(1, 1.0),
            r: DMatrix::from_element(1, 1, 1.0),
            q: DMatrix::from_element(1, 1, q),
            h,
            a1: DVector::from_element(1, a1),
            p1: DMatrix::from_element(1, 1, p1),
            intercept: 0.0,
            n_diffuse: 0,
        }
    }

    #[test]
    fn ar1_state_space() {
        let m = ArimaModel::new(vec![0.5], 0, vec![], 0.0, 1.0).unwrap();
        let ssm = to_state_space(&m, 0.0, 1.0).unwrap();
        assert_eq!(ssm.state_dim(), 1);
        assert_abs_diff_eq!(ssm.t[(0, 0)], 0.5);
        assert_abs_diff_eq!(ssm.z[0], 1.0);
        assert_abs_diff_eq!(ssm.q[(0, 0)], 1.0);
        assert_abs_diff_eq!(ssm.p1[(0, 0)], 4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn white_noise_state_space() {
        let m = ArimaModel::white_noise(0.0, 2.5);
        let ssm = to_state_space(&m, 0.0, 1.0).unwrap();
        assert_eq!(ssm.state_dim(), 1);
        assert_abs_diff_eq!(ssm.t[(0, 0)], 0.0);
        assert_abs_diff_eq!(ssm.p1[(0, 0)], 2.5, epsilon = 1e-12);
    }

    #[test]
    fn ma1_lyapunov_matches_autocovariances() {
        let theta = 0.794;
        let m = ArimaModel::new(vec![], 0, vec![theta], 0.0, 1.0).unwrap();
        let ssm = to_state_space(&m, 0.0, 1.0).unwrap();
        assert_eq!(ssm.state_dim(), 2);
        // γ₀ = σ²(1+θ²) and γ₁ = Cov(α_{t+1,0}, α_{t,0}) = (T P)_{00} = -σ²θ
        assert_abs_diff_eq!(ssm.p1[(0, 0)], 1.0 + theta * theta, epsilon = 1e-12);
        let tp = &ssm.t * &ssm.p1;
        assert_abs_diff_eq!(tp[(0, 0)], -theta, epsilon = 1e-12);
    }

    #[test]
    fn integrated_state_space_shape() {
        let m = ArimaModel::new(vec![0.5306], 1, vec![0.9504], 0.0, 1.0).unwrap();
        let ssm = to_state_space(&m, 0.3, 1e6).unwrap();
        assert_eq!(ssm.state_dim(), 3);
        assert_eq!(ssm.n_diffuse, 1);
        assert_eq!(ssm.z.as_slice(), &[1.0, 1.0, 0.0]);
        assert_abs_diff_eq!(ssm.p1[(0, 0)], 1e6);
        assert_abs_diff_eq!(ssm.t[(0, 0)], 1.0);
        assert_abs_diff_eq!(ssm.t[(0, 1)], 1.0);
        assert_abs_diff_eq!(ssm.t[(1, 1)], 0.5306);
    }

    #[test]
    fn deterministic_local_level_has_zero_innovations() {
        let y = vec![3.0; 10];
        let ssm = local_level(0.0, 0.0, 3.0, 0.0);
        let fo = filter_values(&ssm, &y).unwrap();
        assert!(fo.v.iter().all(|v| *v == 0.0));
        let ssm = local_level(0.0, 0.0, 3.0, 0.0);
        assert!(filter_values(&ssm, &[3.0, 4.0]).is_err());
    }

    #[test]
    fn huge_observation_noise_kills_gain() {
        let ssm = local_level(1.0, 1e12, 0.0, 1.0);
        let y: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let fo = filter_values(&ssm, &y).unwrap();
        for k in &fo.k {
            assert!(k[0].abs() < 1e-6);
        }
    }

    #[test]
    fn smoother_last_point_equals_filtered() {
        let m = ArimaModel::new(vec![0.6], 0, vec![0.3], 0.0, 1.0).unwrap();
        let ssm = to_state_space(&m, 0.2, 1.0).unwrap();
        let y = [0.3, -1.0, 0.4, 2.0, 0.1, -0.7];
        let fo = filter_values(&ssm, &y).unwrap();
        let so = smooth(&ssm, &fo).unwrap();
        let last = y.len() - 1;
        let att = fo.filtered_mean(&ssm, last);
        for i in 0..ssm.state_dim() {
            assert_abs_diff_eq!(so.alpha_hat[last][i], att[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn static_state_smooths_to_constant() {
        let ssm = local_level(0.0, 1.0, 0.0, 10.0);
        let y = [1.0, 3.0, -2.0, 0.5, 4.0];
        let fo = filter_values(&ssm, &y).unwrap();
        let so = smooth(&ssm, &fo).unwrap();
        for a in &so.alpha_hat {
            assert_abs_diff_eq!(a[0], so.alpha_hat[0][0], epsilon = 1e-12);
        }
    }

    #[test]
    fn smoother_rejects_mismatched_output() {
        let ssm = local_level(1.0, 1.0, 0.0, 1.0);
        let mut fo = filter_values(&ssm, &[1.0, 2.0]).unwrap();
        fo.k.pop();
        assert!(smooth(&ssm, &fo).is_err());
    }

    #[test]
    fn fast_path_matches_general_filter() {
        let m = ArimaModel::new(vec![0.5, -0.2], 0, vec![0.4, 0.1], 0.0, 1.7).unwrap();
        let y: Vec<f64> = (0..40).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let ssm = to_state_space(&m, 0.0, 1.0).unwrap();
        let fo = filter_values(&ssm, &y).unwrap();
        let inn = arma_innovations(&m.ar, &m.ma, &y, true).unwrap();
        assert_abs_diff_eq!(inn.loglik(m.sigma2), fo.loglik, epsilon = 1e-10);
        for t in 0..y.len() {
            assert_abs_diff_eq!(inn.v[t], fo.v[t], epsilon = 1e-10);
        }
    }
}
