//! Brute-force Gaussian oracles shared by the integration tests: exact
//! ARMA autocovariances and the joint distribution of states and
//! observations of a state-space model.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spikescan::arima::ArimaModel;
use spikescan::kalman::StateSpaceModel;

pub const TOL: f64 = 1e-8;

/// Coefficients of Π(1 - r_i B) as `1 - c₁B - …`, from reciprocal roots
/// given as real values or complex pairs (modulus, angle).
pub fn poly_from_roots(order: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match order {
        0 => vec![],
        1 => vec![rng.random_range(-0.75..0.75)],
        _ => {
            if rng.random_bool(0.5) {
                let (r1, r2): (f64, f64) = (rng.random_range(-0.75..0.75), rng.random_range(-0.75..0.75));
                vec![r1 + r2, -r1 * r2]
            } else {
                let (r, w): (f64, f64) = (rng.random_range(0.1..0.75), rng.random_range(0.0..std::f64::consts::PI));
                vec![2.0 * r * w.cos(), -r * r]
            }
        }
    }
}

/// γ_0..γ_{n-1} from ψ weights, truncated far past numerical relevance.
pub fn autocovariances(ar: &[f64], ma: &[f64], sigma2: f64, n: usize) -> Vec<f64> {
    let k = 4000;
    let mut psi = vec![0.0; k];
    psi[0] = 1.0;
    for j in 1..k {
        let mut v = if j <= ma.len() { -ma[j - 1] } else { 0.0 };
        for (i, phi) in ar.iter().enumerate() {
            if j > i {
                v += phi * psi[j - i - 1];
            }
        }
        psi[j] = v;
    }
    (0..n)
        .map(|lag| sigma2 * (0..k - lag).map(|j| psi[j] * psi[j + lag]).sum::<f64>())
        .collect()
}

pub fn mvn_loglik(cov: &DMatrix<f64>, dev: &DVector<f64>) -> f64 {
    let n = dev.len() as f64;
    let chol = cov.clone().cholesky().expect("positive definite");
    let logdet = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let quad = dev.dot(&chol.solve(dev));
    -0.5 * (n * (2.0 * std::f64::consts::PI).ln() + logdet + quad)
}

/// Joint linear representation of states and observations in terms of the
/// independent blocks (α₁, η₁..η_{n-1}, ε₁..ε_n).
pub struct Joint {
    /// Row block t (m rows) maps the blocks to α_t - E α_t.
    pub states: DMatrix<f64>,
    pub obs: DMatrix<f64>,
    pub block_cov: DMatrix<f64>,
    pub m: usize,
}

pub fn stationary_p1(ssm: &StateSpaceModel) -> DMatrix<f64> {
    let w = &ssm.r * &ssm.q * ssm.r.transpose();
    let mut p = DMatrix::zeros(w.nrows(), w.ncols());
    let mut tk = DMatrix::identity(w.nrows(), w.ncols());
    for _ in 0..3000 {
        p += &tk * &w * tk.transpose();
        tk = &ssm.t * tk;
    }
    p
}

pub fn joint(ssm: &StateSpaceModel, n: usize, p1: &DMatrix<f64>) -> Joint {
    let m = ssm.state_dim();
    let r = ssm.r.ncols();
    let dim = m + (n - 1) * r + n;
    let mut states = DMatrix::zeros(n * m, dim);
    let mut obs = DMatrix::zeros(n, dim);
    let mut tpow = vec![DMatrix::identity(m, m)];
    for k in 1..n {
        tpow.push(&ssm.t * &tpow[k - 1]);
    }
    for t in 0..n {
        states.view_mut((t * m, 0), (m, m)).copy_from(&tpow[t]);
        for s in 0..t {
            // η_s enters α_t through T^{t-1-s} R
            let block = &tpow[t - 1 - s] * &ssm.r;
            states.view_mut((t * m, m + s * r), (m, r)).copy_from(&block);
        }
        let row = ssm.z.transpose() * states.view((t * m, 0), (m, dim));
        obs.row_mut(t).copy_from(&row);
        obs[(t, m + (n - 1) * r + t)] = 1.0;
    }
    let mut block_cov = DMatrix::zeros(dim, dim);
    block_cov.view_mut((0, 0), (m, m)).copy_from(p1);
    for s in 0..n - 1 {
        block_cov.view_mut((m + s * r, m + s * r), (r, r)).copy_from(&ssm.q);
    }
    for t in 0..n {
        let i = m + (n - 1) * r + t;
        block_cov[(i, i)] = ssm.h;
    }
    Joint {
        states,
        obs,
        block_cov,
        m,
    }
}

impl Joint {
    /// E[α_t | y_1..y_k] and Cov[α_t | y_1..y_k] (k may be 0).
    pub fn condition(&self, t: usize, k: usize, y_dev: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let m = self.m;
        let a = self.states.rows(t * m, m).into_owned();
        let prior = &a * &self.block_cov * a.transpose();
        if k == 0 {
            return (DVector::zeros(m), prior);
        }
        let b = self.obs.rows(0, k).into_owned();
        let syy = &b * &self.block_cov * b.transpose();
        let say = &a * &self.block_cov * b.transpose();
        let inv = syy.cholesky().expect("observations positive definite").inverse();
        let gain = &say * inv;
        let mean = &gain * y_dev.rows(0, k);
        let cov = prior - &gain * say.transpose();
        (mean, cov)
    }

    pub fn obs_cov(&self) -> DMatrix<f64> {
        &self.obs * &self.block_cov * self.obs.transpose()
    }
}

pub fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

pub struct Case {
    pub model: ArimaModel,
    pub h: f64,
    pub y: Vec<f64>,
}

pub fn cases() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut out = Vec::new();
    for p in 0..=2 {
        for q in 0..=2 {
            for &n in &[1usize, 2, 3, 7, 20] {
                for with_noise in [false, true] {
                    let ar = poly_from_roots(p, &mut rng);
                    let ma = poly_from_roots(q, &mut rng);
                    let sigma2 = rng.random_range(0.5..3.0);
                    let mean = if rng.random_bool(0.5) { 0.0 } else { 12.5 };
                    let model = ArimaModel::new(ar, 0, ma, mean, sigma2).unwrap();
                    let h = if with_noise { 0.7 * sigma2 } else { 0.0 };
                    let y: Vec<f64> = (0..n).map(|_| mean + 2.0 * rng.random::<f64>() - 1.0).collect();
                    out.push(Case { model, h, y });
                }
            }
        }
    }
    out
}
