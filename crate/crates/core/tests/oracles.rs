//! Filter, smoother and likelihood against brute-force Gaussian
//! conditioning on the joint distribution of states and observations.

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spikescan::arima::{loglikelihood, ArimaModel};
use spikescan::kalman::{filter_values, smooth, to_state_space};
use spikescan::TimeSeries;

#[test]
fn exact_loglik_matches_toeplitz_gaussian() {
    for c in cases().iter().filter(|c| c.h == 0.0) {
        let n = c.y.len();
        let g = autocovariances(&c.model.ar, &c.model.ma, c.model.sigma2, n);
        let cov = DMatrix::from_fn(n, n, |i, j| g[i.abs_diff(j)]);
        let dev = DVector::from_iterator(n, c.y.iter().map(|v| v - c.model.mean));
        let expected = mvn_loglik(&cov, &dev);
        let got = loglikelihood(&c.model, &TimeSeries::from_values(c.y.clone()).unwrap()).unwrap();
        assert!((got - expected).abs() < TOL, "{:?} n={n}: {got} vs {expected}", c.model);
    }
}

#[test]
fn lyapunov_initialization_matches_series_sum() {
    for c in cases() {
        let ssm = to_state_space(&c.model, c.h, 1e7).unwrap();
        let p1 = stationary_p1(&ssm);
        assert!((&ssm.p1 - &p1).amax() < 1e-10, "{:?}", c.model);
    }
}

#[test]
fn filter_and_smoother_match_gaussian_conditioning() {
    for c in cases() {
        let n = c.y.len();
        let ssm = to_state_space(&c.model, c.h, 1e7).unwrap();
        let p1 = stationary_p1(&ssm);
        let j = joint(&ssm, n, &p1);
        let y_dev = DVector::from_iterator(n, c.y.iter().map(|v| v - ssm.intercept));

        let fo = filter_values(&ssm, &c.y).unwrap();
        let so = smooth(&ssm, &fo).unwrap();
        let expected_ll = mvn_loglik(&j.obs_cov(), &y_dev);
        assert!(
            (fo.loglik - expected_ll).abs() < TOL,
            "{:?}: {} vs {expected_ll}",
            c.model,
            fo.loglik
        );

        for t in 0..n {
            let (pred_mean, pred_cov) = j.condition(t, t, &y_dev);
            assert!(
                max_abs_diff(&fo.a[t], &pred_mean) < TOL,
                "predicted mean t={t} {:?}",
                c.model
            );
            assert!((&fo.p[t] - &pred_cov).amax() < TOL, "predicted cov t={t}");
            let (filt_mean, _) = j.condition(t, t + 1, &y_dev);
            assert!(
                max_abs_diff(&fo.filtered_mean(&ssm, t), &filt_mean) < TOL,
                "filtered mean t={t}"
            );
            let (sm_mean, sm_cov) = j.condition(t, n, &y_dev);
            assert!(
                max_abs_diff(&so.alpha_hat[t], &sm_mean) < TOL,
                "smoothed mean t={t} {:?}",
                c.model
            );
            assert!((&so.v[t] - &sm_cov).amax() < TOL, "smoothed cov t={t}");
        }
    }
}

#[test]
fn smoothed_variance_below_predicted() {
    for c in cases() {
        let ssm = to_state_space(&c.model, c.h, 1e7).unwrap();
        let fo = filter_values(&ssm, &c.y).unwrap();
        let so = smooth(&ssm, &fo).unwrap();
        for t in 0..c.y.len() {
            let diff = &fo.p[t] - &so.v[t];
            let sym = (&diff + diff.transpose()) * 0.5;
            let min_eig = sym.symmetric_eigenvalues().min();
            assert!(min_eig > -1e-9, "P_t - V_t not PSD at t={t}: {min_eig}");
        }
    }
}

#[test]
fn loglik_invariant_to_time_reversal() {
    for c in cases().iter().filter(|c| c.h == 0.0) {
        let fwd = TimeSeries::from_values(c.y.clone()).unwrap();
        let rev = TimeSeries::from_values(c.y.iter().rev().copied().collect()).unwrap();
        let a = loglikelihood(&c.model, &fwd).unwrap();
        let b = loglikelihood(&c.model, &rev).unwrap();
        assert!((a - b).abs() < TOL, "{a} vs {b}");
    }
}

#[test]
fn integrated_loglik_equals_differenced_arma() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..10 {
        let ar = poly_from_roots(2, &mut rng);
        let ma = poly_from_roots(1, &mut rng);
        let integrated = ArimaModel::new(ar.clone(), 1, ma.clone(), 0.0, 1.3).unwrap();
        let y: Vec<f64> = (0..20)
            .scan(10.0, |acc, _| {
                *acc += rng.random::<f64>() - 0.5;
                Some(*acc)
            })
            .collect();
        let w: Vec<f64> = y.windows(2).map(|p| p[1] - p[0]).collect();
        let g = autocovariances(&ar, &ma, 1.3, w.len());
        let cov = DMatrix::from_fn(w.len(), w.len(), |i, j| g[i.abs_diff(j)]);
        let expected = mvn_loglik(&cov, &DVector::from_vec(w));
        let got = loglikelihood(&integrated, &TimeSeries::from_values(y).unwrap()).unwrap();
        assert!((got - expected).abs() < TOL, "{got} vs {expected}");
    }
}
