use std::collections::HashMap;

use super::difference;
use super::fit::{fit_with, FitOptions, FitReport};
use crate::error::{Error, Result};
use crate::series::{mean, TimeSeries};

/// 5% critical value of the level-stationarity KPSS test.
pub const KPSS_CRITICAL_5PCT: f64 = 0.463;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOptions {
    pub max_p: usize,
    pub max_q: usize,
    pub max_d: usize,
    /// Cap on model fits performed by the stepwise search.
    pub max_evals: usize,
    /// Candidates with an AR or MA root closer to the unit circle than
    /// this are discarded.
    pub min_root_modulus: f64,
    pub kpss_critical: f64,
    pub fit: FitOptions,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self {
            max_p: 5,
            max_q: 5,
            max_d: 2,
            max_evals: 94,
            min_root_modulus: 1.01,
            kpss_critical: KPSS_CRITICAL_5PCT,
            fit: FitOptions::default(),
        }
    }
}

/// KPSS level-stationarity statistic with a Bartlett long-run variance
/// using `floor(4 (n/100)^{1/4})` lags. `None` for a constant series.
pub fn kpss_statistic(y: &[f64]) -> Option<f64> {
    let n = y.len();
    if n < 2 {
        return None;
    }
    let mu = mean(y);
    let e: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let mut s = 0.0;
    let mut eta = 0.0;
    for v in &e {
        s += v;
        eta += s * s;
    }
    let nf = n as f64;
    eta /= nf * nf;
    let lags = (4.0 * (nf / 100.0).powf(0.25)).floor() as usize;
    let mut lrv = e.iter().map(|v| v * v).sum::<f64>() / nf;
    for lag in 1..=lags.min(n - 1) {
        let w = 1.0 - lag as f64 / (lags as f64 + 1.0);
        let cov: f64 = (lag..n).map(|t| e[t] * e[t - lag]).sum();
        lrv += 2.0 * w * cov / nf;
    }
    (lrv > 0.0).then(|| eta / lrv)
}

/// Smallest number of differences (up to `max_d`) after which the KPSS
/// test no longer rejects stationarity at `critical`.
pub fn ndiffs(y: &[f64], max_d: usize, critical: f64) -> usize {
    let mut w = y.to_vec();
    for d in 0..max_d {
        match kpss_statistic(&w) {
            Some(stat) if stat >= critical => {}
            _ => return d,
        }
        w = difference(&w, 1);
        if w.len() < 3 {
            return d + 1;
        }
    }
    max_d
}

type Key = (usize, usize, bool);

/// Automatic ARIMA order selection: KPSS-chosen differencing followed by a
/// stepwise AIC search over (p, q) and the mean term.
pub fn select_order(series: &TimeSeries) -> Result<FitReport> {
    select_order_with(series, &SelectionOptions::default())
}

pub fn select_order_with(series: &TimeSeries, opts: &SelectionOptions) -> Result<FitReport> {
    let y = series.values();
    if y.len() < 20 {
        return Err(Error::Input(format!(
            "order selection needs at least 20 observations, got {}",
            y.len()
        )));
    }
    let d = ndiffs(y, opts.max_d, opts.kpss_critical);
    let allow_mean = d == 0;

    let mut tried: HashMap<Key, Option<FitReport>> = HashMap::new();
    let mut failures: Vec<String> = Vec::new();
    let mut evaluate = |key: Key, tried: &mut HashMap<Key, Option<FitReport>>| -> Option<FitReport> {
        if let Some(r) = tried.get(&key) {
            return r.clone();
        }
        let (p, q, mean) = key;
        let r = match fit_with(y, p, d, q, mean, &opts.fit) {
            Ok(r) if r.model.min_root_modulus() < opts.min_root_modulus => {
                failures.push(format!("ARIMA({p},{d},{q}): root too close to the unit circle"));
                None
            }
            Ok(r) => Some(r),
            Err(e) => {
                failures.push(format!(
                    "ARIMA({p},{d},{q}){}: {e}",
                    if mean { " with mean" } else { "" }
                ));
                None
            }
        };
        tried.insert(key, r.clone());
        r
    };

    let mut best: Option<FitReport> = None;
    let initial = [(2, 2), (0, 0), (1, 0), (0, 1)];
    for (p, q) in initial {
        let key = (p.min(opts.max_p), q.min(opts.max_q), allow_mean);
        if let Some(r) = evaluate(key, &mut tried) {
            if best.as_ref().is_none_or(|b| r.aic < b.aic) {
                best = Some(r);
            }
        }
    }

    'search: while let Some(incumbent) = best.clone() {
        let (p, q) = (incumbent.model.p() as i64, incumbent.model.q() as i64);
        let mean = incumbent.model.include_mean;
        let mut neighbors: Vec<Key> = [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, 1), (-1, 1), (1, -1)]
            .iter()
            .map(|(dp, dq)| (p + dp, q + dq))
            .filter(|&(np, nq)| np >= 0 && nq >= 0 && np <= opts.max_p as i64 && nq <= opts.max_q as i64)
            .map(|(np, nq)| (np as usize, nq as usize, mean))
            .collect();
        if allow_mean {
            neighbors.push((p as usize, q as usize, !mean));
        }
        for key in neighbors {
            if tried.contains_key(&key) {
                continue;
            }
            if tried.len() >= opts.max_evals {
                break 'search;
            }
            if let Some(r) = evaluate(key, &mut tried) {
                if r.aic < incumbent.aic {
                    best = Some(r);
                    continue 'search;
                }
            }
        }
        break;
    }
    best.ok_or(Error::Selection { failures })
}
