//! Monte-Carlo comparison of the detectors.
//!
//! Each replicate simulates a series from an ARIMA generator, inserts
//! spikes at random time points, runs the requested detectors and scores
//! them against the inserted set. Replicates are independent and run in
//! parallel; results are reduced in replicate order, so reports do not
//! depend on the number of worker threads.
//!
//! Replicate `r` of a cell draws from a ChaCha8 stream seeded with
//!
//! ```text
//! child = mix(mix(seed ^ cell_hash) ^ r)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer and `cell_hash` is the 64-bit
//! FNV-1a hash of `"{generator}|{series_length}|{n_spikes}|{magnitude}"`
//! (magnitude as the hex bits of the f64). Methods and thresholds are not
//! part of the hash, so runs that differ only in those see the same
//! simulated series.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arima::ArimaModel;
use crate::error::{Error, Result};
use crate::report::{run_methods, DetectSettings};
use crate::series::{mean, score, std_dev, ConfusionCounts, Method, SpikeSet, TimeSeries};

/// Series length the generators are calibrated for (eight years of months).
pub const CALIBRATION_LENGTH: usize = 96;

/// Fraction of failed replicates above which a cell is flagged.
pub const FAILURE_FLAG_FRACTION: f64 = 0.05;

const FIXTURES: &str = include_str!("../data/generators.csv");

/// An ARIMA model with its innovation variance calibrated so simulated
/// series have a given mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub label: String,
    pub model: ArimaModel,
    pub target_mean: f64,
    pub target_sd: f64,
}

impl Generator {
    /// Builds a generator from unit-free coefficients.
    ///
    /// For `d = 0` the model mean is `mean` and σ² makes the stationary SD
    /// equal `sd`. For `d > 0` the level series starts at `mean` with no
    /// drift and σ² makes the expected sample variance over
    /// [`CALIBRATION_LENGTH`] points equal `sd²`.
    pub fn calibrate(
        name: impl Into<String>,
        label: impl Into<String>,
        ar: Vec<f64>,
        d: usize,
        ma: Vec<f64>,
        mean: f64,
        sd: f64,
    ) -> Result<Self> {
        if !(sd > 0.0) || !mean.is_finite() || !sd.is_finite() {
            return Err(Error::Input(format!(
                "generator needs finite mean and positive SD, got {mean}, {sd}"
            )));
        }
        let model_mean = if d == 0 { mean } else { 0.0 };
        let unit = ArimaModel::new(ar, d, ma, model_mean, 1.0)?;
        let unit_var = if d == 0 {
            unit.stationary_variance()?
        } else {
            expected_sample_variance(&unit, CALIBRATION_LENGTH)?
        };
        let model = ArimaModel {
            sigma2: sd * sd / unit_var,
            ..unit
        };
        Ok(Self {
            name: name.into(),
            label: label.into(),
            model,
            target_mean: mean,
            target_sd: sd,
        })
    }

    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<TimeSeries> {
        TimeSeries::from_values(self.model.simulate(n, self.target_mean, rng)?)
    }
}

/// Expected sample variance of `n` consecutive simulated values, from the
/// exact covariance of the (integrated) process.
pub fn expected_sample_variance(model: &ArimaModel, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Input("sample variance needs at least 2 points".into()));
    }
    let gamma = model.autocovariances(n - 1)?;
    let mut cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    let cumsum = DMatrix::from_fn(n, n, |i, j| if j <= i { 1.0 } else { 0.0 });
    for _ in 0..model.d {
        cov = &cumsum * cov * cumsum.transpose();
    }
    let nf = n as f64;
    Ok((cov.trace() - cov.sum() / nf) / (nf - 1.0))
}

/// Parses generator definitions with the header
/// `name,label,d,ar,ma,mean,sd`; `ar` and `ma` hold space-separated
/// coefficients in the `1 - c₁B - …` convention and may be empty.
pub fn parse_generators(text: &str) -> Result<Vec<Generator>> {
    #[derive(Deserialize)]
    struct Row {
        name: String,
        label: String,
        d: usize,
        ar: String,
        ma: String,
        mean: f64,
        sd: f64,
    }
    let coeffs = |s: &str, line: u64| -> Result<Vec<f64>> {
        s.split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Ingest(format!("line {line}: bad coefficient '{v}'")))
            })
            .collect()
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.deserialize::<Row>() {
        let row = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Ingest(format!("line {line}: {e}"))
        })?;
        let line = out.len() as u64 + 2;
        let g = Generator::calibrate(
            row.name,
            row.label,
            coeffs(&row.ar, line)?,
            row.d,
            coeffs(&row.ma, line)?,
            row.mean,
            row.sd,
        )
        .map_err(|e| Error::Ingest(format!("line {line}: {e}")))?;
        out.push(g);
    }
    if out.is_empty() {
        return Err(Error::Ingest("no generator rows".into()));
    }
    Ok(out)
}

/// The nine city models shipped with the crate.
pub fn fixtures() -> Vec<Generator> {
    parse_generators(FIXTURES).expect("bundled generator table is valid")
}

pub fn fixture(name: &str) -> Result<Generator> {
    let all = fixtures();
    let key = name.trim().to_ascii_lowercase().replace([' ', '-'], "_");
    all.iter()
        .find(|g| g.name == key)
        .cloned()
        .ok_or_else(|| Error::UnknownGenerator {
            name: name.to_string(),
            available: all.iter().map(|g| g.name.clone()).collect(),
        })
}

/// Adds `magnitude_fraction × mean(series)` at `n_spikes` distinct
/// uniformly chosen indices.
pub fn insert_spikes<R: Rng + ?Sized>(
    series: &TimeSeries,
    n_spikes: usize,
    magnitude_fraction: f64,
    rng: &mut R,
) -> Result<(TimeSeries, SpikeSet)> {
    let n = series.len();
    if n_spikes > n {
        return Err(Error::Input(format!("cannot insert {n_spikes} spikes into {n} points")));
    }
    let bump = magnitude_fraction * series.mean();
    let spikes = SpikeSet::new(sample(rng, n, n_spikes).into_vec(), n)?;
    let mut values = series.values().to_vec();
    for &i in spikes.indices() {
        values[i] += bump;
    }
    Ok((series.with_values(values)?, spikes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub generator: Generator,
    pub series_length: usize,
    pub n_spikes: usize,
    pub magnitude_fraction: f64,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// k of the residual-threshold rules.
    pub threshold_k: f64,
    /// Critical value of the outlier search.
    pub critical_value: f64,
}

impl SimulationConfig {
    pub fn new(generator: Generator, n_spikes: usize, magnitude_fraction: f64, replicates: usize, seed: u64) -> Self {
        Self {
            generator,
            series_length: CALIBRATION_LENGTH,
            n_spikes,
            magnitude_fraction,
            replicates,
            seed,
            methods: Method::ALL.to_vec(),
            threshold_k: 2.0,
            critical_value: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Input(m));
        if self.series_length < 20 {
            return bad(format!(
                "series length {} is below the minimum of 20",
                self.series_length
            ));
        }
        if self.n_spikes >= self.series_length {
            return bad(format!(
                "{} spikes do not fit in {} points",
                self.n_spikes, self.series_length
            ));
        }
        if !(self.magnitude_fraction >= 0.0) || !self.magnitude_fraction.is_finite() {
            return bad(format!("magnitude {} must be non-negative", self.magnitude_fraction));
        }
        if self.replicates == 0 {
            return bad("at least one replicate is required".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if !(self.threshold_k > 0.0) || !(self.critical_value > 0.0) {
            return bad("thresholds must be positive".into());
        }
        Ok(())
    }

    pub fn cell_hash(&self) -> u64 {
        let key = format!(
            "{}|{}|{}|{:x}",
            self.generator.name,
            self.series_length,
            self.n_spikes,
            self.magnitude_fraction.to_bits()
        );
        fnv1a(key.as_bytes())
    }

    pub fn replicate_seed(&self, replicate: usize) -> u64 {
        splitmix64(splitmix64(self.seed ^ self.cell_hash()) ^ replicate as u64)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Outcome of one replicate: per configured method, the confusion counts
/// or `None` when the detector failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub inserted: SpikeSet,
    pub results: Vec<(Method, Option<ConfusionCounts>)>,
    pub detected: Vec<(Method, Option<SpikeSet>)>,
}

/// Runs replicate `replicate` of the cell. ARIMA-based methods share one
/// order selection on the spiked series.
pub fn run_replicate(config: &SimulationConfig, replicate: usize) -> Result<ReplicateOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.replicate_seed(replicate));
    let clean = config.generator.simulate(config.series_length, &mut rng)?;
    let (series, inserted) = insert_spikes(&clean, config.n_spikes, config.magnitude_fraction, &mut rng)?;
    let n = series.len();

    let settings = DetectSettings {
        threshold_k: config.threshold_k,
        critical_value: config.critical_value,
    };
    let mut results = Vec::with_capacity(config.methods.len());
    let mut detected = Vec::with_capacity(config.methods.len());
    for (method, r) in run_methods(&series, &config.methods, &settings) {
        let found = r.ok().map(|r| r.spikes);
        let counts = found.as_ref().map(|s| score(&inserted, s, n)).transpose()?;
        results.push((method, counts));
        detected.push((method, found));
    }
    Ok(ReplicateOutcome {
        inserted,
        results,
        detected,
    })
}

/// One report line: a method's performance in one cell. Means are
/// replicate (macro) averages in [0, 1]; `None` when undefined for every
/// replicate, e.g. sensitivity with no inserted spikes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub generator: String,
    pub method: Method,
    pub magnitude: f64,
    pub n_spikes: usize,
    pub replicates: usize,
    pub mean_sensitivity: Option<f64>,
    pub se_sensitivity: Option<f64>,
    pub mean_specificity: Option<f64>,
    pub se_specificity: Option<f64>,
    pub failures: usize,
}

impl ReportRow {
    pub fn is_flagged(&self) -> bool {
        self.failures as f64 > FAILURE_FLAG_FRACTION * self.replicates as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub configs: Vec<ConfigEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub generator: Generator,
    pub series_length: usize,
    pub n_spikes: usize,
    pub magnitude: f64,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub threshold_k: f64,
    pub critical_value: f64,
}

impl From<&SimulationConfig> for ConfigEcho {
    fn from(c: &SimulationConfig) -> Self {
        Self {
            generator: c.generator.clone(),
            series_length: c.series_length,
            n_spikes: c.n_spikes,
            magnitude: c.magnitude_fraction,
            replicates: c.replicates,
            seed: c.seed,
            methods: c.methods.clone(),
            threshold_k: c.threshold_k,
            critical_value: c.critical_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub provenance: Provenance,
    pub rows: Vec<ReportRow>,
}

/// Mean and standard error of the defined values.
fn mean_se(values: &[f64]) -> (Option<f64>, Option<f64>) {
    match values.len() {
        0 => (None, None),
        1 => (Some(values[0]), Some(0.0)),
        k => (Some(mean(values)), Some(std_dev(values) / (k as f64).sqrt())),
    }
}

fn summarize(config: &SimulationConfig, outcomes: &[ReplicateOutcome]) -> Vec<ReportRow> {
    config
        .methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let mut sens = Vec::new();
            let mut specs = Vec::new();
            let mut failures = 0;
            for o in outcomes {
                match o.results[j].1 {
                    Some(c) => {
                        sens.extend(c.sensitivity());
                        specs.extend(c.specificity());
                    }
                    None => failures += 1,
                }
            }
            let (mean_sensitivity, se_sensitivity) = mean_se(&sens);
            let (mean_specificity, se_specificity) = mean_se(&specs);
            ReportRow {
                generator: config.generator.name.clone(),
                method,
                magnitude: config.magnitude_fraction,
                n_spikes: config.n_spikes,
                replicates: config.replicates,
                mean_sensitivity,
                se_sensitivity,
                mean_specificity,
                se_specificity,
                failures,
            }
        })
        .collect()
}

pub fn run_cell(config: &SimulationConfig) -> Result<SimulationReport> {
    run_grid(std::slice::from_ref(config))
}

pub fn run_grid(configs: &[SimulationConfig]) -> Result<SimulationReport> {
    run_grid_with_threads(configs, None)
}

/// Runs every cell on a pool of `threads` workers (rayon's default when
/// `None`). The report is identical for any thread count.
pub fn run_grid_with_threads(configs: &[SimulationConfig], threads: Option<usize>) -> Result<SimulationReport> {
    if configs.is_empty() {
        return Err(Error::Input("empty simulation grid".into()));
    }
    for c in configs {
        c.validate()?;
    }
    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.replicates).map(move |r| (i, r)))
        .collect();
    let work =
        || -> Result<Vec<ReplicateOutcome>> { jobs.par_iter().map(|&(i, r)| run_replicate(&configs[i], r)).collect() };
    let outcomes = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::Input(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let mut rows = Vec::new();
    let mut start = 0;
    for c in configs {
        rows.extend(summarize(c, &outcomes[start..start + c.replicates]));
        start += c.replicates;
    }
    Ok(SimulationReport {
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            configs: configs.iter().map(ConfigEcho::from).collect(),
        },
        rows,
    })
}

/// Per generator and method, the unweighted average of the cell means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub generator: String,
    pub method: Method,
    pub cells: usize,
    pub mean_sensitivity: Option<f64>,
    pub mean_specificity: Option<f64>,
}

impl SimulationReport {
    pub fn flagged(&self) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.is_flagged()).collect()
    }

    pub fn method_summary(&self) -> Vec<MethodSummary> {
        let mut groups: BTreeMap<(String, Method), Vec<&ReportRow>> = BTreeMap::new();
        for r in &self.rows {
            groups.entry((r.generator.clone(), r.method)).or_default().push(r);
        }
        groups
            .into_iter()
            .map(|((generator, method), rows)| {
                let avg = |f: fn(&ReportRow) -> Option<f64>| {
                    let v: Vec<f64> = rows.iter().filter_map(|r| f(r)).collect();
                    (!v.is_empty()).then(|| mean(&v))
                };
                MethodSummary {
                    generator,
                    method,
                    cells: rows.len(),
                    mean_sensitivity: avg(|r| r.mean_sensitivity),
                    mean_specificity: avg(|r| r.mean_specificity),
                }
            })
            .collect()
    }

    pub fn summary_for(&self, generator: &str, method: Method) -> Option<MethodSummary> {
        self.method_summary()
            .into_iter()
            .find(|s| s.generator == generator && s.method == method)
    }

    /// Comma-separated rows with a header; undefined values are empty.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Input(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Input(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fixtures_load_and_calibrate() {
        let all = fixtures();
        assert_eq!(all.len(), 9);
        for g in &all {
            assert!(g.model.is_stationary() && g.model.is_invertible(), "{}", g.name);
            if g.model.d == 0 {
                assert_relative_eq!(
                    g.model.stationary_variance().unwrap(),
                    g.target_sd.powi(2),
                    max_relative = 1e-10
                );
                assert_relative_eq!(g.model.mean, g.target_mean);
            } else {
                let v = expected_sample_variance(&g.model, CALIBRATION_LENGTH).unwrap();
                assert_relative_eq!(v, g.target_sd.powi(2), max_relative = 1e-10);
            }
        }
        // AR(1): γ₀ = σ² / (1 - φ²)
        let la = fixture("los_angeles").unwrap();
        assert_relative_eq!(
            la.model.sigma2,
            3.40f64.powi(2) * (1.0 - 0.436f64.powi(2)),
            max_relative = 1e-10
        );
    }

    #[test]
    fn unknown_fixture_lists_available() {
        match fixture("atlantis") {
            Err(Error::UnknownGenerator { available, .. }) => assert_eq!(available.len(), 9),
            other => panic!("{other:?}"),
        }
        assert_eq!(fixture("San Diego").unwrap().name, "san_diego");
    }

    #[test]
    fn expected_variance_white_noise_and_random_walk() {
        let wn = ArimaModel::white_noise(0.0, 2.0);
        assert_relative_eq!(expected_sample_variance(&wn, 50).unwrap(), 2.0, max_relative = 1e-12);
        // random walk: E[s²] = (n + 1) / 6 for unit steps
        let rw = ArimaModel::new(vec![], 1, vec![], 0.0, 1.0).unwrap();
        assert_relative_eq!(
            expected_sample_variance(&rw, 96).unwrap(),
            97.0 / 6.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn integrated_calibration_matches_simulation() {
        let g = fixture("richmond").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let reps = 2000;
        let avg: f64 = (0..reps)
            .map(|_| {
                let s = g.simulate(96, &mut rng).unwrap();
                std_dev(s.values()).powi(2)
            })
            .sum::<f64>()
            / reps as f64;
        assert!((avg / g.target_sd.powi(2) - 1.0).abs() < 0.05, "{avg}");
    }

    #[test]
    fn insert_spikes_examples() {
        let s = TimeSeries::from_values(vec![100.0; 20]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (out, set) = insert_spikes(&s, 1, 0.5, &mut rng).unwrap();
        assert_eq!(set.len(), 1);
        let changed: Vec<usize> = (0..20).filter(|&i| out.values()[i] != 100.0).collect();
        assert_eq!(changed, set.indices());
        assert_eq!(out.values()[changed[0]], 150.0);

        let (out, set) = insert_spikes(&s, 3, 0.0, &mut rng).unwrap();
        assert_eq!(out, s);
        assert_eq!(set.len(), 3);
        assert!(insert_spikes(&s, 21, 0.5, &mut rng).is_err());
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let c = SimulationConfig::new(fixture("los_angeles").unwrap(), 3, 0.5, 10, 7);
        let mut seeds: Vec<u64> = (0..10).map(|r| c.replicate_seed(r)).collect();
        assert_eq!(seeds[0], c.replicate_seed(0));
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10);
        let other = SimulationConfig {
            n_spikes: 4,
            ..c.clone()
        };
        assert_ne!(other.replicate_seed(0), c.replicate_seed(0));
        let same_series = SimulationConfig {
            threshold_k: 2.5,
            ..c.clone()
        };
        assert_eq!(same_series.replicate_seed(3), c.replicate_seed(3));
    }

    #[test]
    fn single_method_report_shape() {
        let mut c = SimulationConfig::new(fixture("los_angeles").unwrap(), 2, 0.5, 1, 3);
        c.methods = vec![Method::Wavelet];
        let rep = run_cell(&c).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].method, Method::Wavelet);
        let csv = rep.to_csv().unwrap();
        assert!(csv.starts_with(
            "generator,method,magnitude,n_spikes,replicates,mean_sensitivity,se_sensitivity,mean_specificity,se_specificity,failures\n"
        ));
    }

    #[test]
    fn zero_spikes_leave_sensitivity_undefined() {
        let mut c = SimulationConfig::new(fixture("san_francisco").unwrap(), 0, 0.5, 3, 5);
        c.methods = vec![Method::Wavelet];
        let row = &run_cell(&c).unwrap().rows[0];
        assert_eq!(row.mean_sensitivity, None);
        assert!(row.mean_specificity.unwrap() > 0.8);
    }

    #[test]
    fn config_validation() {
        let base = SimulationConfig::new(fixture("los_angeles").unwrap(), 2, 0.5, 1, 3);
        assert!(base.validate().is_ok());
        assert!(SimulationConfig {
            n_spikes: 96,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(SimulationConfig {
            replicates: 0,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(SimulationConfig {
            magnitude_fraction: -0.1,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(SimulationConfig {
            methods: vec![],
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(run_grid(&[]).is_err());
    }

    #[test]
    fn mean_se_edge_cases() {
        assert_eq!(mean_se(&[]), (None, None));
        assert_eq!(mean_se(&[0.5]), (Some(0.5), Some(0.0)));
        let (m, se) = mean_se(&[0.0, 1.0]);
        assert_eq!(m, Some(0.5));
        assert_relative_eq!(se.unwrap(), 0.5);
    }
}
