use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use spikescan::ingest::{compute_rates, rates_csv, read_tables};
use spikescan::report::{
    plot_data_csv, plot_data_json, plot_points, run_methods, spike_report_csv, spike_report_json, DetectSettings,
    SpikeReportRow,
};
use spikescan::simlab::{fixture, fixtures, parse_generators, run_grid_with_threads, Generator, SimulationConfig};
use spikescan::Method;

#[derive(Parser)]
#[command(
    name = "spikescan",
    version,
    about = "Detect spikes in monthly rate series and compare detectors by simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Arima,
    Kalman,
    Wavelet,
    Ao,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Arima => vec![Method::Arima],
            MethodArg::Kalman => vec![Method::Kalman],
            MethodArg::Wavelet => vec![Method::Wavelet],
            MethodArg::Ao => vec![Method::AoDetect],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    /// JSON
    Structured,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Structured => "json",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run detectors on observed series and write a spike report and plot data.
    Detect {
        /// CSV with `month` and either `count`,`population` or `rate` columns
        /// (optional `series` column for several series).
        input: PathBuf,
        #[arg(long, value_enum, default_value = "kalman")]
        method: MethodArg,
        /// Residual threshold in standard deviations.
        #[arg(long, default_value_t = 2.0)]
        threshold: f64,
        /// Critical value of the additive-outlier search.
        #[arg(long, default_value_t = 3.0)]
        critical_value: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run a Monte-Carlo grid and write the report as CSV and JSON.
    Simulate {
        /// Fixture name, `all`, or a generator CSV file; repeatable.
        #[arg(long, required = true)]
        generator: Vec<String>,
        /// Spike magnitudes in percent of the series mean, e.g. `10,20,50`.
        #[arg(long, default_value = "10,20,30,40,50", value_delimiter = ',')]
        magnitudes: Vec<f64>,
        /// Spike counts: `1..10`, `1,3,5` or a single number.
        #[arg(long, default_value = "1..10")]
        counts: String,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        /// Random seed; drawn from the OS when omitted and echoed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2.0)]
        threshold: f64,
        #[arg(long, default_value_t = 3.0)]
        critical_value: f64,
        #[arg(long, value_enum, default_value = "all")]
        method: MethodArg,
        #[arg(long, default_value_t = 96)]
        length: usize,
        /// Worker threads (all cores when omitted).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Convert counts and populations to rates per 100,000.
    Rates {
        input: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the bundled generator models.
    Fixtures,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect {
            input,
            method,
            threshold,
            critical_value,
            out,
            format,
        } => detect(&input, method, threshold, critical_value, &out, format),
        Command::Simulate {
            generator,
            magnitudes,
            counts,
            reps,
            seed,
            threshold,
            critical_value,
            method,
            length,
            threads,
            out,
        } => {
            let args = SimulateArgs {
                generators: generator,
                magnitudes,
                counts,
                reps,
                seed,
                threshold,
                critical_value,
                method,
                length,
                threads,
                out,
            };
            simulate(&args)
        }
        Command::Rates { input, out } => rates(&input, out.as_deref()),
        Command::Fixtures => {
            print_fixtures();
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Returns `Ok(false)` when some detector failed; successful results are
/// still written.
fn detect(
    input: &Path,
    method: MethodArg,
    threshold: f64,
    critical_value: f64,
    out: &Path,
    format: Format,
) -> Result<bool> {
    let tables = read_tables(input)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let settings = DetectSettings {
        threshold_k: threshold,
        critical_value,
    };
    let methods = method.methods();
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for t in &tables {
        let series = compute_rates(&t.table).with_context(|| format!("series '{}'", t.name))?;
        for (m, r) in run_methods(&series, &methods, &settings) {
            match r {
                Ok(r) => {
                    let points = plot_points(&series, &r);
                    let text = match format {
                        Format::Csv => plot_data_csv(&points)?,
                        Format::Structured => plot_data_json(&points)?,
                    };
                    let path = out.join(format!("plot_{}_{}.{}", file_safe(&t.name), m.name(), format.ext()));
                    write(&path, &text)?;
                    rows.push(SpikeReportRow::new(&t.name, &series, &r));
                }
                Err(e) => failed.push(format!("{} / {}: {e}", t.name, m.name())),
            }
        }
    }
    let report = match format {
        Format::Csv => spike_report_csv(&rows)?,
        Format::Structured => spike_report_json(&rows)?,
    };
    write(&out.join(format!("spikes.{}", format.ext())), &report)?;
    for r in &rows {
        let months: Vec<String> = r.months.iter().map(|m| m.to_string()).collect();
        let shown = if months.is_empty() {
            "none".to_string()
        } else {
            months.join(", ")
        };
        println!("{:<20} {:<8} {}", r.series, r.method.name(), shown);
        for w in &r.warnings {
            println!("{:<20} {:<8} warning: {w}", "", "");
        }
    }
    for f in &failed {
        eprintln!("detector failed: {f}");
    }
    if rows.is_empty() {
        bail!("every detector failed");
    }
    Ok(failed.is_empty())
}

struct SimulateArgs {
    generators: Vec<String>,
    magnitudes: Vec<f64>,
    counts: String,
    reps: usize,
    seed: Option<u64>,
    threshold: f64,
    critical_value: f64,
    method: MethodArg,
    length: usize,
    threads: Option<usize>,
    out: PathBuf,
}

fn parse_counts(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("bad count range '{s}'"))?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .with_context(|| format!("bad count range '{s}'"))?;
        if a > b {
            bail!("empty count range '{s}'");
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse::<usize>().with_context(|| format!("bad count '{v}'")))
        .collect()
}

fn resolve_generators(names: &[String]) -> Result<Vec<Generator>> {
    let mut out = Vec::new();
    for name in names {
        let path = Path::new(name);
        if name == "all" {
            out.extend(fixtures());
        } else if path.is_file() {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            out.extend(parse_generators(&text).with_context(|| format!("{}", path.display()))?);
        } else {
            out.push(fixture(name)?);
        }
    }
    Ok(out)
}

fn simulate(a: &SimulateArgs) -> Result<bool> {
    let generators = resolve_generators(&a.generators)?;
    let counts = parse_counts(&a.counts)?;
    if a.magnitudes.is_empty() || counts.is_empty() {
        bail!("no magnitudes or counts to simulate");
    }
    let seed = a.seed.unwrap_or_else(rand::random);
    println!("seed: {seed}");

    let mut configs = Vec::new();
    for g in &generators {
        for &pct in &a.magnitudes {
            for &n_spikes in &counts {
                let mut c = SimulationConfig::new(g.clone(), n_spikes, pct / 100.0, a.reps, seed);
                c.series_length = a.length;
                c.methods = a.method.methods();
                c.threshold_k = a.threshold;
                c.critical_value = a.critical_value;
                configs.push(c);
            }
        }
    }
    let report = run_grid_with_threads(&configs, a.threads)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write(&a.out.join("simulation.csv"), &report.to_csv()?)?;
    write(&a.out.join("simulation.json"), &report.to_json()?)?;

    let pct = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.2}", 100.0 * x));
    println!(
        "{:<14} {:<8} {:>9} {:>8} {:>11} {:>11} {:>8}",
        "generator", "method", "magnitude", "n_spikes", "sensitivity", "specificity", "failures"
    );
    for r in &report.rows {
        println!(
            "{:<14} {:<8} {:>9} {:>8} {:>11} {:>11} {:>8}",
            r.generator,
            r.method.name(),
            format!("{}%", 100.0 * r.magnitude),
            r.n_spikes,
            pct(r.mean_sensitivity),
            pct(r.mean_specificity),
            r.failures
        );
    }
    println!();
    println!(
        "{:<14} {:<8} {:>11} {:>11}",
        "generator", "method", "sensitivity", "specificity"
    );
    for s in report.method_summary() {
        println!(
            "{:<14} {:<8} {:>11} {:>11}",
            s.generator,
            s.method.name(),
            pct(s.mean_sensitivity),
            pct(s.mean_specificity)
        );
    }
    let flagged = report.flagged();
    for r in &flagged {
        eprintln!(
            "cell failed: {} {} magnitude {} n_spikes {}: {} of {} replicates failed",
            r.generator,
            r.method.name(),
            r.magnitude,
            r.n_spikes,
            r.failures,
            r.replicates
        );
    }
    Ok(flagged.is_empty())
}

fn rates(input: &Path, out: Option<&Path>) -> Result<bool> {
    let tables = read_tables(input)?;
    let series = tables
        .iter()
        .map(|t| {
            Ok((
                t.name.clone(),
                compute_rates(&t.table).with_context(|| format!("series '{}'", t.name))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let text = rates_csv(&series)?;
    match out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn print_fixtures() {
    println!(
        "{:<14} {:<14} {:<13} {:>7} {:>6} {:>8}",
        "name", "city", "model", "mean", "sd", "sigma"
    );
    for g in fixtures() {
        let m = &g.model;
        println!(
            "{:<14} {:<14} {:<13} {:>7.2} {:>6.2} {:>8.4}",
            g.name,
            g.label,
            format!("ARIMA({},{},{})", m.p(), m.d, m.q()),
            g.target_mean,
            g.target_sd,
            m.sigma2.sqrt()
        );
    }
}
