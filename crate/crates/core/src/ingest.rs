//! Monthly count/population and rate tables.
//!
//! Input is UTF-8 comma-separated text with a header row. Required columns
//! are `month` (`YYYY-MM`) and either `count` and `population` or `rate`.
//! An optional `series` column holds several series in one file; rows of
//! each series must be contiguous months in increasing order.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{TimeSeries, YearMonth};

/// Rates are events per this many people.
pub const RATE_SCALE: f64 = 100_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub month: YearMonth,
    pub count: u64,
    pub population: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub month: YearMonth,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RateTable {
    Counts(Vec<CountRow>),
    Rates(Vec<RateRow>),
}

impl RateTable {
    pub fn months(&self) -> Vec<YearMonth> {
        match self {
            RateTable::Counts(r) => r.iter().map(|r| r.month).collect(),
            RateTable::Rates(r) => r.iter().map(|r| r.month).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            RateTable::Counts(r) => r.len(),
            RateTable::Rates(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTable {
    pub name: String,
    pub table: RateTable,
}

/// Months absent between the first and last of `months` (assumed sorted).
pub fn missing_months(months: &[YearMonth]) -> Vec<YearMonth> {
    let mut out = Vec::new();
    for w in months.windows(2) {
        for k in 1..w[0].months_until(w[1]) {
            out.push(w[0].plus(k));
        }
    }
    out
}

/// Checks that months are strictly increasing with no gaps.
pub fn check_contiguous(months: &[YearMonth]) -> Result<()> {
    if let Some(w) = months.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Ingest(format!(
            "months must be strictly increasing: {} follows {}",
            w[1], w[0]
        )));
    }
    let gaps = missing_months(months);
    if !gaps.is_empty() {
        let list: Vec<String> = gaps.iter().map(|m| m.to_string()).collect();
        return Err(Error::Ingest(format!("missing months: {}", list.join(", "))));
    }
    Ok(())
}

/// `100,000 × count / population` per month, as a series starting at the
/// first month.
pub fn compute_rates(table: &RateTable) -> Result<TimeSeries> {
    if table.is_empty() {
        return Err(Error::Ingest("table has no rows".into()));
    }
    let months = table.months();
    check_contiguous(&months)?;
    let values = match table {
        RateTable::Counts(rows) => rows
            .iter()
            .map(|r| {
                if r.population == 0 {
                    Err(Error::Ingest(format!("{}: population is zero", r.month)))
                } else {
                    Ok(RATE_SCALE * r.count as f64 / r.population as f64)
                }
            })
            .collect::<Result<Vec<f64>>>()?,
        RateTable::Rates(rows) => rows.iter().map(|r| r.rate).collect(),
    };
    TimeSeries::new(values, months[0], "monthly")
}

enum Layout {
    Counts { count: usize, population: usize },
    Rate(usize),
}

/// Parses one or more tables. Rows without a `series` column belong to a
/// single table named `default_name`. Errors carry the 1-based line.
pub fn parse_tables<R: Read>(input: R, default_name: &str) -> Result<Vec<NamedTable>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| Error::Ingest(format!("line 1: {e}")))?
        .clone();
    let col = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let month_col = col("month").ok_or_else(|| Error::Ingest("line 1: missing 'month' column".into()))?;
    let series_col = col("series");
    let layout = match (col("count"), col("population"), col("rate")) {
        (Some(count), Some(population), _) => Layout::Counts { count, population },
        (_, _, Some(rate)) => Layout::Rate(rate),
        _ => {
            return Err(Error::Ingest(
                "line 1: need 'count' and 'population' columns, or a 'rate' column".into(),
            ))
        }
    };

    let mut tables: Vec<NamedTable> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Ingest(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let err = |msg: String| Error::Ingest(format!("line {line}: {msg}"));
        let field = |i: usize, what: &str| {
            rec.get(i)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| err(format!("missing {what}")))
        };
        let month: YearMonth = field(month_col, "month")?
            .parse()
            .map_err(|e: Error| err(e.to_string()))?;
        let name = match series_col {
            Some(i) => field(i, "series")?.to_string(),
            None => default_name.to_string(),
        };
        let idx = match tables.iter().position(|t| t.name == name) {
            Some(i) => i,
            None => {
                let table = match layout {
                    Layout::Counts { .. } => RateTable::Counts(Vec::new()),
                    Layout::Rate(_) => RateTable::Rates(Vec::new()),
                };
                tables.push(NamedTable { name, table });
                tables.len() - 1
            }
        };
        match (&layout, &mut tables[idx].table) {
            (Layout::Counts { count, population }, RateTable::Counts(rows)) => {
                let count: u64 = field(*count, "count")?
                    .parse()
                    .map_err(|_| err(format!("count '{}' is not a non-negative integer", &rec[*count])))?;
                let population: u64 = field(*population, "population")?.parse().map_err(|_| {
                    err(format!(
                        "population '{}' is not a non-negative integer",
                        &rec[*population]
                    ))
                })?;
                if population == 0 {
                    return Err(err("population is zero".into()));
                }
                rows.push(CountRow {
                    month,
                    count,
                    population,
                });
            }
            (Layout::Rate(c), RateTable::Rates(rows)) => {
                let rate: f64 = field(*c, "rate")?
                    .parse()
                    .map_err(|_| err(format!("rate '{}' is not a number", &rec[*c])))?;
                if !rate.is_finite() {
                    return Err(err("rate is not finite".into()));
                }
                rows.push(RateRow { month, rate });
            }
            _ => unreachable!("table kind follows the header layout"),
        }
    }
    if tables.is_empty() {
        return Err(Error::Ingest("no data rows".into()));
    }
    for t in &tables {
        check_contiguous(&t.table.months()).map_err(|e| context(e, &format!("series '{}'", t.name)))?;
    }
    Ok(tables)
}

/// Prefixes an ingestion message without repeating the error kind.
fn context(e: Error, prefix: &str) -> Error {
    match e {
        Error::Ingest(m) => Error::Ingest(format!("{prefix}: {m}")),
        other => Error::Ingest(format!("{prefix}: {other}")),
    }
}

pub fn read_tables(path: &Path) -> Result<Vec<NamedTable>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
    parse_tables(file, name).map_err(|e| context(e, &path.display().to_string()))
}

/// `month,rate` rows (with a `series` column when there are several).
pub fn rates_csv(series: &[(String, TimeSeries)]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let multi = series.len() > 1;
    let io = |e: csv::Error| Error::Input(e.to_string());
    if multi {
        w.write_record(["series", "month", "rate"]).map_err(io)?;
    } else {
        w.write_record(["month", "rate"]).map_err(io)?;
    }
    for (name, s) in series {
        for (i, v) in s.values().iter().enumerate() {
            let month = s.month_at(i).to_string();
            let rate = v.to_string();
            if multi {
                w.write_record([name.as_str(), &month, &rate]).map_err(io)?;
            } else {
                w.write_record([&month, &rate]).map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
}
