//! Long-format experiment records, per-size aggregates, and CSV output.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// One measurement. `value` is NaN for NA.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub process: String,
    pub t: usize,
    pub seed: usize,
    pub k: Option<usize>,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub metric: String,
    pub t: usize,
    /// Non-NA values.
    pub n: usize,
    pub na: usize,
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub records: Vec<Record>,
    pub aggregates: Vec<Aggregate>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn aggregate(records: &[Record]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(&str, usize), (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let entry = groups.entry((r.metric.as_str(), r.t)).or_default();
        if r.value.is_nan() {
            entry.1 += 1;
        } else {
            entry.0.push(r.value);
        }
    }
    groups
        .into_iter()
        .map(|((metric, t), (mut values, na))| {
            values.sort_by(f64::total_cmp);
            let n = values.len();
            let mean = if n == 0 {
                f64::NAN
            } else {
                values.iter().sum::<f64>() / n as f64
            };
            let sd = if n < 2 {
                f64::NAN
            } else {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            Aggregate {
                metric: metric.to_string(),
                t,
                n,
                na,
                mean,
                median: quantile(&values, 0.5),
                q10: quantile(&values, 0.1),
                q90: quantile(&values, 0.9),
                sd,
            }
        })
        .collect()
}

impl ConvergenceReport {
    pub fn from_records(records: Vec<Record>) -> Self {
        let aggregates = aggregate(&records);
        ConvergenceReport {
            records,
            aggregates,
        }
    }

    pub fn aggregate_for(&self, metric: &str, t: usize) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.metric == metric && a.t == t)
    }

    /// Per-seed values of one metric at one size, in seed order (NA kept).
    pub fn values(&self, metric: &str, t: usize) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.metric == metric && r.t == t)
            .map(|r| r.value)
            .collect()
    }

    /// Writes `# `-prefixed header lines, then
    /// `process,t,seed,k,metric_name,value`.
    pub fn write_csv<W: Write>(&self, out: W, header: &[String]) -> Result<()> {
        let mut out = out;
        for line in header {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["process", "t", "seed", "k", "metric_name", "value"])?;
        for r in &self.records {
            let k = r.k.map_or_else(|| "NA".to_string(), |k| k.to_string());
            let value = if r.value.is_nan() {
                "NA".to_string()
            } else {
                r.value.to_string()
            };
            w.write_record([
                r.process.as_str(),
                &r.t.to_string(),
                &r.seed.to_string(),
                &k,
                r.metric.as_str(),
                &value,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
