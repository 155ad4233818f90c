//! Finite-sample consistency experiments against simulator oracles.
//!
//! Each seed draws one path long enough for the largest size; the window for
//! size `t` is the most recent `t` values of that path, so the sizes trace how
//! a single estimate evolves as more past becomes available.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::estimators::{
    estimate_with_ladder, online_predict, EmpiricalConditional, QuerySet, RegressionConfig,
};
use crate::pattern_recognition::{estimate_eta, excess_risk_bound, plug_in_decision};
use crate::processes::{OracleConditional, ProcessSpec};
use crate::quantization::PartitionScheme;
use crate::recurrence::PastWindow;
use crate::rng::derive_seed;

use super::report::{ConvergenceReport, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// Conditional law and regression estimates from the past window.
    Consistency,
    /// One-step forecasts along a growing prefix.
    Online,
    /// Label-probability estimates for the labeled process.
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub process: ProcessSpec,
    #[serde(default)]
    pub scheme: PartitionScheme,
    /// Window sizes (or forecast checkpoints), strictly increasing.
    pub sizes: Vec<usize>,
    pub seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Query sets in the `(a,b]` / `{x}` syntax.
    #[serde(default)]
    pub queries: Vec<String>,
    /// `lo:hi:step`; enables the Kolmogorov distance column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cdf_grid: Option<String>,
    /// Clamp bound for the regression estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes[0] == 0 {
            return Err(precondition("sizes must be nonempty and positive"));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(precondition("sizes must be strictly increasing"));
        }
        if self.seeds == 0 {
            return Err(precondition("need at least one seed"));
        }
        let labeled = self.process.is_labeled();
        match (self.kind, labeled) {
            (ExperimentKind::Classification, false) => {
                return Err(precondition("classification needs a labeled process"))
            }
            (ExperimentKind::Consistency | ExperimentKind::Online, true) => {
                return Err(precondition("labeled processes only support classification"))
            }
            _ => {}
        }
        self.parsed_queries()?;
        self.grid()?;
        self.regression()?;
        Ok(())
    }

    pub fn parsed_queries(&self) -> Result<Vec<QuerySet>> {
        self.queries.iter().map(|q| q.parse()).collect()
    }

    pub fn grid(&self) -> Result<Option<Vec<f64>>> {
        self.cdf_grid.as_deref().map(parse_grid).transpose()
    }

    pub fn regression(&self) -> Result<RegressionConfig> {
        match self.clip_d {
            Some(d) => RegressionConfig::clipped(d),
            None => Ok(RegressionConfig::default()),
        }
    }

    fn max_size(&self) -> usize {
        *self.sizes.last().expect("validated")
    }

    /// Header lines that make an output file self-describing.
    pub fn header(&self) -> Result<Vec<String>> {
        Ok(vec![
            format!("recur {}", crate::VERSION),
            format!("config: {}", serde_json::to_string(self)?),
            format!("master_seed: {}", self.master_seed),
        ])
    }
}

/// Parses `lo:hi:step` into `lo, lo + step, ...` up to `hi` inclusive.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Parse(format!("bad grid `{s}` (expected lo:hi:step)"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// Total variation between the estimate and a finite oracle pmf.
pub fn total_variation(law: &EmpiricalConditional, pmf: &[(f64, f64)]) -> f64 {
    let atoms = law.atoms();
    let mut support: Vec<f64> = atoms.iter().map(|a| a.0).chain(pmf.iter().map(|a| a.0)).collect();
    support.sort_by(f64::total_cmp);
    support.dedup();
    let mass = |list: &[(f64, f64)], v: f64| list.iter().filter(|a| a.0 == v).map(|a| a.1).sum::<f64>();
    0.5 * support
        .iter()
        .map(|&v| (mass(&atoms, v) - mass(pmf, v)).abs())
        .sum::<f64>()
}

/// `max_x |F_hat(x) - F(x)|` over the grid points.
pub fn kolmogorov_on_grid(law: &EmpiricalConditional, oracle: &OracleConditional, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&x| (law.cdf(x) - oracle.cdf(x)).abs())
        .fold(0.0, f64::max)
}

struct RecordSink<'a> {
    process: &'a str,
    t: usize,
    seed: usize,
    k: Option<usize>,
    out: Vec<Record>,
}

impl RecordSink<'_> {
    fn push(&mut self, metric: impl Into<String>, value: f64) {
        self.out.push(Record {
            process: self.process.to_string(),
            t: self.t,
            seed: self.seed,
            k: self.k,
            metric: metric.into(),
            value,
        });
    }
}

const NA: f64 = f64::NAN;

fn consistency_seed(spec: &ExperimentSpec, seed: usize) -> Result<Vec<Record>> {
    let model = spec.process.build()?;
    let queries = spec.parsed_queries()?;
    let grid = spec.grid()?;
    let reg = spec.regression()?;
    let path = model.sample(derive_seed(spec.master_seed, seed as u64), spec.max_size());
    let oracle = model.oracle(&path).ok();
    let mut out = Vec::new();
    for &t in &spec.sizes {
        let past = PastWindow::new(path[path.len() - t..].to_vec())?;
        let estimate = match estimate_with_ladder(&past, &spec.scheme) {
            Ok((_, law)) => Some(law),
            Err(Error::InsufficientData) => None,
            Err(e) => return Err(e),
        };
        let mut sink = RecordSink {
            process: model.name(),
            t,
            seed,
            k: estimate.as_ref().map(|l| l.k()),
            out: Vec::new(),
        };
        for (i, q) in queries.iter().enumerate() {
            let p_hat = estimate.as_ref().map_or(NA, |l| l.prob(q));
            let p = oracle.as_ref().map_or(NA, |o| o.prob(q));
            sink.push(format!("prob[{i}]"), p_hat);
            sink.push(format!("oracle_prob[{i}]"), p);
            sink.push(format!("abs_err_prob[{i}]"), (p_hat - p).abs());
        }
        if model.is_finite_valued() {
            let tv = match (&estimate, &oracle) {
                (Some(law), Some(OracleConditional::Pmf(pmf))) => total_variation(law, pmf),
                _ => NA,
            };
            sink.push("tv", tv);
        }
        if let Some(grid) = &grid {
            let ks = match (&estimate, &oracle) {
                (Some(law), Some(o)) => kolmogorov_on_grid(law, o, grid),
                _ => NA,
            };
            sink.push("kolmogorov", ks);
        }
        let mean = estimate.as_ref().map_or(NA, |l| reg.apply(l));
        let oracle_mean = oracle.as_ref().map_or(NA, |o| o.mean());
        sink.push("mean", mean);
        sink.push("oracle_mean", oracle_mean);
        sink.push("abs_err_mean", (mean - oracle_mean).abs());
        out.extend(sink.out);
    }
    Ok(out)
}

fn online_seed(spec: &ExperimentSpec, seed: usize) -> Result<Vec<Record>> {
    let model = spec.process.build()?;
    let reg = spec.regression()?;
    let path = model.sample(derive_seed(spec.master_seed, seed as u64), spec.max_size());
    let mut out = Vec::new();
    for &t in &spec.sizes {
        let prefix = &path[..t];
        let (k, prediction) = match online_predict(prefix, &spec.scheme, &reg) {
            Ok(p) => {
                let past = PastWindow::new(prefix.to_vec())?;
                let k = estimate_with_ladder(&past, &spec.scheme)?.1.k();
                (Some(k), p)
            }
            Err(Error::InsufficientData) => (None, NA),
            Err(e) => return Err(e),
        };
        let oracle_mean = model.oracle(prefix).map_or(NA, |o| o.mean());
        let mut sink = RecordSink {
            process: model.name(),
            t,
            seed,
            k,
            out: Vec::new(),
        };
        sink.push("prediction", prediction);
        sink.push("oracle_mean", oracle_mean);
        sink.push("abs_err", (prediction - oracle_mean).abs());
        out.extend(sink.out);
    }
    Ok(out)
}

fn classification_seed(spec: &ExperimentSpec, seed: usize) -> Result<Vec<Record>> {
    let process = spec.process.build_labeled()?;
    let sample = process.sample(derive_seed(spec.master_seed, seed as u64), spec.max_size());
    let eta = process.eta(sample.series.query()[0]);
    let bayes = plug_in_decision(eta);
    let mut out = Vec::new();
    for &t in &spec.sizes {
        let data = sample.series.suffix(t)?;
        let est = match estimate_eta(&data, &spec.scheme) {
            Ok(e) => Some(e),
            Err(Error::InsufficientData) => None,
            Err(e) => return Err(e),
        };
        let mut sink = RecordSink {
            process: "labeled-cell",
            t,
            seed,
            k: est.map(|e| e.k),
            out: Vec::new(),
        };
        match est {
            Some(e) => {
                sink.push("eta_hat", e.eta);
                sink.push("eta_true", eta);
                sink.push("abs_err", (e.eta - eta).abs());
                sink.push("bound", excess_risk_bound(e.eta, eta)?);
                let excess = if e.decision != bayes { (2.0 * eta - 1.0).abs() } else { 0.0 };
                sink.push("excess_conditional", excess);
                sink.push("miss_plugin", f64::from(u8::from(e.decision != sample.y0)));
                sink.push("miss_bayes", f64::from(u8::from(bayes != sample.y0)));
            }
            None => {
                for m in ["eta_hat", "abs_err", "bound", "excess_conditional", "miss_plugin"] {
                    sink.push(m, NA);
                }
                sink.push("eta_true", eta);
                sink.push("miss_bayes", f64::from(u8::from(bayes != sample.y0)));
            }
        }
        out.extend(sink.out);
    }
    Ok(out)
}

fn run_seeds(spec: &ExperimentSpec, f: fn(&ExperimentSpec, usize) -> Result<Vec<Record>>) -> Result<ConvergenceReport> {
    spec.validate()?;
    let per_seed: Vec<Vec<Record>> = (0..spec.seeds)
        .into_par_iter()
        .map(|s| f(spec, s))
        .collect::<Result<_>>()?;
    let mut records: Vec<Record> = per_seed.into_iter().flatten().collect();
    // Seed-major from the workers; present t-major for reading.
    records.sort_by_key(|r| (r.t, r.seed));
    Ok(ConvergenceReport::from_records(records))
}

pub fn consistency_experiment(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    run_seeds(spec, consistency_seed)
}

pub fn online_experiment(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    let model = spec.process.build()?;
    if model.oracle_kind() == crate::processes::OracleKind::None {
        return Err(Error::OracleUnavailable(model.name().into()));
    }
    run_seeds(spec, online_seed)
}

pub fn classification_experiment(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    run_seeds(spec, classification_seed)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    match spec.kind {
        ExperimentKind::Consistency => consistency_experiment(spec),
        ExperimentKind::Online => online_experiment(spec),
        ExperimentKind::Classification => classification_experiment(spec),
    }
}
