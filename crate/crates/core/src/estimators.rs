//! Conditional-law and auto-regression estimates built from matched samples.
//!
//! The estimate of `P(X_0 in C | past)` from a window is the empirical law of
//! the matched samples of its recurrence ladder; the regression estimate is
//! their mean. Nothing here bins or smooths: the estimate is the multiset.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantization::PartitionScheme;
use crate::recurrence::{build_ladder, matched_samples, PastWindow, RecurrenceLadder};

/// Empirical law of `k` matched samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalConditional {
    samples: Vec<f64>,
    sorted: Vec<f64>,
}

impl EmpiricalConditional {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientData);
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::NanInput);
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalConditional { samples, sorted })
    }

    /// Number of samples.
    pub fn k(&self) -> usize {
        self.samples.len()
    }

    /// Samples in ladder order.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Fraction of samples in `set`; always a multiple of `1/k`.
    pub fn prob(&self, set: &QuerySet) -> f64 {
        let hits = self.sorted.iter().filter(|&&x| set.contains(x)).count();
        hits as f64 / self.k() as f64
    }

    /// `P((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.k() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.k() as f64
    }

    /// Mean after clamping each sample to `[-bound, bound]`.
    pub fn clipped_mean(&self, bound: f64) -> f64 {
        self.samples
            .iter()
            .map(|&x| x.clamp(-bound, bound))
            .sum::<f64>()
            / self.k() as f64
    }

    /// Distinct sample values with their probabilities, ascending.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let k = self.k() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &x in &self.sorted {
            match out.last_mut() {
                Some((v, w)) if *v == x => *w += 1.0,
                _ => out.push((x, 1.0)),
            }
        }
        out.into_iter().map(|(v, c)| (v, c / k)).collect()
    }
}

/// The conditional-law estimate `P_hat_{-t}` of a window together with the
/// ladder it came from.
pub fn estimate_with_ladder(
    past: &PastWindow,
    scheme: &PartitionScheme,
) -> Result<(RecurrenceLadder, EmpiricalConditional)> {
    let ladder = build_ladder(past, scheme)?;
    if ladder.kappa() == 0 {
        return Err(Error::InsufficientData);
    }
    let law = EmpiricalConditional::from_samples(matched_samples(&ladder, past))?;
    Ok((ladder, law))
}

/// `P_hat_{-t}`: the empirical law of the `kappa_t` matched samples of the
/// window. Fails with [`Error::InsufficientData`] when `kappa_t = 0`.
pub fn estimate_conditional(
    past: &PastWindow,
    scheme: &PartitionScheme,
) -> Result<EmpiricalConditional> {
    estimate_with_ladder(past, scheme).map(|(_, law)| law)
}

/// Bound and truncation for the regression estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    pub bound_d: f64,
    pub clip: bool,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            bound_d: f64::INFINITY,
            clip: false,
        }
    }
}

impl RegressionConfig {
    pub fn clipped(bound_d: f64) -> Result<Self> {
        let cfg = RegressionConfig {
            bound_d,
            clip: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bound_d > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "regression bound must be positive, got {}",
                self.bound_d
            )))
        }
    }

    pub fn apply(&self, law: &EmpiricalConditional) -> f64 {
        if self.clip {
            law.clipped_mean(self.bound_d)
        } else {
            law.mean()
        }
    }
}

/// `R_hat_{-t}`: mean of the matched samples, clamped to `[-D, D]` first when
/// `cfg.clip` is set.
pub fn regress(past: &PastWindow, scheme: &PartitionScheme, cfg: &RegressionConfig) -> Result<f64> {
    cfg.validate()?;
    let law = estimate_conditional(past, scheme)?;
    Ok(cfg.apply(&law))
}

/// Forecast of `X_t` from `(X_0, ..., X_{t-1})`: the same estimate as
/// [`regress`] with the prefix playing the role of the past.
pub fn online_predict(prefix: &[f64], scheme: &PartitionScheme, cfg: &RegressionConfig) -> Result<f64> {
    let past = PastWindow::new(prefix.to_vec())?;
    regress(&past, scheme, cfg)
}

/// One interval: `(lo, hi]`, or `[lo, hi]` when `lo_closed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
}

impl Interval {
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            lo_closed: false,
            hi,
        }
    }

    pub fn point(x: f64) -> Self {
        Interval {
            lo: x,
            lo_closed: true,
            hi: x,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        above && x <= self.hi
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !self.lo_closed)
    }
}

/// A finite union of disjoint intervals, kept sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuerySet {
    intervals: Vec<Interval>,
}

impl QuerySet {
    pub fn empty() -> Self {
        QuerySet::default()
    }

    pub fn reals() -> Self {
        QuerySet {
            intervals: vec![Interval::left_open(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn half_line(x: f64) -> Self {
        QuerySet::from_intervals(vec![Interval::left_open(f64::NEG_INFINITY, x)])
    }

    pub fn points(xs: &[f64]) -> Self {
        QuerySet::from_intervals(xs.iter().map(|&x| Interval::point(x)).collect())
    }

    /// Normalizes arbitrary intervals into a sorted disjoint union.
    pub fn from_intervals(mut intervals: Vec<Interval>) -> Self {
        intervals.retain(|i| !i.is_empty() && !i.lo.is_nan() && !i.hi.is_nan());
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut merged: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                // `cur` contains its upper end, so touching at `cur.hi` is
                // already contiguous.
                Some(cur) if iv.lo <= cur.hi => cur.hi = cur.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        QuerySet { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    pub fn union(&self, other: &QuerySet) -> QuerySet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        QuerySet::from_intervals(all)
    }
}

fn parse_bound(s: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => t
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| Error::Parse(format!("bad interval bound `{t}`"))),
    }
}

impl FromStr for QuerySet {
    type Err = Error;

    /// Accepts `(a,b]`, `[a,b]`, `{x}`, `{x,y,...}`, `R`, and unions of these
    /// joined by `|`. Bounds may be `inf` / `-inf`.
    fn from_str(s: &str) -> Result<Self> {
        let mut intervals = Vec::new();
        for part in s.split('|') {
            let p = part.trim();
            if p == "R" || p == "reals" {
                intervals.push(Interval::left_open(f64::NEG_INFINITY, f64::INFINITY));
            } else if let Some(inner) = p.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
                if inner.trim().is_empty() {
                    continue;
                }
                for x in inner.split(',') {
                    intervals.push(Interval::point(parse_bound(x)?));
                }
            } else if let Some(body) = p.strip_suffix(']') {
                let (lo_closed, body) = if let Some(b) = body.strip_prefix('(') {
                    (false, b)
                } else if let Some(b) = body.strip_prefix('[') {
                    (true, b)
                } else {
                    return Err(Error::Parse(format!("bad interval `{p}`")));
                };
                let (lo, hi) = body
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("bad interval `{p}`")))?;
                intervals.push(Interval {
                    lo: parse_bound(lo)?,
                    lo_closed,
                    hi: parse_bound(hi)?,
                });
            } else {
                return Err(Error::Parse(format!(
                    "bad query set `{p}` (expected `(a,b]`, `[a,b]`, `{{x}}` or `R`)"
                )));
            }
        }
        Ok(QuerySet::from_intervals(intervals))
    }
}

impl fmt::Display for QuerySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (n, iv) in self.intervals.iter().enumerate() {
            if n > 0 {
                write!(f, "|")?;
            }
            if iv.lo_closed && iv.lo == iv.hi {
                write!(f, "{{{}}}", iv.lo)?;
            } else {
                let open = if iv.lo_closed { '[' } else { '(' };
                write!(f, "{open}{},{}]", iv.lo, iv.hi)?;
            }
        }
        Ok(())
    }
}
