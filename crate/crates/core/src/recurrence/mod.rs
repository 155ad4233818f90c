//! Recurrence times of quantized patterns and the ladder they generate.
//!
//! Starting from a one-symbol pattern (`lambda_0 = 1`), stage `k` quantizes
//! the past at level `k`, finds the smallest shift `tau_k > 0` at which the
//! final `lambda_{k-1}` symbols occurred before, and grows the pattern to
//! `lambda_k = lambda_{k-1} + tau_k`. The value observed right after each
//! earlier occurrence, `X_{-tau_k}`, is a matched sample.

pub(crate) mod search;

use std::collections::HashMap;

use serde::Serialize;

pub use search::SearchBackend;
use search::SymbolStream;

use crate::error::{precondition, Result};
use crate::quantization::PartitionScheme;

/// Observations `(X_{-t}, ..., X_{-1})`, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct PastWindow {
    values: Vec<f64>,
}

impl PastWindow {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(precondition("past window must be nonempty"));
        }
        Ok(PastWindow { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `X_{-lag}` for `lag` in `1..=len`.
    pub fn at_lag(&self, lag: u64) -> f64 {
        let n = self.values.len() as u64;
        assert!(lag >= 1 && lag <= n, "lag {lag} outside window of length {n}");
        self.values[(n - lag) as usize]
    }

    /// The most recent `len` observations.
    pub fn suffix(&self, len: usize) -> Result<PastWindow> {
        if len == 0 || len > self.values.len() {
            return Err(precondition(format!(
                "suffix length {len} outside 1..={}",
                self.values.len()
            )));
        }
        PastWindow::new(self.values[self.values.len() - len..].to_vec())
    }
}

/// The recurrence times `tau_1..tau_K` and pattern lengths
/// `lambda_0..lambda_K` of one window; `K` is the number of completed stages.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RecurrenceLadder {
    pub taus: Vec<u64>,
    pub lambdas: Vec<u64>,
    /// `-tau_j`, the time index of each matched sample.
    pub matched_indices: Vec<i64>,
}

impl RecurrenceLadder {
    pub(crate) fn start() -> Self {
        RecurrenceLadder {
            taus: Vec::new(),
            lambdas: vec![1],
            matched_indices: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, tau: u64) {
        let last = *self.lambdas.last().expect("lambda_0 is always present");
        self.taus.push(tau);
        self.lambdas.push(last + tau);
        self.matched_indices.push(-(tau as i64));
    }

    /// `kappa`: the number of stages whose pattern fit inside the window.
    pub fn kappa(&self) -> usize {
        self.taus.len()
    }

    pub fn current_lambda(&self) -> u64 {
        *self.lambdas.last().unwrap_or(&1)
    }
}

/// Per-level quantized copies of a window, shared by levels whose
/// partitions coincide.
pub(crate) struct LevelCache<'a> {
    values: &'a [f64],
    scheme: PartitionScheme,
    backend: SearchBackend,
    streams: HashMap<u32, SymbolStream>,
}

impl<'a> LevelCache<'a> {
    pub(crate) fn new(values: &'a [f64], scheme: PartitionScheme, backend: SearchBackend) -> Self {
        LevelCache {
            values,
            scheme,
            backend,
            streams: HashMap::new(),
        }
    }

    pub(crate) fn stream(&mut self, k: u32) -> Result<&SymbolStream> {
        let level = self.scheme.effective_level(k);
        if !self.streams.contains_key(&level) {
            let syms = self.scheme.quantize_indices(k, self.values)?;
            self.streams
                .insert(level, SymbolStream::new(syms, self.backend));
        }
        Ok(&self.streams[&level])
    }
}

/// `tau_k` for a pattern of length `lambda_prev`, quantized at level `k`.
///
/// `Ok(None)` means no earlier occurrence fits in the window, which is the
/// normal way a finite ladder ends.
pub fn next_recurrence(
    past: &PastWindow,
    scheme: &PartitionScheme,
    k: u32,
    lambda_prev: u64,
) -> Result<Option<u64>> {
    next_recurrence_with(past, scheme, k, lambda_prev, SearchBackend::default())
}

pub fn next_recurrence_with(
    past: &PastWindow,
    scheme: &PartitionScheme,
    k: u32,
    lambda_prev: u64,
    backend: SearchBackend,
) -> Result<Option<u64>> {
    if lambda_prev == 0 {
        return Err(precondition("pattern length must be at least 1"));
    }
    if lambda_prev > past.len() as u64 {
        return Err(precondition(format!(
            "pattern length {lambda_prev} exceeds window length {}",
            past.len()
        )));
    }
    let mut cache = LevelCache::new(past.values(), *scheme, backend);
    let stream = cache.stream(k)?;
    Ok(stream
        .find_recurrence(lambda_prev as usize, 1)
        .map(|t| t as u64))
}

/// Runs stages `k = 1, 2, ...` until a pattern has no earlier occurrence
/// inside the window. The returned ladder has `kappa_t = max{k : lambda_k <= t}`
/// stages; `kappa` may be 0.
pub fn build_ladder(past: &PastWindow, scheme: &PartitionScheme) -> Result<RecurrenceLadder> {
    build_ladder_with(past, scheme, SearchBackend::default())
}

pub fn build_ladder_with(
    past: &PastWindow,
    scheme: &PartitionScheme,
    backend: SearchBackend,
) -> Result<RecurrenceLadder> {
    build_ladder_stages(past, scheme, backend, usize::MAX)
}

/// As [`build_ladder_with`], stopping after at most `max_stages` stages.
pub fn build_ladder_stages(
    past: &PastWindow,
    scheme: &PartitionScheme,
    backend: SearchBackend,
    max_stages: usize,
) -> Result<RecurrenceLadder> {
    let mut cache = LevelCache::new(past.values(), *scheme, backend);
    let mut ladder = RecurrenceLadder::start();
    for k in 1u32.. {
        if ladder.kappa() >= max_stages {
            break;
        }
        let len = ladder.current_lambda() as usize;
        if len >= past.len() {
            break;
        }
        match cache.stream(k)?.find_recurrence(len, 1) {
            Some(tau) => ladder.push(tau as u64),
            None => break,
        }
    }
    Ok(ladder)
}

/// `(X_{-tau_1}, ..., X_{-tau_kappa})` in ladder order.
pub fn matched_samples(ladder: &RecurrenceLadder, past: &PastWindow) -> Vec<f64> {
    assert!(
        ladder.current_lambda() <= past.len() as u64,
        "ladder does not belong to this window"
    );
    ladder.taus.iter().map(|&tau| past.at_lag(tau)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::dyadic_scheme;

    fn bin() -> PartitionScheme {
        PartitionScheme::alphabet(2).unwrap()
    }

    fn past(v: &[f64]) -> PastWindow {
        PastWindow::new(v.to_vec()).unwrap()
    }

    const TRACE: [f64; 6] = [1.0, 0.0, 1.0, 1.0, 0.0, 1.0];

    #[test]
    fn next_recurrence_trace() {
        let p = past(&TRACE);
        assert_eq!(next_recurrence(&p, &bin(), 1, 1).unwrap(), Some(2));
        assert_eq!(next_recurrence(&p, &bin(), 2, 3).unwrap(), Some(3));
        let zeros = past(&[0.0; 9]);
        for lp in 1..=8 {
            assert_eq!(next_recurrence(&zeros, &bin(), 1, lp).unwrap(), Some(1));
        }
        assert_eq!(next_recurrence(&zeros, &bin(), 1, 9).unwrap(), None);
    }

    #[test]
    fn next_recurrence_preconditions() {
        let p = past(&TRACE);
        assert!(next_recurrence(&p, &bin(), 1, 0).is_err());
        assert!(next_recurrence(&p, &bin(), 1, 7).is_err());
        assert!(PastWindow::new(vec![]).is_err());
    }

    #[test]
    fn ladder_trace() {
        let p = past(&TRACE);
        let l = build_ladder(&p, &bin()).unwrap();
        assert_eq!(l.taus, vec![2, 3]);
        assert_eq!(l.lambdas, vec![1, 3, 6]);
        assert_eq!(l.kappa(), 2);
        assert_eq!(l.matched_indices, vec![-2, -3]);
        assert_eq!(matched_samples(&l, &p), vec![0.0, 1.0]);
    }

    #[test]
    fn ladder_trace_truncated() {
        let p = past(&TRACE[1..]);
        let l = build_ladder(&p, &bin()).unwrap();
        assert_eq!(l.taus, vec![2]);
        assert_eq!(l.kappa(), 1);
    }

    #[test]
    fn ladder_alternating() {
        let p = past(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let l = build_ladder(&p, &bin()).unwrap();
        assert_eq!(l.taus, vec![2, 2, 2]);
        assert_eq!(l.lambdas, vec![1, 3, 5, 7]);
        assert_eq!(matched_samples(&l, &p), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn ladder_edge_cases() {
        let zeros = past(&[0.0; 5]);
        let l = build_ladder(&zeros, &bin()).unwrap();
        assert_eq!(l.kappa(), 4);
        assert_eq!(matched_samples(&l, &zeros), vec![0.0; 4]);

        let one = past(&[1.0]);
        let l = build_ladder(&one, &bin()).unwrap();
        assert_eq!(l.kappa(), 0);
        assert!(matched_samples(&l, &one).is_empty());

        // Real values that never repeat a level-1 cell.
        let p = past(&[-3.0, 0.2, 3.0]);
        assert_eq!(build_ladder(&p, &dyadic_scheme()).unwrap().kappa(), 0);
    }

    #[test]
    fn lambda_recursion_holds() {
        let p = past(&[0.3, 0.1, 0.7, 0.2, 0.4, 0.3, 0.1, 0.6, 0.2, 0.4, 0.35, 0.15]);
        let l = build_ladder(&p, &dyadic_scheme()).unwrap();
        assert_eq!(l.lambdas[0], 1);
        for j in 1..l.lambdas.len() {
            assert_eq!(l.lambdas[j], l.lambdas[j - 1] + l.taus[j - 1]);
        }
        assert!(l.current_lambda() <= p.len() as u64);
    }

    #[test]
    fn backends_agree_on_constant_long_window() {
        let p = past(&vec![0.25; 300]);
        let a = build_ladder_with(&p, &dyadic_scheme(), SearchBackend::Naive).unwrap();
        let b = build_ladder_with(&p, &dyadic_scheme(), SearchBackend::RollingHash).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.kappa(), 299);
    }

    #[test]
    fn nan_is_rejected() {
        let p = past(&[0.0, f64::NAN, 0.0]);
        assert!(build_ladder(&p, &dyadic_scheme()).is_err());
    }
}
