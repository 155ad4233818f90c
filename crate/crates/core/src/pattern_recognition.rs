//! Two-class prediction of `Y_0` from the feature `X_0` and the labeled past.
//!
//! The pattern at stage `k` is the quantized features at times
//! `-lambda_{k-1}..=0` interleaved with the labels at `-lambda_{k-1}..=-1`.
//! Its most recent earlier occurrence, `tau_k` steps back, contributes the
//! label `Y_{-tau_k}`; the estimate of `P(Y_0 = 1 | X_0, past)` is the average
//! of those labels and the decision thresholds it at 1/2.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::quantization::PartitionScheme;
use crate::recurrence::search::{SearchBackend, SymbolStream};
use crate::recurrence::RecurrenceLadder;

/// Features `X_{-t}, ..., X_{-1}, X_0` and labels `Y_{-t}, ..., Y_{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    features: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

impl LabeledSeries {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if features.len() != labels.len() + 1 {
            return Err(precondition(format!(
                "need one more feature row than labels, got {} and {}",
                features.len(),
                labels.len()
            )));
        }
        let d = features[0].len();
        if d == 0 || features.iter().any(|f| f.len() != d) {
            return Err(precondition("feature rows must share a positive dimension"));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(precondition("labels must be 0 or 1"));
        }
        Ok(LabeledSeries { features, labels })
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(features: &[f64], labels: Vec<u8>) -> Result<Self> {
        LabeledSeries::new(features.iter().map(|&x| vec![x]).collect(), labels)
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    /// Number of labeled past points `t`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn query(&self) -> &[f64] {
        self.features.last().expect("at least X_0")
    }

    /// `Y_{-lag}`.
    pub fn label_at_lag(&self, lag: u64) -> u8 {
        self.labels[self.labels.len() - lag as usize]
    }

    /// The most recent `t` labeled points plus the query.
    pub fn suffix(&self, t: usize) -> Result<LabeledSeries> {
        if t > self.len() {
            return Err(precondition(format!("suffix {t} longer than series {}", self.len())));
        }
        let n = self.len();
        LabeledSeries::new(
            self.features[n - t..].to_vec(),
            self.labels[n - t..].to_vec(),
        )
    }
}

/// `eta_k`, the number of matched labels, and the plug-in decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaEstimate {
    pub eta: f64,
    pub k: usize,
    pub decision: u8,
}

impl EtaEstimate {
    fn from_labels(labels: &[u8]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InsufficientData);
        }
        let ones = labels.iter().filter(|&&y| y == 1).count();
        let eta = ones as f64 / labels.len() as f64;
        Ok(EtaEstimate {
            eta,
            k: labels.len(),
            decision: plug_in_decision(eta),
        })
    }
}

/// Class 1 iff `eta >= 1/2`; ties go to class 1.
pub fn plug_in_decision(eta: f64) -> u8 {
    u8::from(eta >= 0.5)
}

fn feature_ids(data: &LabeledSeries, scheme: &PartitionScheme, k: u32) -> Result<Vec<u64>> {
    if data.dim() == 1 {
        let col: Vec<f64> = data.features.iter().map(|f| f[0]).collect();
        return scheme.quantize_indices(k, &col);
    }
    let mut ids: HashMap<Vec<u64>, u64> = HashMap::new();
    data.features
        .iter()
        .map(|row| {
            let cell = scheme.quantize_indices(k, row)?;
            let next = ids.len() as u64;
            Ok(*ids.entry(cell).or_insert(next))
        })
        .collect()
}

// f_{-t}, y_{-t}, f_{-t+1}, ..., y_{-1}, f_0 with disjoint feature/label codes.
fn interleaved_stream(
    data: &LabeledSeries,
    scheme: &PartitionScheme,
    k: u32,
) -> Result<SymbolStream> {
    let ids = feature_ids(data, scheme, k)?;
    let mut syms = Vec::with_capacity(2 * data.len() + 1);
    for (i, &y) in data.labels.iter().enumerate() {
        syms.push(2 * ids[i]);
        syms.push(2 * y as u64 + 1);
    }
    syms.push(2 * ids[data.len()]);
    Ok(SymbolStream::new(syms, SearchBackend::default()))
}

/// Recurrence ladder of the joint feature/label pattern anchored at time 0.
pub fn pr_build_ladder(data: &LabeledSeries, scheme: &PartitionScheme) -> Result<RecurrenceLadder> {
    let mut streams: HashMap<u32, SymbolStream> = HashMap::new();
    let mut ladder = RecurrenceLadder::start();
    for k in 1u32.. {
        let lambda = ladder.current_lambda() as usize;
        if lambda >= data.len() {
            break;
        }
        let level = scheme.effective_level(k);
        if !streams.contains_key(&level) {
            streams.insert(level, interleaved_stream(data, scheme, k)?);
        }
        match streams[&level].find_recurrence(2 * lambda + 1, 2) {
            Some(tau) => ladder.push(tau as u64),
            None => break,
        }
    }
    Ok(ladder)
}

/// `eta_kappa = (1/kappa) sum_j Y_{-tau_j}` with its decision.
pub fn estimate_eta(data: &LabeledSeries, scheme: &PartitionScheme) -> Result<EtaEstimate> {
    let ladder = pr_build_ladder(data, scheme)?;
    let labels: Vec<u8> = ladder.taus.iter().map(|&t| data.label_at_lag(t)).collect();
    EtaEstimate::from_labels(&labels)
}

/// `2 |eta_hat - eta|`, the ceiling on the conditional excess error of the
/// plug-in rule over the Bayes rule.
pub fn excess_risk_bound(eta_hat: f64, eta_true: f64) -> Result<f64> {
    for (name, v) in [("eta_hat", eta_hat), ("eta_true", eta_true)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(precondition(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok(2.0 * (eta_hat - eta_true).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::dyadic_scheme;

    fn bin() -> PartitionScheme {
        PartitionScheme::alphabet(2).unwrap()
    }

    fn alternating() -> LabeledSeries {
        let x = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let y = x[..5].iter().map(|&v| v as u8).collect();
        LabeledSeries::scalar(&x, y).unwrap()
    }

    #[test]
    fn alternating_trace() {
        let d = alternating();
        let l = pr_build_ladder(&d, &bin()).unwrap();
        assert_eq!(l.taus[0], 2);
        let est = estimate_eta(&d, &bin()).unwrap();
        assert_eq!(est.eta, 0.0);
        assert_eq!(est.decision, 0);
    }

    #[test]
    fn constant_series() {
        let d = LabeledSeries::scalar(&[0.7; 9], vec![1; 8]).unwrap();
        let l = pr_build_ladder(&d, &dyadic_scheme()).unwrap();
        assert!(l.taus.iter().all(|&t| t == 1));
        assert_eq!(l.kappa(), 7);
        let est = estimate_eta(&d, &dyadic_scheme()).unwrap();
        assert_eq!((est.eta, est.decision), (1.0, 1));
    }

    #[test]
    fn all_ones_labels() {
        let x = [0.1, 0.9, 0.1, 0.9, 0.1, 0.9, 0.1, 0.9, 0.1];
        let d = LabeledSeries::scalar(&x, vec![1; 8]).unwrap();
        let est = estimate_eta(&d, &dyadic_scheme()).unwrap();
        assert!(est.k >= 1);
        assert_eq!(est.eta, 1.0);
    }

    #[test]
    fn tie_goes_to_class_one() {
        let est = EtaEstimate::from_labels(&[1, 0]).unwrap();
        assert_eq!(est.eta, 0.5);
        assert_eq!(est.decision, 1);
        assert_eq!(plug_in_decision(0.49), 0);
    }

    #[test]
    fn no_history_is_insufficient() {
        let d = LabeledSeries::scalar(&[0.3], vec![]).unwrap();
        assert!(matches!(estimate_eta(&d, &bin()), Err(_)));
        let d = LabeledSeries::scalar(&[0.0, 1.0], vec![0]).unwrap();
        assert!(matches!(estimate_eta(&d, &bin()), Err(Error::InsufficientData)));
    }

    #[test]
    fn label_must_match_too() {
        // Features repeat with period 1 but labels disagree at the only
        // candidate shifts.
        let d = LabeledSeries::scalar(&[0.0, 0.0, 0.0], vec![1, 0]).unwrap();
        let l = pr_build_ladder(&d, &bin()).unwrap();
        assert_eq!(l.kappa(), 0);
    }

    #[test]
    fn series_validation() {
        assert!(LabeledSeries::scalar(&[0.0, 1.0], vec![0, 1]).is_err());
        assert!(LabeledSeries::scalar(&[0.0, 1.0], vec![2]).is_err());
        assert!(LabeledSeries::new(vec![vec![0.0], vec![0.0, 1.0]], vec![0]).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(excess_risk_bound(0.5, 0.5).unwrap(), 0.0);
        assert!((excess_risk_bound(0.9, 0.6).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(excess_risk_bound(0.0, 1.0).unwrap(), 2.0);
        assert!(excess_risk_bound(1.2, 0.0).is_err());
    }

    #[test]
    fn product_cells_in_two_dimensions() {
        // Second coordinate separates the rows the first cannot.
        let f = vec![
            vec![0.1, 0.1],
            vec![0.1, 0.9],
            vec![0.1, 0.1],
            vec![0.1, 0.9],
            vec![0.1, 0.1],
        ];
        let d = LabeledSeries::new(f, vec![0, 1, 0, 1]).unwrap();
        let l = pr_build_ladder(&d, &dyadic_scheme()).unwrap();
        assert_eq!(l.taus[0], 2);
        assert_eq!(estimate_eta(&d, &dyadic_scheme()).unwrap().eta, 0.0);
    }

    #[test]
    fn cell_preserving_map_leaves_estimate_unchanged() {
        let scheme: PartitionScheme = "dyadic:8".parse().unwrap();
        let grid = |j: i32| (j as f64 + 0.5) / 256.0;
        let js = [3, -7, 3, 12, -7, 3, 12, 3, -7, 3, 12, 3];
        let x: Vec<f64> = js.iter().map(|&j| grid(j)).collect();
        let y: Vec<u8> = js[..js.len() - 1].iter().map(|&j| u8::from(j > 0)).collect();
        let moved: Vec<f64> = x.iter().map(|&v| v + v.signum() / 2048.0).collect();
        let a = LabeledSeries::scalar(&x, y.clone()).unwrap();
        let b = LabeledSeries::scalar(&moved, y).unwrap();
        assert_eq!(
            pr_build_ladder(&a, &scheme).unwrap(),
            pr_build_ladder(&b, &scheme).unwrap()
        );
        assert_eq!(
            estimate_eta(&a, &scheme).unwrap(),
            estimate_eta(&b, &scheme).unwrap()
        );
    }
}
