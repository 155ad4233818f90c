//! Reference ladders computed straight from the definitions: a double loop
//! over shifts and positions, quantizing every value at every comparison.
//! Shares no code with the search kernel.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pattern_recognition::{pr_build_ladder, LabeledSeries};
use crate::quantization::{dyadic_scheme, PartitionScheme};
use crate::recurrence::{build_ladder_with, PastWindow, RecurrenceLadder, SearchBackend};
use crate::rng::{derive_seed, rng_from_seed};

fn ladder_from_taus(taus: Vec<u64>) -> RecurrenceLadder {
    let mut lambdas = vec![1u64];
    for &t in &taus {
        lambdas.push(lambdas.last().unwrap() + t);
    }
    RecurrenceLadder {
        matched_indices: taus.iter().map(|&t| -(t as i64)).collect(),
        taus,
        lambdas,
    }
}

pub fn brute_force_ladder(past: &PastWindow, scheme: &PartitionScheme) -> Result<RecurrenceLadder> {
    let x = past.values();
    let n = x.len();
    let mut taus = Vec::new();
    let mut lambda = 1usize;
    let mut k = 1u32;
    'stages: while lambda < n {
        for t in 1..=n - lambda {
            let mut same = true;
            for i in 0..lambda {
                let current = scheme.quantize(k, x[n - lambda + i])?;
                let earlier = scheme.quantize(k, x[n - lambda - t + i])?;
                if current.index != earlier.index {
                    same = false;
                    break;
                }
            }
            if same {
                taus.push(t as u64);
                lambda += t;
                k += 1;
                continue 'stages;
            }
        }
        break;
    }
    Ok(ladder_from_taus(taus))
}

/// Reference for the labeled ladder: features at `-lambda..=0` and labels at
/// `-lambda..=-1` must all agree with the shifted copy.
pub fn brute_force_pr_ladder(data: &LabeledSeries, scheme: &PartitionScheme) -> Result<RecurrenceLadder> {
    let f = data.features();
    let y = data.labels();
    let n = y.len();
    let mut taus = Vec::new();
    let mut lambda = 1usize;
    let mut k = 1u32;
    let cell = |k: u32, row: &Vec<f64>| -> Result<Vec<u64>> {
        row.iter().map(|&v| scheme.quantize(k, v).map(|c| c.index)).collect()
    };
    'stages: while lambda < n {
        for t in 1..=n - lambda {
            let mut same = true;
            for i in 0..=lambda {
                let now = n - lambda + i;
                let then = now - t;
                if cell(k, &f[now])? != cell(k, &f[then])? || (i < lambda && y[now] != y[then]) {
                    same = false;
                    break;
                }
            }
            if same {
                taus.push(t as u64);
                lambda += t;
                k += 1;
                continue 'stages;
            }
        }
        break;
    }
    Ok(ladder_from_taus(taus))
}

/// Randomized equivalence run between the search kernel and the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceSpec {
    #[serde(default = "default_binary")]
    pub binary_strings: usize,
    #[serde(default = "default_real")]
    pub real_strings: usize,
    #[serde(default = "default_min_len")]
    pub min_len: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_binary() -> usize {
    1000
}
fn default_real() -> usize {
    200
}
fn default_min_len() -> usize {
    8
}
fn default_max_len() -> usize {
    512
}

impl Default for EquivalenceSpec {
    fn default() -> Self {
        EquivalenceSpec {
            binary_strings: default_binary(),
            real_strings: default_real(),
            min_len: default_min_len(),
            max_len: default_max_len(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub binary_checked: usize,
    pub real_checked: usize,
    /// Descriptions of inputs where the two ladders differ.
    pub mismatches: Vec<String>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn run_equivalence(spec: &EquivalenceSpec) -> Result<EquivalenceReport> {
    let binary = PartitionScheme::alphabet(2)?;
    let dyadic = dyadic_scheme();
    let mut mismatches = Vec::new();
    let total = spec.binary_strings + spec.real_strings;
    for i in 0..total {
        let mut rng = rng_from_seed(derive_seed(spec.seed, i as u64));
        let len = rng.random_range(spec.min_len.max(1)..=spec.max_len.max(spec.min_len.max(1)));
        let (values, scheme): (Vec<f64>, _) = if i < spec.binary_strings {
            ((0..len).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect(), &binary)
        } else {
            // Small spread so level-1 and level-2 cells repeat often.
            let values = (0..len)
                .map(|_| 0.4 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            (values, &dyadic)
        };
        let past = PastWindow::new(values)?;
        let slow = brute_force_ladder(&past, scheme)?;
        for backend in [SearchBackend::Naive, SearchBackend::RollingHash] {
            let fast = build_ladder_with(&past, scheme, backend)?;
            if fast != slow {
                mismatches.push(format!(
                    "string {i} (len {len}, {scheme}, {backend:?}): kernel taus {:?} vs reference {:?}",
                    fast.taus, slow.taus
                ));
            }
        }
    }
    Ok(EquivalenceReport {
        binary_checked: spec.binary_strings,
        real_checked: spec.real_strings,
        mismatches,
    })
}

/// Labeled counterpart of [`run_equivalence`] on random binary features.
pub fn pr_ladders_agree(data: &LabeledSeries, scheme: &PartitionScheme) -> Result<bool> {
    Ok(pr_build_ladder(data, scheme)? == brute_force_pr_ladder(data, scheme)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::build_ladder;
    use proptest::prelude::*;

    fn bin() -> PartitionScheme {
        PartitionScheme::alphabet(2).unwrap()
    }

    #[test]
    fn reference_on_hand_trace() {
        let p = PastWindow::new(vec![1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap();
        let l = brute_force_ladder(&p, &bin()).unwrap();
        assert_eq!(l.taus, vec![2, 3]);
        assert_eq!(l.lambdas, vec![1, 3, 6]);
        assert_eq!(l, build_ladder(&p, &bin()).unwrap());
    }

    #[test]
    fn reference_on_constant() {
        let p = PastWindow::new(vec![1.0; 12]).unwrap();
        let l = brute_force_ladder(&p, &bin()).unwrap();
        assert!(l.taus.iter().all(|&t| t == 1));
        assert_eq!(l.kappa(), 11);
    }

    #[test]
    fn small_equivalence_run() {
        let spec = EquivalenceSpec {
            binary_strings: 50,
            real_strings: 20,
            min_len: 8,
            max_len: 128,
            seed: 3,
        };
        let r = run_equivalence(&spec).unwrap();
        assert!(r.passed(), "{:?}", r.mismatches);
    }

    proptest! {
        #[test]
        fn kernel_taus_are_minimal(bits in proptest::collection::vec(0u8..2, 2..200)) {
            let v: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
            let p = PastWindow::new(v.clone()).unwrap();
            let l = build_ladder(&p, &bin()).unwrap();
            let n = v.len();
            for (j, &tau) in l.taus.iter().enumerate() {
                let lam = l.lambdas[j] as usize;
                let pat = &v[n - lam..];
                let tau = tau as usize;
                prop_assert_eq!(&v[n - lam - tau..n - tau], pat);
                for t in 1..tau {
                    prop_assert_ne!(&v[n - lam - t..n - t], pat);
                }
            }
        }

        #[test]
        fn extending_the_past_keeps_found_taus(
            bits in proptest::collection::vec(0u8..2, 2..200),
            extra in proptest::collection::vec(0u8..2, 0..200),
        ) {
            let short: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
            let mut long: Vec<f64> = extra.iter().map(|&b| b as f64).collect();
            long.extend_from_slice(&short);
            let a = build_ladder(&PastWindow::new(short.clone()).unwrap(), &bin()).unwrap();
            let b = build_ladder(&PastWindow::new(long.clone()).unwrap(), &bin()).unwrap();
            prop_assert!(b.kappa() >= a.kappa());
            prop_assert_eq!(&b.taus[..a.kappa()], &a.taus[..]);
            // lambda_kappa <= t < lambda_{kappa+1} when the next stage exists.
            if b.kappa() > a.kappa() {
                prop_assert!(b.lambdas[a.kappa() + 1] > short.len() as u64);
            }
            prop_assert!(a.current_lambda() <= short.len() as u64);
        }

        #[test]
        fn labeled_kernel_matches_reference(
            xs in proptest::collection::vec(0u8..2, 2..120),
            ys in proptest::collection::vec(0u8..2, 120),
        ) {
            let features: Vec<f64> = xs.iter().map(|&b| b as f64).collect();
            let labels = ys[..xs.len() - 1].to_vec();
            let d = LabeledSeries::scalar(&features, labels).unwrap();
            prop_assert!(pr_ladders_agree(&d, &bin()).unwrap());
        }

        #[test]
        fn labeled_kernel_matches_reference_dyadic(
            xs in proptest::collection::vec(-1.5f64..1.5, 2..100),
            ys in proptest::collection::vec(0u8..2, 100),
        ) {
            let labels = ys[..xs.len() - 1].to_vec();
            let d = LabeledSeries::scalar(&xs, labels).unwrap();
            prop_assert!(pr_ladders_agree(&d, &dyadic_scheme()).unwrap());
        }
    }
}
