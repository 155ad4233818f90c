//! Backward search for the most recent earlier occurrence of the suffix of a
//! symbol sequence.
//!
//! The pattern is `seq[n - len..n]`; a shift `s` is a match when
//! `seq[n - len - s..n - s]` equals it. Shifts are taken in multiples of
//! `step` (the labeled search interleaves two symbol streams and only even
//! shifts are meaningful there).

use serde::{Deserialize, Serialize};

/// Pattern search strategy. Both return identical results; the hashed search
/// confirms every hash hit by direct comparison. The direct scan is the
/// default: mismatches on real data surface within a few symbols, so it
/// beats the fingerprint bookkeeping in practice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchBackend {
    /// Direct windowed comparison at every candidate shift.
    #[default]
    Naive,
    /// Rabin-Karp fingerprints over the quantized symbols.
    RollingHash,
}

const MODULUS: u64 = (1 << 61) - 1;
const BASE: u64 = 0x1f3d_5b79_a3c4_e2d1 % MODULUS;

fn mul_mod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let lo = (p as u64) & MODULUS;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

fn sub_mod(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MODULUS - b
    }
}

/// A quantized symbol stream, optionally with prefix fingerprints.
#[derive(Debug, Clone)]
pub(crate) struct SymbolStream {
    syms: Vec<u64>,
    prefix: Vec<u64>,
    powers: Vec<u64>,
}

impl SymbolStream {
    pub(crate) fn new(syms: Vec<u64>, backend: SearchBackend) -> Self {
        let (prefix, powers) = match backend {
            SearchBackend::Naive => (Vec::new(), Vec::new()),
            SearchBackend::RollingHash => {
                let mut prefix = Vec::with_capacity(syms.len() + 1);
                let mut powers = Vec::with_capacity(syms.len() + 1);
                prefix.push(0);
                powers.push(1);
                let mut h = 0;
                let mut p = 1;
                for &s in &syms {
                    // +1 keeps symbol 0 from hashing like an empty position.
                    h = add_mod(mul_mod(h, BASE), (s % MODULUS) + 1);
                    p = mul_mod(p, BASE);
                    prefix.push(h);
                    powers.push(p);
                }
                (prefix, powers)
            }
        };
        SymbolStream {
            syms,
            prefix,
            powers,
        }
    }

    fn fingerprint(&self, start: usize, end: usize) -> u64 {
        sub_mod(
            self.prefix[end],
            mul_mod(self.prefix[start], self.powers[end - start]),
        )
    }

    /// Smallest `t >= 1` such that the window of length `len` ending
    /// `step * t` positions before the end equals the final window, or `None`
    /// if no such window fits.
    pub(crate) fn find_recurrence(&self, len: usize, step: usize) -> Option<usize> {
        let n = self.syms.len();
        assert!(step >= 1 && len >= 1 && len <= n);
        let pattern = &self.syms[n - len..];
        let max_t = (n - len) / step;
        if self.prefix.is_empty() {
            (1..=max_t).find(|&t| {
                let end = n - step * t;
                &self.syms[end - len..end] == pattern
            })
        } else {
            let target = self.fingerprint(n - len, n);
            (1..=max_t).find(|&t| {
                let end = n - step * t;
                self.fingerprint(end - len, end) == target && &self.syms[end - len..end] == pattern
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn finds_most_recent_occurrence() {
        // ..., pattern (1, 0, 1) occurs again 3 steps back.
        let syms = vec![1, 0, 1, 1, 0, 1];
        for backend in [SearchBackend::Naive, SearchBackend::RollingHash] {
            let s = SymbolStream::new(syms.clone(), backend);
            assert_eq!(s.find_recurrence(1, 1), Some(2));
            assert_eq!(s.find_recurrence(3, 1), Some(3));
            assert_eq!(s.find_recurrence(6, 1), None);
        }
    }

    #[test]
    fn step_two_skips_odd_shifts() {
        let syms = vec![5, 5, 5, 5, 5];
        let s = SymbolStream::new(syms, SearchBackend::RollingHash);
        assert_eq!(s.find_recurrence(3, 2), Some(1));
        assert_eq!(s.find_recurrence(4, 2), None);
    }

    proptest! {
        #[test]
        fn hashed_search_matches_naive(
            syms in proptest::collection::vec(0u64..3, 1..200),
            len_frac in 0.0f64..1.0,
            step in 1usize..3,
        ) {
            let len = 1 + ((syms.len() - 1) as f64 * len_frac) as usize;
            let naive = SymbolStream::new(syms.clone(), SearchBackend::Naive);
            let hashed = SymbolStream::new(syms, SearchBackend::RollingHash);
            prop_assert_eq!(naive.find_recurrence(len, step), hashed.find_recurrence(len, step));
        }
    }
}
