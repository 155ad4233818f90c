//! Refining interval partitions of the real line and their quantizers.
//!
//! Level `k` of a [`PartitionScheme`] splits the reals into finitely many
//! right semi-closed cells `(-inf, b_1], (b_1, b_2], ..., (b_{m-1}, inf)`.
//! Every breakpoint of level `k` is also a breakpoint of level `k + 1`, so the
//! generated sigma-algebras increase with `k`.
//!
//! Two schemes are provided:
//!
//! * `dyadic`: level `k` has breakpoints `-k + i * 2^-k` for
//!   `i = 0 ..= k * 2^(k+1)`, i.e. cells of width `2^-k` covering `[-k, k]`
//!   plus the two unbounded tails. Levels above [`DEFAULT_MAX_LEVEL`] reuse the
//!   partition of that level, since finer cells are below `f64` resolution
//!   for any value of moderate size.
//! * `alphabet:<n>`: the identity quantizer on the symbols `0, 1, ..., n-1`,
//!   identical at every level.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

/// Finest dyadic level that is materialized; deeper levels reuse it.
pub const DEFAULT_MAX_LEVEL: u32 = 40;

/// A cell of the level-`level` partition. `index` counts cells from the
/// lower tail, starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub level: u32,
    pub index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PartitionScheme {
    Dyadic { max_level: u32 },
    Alphabet { size: u32 },
}

impl Default for PartitionScheme {
    fn default() -> Self {
        dyadic_scheme()
    }
}

/// The dyadic refining scheme (range `[-k, k]`, width `2^-k` at level `k`).
pub fn dyadic_scheme() -> PartitionScheme {
    PartitionScheme::Dyadic {
        max_level: DEFAULT_MAX_LEVEL,
    }
}

impl PartitionScheme {
    pub fn alphabet(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter(
                "alphabet size must be positive".into(),
            ));
        }
        Ok(PartitionScheme::Alphabet { size })
    }

    pub fn is_finite_alphabet(&self) -> bool {
        matches!(self, PartitionScheme::Alphabet { .. })
    }

    /// Level whose partition actually applies at `k`. Two levels with the same
    /// effective level have identical partitions.
    pub fn effective_level(&self, k: u32) -> u32 {
        match *self {
            PartitionScheme::Dyadic { max_level } => k.min(max_level),
            PartitionScheme::Alphabet { .. } => 1,
        }
    }

    /// Number of cells `m_k`.
    pub fn cell_count(&self, k: u32) -> u64 {
        match *self {
            PartitionScheme::Dyadic { .. } => {
                let e = self.effective_level(k.max(1)) as u64;
                e * (1u64 << (e + 1)) + 2
            }
            PartitionScheme::Alphabet { size } => size as u64,
        }
    }

    /// Breakpoints `b_1 < ... < b_{m_k - 1}` of level `k`.
    ///
    /// For the alphabet scheme these are `0, 1, ..., n-2`, which puts symbol
    /// `s` alone in cell `s`.
    pub fn breakpoints(&self, k: u32) -> Result<Vec<f64>> {
        check_level(k)?;
        Ok(match *self {
            PartitionScheme::Dyadic { .. } => {
                let level = self.effective_level(k);
                let n = last_breakpoint_index(level);
                (0..=n).map(|i| dyadic_breakpoint(level, i)).collect()
            }
            PartitionScheme::Alphabet { size } => (0..size.saturating_sub(1)).map(f64::from).collect(),
        })
    }

    /// The quantizer `G_k`: the unique cell of level `k` containing `x`.
    pub fn quantize(&self, k: u32, x: f64) -> Result<CellId> {
        check_level(k)?;
        let index = self.cell_index(k, x)?;
        Ok(CellId { level: k, index })
    }

    /// Elementwise [`quantize`](Self::quantize).
    pub fn quantize_window(&self, k: u32, window: &[f64]) -> Result<Vec<CellId>> {
        if window.is_empty() {
            return Err(precondition("quantize_window needs a nonempty window"));
        }
        window.iter().map(|&x| self.quantize(k, x)).collect()
    }

    /// Cell indices only; the level is implied. Used by the pattern search.
    pub fn quantize_indices(&self, k: u32, values: &[f64]) -> Result<Vec<u64>> {
        check_level(k)?;
        values.iter().map(|&x| self.cell_index(k, x)).collect()
    }

    /// `(lower, upper)` of a cell: the cell is `(lower, upper]`, with
    /// infinite ends for the tails.
    pub fn cell_bounds(&self, cell: CellId) -> (f64, f64) {
        match *self {
            PartitionScheme::Dyadic { .. } => {
                let level = self.effective_level(cell.level);
                let n = last_breakpoint_index(level);
                let lower = if cell.index == 0 {
                    f64::NEG_INFINITY
                } else {
                    dyadic_breakpoint(level, cell.index - 1)
                };
                let upper = if cell.index > n {
                    f64::INFINITY
                } else {
                    dyadic_breakpoint(level, cell.index)
                };
                (lower, upper)
            }
            PartitionScheme::Alphabet { size } => {
                let i = cell.index as f64;
                let lower = if cell.index == 0 { f64::NEG_INFINITY } else { i - 1.0 };
                let upper = if cell.index + 1 >= size as u64 { f64::INFINITY } else { i };
                (lower, upper)
            }
        }
    }

    fn cell_index(&self, k: u32, x: f64) -> Result<u64> {
        if x.is_nan() {
            return Err(Error::NanInput);
        }
        match *self {
            PartitionScheme::Dyadic { .. } => Ok(dyadic_index(self.effective_level(k), x)),
            PartitionScheme::Alphabet { size } => {
                if x >= 0.0 && x < size as f64 && x.fract() == 0.0 {
                    Ok(x as u64)
                } else {
                    Err(Error::NotInAlphabet { value: x, size })
                }
            }
        }
    }
}

fn check_level(k: u32) -> Result<()> {
    if k == 0 {
        Err(precondition("quantizer levels start at 1"))
    } else {
        Ok(())
    }
}

fn last_breakpoint_index(level: u32) -> u64 {
    level as u64 * (1u64 << (level + 1))
}

// Exact in f64 for level <= 40: a multiple of 2^-40 of magnitude <= 40.
fn dyadic_breakpoint(level: u32, i: u64) -> f64 {
    let width = (-(level as f64)).exp2();
    -(level as f64) + i as f64 * width
}

fn dyadic_index(level: u32, x: f64) -> u64 {
    let k = level as f64;
    let n = last_breakpoint_index(level);
    if x <= -k {
        return 0;
    }
    if x > k {
        return n + 1;
    }
    // Cell j in 1..=n is (b_{j-1}, b_j]. The float estimate can be off by one
    // near a breakpoint, so settle it against the exact breakpoints.
    let mut j = (((x + k) * k.exp2()).ceil() as u64).clamp(1, n);
    while j > 1 && x <= dyadic_breakpoint(level, j - 1) {
        j -= 1;
    }
    while j < n && x > dyadic_breakpoint(level, j) {
        j += 1;
    }
    j
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PartitionScheme::Dyadic { max_level } if max_level == DEFAULT_MAX_LEVEL => {
                write!(f, "dyadic")
            }
            PartitionScheme::Dyadic { max_level } => write!(f, "dyadic:{max_level}"),
            PartitionScheme::Alphabet { size } => write!(f, "alphabet:{size}"),
        }
    }
}

impl FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_n = |rest: &str| {
            rest.parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad scheme parameter in `{s}`")))
        };
        if s == "dyadic" {
            Ok(dyadic_scheme())
        } else if let Some(rest) = s.strip_prefix("dyadic:") {
            let max_level = parse_n(rest)?;
            if !(1..=DEFAULT_MAX_LEVEL).contains(&max_level) {
                return Err(Error::InvalidParameter(format!(
                    "dyadic max level must be in 1..={DEFAULT_MAX_LEVEL}"
                )));
            }
            Ok(PartitionScheme::Dyadic { max_level })
        } else if let Some(rest) = s.strip_prefix("alphabet:") {
            PartitionScheme::alphabet(parse_n(rest)?)
        } else {
            Err(Error::Parse(format!(
                "unknown scheme `{s}` (expected `dyadic` or `alphabet:<n>`)"
            )))
        }
    }
}

impl TryFrom<String> for PartitionScheme {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PartitionScheme> for String {
    fn from(s: PartitionScheme) -> String {
        s.to_string()
    }
}
