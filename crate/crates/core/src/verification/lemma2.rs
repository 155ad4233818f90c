//! Monte-Carlo check that a matched sample has the same law as the present
//! value on every atom of the pattern sigma-field:
//!
//! `P(B, X_{-tau_j} in C) = P(B, X_0 in C)`
//!
//! where `B` is an event determined by the level-`(j-1)` quantized pattern of
//! length `lambda_{j-1}`. Both sides are estimated as plain frequencies over
//! independent stationary paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::estimators::QuerySet;
use crate::processes::{OracleKind, ProcessModel};
use crate::quantization::PartitionScheme;
use crate::recurrence::{build_ladder_stages, PastWindow, SearchBackend};
use crate::rng::derive_seed;

/// The conditioning event: the quantized pattern `G_{j-1}(X_{-lambda_{j-1}}^{-1})`
/// ends with the cells of `suffix`, and (optionally) `lambda_{j-1} = lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    /// Values whose cells form the required pattern suffix, oldest first.
    pub suffix: Vec<f64>,
    #[serde(default)]
    pub lambda: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Lemma2Config {
    pub stage: usize,
    pub atom: AtomSpec,
    pub query: QuerySet,
    pub paths: usize,
    /// Length of the observed past on each path.
    pub path_len: usize,
    pub seed: u64,
    pub se_multiple: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma2Report {
    pub paths: usize,
    /// Paths whose ladder ended before stage `j`; excluded from both sides.
    pub truncated: usize,
    pub atom_hits: usize,
    /// Frequency of `B` and `X_{-tau_j} in C`.
    pub freq_matched: f64,
    /// Frequency of `B` and `X_0 in C`.
    pub freq_present: f64,
    pub pooled_se: f64,
    pub verdict: Verdict,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    truncated: usize,
    atom: usize,
    matched: usize,
    present: usize,
}

impl Counts {
    fn merge(self, o: Counts) -> Counts {
        Counts {
            truncated: self.truncated + o.truncated,
            atom: self.atom + o.atom,
            matched: self.matched + o.matched,
            present: self.present + o.present,
        }
    }
}

fn one_path(
    model: &ProcessModel,
    scheme: &PartitionScheme,
    cfg: &Lemma2Config,
    atom_cells: &[u64],
    atom_level: u32,
    index: usize,
) -> Result<Counts> {
    let mut path = model.sample(derive_seed(cfg.seed, index as u64), cfg.path_len + 1);
    let x0 = path.pop().expect("path_len + 1 values");
    let past = PastWindow::new(path)?;
    let ladder = build_ladder_stages(&past, scheme, SearchBackend::default(), cfg.stage)?;
    if ladder.kappa() < cfg.stage {
        return Ok(Counts {
            truncated: 1,
            ..Counts::default()
        });
    }
    let lambda_prev = ladder.lambdas[cfg.stage - 1];
    let s = atom_cells.len();
    let in_atom = lambda_prev as usize >= s
        && cfg.atom.lambda.is_none_or(|m| m == lambda_prev)
        && {
            let tail = &past.values()[past.len() - s..];
            scheme.quantize_indices(atom_level, tail)? == atom_cells
        };
    if !in_atom {
        return Ok(Counts::default());
    }
    let tau = ladder.taus[cfg.stage - 1];
    Ok(Counts {
        truncated: 0,
        atom: 1,
        matched: usize::from(cfg.query.contains(past.at_lag(tau))),
        present: usize::from(cfg.query.contains(x0)),
    })
}

pub fn lemma2_check(model: &ProcessModel, scheme: &PartitionScheme, cfg: &Lemma2Config) -> Result<Lemma2Report> {
    if cfg.stage == 0 {
        return Err(precondition("stage j starts at 1"));
    }
    if model.oracle_kind() == OracleKind::None {
        return Err(precondition(format!(
            "`{}` is not known to be a stationary process with an oracle",
            model.name()
        )));
    }
    if cfg.atom.suffix.is_empty() {
        return Err(precondition("atom suffix must be nonempty"));
    }
    // G_0 is not defined; stage 1 conditions on the level-1 cell of X_{-1}.
    let atom_level = (cfg.stage as u32 - 1).max(1);
    let atom_cells = scheme.quantize_indices(atom_level, &cfg.atom.suffix)?;

    let counts = (0..cfg.paths)
        .into_par_iter()
        .map(|i| one_path(model, scheme, cfg, &atom_cells, atom_level, i))
        .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))?;

    let effective = cfg.paths - counts.truncated;
    if effective == 0 || counts.atom == 0 {
        return Ok(Lemma2Report {
            paths: cfg.paths,
            truncated: counts.truncated,
            atom_hits: counts.atom,
            freq_matched: f64::NAN,
            freq_present: f64::NAN,
            pooled_se: f64::NAN,
            verdict: Verdict::Inconclusive,
        });
    }
    let n = effective as f64;
    let freq_matched = counts.matched as f64 / n;
    let freq_present = counts.present as f64 / n;
    let pooled = (freq_matched + freq_present) / 2.0;
    let pooled_se = (2.0 * pooled * (1.0 - pooled) / n).sqrt();
    let diff = (freq_matched - freq_present).abs();
    let verdict = if diff <= cfg.se_multiple * pooled_se {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Lemma2Report {
        paths: cfg.paths,
        truncated: counts.truncated,
        atom_hits: counts.atom,
        freq_matched,
        freq_present,
        pooled_se,
        verdict,
    })
}
