//! Oracle equivalence, the matched-sample identity, and consistency
//! experiments.

mod brute_force;
mod experiments;
mod lemma2;
mod report;

pub use brute_force::{
    brute_force_ladder, brute_force_pr_ladder, pr_ladders_agree, run_equivalence,
    EquivalenceReport, EquivalenceSpec,
};
pub use experiments::{
    classification_experiment, consistency_experiment, kolmogorov_on_grid, online_experiment,
    parse_grid, run_experiment, total_variation, ExperimentKind, ExperimentSpec,
};
pub use lemma2::{lemma2_check, AtomSpec, Lemma2Config, Lemma2Report, Verdict};
pub use report::{aggregate, quantile, Aggregate, ConvergenceReport, Record};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::QuerySet;
use crate::processes::ProcessSpec;
use crate::quantization::PartitionScheme;

fn default_se_multiple() -> f64 {
    3.0
}

fn default_path_len() -> usize {
    256
}

/// Serializable form of a [`Lemma2Config`] plus the process it runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma2Spec {
    pub process: ProcessSpec,
    #[serde(default)]
    pub scheme: PartitionScheme,
    pub stage: usize,
    pub atom: AtomSpec,
    pub query: String,
    pub paths: usize,
    #[serde(default = "default_path_len")]
    pub path_len: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_se_multiple")]
    pub se_multiple: f64,
}

impl Lemma2Spec {
    pub fn run(&self) -> Result<Lemma2Report> {
        let model = self.process.build()?;
        let cfg = Lemma2Config {
            stage: self.stage,
            atom: self.atom.clone(),
            query: self.query.parse::<QuerySet>()?,
            paths: self.paths,
            path_len: self.path_len,
            seed: self.seed,
            se_multiple: self.se_multiple,
        };
        lemma2_check(&model, &self.scheme, &cfg)
    }
}

/// Config of the `verify` command; absent sections are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default)]
    pub oracle_equivalence: Option<EquivalenceSpec>,
    #[serde(default)]
    pub lemma2: Vec<Lemma2Spec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub oracle_equivalence: Option<EquivalenceReport>,
    pub lemma2: Vec<Lemma2Report>,
}

impl VerifyReport {
    /// No mismatch and no failed identity check. Inconclusive checks do not
    /// count as failures.
    pub fn passed(&self) -> bool {
        self.oracle_equivalence.as_ref().is_none_or(|r| r.passed())
            && self.lemma2.iter().all(|r| r.verdict != Verdict::Fail)
    }
}

pub fn run_verify(spec: &VerifySpec) -> Result<VerifyReport> {
    let oracle_equivalence = spec
        .oracle_equivalence
        .as_ref()
        .map(run_equivalence)
        .transpose()?;
    let lemma2 = spec.lemma2.iter().map(Lemma2Spec::run).collect::<Result<_>>()?;
    Ok(VerifyReport {
        oracle_equivalence,
        lemma2,
    })
}
