//! Nonparametric estimation of conditional laws, auto-regression and
//! classification for stationary ergodic time series via recurrence times of
//! quantized patterns.
//!
//! The pipeline for a window `(X_{-t}, ..., X_{-1})`:
//!
//! 1. [`quantization`] maps values to cells of a refining partition.
//! 2. [`recurrence`] finds the recurrence times of ever longer quantized
//!    suffixes and collects the values that followed each earlier occurrence.
//! 3. [`estimators`] turns those matched samples into probability, CDF and
//!    mean estimates; [`pattern_recognition`] does the same with labels.
//!
//! [`processes`] and [`verification`] provide simulators with exact
//! conditional laws and the experiment drivers that check consistency.

pub mod error;
pub mod estimators;
pub mod pattern_recognition;
pub mod processes;
pub mod quantization;
pub mod recurrence;
pub mod rng;
pub mod verification;

pub use error::{Error, Result};
pub use estimators::{
    estimate_conditional, estimate_with_ladder, online_predict, regress, EmpiricalConditional,
    Interval, QuerySet, RegressionConfig,
};
pub use pattern_recognition::{
    estimate_eta, excess_risk_bound, pr_build_ladder, EtaEstimate, LabeledSeries,
};
pub use processes::{OracleConditional, OracleKind, ProcessModel, ProcessSpec};
pub use quantization::{dyadic_scheme, CellId, PartitionScheme};
pub use recurrence::{
    build_ladder, build_ladder_with, matched_samples, next_recurrence, PastWindow,
    RecurrenceLadder, SearchBackend,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
