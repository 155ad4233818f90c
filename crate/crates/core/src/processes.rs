//! Stationary ergodic sample-path generators with exact conditional laws.
//!
//! A [`ProcessSpec`] is the serializable description; [`ProcessSpec::build`]
//! validates it into a [`ProcessModel`] (or a [`LabeledCellProcess`] for the
//! classification setting). Paths are deterministic functions of
//! `(seed, length)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StdNormal};

use crate::error::{precondition, Error, Result};
use crate::estimators::QuerySet;
use crate::pattern_recognition::LabeledSeries;
use crate::rng::{rng_from_seed, Rng};

pub const DEFAULT_AR1_BURN_IN: usize = 10_000;

fn default_burn_in() -> usize {
    DEFAULT_AR1_BURN_IN
}

fn default_feature_range() -> (f64, f64) {
    (-1.0, 1.0)
}

/// Serializable process description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProcessSpec {
    Bernoulli {
        p: f64,
    },
    Uniform,
    Constant {
        value: f64,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        emission: Option<Vec<f64>>,
    },
    ClippedAr1 {
        a: f64,
        noise_sd: f64,
        bound_d: f64,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
    },
    Rotation {
        alpha: f64,
        threshold: f64,
    },
    LabeledCell {
        breakpoints: Vec<f64>,
        cell_probs: Vec<f64>,
        #[serde(default = "default_feature_range")]
        feature_range: (f64, f64),
    },
}

impl ProcessSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::Bernoulli { .. } => "bernoulli",
            ProcessSpec::Uniform => "uniform",
            ProcessSpec::Constant { .. } => "constant",
            ProcessSpec::Markov { .. } => "markov",
            ProcessSpec::ClippedAr1 { .. } => "clipped-ar1",
            ProcessSpec::Rotation { .. } => "rotation",
            ProcessSpec::LabeledCell { .. } => "labeled-cell",
        }
    }

    pub fn is_labeled(&self) -> bool {
        matches!(self, ProcessSpec::LabeledCell { .. })
    }

    /// Validates a scalar-valued process.
    pub fn build(&self) -> Result<ProcessModel> {
        match self {
            ProcessSpec::Bernoulli { p } => iid_bernoulli(*p),
            ProcessSpec::Uniform => Ok(iid_uniform()),
            ProcessSpec::Constant { value } => constant(*value),
            ProcessSpec::Markov {
                transition,
                emission,
            } => markov_chain(transition.clone(), emission.clone()),
            ProcessSpec::ClippedAr1 {
                a,
                noise_sd,
                bound_d,
                burn_in,
            } => clipped_ar1(*a, *noise_sd, *bound_d, *burn_in),
            ProcessSpec::Rotation { alpha, threshold } => rotation_process(*alpha, *threshold),
            ProcessSpec::LabeledCell { .. } => Err(Error::InvalidParameter(
                "labeled-cell produces labeled series; use build_labeled".into(),
            )),
        }
    }

    pub fn build_labeled(&self) -> Result<LabeledCellProcess> {
        match self {
            ProcessSpec::LabeledCell {
                breakpoints,
                cell_probs,
                feature_range,
            } => labeled_cell_process(breakpoints.clone(), cell_probs.clone(), *feature_range),
            other => Err(Error::InvalidParameter(format!(
                "`{}` is not a labeled process",
                other.name()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    /// Conditional law equals the marginal.
    Full,
    /// Conditional law depends on `X_{-1}` only.
    Markov1,
    None,
}

/// Exact conditional law of `X_0` given the past.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleConditional {
    /// Finite support, ascending values with their probabilities.
    Pmf(Vec<(f64, f64)>),
    Uniform01,
    /// `clamp(N(mean, sd^2), -bound, bound)`.
    ClampedGaussian { mean: f64, sd: f64, bound: f64 },
}

impl OracleConditional {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            OracleConditional::Pmf(pmf) => pmf.iter().filter(|(v, _)| *v <= x).map(|(_, p)| p).sum(),
            OracleConditional::Uniform01 => x.clamp(0.0, 1.0),
            OracleConditional::ClampedGaussian { mean, sd, bound } => {
                if x < -bound {
                    0.0
                } else if x >= *bound {
                    1.0
                } else {
                    std_normal().cdf((x - mean) / sd)
                }
            }
        }
    }

    /// `P(X < x)`.
    fn cdf_left(&self, x: f64) -> f64 {
        match self {
            OracleConditional::Pmf(pmf) => pmf.iter().filter(|(v, _)| *v < x).map(|(_, p)| p).sum(),
            OracleConditional::Uniform01 => x.clamp(0.0, 1.0),
            OracleConditional::ClampedGaussian { mean, sd, bound } => {
                if x <= -bound {
                    0.0
                } else if x > *bound {
                    1.0
                } else {
                    std_normal().cdf((x - mean) / sd)
                }
            }
        }
    }

    pub fn prob(&self, set: &QuerySet) -> f64 {
        set.intervals()
            .iter()
            .map(|iv| {
                let below = if iv.lo_closed {
                    self.cdf_left(iv.lo)
                } else {
                    self.cdf(iv.lo)
                };
                self.cdf(iv.hi) - below
            })
            .sum()
    }

    pub fn mean(&self) -> f64 {
        match self {
            OracleConditional::Pmf(pmf) => pmf.iter().map(|(v, p)| v * p).sum(),
            OracleConditional::Uniform01 => 0.5,
            &OracleConditional::ClampedGaussian { mean, sd, bound } => {
                clamped_gaussian_mean(mean, sd, bound)
            }
        }
    }
}

fn std_normal() -> StdNormal {
    StdNormal::standard()
}

/// `E[clamp(N(mu, sigma^2), -d, d)]`.
pub fn clamped_gaussian_mean(mu: f64, sigma: f64, d: f64) -> f64 {
    if d.is_infinite() {
        return mu;
    }
    let n = std_normal();
    let lo = (-d - mu) / sigma;
    let hi = (d - mu) / sigma;
    -d * n.cdf(lo) + d * (1.0 - n.cdf(hi)) + mu * (n.cdf(hi) - n.cdf(lo))
        + sigma * (n.pdf(lo) - n.pdf(hi))
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Bernoulli { p: f64 },
    Uniform,
    Constant { value: f64 },
    Markov(MarkovChain),
    ClippedAr1 { a: f64, noise_sd: f64, bound_d: f64, burn_in: usize },
    Rotation { alpha: f64, threshold: f64 },
}

/// A validated scalar process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessModel {
    spec: ProcessSpec,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    transition: Vec<Vec<f64>>,
    emission: Vec<f64>,
    stationary: Vec<f64>,
}

impl MarkovChain {
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn emission(&self) -> &[f64] {
        &self.emission
    }

    fn state_of(&self, value: f64) -> Result<usize> {
        self.emission
            .iter()
            .position(|&e| e == value)
            .ok_or_else(|| Error::InvalidParameter(format!("{value} is not an emitted value")))
    }
}

pub fn iid_bernoulli(p: f64) -> Result<ProcessModel> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("bernoulli p = {p} outside (0, 1)")));
    }
    Ok(ProcessModel {
        spec: ProcessSpec::Bernoulli { p },
        kind: Kind::Bernoulli { p },
    })
}

/// I.i.d. uniform on `[0, 1)`.
pub fn iid_uniform() -> ProcessModel {
    ProcessModel {
        spec: ProcessSpec::Uniform,
        kind: Kind::Uniform,
    }
}

pub fn constant(value: f64) -> Result<ProcessModel> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter("constant must be finite".into()));
    }
    Ok(ProcessModel {
        spec: ProcessSpec::Constant { value },
        kind: Kind::Constant { value },
    })
}

/// Finite-state chain started from its stationary law. `emission[s]` is the
/// value emitted in state `s` (defaults to `s`); emissions must be distinct so
/// the oracle can recover the state from the last value.
pub fn markov_chain(transition: Vec<Vec<f64>>, emission: Option<Vec<f64>>) -> Result<ProcessModel> {
    let n = transition.len();
    if n == 0 || transition.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("transition matrix must be square and nonempty".into()));
    }
    for (i, row) in transition.iter().enumerate() {
        if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParameter(format!("row {i} has an entry outside [0, 1]")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("row {i} sums to {s}, not 1")));
        }
    }
    if !is_primitive(&transition) {
        return Err(Error::InvalidParameter(
            "transition matrix must be irreducible and aperiodic".into(),
        ));
    }
    let emission = emission.unwrap_or_else(|| (0..n).map(|s| s as f64).collect());
    if emission.len() != n {
        return Err(Error::InvalidParameter("one emission value per state".into()));
    }
    for (i, e) in emission.iter().enumerate() {
        if !e.is_finite() || emission[..i].contains(e) {
            return Err(Error::InvalidParameter("emissions must be finite and distinct".into()));
        }
    }
    let stationary = stationary_distribution(&transition)?;
    Ok(ProcessModel {
        spec: ProcessSpec::Markov {
            transition: transition.clone(),
            emission: Some(emission.clone()),
        },
        kind: Kind::Markov(MarkovChain {
            transition,
            emission,
            stationary,
        }),
    })
}

/// A nonnegative matrix is primitive iff its `(n-1)^2 + 1`-th power is
/// strictly positive (Wielandt).
fn is_primitive(p: &[Vec<f64>]) -> bool {
    let n = p.len();
    let pattern = DMatrix::from_fn(n, n, |i, j| if p[i][j] > 0.0 { 1.0 } else { 0.0 });
    let boolean = |m: DMatrix<f64>| m.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
    let mut exp = (n - 1) * (n - 1) + 1;
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut base = pattern;
    while exp > 0 {
        if exp & 1 == 1 {
            result = boolean(&result * &base);
        }
        base = boolean(&base * &base);
        exp >>= 1;
    }
    result.iter().all(|&v| v > 0.0)
}

/// Solves `pi P = pi`, `sum(pi) = 1`.
pub fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut a = DMatrix::from_fn(n, n, |i, j| p[j][i] - if i == j { 1.0 } else { 0.0 });
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidParameter("singular stationary system".into()))?;
    Ok(pi.iter().map(|&v| v.max(0.0)).collect())
}

/// `X_n = clamp(a X_{n-1} + eps_n, -D, D)`, `eps_n ~ N(0, noise_sd^2)`.
pub fn clipped_ar1(a: f64, noise_sd: f64, bound_d: f64, burn_in: usize) -> Result<ProcessModel> {
    if !(a.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("|a| = {} must be < 1", a.abs())));
    }
    if !(noise_sd > 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidParameter("noise_sd must be positive".into()));
    }
    if !(bound_d > 0.0) {
        return Err(Error::InvalidParameter("bound_d must be positive".into()));
    }
    Ok(ProcessModel {
        spec: ProcessSpec::ClippedAr1 {
            a,
            noise_sd,
            bound_d,
            burn_in,
        },
        kind: Kind::ClippedAr1 {
            a,
            noise_sd,
            bound_d,
            burn_in,
        },
    })
}

/// `X_n = 1{frac(U + n alpha) < threshold}` with `U` uniform.
pub fn rotation_process(alpha: f64, threshold: f64) -> Result<ProcessModel> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter("rotation needs finite alpha and threshold in [0, 1]".into()));
    }
    Ok(ProcessModel {
        spec: ProcessSpec::Rotation { alpha, threshold },
        kind: Kind::Rotation { alpha, threshold },
    })
}

impl ProcessModel {
    pub fn name(&self) -> &'static str {
        self.spec.name()
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn markov(&self) -> Option<&MarkovChain> {
        match &self.kind {
            Kind::Markov(m) => Some(m),
            _ => None,
        }
    }

    pub fn oracle_kind(&self) -> OracleKind {
        match self.kind {
            Kind::Bernoulli { .. } | Kind::Uniform | Kind::Constant { .. } => OracleKind::Full,
            Kind::Markov(_) | Kind::ClippedAr1 { .. } => OracleKind::Markov1,
            Kind::Rotation { .. } => OracleKind::None,
        }
    }

    /// Whether the process takes finitely many values.
    pub fn is_finite_valued(&self) -> bool {
        matches!(
            self.kind,
            Kind::Bernoulli { .. } | Kind::Constant { .. } | Kind::Markov(_) | Kind::Rotation { .. }
        )
    }

    /// A path `(X_{-len}, ..., X_{-1})`, oldest first.
    pub fn sample(&self, seed: u64, len: usize) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        self.sample_with(&mut rng, len)
    }

    pub fn sample_with(&self, rng: &mut Rng, len: usize) -> Vec<f64> {
        match &self.kind {
            Kind::Bernoulli { p } => (0..len).map(|_| f64::from(u8::from(rng.random_bool(*p)))).collect(),
            Kind::Uniform => (0..len).map(|_| rng.random::<f64>()).collect(),
            Kind::Constant { value } => vec![*value; len],
            Kind::Markov(m) => {
                let mut out = Vec::with_capacity(len);
                if len == 0 {
                    return out;
                }
                let mut state = draw_index(rng, &m.stationary);
                out.push(m.emission[state]);
                for _ in 1..len {
                    state = draw_index(rng, &m.transition[state]);
                    out.push(m.emission[state]);
                }
                out
            }
            &Kind::ClippedAr1 {
                a,
                noise_sd,
                bound_d,
                burn_in,
            } => {
                let noise = Normal::new(0.0, noise_sd).expect("validated sd");
                let start_sd = noise_sd / (1.0 - a * a).sqrt();
                let mut x = (start_sd * rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .clamp(-bound_d, bound_d);
                for _ in 0..burn_in {
                    x = (a * x + noise.sample(rng)).clamp(-bound_d, bound_d);
                }
                (0..len)
                    .map(|_| {
                        x = (a * x + noise.sample(rng)).clamp(-bound_d, bound_d);
                        x
                    })
                    .collect()
            }
            &Kind::Rotation { alpha, threshold } => {
                let u: f64 = rng.random();
                (0..len)
                    .map(|n| {
                        let phase = (u + n as f64 * alpha).rem_euclid(1.0);
                        f64::from(u8::from(phase < threshold))
                    })
                    .collect()
            }
        }
    }

    /// Exact conditional law of the next value given `past` (oldest first).
    pub fn oracle(&self, past: &[f64]) -> Result<OracleConditional> {
        let last = || {
            past.last()
                .copied()
                .ok_or_else(|| precondition("a Markov oracle needs the last value"))
        };
        match &self.kind {
            Kind::Bernoulli { p } => Ok(OracleConditional::Pmf(vec![(0.0, 1.0 - p), (1.0, *p)])),
            Kind::Uniform => Ok(OracleConditional::Uniform01),
            Kind::Constant { value } => Ok(OracleConditional::Pmf(vec![(*value, 1.0)])),
            Kind::Markov(m) => {
                let row = &m.transition[m.state_of(last()?)?];
                let mut pmf: Vec<(f64, f64)> =
                    m.emission.iter().copied().zip(row.iter().copied()).collect();
                pmf.sort_by(|a, b| a.0.total_cmp(&b.0));
                Ok(OracleConditional::Pmf(pmf))
            }
            &Kind::ClippedAr1 {
                a,
                noise_sd,
                bound_d,
                ..
            } => Ok(OracleConditional::ClampedGaussian {
                mean: a * last()?,
                sd: noise_sd,
                bound: bound_d,
            }),
            Kind::Rotation { .. } => Err(Error::OracleUnavailable(self.name().into())),
        }
    }
}

fn draw_index(rng: &mut Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left u above the last partial sum.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// I.i.d. uniform features on `feature_range` with
/// `P(Y = 1 | X) = cell_probs[cell of X]`, cells `(-inf, b_1], ..., (b_m, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCellProcess {
    breakpoints: Vec<f64>,
    cell_probs: Vec<f64>,
    feature_range: (f64, f64),
}

/// A labeled path: the series handed to the classifier and the held-out
/// `Y_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub series: LabeledSeries,
    pub y0: u8,
}

pub fn labeled_cell_process(
    breakpoints: Vec<f64>,
    cell_probs: Vec<f64>,
    feature_range: (f64, f64),
) -> Result<LabeledCellProcess> {
    if cell_probs.len() != breakpoints.len() + 1 {
        return Err(Error::InvalidParameter("need one probability per cell".into()));
    }
    if cell_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParameter("cell probabilities must be in [0, 1]".into()));
    }
    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter("breakpoints must be finite and increasing".into()));
    }
    let (lo, hi) = feature_range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter("feature range must be a finite interval".into()));
    }
    Ok(LabeledCellProcess {
        breakpoints,
        cell_probs,
        feature_range,
    })
}

impl LabeledCellProcess {
    /// `eta(x) = P(Y_0 = 1 | X_0 = x)`; the past carries no extra information.
    pub fn eta(&self, x: f64) -> f64 {
        let cell = self.breakpoints.partition_point(|&b| b < x);
        self.cell_probs[cell]
    }

    /// `t` labeled past points plus `X_0`, and the hidden `Y_0`.
    pub fn sample(&self, seed: u64, t: usize) -> LabeledSample {
        let mut rng = rng_from_seed(seed);
        let (lo, hi) = self.feature_range;
        let mut xs = Vec::with_capacity(t + 1);
        let mut ys = Vec::with_capacity(t + 1);
        for _ in 0..=t {
            let x = lo + (hi - lo) * rng.random::<f64>();
            ys.push(u8::from(rng.random_bool(self.eta(x))));
            xs.push(x);
        }
        let y0 = ys.pop().expect("t + 1 labels");
        LabeledSample {
            series: LabeledSeries::scalar(&xs, ys).expect("consistent lengths"),
            y0,
        }
    }
}
