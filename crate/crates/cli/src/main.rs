//! `recur`: simulate, estimate, classify, verify and experiment.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure (including a failed
//! `verify`), 2 configuration error, 3 no recurrence in the window for
//! `estimate` / `classify`.

mod io;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use recur_core::verification::{parse_grid, run_experiment, run_verify, ExperimentSpec, VerifySpec};
use recur_core::{
    estimate_eta, estimate_with_ladder, matched_samples, Error, PartitionScheme,
    PastWindow, ProcessSpec, QuerySet, RegressionConfig, VERSION,
};

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InsufficientData => 3,
            Error::Io(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "recur", version, about = "Recurrence-time estimators for stationary time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a path from a simulator.
    Simulate(SimulateArgs),
    /// Estimate the conditional law of the next value of a series.
    Estimate(EstimateArgs),
    /// Estimate P(Y = 1 | past, X_0) for the last row of a labeled CSV.
    Classify(ClassifyArgs),
    /// Run oracle-equivalence and matched-sample checks from a JSON config.
    Verify(ConfigArgs),
    /// Run a consistency experiment from a JSON config and write its CSV.
    Experiment(ConfigArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// bernoulli, uniform, constant, markov, clipped-ar1, rotation, labeled-cell
    #[arg(long)]
    process: String,
    #[arg(long)]
    seed: u64,
    /// Number of observations (labeled: number of labeled rows before the query).
    #[arg(long)]
    length: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    value: Option<f64>,
    /// Rows separated by `;`, entries by `,`.
    #[arg(long)]
    transition: Option<String>,
    #[arg(long, value_delimiter = ',')]
    emission: Option<Vec<f64>>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long = "bound-D", alias = "bound-d")]
    bound_d: Option<f64>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    breakpoints: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    cell_probs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    feature_range: Option<Vec<f64>>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    /// `dyadic`, `dyadic:N` or `alphabet:N`.
    #[arg(long, default_value = "dyadic")]
    scheme: PartitionScheme,
    /// Query set such as `(0,1]`, `{1}` or `(-inf,0]|{2}`; repeatable.
    #[arg(long)]
    query: Vec<String>,
    /// `lo:hi:step` grid for the CDF.
    #[arg(long)]
    cdf_grid: Option<String>,
    /// Clamp the regression estimate to [-D, D].
    #[arg(long = "clip-D", alias = "clip-d")]
    clip_d: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "dyadic")]
    scheme: PartitionScheme,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the output path in the config.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>, Failure> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Failure::config(format!("bad transition entry `{v}`")))
                })
                .collect()
        })
        .collect()
}

/// Assembles the process description from flags; flags that do not belong to
/// the chosen process are rejected by the spec's own validation.
fn process_spec(a: &SimulateArgs) -> Result<ProcessSpec, Failure> {
    let mut m = Map::new();
    m.insert("kind".into(), json!(a.process));
    let mut put = |key: &str, v: Option<Value>| {
        if let Some(v) = v {
            m.insert(key.into(), v);
        }
    };
    put("p", a.p.map(Value::from));
    put("value", a.value.map(Value::from));
    put("transition", a.transition.as_deref().map(parse_matrix).transpose()?.map(|t| json!(t)));
    put("emission", a.emission.as_ref().map(|v| json!(v)));
    put("a", a.a.map(Value::from));
    put("noise_sd", a.noise_sd.map(Value::from));
    put("bound_d", a.bound_d.map(Value::from));
    put("burn_in", a.burn_in.map(Value::from));
    put("alpha", a.alpha.map(Value::from));
    put("threshold", a.threshold.map(Value::from));
    put("breakpoints", a.breakpoints.as_ref().map(|v| json!(v)));
    put("cell_probs", a.cell_probs.as_ref().map(|v| json!(v)));
    put("feature_range", a.feature_range.as_ref().map(|v| json!(v)));
    serde_json::from_value(Value::Object(m)).map_err(|e| Failure::config(format!("process: {e}")))
}

fn header(out: &mut String, config: &Value, seed: Option<u64>) {
    let _ = writeln!(out, "# recur {VERSION}");
    let _ = writeln!(out, "# config: {config}");
    if let Some(seed) = seed {
        let _ = writeln!(out, "# master_seed: {seed}");
    }
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let spec = process_spec(&a)?;
    let config = json!({ "command": "simulate", "process": spec, "seed": a.seed, "length": a.length });
    let mut out = String::new();
    header(&mut out, &config, Some(a.seed));
    if spec.is_labeled() {
        let model = spec.build_labeled()?;
        let sample = model.sample(a.seed, a.length);
        let s = &sample.series;
        let _ = writeln!(out, "# held_out_y0: {}", sample.y0);
        for (i, x) in s.features().iter().enumerate() {
            let xs: Vec<String> = x.iter().map(f64::to_string).collect();
            let y = s.labels().get(i).map_or_else(String::new, u8::to_string);
            let _ = writeln!(out, "{},{y}", xs.join(","));
        }
    } else {
        let model = spec.build()?;
        for v in model.sample(a.seed, a.length) {
            let _ = writeln!(out, "{v}");
        }
    }
    io::write_output(a.output.as_deref(), out.as_bytes())
}

fn to_json(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

fn estimate(a: EstimateArgs) -> Result<(), Failure> {
    let queries = a
        .query
        .iter()
        .map(|q| q.parse::<QuerySet>())
        .collect::<Result<Vec<_>, _>>()?;
    let grid = a.cdf_grid.as_deref().map(parse_grid).transpose()?;
    let reg = match a.clip_d {
        Some(d) => RegressionConfig::clipped(d)?,
        None => RegressionConfig::default(),
    };
    let values = io::read_series(&a.input)?;
    let past = PastWindow::new(values)?;

    let (ladder, law) = estimate_with_ladder(&past, &a.scheme)?;
    let probs: Vec<Value> = a
        .query
        .iter()
        .zip(&queries)
        .map(|(text, q)| json!({ "query": text, "prob": law.prob(q) }))
        .collect();
    let cdf: Vec<Value> = grid
        .unwrap_or_default()
        .into_iter()
        .map(|x| json!({ "x": x, "value": law.cdf(x) }))
        .collect();
    let config = json!({
        "command": "estimate",
        "input": a.input,
        "scheme": a.scheme.to_string(),
        "query": a.query,
        "cdf_grid": a.cdf_grid,
        "clip_D": a.clip_d,
    });
    let doc = json!({
        "meta": { "version": VERSION, "config": config, "master_seed": null },
        "t": past.len(),
        "k": ladder.kappa(),
        "lambdas": ladder.lambdas,
        "taus": ladder.taus,
        "matched_samples": matched_samples(&ladder, &past),
        "probs": probs,
        "cdf": cdf,
        "mean": reg.apply(&law),
    });
    io::write_output(a.output.as_deref(), &to_json(&doc))
}

fn classify(a: ClassifyArgs) -> Result<(), Failure> {
    let data = io::read_labeled(&a.input)?;
    let est = estimate_eta(&data, &a.scheme)?;
    let config = json!({ "command": "classify", "input": a.input, "scheme": a.scheme.to_string() });
    let doc = json!({
        "meta": { "version": VERSION, "config": config, "master_seed": null },
        "eta": est.eta,
        "k": est.k,
        "decision": est.decision,
    });
    io::write_output(a.output.as_deref(), &to_json(&doc))
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn verify(a: ConfigArgs) -> Result<(), Failure> {
    let spec: VerifySpec = read_config(&a.config)?;
    let report = run_verify(&spec)?;
    let doc = json!({
        "meta": { "version": VERSION, "config": spec },
        "passed": report.passed(),
        "report": report,
    });
    io::write_output(a.output.as_deref(), &to_json(&doc))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            message: "verification failed".into(),
        })
    }
}

fn experiment(a: ConfigArgs) -> Result<(), Failure> {
    let spec: ExperimentSpec = read_config(&a.config)?;
    spec.validate()?;
    let report = run_experiment(&spec)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf, &spec.header()?)?;
    let out = a.output.as_deref().or(spec.output.as_deref());
    io::write_output(out, &buf)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Classify(a) => classify(a),
        Command::Verify(a) => verify(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("recur: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
