//! Acceptance criteria. Run with
//! `cargo test -p recur-core --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use recur_core::estimators::{estimate_conditional, regress, QuerySet, RegressionConfig};
use recur_core::processes::ProcessSpec;
use recur_core::recurrence::{build_ladder, matched_samples, PastWindow};
use recur_core::verification::{
    run_equivalence, run_experiment, AtomSpec, ConvergenceReport, EquivalenceSpec, ExperimentKind,
    ExperimentSpec, Lemma2Spec, Verdict,
};
use recur_core::PartitionScheme;

const MASTER_SEED: u64 = 17;
const LADDER: [usize; 4] = [1 << 10, 1 << 12, 1 << 14, 1 << 16];

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn markov_spec() -> ProcessSpec {
    ProcessSpec::Markov {
        transition: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        emission: None,
    }
}

fn experiment(kind: ExperimentKind, process: ProcessSpec, scheme: &str, sizes: &[usize], seeds: usize) -> ExperimentSpec {
    ExperimentSpec {
        kind,
        process,
        scheme: scheme.parse().unwrap(),
        sizes: sizes.to_vec(),
        seeds,
        master_seed: MASTER_SEED,
        queries: vec![],
        cdf_grid: None,
        clip_d: None,
        output: None,
    }
}

fn median(r: &ConvergenceReport, metric: &str, t: usize) -> f64 {
    r.aggregate_for(metric, t).unwrap().median
}

fn mean(r: &ConvergenceReport, metric: &str, t: usize) -> f64 {
    r.aggregate_for(metric, t).unwrap().mean
}

fn nonincreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

fn fmt(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
}

fn csv_bytes(spec: &ExperimentSpec, report: &ConvergenceReport) -> Vec<u8> {
    let mut buf = Vec::new();
    report.write_csv(&mut buf, &spec.header().unwrap()).unwrap();
    buf
}

fn c1_oracle_equivalence() -> Outcome {
    let r = run_equivalence(&EquivalenceSpec {
        binary_strings: 1000,
        real_strings: 200,
        min_len: 8,
        max_len: 512,
        seed: MASTER_SEED,
    })
    .unwrap();
    Outcome {
        id: 1,
        name: "kernel ladder (naive and hashed) == brute-force ladder (1000 binary + 200 real strings)",
        pass: r.passed(),
        detail: format!("{} mismatches", r.mismatches.len()),
    }
}

fn c2_hand_trace() -> Outcome {
    let bin = PartitionScheme::alphabet(2).unwrap();
    let past = PastWindow::new(vec![1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap();
    let ladder = build_ladder(&past, &bin).unwrap();
    let law = estimate_conditional(&past, &bin).unwrap();
    let r_hat = regress(&past, &bin, &RegressionConfig::default()).unwrap();
    let mut pass = ladder.taus == [2, 3]
        && ladder.lambdas == [1, 3, 6]
        && matched_samples(&ladder, &past) == [0.0, 1.0]
        && law.prob(&QuerySet::points(&[1.0])) == 0.5
        && r_hat == 0.5;
    // Alternating pasts: the next symbol is forced and every stage sees it.
    for len in 2..=64usize {
        for last in [0.0, 1.0] {
            let values: Vec<f64> = (0..len)
                .map(|i| if (len - 1 - i) % 2 == 0 { last } else { 1.0 - last })
                .collect();
            let past = PastWindow::new(values).unwrap();
            match estimate_conditional(&past, &bin) {
                Ok(law) => {
                    pass &= law.prob(&QuerySet::points(&[1.0 - last])) == 1.0;
                    pass &= law.samples().iter().all(|&s| s == 1.0 - last);
                }
                Err(_) => pass &= len < 3,
            }
        }
    }
    Outcome {
        id: 2,
        name: "hand trace (1,0,1,1,0,1) and alternating pasts",
        pass,
        detail: format!("taus {:?}, lambdas {:?}, P({{1}}) {}, R {}", ladder.taus, ladder.lambdas, law.prob(&QuerySet::points(&[1.0])), r_hat),
    }
}

fn c3_markov_consistency() -> (Outcome, ExperimentSpec, ConvergenceReport) {
    let mut spec = experiment(ExperimentKind::Consistency, markov_spec(), "alphabet:2", &LADDER, 100);
    spec.queries = vec!["{1}".into()];
    let r = run_experiment(&spec).unwrap();
    let medians: Vec<f64> = LADDER.iter().map(|&t| median(&r, "tv", t)).collect();
    let t = *LADDER.last().unwrap();
    let est = mean(&r, "prob[0]", t);
    let oracle = mean(&r, "oracle_prob[0]", t);
    let pass = nonincreasing(&medians) && (est - oracle).abs() <= 0.05;
    let out = Outcome {
        id: 3,
        name: "Markov chain: median TV nonincreasing, mean P({1}) within 0.05 of oracle at 2^16",
        pass,
        detail: format!("median TV [{}]; mean P_hat {est:.4} vs oracle {oracle:.4}", fmt(&medians)),
    };
    (out, spec, r)
}

fn c4_iid_consistency() -> (Outcome, ExperimentSpec, ConvergenceReport) {
    let mut spec = experiment(ExperimentKind::Consistency, ProcessSpec::Bernoulli { p: 0.3 }, "alphabet:2", &[1 << 16], 100);
    spec.queries = vec!["{1}".into()];
    let r = run_experiment(&spec).unwrap();
    let est = mean(&r, "prob[0]", 1 << 16);
    let out = Outcome {
        id: 4,
        name: "Bernoulli(0.3): mean P_hat({1}) within 0.05 of 0.3 at 2^16",
        pass: (est - 0.3).abs() <= 0.05,
        detail: format!("mean P_hat {est:.4}"),
    };
    (out, spec, r)
}

fn c5_lemma2() -> Outcome {
    let spec = Lemma2Spec {
        process: markov_spec(),
        scheme: PartitionScheme::alphabet(2).unwrap(),
        stage: 2,
        atom: AtomSpec {
            suffix: vec![1.0],
            lambda: None,
        },
        query: "{1}".into(),
        paths: 100_000,
        path_len: 256,
        seed: MASTER_SEED,
        se_multiple: 3.0,
    };
    let r = spec.run().unwrap();
    Outcome {
        id: 5,
        name: "matched-sample identity on Markov chain, j=2, atom {X_-1 = 1}, C={1}, N=1e5",
        pass: r.verdict == Verdict::Pass,
        detail: format!(
            "freq matched {:.5} vs present {:.5}, pooled SE {:.5}, atom hits {}, truncated {}",
            r.freq_matched, r.freq_present, r.pooled_se, r.atom_hits, r.truncated
        ),
    }
}

fn c6_ar1() -> (Outcome, ExperimentSpec, ConvergenceReport) {
    let process = ProcessSpec::ClippedAr1 {
        a: 0.5,
        noise_sd: 1.0,
        bound_d: 5.0,
        burn_in: 10_000,
    };
    let mut spec = experiment(ExperimentKind::Consistency, process, "dyadic", &LADDER, 100);
    spec.cdf_grid = Some("-5:5:0.25".into());
    spec.clip_d = Some(5.0);
    let r = run_experiment(&spec).unwrap();
    let mean_err: Vec<f64> = LADDER.iter().map(|&t| median(&r, "abs_err_mean", t)).collect();
    let ks: Vec<f64> = LADDER.iter().map(|&t| median(&r, "kolmogorov", t)).collect();
    let out = Outcome {
        id: 6,
        name: "clipped AR(1): median |R_hat - E| and median Kolmogorov distance nonincreasing",
        pass: nonincreasing(&mean_err) && nonincreasing(&ks),
        detail: format!("median |R err| [{}]; median KS [{}]", fmt(&mean_err), fmt(&ks)),
    };
    (out, spec, r)
}

fn c7_online() -> (Outcome, ExperimentSpec, ConvergenceReport) {
    let checkpoints = [1 << 8, 1 << 11, 1 << 14];
    let spec = experiment(ExperimentKind::Online, markov_spec(), "alphabet:2", &checkpoints, 50);
    let r = run_experiment(&spec).unwrap();
    let errs: Vec<f64> = checkpoints.iter().map(|&t| mean(&r, "abs_err", t)).collect();
    let out = Outcome {
        id: 7,
        name: "on-line predictor: mean |R_t - E(X_t|X_t-1)| at 2^14 < at 2^8",
        pass: errs[2] < errs[0],
        detail: format!("mean abs err [{}]", fmt(&errs)),
    };
    (out, spec, r)
}

fn c8_classification() -> (Outcome, ExperimentSpec, ConvergenceReport) {
    let process = ProcessSpec::LabeledCell {
        breakpoints: vec![0.0],
        cell_probs: vec![0.1, 0.9],
        feature_range: (-1.0, 1.0),
    };
    let spec = experiment(ExperimentKind::Classification, process, "dyadic", &LADDER, 100);
    let r = run_experiment(&spec).unwrap();
    let errs: Vec<f64> = LADDER.iter().map(|&t| mean(&r, "abs_err", t)).collect();
    let mut bound_ok = true;
    let mut lines = Vec::new();
    for &t in &LADDER {
        let plug = r.values("miss_plugin", t);
        let bayes = r.values("miss_bayes", t);
        let bound = r.values("bound", t);
        let diffs: Vec<f64> = plug
            .iter()
            .zip(&bayes)
            .filter(|(p, _)| !p.is_nan())
            .map(|(p, b)| p - b)
            .collect();
        let n = diffs.len() as f64;
        let excess = diffs.iter().sum::<f64>() / n;
        let sd = (diffs.iter().map(|d| (d - excess).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let bound_mean = bound.iter().filter(|b| !b.is_nan()).sum::<f64>() / n;
        let conditional_ok = r
            .values("excess_conditional", t)
            .iter()
            .zip(&bound)
            .all(|(e, b)| e.is_nan() || e <= b);
        bound_ok &= excess <= bound_mean + 3.0 * sd / n.sqrt() && conditional_ok;
        lines.push(format!("t={t}: excess {excess:.3} vs bound {bound_mean:.3}"));
    }
    let out = Outcome {
        id: 8,
        name: "labeled cells (0.1, 0.9): mean |eta_k - eta| nonincreasing, excess <= 2|eta_k - eta| + 3 SE",
        pass: nonincreasing(&errs) && bound_ok,
        detail: format!("mean |eta err| [{}]; {}", fmt(&errs), lines.join("; ")),
    };
    (out, spec, r)
}

fn c9_reproducible(runs: &[(ExperimentSpec, ConvergenceReport)]) -> Outcome {
    let identical = runs.iter().all(|(spec, first)| {
        let again = run_experiment(spec).unwrap();
        csv_bytes(spec, first) == csv_bytes(spec, &again)
    });
    Outcome {
        id: 9,
        name: "experiment CSVs byte-identical across reruns with the same master seed",
        pass: identical,
        detail: format!("{} experiments rerun", runs.len()),
    }
}

#[test]
fn acceptance() {
    let mut outcomes = vec![c1_oracle_equivalence(), c2_hand_trace()];
    let mut runs = Vec::new();
    for (o, spec, r) in [c3_markov_consistency(), c4_iid_consistency()] {
        outcomes.push(o);
        runs.push((spec, r));
    }
    outcomes.push(c5_lemma2());
    for (o, spec, r) in [c6_ar1(), c7_online(), c8_classification()] {
        outcomes.push(o);
        runs.push((spec, r));
    }
    outcomes.push(c9_reproducible(&runs));

    for o in &outcomes {
        println!(
            "[{}] criterion {}: {} -- {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail
        );
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
