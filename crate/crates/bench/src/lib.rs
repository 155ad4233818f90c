//! Fixed benchmark inputs.

use recur_core::{PastWindow, ProcessSpec};

pub const SEED: u64 = 42;

fn window(spec: ProcessSpec, len: usize) -> PastWindow {
    let model = spec.build().expect("valid benchmark process");
    PastWindow::new(model.sample(SEED, len)).expect("nonempty")
}

pub fn binary_path(len: usize) -> PastWindow {
    window(ProcessSpec::Bernoulli { p: 0.5 }, len)
}

pub fn markov_path(len: usize) -> PastWindow {
    window(
        ProcessSpec::Markov {
            transition: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            emission: None,
        },
        len,
    )
}

/// Clipped AR(1) values, searched under the dyadic scheme.
pub fn real_path(len: usize) -> PastWindow {
    window(
        ProcessSpec::ClippedAr1 {
            a: 0.5,
            noise_sd: 1.0,
            bound_d: 5.0,
            burn_in: 1_000,
        },
        len,
    )
}

/// Zero-entropy rotation sequence: long near-repeats stress the comparisons.
pub fn rotation_path(len: usize) -> PastWindow {
    window(
        ProcessSpec::Rotation {
            alpha: std::f64::consts::SQRT_2 - 1.0,
            threshold: 0.5,
        },
        len,
    )
}
