#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xwct_core::signal::SampledSignal;
use xwct_core::wct::{AnalysisGrid, GridSpec};

pub const DT: f64 = 1.0 / 128.0;

/// Small grid for fast tests: N = 256, band (8, 56) Hz.
pub fn small_grid(n: usize, r0: f64, dl: f64) -> AnalysisGrid {
    AnalysisGrid::new(GridSpec {
        n,
        dt: DT,
        mu: 1.0,
        delta_a_tilde: 1.0 / 16.0,
        r0,
        delta_lambda: dl,
        band: Some((8.0, 56.0)),
    })
    .unwrap()
}

pub fn noise(n: usize, seed: u64) -> SampledSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SampledSignal::new(s, DT).unwrap()
}

pub fn scaled(x: &SampledSignal, c: Complex64) -> SampledSignal {
    SampledSignal::new(x.samples.iter().map(|v| v * c).collect(), x.dt).unwrap()
}
