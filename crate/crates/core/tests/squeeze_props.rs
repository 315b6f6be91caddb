mod common;

use common::small_grid;
use ndarray::Array3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xwct_core::reassign::{FieldMode, ReferenceFields};
use xwct_core::squeeze::{
    gamma_grid, in_range_mass, squeeze_weight, synchrosqueeze, synchrosqueeze_on, FreqBins, SqueezeSource,
};
use xwct_core::wct::{uniform_bin, AnalysisGrid};

/// Random fields that mostly fall inside the bins, with some cells masked
/// off and some outside the ranges.
fn random_fields(g: &AnalysisGrid, seed: u64) -> ReferenceFields {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = g.shape();
    let (f_lo, f_hi) = (g.freqs[0] * 0.9, g.freqs[g.freqs.len() - 1] * 1.1);
    let r0 = g.spec.r0 * 1.1;
    ReferenceFields {
        order: 3,
        mode: FieldMode::Simplified,
        if_field: Array3::from_shape_fn(shape, |_| rng.gen_range(f_lo..f_hi)),
        cr_field: Array3::from_shape_fn(shape, |_| rng.gen_range(-r0..r0)),
        mask: Array3::from_shape_fn(shape, |_| rng.gen_bool(0.8)),
    }
}

fn random_complex(g: &AnalysisGrid, seed: u64) -> Array3<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array3::from_shape_fn(g.shape(), |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

#[test]
fn binned_mass_is_conserved() {
    let g = small_grid(64, 4.0, 0.5);
    let f = random_fields(&g, 1);
    let mag = random_complex(&g, 2).mapv(|v| v.norm());
    let source = in_range_mass(&mag, &f, &g, 0.5).unwrap();
    let binned = synchrosqueeze(&mag, &f, &g, 0.5, SqueezeSource::Wct3)
        .unwrap()
        .total_magnitude();
    assert!((source - binned).abs() <= 1e-10 * source, "{source} vs {binned}");
}

#[test]
fn accumulation_order_does_not_matter() {
    let g = small_grid(64, 4.0, 0.5);
    let f = random_fields(&g, 3);
    let src = random_complex(&g, 4);
    let sq = synchrosqueeze(&src, &f, &g, 0.5, SqueezeSource::Wct3).unwrap();
    // reference: visit scales and chirprates in reverse
    let bins = FreqBins::log(&g);
    let gammas = gamma_grid(g.spec.r0, 0.5).unwrap();
    let (nj, n, nl) = g.shape();
    let mut reference = Array3::<Complex64>::zeros((bins.len(), n, gammas.len()));
    for i in (0..nj).rev() {
        for l in (0..nl).rev() {
            for m in 0..n {
                if !f.mask[[i, m, l]] {
                    continue;
                }
                let Some(k) = bins.bin(f.if_field[[i, m, l]]) else {
                    continue;
                };
                let Some(p) = uniform_bin(f.cr_field[[i, m, l]], gammas[0], 0.5, gammas.len()) else {
                    continue;
                };
                reference[[k, m, p]] += src[[i, m, l]] * squeeze_weight(&g, i);
            }
        }
    }
    let top = reference.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    for (a, b) in sq.values.iter().zip(&reference) {
        assert!((a - b).norm() <= 1e-12 * top);
    }
}

#[test]
fn real_source_stays_nonnegative() {
    let g = small_grid(64, 4.0, 0.5);
    let f = random_fields(&g, 5);
    let mag = random_complex(&g, 6).mapv(|v| v.norm());
    let sq = synchrosqueeze(&mag, &f, &g, 0.5, SqueezeSource::Xwct3).unwrap();
    assert!(sq.values.iter().all(|&v| v >= 0.0));
}

#[test]
fn uniform_bins_receive_their_frequencies() {
    let g = small_grid(64, 4.0, 0.5);
    let bins = FreqBins::uniform(10.0, 50.0, 0.25).unwrap();
    let mut f = random_fields(&g, 7);
    f.mask.fill(false);
    // two cells aimed at 20.1 Hz, one at 44.9 Hz
    for (&(i, m, l), &fr) in [(3usize, 5usize, 2usize), (9, 5, 4), (12, 20, 6)]
        .iter()
        .zip(&[20.1, 20.1, 44.9])
    {
        f.mask[[i, m, l]] = true;
        f.if_field[[i, m, l]] = fr;
        f.cr_field[[i, m, l]] = 1.0;
    }
    let src = Array3::<f64>::from_elem(g.shape(), 1.0);
    let sq = synchrosqueeze_on(&src, &f, &g, &bins, 0.5, SqueezeSource::Wct3).unwrap();
    let k20 = bins.bin(20.1).unwrap();
    let k45 = bins.bin(44.9).unwrap();
    assert!((bins.centers[k20] - 20.0).abs() < 1e-12);
    assert!((bins.centers[k45] - 45.0).abs() < 1e-12);
    let p = gamma_grid(4.0, 0.5)
        .unwrap()
        .iter()
        .position(|&v| (v - 1.0).abs() < 1e-12)
        .unwrap();
    let expect = squeeze_weight(&g, 3) + squeeze_weight(&g, 9);
    assert!((sq.values[[k20, 5, p]] - expect).abs() < 1e-12);
    assert!((sq.values[[k45, 20, p]] - squeeze_weight(&g, 12)).abs() < 1e-12);
    assert_eq!(sq.values.iter().filter(|&&v| v != 0.0).count(), 2);
}
