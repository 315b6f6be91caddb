mod common;

use common::{scaled, small_grid, DT};
use num_complex::Complex64;
use xwct_core::signal::{synthesize, ComponentSpec};
use xwct_core::wct::compute_cubes;
use xwct_core::window::gaussian;
use xwct_core::xray::{compute_xwct_from, XrayParams};

fn chirp() -> xwct_core::signal::SampledSignal {
    synthesize(&[ComponentSpec::polynomial([0.0, 16.0, 3.0, 0.0])], 512, DT).unwrap()
}

#[test]
fn nonnegative_and_homogeneous() {
    let g = small_grid(512, 12.0, 0.5);
    let x = chirp();
    let p = XrayParams::default();
    let u = compute_cubes(&x, 3.0, &g, 1).unwrap();
    let v = compute_xwct_from(u.u(0), &g, p).unwrap().values;
    assert!(v.iter().all(|&t| t >= 0.0));
    let u2 = compute_cubes(&scaled(&x, Complex64::new(2.5, 0.0)), 3.0, &g, 1).unwrap();
    let v2 = compute_xwct_from(u2.u(0), &g, p).unwrap().values;
    let top = v.iter().cloned().fold(0.0, f64::max);
    for (a, b) in v.iter().zip(&v2) {
        assert!((2.5 * a - b).abs() <= 1e-12 * top);
    }
}

#[test]
fn zero_chirprate_plane_is_time_smoothing() {
    let g = small_grid(512, 12.0, 0.5);
    let u = compute_cubes(&chirp(), 3.0, &g, 1).unwrap();
    let p = XrayParams {
        gamma: 0.1,
        v_halfwidth: 0.25,
    };
    let v = compute_xwct_from(u.u(0), &g, p).unwrap().values;
    let l0 = g.lambdas.iter().position(|&l| l.abs() < 1e-12).unwrap();
    let q = (p.v_halfwidth / DT).round() as i64;
    let h: Vec<f64> = (-q..=q).map(|k| gaussian(p.gamma, k as f64 * DT)).collect();
    let hs: f64 = h.iter().sum::<f64>() * DT;
    let n = g.n() as i64;
    for i in [3, g.n_scales() / 2] {
        for m in [0i64, 100, 256, 511] {
            let mut e = 0.0;
            for (qi, hq) in h.iter().enumerate() {
                let mm = m + qi as i64 - q;
                if (0..n).contains(&mm) {
                    e += u.u(0)[[i, mm as usize, l0]].norm() * hq / hs * DT;
                }
            }
            let got = v[[i, m as usize, l0]];
            assert!((got - e).abs() <= 1e-12 * e.max(1e-300), "({i},{m}): {got} vs {e}");
        }
    }
}

#[test]
fn decays_faster_along_chirprate_than_the_wct() {
    let g = small_grid(512, 12.0, 0.5);
    let u = compute_cubes(&chirp(), 3.0, &g, 1).unwrap();
    let v = compute_xwct_from(u.u(0), &g, XrayParams::default()).unwrap().values;
    // on the ridge, IF 16 + 6b and chirprate 6
    let m = 256;
    let f = 16.0 + 6.0 * g.time(m);
    let i = g.nearest_scale(1.0 / f).unwrap();
    let lp = g.lambdas.iter().position(|&l| (l - 6.0).abs() < 1e-9).unwrap();
    let normalized = |c: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let top = c(lp);
        (0..g.n_lambdas()).map(|l| c(l) / top).collect()
    };
    let w = normalized(&|l| u.u(0)[[i, m, l]].norm());
    let x = normalized(&|l| v[[i, m, l]]);
    // offsets of at least 2Δλ on both sides, averaged to smooth out ripple
    let mean = |s: &[f64]| (4..=11).map(|d| s[lp - d] + s[lp + d]).sum::<f64>() / 16.0;
    assert!(mean(&x) <= mean(&w), "xwct {} vs wct {}", mean(&x), mean(&w));
}
