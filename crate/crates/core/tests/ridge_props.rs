use ndarray::Array3;
use xwct_core::ridge::{extract_ridges, RidgeParams, RidgeSet};

const DT: f64 = 1.0 / 16.0;

/// Two straight ridges on 1 Hz bins, IF 10 + 4t and 40 − 4t (crossing near
/// t = 3.75), each a Gaussian bump one bin wide at its chirprate bin.
fn crossing_cube(order: [usize; 2]) -> (Array3<f64>, Vec<f64>, Vec<f64>) {
    let freqs: Vec<f64> = (0..64).map(|k| k as f64).collect();
    let gammas: Vec<f64> = (-8..=8).map(|p| p as f64).collect();
    let n = 128;
    let lines = [(10.0, 4.0, 1.0), (40.0, -4.0, 0.8)];
    let mut cube = Array3::<f64>::zeros((freqs.len(), n, gammas.len()));
    for &c in &order {
        let (f0, r, amp) = lines[c];
        let p = gammas.iter().position(|&g| g == r).unwrap();
        for m in 0..n {
            let f = f0 + r * m as f64 * DT;
            for (k, &fk) in freqs.iter().enumerate() {
                cube[[k, m, p]] += amp * (-(fk - f).powi(2)).exp();
            }
        }
    }
    (cube, freqs, gammas)
}

fn extract(order: [usize; 2]) -> RidgeSet {
    let (cube, freqs, gammas) = crossing_cube(order);
    extract_ridges(&cube, &freqs, &gammas, DT, RidgeParams::default()).unwrap()
}

#[test]
fn tracks_both_lines_through_the_crossing() {
    let rs = extract([0, 1]);
    assert!(!rs.duplicated);
    // sorted by IF at n/8: the rising line starts lower
    for (r, (f0, cr)) in rs.ridges.iter().zip([(10.0, 4.0), (40.0, -4.0)]) {
        for (m, (&f, &c)) in r.inst_freq.iter().zip(&r.chirp_rate).enumerate() {
            assert!((f - (f0 + cr * m as f64 * DT)).abs() <= 1.0, "m={m}: {f}");
            assert_eq!(c, cr);
        }
    }
}

#[test]
fn deterministic_and_label_free() {
    let a = extract([0, 1]);
    assert_eq!(a, extract([0, 1]));
    assert_eq!(a, extract([1, 0]));
}

#[test]
fn second_ridge_stays_out_of_the_first_guard_tube() {
    let p = RidgeParams::default();
    let rs = extract([0, 1]);
    let (r0, r1) = (&rs.ridges[0], &rs.ridges[1]);
    for m in 0..r0.freq_idx.len() {
        let inside =
            r0.freq_idx[m].abs_diff(r1.freq_idx[m]) <= p.jump_f && r0.cr_idx[m].abs_diff(r1.cr_idx[m]) <= p.jump_c;
        assert!(!inside, "m={m}");
    }
}
