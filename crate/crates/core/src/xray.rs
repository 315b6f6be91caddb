//! X-ray wavelet-chirplet transform: a windowed line integral of |WCT| along
//! the direction (λ, 1, 0) in (frequency, time, chirprate).

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wct::{AnalysisGrid, MomentCubeStack};
use crate::window::gaussian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XrayParams {
    pub gamma: f64,
    pub v_halfwidth: f64,
}

impl Default for XrayParams {
    fn default() -> Self {
        XrayParams {
            gamma: 0.25,
            v_halfwidth: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct XwctCube {
    pub values: Array3<f64>,
    pub params: XrayParams,
}

/// Samples of h = g_γ on v_q = q·dt, |q| ≤ ⌊v/dt⌋, scaled so Σh·dt = 1.
pub fn line_window(params: XrayParams, dt: f64) -> Result<Vec<f64>> {
    if !(params.gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "xray gamma must be positive, got {}",
            params.gamma
        )));
    }
    if !(params.v_halfwidth >= dt) {
        return Err(Error::InvalidParameter(format!(
            "xray half-width {} is below the sample step {dt}",
            params.v_halfwidth
        )));
    }
    let q = (params.v_halfwidth / dt + 1e-9).floor() as i64;
    let mut h: Vec<f64> = (-q..=q).map(|k| gaussian(params.gamma, k as f64 * dt)).collect();
    let s: f64 = h.iter().sum::<f64>() * dt;
    h.iter_mut().for_each(|v| *v /= s);
    Ok(h)
}

pub fn compute_xwct(stack: &MomentCubeStack, params: XrayParams) -> Result<XwctCube> {
    compute_xwct_from(stack.u(0), &stack.grid, params)
}

/// XWCT of the complex WCT cube `u` (shape (J, N, L)).
pub fn compute_xwct_from(u: &Array3<Complex64>, grid: &AnalysisGrid, params: XrayParams) -> Result<XwctCube> {
    let (nj, n, nl) = grid.shape();
    if u.dim() != (nj, n, nl) {
        return Err(Error::ShapeMismatch {
            expected: nj * n * nl,
            got: u.len(),
        });
    }
    let dt = grid.dt();
    let h = line_window(params, dt)?;
    let qmax = (h.len() / 2) as i64;
    let freqs = &grid.freqs;
    let mut values = Array3::<f64>::zeros((nj, n, nl));
    let batch = rayon::current_num_threads().max(1);
    for start in (0..nl).step_by(batch) {
        let end = (start + batch).min(nl);
        let planes: Vec<Array2<f64>> = (start..end)
            .into_par_iter()
            .map(|l| {
                let lam = grid.lambdas[l];
                // magnitude plane indexed by (frequency index, time)
                let mag = Array2::from_shape_fn((nj, n), |(k, m)| u[[grid.scale_index_of_freq(k), m, l]].norm());
                let mut out = Array2::<f64>::zeros((nj, n));
                for (qi, &hq) in h.iter().enumerate() {
                    let q = qi as i64 - qmax;
                    let v = q as f64 * dt;
                    let m_lo = (-q).max(0) as usize;
                    let m_hi = (n as i64 - q).min(n as i64) as usize;
                    if m_lo >= m_hi {
                        continue;
                    }
                    for k in 0..nj {
                        let f = freqs[k] + lam * v;
                        let Some((k0, t)) = interp_index(freqs, f) else {
                            continue;
                        };
                        let (w0, w1) = (hq * dt * (1.0 - t), hq * dt * t);
                        let src0 = mag.row(k0);
                        let src1 = mag.row((k0 + 1).min(nj - 1));
                        let mut dst = out.row_mut(k);
                        for m in m_lo..m_hi {
                            let mm = (m as i64 + q) as usize;
                            dst[m] += w0 * src0[mm] + w1 * src1[mm];
                        }
                    }
                }
                out
            })
            .collect();
        for (l, plane) in (start..end).zip(planes) {
            let mut dst = values.index_axis_mut(Axis(2), l);
            for k in 0..nj {
                dst.row_mut(grid.scale_index_of_freq(k)).assign(&plane.row(k));
            }
        }
    }
    Ok(XwctCube { values, params })
}

/// Lower index and weight for linear interpolation on an increasing grid.
/// None outside [x₀, x_last].
fn interp_index(xs: &[f64], f: f64) -> Option<(usize, f64)> {
    let last = xs.len() - 1;
    if !(f >= xs[0] && f <= xs[last]) {
        return None;
    }
    if f == xs[last] {
        return Some((last, 0.0));
    }
    let i = xs.partition_point(|&x| x <= f) - 1;
    Some((i, (f - xs[i]) / (xs[i + 1] - xs[i])))
}

/// Fraction of a nonnegative slice's mass whose abscissa lies within
/// `radius` of any of `centres`.
pub fn band_fraction(xs: &[f64], values: &[f64], centres: &[f64], radius: f64) -> f64 {
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let inside: f64 = xs
        .iter()
        .zip(values)
        .filter(|(x, _)| centres.iter().any(|c| (*x - c).abs() <= radius))
        .map(|(_, v)| v)
        .sum();
    inside / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn window_normalized() {
        let dt = 1.0 / 128.0;
        let h = line_window(XrayParams::default(), dt).unwrap();
        assert_eq!(h.len(), 257);
        assert_abs_diff_eq!(h.iter().sum::<f64>() * dt, 1.0, epsilon = 1e-12);
        assert!(line_window(
            XrayParams {
                gamma: 0.25,
                v_halfwidth: dt / 2.0
            },
            dt
        )
        .is_err());
    }

    #[test]
    fn interpolation_index() {
        let xs = [1.0, 2.0, 4.0];
        assert_eq!(interp_index(&xs, 0.5), None);
        assert_eq!(interp_index(&xs, 1.0), Some((0, 0.0)));
        assert_eq!(interp_index(&xs, 3.0), Some((1, 0.5)));
        assert_eq!(interp_index(&xs, 4.0), Some((2, 0.0)));
        assert_eq!(interp_index(&xs, 4.5), None);
    }

    #[test]
    fn band_fraction_counts() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let v = [1.0, 1.0, 1.0, 1.0, 4.0];
        assert_abs_diff_eq!(band_fraction(&xs, &v, &[2.0], 0.5), 0.5);
        assert_abs_diff_eq!(band_fraction(&xs, &v, &[-2.0, 2.0], 1.0), 7.0 / 8.0);
    }
}
