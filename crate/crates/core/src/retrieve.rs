//! IF/chirprate estimates from ridges, mode retrieval and trimmed RMSE.

use nalgebra::{DMatrix, DVector};
use ndarray::Array3;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ridge::RidgeSet;
use crate::signal::SampledSignal;
use crate::wct::AnalysisGrid;
use crate::window::{pft_moment, ChirpFactors};

type C = Complex64;

pub const PINV_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMethod {
    Simple,
    Group,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeEstimate {
    pub modes: Vec<Vec<C>>,
    pub method: RetrievalMethod,
    /// Time samples where C was ill-conditioned and the pseudo-inverse was used.
    pub pinv_samples: usize,
}

impl ModeEstimate {
    /// Rows `t,re_1,im_1,...,re_K,im_K`.
    pub fn to_text(&self, dt: f64) -> String {
        let mut s = String::from("t");
        for k in 1..=self.modes.len() {
            s.push_str(&format!(",re_{k},im_{k}"));
        }
        s.push('\n');
        let n = self.modes.first().map_or(0, |m| m.len());
        for i in 0..n {
            s.push_str(&format!("{}", i as f64 * dt));
            for m in &self.modes {
                s.push_str(&format!(",{},{}", m[i].re, m[i].im));
            }
            s.push('\n');
        }
        s
    }
}

/// Per-component IF (Hz) and chirprate (Hz/s) series read off the ridges.
pub fn estimate_if_cr(ridges: &RidgeSet) -> Vec<(Vec<f64>, Vec<f64>)> {
    ridges
        .ridges
        .iter()
        .map(|r| (r.inst_freq.clone(), r.chirp_rate.clone()))
        .collect()
}

/// Reads U^g at arbitrary (a, b_m, λ): from the stored cube when (a, λ)
/// is a grid node, else by the O(N) spectral sum of the FFT path.
pub struct CoefficientReader<'a> {
    u0: &'a Array3<C>,
    grid: &'a AnalysisGrid,
    sigma: f64,
    spectrum: Vec<C>,
}

impl<'a> CoefficientReader<'a> {
    pub fn new(x: &SampledSignal, u0: &'a Array3<C>, grid: &'a AnalysisGrid, sigma: f64) -> Result<Self> {
        if x.len() != grid.n() {
            return Err(Error::ShapeMismatch {
                expected: grid.n(),
                got: x.len(),
            });
        }
        if u0.dim() != grid.shape() {
            let s = grid.shape();
            return Err(Error::ShapeMismatch {
                expected: s.0 * s.1 * s.2,
                got: u0.len(),
            });
        }
        let mut spectrum = x.samples.clone();
        FftPlanner::new().plan_fft_forward(grid.n()).process(&mut spectrum);
        Ok(CoefficientReader {
            u0,
            grid,
            sigma,
            spectrum,
        })
    }

    fn node(&self, a: f64, lam: f64) -> Option<(usize, usize)> {
        let g = self.grid;
        let i = g.nearest_scale(a)?;
        if (g.scales[i] - a).abs() > 1e-9 * a {
            return None;
        }
        let l = crate::wct::uniform_bin(lam, g.lambdas[0], g.spec.delta_lambda, g.n_lambdas())?;
        ((g.lambdas[l] - lam).abs() <= 1e-9 * g.spec.delta_lambda).then_some((i, l))
    }

    pub fn value(&self, a: f64, m: usize, lam: f64) -> C {
        if let Some((i, l)) = self.node(a, lam) {
            return self.u0[[i, m, l]];
        }
        let g = self.grid;
        let cf = ChirpFactors::new(self.sigma, a * a * lam);
        let b = g.time(m);
        let mut acc = C::new(0.0, 0.0);
        for (k, &xk) in self.spectrum.iter().enumerate() {
            let eta = g.eta[k];
            acc += xk * cf.m0(g.mu() - a * eta) * C::from_polar(1.0, 2.0 * std::f64::consts::PI * eta * b);
        }
        acc / g.n() as f64
    }
}

fn ridge_scale(grid: &AnalysisGrid, f: f64) -> f64 {
    grid.mu() / f
}

/// Simple retrieval: x̃_ℓ(b) = U^g(ǎ_ℓ(b), b, λ̌_ℓ(b)).
pub fn retrieve_simple(reader: &CoefficientReader, ridges: &RidgeSet) -> ModeEstimate {
    let g = reader.grid;
    let modes = ridges
        .ridges
        .iter()
        .map(|r| {
            (0..g.n())
                .into_par_iter()
                .map(|m| reader.value(ridge_scale(g, r.inst_freq[m]), m, r.chirp_rate[m]))
                .collect()
        })
        .collect();
    ModeEstimate {
        modes,
        method: RetrievalMethod::Simple,
        pinv_samples: 0,
    }
}

/// Cross-talk matrix c_{ℓ,k} = ğ(μ(1 − ǎ_ℓ/ǎ_k), ǎ_ℓ²(λ̌_ℓ − λ̌_k)).
pub fn crosstalk_matrix(sigma: f64, mu: f64, scales: &[f64], rates: &[f64]) -> DMatrix<C> {
    let k = scales.len();
    DMatrix::from_fn(k, k, |l, j| {
        pft_moment(
            0,
            sigma,
            mu * (1.0 - scales[l] / scales[j]),
            scales[l] * scales[l] * (rates[l] - rates[j]),
        )
    })
}

/// Solves C x = u, falling back to the pseudo-inverse when cond(C) > 10⁶.
/// Returns the solution and whether the fallback was used.
pub fn solve_crosstalk(c: &DMatrix<C>, u: &DVector<C>) -> (DVector<C>, bool) {
    let svd = c.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin > 0.0 && smax / smin <= PINV_CONDITION {
        if let Some(x) = c.clone().lu().solve(u) {
            return (x, false);
        }
    }
    let tol = smax * 1e-12;
    let x = svd.solve(u, tol).unwrap_or_else(|_| DVector::zeros(u.len()));
    (x, true)
}

/// Group retrieval: joint inversion of the K×K cross-talk system per time sample.
pub fn retrieve_group(reader: &CoefficientReader, ridges: &RidgeSet) -> ModeEstimate {
    let g = reader.grid;
    let kk = ridges.len();
    let per_time: Vec<(Vec<C>, bool)> = (0..g.n())
        .into_par_iter()
        .map(|m| {
            let scales: Vec<f64> = ridges.ridges.iter().map(|r| ridge_scale(g, r.inst_freq[m])).collect();
            let rates: Vec<f64> = ridges.ridges.iter().map(|r| r.chirp_rate[m]).collect();
            let u = DVector::from_iterator(kk, (0..kk).map(|l| reader.value(scales[l], m, rates[l])));
            let c = crosstalk_matrix(reader.sigma, g.mu(), &scales, &rates);
            let (x, pinv) = solve_crosstalk(&c, &u);
            (x.iter().copied().collect(), pinv)
        })
        .collect();
    let mut modes = vec![Vec::with_capacity(g.n()); kk];
    let mut pinv_samples = 0;
    for (x, pinv) in per_time {
        pinv_samples += pinv as usize;
        for (mode, v) in modes.iter_mut().zip(x) {
            mode.push(v);
        }
    }
    ModeEstimate {
        modes,
        method: RetrievalMethod::Group,
        pinv_samples,
    }
}

/// Index range [⌊n/8⌋, ⌊7n/8⌋] kept by the trimmed error.
pub fn trim_range(n: usize) -> std::ops::RangeInclusive<usize> {
    n / 8..=(7 * n / 8).min(n.saturating_sub(1))
}

pub fn rmse_trimmed(truth: &[C], estimate: &[C]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::ShapeMismatch {
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    let r = trim_range(truth.len());
    let cnt = r.clone().count() as f64;
    let s: f64 = r.map(|i| (truth[i] - estimate[i]).norm_sqr()).sum();
    Ok((s / cnt).sqrt())
}

pub fn rmse_trimmed_real(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::ShapeMismatch {
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    let r = trim_range(truth.len());
    let cnt = r.clone().count() as f64;
    let s: f64 = r.map(|i| (truth[i] - estimate[i]).powi(2)).sum();
    Ok((s / cnt).sqrt())
}

/// Assignment of estimated components to truth components that minimizes
/// the summed trimmed IF error (exhaustive over permutations).
pub fn match_components(estimated_if: &[Vec<f64>], truth_if: &[Vec<f64>]) -> Result<Vec<usize>> {
    let k = estimated_if.len();
    if k != truth_if.len() {
        return Err(Error::ShapeMismatch {
            expected: truth_if.len(),
            got: k,
        });
    }
    if k > 8 {
        return Err(Error::InvalidParameter(format!(
            "component matching supports K <= 8, got {k}"
        )));
    }
    let mut cost = vec![vec![0.0; k]; k];
    for (e, row) in cost.iter_mut().enumerate() {
        for (t, c) in row.iter_mut().enumerate() {
            *c = rmse_trimmed_real(&truth_if[t], &estimated_if[e])?;
        }
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let mut best_cost = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let c: f64 = p.iter().enumerate().map(|(e, &t)| cost[e][t]).sum();
        if c < best_cost {
            best_cost = c;
            best = p.to_vec();
        }
    });
    Ok(best)
}

fn permute(v: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == v.len() {
        f(v);
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permute(v, i + 1, f);
        v.swap(i, j);
    }
}

/// Per-component trimmed errors in the layout of the usual comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentErrors {
    pub if_rmse: f64,
    pub cr_rmse: f64,
    pub mode_rmse: f64,
}

/// Errors for each truth component, after matching estimated components.
pub fn component_errors(x: &SampledSignal, ridges: &RidgeSet, modes: &ModeEstimate) -> Result<Vec<ComponentErrors>> {
    let truth = x
        .truth
        .as_ref()
        .ok_or_else(|| Error::InvalidSignal("signal carries no ground truth".into()))?;
    let est_if: Vec<Vec<f64>> = ridges.ridges.iter().map(|r| r.inst_freq.clone()).collect();
    let truth_if: Vec<Vec<f64>> = truth.iter().map(|t| t.inst_freq.clone()).collect();
    let assign = match_components(&est_if, &truth_if)?;
    let mut out = vec![
        ComponentErrors {
            if_rmse: f64::NAN,
            cr_rmse: f64::NAN,
            mode_rmse: f64::NAN,
        };
        truth.len()
    ];
    for (e, &t) in assign.iter().enumerate() {
        let r = &ridges.ridges[e];
        let mode_rmse = match &truth[t].mode {
            Some(m) => rmse_trimmed(m, &modes.modes[e])?,
            None => f64::NAN,
        };
        out[t] = ComponentErrors {
            if_rmse: rmse_trimmed_real(&truth[t].inst_freq, &r.inst_freq)?,
            cr_rmse: rmse_trimmed_real(&truth[t].chirp_rate, &r.chirp_rate)?,
            mode_rmse,
        };
    }
    Ok(out)
}

/// Box-constrained argmax of |U^g| at time index m (the simple scheme's search
/// over a known per-component region). Returns (scale index, λ index).
pub fn box_argmax(
    u0: &Array3<C>,
    grid: &AnalysisGrid,
    m: usize,
    freq: (f64, f64),
    lam: (f64, f64),
) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for (i, &a) in grid.scales.iter().enumerate() {
        let f = grid.mu() / a;
        if f < freq.0 || f > freq.1 {
            continue;
        }
        for (l, &lv) in grid.lambdas.iter().enumerate() {
            if lv < lam.0 || lv > lam.1 {
                continue;
            }
            let v = u0[[i, m, l]].norm();
            if best.is_none_or(|(_, b)| v > b) {
                best = Some(((i, l), v));
            }
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rmse_basics() {
        let f: Vec<C> = (0..64).map(|i| C::new(i as f64, 1.0)).collect();
        assert_eq!(rmse_trimmed(&f, &f).unwrap(), 0.0);
        let c = C::new(0.3, -0.4);
        let g: Vec<C> = f.iter().map(|v| v + c).collect();
        assert_abs_diff_eq!(rmse_trimmed(&f, &g).unwrap(), 0.5, epsilon = 1e-14);
        assert!(rmse_trimmed(&f, &g[1..]).is_err());
        assert_eq!(trim_range(1024), 128..=896);
    }

    #[test]
    fn crosstalk_diagonal_is_one() {
        let c = crosstalk_matrix(3.0, 1.0, &[0.03, 0.05, 0.02], &[4.0, -4.0, 1.0]);
        for l in 0..3 {
            assert_abs_diff_eq!(c[(l, l)].re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(c[(l, l)].im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn singular_system_uses_pseudo_inverse() {
        let c = DMatrix::from_element(2, 2, C::new(1.0, 0.0));
        let u = DVector::from_vec(vec![C::new(2.0, 0.0), C::new(2.0, 0.0)]);
        let (x, pinv) = solve_crosstalk(&c, &u);
        assert!(pinv);
        assert_abs_diff_eq!(x[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn matching_finds_swap() {
        let a = vec![1.0; 16];
        let b = vec![5.0; 16];
        let p = match_components(&[b.clone(), a.clone()], &[a, b]).unwrap();
        assert_eq!(p, vec![1, 0]);
    }
}
