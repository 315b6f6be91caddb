//! Rényi entropy of the WCT and entropy-driven choice of σ.

use ndarray::Array3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::wct::{AnalysisGrid, MomentCubeStack, WctEngine};

pub const DEFAULT_ORDER: f64 = 2.5;
pub const DEFAULT_RANGE: (f64, f64) = (0.5, 12.0);

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    pub sigmas: Vec<f64>,
    pub entropies: Vec<f64>,
    pub argmin: f64,
    /// Set when the minimum sits on an end of the search range.
    pub at_boundary: bool,
}

impl EntropyCurve {
    pub fn to_text(&self) -> String {
        let mut s = String::from("sigma,entropy\n");
        for (a, e) in self.sigmas.iter().zip(&self.entropies) {
            s.push_str(&format!("{a},{e}\n"));
        }
        s
    }
}

/// Weighted sums Σw|U|^{2ℓ} and Σw|U|².
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    high: f64,
    low: f64,
}

impl Sums {
    fn add_plane<'a>(&mut self, values: impl Iterator<Item = &'a Complex64>, w: f64, ell: f64) {
        let (mut h, mut l) = (0.0, 0.0);
        for v in values {
            let p = v.norm_sqr();
            l += p;
            h += p.powf(ell);
        }
        self.high += w * h;
        self.low += w * l;
    }

    fn entropy(self, ell: f64) -> Result<f64> {
        if !(self.low > 0.0) || !(self.high > 0.0) {
            return Err(Error::ZeroCube);
        }
        Ok((self.high.log2() - ell * self.low.log2()) / (1.0 - ell))
    }
}

fn check_order(ell: f64) -> Result<()> {
    if ell > 1.0 && ell.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "entropy order must exceed 1, got {ell}"
        )))
    }
}

/// E = (log₂ Σw|U|^{2ℓ} − ℓ·log₂ Σw|U|²)/(1 − ℓ) with w = a⁻¹(Δa)·dt·Δλ.
pub fn renyi_entropy(stack: &MomentCubeStack, ell: f64) -> Result<f64> {
    renyi_entropy_cube(stack.u(0), &stack.grid, ell)
}

pub fn renyi_entropy_cube(cube: &Array3<Complex64>, grid: &AnalysisGrid, ell: f64) -> Result<f64> {
    check_order(ell)?;
    let mut sums = Sums::default();
    for (i, plane) in cube.outer_iter().enumerate() {
        sums.add_plane(plane.iter(), grid.cell_weight(i), ell);
    }
    sums.entropy(ell)
}

/// Entropy for one σ without materializing the cube.
pub fn entropy_for_sigma(x: &SampledSignal, sigma: f64, grid: &AnalysisGrid, ell: f64) -> Result<f64> {
    check_order(ell)?;
    let engine = WctEngine::new(x, sigma, grid)?;
    let per_scale: Vec<Sums> = (0..grid.n_scales())
        .into_par_iter()
        .map(|i| {
            let planes = engine.planes(i, 1);
            let mut s = Sums::default();
            s.add_plane(planes[0].iter(), grid.cell_weight(i), ell);
            s
        })
        .collect();
    // fixed summation order keeps the result independent of scheduling
    let sums = per_scale.into_iter().fold(Sums::default(), |a, b| Sums {
        high: a.high + b.high,
        low: a.low + b.low,
    });
    sums.entropy(ell)
}

/// Coarse sweep at step 0.5, then step 0.05 within ±0.5 of the coarse minimum.
pub fn select_sigma(x: &SampledSignal, grid: &AnalysisGrid, range: (f64, f64)) -> Result<EntropyCurve> {
    select_sigma_with(x, grid, range, DEFAULT_ORDER)
}

pub fn select_sigma_with(x: &SampledSignal, grid: &AnalysisGrid, range: (f64, f64), ell: f64) -> Result<EntropyCurve> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("invalid sigma range ({lo}, {hi})")));
    }
    let coarse = steps(lo, hi, 0.5);
    let coarse_e = eval_all(x, grid, &coarse, ell)?;
    let c_best = argmin(&coarse_e);
    let centre = coarse[c_best];
    let fine: Vec<f64> = steps((centre - 0.5).max(lo), (centre + 0.5).min(hi), 0.05)
        .into_iter()
        .filter(|s| !coarse.iter().any(|c| (c - s).abs() < 1e-9))
        .collect();
    let fine_e = eval_all(x, grid, &fine, ell)?;

    let mut pts: Vec<(f64, f64)> = coarse
        .into_iter()
        .zip(coarse_e)
        .chain(fine.into_iter().zip(fine_e))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (sigmas, entropies): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let best = argmin(&entropies);
    let at_boundary = best == 0 || best + 1 == sigmas.len();
    Ok(EntropyCurve {
        argmin: sigmas[best],
        sigmas,
        entropies,
        at_boundary,
    })
}

fn steps(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let n = ((hi - lo) / h + 1e-9).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
    if hi - v[n] > 1e-9 {
        v.push(hi);
    }
    v
}

fn eval_all(x: &SampledSignal, grid: &AnalysisGrid, sigmas: &[f64], ell: f64) -> Result<Vec<f64>> {
    sigmas.par_iter().map(|&s| entropy_for_sigma(x, s, grid, ell)).collect()
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, e) in v.iter().enumerate() {
        if *e < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wct::build_grid;
    use approx::assert_abs_diff_eq;

    fn flat_grid() -> AnalysisGrid {
        build_grid(8, 1.0, 1.0, 0.5, 1.0, 0.5).unwrap()
    }

    fn unit_weight_entropy(values: &[f64], ell: f64) -> f64 {
        let mut s = Sums::default();
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        s.add_plane(c.iter(), 1.0, ell);
        s.entropy(ell).unwrap()
    }

    #[test]
    fn equal_cells_give_log_count() {
        assert_abs_diff_eq!(unit_weight_entropy(&[2.0; 16], 2.5), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(unit_weight_entropy(&[0.0, 3.0, 0.0], 2.5), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn scale_invariant() {
        let g = flat_grid();
        let cube = Array3::from_shape_fn(g.shape(), |(i, m, l)| {
            Complex64::new((i + 1) as f64 * 0.3, (m * l) as f64 * 0.1)
        });
        let e1 = renyi_entropy_cube(&cube, &g, 2.5).unwrap();
        let e2 = renyi_entropy_cube(&cube.mapv(|v| v * 7.5), &g, 2.5).unwrap();
        assert_abs_diff_eq!(e1, e2, epsilon = 1e-12);
    }

    #[test]
    fn zero_cube_rejected() {
        let g = flat_grid();
        let cube = Array3::<Complex64>::zeros(g.shape());
        assert!(matches!(renyi_entropy_cube(&cube, &g, 2.5), Err(Error::ZeroCube)));
        assert!(renyi_entropy_cube(&cube, &g, 1.0).is_err());
    }

    #[test]
    fn step_lists() {
        assert_eq!(steps(0.5, 2.0, 0.5), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(steps(0.5, 1.2, 0.5), vec![0.5, 1.0, 1.2]);
    }
}
