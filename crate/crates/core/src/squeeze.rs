//! Synchrosqueezing of WCT or XWCT values onto (frequency, chirprate) bins,
//! and multiple squeezing by composition of reference fields.

use std::ops::AddAssign;

use ndarray::{Array3, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reassign::ReferenceFields;
use crate::wct::{uniform_bin, AnalysisGrid};

/// Values that can be binned: complex WCT coefficients or real XWCT values.
pub trait BinValue: Copy + Send + Sync + AddAssign + Default + 'static {
    fn scaled(self, w: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl BinValue for Complex64 {
    fn scaled(self, w: f64) -> Self {
        self * w
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

impl BinValue for f64 {
    fn scaled(self, w: f64) -> Self {
        self * w
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SqueezeSource {
    Wct2,
    Wct3,
    Xwct3,
    Mswct { order: u8, iterations: usize },
}

/// Frequency bins with half-open cells (edge_k, edge_{k+1}].
#[derive(Debug, Clone, PartialEq)]
pub struct FreqBins {
    pub centers: Vec<f64>,
    edges: Vec<f64>,
}

impl FreqBins {
    /// The log-spaced frequencies ξ_k = μ/a of the analysis grid.
    pub fn log(grid: &AnalysisGrid) -> Self {
        Self::from_centers(grid.freqs.clone())
    }

    /// Uniform bins ξ_k = lo + kΔξ up to hi.
    pub fn uniform(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "invalid uniform bins ({lo}, {hi}, {step})"
            )));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        if n < 2 {
            return Err(Error::InvalidParameter("uniform bins need at least 2 centres".into()));
        }
        Ok(Self::from_centers((0..n).map(|k| lo + k as f64 * step).collect()))
    }

    /// Cells bounded by midpoints; the outer cells mirror their neighbours.
    pub fn from_centers(centers: Vec<f64>) -> Self {
        let n = centers.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(centers[0] - 0.5 * (centers[1] - centers[0]));
        for k in 0..n - 1 {
            edges.push(0.5 * (centers[k] + centers[k + 1]));
        }
        edges.push(centers[n - 1] + 0.5 * (centers[n - 1] - centers[n - 2]));
        FreqBins { centers, edges }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn bin(&self, f: f64) -> Option<usize> {
        if !f.is_finite() {
            return None;
        }
        let i = self.edges.partition_point(|&e| e < f);
        (i >= 1 && i <= self.centers.len()).then(|| i - 1)
    }
}

/// Chirprate bins γ_p = −R0 + p·Δγ, p = 0..P−1, P = ⌊2R0/Δγ⌋.
pub fn gamma_grid(r0: f64, delta_gamma: f64) -> Result<Vec<f64>> {
    if !(delta_gamma > 0.0 && delta_gamma < 2.0 * r0) {
        return Err(Error::InvalidParameter(format!(
            "delta_gamma {delta_gamma} incompatible with R0 {r0}"
        )));
    }
    let p = (2.0 * r0 / delta_gamma).floor() as usize;
    Ok((0..p).map(|i| -r0 + i as f64 * delta_gamma).collect())
}

#[derive(Debug, Clone)]
pub struct SqueezedCube<T> {
    /// Shape (K, N, P) over (frequency bin, time, chirprate bin).
    pub values: Array3<T>,
    pub freqs: Vec<f64>,
    pub gammas: Vec<f64>,
    pub delta_gamma: f64,
    pub source: SqueezeSource,
}

impl<T: BinValue> SqueezedCube<T> {
    pub fn magnitude(&self) -> Array3<f64> {
        self.values.mapv(|v| v.magnitude())
    }

    pub fn total_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.magnitude()).sum()
    }
}

/// Squeeze weight a⁻¹(Δa)·Δλ of scale index i.
pub fn squeeze_weight(grid: &AnalysisGrid, i: usize) -> f64 {
    grid.scale_steps[i] / grid.scales[i] * grid.spec.delta_lambda
}

fn check_shapes<T>(source: &Array3<T>, fields: &ReferenceFields, grid: &AnalysisGrid) -> Result<()> {
    let shape = grid.shape();
    for d in [source.dim(), fields.mask.dim(), fields.if_field.dim()] {
        if d != shape {
            return Err(Error::ShapeMismatch {
                expected: shape.0 * shape.1 * shape.2,
                got: d.0 * d.1 * d.2,
            });
        }
    }
    Ok(())
}

/// Squeezes onto the log-spaced frequency bins of the grid.
pub fn synchrosqueeze<T: BinValue>(
    source: &Array3<T>,
    fields: &ReferenceFields,
    grid: &AnalysisGrid,
    delta_gamma: f64,
    tag: SqueezeSource,
) -> Result<SqueezedCube<T>> {
    synchrosqueeze_on(source, fields, grid, &FreqBins::log(grid), delta_gamma, tag)
}

pub fn synchrosqueeze_on<T: BinValue>(
    source: &Array3<T>,
    fields: &ReferenceFields,
    grid: &AnalysisGrid,
    bins: &FreqBins,
    delta_gamma: f64,
    tag: SqueezeSource,
) -> Result<SqueezedCube<T>> {
    check_shapes(source, fields, grid)?;
    let gammas = gamma_grid(grid.spec.r0, delta_gamma)?;
    let (nj, n, nl) = grid.shape();
    let (nk, np) = (bins.len(), gammas.len());
    let g0 = gammas[0];
    let weights: Vec<f64> = (0..nj).map(|i| squeeze_weight(grid, i)).collect();
    let mut values = Array3::<T>::default((nk, n, np));
    values
        .axis_iter_mut(Axis(1))
        .into_par_iter()
        .enumerate()
        .for_each(|(m, mut plane)| {
            for i in 0..nj {
                for l in 0..nl {
                    if !fields.mask[[i, m, l]] {
                        continue;
                    }
                    let Some(k) = bins.bin(fields.if_field[[i, m, l]]) else {
                        continue;
                    };
                    let Some(p) = uniform_bin(fields.cr_field[[i, m, l]], g0, delta_gamma, np) else {
                        continue;
                    };
                    plane[[k, p]] += source[[i, m, l]].scaled(weights[i]);
                }
            }
        });
    Ok(SqueezedCube {
        values,
        freqs: bins.centers.clone(),
        gammas,
        delta_gamma,
        source: tag,
    })
}

/// Σ w·|source| over on-mask cells whose IF and CR land inside the bins.
pub fn in_range_mass<T: BinValue>(
    source: &Array3<T>,
    fields: &ReferenceFields,
    grid: &AnalysisGrid,
    delta_gamma: f64,
) -> Result<f64> {
    check_shapes(source, fields, grid)?;
    let bins = FreqBins::log(grid);
    let gammas = gamma_grid(grid.spec.r0, delta_gamma)?;
    let (nj, n, nl) = grid.shape();
    let mut total = 0.0;
    for i in 0..nj {
        let w = squeeze_weight(grid, i);
        let mut s = 0.0;
        for m in 0..n {
            for l in 0..nl {
                if fields.mask[[i, m, l]]
                    && bins.bin(fields.if_field[[i, m, l]]).is_some()
                    && uniform_bin(fields.cr_field[[i, m, l]], gammas[0], delta_gamma, gammas.len()).is_some()
                {
                    s += source[[i, m, l]].magnitude();
                }
            }
        }
        total += w * s;
    }
    Ok(total)
}

/// Fields after n − 1 compositions: each step re-reads the fields at the
/// scale whose frequency bin holds the current IF and at the nearest
/// chirprate. Lookups that leave the grid or the mask drop the cell.
pub fn compose_fields(fields: &ReferenceFields, grid: &AnalysisGrid, n: usize) -> Result<ReferenceFields> {
    if n == 0 {
        return Err(Error::InvalidParameter("iteration count must be at least 1".into()));
    }
    let nl = grid.n_lambdas();
    let lam0 = grid.lambdas[0];
    let dl = grid.spec.delta_lambda;
    let mut out = fields.clone();
    for _ in 1..n {
        let prev = out;
        let mut if_field = Array3::<f64>::from_elem(grid.shape(), f64::NAN);
        let mut cr_field = Array3::<f64>::from_elem(grid.shape(), f64::NAN);
        let mut mask = Array3::<bool>::from_elem(grid.shape(), false);
        Zip::indexed(&mut if_field)
            .and(&mut cr_field)
            .and(&mut mask)
            .par_for_each(|(i, m, l), f, r, mk| {
                if !prev.mask[[i, m, l]] {
                    return;
                }
                let Some(k) = grid.freq_bin(prev.if_field[[i, m, l]]) else {
                    return;
                };
                let Some(l2) = uniform_bin(prev.cr_field[[i, m, l]], lam0, dl, nl) else {
                    return;
                };
                let i2 = grid.scale_index_of_freq(k);
                if fields.mask[[i2, m, l2]] {
                    *f = fields.if_field[[i2, m, l2]];
                    *r = fields.cr_field[[i2, m, l2]];
                    *mk = true;
                }
            });
        out = ReferenceFields {
            order: fields.order,
            mode: fields.mode,
            if_field,
            cr_field,
            mask,
        };
    }
    Ok(out)
}

/// Multiple squeezing: compose the fields n − 1 times, then squeeze once.
pub fn multi_squeeze<T: BinValue>(
    source: &Array3<T>,
    fields: &ReferenceFields,
    grid: &AnalysisGrid,
    delta_gamma: f64,
    n: usize,
) -> Result<SqueezedCube<T>> {
    let composed = compose_fields(fields, grid, n)?;
    let tag = SqueezeSource::Mswct {
        order: fields.order,
        iterations: n,
    };
    synchrosqueeze(source, &composed, grid, delta_gamma, tag)
}
