//! Analysis grid and FFT computation of the moment-window wavelet-chirplet cubes.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::window::{gaussian, ChirpFactors};

/// Parameters that define an [`AnalysisGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub dt: f64,
    pub mu: f64,
    pub delta_a_tilde: f64,
    pub r0: f64,
    pub delta_lambda: f64,
    /// Keep only lattice scales whose frequency μ/a lies in this band (Hz).
    pub band: Option<(f64, f64)>,
}

/// Discretized scale, time, chirprate and frequency axes.
///
/// Scales are the lattice a_j = 2^{jΔã}·dt, j = 1..J₀, optionally restricted
/// to a contiguous sub-range. Index `i` below always counts retained scales
/// in increasing order, and frequency index `k = J − 1 − i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisGrid {
    pub spec: GridSpec,
    /// Full lattice size ⌈(log₂N − 1)/Δã⌉.
    pub j0: usize,
    /// Lattice index j of `scales[0]`.
    pub j_first: usize,
    pub scales: Vec<f64>,
    /// (Δa)_j = a_{j+1} − a_j; the last lattice scale reuses the previous step.
    pub scale_steps: Vec<f64>,
    pub freqs: Vec<f64>,
    /// (Δξ)_k = ξ_{k+1} − ξ_k; the last entry reuses the previous step.
    pub freq_steps: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub eta: Vec<f64>,
    freq_edges: Vec<f64>,
}

pub fn lattice_size(n: usize, delta_a_tilde: f64) -> usize {
    (((n as f64).log2() - 1.0) / delta_a_tilde).ceil() as usize
}

pub fn build_grid(n: usize, dt: f64, mu: f64, delta_a_tilde: f64, r0: f64, delta_lambda: f64) -> Result<AnalysisGrid> {
    AnalysisGrid::new(GridSpec {
        n,
        dt,
        mu,
        delta_a_tilde,
        r0,
        delta_lambda,
        band: None,
    })
}

impl AnalysisGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let GridSpec {
            n,
            dt,
            mu,
            delta_a_tilde: da,
            r0,
            delta_lambda: dl,
            band,
        } = spec;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if n < 4 {
            return bad(format!("N must be at least 4, got {n}"));
        }
        for (name, v) in [
            ("dt", dt),
            ("mu", mu),
            ("delta_a_tilde", da),
            ("R0", r0),
            ("delta_lambda", dl),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if dl >= 2.0 * r0 {
            return bad(format!("delta_lambda {dl} >= 2*R0 leaves an empty chirprate grid"));
        }
        let j0 = lattice_size(n, da);
        if j0 < 2 {
            return bad(format!("scale lattice has {j0} entries; decrease delta_a_tilde"));
        }
        let a = |j: usize| (j as f64 * da).exp2() * dt;
        let (mut lo, mut hi) = (1usize, j0);
        if let Some((f_lo, f_hi)) = band {
            if !(f_lo > 0.0 && f_hi > f_lo) {
                return bad(format!("invalid frequency band ({f_lo}, {f_hi})"));
            }
            // μ/a_j ≤ f_hi  ⇔  j ≥ log2(μ/(f_hi·dt))/Δã
            let j_lo = ((mu / (f_hi * dt)).log2() / da - 1e-9).ceil();
            let j_hi = ((mu / (f_lo * dt)).log2() / da + 1e-9).floor();
            lo = lo.max(j_lo.max(1.0) as usize);
            hi = hi.min(j_hi.max(0.0) as usize);
            if hi < lo + 1 {
                return bad(format!("band ({f_lo}, {f_hi}) keeps fewer than 2 scales"));
            }
        }
        let scales: Vec<f64> = (lo..=hi).map(a).collect();
        let scale_steps: Vec<f64> = (lo..=hi)
            .map(|j| if j < j0 { a(j + 1) - a(j) } else { a(j) - a(j - 1) })
            .collect();
        let jn = scales.len();
        let freqs: Vec<f64> = (0..jn).map(|k| mu / scales[jn - 1 - k]).collect();
        let mut freq_steps: Vec<f64> = freqs.windows(2).map(|w| w[1] - w[0]).collect();
        freq_steps.push(freq_steps[jn - 2]);
        let mut freq_edges = Vec::with_capacity(jn + 1);
        freq_edges.push(freqs[0] - 0.5 * freq_steps[0]);
        for k in 0..jn {
            freq_edges.push(freqs[k] + 0.5 * freq_steps[k]);
        }
        let l = (2.0 * r0 / dl).floor() as usize;
        let lambdas = (0..l).map(|i| -r0 + i as f64 * dl).collect();
        let d_eta = 1.0 / (n as f64 * dt);
        let eta = (0..n)
            .map(|k| {
                if k <= n / 2 {
                    k as f64 * d_eta
                } else {
                    (k as f64 - n as f64) * d_eta
                }
            })
            .collect();
        Ok(AnalysisGrid {
            spec,
            j0,
            j_first: lo,
            scales,
            scale_steps,
            freqs,
            freq_steps,
            lambdas,
            eta,
            freq_edges,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn dt(&self) -> f64 {
        self.spec.dt
    }

    pub fn mu(&self) -> f64 {
        self.spec.mu
    }

    pub fn n_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn n_lambdas(&self) -> usize {
        self.lambdas.len()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_scales(), self.n(), self.n_lambdas())
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.spec.dt
    }

    /// Frequency bin k with −½(Δξ)_{k−1} < f − ξ_k ≤ ½(Δξ)_k.
    pub fn freq_bin(&self, f: f64) -> Option<usize> {
        if !f.is_finite() {
            return None;
        }
        let i = self.freq_edges.partition_point(|&e| e < f);
        (i >= 1 && i <= self.freqs.len()).then(|| i - 1)
    }

    /// Scale index whose frequency μ/a is `freqs[k]`.
    pub fn scale_index_of_freq(&self, k: usize) -> usize {
        self.n_scales() - 1 - k
    }

    /// Nearest scale index, taken through the frequency bin of μ/a.
    pub fn nearest_scale(&self, a: f64) -> Option<usize> {
        self.freq_bin(self.mu() / a).map(|k| self.scale_index_of_freq(k))
    }

    /// Measure a⁻¹(Δa)_j·dt·Δλ of one cell at scale index `i`.
    pub fn cell_weight(&self, i: usize) -> f64 {
        self.scale_steps[i] / self.scales[i] * self.spec.dt * self.spec.delta_lambda
    }
}

/// Index of the nearest point of the uniform grid x₀ + p·h, p = 0..len−1.
/// Midpoint ties go to the lower index.
pub fn uniform_bin(x: f64, x0: f64, h: f64, len: usize) -> Option<usize> {
    if !x.is_finite() {
        return None;
    }
    let p = ((x - x0) / h - 0.5).ceil();
    (p >= 0.0 && p < len as f64).then_some(p as usize)
}

/// Precomputed spectrum and inverse FFT for repeated per-scale evaluation.
pub struct WctEngine<'a> {
    grid: &'a AnalysisGrid,
    sigma: f64,
    spectrum: Vec<Complex64>,
    ifft: Arc<dyn Fft<f64>>,
}

impl<'a> WctEngine<'a> {
    pub fn new(x: &SampledSignal, sigma: f64, grid: &'a AnalysisGrid) -> Result<Self> {
        if x.len() != grid.n() {
            return Err(Error::ShapeMismatch {
                expected: grid.n(),
                got: x.len(),
            });
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        let mut planner = FftPlanner::new();
        let mut spectrum = x.samples.clone();
        planner.plan_fft_forward(grid.n()).process(&mut spectrum);
        let ifft = planner.plan_fft_inverse(grid.n());
        Ok(WctEngine {
            grid,
            sigma,
            spectrum,
            ifft,
        })
    }

    pub fn grid(&self) -> &AnalysisGrid {
        self.grid
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Moment planes U^{bʲg}(a_i, ·, ·) for j < `moments`, each shaped (N, L).
    pub fn planes(&self, i: usize, moments: usize) -> Vec<Array2<Complex64>> {
        assert!((1..=5).contains(&moments));
        let g = self.grid;
        let (n, l) = (g.n(), g.n_lambdas());
        let a = g.scales[i];
        let mu = g.mu();
        let scale = 1.0 / n as f64;
        let mut out = vec![Array2::<Complex64>::zeros((n, l)); moments];
        let mut bufs = vec![vec![Complex64::new(0.0, 0.0); n]; moments];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.ifft.get_inplace_scratch_len()];
        for (li, &lam) in g.lambdas.iter().enumerate() {
            let cf = ChirpFactors::new(self.sigma, a * a * lam);
            for k in 0..n {
                let eta = mu - a * g.eta[k];
                let xk = self.spectrum[k];
                if moments == 1 {
                    bufs[0][k] = xk * cf.m0(eta);
                } else {
                    let m = cf.moments(eta);
                    for (j, buf) in bufs.iter_mut().enumerate() {
                        buf[k] = xk * m[j];
                    }
                }
            }
            for (buf, plane) in bufs.iter_mut().zip(out.iter_mut()) {
                self.ifft.process_with_scratch(buf, &mut scratch);
                for (m, v) in buf.iter().enumerate() {
                    plane[[m, li]] = v * scale;
                }
            }
        }
        out
    }
}

/// The five moment cubes U^{bʲg}, j = 0..4, each shaped (J, N, L).
#[derive(Debug, Clone)]
pub struct MomentCubeStack {
    pub cubes: Vec<Array3<Complex64>>,
    pub grid: AnalysisGrid,
    pub sigma: f64,
}

impl MomentCubeStack {
    pub fn u(&self, j: usize) -> &Array3<Complex64> {
        &self.cubes[j]
    }
}

/// Materializes all five cubes. Scales are computed in parallel batches.
pub fn compute_moment_cubes(x: &SampledSignal, sigma: f64, grid: &AnalysisGrid) -> Result<MomentCubeStack> {
    compute_cubes(x, sigma, grid, 5)
}

/// Materializes the first `moments` cubes.
pub fn compute_cubes(x: &SampledSignal, sigma: f64, grid: &AnalysisGrid, moments: usize) -> Result<MomentCubeStack> {
    let engine = WctEngine::new(x, sigma, grid)?;
    let shape = grid.shape();
    let mut cubes = vec![Array3::<Complex64>::zeros(shape); moments];
    let batch = rayon::current_num_threads().max(1);
    for start in (0..shape.0).step_by(batch) {
        let end = (start + batch).min(shape.0);
        let planes: Vec<_> = (start..end)
            .into_par_iter()
            .map(|i| engine.planes(i, moments))
            .collect();
        for (i, p) in (start..end).zip(planes) {
            for (cube, plane) in cubes.iter_mut().zip(p) {
                cube.index_axis_mut(ndarray::Axis(0), i).assign(&plane);
            }
        }
    }
    Ok(MomentCubeStack {
        cubes,
        grid: grid.clone(),
        sigma,
    })
}

/// Band-limited (periodic sinc) interpolation of the record at time t.
/// Zero outside [t₀, t₀ + N·dt).
pub fn interpolate(x: &SampledSignal, t: f64) -> Complex64 {
    let n = x.len();
    let u = (t - x.t0) / x.dt;
    if u < 0.0 || u >= n as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let r = u.round();
    if (u - r).abs() < 1e-12 {
        return x.samples[(r as usize).min(n - 1)];
    }
    // Dirichlet kernel of the N-point DFT with the same bin layout as the
    // FFT path (bins 0..=N/2 positive, the rest negative):
    //   D(d) = sin(πd) / (N·sin(πd/N)) · e^{iπd/N} (even N; no phase for odd N)
    // with d = u − k, so sin(πd) = (−1)^k·sin(πu) and e^{iπd/N} = e^{iπu/N}·e^{−iπk/N}.
    let nf = n as f64;
    let sin_pu = (PI * u).sin();
    let zu = Complex64::from_polar(1.0, PI * u / nf);
    // e^{−iπk/N} from a coarse and a fine table, k = B·p + r
    const B: usize = 32;
    let fine: Vec<Complex64> = (0..B)
        .map(|r| Complex64::from_polar(1.0, -PI * r as f64 / nf))
        .collect();
    let even = n.is_multiple_of(2);
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, chunk) in x.samples.chunks(B).enumerate() {
        let coarse = zu * Complex64::from_polar(1.0, -PI * (p * B) as f64 / nf);
        for (r, &s) in chunk.iter().enumerate() {
            let z = coarse * fine[r];
            let k = p * B + r;
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            let mag = sign * sin_pu / (nf * z.im);
            acc += if even { s * z * mag } else { s * mag };
        }
    }
    acc
}

/// Direct quadrature of ∫ x(b + a t)·tʲ g_σ(t)·e^{−i2πμt − iπλa²t²} dt.
pub fn wct_direct(x: &SampledSignal, sigma: f64, mu: f64, a: f64, b: f64, lam: f64, j: usize) -> Complex64 {
    let half = 12.0 * sigma;
    // resolve both the sample spacing (in t units, dt/a) and the carrier
    let step = (x.dt / a).min(1.0 / (mu + a * a * lam.abs() * half + 1.0)) / 8.0;
    let nodes = (2.0 * half / step).ceil() as usize + 1;
    let h = 2.0 * half / (nodes - 1) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for q in 0..nodes {
        let t = -half + q as f64 * h;
        let v = interpolate(x, b + a * t);
        if v.norm_sqr() == 0.0 {
            continue;
        }
        let wt = if q == 0 || q == nodes - 1 { 0.5 } else { 1.0 };
        let ph = -2.0 * PI * mu * t - PI * lam * a * a * t * t;
        acc += v * Complex64::from_polar(gaussian(sigma, t) * t.powi(j as i32) * wt, ph);
    }
    acc * h
}
