//! Greedy extraction of K ridges from a squeezed (frequency, time, chirprate) cube.

use ndarray::{Array3, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::squeeze::FreqBins;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeParams {
    pub k: usize,
    pub jump_f: usize,
    pub jump_c: usize,
    /// Penalty per squared bin step, as a fraction of the largest value in
    /// the search window.
    pub penalty: f64,
}

impl Default for RidgeParams {
    fn default() -> Self {
        RidgeParams {
            k: 2,
            jump_f: 3,
            jump_c: 3,
            penalty: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ridge {
    pub freq_idx: Vec<usize>,
    pub cr_idx: Vec<usize>,
    pub inst_freq: Vec<f64>,
    pub chirp_rate: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSet {
    pub ridges: Vec<Ridge>,
    /// Set when fewer than K distinct ridges could be found.
    pub duplicated: bool,
}

impl RidgeSet {
    pub fn len(&self) -> usize {
        self.ridges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ridges.is_empty()
    }

    /// Rows `t,if_1,cr_1,...,if_K,cr_K`.
    pub fn to_text(&self, dt: f64) -> String {
        let mut s = String::from("t");
        for k in 1..=self.len() {
            s.push_str(&format!(",if_{k},cr_{k}"));
        }
        s.push('\n');
        let n = self.ridges.first().map_or(0, |r| r.freq_idx.len());
        for m in 0..n {
            s.push_str(&format!("{}", m as f64 * dt));
            for r in &self.ridges {
                s.push_str(&format!(",{},{}", r.inst_freq[m], r.chirp_rate[m]));
            }
            s.push('\n');
        }
        s
    }
}

/// Extracts `params.k` ridges from a nonnegative cube of shape (K, N, P).
///
/// Each step searches a window around the frequency predicted by the
/// current chirprate, IF + CR·dt. Scores are taken relative to the best
/// value in the window, so weak stretches are followed as closely as strong
/// ones, and an empty window keeps the ridge on its predicted course.
pub fn extract_ridges(
    cube: &Array3<f64>,
    freqs: &[f64],
    gammas: &[f64],
    dt: f64,
    params: RidgeParams,
) -> Result<RidgeSet> {
    let (nk, n, np) = cube.dim();
    if nk != freqs.len() || np != gammas.len() {
        return Err(Error::ShapeMismatch {
            expected: freqs.len() * gammas.len(),
            got: nk * np,
        });
    }
    if params.k == 0 {
        return Err(Error::InvalidParameter("ridge count K must be at least 1".into()));
    }
    let peak = cube.iter().fold(0.0f64, |m, &v| m.max(v));
    if !(peak > 0.0) {
        return Err(Error::InvalidParameter(
            "cannot extract ridges from an all-zero cube".into(),
        ));
    }
    let pen = params.penalty;
    let bins = FreqBins::from_centers(freqs.to_vec());
    let mut claimed = Array3::<bool>::from_elem(cube.dim(), false);
    let mut paths: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(params.k);
    let mut duplicated = false;

    for _ in 0..params.k {
        let Some((k0, m0, p0)) = seed(cube, &claimed) else {
            duplicated = true;
            let last = paths.last().cloned().expect("first round always seeds");
            paths.push(last);
            continue;
        };
        let mut fk = vec![0usize; n];
        let mut fp = vec![0usize; n];
        fk[m0] = k0;
        fp[m0] = p0;
        // f is the continuous IF carried along the chirprate
        let step = |m: usize, prev: (usize, usize), f: f64, dir: f64| {
            let f_pred = f + dir * gammas[prev.1] * dt;
            let centre = (bins.bin(f_pred).unwrap_or(prev.0), prev.1);
            let plane = cube.index_axis(Axis(1), m);
            let taken = claimed.index_axis(Axis(1), m);
            let next = best_near(plane, taken, centre, params.jump_f, params.jump_c, pen)
                .or_else(|| best_near(plane, taken, centre, nk, np, pen))
                .unwrap_or(centre);
            let f_next = if next.0 == centre.0 && bins.bin(f_pred).is_some() {
                f_pred
            } else {
                freqs[next.0]
            };
            (next, f_next)
        };
        let mut f = freqs[k0];
        for m in m0 + 1..n {
            let (next, f2) = step(m, (fk[m - 1], fp[m - 1]), f, 1.0);
            (fk[m], fp[m], f) = (next.0, next.1, f2);
        }
        let mut f = freqs[k0];
        for m in (0..m0).rev() {
            let (next, f2) = step(m, (fk[m + 1], fp[m + 1]), f, -1.0);
            (fk[m], fp[m], f) = (next.0, next.1, f2);
        }
        for m in 0..n {
            let k_lo = fk[m].saturating_sub(params.jump_f);
            let k_hi = (fk[m] + params.jump_f).min(nk - 1);
            let p_lo = fp[m].saturating_sub(params.jump_c);
            let p_hi = (fp[m] + params.jump_c).min(np - 1);
            for k in k_lo..=k_hi {
                for p in p_lo..=p_hi {
                    claimed[[k, m, p]] = true;
                }
            }
        }
        paths.push((fk, fp));
    }

    let order_at = n / 8;
    paths.sort_by(|a, b| {
        freqs[a.0[order_at]]
            .total_cmp(&freqs[b.0[order_at]])
            .then(a.1[order_at].cmp(&b.1[order_at]))
    });
    let ridges = paths
        .into_iter()
        .map(|(fk, fp)| Ridge {
            inst_freq: fk.iter().map(|&k| freqs[k]).collect(),
            chirp_rate: fp.iter().map(|&p| gammas[p]).collect(),
            freq_idx: fk,
            cr_idx: fp,
        })
        .collect();
    Ok(RidgeSet { ridges, duplicated })
}

/// Largest unclaimed positive cell, first in index order on ties.
fn seed(cube: &Array3<f64>, claimed: &Array3<bool>) -> Option<(usize, usize, usize)> {
    let mut best: Option<((usize, usize, usize), f64)> = None;
    for ((idx, &v), &c) in cube.indexed_iter().zip(claimed.iter()) {
        if c || !(v > 0.0) {
            continue;
        }
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((idx, v));
        }
    }
    best.map(|(i, _)| i)
}

fn best_near(
    plane: ArrayView2<f64>,
    taken: ArrayView2<bool>,
    centre: (usize, usize),
    jf: usize,
    jc: usize,
    pen: f64,
) -> Option<(usize, usize)> {
    let (nk, np) = plane.dim();
    let ks = centre.0.saturating_sub(jf)..=(centre.0 + jf).min(nk - 1);
    let ps = centre.1.saturating_sub(jc)..=(centre.1 + jc).min(np - 1);
    let mut top = 0.0f64;
    let mut any = false;
    for k in ks.clone() {
        for p in ps.clone() {
            if !taken[[k, p]] {
                any = true;
                top = top.max(plane[[k, p]]);
            }
        }
    }
    if !any {
        return None;
    }
    if !(top > 0.0) {
        return Some(centre).filter(|&c| !taken[c]);
    }
    let mut best: Option<((usize, usize), f64)> = None;
    for k in ks {
        for p in ps.clone() {
            if taken[[k, p]] {
                continue;
            }
            let dk = k as f64 - centre.0 as f64;
            let dp = p as f64 - centre.1 as f64;
            let score = plane[[k, p]] / top - pen * (dk * dk + dp * dp);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some(((k, p), score));
            }
        }
    }
    best.map(|(i, _)| i)
}
