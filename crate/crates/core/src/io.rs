//! Text and binary formats: signals, ground truth, cube dumps and slices.

use std::io::{Read, Write};

use ndarray::{Array3, ArrayView3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::reassign::ReferenceFields;
use crate::signal::{ComponentTruth, SampledSignal};
use crate::wct::AnalysisGrid;

pub const CUBE_MAGIC: &[u8; 5] = b"XWCT1";

/// Rows `t,re,im` with a header line.
pub fn signal_to_text(x: &SampledSignal) -> String {
    let mut s = String::from("t,re,im\n");
    for (n, v) in x.samples.iter().enumerate() {
        s.push_str(&format!("{},{},{}\n", x.time(n), v.re, v.im));
    }
    s
}

/// Rows `t,if_1,cr_1,...,if_K,cr_K`; empty when the signal has no truth.
pub fn truth_to_text(x: &SampledSignal) -> String {
    let Some(truth) = &x.truth else {
        return String::new();
    };
    let mut s = String::from("t");
    for k in 1..=truth.len() {
        s.push_str(&format!(",if_{k},cr_{k}"));
    }
    s.push('\n');
    for n in 0..x.len() {
        s.push_str(&format!("{}", x.time(n)));
        for c in truth {
            // + 0.0 turns -0 into 0
            s.push_str(&format!(",{},{}", c.inst_freq[n], c.chirp_rate[n] + 0.0));
        }
        s.push('\n');
    }
    s
}

/// Rows `t,re_1,im_1,...` holding the noise-free components.
pub fn components_to_text(x: &SampledSignal) -> String {
    let Some(truth) = &x.truth else {
        return String::new();
    };
    let mut s = String::from("t");
    for k in 1..=truth.len() {
        s.push_str(&format!(",re_{k},im_{k}"));
    }
    s.push('\n');
    for n in 0..x.len() {
        s.push_str(&format!("{}", x.time(n)));
        for c in truth {
            let v = c.mode.as_ref().map_or(Complex64::new(f64::NAN, f64::NAN), |m| m[n]);
            s.push_str(&format!(",{},{}", v.re, v.im));
        }
        s.push('\n');
    }
    s
}

/// Parses a header line plus rows of comma-separated numbers with a fixed
/// column count.
fn parse_table(text: &str, min_cols: usize) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header: Vec<String> = head.split(',').map(|h| h.trim().to_string()).collect();
    if header.len() < min_cols {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected at least {min_cols} columns, got {}", header.len()),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        if row.len() != header.len() {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {} columns, got {}", header.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Sampling step of a time column, which must be uniform to 1e-6 relative.
fn uniform_step(ts: &[f64]) -> Result<f64> {
    if ts.len() < 2 {
        return Err(Error::InvalidSignal(format!(
            "need at least 2 samples, got {}",
            ts.len()
        )));
    }
    let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::InvalidSignal("time column must increase".into()));
    }
    for (n, &t) in ts.iter().enumerate() {
        if (t - ts[0] - n as f64 * dt).abs() > 1e-6 * dt.max(1e-300) * (n as f64 + 1.0) {
            return Err(Error::InvalidSignal(format!("non-uniform sampling at row {}", n + 2)));
        }
    }
    Ok(dt)
}

pub fn parse_signal(text: &str) -> Result<SampledSignal> {
    let (_, rows) = parse_table(text, 3)?;
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let dt = uniform_step(&ts)?;
    let samples = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    let mut x = SampledSignal::new(samples, dt)?;
    x.t0 = ts[0];
    Ok(x)
}

/// Attaches ground truth parsed from `t,if_1,cr_1,...` text and, optionally,
/// component samples from `t,re_1,im_1,...` text.
pub fn attach_truth(x: &mut SampledSignal, truth: &str, components: Option<&str>) -> Result<()> {
    let (header, rows) = parse_table(truth, 3)?;
    if (header.len() - 1) % 2 != 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "truth columns must come in if/cr pairs".into(),
        });
    }
    if rows.len() != x.len() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            got: rows.len(),
        });
    }
    let k = (header.len() - 1) / 2;
    let mut out: Vec<ComponentTruth> = (0..k)
        .map(|c| ComponentTruth {
            inst_freq: rows.iter().map(|r| r[1 + 2 * c]).collect(),
            chirp_rate: rows.iter().map(|r| r[2 + 2 * c]).collect(),
            mode: None,
        })
        .collect();
    if let Some(text) = components {
        let (h2, r2) = parse_table(text, 3)?;
        if h2.len() != header.len() || r2.len() != x.len() {
            return Err(Error::ShapeMismatch {
                expected: header.len() * x.len(),
                got: h2.len() * r2.len(),
            });
        }
        for (c, t) in out.iter_mut().enumerate() {
            t.mode = Some(r2.iter().map(|r| Complex64::new(r[1 + 2 * c], r[2 + 2 * c])).collect());
        }
    }
    x.truth = Some(out);
    Ok(())
}

/// Scalar payload of a cube dump.
pub trait CubeValue: Copy {
    fn write_le<W: Write + ?Sized>(self, w: &mut W) -> std::io::Result<()>;
    fn read_le(r: &mut impl Read) -> std::io::Result<Self>;
}

impl CubeValue for f64 {
    fn write_le<W: Write + ?Sized>(self, w: &mut W) -> std::io::Result<()> {
        w.write_all(&self.to_le_bytes())
    }
    fn read_le(r: &mut impl Read) -> std::io::Result<Self> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
}

impl CubeValue for Complex64 {
    fn write_le<W: Write + ?Sized>(self, w: &mut W) -> std::io::Result<()> {
        self.re.write_le(w)?;
        self.im.write_le(w)
    }
    fn read_le(r: &mut impl Read) -> std::io::Result<Self> {
        Ok(Complex64::new(f64::read_le(r)?, f64::read_le(r)?))
    }
}

/// Writes the magic, the three dimensions (u64 LE), the three axis arrays
/// and the row-major payload.
pub fn write_cube<T: CubeValue, W: Write + ?Sized>(w: &mut W, axes: [&[f64]; 3], values: ArrayView3<T>) -> Result<()> {
    let dim = values.dim();
    let dims = [dim.0, dim.1, dim.2];
    for (a, &d) in axes.iter().zip(&dims) {
        if a.len() != d {
            return Err(Error::ShapeMismatch {
                expected: d,
                got: a.len(),
            });
        }
    }
    w.write_all(CUBE_MAGIC)?;
    for d in dims {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for a in axes {
        for &v in a {
            v.write_le(w)?;
        }
    }
    for &v in values.iter() {
        v.write_le(w)?;
    }
    Ok(())
}

pub struct CubeDump<T> {
    pub axes: [Vec<f64>; 3],
    pub values: Array3<T>,
}

pub fn read_cube<T: CubeValue>(r: &mut impl Read) -> Result<CubeDump<T>> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != CUBE_MAGIC {
        return Err(Error::Parse {
            line: 0,
            msg: "not a cube dump".into(),
        });
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        *d = u64::from_le_bytes(b) as usize;
    }
    let mut axes: [Vec<f64>; 3] = Default::default();
    for (a, &d) in axes.iter_mut().zip(&dims) {
        *a = (0..d).map(|_| f64::read_le(r)).collect::<std::io::Result<_>>()?;
    }
    let n = dims.iter().product();
    let flat = (0..n).map(|_| T::read_le(r)).collect::<std::io::Result<Vec<T>>>()?;
    let values = Array3::from_shape_vec((dims[0], dims[1], dims[2]), flat).map_err(|e| Error::Parse {
        line: 0,
        msg: e.to_string(),
    })?;
    Ok(CubeDump { axes, values })
}

/// Rows `b,lambda,abs,re,im` of the plane at scale index `i`.
pub fn scale_slice_text(grid: &AnalysisGrid, cube: &Array3<Complex64>, i: usize) -> String {
    let mut s = String::from("b,lambda,abs,re,im\n");
    for m in 0..grid.n() {
        for (l, &lam) in grid.lambdas.iter().enumerate() {
            let v = cube[[i, m, l]];
            s.push_str(&format!("{},{},{},{},{}\n", grid.time(m), lam, v.norm(), v.re, v.im));
        }
    }
    s
}

/// Same layout for a real magnitude cube such as the XWCT, at scale index `i`.
pub fn magnitude_slice_text(grid: &AnalysisGrid, cube: &Array3<f64>, i: usize) -> String {
    let mut s = String::from("b,lambda,abs,re,im\n");
    for m in 0..grid.n() {
        for (l, &lam) in grid.lambdas.iter().enumerate() {
            let v = cube[[i, m, l]];
            s.push_str(&format!("{},{},{},{},0\n", grid.time(m), lam, v.abs(), v));
        }
    }
    s
}

/// Rows `b,lambda,if,cr,mask` at scale index `i`; off-mask fields are NaN.
pub fn fields_slice_text(grid: &AnalysisGrid, fields: &ReferenceFields, i: usize) -> String {
    let mut s = String::from("b,lambda,if,cr,mask\n");
    for m in 0..grid.n() {
        for (l, &lam) in grid.lambdas.iter().enumerate() {
            let on = fields.mask[[i, m, l]];
            let (f, c) = if on {
                (fields.if_field[[i, m, l]], fields.cr_field[[i, m, l]])
            } else {
                (f64::NAN, f64::NAN)
            };
            s.push_str(&format!("{},{},{},{},{}\n", grid.time(m), lam, f, c, on as u8));
        }
    }
    s
}

/// Rows `xi,gamma,abs` of a squeezed magnitude cube at time index `m`.
pub fn time_slice_text(freqs: &[f64], gammas: &[f64], mag: &Array3<f64>, m: usize) -> String {
    let mut s = String::from("xi,gamma,abs\n");
    for (k, &f) in freqs.iter().enumerate() {
        for (p, &g) in gammas.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", f, g, mag[[k, m, p]]));
        }
    }
    s
}
