//! End-to-end analysis: σ choice, WCT, reference fields, squeezing, ridges
//! and retrieval, driven by one serializable configuration.

use std::borrow::Cow;

use ndarray::Array3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entropy::{select_sigma, EntropyCurve, DEFAULT_RANGE};
use crate::error::{Error, Result};
use crate::reassign::{wct_and_fields, FieldMode, MaskRule, ReferenceFields};
use crate::retrieve::{
    component_errors, retrieve_group, retrieve_simple, CoefficientReader, ComponentErrors, ModeEstimate,
    RetrievalMethod,
};
use crate::ridge::{extract_ridges, RidgeParams, RidgeSet};
use crate::signal::SampledSignal;
use crate::squeeze::{compose_fields, synchrosqueeze, synchrosqueeze_on, FreqBins, SqueezeSource, SqueezedCube};
use crate::wct::{AnalysisGrid, GridSpec};
use crate::xray::{compute_xwct_from, XrayParams, XwctCube};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaChoice {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum Method {
    Swct2,
    Swct3,
    Sxwct3,
    Mswct3 { iterations: usize },
}

impl Method {
    pub fn order(&self) -> u8 {
        match self {
            Method::Swct2 => 2,
            _ => 3,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Method::Swct2 => "swct2".into(),
            Method::Swct3 => "swct3".into(),
            Method::Sxwct3 => "sxwct3".into(),
            Method::Mswct3 { iterations } => format!("mswct3({iterations})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub sigma: SigmaChoice,
    pub sigma_range: (f64, f64),
    pub mu: f64,
    pub delta_a_tilde: f64,
    pub r0: f64,
    pub delta_lambda: f64,
    /// Defaults to Δλ.
    pub delta_gamma: Option<f64>,
    /// Restricts the scale lattice to frequencies in this band (Hz).
    pub band: Option<(f64, f64)>,
    /// Uniform frequency bin width for single squeezing; log bins when unset.
    /// Multiple squeezing always uses the log bins of the scale lattice.
    pub freq_step: Option<f64>,
    pub xray: XrayParams,
    pub method: Method,
    pub field_mode: FieldMode,
    pub mask: MaskRule,
    pub ridge: RidgeParams,
    pub retrieval: RetrievalMethod,
    /// Always true: the pipeline has no randomness and uses fixed reduction orders.
    pub deterministic: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            sigma: SigmaChoice::Auto,
            sigma_range: DEFAULT_RANGE,
            mu: 1.0,
            delta_a_tilde: 1.0 / 32.0,
            r0: 8.0,
            delta_lambda: 0.125,
            delta_gamma: None,
            band: None,
            freq_step: None,
            xray: XrayParams::default(),
            method: Method::Sxwct3,
            field_mode: FieldMode::Simplified,
            mask: MaskRule::default(),
            ridge: RidgeParams::default(),
            retrieval: RetrievalMethod::Group,
            deterministic: true,
        }
    }
}

impl AnalysisConfig {
    /// Settings used for the three reference examples.
    pub fn for_example(id: u32) -> Result<Self> {
        let base = AnalysisConfig {
            delta_a_tilde: 1.0 / 64.0,
            freq_step: Some(0.125),
            ..AnalysisConfig::default()
        };
        match id {
            1 => Ok(AnalysisConfig {
                sigma: SigmaChoice::Value(6.32),
                r0: 8.0,
                delta_lambda: 0.125,
                band: Some((5.0, 60.0)),
                ..base
            }),
            2 => Ok(AnalysisConfig {
                sigma: SigmaChoice::Value(4.21),
                // chirprates reach ±36 at the ends of the record
                r0: 40.0,
                delta_lambda: 0.25,
                band: Some((6.0, 96.0)),
                ..base
            }),
            3 => Ok(AnalysisConfig {
                sigma: SigmaChoice::Value(5.02),
                r0: 32.0,
                delta_lambda: 0.25,
                band: Some((16.0, 72.0)),
                ..base
            }),
            _ => Err(Error::InvalidParameter(format!("unknown example id {id}"))),
        }
    }

    pub fn delta_gamma(&self) -> f64 {
        self.delta_gamma.unwrap_or(self.delta_lambda)
    }

    /// Frequency bins for single squeezing on `grid`.
    pub fn freq_bins(&self, grid: &AnalysisGrid) -> Result<FreqBins> {
        match self.freq_step {
            None => Ok(FreqBins::log(grid)),
            Some(step) => {
                let (lo, hi) = self.band.unwrap_or((grid.freqs[0], grid.freqs[grid.n_scales() - 1]));
                FreqBins::uniform(lo, hi, step)
            }
        }
    }

    pub fn grid(&self, n: usize, dt: f64) -> Result<AnalysisGrid> {
        AnalysisGrid::new(GridSpec {
            n,
            dt,
            mu: self.mu,
            delta_a_tilde: self.delta_a_tilde,
            r0: self.r0,
            delta_lambda: self.delta_lambda,
            band: self.band,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Squeezed {
    Complex(SqueezedCube<Complex64>),
    Real(SqueezedCube<f64>),
}

impl Squeezed {
    pub fn magnitude(&self) -> Cow<'_, Array3<f64>> {
        match self {
            Squeezed::Complex(c) => Cow::Owned(c.magnitude()),
            // XWCT values are nonnegative already
            Squeezed::Real(c) => Cow::Borrowed(&c.values),
        }
    }

    pub fn freqs(&self) -> &[f64] {
        match self {
            Squeezed::Complex(c) => &c.freqs,
            Squeezed::Real(c) => &c.freqs,
        }
    }

    pub fn gammas(&self) -> &[f64] {
        match self {
            Squeezed::Complex(c) => &c.gammas,
            Squeezed::Real(c) => &c.gammas,
        }
    }
}

pub struct Analysis {
    pub grid: AnalysisGrid,
    pub sigma: f64,
    pub entropy: Option<EntropyCurve>,
    pub u0: Array3<Complex64>,
    pub fields: ReferenceFields,
    pub xwct: Option<XwctCube>,
    pub squeezed: Squeezed,
}

pub fn resolve_sigma(
    x: &SampledSignal,
    grid: &AnalysisGrid,
    cfg: &AnalysisConfig,
) -> Result<(f64, Option<EntropyCurve>)> {
    match cfg.sigma {
        SigmaChoice::Value(s) if s > 0.0 && s.is_finite() => Ok((s, None)),
        SigmaChoice::Value(s) => Err(Error::InvalidParameter(format!("sigma must be positive, got {s}"))),
        SigmaChoice::Auto => {
            let curve = select_sigma(x, grid, cfg.sigma_range)?;
            Ok((curve.argmin, Some(curve)))
        }
    }
}

pub fn analyze(x: &SampledSignal, cfg: &AnalysisConfig) -> Result<Analysis> {
    if x.is_empty() {
        return Err(Error::InvalidSignal("empty signal".into()));
    }
    let grid = cfg.grid(x.len(), x.dt)?;
    let (sigma, entropy) = resolve_sigma(x, &grid, cfg)?;
    let (u0, fields) = wct_and_fields(x, sigma, &grid, cfg.method.order(), cfg.field_mode, cfg.mask)?;
    let dg = cfg.delta_gamma();
    let bins = cfg.freq_bins(&grid)?;
    let (xwct, squeezed) = match cfg.method {
        Method::Swct2 => (
            None,
            Squeezed::Complex(synchrosqueeze_on(&u0, &fields, &grid, &bins, dg, SqueezeSource::Wct2)?),
        ),
        Method::Swct3 => (
            None,
            Squeezed::Complex(synchrosqueeze_on(&u0, &fields, &grid, &bins, dg, SqueezeSource::Wct3)?),
        ),
        Method::Sxwct3 => {
            let xw = compute_xwct_from(&u0, &grid, cfg.xray)?;
            let sq = synchrosqueeze_on(&xw.values, &fields, &grid, &bins, dg, SqueezeSource::Xwct3)?;
            (Some(xw), Squeezed::Real(sq))
        }
        Method::Mswct3 { iterations } => {
            let composed = compose_fields(&fields, &grid, iterations)?;
            let tag = SqueezeSource::Mswct { order: 3, iterations };
            (None, Squeezed::Complex(synchrosqueeze(&u0, &composed, &grid, dg, tag)?))
        }
    };
    Ok(Analysis {
        grid,
        sigma,
        entropy,
        u0,
        fields,
        xwct,
        squeezed,
    })
}

pub fn ridges_of(an: &Analysis, params: RidgeParams) -> Result<RidgeSet> {
    extract_ridges(
        &an.squeezed.magnitude(),
        an.squeezed.freqs(),
        an.squeezed.gammas(),
        an.grid.dt(),
        params,
    )
}

pub fn retrieve_modes(
    x: &SampledSignal,
    an: &Analysis,
    ridges: &RidgeSet,
    method: RetrievalMethod,
) -> Result<ModeEstimate> {
    let reader = CoefficientReader::new(x, &an.u0, &an.grid, an.sigma)?;
    Ok(match method {
        RetrievalMethod::Simple => retrieve_simple(&reader, ridges),
        RetrievalMethod::Group => retrieve_group(&reader, ridges),
    })
}

/// Outcome of a full run on a signal with ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub method: String,
    pub sigma: f64,
    pub retrieval: RetrievalMethod,
    pub components: Vec<ComponentErrors>,
    pub ridge_duplicates: bool,
    pub pinv_samples: usize,
    pub config: AnalysisConfig,
}

pub struct DemoRun {
    pub analysis: Analysis,
    pub ridges: RidgeSet,
    pub modes: ModeEstimate,
    pub report: DemoReport,
}

pub fn run_demo(x: &SampledSignal, cfg: &AnalysisConfig) -> Result<DemoRun> {
    let analysis = analyze(x, cfg)?;
    let ridges = ridges_of(&analysis, cfg.ridge)?;
    let modes = retrieve_modes(x, &analysis, &ridges, cfg.retrieval)?;
    let components = component_errors(x, &ridges, &modes)?;
    let report = DemoReport {
        method: cfg.method.label(),
        sigma: analysis.sigma,
        retrieval: cfg.retrieval,
        components,
        ridge_duplicates: ridges.duplicated,
        pinv_samples: modes.pinv_samples,
        config: cfg.clone(),
    };
    Ok(DemoRun {
        analysis,
        ridges,
        modes,
        report,
    })
}
