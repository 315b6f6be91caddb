use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xwct_core::pipeline::{AnalysisConfig, Method, SigmaChoice};
use xwct_core::retrieve::RetrievalMethod;
use xwct_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "xwct",
    version,
    about = "Wavelet-chirplet analysis, synchrosqueezing and mode retrieval"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a reference or user-specified signal with its ground truth.
    Gen(GenArgs),
    /// Compute the transforms and write slices, fields and optional cube dumps.
    Analyze(AnalyzeArgs),
    /// Extract ridges from the squeezed transform.
    Ridges(RunArgs),
    /// Extract ridges and retrieve the modes.
    Retrieve(RunArgs),
    /// Run a reference example end to end and report RMSEs.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Reference example 1, 2 or 3.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub example: Option<u32>,
    /// JSON file with `n`, `dt` and a `components` list.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Signal file with rows `t,re,im`.
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    pub input: Option<PathBuf>,
    /// Ground truth rows `t,if_1,cr_1,...` for error reports.
    #[arg(long, requires = "input")]
    pub truth: Option<PathBuf>,
    /// Component samples `t,re_1,im_1,...` for mode errors.
    #[arg(long, requires = "truth")]
    pub components: Option<PathBuf>,
    /// Use reference example 1, 2 or 3 (signal, truth and preset parameters).
    #[arg(long)]
    pub example: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Swct2,
    Swct3,
    Sxwct3,
    Mswct3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RetrievalArg {
    Simple,
    Group,
}

#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// Window width: `auto` for the entropy search, or a positive value.
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Log2 scale step Δã.
    #[arg(long)]
    pub da: Option<f64>,
    /// Chirprate half-range R0 (Hz/s).
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub dlam: Option<f64>,
    /// Chirprate bin width of the squeezed transform (defaults to Δλ).
    #[arg(long)]
    pub dgam: Option<f64>,
    /// Frequency band `lo,hi` (Hz) of the scale lattice.
    #[arg(long, value_parser = parse_band)]
    pub band: Option<(f64, f64)>,
    /// Frequency bins for single squeezing: `log` or a uniform step in Hz.
    #[arg(long)]
    pub dxi: Option<String>,
    #[arg(long)]
    pub xray_gamma: Option<f64>,
    #[arg(long)]
    pub xray_v: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Iterations of multiple squeezing.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Number of components.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub jump_f: Option<usize>,
    #[arg(long)]
    pub jump_c: Option<usize>,
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long, value_enum)]
    pub retrieval: Option<RetrievalArg>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Also export the planes at a = 1/s for each given s.
    #[arg(long, value_delimiter = ',')]
    pub slice_scale: Vec<f64>,
    /// Write full binary cube dumps (large).
    #[arg(long)]
    pub dump_cubes: bool,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub example: u32,
    /// Every method runs when `--method` is omitted.
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

fn parse_band(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

impl ConfigArgs {
    /// Applies every given flag on top of `cfg`.
    pub fn apply(&self, mut cfg: AnalysisConfig) -> Result<AnalysisConfig> {
        if let Some(s) = &self.sigma {
            cfg.sigma = if s.eq_ignore_ascii_case("auto") {
                SigmaChoice::Auto
            } else {
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("--sigma expects `auto` or a number, got {s:?}")))?;
                SigmaChoice::Value(v)
            };
        }
        macro_rules! set {
            ($field:expr, $src:expr) => {
                if let Some(v) = $src {
                    $field = v;
                }
            };
        }
        set!(cfg.mu, self.mu);
        set!(cfg.delta_a_tilde, self.da);
        set!(cfg.r0, self.r0);
        set!(cfg.delta_lambda, self.dlam);
        set!(cfg.xray.gamma, self.xray_gamma);
        set!(cfg.xray.v_halfwidth, self.xray_v);
        set!(cfg.ridge.k, self.k);
        set!(cfg.ridge.jump_f, self.jump_f);
        set!(cfg.ridge.jump_c, self.jump_c);
        set!(cfg.ridge.penalty, self.penalty);
        if self.dgam.is_some() {
            cfg.delta_gamma = self.dgam;
        }
        if self.band.is_some() {
            cfg.band = self.band;
        }
        if let Some(d) = &self.dxi {
            cfg.freq_step = if d.eq_ignore_ascii_case("log") {
                None
            } else {
                Some(
                    d.parse()
                        .map_err(|_| Error::InvalidParameter(format!("--dxi expects `log` or a step, got {d:?}")))?,
                )
            };
        }
        if let Some(m) = self.method {
            cfg.method = method_of(m, self.iters.unwrap_or(5));
        } else if let (Method::Mswct3 { .. }, Some(n)) = (cfg.method, self.iters) {
            cfg.method = Method::Mswct3 { iterations: n };
        }
        if let Some(r) = self.retrieval {
            cfg.retrieval = match r {
                RetrievalArg::Simple => RetrievalMethod::Simple,
                RetrievalArg::Group => RetrievalMethod::Group,
            };
        }
        Ok(cfg)
    }
}

pub fn method_of(m: MethodArg, iters: usize) -> Method {
    match m {
        MethodArg::Swct2 => Method::Swct2,
        MethodArg::Swct3 => Method::Swct3,
        MethodArg::Sxwct3 => Method::Sxwct3,
        MethodArg::Mswct3 => Method::Mswct3 { iterations: iters },
    }
}
