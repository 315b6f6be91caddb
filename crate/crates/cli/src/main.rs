mod args;
mod output;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::{Deserialize, Serialize};
use xwct_core::io::{
    attach_truth, components_to_text, fields_slice_text, magnitude_slice_text, parse_signal, scale_slice_text,
    signal_to_text, time_slice_text, truth_to_text, write_cube,
};
use xwct_core::pipeline::{analyze, retrieve_modes, ridges_of, run_demo, AnalysisConfig, DemoReport, Method, Squeezed};
use xwct_core::retrieve::component_errors;
use xwct_core::signal::{example_signal, synthesize, ComponentSpec, SampledSignal};
use xwct_core::{Error, Result};

use args::{Cli, Command, ConfigArgs, DemoArgs, GenArgs, InputArgs, RunArgs};
use output::OutDir;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Ridges(a) => cmd_run(&a, false),
        Command::Retrieve(a) => cmd_run(&a, true),
        Command::Demo(a) => cmd_demo(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}

#[derive(Deserialize)]
struct SignalSpecFile {
    n: usize,
    dt: f64,
    components: Vec<ComponentSpec>,
}

#[derive(Serialize)]
struct GenParams {
    example: Option<u32>,
    n: usize,
    dt: f64,
    components: Vec<ComponentSpec>,
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let (x, params) = match (a.example, &a.spec) {
        (Some(id), _) => {
            let x = example_signal(id)?;
            let comps = xwct_core::signal::example_components(id)?;
            let p = GenParams {
                example: Some(id),
                n: x.len(),
                dt: x.dt,
                components: comps,
            };
            (x, p)
        }
        (None, Some(path)) => {
            let text = read_text(path)?;
            let spec: SignalSpecFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                msg: e.to_string(),
            })?;
            let x = synthesize(&spec.components, spec.n, spec.dt)?;
            let p = GenParams {
                example: None,
                n: spec.n,
                dt: spec.dt,
                components: spec.components,
            };
            (x, p)
        }
        (None, None) => return Err(Error::InvalidParameter("give --example or --spec".into())),
    };
    let mut out = OutDir::create(&a.out_dir)?;
    out.write("signal.csv", signal_to_text(&x).as_bytes())?;
    out.write("truth.csv", truth_to_text(&x).as_bytes())?;
    out.write("components.csv", components_to_text(&x).as_bytes())?;
    let m = out.finish("gen", &params)?;
    println!("wrote {} samples to {}", x.len(), m.display());
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn load_input(input: &InputArgs, config: &ConfigArgs) -> Result<(SampledSignal, AnalysisConfig)> {
    let (x, base) = match (&input.input, input.example) {
        (Some(path), _) => {
            let mut x = parse_signal(&read_text(path)?)?;
            if let Some(t) = &input.truth {
                let comps = input.components.as_deref().map(read_text).transpose()?;
                attach_truth(&mut x, &read_text(t)?, comps.as_deref())?;
            }
            (x, AnalysisConfig::default())
        }
        (None, Some(id)) => (example_signal(id)?, AnalysisConfig::for_example(id)?),
        (None, None) => return Err(Error::InvalidParameter("give --input or --example".into())),
    };
    let cfg = config.apply(base)?;
    if x.is_empty() {
        return Err(Error::InvalidSignal("empty signal".into()));
    }
    Ok((x, cfg))
}

fn file_tag(s: f64) -> String {
    format!("{s}").replace('.', "p")
}

fn cmd_analyze(a: &args::AnalyzeArgs) -> Result<()> {
    let (x, cfg) = load_input(&a.input, &a.config)?;
    let start = Instant::now();
    let an = analyze(&x, &cfg)?;
    let mut out = OutDir::create(&a.out_dir)?;
    if let Some(curve) = &an.entropy {
        out.write("entropy.csv", curve.to_text().as_bytes())?;
    }
    let g = &an.grid;
    for &s in &a.slice_scale {
        if s.is_nan() || s <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "--slice-scale must be positive, got {s}"
            )));
        }
        let i = g
            .nearest_scale(1.0 / s)
            .ok_or_else(|| Error::InvalidParameter(format!("scale 1/{s} outside the lattice")))?;
        let tag = file_tag(s);
        out.write(
            &format!("wct_slice_a{tag}.csv"),
            scale_slice_text(g, &an.u0, i).as_bytes(),
        )?;
        out.write(
            &format!("fields_slice_a{tag}.csv"),
            fields_slice_text(g, &an.fields, i).as_bytes(),
        )?;
        if let Some(xw) = &an.xwct {
            out.write(
                &format!("xwct_slice_a{tag}.csv"),
                magnitude_slice_text(g, &xw.values, i).as_bytes(),
            )?;
        }
    }
    let mag = an.squeezed.magnitude();
    let mid = g.n() / 2;
    out.write(
        "squeezed_mid.csv",
        time_slice_text(an.squeezed.freqs(), an.squeezed.gammas(), &mag, mid).as_bytes(),
    )?;
    if a.dump_cubes {
        let times: Vec<f64> = (0..g.n()).map(|m| g.time(m)).collect();
        out.write_stream("wct.xwct1", |w| {
            write_cube(w, [&g.scales, &times, &g.lambdas], an.u0.view())
        })?;
        if let Some(xw) = &an.xwct {
            out.write_stream("xwct.xwct1", |w| {
                write_cube(w, [&g.scales, &times, &g.lambdas], xw.values.view())
            })?;
        }
        let axes = [an.squeezed.freqs(), &times[..], an.squeezed.gammas()];
        out.write_stream("squeezed.xwct1", |w| match &an.squeezed {
            Squeezed::Complex(c) => write_cube(w, axes, c.values.view()),
            Squeezed::Real(c) => write_cube(w, axes, c.values.view()),
        })?;
    }
    #[derive(Serialize)]
    struct Params<'a> {
        sigma_used: f64,
        grid_shape: (usize, usize, usize),
        masked_cells: usize,
        config: &'a AnalysisConfig,
    }
    let params = Params {
        sigma_used: an.sigma,
        grid_shape: g.shape(),
        masked_cells: an.fields.masked_count(),
        config: &cfg,
    };
    out.write_json("config.json", &params)?;
    let m = out.finish("analyze", &params)?;
    println!(
        "sigma {:.4}, grid {:?}, method {}; wrote {} in {:.2} s",
        an.sigma,
        g.shape(),
        cfg.method.label(),
        m.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_run(a: &RunArgs, retrieve: bool) -> Result<()> {
    let (x, cfg) = load_input(&a.input, &a.config)?;
    let start = Instant::now();
    let an = analyze(&x, &cfg)?;
    let ridges = ridges_of(&an, cfg.ridge)?;
    let mut out = OutDir::create(&a.out_dir)?;
    out.write("ridges.csv", ridges.to_text(x.dt).as_bytes())?;
    if ridges.duplicated {
        eprintln!(
            "warning: fewer than {} distinct ridges; duplicates were emitted",
            cfg.ridge.k
        );
    }
    #[derive(Serialize)]
    struct Params<'a> {
        sigma_used: f64,
        ridge_duplicates: bool,
        pinv_samples: Option<usize>,
        errors: Option<Vec<xwct_core::retrieve::ComponentErrors>>,
        config: &'a AnalysisConfig,
    }
    let mut params = Params {
        sigma_used: an.sigma,
        ridge_duplicates: ridges.duplicated,
        pinv_samples: None,
        errors: None,
        config: &cfg,
    };
    if retrieve {
        let modes = retrieve_modes(&x, &an, &ridges, cfg.retrieval)?;
        out.write("modes.csv", modes.to_text(x.dt).as_bytes())?;
        params.pinv_samples = Some(modes.pinv_samples);
        if x.truth.is_some() {
            params.errors = Some(component_errors(&x, &ridges, &modes)?);
        }
    }
    out.write_json("report.json", &params)?;
    let m = out.finish(if retrieve { "retrieve" } else { "ridges" }, &params)?;
    if let Some(errs) = &params.errors {
        print_errors(&cfg.method.label(), errs);
    }
    println!("wrote {} in {:.2} s", m.display(), start.elapsed().as_secs_f64());
    Ok(())
}

fn print_errors(label: &str, errs: &[xwct_core::retrieve::ComponentErrors]) {
    let mut line = format!("{label:<10}");
    for e in errs {
        line.push_str(&format!(" IF {:.4}", e.if_rmse));
    }
    for e in errs {
        line.push_str(&format!(" CR {:.4}", e.cr_rmse));
    }
    for e in errs {
        line.push_str(&format!(" mode {:.4}", e.mode_rmse));
    }
    println!("{line}");
}

fn demo_methods(a: &DemoArgs) -> Vec<Method> {
    match a.config.method {
        Some(m) => vec![args::method_of(m, a.config.iters.unwrap_or(5))],
        None => {
            let n = a.config.iters.unwrap_or(5);
            vec![
                Method::Swct2,
                Method::Swct3,
                Method::Mswct3 { iterations: n },
                Method::Sxwct3,
            ]
        }
    }
}

fn cmd_demo(a: &DemoArgs) -> Result<()> {
    let x = example_signal(a.example)?;
    let base = a.config.apply(AnalysisConfig::for_example(a.example)?)?;
    let mut out = OutDir::create(&a.out_dir)?;
    let mut reports: Vec<DemoReport> = Vec::new();
    let total = Instant::now();
    for method in demo_methods(a) {
        let cfg = AnalysisConfig { method, ..base.clone() };
        let start = Instant::now();
        let run = run_demo(&x, &cfg)?;
        let tag = file_stem(method);
        out.write(&format!("ridges_{tag}.csv"), run.ridges.to_text(x.dt).as_bytes())?;
        out.write(&format!("modes_{tag}.csv"), run.modes.to_text(x.dt).as_bytes())?;
        out.write_json(&format!("report_{tag}.json"), &run.report)?;
        if let Some(curve) = &run.analysis.entropy {
            out.write(&format!("entropy_{tag}.csv"), curve.to_text().as_bytes())?;
        }
        print_errors(&run.report.method, &run.report.components);
        println!("{:<10} runtime {:.2} s", "", start.elapsed().as_secs_f64());
        reports.push(run.report);
    }
    #[derive(Serialize)]
    struct Params {
        example: u32,
        reports: Vec<DemoReport>,
    }
    let params = Params {
        example: a.example,
        reports,
    };
    out.write_json("report.json", &params)?;
    let m = out.finish("demo", &params)?;
    println!("wrote {} ({:.2} s total)", m.display(), total.elapsed().as_secs_f64());
    Ok(())
}

fn file_stem(m: Method) -> String {
    match m {
        Method::Mswct3 { iterations } => format!("mswct3_{iterations}"),
        other => other.label(),
    }
}
