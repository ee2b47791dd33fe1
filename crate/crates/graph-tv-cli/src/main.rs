//! `gtv`: total-variation denoising from the command line.
//!
//! Subcommands cover 1D signals (`chain`), grayscale images (`image`),
//! scattered data over a Delaunay triangulation (`scatter`), a synthetic
//! bump-surface dataset (`simulate`), raw edge-list graphs (`solve`), and
//! an optimality check (`verify`).
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

mod csvio;
mod pgm;

use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use graph_tv::delaunay::{build_scatter_graph, Point};
use graph_tv::forest::ActiveForest;
use graph_tv::graph::{Graph, LambdaSpec};
use graph_tv::params::{
    estimate_sigma, solve_discrepancy, squeeze_chain, BaselineMode, SqueezeConfig,
};
use graph_tv::schedule::{dyadic_grid_order, natural_order, EdgeSchedule};
use graph_tv::sim::generate_scatter;
use graph_tv::solver::{self, SolveOptions, SolveResult};

#[derive(Parser)]
#[command(name = "gtv", version, about = "Exact total-variation denoising")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Denoise a 1D signal given as x,y CSV rows.
    #[command(group(ArgGroup::new("mode").required(true).args(["lambda", "squeeze", "auto"])))]
    Chain(ChainArgs),
    /// Denoise a PGM image over the 4-neighbour pixel grid.
    #[command(group(ArgGroup::new("mode").required(true).args(["lambda", "auto"])))]
    Image(ImageArgs),
    /// Denoise x1,x2,y scatter rows over their Delaunay triangulation.
    #[command(group(ArgGroup::new("mode").required(true).args(["lambda", "auto"])))]
    Scatter(ScatterArgs),
    /// Emit a synthetic bump-surface dataset as x1,x2,y CSV.
    Simulate(SimulateArgs),
    /// Solve a raw edge-list graph file.
    Solve(SolveArgs),
    /// Check the optimality certificate for a graph (and optional fit).
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ChainArgs {
    /// Input CSV path; stdin when absent or `-`.
    input: Option<PathBuf>,
    /// Uniform smoothing parameter.
    #[arg(long)]
    lambda: Option<f64>,
    /// Local squeezing: per-edge parameters lowered where residuals fail
    /// a multiresolution check.
    #[arg(long)]
    squeeze: bool,
    /// Global parameter from the discrepancy principle.
    #[arg(long)]
    auto: bool,
    /// Anchor every vertex to a zero-weight baseline vertex; `auto` uses
    /// the smallest chain parameter as the anchor strength.
    #[arg(long)]
    baseline: Option<String>,
    /// Reset each region to the mean of its observations.
    #[arg(long)]
    mean_correct: bool,
    /// Noise scale override (estimated from the data when absent).
    #[arg(long)]
    sigma: Option<f64>,
    /// Output CSV path; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the solver event log as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Append a region-id column.
    #[arg(long)]
    regions: bool,
}

#[derive(Args)]
struct ImageArgs {
    /// Input PGM (P2 or P5).
    input: PathBuf,
    /// Output PGM, same variant and maxval as the input.
    output: PathBuf,
    #[arg(long)]
    lambda: Option<f64>,
    /// Global parameter from the discrepancy principle.
    #[arg(long)]
    auto: bool,
    #[arg(long)]
    sigma: Option<f64>,
    /// Edge visit order.
    #[arg(long, value_parser = ["natural", "dyadic"], default_value = "dyadic")]
    schedule: String,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write per-pixel region ids as row,col,region CSV.
    #[arg(long)]
    regions: Option<PathBuf>,
}

#[derive(Args)]
struct ScatterArgs {
    /// Input CSV path; stdin when absent or `-`.
    input: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    auto: bool,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    regions: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of sample points.
    #[arg(short)]
    n: usize,
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.05)]
    sd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    /// Edge-list graph file.
    input: PathBuf,
    /// Override every edge parameter with a uniform value.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    regions: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Edge-list graph file.
    input: PathBuf,
    /// Fitted values to verify, one per line; the solver's own output when
    /// absent. The certificate's coefficients and active set always come
    /// from a solver run on the graph.
    #[arg(long)]
    fit: Option<PathBuf>,
}

enum AppError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Numerical(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Data(m) | AppError::Numerical(m) => m,
        }
    }
}

fn data_err<E: std::fmt::Display>(e: E) -> AppError {
    AppError::Data(e.to_string())
}

fn num_err<E: std::fmt::Display>(e: E) -> AppError {
    AppError::Numerical(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if benign { 0 } else { 1 });
        }
    };
    let result = match cli.cmd {
        Cmd::Chain(a) => run_chain(&a),
        Cmd::Image(a) => run_image(&a),
        Cmd::Scatter(a) => run_scatter(&a),
        Cmd::Simulate(a) => run_simulate(&a),
        Cmd::Solve(a) => run_solve(&a),
        Cmd::Verify(a) => run_verify(&a),
    };
    match result {
        Ok(()) => ExitCode::from(0),
        Err(e) => {
            eprintln!("gtv: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn read_text(path: Option<&Path>) -> Result<String, AppError> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| AppError::Data(format!("{}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(data_err)?;
            Ok(s)
        }
    }
}

fn write_text(path: Option<&Path>, content: &str) -> Result<(), AppError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| AppError::Data(format!("{}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Region ids per vertex, consecutive from 0 in vertex order.
fn region_labels(forest: &ActiveForest, n: usize) -> Vec<usize> {
    let mut label_of = std::collections::HashMap::new();
    (0..n)
        .map(|v| {
            let next = label_of.len();
            *label_of.entry(forest.component_id(v)).or_insert(next)
        })
        .collect()
}

/// Each region reset to the plain mean of its observations, ignoring any
/// vertices past `n` (baseline vertices carry no data).
fn data_mean_correct(y: &[f64], forest: &ActiveForest) -> Vec<f64> {
    let mut sums: std::collections::HashMap<usize, (f64, usize)> = std::collections::HashMap::new();
    for (v, &val) in y.iter().enumerate() {
        let e = sums.entry(forest.component_id(v)).or_insert((0.0, 0));
        e.0 += val;
        e.1 += 1;
    }
    (0..y.len())
        .map(|v| {
            let (s, c) = sums[&forest.component_id(v)];
            s / c as f64
        })
        .collect()
}

fn write_trace(path: &Path, r: &SolveResult) -> Result<(), AppError> {
    let mut out = String::from("iter,edge,kind,df_k,df_l,dc,q_working\n");
    for t in &r.trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t.iter,
            t.edge,
            t.kind.label(),
            t.df_k,
            t.df_l,
            t.dc,
            t.q_working
        );
    }
    write_text(Some(path), &out)
}

fn traced_options(trace: bool) -> SolveOptions {
    SolveOptions {
        trace,
        ..SolveOptions::default()
    }
}

fn parse_baseline(spec: Option<&str>, auto_value: f64) -> Result<Option<f64>, AppError> {
    match spec {
        None => Ok(None),
        Some("auto") => Ok(Some(auto_value)),
        Some(s) => s
            .parse::<f64>()
            .map(Some)
            .map_err(|_| AppError::Usage(format!("--baseline must be `auto` or a number, got `{s}`"))),
    }
}

fn sigma_for(g: &Graph, given: Option<f64>) -> Result<f64, AppError> {
    match given {
        Some(s) if s > 0.0 => Ok(s),
        Some(s) => Err(AppError::Usage(format!("--sigma must be positive, got {s}"))),
        None => Ok(estimate_sigma(g).map_err(data_err)?.sigma),
    }
}

fn run_chain(a: &ChainArgs) -> Result<(), AppError> {
    let text = read_text(a.input.as_deref())?;
    let (x, y) = csvio::read_signal(&text).map_err(data_err)?;
    let n = y.len();

    let (fit, lambdas, lambda_b): (Vec<f64>, Vec<f64>, Option<f64>) = if a.squeeze {
        let cfg = SqueezeConfig {
            sigma: a.sigma,
            ..SqueezeConfig::default()
        };
        let mode = match a.baseline.as_deref() {
            None => BaselineMode::None,
            Some("auto") => BaselineMode::Auto,
            Some(s) => BaselineMode::Fixed(s.parse::<f64>().map_err(|_| {
                AppError::Usage(format!("--baseline must be `auto` or a number, got `{s}`"))
            })?),
        };
        let r = squeeze_chain(&y, &cfg, mode, a.mean_correct).map_err(num_err)?;
        (r.fit, r.lambdas, r.lambda_b)
    } else {
        let lambda = if a.auto {
            if n < 2 {
                return Err(AppError::Data("need at least two rows".into()));
            }
            let chain = Graph::build_chain(&y, &vec![1.0; n - 1], None).map_err(data_err)?;
            let sigma = sigma_for(&chain, a.sigma)?;
            solve_discrepancy(&chain, sigma, &natural_order(&chain))
                .map_err(num_err)?
                .lambda
        } else {
            a.lambda.expect("clap group guarantees one mode")
        };
        let lambdas = vec![lambda; n.saturating_sub(1)];
        (Vec::new(), lambdas, parse_baseline(a.baseline.as_deref(), lambda)?)
    };

    // One final solve of the assembled graph yields fit, regions, and the
    // optional trace in a single deterministic pass.
    let chain = Graph::build_chain(&y, &lambdas, None).map_err(data_err)?;
    let g = match lambda_b {
        Some(lb) => chain.augment_baseline(lb).map_err(data_err)?,
        None => chain,
    };
    let r = solver::solve(&g, &natural_order(&g), &traced_options(a.trace.is_some()))
        .map_err(num_err)?;
    let final_fit = if a.mean_correct || fit.is_empty() {
        if a.mean_correct {
            data_mean_correct(&y, &r.forest)
        } else {
            r.fit[..n].to_vec()
        }
    } else {
        fit
    };
    if let Some(p) = &a.trace {
        write_trace(p, &r)?;
    }
    let regions = region_labels(&r.forest, n);
    let mut out = String::from(if a.regions { "x,y,fit,region\n" } else { "x,y,fit\n" });
    for i in 0..n {
        if a.regions {
            let _ = writeln!(out, "{},{},{},{}", x[i], y[i], final_fit[i], regions[i]);
        } else {
            let _ = writeln!(out, "{},{},{}", x[i], y[i], final_fit[i]);
        }
    }
    write_text(a.output.as_deref(), &out)
}

fn run_image(a: &ImageArgs) -> Result<(), AppError> {
    let bytes = std::fs::read(&a.input)
        .map_err(|e| AppError::Data(format!("{}: {e}", a.input.display())))?;
    let mut buf = pgm::read_pgm(&bytes).map_err(data_err)?;
    let shape = buf.shape;
    let g = Graph::build_grid4(shape, &buf.pixels, LambdaSpec::Global(1.0)).map_err(data_err)?;
    let schedule: EdgeSchedule = if a.schedule == "dyadic" {
        dyadic_grid_order(&g, shape)
    } else {
        natural_order(&g)
    };
    let (fit, forest_result): (Vec<f64>, SolveResult) = if a.auto {
        let sigma = sigma_for(&g, a.sigma)?;
        let d = solve_discrepancy(&g, sigma, &schedule).map_err(num_err)?;
        // Re-solve at the chosen parameter for the forest and trace.
        let gl = g.with_uniform_lambda(d.lambda).map_err(data_err)?;
        let r = solver::solve(&gl, &schedule, &traced_options(a.trace.is_some()))
            .map_err(num_err)?;
        (d.fit, r)
    } else {
        let lambda = a.lambda.expect("clap group guarantees one mode");
        let gl = g.with_uniform_lambda(lambda).map_err(data_err)?;
        let r = solver::solve(&gl, &schedule, &traced_options(a.trace.is_some()))
            .map_err(num_err)?;
        (r.fit.clone(), r)
    };
    if let Some(p) = &a.trace {
        write_trace(p, &forest_result)?;
    }
    if let Some(p) = &a.regions {
        let labels = region_labels(&forest_result.forest, shape.n1 * shape.n2);
        let mut out = String::from("row,col,region\n");
        for row in 0..shape.n1 {
            for col in 0..shape.n2 {
                let _ = writeln!(out, "{row},{col},{}", labels[row * shape.n2 + col]);
            }
        }
        write_text(Some(p), &out)?;
    }
    buf.pixels = fit.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    std::fs::write(&a.output, pgm::write_pgm(&buf))
        .map_err(|e| AppError::Data(format!("{}: {e}", a.output.display())))
}

fn run_scatter(a: &ScatterArgs) -> Result<(), AppError> {
    let text = read_text(a.input.as_deref())?;
    let rows = csvio::read_scatter(&text).map_err(data_err)?;
    let points: Vec<Point> = rows.iter().map(|r| Point { x: r.0, y: r.1 }).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let (g, merged) = build_scatter_graph(&points, &values, 1.0).map_err(data_err)?;
    let schedule = natural_order(&g);
    let (fit, forest) = if a.auto {
        let sigma = sigma_for(&g, a.sigma)?;
        let d = solve_discrepancy(&g, sigma, &schedule).map_err(num_err)?;
        let gl = g.with_uniform_lambda(d.lambda).map_err(data_err)?;
        let r = solver::solve(&gl, &schedule, &SolveOptions::default()).map_err(num_err)?;
        (d.fit, r.forest)
    } else {
        let lambda = a.lambda.expect("clap group guarantees one mode");
        let gl = g.with_uniform_lambda(lambda).map_err(data_err)?;
        let r = solver::solve(&gl, &schedule, &SolveOptions::default()).map_err(num_err)?;
        (r.fit, r.forest)
    };
    let labels = region_labels(&forest, g.n());
    let mut out = String::from(if a.regions {
        "x1,x2,y,fit,region\n"
    } else {
        "x1,x2,y,fit\n"
    });
    // One output row per input row; merged duplicates share a fit.
    for (i, r) in rows.iter().enumerate() {
        let m = merged.index_map[i];
        if a.regions {
            let _ = writeln!(out, "{},{},{},{},{}", r.0, r.1, r.2, fit[m], labels[m]);
        } else {
            let _ = writeln!(out, "{},{},{},{}", r.0, r.1, r.2, fit[m]);
        }
    }
    write_text(a.output.as_deref(), &out)
}

fn run_simulate(a: &SimulateArgs) -> Result<(), AppError> {
    if a.n < 3 {
        return Err(AppError::Usage(format!("-n must be at least 3, got {}", a.n)));
    }
    let s = generate_scatter(a.n, a.sd, a.seed);
    let mut out = String::from("x1,x2,y\n");
    for i in 0..a.n {
        let _ = writeln!(out, "{},{},{}", s.points[i].x, s.points[i].y, s.values[i]);
    }
    write_text(None, &out)
}

fn load_graph(path: &Path, lambda: Option<f64>) -> Result<Graph, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let g = Graph::from_edge_list(&text).map_err(data_err)?;
    match lambda {
        Some(l) => g.with_uniform_lambda(l).map_err(data_err),
        None => Ok(g),
    }
}

fn run_solve(a: &SolveArgs) -> Result<(), AppError> {
    let g = load_graph(&a.input, a.lambda)?;
    let r = solver::solve(&g, &natural_order(&g), &traced_options(a.trace.is_some()))
        .map_err(num_err)?;
    if let Some(p) = &a.trace {
        write_trace(p, &r)?;
    }
    let labels = region_labels(&r.forest, g.n());
    let mut out = String::from(if a.regions { "vertex,fit,region\n" } else { "vertex,fit\n" });
    for v in 0..g.n() {
        if a.regions {
            let _ = writeln!(out, "{v},{},{}", r.fit[v], labels[v]);
        } else {
            let _ = writeln!(out, "{v},{}", r.fit[v]);
        }
    }
    write_text(a.output.as_deref(), &out)
}

fn run_verify(a: &VerifyArgs) -> Result<(), AppError> {
    let g = load_graph(&a.input, None)?;
    let r = solver::solve(&g, &natural_order(&g), &SolveOptions::default()).map_err(num_err)?;
    let f: Vec<f64> = match &a.fit {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| AppError::Data(format!("{}: {e}", p.display())))?;
            let vals: Result<Vec<f64>, _> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::parse::<f64>)
                .collect();
            vals.map_err(|e| AppError::Data(format!("{}: {e}", p.display())))?
        }
        None => r.fit.clone(),
    };
    if f.len() != g.n() {
        return Err(AppError::Data(format!(
            "fit has {} values, graph has {} vertices",
            f.len(),
            g.n()
        )));
    }
    let report =
        graph_tv::oracle::check_certificate(&g, &f, &r.c, &r.active_edges, 1e-8).map_err(num_err)?;
    println!("acyclic: {}", report.acyclic);
    println!(
        "gradient sign:        residual {:.3e}  pass {}",
        report.gradient_sign.max_residual, report.gradient_sign.pass
    );
    println!(
        "saturation:           residual {:.3e}  pass {}",
        report.saturation.max_residual, report.saturation.pass
    );
    println!(
        "bounded coefficients: residual {:.3e}  pass {}",
        report.bounded.max_residual, report.bounded.pass
    );
    println!(
        "region stationarity:  residual {:.3e}  pass {}",
        report.region_stationarity.max_residual, report.region_stationarity.pass
    );
    println!(
        "active window strict: residual {:.3e}  pass {}",
        report.active_strict.max_residual, report.active_strict.pass
    );
    println!(
        "active window relaxed: residual {:.3e}  pass {}",
        report.active_relaxed.max_residual, report.active_relaxed.pass
    );
    println!("strict form: {}", report.strict_pass);
    println!("relaxed form: {}", report.relaxed_pass);
    println!("certificate: {}", if report.pass { "PASS" } else { "FAIL" });
    if report.pass {
        Ok(())
    } else {
        Err(AppError::Numerical("certificate failed".into()))
    }
}
