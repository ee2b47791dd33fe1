//! Automatic smoothing parameters.
//!
//! Three mechanisms: a difference-based noise estimate, a global parameter
//! chosen by the discrepancy principle (residual sum of squares equals
//! `sigma^2 n`), and a local squeezing loop for chains that lowers the
//! parameter only where a multiresolution residual condition fails.

use crate::error::ParamError;
use crate::graph::Graph;
use crate::schedule::{natural_order, EdgeSchedule};
use crate::solver::{self, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseEstimate {
    pub sigma: f64,
}

/// Noise scale from neighbour differences:
/// `sigma = (1.48 / sqrt 2) * median |y_j - y_i|` over all edges. The
/// median of an even count is the midpoint of the two central values.
pub fn estimate_sigma(g: &Graph) -> Result<NoiseEstimate, ParamError> {
    if g.num_edges() == 0 {
        return Err(ParamError::NoEdges);
    }
    let mut diffs: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| (g.data()[e.head] - g.data()[e.tail]).abs())
        .collect();
    diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = diffs.len() / 2;
    let median = if diffs.len() % 2 == 1 {
        diffs[mid]
    } else {
        0.5 * (diffs[mid - 1] + diffs[mid])
    };
    Ok(NoiseEstimate {
        sigma: 1.48 / 2.0f64.sqrt() * median,
    })
}

#[derive(Clone, Debug)]
pub struct DiscrepancyResult {
    pub lambda: f64,
    pub fit: Vec<f64>,
    pub residual: f64,
    pub target: f64,
    pub solves: usize,
}

fn residual_sum(g: &Graph, f: &[f64]) -> f64 {
    (0..g.n()).map(|i| (f[i] - g.data()[i]).powi(2)).sum()
}

/// Residual of the smoothest attainable fit: each connected component at
/// its weighted mean.
fn constant_fit_residual(g: &Graph) -> f64 {
    let n = g.n();
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(comp: &mut [usize], mut v: usize) -> usize {
        while comp[v] != v {
            comp[v] = comp[comp[v]];
            v = comp[v];
        }
        v
    }
    for e in g.edges() {
        let (a, b) = (find(&mut comp, e.tail), find(&mut comp, e.head));
        if a != b {
            comp[a] = b;
        }
    }
    let mut acc: std::collections::HashMap<usize, (f64, f64, f64, usize)> =
        std::collections::HashMap::new();
    for v in 0..n {
        let e = acc.entry(find(&mut comp, v)).or_insert((0.0, 0.0, 0.0, 0));
        e.0 += g.weights()[v] * g.data()[v];
        e.1 += g.weights()[v];
        e.2 += g.data()[v];
        e.3 += 1;
    }
    let mut resid = 0.0;
    for v in 0..n {
        let (wy, w, y, cnt) = acc[&find(&mut comp, v)];
        let mean = if w > 0.0 { wy / w } else { y / cnt as f64 };
        resid += (mean - g.data()[v]).powi(2);
    }
    resid
}

/// Global smoothing parameter by the discrepancy principle: increase the
/// parameter until the residual sum of squares reaches `sigma^2 n`.
/// Bracketing doubles (or halves) from `sigma`, then bisects; at most 60
/// solves.
pub fn solve_discrepancy(
    g: &Graph,
    sigma: f64,
    schedule: &EdgeSchedule,
) -> Result<DiscrepancyResult, ParamError> {
    if !(sigma > 0.0) {
        return Err(ParamError::NonPositiveSigma(sigma));
    }
    let target = sigma * sigma * g.n() as f64;
    let max = constant_fit_residual(g);
    if target > max * (1.0 + 1e-12) + 1e-300 {
        return Err(ParamError::TargetUnreachable { target, max });
    }
    let opts = SolveOptions {
        check_certificate: false,
        ..SolveOptions::default()
    };
    let solves = std::cell::Cell::new(0usize);
    let eval = |lambda: f64| -> Result<(f64, Vec<f64>), ParamError> {
        let gl = g.with_uniform_lambda(lambda)?;
        let r = solver::solve(&gl, schedule, &opts)?;
        solves.set(solves.get() + 1);
        Ok((residual_sum(g, &r.fit), r.fit))
    };

    let tol = 1e-3 * target;
    let mut lambda = sigma;
    let (mut resid, mut fit) = eval(lambda)?;
    let (mut lo, mut hi);
    if resid >= target {
        hi = lambda;
        loop {
            if (resid - target).abs() <= tol {
                return Ok(DiscrepancyResult {
                    lambda,
                    fit,
                    residual: resid,
                    target,
                    solves: solves.get(),
                });
            }
            lambda *= 0.5;
            let (r, f) = eval(lambda)?;
            if r < target {
                resid = r;
                fit = f;
                break;
            }
            hi = lambda;
            resid = r;
            fit = f;
            if solves.get() >= 60 {
                break;
            }
        }
        lo = lambda;
    } else {
        lo = lambda;
        loop {
            lambda *= 2.0;
            let (r, f) = eval(lambda)?;
            resid = r;
            fit = f;
            if r >= target || solves.get() >= 60 {
                break;
            }
            lo = lambda;
        }
        hi = lambda;
    }
    let mut best = (lambda, resid, fit);
    while (best.1 - target).abs() > tol && solves.get() < 60 {
        let mid = 0.5 * (lo + hi);
        let (r, f) = eval(mid)?;
        if (r - target).abs() < (best.1 - target).abs() {
            best = (mid, r, f);
        }
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DiscrepancyResult {
        lambda: best.0,
        residual: best.1,
        fit: best.2,
        target,
        solves: solves.get(),
    })
}

/// All dyadic residual windows over `0..n`, as half-open index ranges.
/// Window lengths are powers of two; a shorter tail window is kept so the
/// end of the data is always covered.
pub fn dyadic_intervals(n: usize) -> Vec<(usize, usize)> {
    // Every offset of every power-of-two length. Length-aligned intervals
    // alone cannot see a jump that sits exactly on an alignment boundary,
    // which stalls the squeezing loop on such signals.
    let mut out = Vec::new();
    let mut len = 1usize;
    while len <= n.max(1) {
        for start in 0..=n.saturating_sub(len) {
            out.push((start, start + len));
        }
        len *= 2;
    }
    if n > 0 {
        out.push((0, n));
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Indices of intervals whose summed residual exceeds
/// `sigma * multiplier * sqrt(|I| ln n)`.
pub fn multiresolution_check(
    residuals: &[f64],
    sigma: f64,
    multiplier: f64,
    intervals: &[(usize, usize)],
) -> Vec<usize> {
    let n = residuals.len().max(2) as f64;
    let mut out = Vec::new();
    for (idx, &(a, b)) in intervals.iter().enumerate() {
        let sum: f64 = residuals[a..b].iter().sum();
        let len = (b - a) as f64;
        if sum.abs() > sigma * multiplier * (len * n.ln()).sqrt() {
            out.push(idx);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SqueezeConfig {
    pub threshold_multiplier: f64,
    /// Multiplied into the parameter of every edge inside a violating
    /// window, once per round.
    pub reduction_factor: f64,
    pub max_rounds: usize,
    /// Starting parameter for every edge; `2 sigma sqrt n` when absent.
    pub initial_lambda: Option<f64>,
    /// Noise scale override; estimated from the data when absent.
    pub sigma: Option<f64>,
}

impl Default for SqueezeConfig {
    fn default() -> Self {
        SqueezeConfig {
            threshold_multiplier: 2.5,
            reduction_factor: 0.5,
            max_rounds: 40,
            initial_lambda: None,
            sigma: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SqueezeResult {
    pub lambdas: Vec<f64>,
    pub fit: Vec<f64>,
    pub sigma: f64,
    pub rounds: usize,
    /// False when `max_rounds` was exhausted with violations remaining.
    pub converged: bool,
}

/// Iteratively reduce chain smoothing parameters inside windows where the
/// residuals fail the multiresolution condition.
pub fn local_squeezing(y: &[f64], cfg: &SqueezeConfig) -> Result<SqueezeResult, ParamError> {
    let n = y.len();
    if n < 2 {
        return Err(ParamError::NoEdges);
    }
    let probe = Graph::build_chain(y, &vec![1.0; n - 1], None)?;
    let sigma = match cfg.sigma {
        Some(s) => s,
        None => estimate_sigma(&probe)?.sigma,
    };
    let init = cfg
        .initial_lambda
        .unwrap_or(2.0 * sigma * (n as f64).sqrt())
        .max(1e-12);
    let mut lambdas = vec![init; n - 1];
    let intervals = dyadic_intervals(n);
    let opts = SolveOptions {
        check_certificate: false,
        ..SolveOptions::default()
    };
    let mut fit = Vec::new();
    let mut rounds = 0usize;
    let mut converged = false;
    while rounds <= cfg.max_rounds {
        let g = Graph::build_chain(y, &lambdas, None)?;
        fit = solver::solve(&g, &natural_order(&g), &opts)?.fit;
        let residuals: Vec<f64> = (0..n).map(|i| y[i] - fit[i]).collect();
        let violating =
            multiresolution_check(&residuals, sigma, cfg.threshold_multiplier, &intervals);
        if violating.is_empty() {
            converged = true;
            break;
        }
        if rounds == cfg.max_rounds {
            break;
        }
        // Reduce every edge incident to a violating window; a window of a
        // single vertex still reaches the two parameters coupling it.
        let mut reduce = vec![false; n - 1];
        for &idx in &violating {
            let (a, b) = intervals[idx];
            for flag in reduce.iter_mut().take(b.min(n - 1)).skip(a.saturating_sub(1)) {
                *flag = true;
            }
        }
        for (lam, &r) in lambdas.iter_mut().zip(&reduce) {
            if r {
                *lam *= cfg.reduction_factor;
            }
        }
        rounds += 1;
    }
    Ok(SqueezeResult {
        lambdas,
        fit,
        sigma,
        rounds,
        converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaselineMode {
    None,
    /// Dummy-vertex parameter set to the smallest squeezed chain parameter.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug)]
pub struct ChainFit {
    pub fit: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub lambda_b: Option<f64>,
    pub sigma: f64,
    pub rounds: usize,
    pub converged: bool,
    /// Region label per vertex, consecutive from 0 in vertex order.
    pub regions: Vec<usize>,
}

/// The full squeezing pipeline: squeeze the chain, optionally anchor every
/// vertex to a weightless dummy baseline, re-solve, and optionally reset
/// each region to the mean of its observations.
pub fn squeeze_chain(
    y: &[f64],
    cfg: &SqueezeConfig,
    baseline: BaselineMode,
    mean_correct: bool,
) -> Result<ChainFit, ParamError> {
    let n = y.len();
    let squeezed = local_squeezing(y, cfg)?;
    let chain = Graph::build_chain(y, &squeezed.lambdas, None)?;
    let lambda_b = match baseline {
        BaselineMode::None => None,
        BaselineMode::Auto => Some(
            squeezed
                .lambdas
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
        ),
        BaselineMode::Fixed(v) => Some(v),
    };
    let g = match lambda_b {
        Some(lb) => chain.augment_baseline(lb)?,
        None => chain,
    };
    let r = solver::solve(&g, &natural_order(&g), &SolveOptions::default())?;
    let mut fit = r.fit[..n].to_vec();
    if mean_correct {
        // Correction restricted to the data vertices; the dummy vertex may
        // sit in a region of its own, which carries no observations.
        let mut sums: std::collections::HashMap<usize, (f64, usize)> =
            std::collections::HashMap::new();
        for v in 0..n {
            let entry = sums.entry(r.forest.component_id(v)).or_insert((0.0, 0));
            entry.0 += y[v];
            entry.1 += 1;
        }
        for v in 0..n {
            let (sum, count) = sums[&r.forest.component_id(v)];
            fit[v] = sum / count as f64;
        }
    }
    let mut regions = Vec::with_capacity(n);
    let mut label_of: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for v in 0..n {
        let next = label_of.len();
        let id = *label_of.entry(r.forest.component_id(v)).or_insert(next);
        regions.push(id);
    }
    Ok(ChainFit {
        fit,
        lambdas: squeezed.lambdas,
        lambda_b,
        sigma: squeezed.sigma,
        rounds: squeezed.rounds,
        converged: squeezed.converged,
        regions,
    })
}
