//! Browser bindings: three small entry points the demo page calls.
//!
//! Build with `wasm-pack build --target web` (or
//! `cargo build --target wasm32-unknown-unknown` plus `wasm-bindgen`);
//! the crate also compiles natively so its tests run on the host.

use graph_tv::delaunay::{build_scatter_graph, Point};
use graph_tv::graph::Graph;
use graph_tv::params::{squeeze_chain, BaselineMode, SqueezeConfig};
use graph_tv::schedule::natural_order;
use graph_tv::solver::{self, SolveOptions};
use wasm_bindgen::prelude::*;

fn solve_graph(g: &Graph) -> Result<Vec<f64>, JsError> {
    let r = solver::solve(g, &natural_order(g), &SolveOptions::default())
        .map_err(|e| JsError::new(&e.to_string()))?;
    Ok(r.fit)
}

/// Exact 1D total-variation denoising at a uniform smoothing parameter.
#[wasm_bindgen]
pub fn denoise_signal(y: Vec<f64>, lambda: f64) -> Result<Vec<f64>, JsError> {
    let n = y.len();
    if n < 2 {
        return Err(JsError::new("need at least two samples"));
    }
    let g = Graph::build_chain(&y, &vec![lambda; n - 1], None)
        .map_err(|e| JsError::new(&e.to_string()))?;
    solve_graph(&g)
}

/// Automatic local smoothing: the parameter is lowered wherever residuals
/// fail a multiresolution check, so jumps survive while flats flatten.
#[wasm_bindgen]
pub fn denoise_signal_auto(y: Vec<f64>) -> Result<Vec<f64>, JsError> {
    if y.len() < 4 {
        return Err(JsError::new("need at least four samples"));
    }
    let r = squeeze_chain(&y, &SqueezeConfig::default(), BaselineMode::None, false)
        .map_err(|e| JsError::new(&e.to_string()))?;
    Ok(r.fit)
}

/// Scatter denoising over the Delaunay triangulation of the points.
/// Returns `[fit..., edge tails..., edge heads...]` flattened: the first
/// `n` entries are fitted values per input point, the rest describe the
/// triangulation edges for drawing (pairs of point indices).
#[wasm_bindgen]
pub fn denoise_scatter(
    xs: Vec<f64>,
    ys: Vec<f64>,
    values: Vec<f64>,
    lambda: f64,
) -> Result<Vec<f64>, JsError> {
    let n = xs.len();
    if n < 3 || ys.len() != n || values.len() != n {
        return Err(JsError::new("need three equal-length coordinate arrays"));
    }
    let pts: Vec<Point> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| Point { x, y })
        .collect();
    let (g, merged) =
        build_scatter_graph(&pts, &values, lambda).map_err(|e| JsError::new(&e.to_string()))?;
    let fit = solve_graph(&g)?;
    let mut out: Vec<f64> = (0..n).map(|i| fit[merged.index_map[i]]).collect();
    // Edge endpoints reported in original-point indices: coincident input
    // points were merged, so map each merged vertex back to its first
    // original occurrence.
    let mut first_original = vec![usize::MAX; g.n()];
    for (orig, &m) in merged.index_map.iter().enumerate() {
        if first_original[m] == usize::MAX {
            first_original[m] = orig;
        }
    }
    for e in g.edges() {
        out.push(first_original[e.tail] as f64);
    }
    for e in g.edges() {
        out.push(first_original[e.head] as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_two_vertices_closed_form() {
        let f = denoise_signal(vec![0.0, 1.0], 0.2).unwrap();
        assert!((f[0] - 0.2).abs() < 1e-12 && (f[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn auto_flattens_noise_keeps_jump() {
        let mut y = vec![0.0; 40];
        for (i, v) in y.iter_mut().enumerate() {
            *v = if i >= 20 { 3.0 } else { 0.0 } + 0.05 * ((i * 37 % 11) as f64 - 5.0) / 5.0;
        }
        let f = denoise_signal_auto(y).unwrap();
        assert!(f[25] - f[15] > 2.0, "jump preserved");
    }

    #[test]
    fn scatter_output_layout() {
        let xs = vec![0.0, 1.0, 0.0, 1.0];
        let ys = vec![0.0, 0.0, 1.0, 1.0];
        let v = vec![0.0, 0.1, 0.05, 1.0];
        let out = denoise_scatter(xs, ys, v, 0.01).unwrap();
        assert!(out.len() > 4 && (out.len() - 4) % 2 == 0);
        let m = (out.len() - 4) / 2;
        for i in 0..m {
            assert!(out[4 + i] < 4.0 && out[4 + m + i] < 4.0);
        }
    }
}
