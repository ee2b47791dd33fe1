//! Delaunay triangulation for scattered observations.
//!
//! Incremental insertion with a covering super-triangle. Co-circular point
//! sets (regular grids, for instance) leave the triangulation ambiguous, so
//! a final flip pass canonicalizes every tied quad to the diagonal with the
//! lexicographically smallest vertex pair, making the output deterministic
//! and independent of insertion order.

use crate::error::{DelaunayError, GraphError};
use crate::graph::Graph;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Result of merging near-duplicate scatter points.
#[derive(Clone, Debug)]
pub struct MergedScatter {
    pub points: Vec<Point>,
    /// Mean observation per merged point.
    pub values: Vec<f64>,
    /// Accumulated weight per merged point (one per original point).
    pub weights: Vec<f64>,
    /// Original index to merged index.
    pub index_map: Vec<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScatterError {
    #[error(transparent)]
    Delaunay(#[from] DelaunayError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{points} points but {values} observations")]
    LengthMismatch { points: usize, values: usize },
}

fn orient2d(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Positive when `d` lies strictly inside the circumcircle of the
/// counterclockwise triangle `(a, b, c)`.
fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let (ax, ay) = (a.x - d.x, a.y - d.y);
    let (bx, by) = (b.x - d.x, b.y - d.y);
    let (cx, cy) = (c.x - d.x, c.y - d.y);
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx)
}

/// Merge points closer than `tol`, averaging their observations and summing
/// unit weights.
pub fn merge_close_points(pts: &[Point], values: &[f64], tol: f64) -> MergedScatter {
    let mut points: Vec<Point> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut index_map = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let found = points
            .iter()
            .position(|q| (q.x - p.x).hypot(q.y - p.y) <= tol);
        match found {
            Some(j) => {
                sums[j] += values[i];
                counts[j] += 1;
                index_map.push(j);
            }
            None => {
                index_map.push(points.len());
                points.push(*p);
                sums.push(values[i]);
                counts.push(1);
            }
        }
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let weights = counts.iter().map(|&c| c as f64).collect();
    MergedScatter {
        points,
        values,
        weights,
        index_map,
    }
}

/// Triangulate distinct points; returns triangles as index triples.
pub fn triangulate(pts: &[Point]) -> Result<Vec<[usize; 3]>, DelaunayError> {
    let n = pts.len();
    for (i, p) in pts.iter().enumerate() {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(DelaunayError::NonFinitePoint { index: i });
        }
    }
    if n < 3 {
        return Err(DelaunayError::TooFewPoints(n));
    }
    let scale = pts
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(1.0f64, f64::max);
    if pts
        .iter()
        .all(|&p| orient2d(pts[0], pts[1], p).abs() <= 1e-12 * scale * scale)
    {
        return Err(DelaunayError::AllCollinear);
    }

    // Super-triangle far outside the data; its vertices use ids n, n+1, n+2.
    let (min_x, max_x) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.x), hi.max(p.x))
        });
    let (min_y, max_y) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.y), hi.max(p.y))
        });
    let span = (max_x - min_x).max(max_y - min_y).max(1.0);
    let (cx, cy) = (0.5 * (min_x + max_x), 0.5 * (min_y + max_y));
    let big = 64.0 * span;
    let all = |i: usize| -> Point {
        match i.checked_sub(n) {
            None => pts[i],
            Some(0) => Point::new(cx - 2.0 * big, cy - big),
            Some(1) => Point::new(cx + 2.0 * big, cy - big),
            _ => Point::new(cx, cy + 2.0 * big),
        }
    };

    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for p in 0..n {
        let pt = pts[p];
        let mut bad = Vec::new();
        for (ti, t) in tris.iter().enumerate() {
            let (a, b, c) = (all(t[0]), all(t[1]), all(t[2]));
            let det = if orient2d(a, b, c) > 0.0 {
                incircle(a, b, c, pt)
            } else {
                incircle(a, c, b, pt)
            };
            if det > 0.0 {
                bad.push(ti);
            }
        }
        // Boundary of the cavity: edges of bad triangles used exactly once.
        let mut edge_count: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        for &ti in &bad {
            let t = tris[ti];
            for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (u.min(v), u.max(v));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        for &ti in bad.iter().rev() {
            tris.swap_remove(ti);
        }
        for (&(u, v), &count) in &edge_count {
            if count != 1 {
                continue;
            }
            let (a, b) = (all(u), all(v));
            let tri = if orient2d(a, b, pt) > 0.0 {
                [u, v, p]
            } else {
                [v, u, p]
            };
            tris.push(tri);
        }
        // Sorting keeps iteration order independent of hash-map order.
        tris.sort_unstable();
    }

    tris.retain(|t| t.iter().all(|&v| v < n));
    canonical_flips(pts, &mut tris);
    tris.sort_unstable();
    Ok(tris)
}

/// Resolve exactly co-circular quads to the diagonal whose endpoint
/// coordinates are lexicographically smallest; comparing coordinates rather
/// than indices keeps the choice independent of the input order.
fn canonical_flips(pts: &[Point], tris: &mut Vec<[usize; 3]>) {
    let scale = pts
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(1.0f64, f64::max);
    let tie_tol = 1e-10 * scale.powi(4);
    let diag_key = |a: usize, b: usize| -> [(f64, f64); 2] {
        let (pa, pb) = ((pts[a].x, pts[a].y), (pts[b].x, pts[b].y));
        if pa <= pb {
            [pa, pb]
        } else {
            [pb, pa]
        }
    };
    for _ in 0..4 * tris.len() + 8 {
        let mut by_edge: std::collections::HashMap<(usize, usize), Vec<(usize, usize)>> =
            std::collections::HashMap::new();
        for (ti, t) in tris.iter().enumerate() {
            for (u, v, w) in [(t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[2], t[0], t[1])] {
                by_edge
                    .entry((u.min(v), u.max(v)))
                    .or_default()
                    .push((ti, w));
            }
        }
        let mut keys: Vec<(usize, usize)> = by_edge.keys().copied().collect();
        keys.sort_unstable();
        let mut flipped = false;
        for key in keys {
            let owners = &by_edge[&key];
            if owners.len() != 2 {
                continue;
            }
            let (u, v) = key;
            let ((t1, r), (t2, s)) = (owners[0], owners[1]);
            if diag_key(r, s) >= diag_key(u, v) {
                continue;
            }
            // Flip only strictly convex, exactly tied quads.
            if orient2d(pts[u], pts[v], pts[r]) * orient2d(pts[u], pts[v], pts[s]) >= 0.0 {
                continue;
            }
            if orient2d(pts[r], pts[s], pts[u]) * orient2d(pts[r], pts[s], pts[v]) >= 0.0 {
                continue;
            }
            let (a, b, c) = (pts[u], pts[v], pts[r]);
            let det = if orient2d(a, b, c) > 0.0 {
                incircle(a, b, c, pts[s])
            } else {
                incircle(a, c, b, pts[s])
            };
            if det.abs() > tie_tol {
                continue;
            }
            tris[t1] = [u, r, s];
            tris[t2] = [v, r, s];
            flipped = true;
            break;
        }
        if !flipped {
            return;
        }
    }
}

/// Undirected Delaunay edges, sorted and deduplicated.
pub fn delaunay_edges(pts: &[Point]) -> Result<Vec<(usize, usize)>, DelaunayError> {
    let tris = triangulate(pts)?;
    let mut edges: Vec<(usize, usize)> = tris
        .iter()
        .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])])
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    Ok(edges)
}

/// Merge near-duplicates, triangulate, and assemble the problem graph with
/// one global smoothing parameter.
pub fn build_scatter_graph(
    pts: &[Point],
    values: &[f64],
    lambda: f64,
) -> Result<(Graph, MergedScatter), ScatterError> {
    if pts.len() != values.len() {
        return Err(ScatterError::LengthMismatch {
            points: pts.len(),
            values: values.len(),
        });
    }
    let merged = merge_close_points(pts, values, 1e-12);
    let edges = delaunay_edges(&merged.points)?;
    let g = Graph::new(
        merged.points.len(),
        edges.into_iter().map(|(u, v)| (u, v, lambda)).collect(),
        merged.weights.clone(),
        merged.values.clone(),
    )?;
    Ok((g, merged))
}
