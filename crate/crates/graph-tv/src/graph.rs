//! Problem-instance representation and graph builders.
//!
//! A [`Graph`] is an immutable instance of the penalized regression problem:
//! vertices carry a weight `w_i >= 0` and an observation `y_i`, edges carry a
//! smoothing parameter `lambda > 0`. Edges are stored as ordered pairs, but
//! the ordering is a notational convenience only; at most one edge joins any
//! unordered pair of vertices.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::GraphError;

/// An ordered edge `(tail, head)` with its smoothing parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub lambda: f64,
}

/// One entry of a vertex's incidence list.
#[derive(Clone, Copy, Debug)]
pub struct Incidence {
    /// Index of the edge in `Graph::edges`.
    pub edge: usize,
    /// True when the vertex is the tail of the edge.
    pub is_tail: bool,
    /// The opposite endpoint.
    pub other: usize,
}

/// Immutable problem instance. Safe to share across concurrent solver runs.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    weights: Vec<f64>,
    data: Vec<f64>,
    incidence: Vec<Vec<Incidence>>,
    pair_index: HashMap<(usize, usize), usize>,
}

/// Smoothing parameters given either globally or per edge.
#[derive(Clone, Copy, Debug)]
pub enum LambdaSpec<'a> {
    Global(f64),
    PerEdge(&'a [f64]),
}

impl Graph {
    /// Validate and build a graph from raw parts.
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize, f64)>,
        weights: Vec<f64>,
        data: Vec<f64>,
    ) -> Result<Graph, GraphError> {
        if weights.len() != n {
            return Err(GraphError::LengthMismatch {
                what: "weights",
                expected: n,
                got: weights.len(),
            });
        }
        if data.len() != n {
            return Err(GraphError::LengthMismatch {
                what: "data",
                expected: n,
                got: data.len(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if w < 0.0 {
                return Err(GraphError::NegativeWeight { vertex: i, weight: w });
            }
        }
        let mut pair_index = HashMap::with_capacity(edges.len());
        let mut stored = Vec::with_capacity(edges.len());
        let mut incidence = vec![Vec::new(); n];
        for (e, &(tail, head, lambda)) in edges.iter().enumerate() {
            for &v in &[tail, head] {
                if v >= n {
                    return Err(GraphError::IndexOutOfRange { edge: e, vertex: v, n });
                }
            }
            if tail == head {
                return Err(GraphError::SelfLoop { edge: e, vertex: tail });
            }
            if !(lambda > 0.0) {
                return Err(GraphError::NonPositiveLambda { edge: e, lambda });
            }
            let key = (tail.min(head), tail.max(head));
            if pair_index.insert(key, e).is_some() {
                return Err(GraphError::ParallelEdge { a: key.0, b: key.1 });
            }
            incidence[tail].push(Incidence {
                edge: e,
                is_tail: true,
                other: head,
            });
            incidence[head].push(Incidence {
                edge: e,
                is_tail: false,
                other: tail,
            });
            stored.push(Edge { tail, head, lambda });
        }
        Ok(Graph {
            n,
            edges: stored,
            weights,
            data,
            incidence,
            pair_index,
        })
    }

    /// Chain graph over `y` with edges `(i, i+1)`. Weights default to 1.
    pub fn build_chain(
        y: &[f64],
        lambdas: &[f64],
        weights: Option<&[f64]>,
    ) -> Result<Graph, GraphError> {
        let n = y.len();
        if n == 0 || lambdas.len() != n - 1 {
            return Err(GraphError::LengthMismatch {
                what: "lambdas",
                expected: n.saturating_sub(1),
                got: lambdas.len(),
            });
        }
        let w = match weights {
            Some(w) => w.to_vec(),
            None => vec![1.0; n],
        };
        let edges = lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| (i, i + 1, l))
            .collect();
        Graph::new(n, edges, w, y.to_vec())
    }

    /// 4-neighbourhood grid over row-major pixel data.
    pub fn build_grid4(
        shape: GridShape,
        data: &[f64],
        lambda: LambdaSpec<'_>,
    ) -> Result<Graph, GraphError> {
        let n = shape.len();
        if data.len() != n {
            return Err(GraphError::ShapeMismatch {
                expected: n,
                got: data.len(),
            });
        }
        let m = shape.edge_count();
        let lambdas: Vec<f64> = match lambda {
            LambdaSpec::Global(l) => vec![l; m],
            LambdaSpec::PerEdge(ls) => {
                if ls.len() != m {
                    return Err(GraphError::LengthMismatch {
                        what: "lambdas",
                        expected: m,
                        got: ls.len(),
                    });
                }
                ls.to_vec()
            }
        };
        let mut edges = Vec::with_capacity(m);
        for r in 0..shape.n1 {
            for c in 0..shape.n2 {
                let v = shape.id(r, c);
                if c + 1 < shape.n2 {
                    edges.push((v, shape.id(r, c + 1), lambdas[edges.len()]));
                }
                if r + 1 < shape.n1 {
                    edges.push((v, shape.id(r + 1, c), lambdas[edges.len()]));
                }
            }
        }
        debug_assert_eq!(edges.len(), m);
        Graph::new(n, edges, vec![1.0; n], data.to_vec())
    }

    /// Add a zero-weight dummy vertex with `y = 0`, joined to every existing
    /// vertex by an edge with parameter `lambda_b`.
    ///
    /// The dummy's weight is zero, so its observation value cannot influence
    /// the fit on the original vertices; it only lets far-apart baseline
    /// regions fuse into one.
    pub fn augment_baseline(&self, lambda_b: f64) -> Result<Graph, GraphError> {
        if !(lambda_b > 0.0) {
            return Err(GraphError::NonPositiveLambda {
                edge: self.edges.len(),
                lambda: lambda_b,
            });
        }
        let dummy = self.n;
        let mut edges: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .map(|e| (e.tail, e.head, e.lambda))
            .collect();
        for v in 0..self.n {
            edges.push((v, dummy, lambda_b));
        }
        let mut weights = self.weights.clone();
        weights.push(0.0);
        let mut data = self.data.clone();
        data.push(0.0);
        Graph::new(self.n + 1, edges, weights, data)
    }

    /// Same topology and data with every lambda replaced by `lambda`.
    pub fn with_uniform_lambda(&self, lambda: f64) -> Result<Graph, GraphError> {
        let edges = self
            .edges
            .iter()
            .map(|e| (e.tail, e.head, lambda))
            .collect();
        Graph::new(self.n, edges, self.weights.clone(), self.data.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn incident(&self, v: usize) -> &[Incidence] {
        &self.incidence[v]
    }

    /// Edge index joining the unordered pair `{a, b}`, if present.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.pair_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
            && self.weights.iter().all(|v| v.is_finite())
            && self.edges.iter().all(|e| e.lambda.is_finite())
    }

    /// Serialize in the edge-list text format:
    /// `n m`, then `m` lines `tail head lambda`, then `n` lines `w y`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.tail, e.head, e.lambda);
        }
        for i in 0..self.n {
            let _ = writeln!(out, "{} {}", self.weights[i], self.data[i]);
        }
        out
    }

    /// Parse the edge-list text format produced by [`Graph::to_edge_list`].
    pub fn from_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut tokens = text.split_whitespace();
        let mut next_usize = |what: &'static str| -> Result<usize, GraphError> {
            tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or(GraphError::LengthMismatch {
                    what,
                    expected: 1,
                    got: 0,
                })
        };
        let n = next_usize("vertex count")?;
        let m = next_usize("edge count")?;
        let rest: Vec<&str> = tokens.collect();
        if rest.len() != 3 * m + 2 * n {
            return Err(GraphError::LengthMismatch {
                what: "edge-list body",
                expected: 3 * m + 2 * n,
                got: rest.len(),
            });
        }
        let parse = |s: &str| -> Result<f64, GraphError> {
            s.parse().map_err(|_| GraphError::LengthMismatch {
                what: "numeric field",
                expected: 1,
                got: 0,
            })
        };
        let mut edges = Vec::with_capacity(m);
        for i in 0..m {
            let tail = rest[3 * i].parse().map_err(|_| GraphError::IndexOutOfRange {
                edge: i,
                vertex: usize::MAX,
                n,
            })?;
            let head = rest[3 * i + 1]
                .parse()
                .map_err(|_| GraphError::IndexOutOfRange {
                    edge: i,
                    vertex: usize::MAX,
                    n,
                })?;
            edges.push((tail, head, parse(rest[3 * i + 2])?));
        }
        let mut weights = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n);
        for i in 0..n {
            weights.push(parse(rest[3 * m + 2 * i])?);
            data.push(parse(rest[3 * m + 2 * i + 1])?);
        }
        Graph::new(n, edges, weights, data)
    }
}

/// Pixel-grid dimensions. Pixel `(r, c)` maps to vertex id `r * n2 + c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridShape {
    pub n1: usize,
    pub n2: usize,
}

impl GridShape {
    pub fn new(n1: usize, n2: usize) -> GridShape {
        assert!(n1 >= 1 && n2 >= 1, "grid dimensions must be positive");
        GridShape { n1, n2 }
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, r: usize, c: usize) -> usize {
        debug_assert!(r < self.n1 && c < self.n2);
        r * self.n2 + c
    }

    /// `2 n1 n2 - n1 - n2` edges in the 4-neighbourhood.
    pub fn edge_count(&self) -> usize {
        2 * self.n1 * self.n2 - self.n1 - self.n2
    }
}
