//! Edge processing orders.
//!
//! The solver satisfies edges one at a time; the order matters for speed but
//! not for the result. For grids, processing cut lines at dyadic positions
//! keeps intermediate regions small (at most `4^p` vertices during stage
//! `p`), which is what makes large images tractable.

use crate::graph::{Graph, GridShape};

/// A permutation of the edge indices of a graph.
#[derive(Clone, Debug)]
pub struct EdgeSchedule {
    order: Vec<usize>,
}

impl EdgeSchedule {
    pub fn from_order(order: Vec<usize>) -> Self {
        EdgeSchedule { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Edges in index order.
pub fn natural_order(g: &Graph) -> EdgeSchedule {
    EdgeSchedule::from_order((0..g.num_edges()).collect())
}

/// Stage `p` cut positions along an axis of length `len`: `2^p q - 2^(p-1)`
/// for `q = 1, 2, ...`, kept while they separate two cells.
fn stage_cuts(p: u32, len: usize) -> Vec<usize> {
    let step = 1usize << p;
    let offset = 1usize << (p - 1);
    let mut cuts = Vec::new();
    let mut q = 1usize;
    loop {
        let Some(pos) = q.checked_mul(step).map(|v| v - offset) else {
            break;
        };
        if pos > len.saturating_sub(1) {
            break;
        }
        cuts.push(pos);
        q += 1;
    }
    cuts
}

/// The dyadic stages for a 4-neighbourhood grid: stage `p` lists the edges
/// crossing cut lines at positions `2^p q - 2^(p-1)`, columns first then
/// rows, each cut in increasing position and increasing cross-index.
///
/// Every grid edge crosses exactly one cut line at exactly one stage, so the
/// concatenation of all stages is a permutation of the edge set.
pub fn dyadic_grid_stages(g: &Graph, shape: GridShape) -> Vec<Vec<usize>> {
    let (n1, n2) = (shape.n1, shape.n2);
    let max_side = n1.max(n2).max(1);
    let num_stages = (usize::BITS - (max_side - 1).leading_zeros()).max(1);
    let mut stages = Vec::new();
    for p in 1..=num_stages {
        let mut stage = Vec::new();
        for cpos in stage_cuts(p, n2) {
            for r in 0..n1 {
                let a = shape.id(r, cpos - 1);
                let b = shape.id(r, cpos);
                stage.push(g.edge_index(a, b).expect("grid edge"));
            }
        }
        for rpos in stage_cuts(p, n1) {
            for c in 0..n2 {
                let a = shape.id(rpos - 1, c);
                let b = shape.id(rpos, c);
                stage.push(g.edge_index(a, b).expect("grid edge"));
            }
        }
        stages.push(stage);
    }
    stages
}

/// All dyadic stages concatenated into one schedule.
pub fn dyadic_grid_order(g: &Graph, shape: GridShape) -> EdgeSchedule {
    EdgeSchedule::from_order(dyadic_grid_stages(g, shape).concat())
}

/// Upper bound on the region size reachable while processing stage `p`
/// (1-based) on a grid of `n` vertices.
pub fn max_region_bound(p: u32, n: usize) -> usize {
    4usize
        .checked_pow(p)
        .map_or(n, |v| v.min(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n1: usize, n2: usize) -> (Graph, GridShape) {
        let shape = GridShape { n1, n2 };
        let y = vec![0.0; n1 * n2];
        let g = Graph::build_grid4(shape, &y, crate::graph::LambdaSpec::Global(1.0)).unwrap();
        (g, shape)
    }

    #[test]
    fn two_by_two_single_stage() {
        let (g, shape) = grid(2, 2);
        let stages = dyadic_grid_stages(&g, shape);
        assert_eq!(stages.len(), 1);
        let pairs: Vec<(usize, usize)> = stages[0]
            .iter()
            .map(|&e| (g.edges()[e].tail, g.edges()[e].head))
            .collect();
        // Column cut between 0|1 (both rows), then row cut between 0|1.
        assert_eq!(pairs, vec![(0, 1), (2, 3), (0, 2), (1, 3)]);
    }

    #[test]
    fn four_by_four_stage_sizes() {
        let (g, shape) = grid(4, 4);
        let stages = dyadic_grid_stages(&g, shape);
        assert_eq!(stages.len(), 2);
        // Stage 1: cuts at 1 and 3 in both directions, 4 edges per cut.
        assert_eq!(stages[0].len(), 16);
        // Stage 2: cut at 2 in both directions.
        assert_eq!(stages[1].len(), 8);
        let order = dyadic_grid_order(&g, shape);
        assert_eq!(order.len(), g.num_edges());
        let mut seen = vec![false; g.num_edges()];
        for &e in order.order() {
            assert!(!seen[e], "edge {e} repeated");
            seen[e] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn four_by_four_stage_one_prefix() {
        let (g, shape) = grid(4, 4);
        let stages = dyadic_grid_stages(&g, shape);
        let pairs: Vec<(usize, usize)> = stages[0][..8]
            .iter()
            .map(|&e| (g.edges()[e].tail, g.edges()[e].head))
            .collect();
        // Column cut 1 rows 0..4, then column cut 3 rows 0..4.
        assert_eq!(
            pairs,
            vec![
                (0, 1),
                (4, 5),
                (8, 9),
                (12, 13),
                (2, 3),
                (6, 7),
                (10, 11),
                (14, 15)
            ]
        );
    }

    #[test]
    fn permutation_for_rectangles() {
        for &(n1, n2) in &[(1, 7), (3, 5), (16, 16), (5, 2)] {
            let (g, shape) = grid(n1, n2);
            let order = dyadic_grid_order(&g, shape);
            let mut idx: Vec<usize> = order.order().to_vec();
            idx.sort_unstable();
            assert_eq!(idx, (0..g.num_edges()).collect::<Vec<_>>(), "{n1}x{n2}");
        }
    }

    #[test]
    fn region_bound_values() {
        assert_eq!(max_region_bound(1, 256), 4);
        assert_eq!(max_region_bound(2, 256), 16);
        assert_eq!(max_region_bound(4, 256), 256);
        assert_eq!(max_region_bound(5, 256), 256);
        assert_eq!(max_region_bound(40, 1000), 1000);
    }

    #[test]
    fn chain_like_grid_uses_row_cuts_only() {
        let (g, shape) = grid(1, 8);
        let order = dyadic_grid_order(&g, shape);
        assert_eq!(order.len(), 7);
        let firsts: Vec<usize> = order.order()[..4]
            .iter()
            .map(|&e| g.edges()[e].tail)
            .collect();
        // Stage 1 cuts at odd positions 1, 3, 5, 7.
        assert_eq!(firsts, vec![0, 2, 4, 6]);
    }
}
