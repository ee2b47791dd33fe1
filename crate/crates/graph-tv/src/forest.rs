//! The active set as a dynamic forest.
//!
//! Active edges join vertices that share a fitted value, partitioning the
//! vertex set into regions of constant value. The edge subset is kept acyclic
//! at all times, so every region is a tree and splits into two subregions by
//! removing a single edge.

use crate::error::ForestError;
use crate::graph::Graph;

/// Acyclic subset of graph edges with per-vertex region labels.
///
/// Region labels are representative vertex ids. Relabeling on merge and
/// split costs one region traversal, matching the solver's per-event cost.
#[derive(Clone, Debug)]
pub struct ActiveForest {
    active: Vec<bool>,
    adj: Vec<Vec<usize>>,
    comp: Vec<usize>,
    comp_size: Vec<usize>,
    comp_weight: Vec<f64>,
    n_active: usize,
}

/// Aggregates `(m, u)` of a region or subregion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionAggregates {
    pub m: f64,
    pub u: f64,
}

impl ActiveForest {
    /// Fresh forest with no active edges: every vertex is its own region.
    pub fn new(g: &Graph) -> ActiveForest {
        let n = g.n();
        ActiveForest {
            active: vec![false; g.num_edges()],
            adj: vec![Vec::new(); n],
            comp: (0..n).collect(),
            comp_size: vec![1; n],
            comp_weight: g.weights().to_vec(),
            n_active: 0,
        }
    }

    pub fn is_active(&self, edge: usize) -> bool {
        self.active[edge]
    }

    pub fn active_edges(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&e| self.active[e]).collect()
    }

    pub fn num_active(&self) -> usize {
        self.n_active
    }

    pub fn num_regions(&self) -> usize {
        self.comp.len() - self.n_active
    }

    pub fn component_id(&self, v: usize) -> usize {
        self.comp[v]
    }

    pub fn same_region(&self, a: usize, b: usize) -> bool {
        self.comp[a] == self.comp[b]
    }

    pub fn region_size(&self, v: usize) -> usize {
        self.comp_size[self.comp[v]]
    }

    /// Cached total weight `u` of the region containing `v`.
    pub fn region_weight(&self, v: usize) -> f64 {
        self.comp_weight[self.comp[v]]
    }

    /// Active edges incident to `v`.
    pub fn active_incident(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// All vertices of the region containing `k`, by traversal.
    pub fn region_of(&self, g: &Graph, k: usize) -> Vec<usize> {
        self.traverse(g, k, None)
    }

    /// Subregions obtained by removing the active edge `(I, J)`: the side
    /// containing the tail first, then the side containing the head.
    pub fn split_subregions(
        &self,
        g: &Graph,
        edge: usize,
    ) -> Result<(Vec<usize>, Vec<usize>), ForestError> {
        if !self.active[edge] {
            return Err(ForestError::EdgeNotActive(edge));
        }
        let e = g.edges()[edge];
        let tail_side = self.traverse(g, e.tail, Some(edge));
        let head_side = self.traverse(g, e.head, Some(edge));
        Ok((tail_side, head_side))
    }

    /// Activate an edge, merging the two regions of its endpoints.
    pub fn add_active(&mut self, g: &Graph, edge: usize) -> Result<(), ForestError> {
        let e = g.edges()[edge];
        let (ct, ch) = (self.comp[e.tail], self.comp[e.head]);
        if ct == ch {
            return Err(ForestError::WouldCreateCycle(edge));
        }
        let (keep, absorb) = if self.comp_size[ct] >= self.comp_size[ch] {
            (ct, ch)
        } else {
            (ch, ct)
        };
        let absorbed: Vec<usize> = self.traverse(g, absorb, None);
        for &v in &absorbed {
            self.comp[v] = keep;
        }
        self.comp_size[keep] += self.comp_size[absorb];
        self.comp_weight[keep] += self.comp_weight[absorb];
        self.active[edge] = true;
        self.adj[e.tail].push(edge);
        self.adj[e.head].push(edge);
        self.n_active += 1;
        Ok(())
    }

    /// Deactivate an edge, splitting its region in two.
    ///
    /// Both sides get relabeled by their endpoint of the removed edge, which
    /// keeps the invariant that a region's label is one of its own vertices.
    pub fn remove_active(&mut self, g: &Graph, edge: usize) -> Result<(), ForestError> {
        if !self.active[edge] {
            return Err(ForestError::EdgeNotActive(edge));
        }
        let e = g.edges()[edge];
        self.active[edge] = false;
        self.adj[e.tail].retain(|&x| x != edge);
        self.adj[e.head].retain(|&x| x != edge);
        self.n_active -= 1;

        for seed in [e.tail, e.head] {
            let side = self.traverse(g, seed, None);
            let w: f64 = side.iter().map(|&v| g.weights()[v]).sum();
            for &v in &side {
                self.comp[v] = seed;
            }
            self.comp_size[seed] = side.len();
            self.comp_weight[seed] = w;
        }
        debug_assert!(self.comp[e.tail] != self.comp[e.head]);
        Ok(())
    }

    fn traverse(&self, g: &Graph, start: usize, skip_edge: Option<usize>) -> Vec<usize> {
        let mut seen = vec![start];
        let mut mark = vec![false; self.comp.len()];
        mark[start] = true;
        let mut i = 0;
        while i < seen.len() {
            let v = seen[i];
            i += 1;
            for &e in &self.adj[v] {
                if Some(e) == skip_edge {
                    continue;
                }
                let ed = g.edges()[e];
                let o = if ed.tail == v { ed.head } else { ed.tail };
                if !mark[o] {
                    mark[o] = true;
                    seen.push(o);
                }
            }
        }
        seen
    }
}

/// Aggregates `(m, u)` over an explicit member set.
///
/// `m` sums `w_i y_i` plus the signed `c * lambda` boundary terms over every
/// graph edge incident to a member (contributions of edges internal to the
/// set cancel); `u` is the total weight.
pub fn aggregates(g: &Graph, c: &[f64], members: &[usize]) -> RegionAggregates {
    let mut m = 0.0;
    let mut u = 0.0;
    for &i in members {
        let mut mi = g.weights()[i] * g.data()[i];
        for inc in g.incident(i) {
            let term = c[inc.edge] * g.edges()[inc.edge].lambda;
            if inc.is_tail {
                mi += term;
            } else {
                mi -= term;
            }
        }
        m += mi;
        u += g.weights()[i];
    }
    RegionAggregates { m, u }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> Graph {
        Graph::build_chain(&[2.0, 4.0, 0.0], &[0.5, 0.5], None).unwrap()
    }

    #[test]
    fn empty_forest_singletons() {
        let g = chain3();
        let f = ActiveForest::new(&g);
        for k in 0..3 {
            assert_eq!(f.region_of(&g, k), vec![k]);
        }
        assert_eq!(f.num_regions(), 3);
    }

    #[test]
    fn region_after_merge() {
        let g = chain3();
        let mut f = ActiveForest::new(&g);
        f.add_active(&g, 0).unwrap();
        let mut r = f.region_of(&g, 0);
        r.sort_unstable();
        assert_eq!(r, vec![0, 1]);
        assert_eq!(f.region_of(&g, 2), vec![2]);
        assert!(f.same_region(0, 1));
        assert!(!f.same_region(0, 2));
    }

    #[test]
    fn grid_region_traversal() {
        use crate::graph::{GridShape, LambdaSpec};
        let g = Graph::build_grid4(GridShape::new(2, 2), &[0.0; 4], LambdaSpec::Global(1.0))
            .unwrap();
        let mut f = ActiveForest::new(&g);
        let e01 = g.edge_index(0, 1).unwrap();
        let e13 = g.edge_index(1, 3).unwrap();
        f.add_active(&g, e01).unwrap();
        f.add_active(&g, e13).unwrap();
        let mut r = f.region_of(&g, 0);
        r.sort_unstable();
        assert_eq!(r, vec![0, 1, 3]);
    }

    #[test]
    fn cycle_rejected() {
        let g = chain3();
        let mut f = ActiveForest::new(&g);
        f.add_active(&g, 0).unwrap();
        f.add_active(&g, 1).unwrap();
        // Both endpoints of edge 0 already share a region.
        assert_eq!(f.add_active(&g, 0), Err(ForestError::WouldCreateCycle(0)));
    }

    #[test]
    fn remove_then_re_add_restores_partition() {
        let g = chain3();
        let mut f = ActiveForest::new(&g);
        f.add_active(&g, 0).unwrap();
        f.add_active(&g, 1).unwrap();
        let before: Vec<usize> = (0..3).map(|v| f.component_id(v)).collect();
        f.remove_active(&g, 1).unwrap();
        assert!(!f.same_region(1, 2));
        f.add_active(&g, 1).unwrap();
        let after: Vec<usize> = (0..3).map(|v| f.component_id(v)).collect();
        // Same partition, labels may differ.
        assert_eq!(
            before.iter().map(|&c| c == before[0]).collect::<Vec<_>>(),
            after.iter().map(|&c| c == after[0]).collect::<Vec<_>>()
        );
        assert!(f.same_region(0, 2));
    }

    #[test]
    fn remove_inactive_errors() {
        let g = chain3();
        let mut f = ActiveForest::new(&g);
        assert_eq!(f.remove_active(&g, 0), Err(ForestError::EdgeNotActive(0)));
    }

    #[test]
    fn split_star_region() {
        // Star: center 0 joined to 1, 2, 3.
        let g = Graph::new(
            4,
            vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)],
            vec![1.0; 4],
            vec![0.0; 4],
        )
        .unwrap();
        let mut f = ActiveForest::new(&g);
        for e in 0..3 {
            f.add_active(&g, e).unwrap();
        }
        let (mut a, b) = f.split_subregions(&g, 1).unwrap();
        a.sort_unstable();
        assert_eq!(a, vec![0, 1, 3]);
        assert_eq!(b, vec![2]);
    }

    #[test]
    fn split_chain_middle() {
        let g = chain3();
        let mut f = ActiveForest::new(&g);
        f.add_active(&g, 0).unwrap();
        let (a, b) = f.split_subregions(&g, 0).unwrap();
        assert_eq!(a, vec![0]);
        assert_eq!(b, vec![1]);
    }

    #[test]
    fn aggregates_isolated_vertex() {
        let g = Graph::new(1, vec![], vec![1.0], vec![2.0]).unwrap();
        let a = aggregates(&g, &[], &[0]);
        assert_eq!(a, RegionAggregates { m: 2.0, u: 1.0 });
    }

    #[test]
    fn aggregates_boundary_sign() {
        // Region {0,1} of the chain with c_{1,2} = 1, lambda = 0.5.
        let g = chain3();
        let c = vec![0.0, 1.0];
        let a = aggregates(&g, &c, &[0, 1]);
        assert!((a.m - 6.5).abs() < 1e-15);
        assert_eq!(a.u, 2.0);
    }

    #[test]
    fn aggregates_zero_weight() {
        let g = Graph::new(2, vec![(0, 1, 1.0)], vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let a = aggregates(&g, &[0.0], &[0, 1]);
        assert_eq!(a.u, 0.0);
    }

    #[test]
    fn subregion_additivity_and_count_invariant() {
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(11);
        for _ in 0..20 {
            // Random tree on 8 vertices.
            let n = 8;
            let mut edges = Vec::new();
            for v in 1..n {
                edges.push((rng.next_below(v), v, 0.1 + rng.next_f64()));
            }
            let weights: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0).collect();
            let data: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
            let g = Graph::new(n, edges, weights, data).unwrap();
            let c: Vec<f64> = (0..g.num_edges())
                .map(|_| rng.next_f64() * 2.0 - 1.0)
                .collect();
            let mut f = ActiveForest::new(&g);
            let mut active = Vec::new();
            for e in 0..g.num_edges() {
                if rng.next_f64() < 0.6 {
                    f.add_active(&g, e).unwrap();
                    active.push(e);
                }
            }
            assert_eq!(f.num_active() + f.num_regions(), n);
            for &e in &active {
                let whole = aggregates(&g, &c, &f.region_of(&g, g.edges()[e].tail));
                let (s1, s2) = f.split_subregions(&g, e).unwrap();
                let a1 = aggregates(&g, &c, &s1);
                let a2 = aggregates(&g, &c, &s2);
                assert!((a1.m + a2.m - whole.m).abs() < 1e-12);
                assert!((a1.u + a2.u - whole.u).abs() < 1e-12);
            }
            // component_id consistency with region_of.
            for v in 0..n {
                for &u in f.region_of(&g, v).iter() {
                    assert_eq!(f.component_id(u), f.component_id(v));
                }
            }
            // cached region weight matches recomputation.
            for v in 0..n {
                let w: f64 = f.region_of(&g, v).iter().map(|&i| g.weights()[i]).sum();
                assert!((f.region_weight(v) - w).abs() < 1e-12);
            }
        }
    }
}
