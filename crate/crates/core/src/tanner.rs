//! Bipartite edge structure derived from a parity-check matrix, with
//! precomputed extrinsic-neighbor index tables.
//!
//! Edge ids are dense integers in row-major scan order of the matrix, so
//! per-edge message states are flat arrays and the decoder inner loops walk
//! contiguous index tables. The tables are built once per code and shared
//! read-only by all decode workers.

use crate::codes::ParityCheckMatrix;

/// One edge of the bipartite graph: (check index, variable index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub check: usize,
    pub var: usize,
}

/// The bipartite graph of a parity-check matrix.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    num_checks: usize,
    num_vars: usize,
    edges: Vec<Edge>,
    /// Edge ids incident to each variable, in edge-id order.
    var_edges: Vec<Vec<usize>>,
    /// Edge ids incident to each check, in edge-id order.
    check_edges: Vec<Vec<usize>>,
    /// Per edge e = (c, v): the edges of v other than e.
    extrinsic_var: Vec<Vec<usize>>,
    /// Per edge e = (c, v): the edges of c other than e.
    extrinsic_check: Vec<Vec<usize>>,
}

impl TannerGraph {
    /// Builds the graph; edge order is the row-major scan of the matrix.
    pub fn build(h: &ParityCheckMatrix) -> TannerGraph {
        let mut edges = Vec::with_capacity(h.num_ones());
        for (check, row) in h.rows().iter().enumerate() {
            for &var in row {
                edges.push(Edge { check, var });
            }
        }
        let mut var_edges = vec![Vec::new(); h.num_vars()];
        let mut check_edges = vec![Vec::new(); h.num_checks()];
        for (e, edge) in edges.iter().enumerate() {
            var_edges[edge.var].push(e);
            check_edges[edge.check].push(e);
        }
        let extrinsic_var = edges
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                var_edges[edge.var]
                    .iter()
                    .copied()
                    .filter(|&e2| e2 != e)
                    .collect()
            })
            .collect();
        let extrinsic_check = edges
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                check_edges[edge.check]
                    .iter()
                    .copied()
                    .filter(|&e2| e2 != e)
                    .collect()
            })
            .collect();
        TannerGraph {
            num_checks: h.num_checks(),
            num_vars: h.num_vars(),
            edges,
            var_edges,
            check_edges,
            extrinsic_var,
            extrinsic_check,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    pub fn check_edges(&self, c: usize) -> &[usize] {
        &self.check_edges[c]
    }

    /// Edges of the variable of `e`, excluding `e` itself.
    pub fn extrinsic_var(&self, e: usize) -> &[usize] {
        &self.extrinsic_var[e]
    }

    /// Edges of the check of `e`, excluding `e` itself.
    pub fn extrinsic_check(&self, e: usize) -> &[usize] {
        &self.extrinsic_check[e]
    }

    /// Largest variable degree (column weight) in the graph.
    pub fn max_var_degree(&self) -> usize {
        self.var_edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True iff the graph is a forest (no cycles), in which case message
    /// passing computes exact posteriors after enough iterations.
    pub fn is_cycle_free(&self) -> bool {
        // Union-find over variable and check nodes; an edge joining two
        // already-connected nodes closes a cycle.
        let n = self.num_vars + self.num_checks;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for edge in &self.edges {
            let a = find(&mut parent, edge.var);
            let b = find(&mut parent, self.num_vars + edge.check);
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// Number of message-passing iteration pairs that saturate a cycle-free
    /// graph (its diameter in edge pairs); meaningless for cyclic graphs.
    pub fn depth_bound(&self) -> usize {
        self.num_vars + self.num_checks
    }
}

/// Collects `messages[i]` for each edge id in `indices`, in table order.
/// Panics if an index is out of bounds.
pub fn gather(messages: &[f64], indices: &[usize]) -> Vec<f64> {
    indices.iter().map(|&e| messages[e]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::ParityCheckMatrix;

    fn small() -> TannerGraph {
        let h = ParityCheckMatrix::from_dense("h", 2, 3, &[1, 1, 0, 0, 1, 1]).unwrap();
        TannerGraph::build(&h)
    }

    #[test]
    fn edge_order_is_row_major() {
        let g = small();
        assert_eq!(g.num_edges(), 4);
        assert_eq!(g.edge(0), Edge { check: 0, var: 0 });
        assert_eq!(g.edge(1), Edge { check: 0, var: 1 });
        assert_eq!(g.edge(2), Edge { check: 1, var: 1 });
        assert_eq!(g.edge(3), Edge { check: 1, var: 2 });
    }

    #[test]
    fn extrinsic_tables_exclude_self() {
        let g = small();
        // Edge 1 = (check 0, var 1); var 1 also carries edge 2.
        assert_eq!(g.extrinsic_var(1), &[2]);
        assert_eq!(g.extrinsic_check(1), &[0]);
        for e in 0..g.num_edges() {
            assert!(!g.extrinsic_var(e).contains(&e));
            assert!(!g.extrinsic_check(e).contains(&e));
            let edge = g.edge(e);
            assert_eq!(g.extrinsic_var(e).len(), g.var_edges(edge.var).len() - 1);
            assert_eq!(
                g.extrinsic_check(e).len(),
                g.check_edges(edge.check).len() - 1
            );
        }
    }

    #[test]
    fn single_all_ones_row_has_full_extrinsic_checks() {
        let h = ParityCheckMatrix::from_dense("rep-check", 1, 4, &[1, 1, 1, 1]).unwrap();
        let g = TannerGraph::build(&h);
        for e in 0..g.num_edges() {
            assert_eq!(g.extrinsic_check(e).len(), 3);
            assert!(g.extrinsic_var(e).is_empty());
        }
    }

    #[test]
    fn hamming_has_twelve_edges() {
        let h = crate::codes::bank::hamming_7_4();
        let g = TannerGraph::build(&h);
        assert_eq!(g.num_edges(), 12);
    }

    #[test]
    fn gather_basics() {
        let g = small();
        let state = vec![0.1, 0.2, 0.3, 0.4];
        assert!(gather(&state, &[]).is_empty());
        let all: Vec<usize> = (0..4).collect();
        assert_eq!(gather(&state, &all), state);
        assert_eq!(gather(&state, g.extrinsic_var(1)), vec![0.3]);
    }

    #[test]
    fn gather_matches_naive_set_recomputation() {
        let h = crate::codes::bank::hamming_7_4();
        let g = TannerGraph::build(&h);
        let state: Vec<f64> = (0..g.num_edges()).map(|e| e as f64 * 0.5).collect();
        for e in 0..g.num_edges() {
            let edge = g.edge(e);
            // Naive: walk all edges of the variable, skip e.
            let naive: Vec<f64> = g
                .edges()
                .iter()
                .enumerate()
                .filter(|(e2, other)| *e2 != e && other.var == edge.var)
                .map(|(e2, _)| state[e2])
                .collect();
            assert_eq!(gather(&state, g.extrinsic_var(e)), naive);
        }
    }

    #[test]
    fn build_is_deterministic() {
        let h = crate::codes::bank::get("BCH(15,7)").unwrap();
        let a = TannerGraph::build(&h);
        let b = TannerGraph::build(&h);
        assert_eq!(a.edges(), b.edges());
        for e in 0..a.num_edges() {
            assert_eq!(a.extrinsic_var(e), b.extrinsic_var(e));
        }
    }

    #[test]
    fn repetition_graph_is_cycle_free_and_hamming_is_not() {
        let rep = crate::codes::bank::repetition(5);
        assert!(TannerGraph::build(&rep).is_cycle_free());
        let ham = crate::codes::bank::hamming_7_4();
        assert!(!TannerGraph::build(&ham).is_cycle_free());
    }

    #[test]
    fn column_permutation_preserves_degree_sequences() {
        let h = crate::codes::bank::get("BCH(15,7)").unwrap();
        // Rebuild from a column-rotated matrix.
        let n = h.num_vars();
        let entries: Vec<(usize, usize)> = h
            .rows()
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&c| (r, (c + 3) % n)))
            .collect();
        let h2 = ParityCheckMatrix::from_entries("rot", h.num_checks(), n, &entries).unwrap();
        let a = TannerGraph::build(&h);
        let b = TannerGraph::build(&h2);
        let mut da: Vec<usize> = (0..n).map(|v| a.var_edges(v).len()).collect();
        let mut db: Vec<usize> = (0..n).map(|v| b.var_edges(v).len()).collect();
        da.sort_unstable();
        db.sort_unstable();
        assert_eq!(da, db);
        let mut ca: Vec<usize> = (0..a.num_checks()).map(|c| a.check_edges(c).len()).collect();
        let mut cb: Vec<usize> = (0..b.num_checks()).map(|c| b.check_edges(c).len()).collect();
        ca.sort_unstable();
        cb.sort_unstable();
        assert_eq!(ca, cb);
    }
}
