//! Undirected graphs with nonnegative extended-rational edge weights.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ExtRational;
use crate::subset::{VertexSet, MAX_VERTICES};

/// Undirected weighted graph on vertices `0..n`.
///
/// Construction drops self-loops and zero-weight edges and merges parallel
/// edges by summing their weights, so every stored edge `{u, v}` has `u < v`
/// and a strictly positive (possibly infinite) weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: BTreeMap<(usize, usize), ExtRational>,
}

impl WeightedGraph {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_VERTICES);
        WeightedGraph { n, edges: BTreeMap::new() }
    }

    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, ExtRational)>,
    {
        if n > MAX_VERTICES {
            return Err(Error::InvalidInput(format!("{n} vertices exceed the limit of {MAX_VERTICES}")));
        }
        let mut g = WeightedGraph::empty(n);
        for (u, v, w) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if w.is_negative() {
                return Err(Error::NegativeWeight { u, v });
            }
            if u == v {
                warn!("dropping self-loop on vertex {u}");
                continue;
            }
            g.add_edge(u, v, &w);
        }
        Ok(g)
    }

    fn add_edge(&mut self, u: usize, v: usize, w: &ExtRational) {
        if w.is_zero() || u == v {
            return;
        }
        let key = (u.min(v), u.max(v));
        *self.edges.entry(key).or_default() += w;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_edgeless(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &ExtRational)> {
        self.edges.iter().map(|(&(u, v), w)| (u, v, w))
    }

    pub fn weight(&self, u: usize, v: usize) -> ExtRational {
        self.edges.get(&(u.min(v), u.max(v))).cloned().unwrap_or_default()
    }

    /// Weight of the cut induced by `x`: edges with exactly one endpoint in `x`.
    pub fn cut_weight(&self, x: VertexSet) -> ExtRational {
        debug_assert!(x.is_subset(self.vertices()));
        let mut total = ExtRational::zero();
        for (&(u, v), w) in &self.edges {
            if x.contains(u) != x.contains(v) {
                total += w;
                if total.is_infinite() {
                    break;
                }
            }
        }
        total
    }

    /// Identifies vertices: old vertex `i` becomes `partition[i]`.
    ///
    /// The result has `max(partition) + 1` vertices. Edges inside a merged
    /// class vanish and parallel edges are summed.
    pub fn merge_vertices(&self, partition: &[usize]) -> Result<WeightedGraph> {
        if partition.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "partition covers {} of {} vertices",
                partition.len(),
                self.n
            )));
        }
        let new_n = partition.iter().map(|&p| p + 1).max().unwrap_or(0);
        if new_n > MAX_VERTICES {
            return Err(Error::InvalidInput(format!("{new_n} merged vertices exceed the limit")));
        }
        let mut g = WeightedGraph::empty(new_n);
        for (&(u, v), w) in &self.edges {
            g.add_edge(partition[u], partition[v], w);
        }
        Ok(g)
    }

    /// Subgraph induced by `keep`, reindexed in ascending vertex order.
    pub fn induced(&self, keep: VertexSet) -> WeightedGraph {
        let embed = keep.to_vec();
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in embed.iter().enumerate() {
            local[v] = i;
        }
        let mut g = WeightedGraph::empty(embed.len());
        for (&(u, v), w) in &self.edges {
            if keep.contains(u) && keep.contains(v) {
                g.add_edge(local[u], local[v], w);
            }
        }
        g
    }

    /// `Σ_{v ∉ keep} w(u, v)` for every vertex `u`.
    pub fn boundary_charges(&self, keep: VertexSet) -> Vec<ExtRational> {
        let mut charges = vec![ExtRational::zero(); self.n];
        for (&(u, v), w) in &self.edges {
            match (keep.contains(u), keep.contains(v)) {
                (true, false) => charges[u] += w,
                (false, true) => charges[v] += w,
                _ => {}
            }
        }
        charges
    }

    /// Sum of all finite edge weights.
    pub fn finite_weight_total(&self) -> ExtRational {
        self.edges.values().filter(|w| w.is_finite()).sum()
    }

    /// Replaces every infinite weight by `value`.
    pub fn with_infinite_weights_replaced(&self, value: &ExtRational) -> WeightedGraph {
        let mut g = self.clone();
        for w in g.edges.values_mut() {
            if w.is_infinite() {
                *w = value.clone();
            }
        }
        g
    }

    /// Adds `scale · other` with `other`'s vertex `i` mapped onto `embed[i]`.
    pub fn add_scaled(&mut self, other: &WeightedGraph, embed: &[usize], scale: &crate::numeric::Rational) -> Result<()> {
        for (&(u, v), w) in &other.edges {
            if scale.is_zero() {
                break;
            }
            self.add_edge(embed[u], embed[v], &w.scale(scale)?);
        }
        Ok(())
    }

    /// Connected components of the subgraph formed by the edges accepted by `keep_edge`,
    /// each as a vertex set, ordered by smallest member.
    pub fn components_by<F>(&self, keep_edge: F) -> Vec<VertexSet>
    where
        F: Fn(&ExtRational) -> bool,
    {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (&(u, v), w) in &self.edges {
            if keep_edge(w) {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut by_root: BTreeMap<usize, VertexSet> = BTreeMap::new();
        for v in 0..self.n {
            let r = find(&mut parent, v);
            by_root.entry(r).or_default().insert(v);
        }
        by_root.into_values().collect()
    }

    pub fn components(&self) -> Vec<VertexSet> {
        self.components_by(|_| true)
    }

    pub fn infinite_components(&self) -> Vec<VertexSet> {
        self.components_by(|w| w.is_infinite())
    }
}

/// JSON form: `{"n": 3, "edges": [[0, 1, "1/2"], [1, 2, "inf"]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    #[serde(default)]
    pub edges: Vec<(usize, usize, ExtRational)>,
}

impl From<&WeightedGraph> for GraphJson {
    fn from(g: &WeightedGraph) -> Self {
        GraphJson { n: g.n, edges: g.edges().map(|(u, v, w)| (u, v, w.clone())).collect() }
    }
}

impl TryFrom<GraphJson> for WeightedGraph {
    type Error = Error;
    fn try_from(j: GraphJson) -> Result<Self> {
        WeightedGraph::new(j.n, j.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(v: i64) -> ExtRational {
        ExtRational::from_int(v)
    }

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, w(1)), (1, 2, w(1)), (0, 2, w(1))]).unwrap()
    }

    #[test]
    fn cut_of_triangle_vertex() {
        assert_eq!(triangle().cut_weight(VertexSet::from_indices([0])), w(2));
    }

    #[test]
    fn empty_and_full_cuts_are_zero() {
        let g = triangle();
        assert_eq!(g.cut_weight(VertexSet::EMPTY), w(0));
        assert_eq!(g.cut_weight(g.vertices()), w(0));
    }

    #[test]
    fn construction_normalises_edges() {
        let g = WeightedGraph::new(3, [(0, 0, w(5)), (1, 0, w(2)), (0, 1, w(3)), (1, 2, w(0))]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), w(5));
        assert!(matches!(
            WeightedGraph::new(2, [(0, 1, w(-1))]),
            Err(Error::NegativeWeight { u: 0, v: 1 })
        ));
        assert!(matches!(WeightedGraph::new(2, [(0, 2, w(1))]), Err(Error::VertexOutOfRange { vertex: 2, n: 2 })));
    }

    #[test]
    fn merge_drops_internal_edges() {
        let g = WeightedGraph::new(2, [(0, 1, w(3))]).unwrap();
        let m = g.merge_vertices(&[0, 0]).unwrap();
        assert_eq!(m.n(), 1);
        assert!(m.is_edgeless());
    }

    #[test]
    fn merge_sums_parallel_edges() {
        let g = WeightedGraph::new(3, [(0, 1, w(1)), (0, 2, w(2))]).unwrap();
        let m = g.merge_vertices(&[0, 1, 1]).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.edge_count(), 1);
        assert_eq!(m.weight(0, 1), w(3));
    }

    #[test]
    fn merge_identity_is_identity() {
        let g = triangle();
        assert_eq!(g.merge_vertices(&[0, 1, 2]).unwrap(), g);
    }

    #[test]
    fn components_split_on_infinite_edges() {
        let g = WeightedGraph::new(4, [(0, 1, ExtRational::Infinity), (1, 2, w(1))]).unwrap();
        assert_eq!(g.components().len(), 2);
        let inf = g.infinite_components();
        assert_eq!(inf, vec![VertexSet::from_indices([0, 1]), VertexSet::singleton(2), VertexSet::singleton(3)]);
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
        (1..=max_n).prop_flat_map(|n| {
            let weight = prop_oneof![
                8 => (0i64..6, 1i64..4).prop_map(|(a, b)| ExtRational::ratio(a, b)),
                1 => Just(ExtRational::Infinity),
            ];
            proptest::collection::vec((0..n, 0..n, weight), 0..3 * n)
                .prop_map(move |es| WeightedGraph::new(n, es).unwrap())
        })
    }

    proptest! {
        #[test]
        fn cut_is_posimodular_and_symmetric(g in arb_graph(6)) {
            let all = g.vertices();
            for a in all.subsets() {
                prop_assert_eq!(g.cut_weight(a), g.cut_weight(all - a));
                for b in all.subsets() {
                    let lhs = g.cut_weight(a) + g.cut_weight(b);
                    let rhs = g.cut_weight(a - b) + g.cut_weight(b - a);
                    prop_assert!(lhs >= rhs, "A={:?} B={:?}", a, b);
                }
            }
        }
    }
}
