//! Splitting a pattern into source components and a center, then laying the
//! pieces out in the padded index space the reduction works in.
//!
//! A source component is a strongly connected component with no edge coming
//! in from the rest of the pattern. Everything else forms the center `C_0`.
//! In the padded pattern `H'` the center takes indices `1..=n_center` and
//! source component `i` (1-based) takes the block
//! `n_center + (i-1)*n_comp + 1 ..= n_center + i*n_comp`, padded at the tail
//! with isolated vertices.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{BoundedDigraph, Vertex};

/// Strongly connected components, each sorted ascending, the list sorted by
/// smallest member.
pub fn strongly_connected_components(g: &BoundedDigraph) -> Vec<Vec<Vertex>> {
    let n = g.vertex_count();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n + 1];
    let mut low = vec![0; n + 1];
    let mut on_stack = vec![false; n + 1];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut comps = Vec::new();
    // Explicit call stack of (vertex, next out-neighbor position).
    let mut calls: Vec<(Vertex, usize)> = Vec::new();

    for root in g.vertices() {
        if index[root] != UNSEEN {
            continue;
        }
        calls.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            let outs = g.out_neighbors(v);
            if *pos < outs.len() {
                let w = outs[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// True iff the underlying undirected graph is connected. The empty graph
/// counts as connected.
pub fn is_weakly_connected(g: &BoundedDigraph) -> bool {
    let n = g.vertex_count();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n + 1];
    let mut stack = vec![1];
    seen[1] = true;
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for &w in g.out_neighbors(v).iter().chain(g.in_neighbors(v)) {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                stack.push(w);
            }
        }
    }
    reached == n
}

/// The unpadded split of a pattern into sources and center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSplit {
    pub pattern: BoundedDigraph,
    /// Source components `C_1..C_k`, ordered by smallest vertex.
    pub sources: Vec<Vec<Vertex>>,
    /// Center vertices `C_0`, ascending.
    pub center: Vec<Vertex>,
    pub n_comp: usize,
    pub n_center: usize,
}

impl SourceSplit {
    pub fn k(&self) -> usize {
        self.sources.len()
    }
}

/// Splits a weakly connected pattern with at least two source components.
pub fn decompose_pattern(h: &BoundedDigraph) -> Result<SourceSplit> {
    if !is_weakly_connected(h) {
        return Err(Error::NotWeaklyConnected);
    }
    let comps = strongly_connected_components(h);
    let mut comp_of = vec![0; h.vertex_count() + 1];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    let mut has_incoming = vec![false; comps.len()];
    for (u, v) in h.edges() {
        if comp_of[u] != comp_of[v] {
            has_incoming[comp_of[v]] = true;
        }
    }
    let mut sources = Vec::new();
    let mut center = Vec::new();
    for (ci, comp) in comps.into_iter().enumerate() {
        if has_incoming[ci] {
            center.extend(comp);
        } else {
            sources.push(comp);
        }
    }
    if sources.len() < 2 {
        return Err(Error::TooFewSources(sources.len()));
    }
    center.sort_unstable();
    let n_comp = sources.iter().map(Vec::len).max().unwrap_or(0);
    let n_center = center.len();
    Ok(SourceSplit {
        pattern: h.clone(),
        sources,
        center,
        n_comp,
        n_center,
    })
}

/// A pattern split into sources and center, together with its padded,
/// canonically indexed form `H'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDecomposition {
    pub split: SourceSplit,
    /// `H'` on `n_center + k * n_comp` vertices.
    pub padded: BoundedDigraph,
    /// `index_map[v - 1]` is the `H'` index of original vertex `v`.
    pub index_map: Vec<Vertex>,
    /// Edges from source blocks into the center block, in `H'` indices,
    /// ascending.
    pub crossing_edges: Vec<(Vertex, Vertex)>,
}

/// Builds `H'` and the index map from a split.
pub fn pad_and_index(split: SourceSplit) -> PatternDecomposition {
    let n_center = split.n_center;
    let n_comp = split.n_comp;
    let mut index_map = vec![0; split.pattern.vertex_count()];
    for (pos, &v) in split.center.iter().enumerate() {
        index_map[v - 1] = pos + 1;
    }
    for (i, comp) in split.sources.iter().enumerate() {
        let base = n_center + i * n_comp;
        for (pos, &v) in comp.iter().enumerate() {
            index_map[v - 1] = base + pos + 1;
        }
    }
    let total = n_center + split.k() * n_comp;
    let mapped: Vec<(Vertex, Vertex)> = split
        .pattern
        .edges()
        .map(|(u, v)| (index_map[u - 1], index_map[v - 1]))
        .collect();
    let padded = BoundedDigraph::new(total, split.pattern.degree_bound(), mapped.iter().copied())
        .expect("relabelling preserves validity");
    let mut crossing_edges: Vec<_> = mapped
        .into_iter()
        .filter(|&(u, v)| u > n_center && v <= n_center)
        .collect();
    crossing_edges.sort_unstable();
    PatternDecomposition {
        split,
        padded,
        index_map,
        crossing_edges,
    }
}

impl PatternDecomposition {
    /// `decompose_pattern` followed by `pad_and_index`.
    pub fn new(h: &BoundedDigraph) -> Result<Self> {
        Ok(pad_and_index(decompose_pattern(h)?))
    }

    pub fn pattern(&self) -> &BoundedDigraph {
        &self.split.pattern
    }

    pub fn k(&self) -> usize {
        self.split.k()
    }

    pub fn n_comp(&self) -> usize {
        self.split.n_comp
    }

    pub fn n_center(&self) -> usize {
        self.split.n_center
    }

    /// Which block an `H'` index lives in: 0 for the center, `i` for source
    /// block `i`.
    pub fn block_of(&self, h_index: Vertex) -> usize {
        if h_index <= self.n_center() {
            0
        } else {
            (h_index - self.n_center() - 1) / self.n_comp() + 1
        }
    }

    /// First `H'` index of source block `t` (1-based).
    pub fn block_start(&self, t: usize) -> Vertex {
        self.n_center() + (t - 1) * self.n_comp() + 1
    }

    /// True for padding vertices of `H'`.
    pub fn is_padding(&self, h_index: Vertex) -> bool {
        match self.block_of(h_index) {
            0 => false,
            t => h_index - self.block_start(t) >= self.split.sources[t - 1].len(),
        }
    }

    /// Human-readable summary: membership, sizes, index map, crossing edges.
    pub fn report(&self) -> String {
        let join = |vs: &[Vertex]| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "k {}", self.k());
        let _ = writeln!(out, "n_comp {}", self.n_comp());
        let _ = writeln!(out, "n_center {}", self.n_center());
        let _ = writeln!(out, "padded_vertices {}", self.padded.vertex_count());
        let _ = writeln!(out, "center {}", join(&self.split.center));
        for (i, comp) in self.split.sources.iter().enumerate() {
            let _ = writeln!(out, "source {} {}", i + 1, join(comp));
        }
        for (v, idx) in self.index_map.iter().enumerate() {
            let _ = writeln!(out, "index {} {}", v + 1, idx);
        }
        for (u, v) in &self.crossing_edges {
            let _ = writeln!(out, "crossing {u} {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::patterns::{cycle, star, three_source_example};

    #[test]
    fn scc_of_three_source_example() {
        let comps = strongly_connected_components(&three_source_example());
        assert_eq!(comps, vec![vec![1], vec![2], vec![3, 4, 5], vec![6], vec![7]]);
    }

    #[test]
    fn scc_trivial_cases() {
        assert_eq!(strongly_connected_components(&BoundedDigraph::empty(1, 0)), vec![vec![1]]);
        assert_eq!(strongly_connected_components(&cycle(3)), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn weak_connectivity() {
        assert!(is_weakly_connected(&three_source_example()));
        assert!(!is_weakly_connected(&BoundedDigraph::empty(2, 0)));
        assert!(is_weakly_connected(&BoundedDigraph::empty(1, 0)));
    }

    #[test]
    fn decompose_three_source_example() {
        let split = decompose_pattern(&three_source_example()).unwrap();
        assert_eq!(split.k(), 3);
        assert_eq!(split.sources, vec![vec![1], vec![3, 4, 5], vec![6]]);
        assert_eq!(split.center, vec![2, 7]);
        assert_eq!(split.n_comp, 3);
        assert_eq!(split.n_center, 2);
    }

    #[test]
    fn decompose_star() {
        let split = decompose_pattern(&star(3)).unwrap();
        assert_eq!(split.sources, vec![vec![1], vec![2], vec![3]]);
        assert_eq!(split.center, vec![4]);
        assert_eq!((split.n_comp, split.n_center), (1, 1));
    }

    #[test]
    fn decompose_errors() {
        let two_edges = BoundedDigraph::new(4, 1, [(1, 2), (3, 4)]).unwrap();
        assert!(matches!(decompose_pattern(&two_edges), Err(Error::NotWeaklyConnected)));
        let path = BoundedDigraph::new(3, 1, [(1, 2), (2, 3)]).unwrap();
        assert!(matches!(decompose_pattern(&path), Err(Error::TooFewSources(1))));
        assert!(matches!(decompose_pattern(&cycle(4)), Err(Error::TooFewSources(1))));
    }

    #[test]
    fn pad_three_source_example() {
        let dec = PatternDecomposition::new(&three_source_example()).unwrap();
        assert_eq!(dec.padded.vertex_count(), 11);
        // C_0 = {v2, v7} -> {1, 2}
        assert_eq!(dec.index_map[2 - 1], 1);
        assert_eq!(dec.index_map[7 - 1], 2);
        // C_1 = {v1} -> 3, padding 4 and 5
        assert_eq!(dec.index_map[1 - 1], 3);
        assert!(dec.is_padding(4) && dec.is_padding(5));
        // C_2 = {v3, v4, v5} -> {6, 7, 8}
        assert_eq!(&dec.index_map[2..5], &[6, 7, 8]);
        // C_3 = {v6} -> 9, padding 10 and 11
        assert_eq!(dec.index_map[6 - 1], 9);
        assert!(dec.padded.out_neighbors(10).is_empty() && dec.padded.in_neighbors(11).is_empty());
        assert_eq!(dec.crossing_edges, vec![(3, 1), (6, 1), (9, 2)]);
        assert_eq!(dec.block_of(2), 0);
        assert_eq!(dec.block_of(8), 2);
        assert_eq!(dec.block_of(9), 3);
    }

    #[test]
    fn star_needs_no_padding() {
        let dec = PatternDecomposition::new(&star(3)).unwrap();
        assert_eq!(dec.padded.vertex_count(), 4);
        assert_eq!(dec.index_map, vec![2, 3, 4, 1]);
        assert!((1..=4).all(|v| !dec.is_padding(v)));
    }

    #[test]
    fn equal_sized_sources_reassemble_without_padding() {
        // Two 2-cycles {1,2} and {3,4} both feeding 5.
        let h = BoundedDigraph::new(5, 2, [(1, 2), (2, 1), (3, 4), (4, 3), (2, 5), (4, 5)]).unwrap();
        let dec = PatternDecomposition::new(&h).unwrap();
        assert_eq!(dec.padded.vertex_count(), h.vertex_count());
        assert_eq!(dec.padded.edge_count(), h.edge_count());
    }

    #[test]
    fn report_lists_everything() {
        let dec = PatternDecomposition::new(&three_source_example()).unwrap();
        let r = dec.report();
        assert!(r.contains("k 3\n"));
        assert!(r.contains("source 2 3 4 5\n"));
        assert!(r.contains("center 2 7\n"));
        assert!(r.contains("crossing 9 2\n"));
    }
}
